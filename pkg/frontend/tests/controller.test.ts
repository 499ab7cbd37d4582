import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import {
  HISTORY_PAGE_SIZE,
  historyPageCount,
  initialState,
  loadFile,
  loadHistory,
  submitSummarization,
} from "../src/controller.js";

type FetchLike = typeof fetch;

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

function clientWith(handler: (url: string, init?: RequestInit) => Response): {
  client: ApiClient;
  calls: { url: string; init?: RequestInit }[];
} {
  const calls: { url: string; init?: RequestInit }[] = [];
  const fetchImpl: FetchLike = async (input, init) => {
    const url = String(input);
    calls.push({ url, init });
    return handler(url, init);
  };
  return { client: new ApiClient("", fetchImpl), calls };
}

const summaryBody = {
  id: "11111111-1111-4111-8111-111111111111",
  model: "passage",
  summary: "Lungs clear.",
  created_at: "2026-01-01T00:00:00+00:00",
  truncated_input: false,
};

describe("submitSummarization", () => {
  it("renders the summary on success and clears pending", async () => {
    const { client, calls } = clientWith(() => jsonResponse(200, summaryBody));
    let state = { ...initialState(), inputText: "The lungs are clear." };
    state = await submitSummarization(state, client);
    expect(state.pending).toBe(false);
    expect(state.result?.summary).toBe("Lungs clear.");
    expect(state.errorBanner).toBeNull();
    expect(calls.length).toBe(1);
    const body = JSON.parse(String(calls[0].init?.body));
    expect(body).toEqual({ model: "passage", text: "The lungs are clear." });
  });

  it("blocks empty input without sending a request", async () => {
    const { client, calls } = clientWith(() => jsonResponse(200, summaryBody));
    let state = { ...initialState(), inputText: "   " };
    state = await submitSummarization(state, client);
    expect(calls.length).toBe(0);
    expect(state.inlineError).toMatch(/text/i);
  });

  it("keeps the typed input when the service is down", async () => {
    const { client } = clientWith(() => {
      throw new Error("connection refused");
    });
    let state = { ...initialState(), inputText: "Important symptoms." };
    state = await submitSummarization(state, client);
    expect(state.inputText).toBe("Important symptoms.");
    expect(state.errorBanner).toMatch(/failed/i);
    expect(state.pending).toBe(false);
  });

  it("shows a 400 as an inline validation message", async () => {
    const { client } = clientWith(() =>
      jsonResponse(400, { code: "invalid_request", message: "unknown model" }),
    );
    let state = { ...initialState(), inputText: "text" };
    state = await submitSummarization(state, client);
    expect(state.inlineError).toBe("unknown model");
    expect(state.errorBanner).toBeNull();
    expect(state.inputText).toBe("text");
  });

  it("ignores a submit while one is already in flight", async () => {
    const { client, calls } = clientWith(() => jsonResponse(200, summaryBody));
    const state = { ...initialState(), inputText: "x", pending: true };
    const next = await submitSummarization(state, client);
    expect(next).toBe(state);
    expect(calls.length).toBe(0);
  });
});

describe("loadFile", () => {
  it("loads a .txt file into the textarea state", async () => {
    const file = new File(["patient has a mild fever"], "notes.txt", {
      type: "text/plain",
    });
    const state = await loadFile(initialState(), file);
    expect(state.inputText).toBe("patient has a mild fever");
    expect(state.inlineError).toBeNull();
  });

  it("rejects a non-.txt file", async () => {
    const file = new File(["%PDF"], "scan.pdf");
    const state = await loadFile({ ...initialState(), inputText: "keep" }, file);
    expect(state.inlineError).toMatch(/\.txt/);
    expect(state.inputText).toBe("keep");
  });

  it("rejects an oversize file", async () => {
    const big = new File([new Uint8Array((1 << 20) + 1)], "big.txt");
    const state = await loadFile(initialState(), big);
    expect(state.inlineError).toMatch(/1 MiB/);
  });

  it("accepts an empty .txt leaving the textarea empty", async () => {
    const file = new File([""], "empty.txt");
    const state = await loadFile(initialState(), file);
    expect(state.inputText).toBe("");
  });
});

describe("loadHistory", () => {
  const item = (i: number) => ({
    id: `id-${i}`,
    input: `input ${i}`,
    summary: `summary ${i}`,
    created_at: "2026-01-01T00:00:00+00:00",
  });

  it("loads the first page newest-first as given by the API", async () => {
    const { client, calls } = clientWith(() =>
      jsonResponse(200, { items: [item(2), item(1)], total: 2 }),
    );
    const state = await loadHistory(initialState(), client);
    expect(state.history.map((h) => h.id)).toEqual(["id-2", "id-1"]);
    expect(state.historyTotal).toBe(2);
    expect(calls[0].url).toContain("limit=20&offset=0");
  });

  it("pages: 25 records means page 2 has 5 rows", async () => {
    const { client, calls } = clientWith((url) => {
      const offset = Number(new URL(url, "http://x").searchParams.get("offset"));
      const items = Array.from({ length: 25 }, (_, i) => item(i))
        .slice(offset, offset + HISTORY_PAGE_SIZE);
      return jsonResponse(200, { items, total: 25 });
    });
    let state = await loadHistory(initialState(), client);
    expect(historyPageCount(state)).toBe(2);
    state = await loadHistory(state, client, 1);
    expect(state.history.length).toBe(5);
    expect(calls[1].url).toContain("offset=20");
  });

  it("shows a banner with retry state on network failure", async () => {
    const { client } = clientWith(() => {
      throw new Error("network down");
    });
    const state = await loadHistory(initialState(), client);
    expect(state.historyError).toMatch(/history/i);
    expect(state.history).toEqual([]);
  });
});
