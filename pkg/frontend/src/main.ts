// DOM wiring for the single-page layout: model selector, text input with
// .txt upload, summary output, and the history table.

import { ApiClient } from "./api.js";
import {
  MODEL_LABELS,
  ViewState,
  historyPageCount,
  initialState,
  loadFile,
  loadHistory,
  submitSummarization,
} from "./controller.js";
import { ModelKind } from "./api.js";

declare global {
  interface Window {
    MEDSUM_API_BASE?: string;
  }
}

const client = new ApiClient(window.MEDSUM_API_BASE ?? "");
let state: ViewState = initialState();

const $ = (id: string) => document.getElementById(id)!;

function render(): void {
  const textarea = $("input-text") as HTMLTextAreaElement;
  if (textarea.value !== state.inputText) {
    textarea.value = state.inputText;
  }
  ($("submit") as HTMLButtonElement).disabled = state.pending;
  $("inline-error").textContent = state.inlineError ?? "";
  $("error-banner").textContent = state.errorBanner ?? "";
  $("error-banner").classList.toggle("hidden", state.errorBanner === null);
  $("summary-output").textContent = state.result ? state.result.summary : "";

  const tbody = $("history-body");
  tbody.innerHTML = "";
  if (state.history.length === 0) {
    $("history-empty").classList.remove("hidden");
  } else {
    $("history-empty").classList.add("hidden");
    for (const item of state.history) {
      const row = document.createElement("tr");
      for (const value of [item.id, item.input, item.summary, item.created_at]) {
        const cell = document.createElement("td");
        cell.textContent = value;
        row.appendChild(cell);
      }
      tbody.appendChild(row);
    }
  }
  $("history-error").textContent = state.historyError ?? "";
  $("history-page").textContent = `page ${state.historyPage + 1} of ${historyPageCount(state)}`;
}

function setState(next: ViewState): void {
  state = next;
  render();
}

function init(): void {
  const selector = $("model-select") as HTMLSelectElement;
  for (const [value, label] of Object.entries(MODEL_LABELS)) {
    const option = document.createElement("option");
    option.value = value;
    option.textContent = label;
    selector.appendChild(option);
  }
  selector.addEventListener("change", () => {
    setState({ ...state, model: selector.value as ModelKind });
  });

  const textarea = $("input-text") as HTMLTextAreaElement;
  textarea.addEventListener("input", () => {
    state = { ...state, inputText: textarea.value };
  });

  $("submit").addEventListener("click", async () => {
    setState(await submitSummarization(state, client));
    setState(await loadHistory(state, client, state.historyPage));
  });

  const fileInput = $("file-input") as HTMLInputElement;
  fileInput.addEventListener("change", async () => {
    const file = fileInput.files?.[0];
    if (file) {
      setState(await loadFile(state, file));
    }
    fileInput.value = "";
  });

  $("history-prev").addEventListener("click", async () => {
    if (state.historyPage > 0) {
      setState(await loadHistory(state, client, state.historyPage - 1));
    }
  });
  $("history-next").addEventListener("click", async () => {
    if (state.historyPage + 1 < historyPageCount(state)) {
      setState(await loadHistory(state, client, state.historyPage + 1));
    }
  });

  loadHistory(state, client).then(setState);
  render();
}

document.addEventListener("DOMContentLoaded", init);
