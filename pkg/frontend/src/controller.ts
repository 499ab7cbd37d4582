// View logic, kept free of DOM access so it is unit-testable: a state object
// plus transition functions that call the API client and return the new state.

import {
  ApiClient,
  ApiRequestError,
  HistoryItem,
  ModelKind,
  SummarizeResponse,
} from "./api.js";

export const MODEL_LABELS: Record<ModelKind, string> = {
  passage: "Report summary",
  conversation: "Conversation health issues",
  question: "Main question",
};

export const HISTORY_PAGE_SIZE = 20;
export const MAX_FILE_BYTES = 1 << 20;

export interface ViewState {
  model: ModelKind;
  inputText: string;
  pending: boolean;
  result: SummarizeResponse | null;
  errorBanner: string | null;
  inlineError: string | null;
  history: HistoryItem[];
  historyTotal: number;
  historyPage: number;
  historyError: string | null;
}

export function initialState(): ViewState {
  return {
    model: "passage",
    inputText: "",
    pending: false,
    result: null,
    errorBanner: null,
    inlineError: null,
    history: [],
    historyTotal: 0,
    historyPage: 0,
    historyError: null,
  };
}

export async function submitSummarization(
  state: ViewState,
  client: ApiClient,
): Promise<ViewState> {
  if (state.pending) {
    return state; // at most one in-flight request
  }
  if (!state.inputText.trim()) {
    return { ...state, inlineError: "Enter some text to summarize." };
  }
  state = { ...state, pending: true, inlineError: null, errorBanner: null };
  try {
    const result = await client.summarize(state.model, state.inputText);
    return { ...state, pending: false, result };
  } catch (err) {
    // the typed input is always preserved on failure
    if (err instanceof ApiRequestError && err.status === 400) {
      return { ...state, pending: false, inlineError: err.apiError.message };
    }
    const message = err instanceof Error ? err.message : String(err);
    return { ...state, pending: false, errorBanner: `Request failed: ${message}` };
  }
}

export async function loadFile(state: ViewState, file: File): Promise<ViewState> {
  if (!file.name.toLowerCase().endsWith(".txt")) {
    return { ...state, inlineError: "Only .txt files can be loaded." };
  }
  if (file.size > MAX_FILE_BYTES) {
    return { ...state, inlineError: "File exceeds the 1 MiB limit." };
  }
  const text = await file.text();
  return { ...state, inputText: text, inlineError: null };
}

export async function loadHistory(
  state: ViewState,
  client: ApiClient,
  page = 0,
): Promise<ViewState> {
  try {
    const resp = await client.history(HISTORY_PAGE_SIZE, page * HISTORY_PAGE_SIZE);
    return {
      ...state,
      history: resp.items,
      historyTotal: resp.total,
      historyPage: page,
      historyError: null,
    };
  } catch (err) {
    const message = err instanceof Error ? err.message : String(err);
    return { ...state, historyError: `Could not load history: ${message}` };
  }
}

export function historyPageCount(state: ViewState): number {
  return Math.max(1, Math.ceil(state.historyTotal / HISTORY_PAGE_SIZE));
}
