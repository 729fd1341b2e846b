import { ApiError, type ApiClient } from "./api.js";
import type { Mode, Settings, Turn } from "./types.js";

export const SETTINGS_KEY = "biorag.settings";
export const MIN_TOP_K = 1;
export const MAX_TOP_K = 10;
export const DEFAULT_SETTINGS: Settings = { mode: "rag", topK: 5 };

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

export function clampTopK(value: number): number {
  if (!Number.isFinite(value)) return DEFAULT_SETTINGS.topK;
  return Math.min(MAX_TOP_K, Math.max(MIN_TOP_K, Math.round(value)));
}

export function loadSettings(storage: StorageLike): Settings {
  const raw = storage.getItem(SETTINGS_KEY);
  if (raw === null) return { ...DEFAULT_SETTINGS };
  try {
    const parsed = JSON.parse(raw) as Partial<Settings>;
    const mode: Mode = parsed.mode === "vanilla" ? "vanilla" : "rag";
    const topK = clampTopK(typeof parsed.topK === "number" ? parsed.topK : NaN);
    return { mode, topK };
  } catch {
    return { ...DEFAULT_SETTINGS };
  }
}

export function saveSettings(storage: StorageLike, settings: Settings): void {
  storage.setItem(SETTINGS_KEY, JSON.stringify(settings));
}

/** Chat transcript: append-only turns, at most one of them in flight. */
export class ChatStore {
  private turns: Turn[] = [];
  private nextId = 1;

  all(): readonly Turn[] {
    return this.turns;
  }

  hasPending(): boolean {
    return this.turns.some((t) => t.status === "pending");
  }

  /** Starts a turn, or returns null for blank input / an in-flight request. */
  begin(question: string, settings: Settings): Turn | null {
    const trimmed = question.trim();
    if (!trimmed || this.hasPending()) return null;
    const turn: Turn = {
      id: this.nextId++,
      question: trimmed,
      mode: settings.mode,
      status: "pending",
      answer: "",
      sources: [],
      model: "",
      latencyMs: 0,
      error: null,
    };
    this.turns.push(turn);
    return turn;
  }

  complete(id: number, answer: string, sources: Turn["sources"], model: string, latencyMs: number): void {
    const turn = this.turns.find((t) => t.id === id);
    if (!turn) return;
    turn.status = "done";
    turn.answer = answer;
    turn.sources = sources;
    turn.model = model;
    turn.latencyMs = latencyMs;
  }

  fail(id: number, code: string, detail: string): void {
    const turn = this.turns.find((t) => t.id === id);
    if (!turn) return;
    turn.status = "error";
    turn.error = { code, detail };
  }
}

/**
 * Submit one question: begin a turn, call the API, settle the turn.
 * Never throws — failures land on the turn as an error state.
 */
export async function submitQuestion(
  store: ChatStore,
  api: ApiClient,
  question: string,
  settings: Settings,
): Promise<Turn | null> {
  const turn = store.begin(question, settings);
  if (turn === null) return null;
  try {
    const response = await api.ask({
      question: turn.question,
      mode: settings.mode,
      top_k: settings.topK,
    });
    store.complete(turn.id, response.answer, response.sources, response.model, response.latency_ms);
  } catch (err) {
    if (err instanceof ApiError) {
      store.fail(turn.id, err.code, err.detail);
    } else {
      store.fail(turn.id, "UnknownError", err instanceof Error ? err.message : String(err));
    }
  }
  return turn;
}
