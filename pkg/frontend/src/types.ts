export type Mode = "rag" | "vanilla";

export interface AskRequest {
  question: string;
  mode: Mode;
  top_k: number;
}

export interface SourceEntry {
  chunk_id: string;
  doc_id: string;
  score: number;
  rank: number;
  text: string;
}

export interface AskResponse {
  answer: string;
  sources: SourceEntry[];
  latency_ms: number;
  model: string;
}

export interface HealthResponse {
  status: string;
  index_entries: number;
  dimension: number;
  embedder_fingerprint: string;
}

export interface Settings {
  mode: Mode;
  topK: number;
}

export type TurnStatus = "pending" | "done" | "error";

export interface TurnError {
  code: string;
  detail: string;
}

export interface Turn {
  id: number;
  question: string;
  mode: Mode;
  status: TurnStatus;
  answer: string;
  sources: SourceEntry[];
  model: string;
  latencyMs: number;
  error: TurnError | null;
}
