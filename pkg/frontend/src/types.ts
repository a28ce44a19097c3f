/** Payload shapes of the session API. Mirrors the server's pydantic models. */

export type Label = 0 | 1;

export interface PendingPair {
  pair_id: string;
  left: Record<string, string>;
  right: Record<string, string>;
  votes: number[] | null;
  positive_ratio: number | null;
  entropy: number | null;
}

export interface IterateResponse {
  session_id: string;
  iteration: number;
  phase: string;
  require_explanation: boolean;
  pending: PendingPair[];
}

export interface Submission {
  pair_id: string;
  label: Label;
  explanation?: string;
}

export interface SessionSummary {
  session_id: string;
  iteration: number;
  phase: string;
  demonstration_count: number;
  pending_batch: string[] | null;
  stop_reason: string | null;
}

export interface EvaluationReport {
  iteration: number;
  per_example: [string, number | null, number][];
  true_positives: number;
  false_positives: number;
  false_negatives: number;
  true_negatives: number;
  unparseable_count: number;
  accuracy: number;
  precision: number;
  recall: number;
  f1: number;
}

export interface AnnotationRecord {
  iteration: number;
  pair_id: string;
  label: number;
  explanation: string | null;
}

export interface HistoryResponse {
  session_id: string;
  annotations: AnnotationRecord[];
  evaluations: EvaluationReport[];
}

export interface PromptResponse {
  session_id: string;
  prompt: string;
  demonstration_count: number;
}

export interface CreateSessionRequest {
  session_id?: string;
  config?: Record<string, unknown>;
  pool?: PairRecord[];
  eval_set?: PairRecord[];
  pool_path?: string;
  eval_path?: string;
}

export interface PairRecord {
  id: string;
  left: Record<string, string>;
  right: Record<string, string>;
  gold?: number;
}

export type ApiErrorCode = "validation" | "state" | "transport" | "not_found" | "config";
