// Wire types mirroring the service's JSON documents. The client never
// computes solutions itself; everything below arrives from the server.

export type NodeState = "NeedsInput" | "ReadyToSolve" | "Solving" | "Solved" | "Failed";

export interface SolveResultDoc {
  payload: Record<string, unknown> | null;
  objective: number;
  feasible: boolean;
  wall_ms: number;
  solver_id: string;
  backend_id: string;
  trial: number;
}

export interface TreeNodeDoc {
  id: string;
  type_id: string;
  state: NodeState;
  solver_id: string | null;
  settings: Record<string, unknown>;
  payload: Record<string, unknown> | null;
  result: SolveResultDoc | null;
  error: string | null;
  trial_log: Array<Record<string, unknown>>;
  children: TreeNodeDoc[];
}

export interface ProblemDoc {
  id: string;
  tree: TreeNodeDoc;
}

export interface ProblemType {
  id: string;
  name: string;
  input_format: string;
  strategy_id: string;
}

export interface SuggestionEntry {
  solver_id: string;
  score: number;
  rationale: string;
  feasible: boolean;
  via: string[];
}

export interface SuggestionDoc {
  confidence: "high" | "low";
  ranked: SuggestionEntry[];
}

export interface PathDoc {
  spec: string;
  steps: Array<[string, string]>;
}

export interface ComparisonRowDoc {
  path: string;
  trial: number;
  objective: number | null;
  feasible: boolean;
  wall_ms: number;
}

export interface PathStatsDoc {
  best_objective: number | null;
  median_objective: number | null;
  median_wall_ms: number;
  rows: number;
}

export interface ComparisonReportDoc {
  rows: ComparisonRowDoc[];
  per_path: Record<string, PathStatsDoc>;
}

export interface ComparisonStatusDoc {
  status: "running" | "done" | "failed";
  report: ComparisonReportDoc | null;
  message?: string;
}

export interface ApiErrorDoc {
  code: string;
  message: string;
}
