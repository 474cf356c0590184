// Thin typed client over the service endpoints. Each method maps to exactly
// one documented endpoint; views never reach the network any other way.

import type {
  ComparisonStatusDoc,
  PathDoc,
  ProblemDoc,
  ProblemType,
  SuggestionDoc,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

export interface Api {
  problemTypes(): Promise<ProblemType[]>;
  strategyPaths(strategyId: string, maxClusterings?: number): Promise<PathDoc[]>;
  createProblem(typeId: string, inputText: string): Promise<ProblemDoc>;
  fetchProblem(typeId: string, problemId: string): Promise<ProblemDoc>;
  patchNode(
    typeId: string,
    problemId: string,
    nodeId: string,
    body: { solver_id?: string; settings?: Record<string, unknown> },
  ): Promise<ProblemDoc>;
  execute(
    typeId: string,
    problemId: string,
    body: { mode: "stepwise" | "complete"; node_id?: string; trials?: number; seed?: number },
  ): Promise<{ poll: string }>;
  suggestions(typeId: string, problemId: string, nodeId: string, speedWeight: number): Promise<SuggestionDoc>;
  compare(
    typeId: string,
    problemId: string,
    body: { paths: string[]; trials: number; seed: number },
  ): Promise<{ comparison_id: string; poll: string }>;
  comparison(typeId: string, problemId: string, comparisonId: string): Promise<ComparisonStatusDoc>;
}

export class HttpApi implements Api {
  constructor(private baseUrl: string) {}

  private async request<T>(method: string, path: string, body?: unknown, contentType?: string): Promise<T> {
    const init: RequestInit = { method, headers: {} };
    if (body !== undefined) {
      if (contentType === "text/plain") {
        init.body = String(body);
        (init.headers as Record<string, string>)["content-type"] = "text/plain";
      } else {
        init.body = JSON.stringify(body);
        (init.headers as Record<string, string>)["content-type"] = "application/json";
      }
    }
    const response = await fetch(this.baseUrl + path, init);
    const doc = await response.json().catch(() => ({}));
    if (!response.ok) {
      throw new ApiError(response.status, doc.code ?? "UnknownError", doc.message ?? response.statusText);
    }
    return doc as T;
  }

  problemTypes() {
    return this.request<ProblemType[]>("GET", "/problem-types");
  }

  strategyPaths(strategyId: string, maxClusterings?: number) {
    const query = maxClusterings === undefined ? "" : `?max_clusterings=${maxClusterings}`;
    return this.request<PathDoc[]>("GET", `/strategies/${strategyId}/paths${query}`);
  }

  createProblem(typeId: string, inputText: string) {
    return this.request<ProblemDoc>("POST", `/problems/${typeId}`, inputText, "text/plain");
  }

  fetchProblem(typeId: string, problemId: string) {
    return this.request<ProblemDoc>("GET", `/problems/${typeId}/${problemId}`);
  }

  patchNode(
    typeId: string,
    problemId: string,
    nodeId: string,
    body: { solver_id?: string; settings?: Record<string, unknown> },
  ) {
    return this.request<ProblemDoc>("PATCH", `/problems/${typeId}/${problemId}/nodes/${nodeId}`, body);
  }

  execute(
    typeId: string,
    problemId: string,
    body: { mode: "stepwise" | "complete"; node_id?: string; trials?: number; seed?: number },
  ) {
    return this.request<{ poll: string }>("POST", `/problems/${typeId}/${problemId}/execute`, body);
  }

  suggestions(typeId: string, problemId: string, nodeId: string, speedWeight: number) {
    return this.request<SuggestionDoc>(
      "GET",
      `/problems/${typeId}/${problemId}/suggestions?node=${nodeId}&speed_weight=${speedWeight}`,
    );
  }

  compare(typeId: string, problemId: string, body: { paths: string[]; trials: number; seed: number }) {
    return this.request<{ comparison_id: string; poll: string }>(
      "POST",
      `/problems/${typeId}/${problemId}/compare`,
      body,
    );
  }

  comparison(typeId: string, problemId: string, comparisonId: string) {
    return this.request<ComparisonStatusDoc>(
      "GET",
      `/problems/${typeId}/${problemId}/comparisons/${comparisonId}`,
    );
  }
}
