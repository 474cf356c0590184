// Client-side view model. Everything here derives from service responses;
// the only state the client owns is navigation, form inputs, and which
// comparison row the user accepted (persisted per problem).

import type {
  ComparisonReportDoc,
  ComparisonRowDoc,
  NodeState,
  ProblemDoc,
  ProblemType,
  SuggestionDoc,
  TreeNodeDoc,
} from "./types.js";

export type Screen = "picker" | "editor" | "tree" | "compare";

export interface AcceptedSelection {
  path: string;
  trial: number;
  objective: number | null;
}

export interface AppState {
  screen: Screen;
  problemTypes: ProblemType[];
  selectedType: string | null;
  inputText: string;
  problem: ProblemDoc | null;
  suggestions: Record<string, SuggestionDoc>;
  inspectedNodeId: string | null;
  speedWeight: number;
  comparisonId: string | null;
  report: ComparisonReportDoc | null;
  comparisonRunning: boolean;
  accepted: AcceptedSelection | null;
  sortKey: SortKey;
  sortAscending: boolean;
  banner: string | null;
  trials: number;
  seed: number;
}

export function initialState(): AppState {
  return {
    screen: "picker",
    problemTypes: [],
    selectedType: null,
    inputText: "",
    problem: null,
    suggestions: {},
    inspectedNodeId: null,
    speedWeight: 0.5,
    comparisonId: null,
    report: null,
    comparisonRunning: false,
    accepted: null,
    sortKey: "path",
    sortAscending: true,
    banner: null,
    trials: 2,
    seed: 7,
  };
}

// -- tree derivation ---------------------------------------------------------

export interface TreeRow {
  node: TreeNodeDoc;
  depth: number;
  parentId: string | null;
}

export function flattenTree(tree: TreeNodeDoc): TreeRow[] {
  const rows: TreeRow[] = [];
  const visit = (node: TreeNodeDoc, depth: number, parentId: string | null) => {
    rows.push({ node, depth, parentId });
    for (const child of node.children) visit(child, depth + 1, node.id);
  };
  visit(tree, 0, null);
  return rows;
}

export function findNode(tree: TreeNodeDoc, nodeId: string): TreeNodeDoc | null {
  for (const row of flattenTree(tree)) {
    if (row.node.id === nodeId) return row.node;
  }
  return null;
}

export const STATE_CLASSES: Record<NodeState, string> = {
  NeedsInput: "state-needs-input",
  ReadyToSolve: "state-ready",
  Solving: "state-solving",
  Solved: "state-solved",
  Failed: "state-failed",
};

/** Nodes a user can still select a solver for. */
export function selectableNodes(tree: TreeNodeDoc): TreeNodeDoc[] {
  return flattenTree(tree)
    .map((r) => r.node)
    .filter((n) => n.state === "ReadyToSolve" && n.type_id !== "cluster-set");
}

/** The solver id a suggestion entry would have the user pick right now:
 * the first step of its via-chain when the terminal sits behind a
 * reformulation. */
export function selectionTarget(entry: { solver_id: string; via: string[] }): string {
  return entry.via.length > 0 ? entry.via[0] : entry.solver_id;
}

export function recommendedSolver(suggestion: SuggestionDoc | undefined): string | null {
  if (!suggestion || suggestion.confidence !== "high") return null;
  const top = suggestion.ranked.find((e) => e.feasible);
  return top ? top.solver_id : null;
}

// -- comparison table --------------------------------------------------------

export type SortKey = "path" | "trial" | "objective" | "wall_ms" | "median";

export function sortRows(
  rows: ComparisonRowDoc[],
  report: ComparisonReportDoc,
  key: SortKey,
  ascending: boolean,
): ComparisonRowDoc[] {
  const value = (row: ComparisonRowDoc): number | string => {
    switch (key) {
      case "path":
        return row.path;
      case "trial":
        return row.trial;
      case "objective":
        return row.objective ?? Number.POSITIVE_INFINITY;
      case "wall_ms":
        return row.wall_ms;
      case "median":
        return report.per_path[row.path]?.median_objective ?? Number.POSITIVE_INFINITY;
    }
  };
  const sorted = [...rows].sort((a, b) => {
    const va = value(a);
    const vb = value(b);
    if (va === vb) return a.path === b.path ? a.trial - b.trial : a.path < b.path ? -1 : 1;
    return va < vb ? -1 : 1;
  });
  return ascending ? sorted : sorted.reverse();
}

// -- accepted-selection persistence -------------------------------------------

export interface KeyValueStore {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

const ACCEPT_PREFIX = "metasolve.accepted.";

export function persistAccepted(store: KeyValueStore, problemId: string, accepted: AcceptedSelection): void {
  store.setItem(ACCEPT_PREFIX + problemId, JSON.stringify(accepted));
}

export function loadAccepted(store: KeyValueStore, problemId: string): AcceptedSelection | null {
  const raw = store.getItem(ACCEPT_PREFIX + problemId);
  if (!raw) return null;
  try {
    return JSON.parse(raw) as AcceptedSelection;
  } catch {
    return null;
  }
}
