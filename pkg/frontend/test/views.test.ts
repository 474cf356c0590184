import assert from "node:assert/strict";
import { test } from "node:test";

import { initialState } from "../src/state.js";
import type { TreeNodeDoc } from "../src/types.js";
import { renderBars, renderCompareScreen } from "../src/views/compare.js";
import { escapeHtml } from "../src/views/html.js";
import { renderInspector, renderRoutePlot } from "../src/views/inspector.js";
import { renderEditor, renderPicker } from "../src/views/picker.js";
import { renderTreeScreen } from "../src/views/tree.js";
import { loadFixtures } from "./loadFixtures.js";

const fixtures = loadFixtures();

function stateWith(overrides: Partial<ReturnType<typeof initialState>>) {
  return { ...initialState(), ...overrides };
}

test("escapeHtml neutralizes markup", () => {
  assert.equal(escapeHtml('<b a="1">&x'), "&lt;b a=&quot;1&quot;&gt;&amp;x");
});

test("picker lists every problem type from the service", () => {
  const html = renderPicker(stateWith({ problemTypes: fixtures.problem_types }));
  for (const type of fixtures.problem_types) {
    assert.ok(html.includes(`data-type="${type.id}"`), `missing ${type.id}`);
  }
  assert.equal((html.match(/type-card/g) ?? []).length, 5);
});

test("picker shows an error banner with retry when the service is down", () => {
  const html = renderPicker(stateWith({ banner: "service unreachable: ECONNREFUSED" }));
  assert.ok(html.includes("banner error"));
  assert.ok(html.includes('data-action="load-types"'));
});

test("editor pre-fills the instance text", () => {
  const html = renderEditor(
    stateWith({ selectedType: "vrp", problemTypes: fixtures.problem_types, inputText: "NAME : x" }),
  );
  assert.ok(html.includes("NAME : x"));
  assert.ok(html.includes('data-action="submit-problem"'));
});

test("fresh tree offers the three root options with a pros/cons panel", () => {
  const rootId = fixtures.created.tree.id;
  const state = stateWith({
    problem: fixtures.created,
    selectedType: "vrp",
    screen: "tree",
    suggestions: { [rootId]: fixtures.suggestions[rootId] },
  });
  const html = renderTreeScreen(state);
  for (const solver of ["vrp-native", "kmeans-clustering", "two-phase-clustering"]) {
    assert.ok(html.includes(solver), `missing option ${solver}`);
  }
  assert.ok(html.includes('data-confidence="low"'));
  assert.ok(html.includes("pros-cons"), "low confidence renders the pros/cons panel");
  assert.ok(!html.includes("recommended"), "no highlight under low confidence");
});

test("cluster children appear after the clustering executes, with highlights", () => {
  const fanned = fixtures.snapshots_after_execute[0];
  const rootId = fanned.tree.id;
  const childIds = fanned.tree.children[0].children.map((c: TreeNodeDoc) => c.id);
  assert.ok(childIds.length === 2, "two TSP children fan out");
  const suggestions: Record<string, (typeof fixtures.suggestions)[string]> = {};
  for (const id of childIds) suggestions[id] = fixtures.suggestions[id];
  const html = renderTreeScreen(
    stateWith({ problem: fanned, selectedType: "vrp", screen: "tree", suggestions }),
  );
  assert.ok(html.includes("option recommended"), "high-confidence pick is highlighted");
  assert.ok(html.includes('data-solver="tsp-native"'));
  assert.equal((html.match(/data-confidence="high"/g) ?? []).length, 2);
  assert.ok(rootId.length > 0);
});

test("infeasible options render disabled with their rationale", () => {
  const fanned = fixtures.snapshots_after_execute[0];
  const childId = fanned.tree.children[0].children[0].id;
  const suggestion = fixtures.suggestions[childId];
  const infeasible = suggestion.ranked.filter((e) => !e.feasible);
  assert.ok(infeasible.length >= 1, "fixture carries an infeasible option");
  const html = renderTreeScreen(
    stateWith({
      problem: fanned,
      selectedType: "vrp",
      screen: "tree",
      suggestions: { [childId]: suggestion },
    }),
  );
  assert.ok(html.includes("option infeasible"));
  assert.ok(html.includes(escapeHtml(infeasible[0].rationale)));
});

test("inspector shows the clusters setting for a kmeans node", () => {
  const node: TreeNodeDoc = {
    id: "n1", type_id: "vrp", state: "ReadyToSolve", solver_id: "kmeans-clustering",
    settings: { clusters: 3 }, payload: null, result: null, error: null, trial_log: [], children: [],
  };
  const html = renderInspector(node, null);
  assert.ok(html.includes('data-setting="clusters"'));
  assert.ok(html.includes('value="3"'));
  assert.ok(html.includes('data-action="save-settings"'));
});

test("inspector renders a route plot for the solved root", () => {
  const final = fixtures.snapshots_after_execute.at(-1)!;
  assert.equal(final.tree.state, "Solved");
  const html = renderInspector(final.tree, final.tree.payload);
  assert.ok(html.includes("route-plot"));
  assert.ok(html.includes("<svg"));
  assert.ok((html.match(/<line /g) ?? []).length >= 4, "route legs drawn");
});

test("inspector surfaces diagnostics on failed nodes", () => {
  const node: TreeNodeDoc = {
    id: "n2", type_id: "qubo", state: "Failed", solver_id: "qaoa", settings: {},
    payload: null, result: null, error: "NoCompatibleBackend: needs 49 qubits, max 22",
    trial_log: [], children: [],
  };
  const html = renderInspector(node, null);
  assert.ok(html.includes("diagnostic"));
  assert.ok(html.includes("needs 49 qubits, max 22"));
});

test("route plot scales arbitrary coordinates into the viewbox", () => {
  const svg = renderRoutePlot([[0, 0], [100, 0], [100, 100]], 0, [[1, 2]]);
  assert.ok(svg.includes("viewBox"));
  assert.equal((svg.match(/<circle /g) ?? []).length, 3);
});

test("compare screen renders rows, charts, and the accepted marker", () => {
  const report = fixtures.comparison_done.report!;
  const state = stateWith({
    screen: "compare",
    problem: fixtures.created,
    report,
    accepted: { path: report.rows[0].path, trial: report.rows[0].trial, objective: report.rows[0].objective },
  });
  const html = renderCompareScreen(state);
  assert.equal((html.match(/data-action="accept-row"/g) ?? []).length, report.rows.length);
  assert.ok(html.includes("accepted-note"));
  assert.equal((html.match(/<figure class="chart">/g) ?? []).length, 2);
  const bars = renderBars(report, "median_objective", "cost");
  assert.equal((bars.match(/data-series=/g) ?? []).length, Object.keys(report.per_path).length);
});
