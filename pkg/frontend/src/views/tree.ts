// Strategy-tree navigation: node states as colors, solver options per ready
// node with the suggestion engine's recommendation highlighted (confidence:
// high) or a pros/cons panel (confidence: low), infeasible options disabled
// with their rationale.

import {
  STATE_CLASSES,
  findNode,
  flattenTree,
  recommendedSolver,
  selectionTarget,
  type AppState,
  type TreeRow,
} from "../state.js";
import type { SuggestionDoc, TreeNodeDoc } from "../types.js";
import { banner, escapeHtml } from "./html.js";

export function renderTreeScreen(state: AppState): string {
  if (!state.problem) return banner("no problem loaded");
  const tree = state.problem.tree;
  const rows = flattenTree(tree);
  const inspected = state.inspectedNodeId ? findNode(tree, state.inspectedNodeId) : null;
  return `
    ${banner(state.banner)}
    <section class="tree-screen">
      <div class="tree-pane">
        <h2>${escapeHtml(tree.type_id)} problem <code>${escapeHtml(tree.id)}</code></h2>
        <div class="slider-row">
          <label>speed&nbsp;vs&nbsp;quality
            <input type="range" id="speed-weight" min="0" max="1" step="0.1" value="${state.speedWeight}"
                   data-action="speed-weight">
          </label>
          <span class="slider-value">${state.speedWeight.toFixed(1)}</span>
        </div>
        <ul class="node-tree">${rows.map((row) => renderNodeRow(state, row)).join("\n")}</ul>
        <div class="actions">
          <button data-action="refresh-tree">refresh</button>
          <button class="primary" data-action="open-compare">compare paths</button>
        </div>
      </div>
      <div class="inspector-pane" id="inspector">${inspected ? "" : '<p class="hint">select a node to inspect it</p>'}</div>
    </section>`;
}

function renderNodeRow(state: AppState, row: TreeRow): string {
  const node = row.node;
  const stateClass = STATE_CLASSES[node.state];
  const suggestion = state.suggestions[node.id];
  const label = node.type_id === "cluster-set" ? "cluster set" : node.type_id;
  const solver = node.solver_id ? `<span class="chosen">${escapeHtml(node.solver_id)}</span>` : "";
  const objective =
    node.result !== null ? `<span class="objective">obj ${escapeHtml(node.result.objective)}</span>` : "";
  return `
    <li class="node ${stateClass}" data-node="${escapeHtml(node.id)}" style="margin-left:${row.depth * 1.5}em">
      <button class="node-head" data-action="inspect" data-node="${escapeHtml(node.id)}">
        <span class="state-dot" title="${escapeHtml(node.state)}"></span>
        <span class="node-label">${escapeHtml(label)}</span>
        ${solver} ${objective}
      </button>
      ${node.state === "ReadyToSolve" && node.type_id !== "cluster-set" ? renderOptions(node, suggestion) : ""}
      ${node.type_id === "cluster-set" && readyToCompose(node) ? composeButton(node) : ""}
    </li>`;
}

function readyToCompose(node: TreeNodeDoc): boolean {
  return (
    node.state === "ReadyToSolve" && node.children.length > 0 && node.children.every((c) => c.state === "Solved")
  );
}

function composeButton(node: TreeNodeDoc): string {
  return `<button class="execute" data-action="execute-node" data-node="${escapeHtml(node.id)}">compose clusters</button>`;
}

function renderOptions(node: TreeNodeDoc, suggestion: SuggestionDoc | undefined): string {
  if (!suggestion) {
    return `<button class="load-options" data-action="load-suggestions" data-node="${escapeHtml(node.id)}">show solver options</button>`;
  }
  const highlighted = recommendedSolver(suggestion);
  const options = suggestion.ranked
    .map((entry) => {
      const target = selectionTarget(entry);
      const classes = ["option"];
      if (!entry.feasible) classes.push("infeasible");
      if (entry.solver_id === highlighted) classes.push("recommended");
      const via = entry.via.length ? `<span class="via">via ${escapeHtml(entry.via.join(" / "))}</span>` : "";
      const body = `
        <span class="option-name">${escapeHtml(entry.solver_id)}</span> ${via}
        <span class="score">${entry.feasible ? entry.score.toFixed(2) : "&mdash;"}</span>`;
      if (!entry.feasible) {
        return `<div class="${classes.join(" ")}" title="${escapeHtml(entry.rationale)}">
          ${body}<span class="rationale">${escapeHtml(entry.rationale)}</span></div>`;
      }
      return `<button class="${classes.join(" ")}" data-action="select-solver"
        data-node="${escapeHtml(node.id)}" data-solver="${escapeHtml(target)}"
        title="${escapeHtml(entry.rationale)}">${body}</button>`;
    })
    .join("\n");
  const prosCons =
    suggestion.confidence === "low"
      ? `<div class="pros-cons">
           <p class="hint">no clear winner; weigh the options:</p>
           <ul>${suggestion.ranked
             .filter((e) => e.feasible)
             .map((e) => `<li><b>${escapeHtml(e.solver_id)}</b>: ${escapeHtml(e.rationale)}</li>`)
             .join("")}</ul>
         </div>`
      : "";
  const executable = node.solver_id
    ? `<button class="execute" data-action="execute-node" data-node="${escapeHtml(node.id)}">execute step</button>`
    : "";
  return `<div class="options" data-confidence="${suggestion.confidence}">${options}${prosCons}${executable}</div>`;
}
