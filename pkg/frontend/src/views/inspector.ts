// Step inspector: state, solver-specific settings, result panel, and a 2-D
// route plot for solved routing problems with coordinates.

import type { TreeNodeDoc } from "../types.js";
import { escapeHtml } from "./html.js";

const CLUSTER_SOLVERS = new Set(["kmeans-clustering", "two-phase-clustering"]);

export function renderInspector(node: TreeNodeDoc, rootPayload: Record<string, unknown> | null): string {
  const sections = [
    `<h3>${escapeHtml(node.type_id)} step</h3>
     <dl class="facts">
       <dt>state</dt><dd class="state">${escapeHtml(node.state)}</dd>
       <dt>solver</dt><dd>${escapeHtml(node.solver_id ?? "not selected")}</dd>
       <dt>node</dt><dd><code>${escapeHtml(node.id)}</code></dd>
     </dl>`,
  ];
  if (node.error) {
    sections.push(`<div class="diagnostic" role="alert"><b>failed:</b> ${escapeHtml(node.error)}</div>`);
  }
  sections.push(renderSettingsForm(node));
  if (node.result) {
    sections.push(renderResult(node, rootPayload));
  }
  if (node.trial_log.length > 1) {
    const rows = node.trial_log
      .map((t) => `<tr><td>${escapeHtml(t.trial)}</td><td>${escapeHtml(t.objective)}</td><td>${escapeHtml(t.wall_ms)}ms</td></tr>`)
      .join("");
    sections.push(`<h4>trials</h4><table class="trials"><tr><th>#</th><th>objective</th><th>wall</th></tr>${rows}</table>`);
  }
  return sections.join("\n");
}

function renderSettingsForm(node: TreeNodeDoc): string {
  const editable = node.state === "ReadyToSolve" || node.state === "NeedsInput";
  const fields: string[] = [];
  if (node.solver_id && CLUSTER_SOLVERS.has(node.solver_id) && node.solver_id === "kmeans-clustering") {
    const clusters = node.settings["clusters"] ?? "";
    fields.push(`
      <label>clusters
        <input type="number" min="1" step="1" value="${escapeHtml(clusters)}"
               data-setting="clusters" ${editable ? "" : "disabled"}>
      </label>`);
  }
  const known = new Set(["clusters"]);
  const rest = Object.entries(node.settings).filter(([k]) => !known.has(k));
  const restRows = rest
    .map(([k, v]) => `<dt>${escapeHtml(k)}</dt><dd>${escapeHtml(JSON.stringify(v))}</dd>`)
    .join("");
  const save = fields.length && editable
    ? `<button data-action="save-settings" data-node="${escapeHtml(node.id)}">save settings</button>`
    : "";
  if (!fields.length && !rest.length) return "";
  return `
    <h4>settings</h4>
    <form class="settings" data-node="${escapeHtml(node.id)}" onsubmit="return false">
      ${fields.join("\n")}
      ${restRows ? `<dl class="facts">${restRows}</dl>` : ""}
      ${save}
    </form>`;
}

function renderResult(node: TreeNodeDoc, rootPayload: Record<string, unknown> | null): string {
  const result = node.result!;
  const head = `
    <h4>result</h4>
    <dl class="facts">
      <dt>objective</dt><dd>${escapeHtml(result.objective)}</dd>
      <dt>feasible</dt><dd>${result.feasible ? "yes" : "no"}</dd>
      <dt>wall</dt><dd>${escapeHtml(result.wall_ms)}ms</dd>
      <dt>backend</dt><dd>${escapeHtml(result.backend_id)}</dd>
    </dl>`;
  const payload = result.payload;
  if (payload && payload["kind"] === "vrp-solution" && rootPayload && Array.isArray(rootPayload["coords"])) {
    return head + renderRoutePlot(
      rootPayload["coords"] as Array<[number, number]>,
      (rootPayload["depot_index"] as number) ?? 0,
      payload["routes"] as number[][],
    );
  }
  if (payload && payload["kind"] === "tour" && rootPayload && Array.isArray(rootPayload["coords"])) {
    const order = payload["order"] as number[];
    return head + renderRoutePlot(rootPayload["coords"] as Array<[number, number]>, order[0], [order.slice(1)]);
  }
  if (payload) {
    return head + `<pre class="payload">${escapeHtml(JSON.stringify(payload, null, 2))}</pre>`;
  }
  return head;
}

const PLOT_SIZE = 320;
const ROUTE_COLORS = ["#38bdf8", "#f59e0b", "#4ade80", "#c084fc", "#f87171", "#22d3ee", "#fbbf24", "#a3e635"];

export function renderRoutePlot(
  coords: Array<[number, number]>,
  depot: number,
  routes: number[][],
): string {
  const xs = coords.map((c) => c[0]);
  const ys = coords.map((c) => c[1]);
  const minX = Math.min(...xs);
  const maxX = Math.max(...xs);
  const minY = Math.min(...ys);
  const maxY = Math.max(...ys);
  const pad = 14;
  const scale = (PLOT_SIZE - 2 * pad) / Math.max(maxX - minX || 1, maxY - minY || 1);
  const px = (i: number) => pad + (coords[i][0] - minX) * scale;
  const py = (i: number) => PLOT_SIZE - pad - (coords[i][1] - minY) * scale;

  const lines: string[] = [];
  routes.forEach((route, r) => {
    const color = ROUTE_COLORS[r % ROUTE_COLORS.length];
    const stops = [depot, ...route, depot];
    for (let i = 0; i < stops.length - 1; i++) {
      lines.push(
        `<line x1="${px(stops[i]).toFixed(1)}" y1="${py(stops[i]).toFixed(1)}" ` +
          `x2="${px(stops[i + 1]).toFixed(1)}" y2="${py(stops[i + 1]).toFixed(1)}" ` +
          `stroke="${color}" stroke-width="1.5" data-route="${r}"/>`,
      );
    }
  });
  const dots = coords
    .map((_, i) => {
      const isDepot = i === depot;
      return `<circle cx="${px(i).toFixed(1)}" cy="${py(i).toFixed(1)}" r="${isDepot ? 5 : 3}"
        fill="${isDepot ? "#f1f5f9" : "#94a3b8"}" data-node-index="${i}"/>`;
    })
    .join("");
  return `
    <svg class="route-plot" viewBox="0 0 ${PLOT_SIZE} ${PLOT_SIZE}" width="${PLOT_SIZE}" height="${PLOT_SIZE}"
         role="img" aria-label="route plot">
      ${lines.join("\n")}
      ${dots}
    </svg>`;
}
