// Multi-path comparison: sortable per-trial table, per-path cost and wall
// bar charts, and an accept button per row. Picking the accepted solution is
// the user's call; the client only records it.

import { sortRows, type AppState } from "../state.js";
import type { ComparisonReportDoc } from "../types.js";
import { banner, escapeHtml } from "./html.js";

export function renderCompareScreen(state: AppState): string {
  const head = `
    ${banner(state.banner)}
    <section class="compare-screen">
      <div class="actions">
        <button data-action="back-to-tree">back to tree</button>
        <label>trials <input type="number" id="compare-trials" min="1" max="10" value="${state.trials}"></label>
        <label>seed <input type="number" id="compare-seed" value="${state.seed}"></label>
        <button class="primary" data-action="run-compare">run comparison</button>
      </div>`;
  if (state.comparisonRunning) {
    return head + `<p class="hint running">comparison running&hellip; (polling)</p></section>`;
  }
  if (!state.report) {
    return head + `<p class="hint">pick at least two Solution Paths and run the comparison.</p></section>`;
  }
  return (
    head +
    renderReport(state, state.report) +
    `</section>`
  );
}

function renderReport(state: AppState, report: ComparisonReportDoc): string {
  const rows = sortRows(report.rows, report, state.sortKey, state.sortAscending);
  const arrow = state.sortAscending ? "&#9650;" : "&#9660;";
  const header = (key: string, label: string) =>
    `<th><button data-action="sort" data-key="${key}">${label}${state.sortKey === key ? ` ${arrow}` : ""}</button></th>`;
  const body = rows
    .map((row) => {
      const accepted =
        state.accepted && state.accepted.path === row.path && state.accepted.trial === row.trial;
      return `
      <tr class="${accepted ? "accepted" : ""}${row.feasible ? "" : " infeasible-row"}">
        <td>${escapeHtml(row.path)}</td>
        <td>${row.trial}</td>
        <td>${row.objective === null ? "&mdash;" : escapeHtml(row.objective)}</td>
        <td>${row.feasible ? "yes" : "no"}</td>
        <td>${escapeHtml(row.wall_ms)}</td>
        <td><button data-action="accept-row" data-path="${escapeHtml(row.path)}"
             data-trial="${row.trial}" ${row.feasible ? "" : "disabled"}>
             ${accepted ? "accepted" : "accept"}</button></td>
      </tr>`;
    })
    .join("\n");
  const acceptedNote = state.accepted
    ? `<p class="accepted-note">accepted solution: <b>${escapeHtml(state.accepted.path)}</b> trial ${state.accepted.trial}</p>`
    : `<p class="hint">no row accepted yet; the choice is yours, not automated.</p>`;
  return `
    <table class="report">
      <thead><tr>
        ${header("path", "path")}
        ${header("trial", "trial")}
        ${header("objective", "objective")}
        <th>feasible</th>
        ${header("wall_ms", "wall ms")}
        <th></th>
      </tr></thead>
      <tbody>${body}</tbody>
    </table>
    ${acceptedNote}
    <div class="charts">
      ${renderBars(report, "median_objective", "median cost per path")}
      ${renderBars(report, "median_wall_ms", "median wall ms per path")}
    </div>`;
}

const BAR_WIDTH = 360;
const BAR_HEIGHT = 26;

export function renderBars(
  report: ComparisonReportDoc,
  key: "median_objective" | "median_wall_ms",
  title: string,
): string {
  const entries = Object.entries(report.per_path);
  const values = entries.map(([, stats]) => stats[key] ?? 0);
  const max = Math.max(...values, 1);
  const bars = entries
    .map(([spec, stats], index) => {
      const value = stats[key];
      const width = value === null ? 0 : Math.max(2, (value / max) * (BAR_WIDTH - 130));
      const y = index * (BAR_HEIGHT + 6);
      return `
        <g data-series="${escapeHtml(spec)}">
          <text x="0" y="${y + 17}" class="bar-label">${escapeHtml(spec)}</text>
          <rect x="130" y="${y + 4}" width="${width.toFixed(1)}" height="${BAR_HEIGHT - 10}" rx="3"></rect>
          <text x="${135 + width}" y="${y + 17}" class="bar-value">${value === null ? "n/a" : escapeHtml(Math.round(value))}</text>
        </g>`;
    })
    .join("\n");
  const height = entries.length * (BAR_HEIGHT + 6) + 4;
  return `
    <figure class="chart">
      <figcaption>${escapeHtml(title)}</figcaption>
      <svg viewBox="0 0 ${BAR_WIDTH} ${height}" width="${BAR_WIDTH}" height="${height}" role="img">${bars}</svg>
    </figure>`;
}
