// Problem picker and instance-text editor: the entry screen.

import type { AppState } from "../state.js";
import { banner, escapeHtml } from "./html.js";

export function renderPicker(state: AppState): string {
  const cards = state.problemTypes
    .map(
      (t) => `
      <button class="type-card" data-action="pick-type" data-type="${escapeHtml(t.id)}">
        <span class="type-name">${escapeHtml(t.name)}</span>
        <span class="type-meta">${escapeHtml(t.id)} &middot; ${escapeHtml(t.input_format)}</span>
      </button>`,
    )
    .join("\n");
  return `
    ${banner(state.banner, "load-types")}
    <section class="picker">
      <h2>Choose a problem type</h2>
      <div class="type-grid">${cards}</div>
    </section>`;
}

export function renderEditor(state: AppState): string {
  const type = state.problemTypes.find((t) => t.id === state.selectedType);
  const formatHint = type ? `${type.input_format} format` : "";
  return `
    ${banner(state.banner)}
    <section class="editor">
      <h2>Submit a ${escapeHtml(state.selectedType ?? "")} instance</h2>
      <p class="hint">Paste the instance in ${escapeHtml(formatHint)}.</p>
      <textarea id="instance-input" rows="16" spellcheck="false">${escapeHtml(state.inputText)}</textarea>
      <div class="actions">
        <button data-action="back-to-picker">back</button>
        <button class="primary" data-action="submit-problem">submit</button>
      </div>
    </section>`;
}
