export function escapeHtml(value: unknown): string {
  return String(value)
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export function banner(message: string | null, retryAction: string | null = null): string {
  if (!message) return "";
  const retry = retryAction
    ? ` <button class="retry" data-action="${escapeHtml(retryAction)}">retry</button>`
    : "";
  return `<div class="banner error" role="alert">${escapeHtml(message)}${retry}</div>`;
}
