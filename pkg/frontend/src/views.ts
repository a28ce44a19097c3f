/** HTML rendering. Pure string builders so the layer below the DOM stays
 * testable; app.ts owns actual elements and event wiring. */

import type { BatchStore, CardState } from "./store.js";
import type { AnnotationRecord, EvaluationReport, PendingPair } from "./types.js";
import { METRIC_NAMES, linePath, metricSeries, metricsTableRows } from "./dashboard.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

const tokenize = (value: string): Set<string> =>
  new Set(value.toLowerCase().split(/[^0-9a-z]+/).filter(Boolean));

/** Side-by-side attribute table with per-attribute difference highlighting. */
export function renderPairTable(pair: PendingPair): string {
  const names = [...new Set([...Object.keys(pair.left), ...Object.keys(pair.right)])];
  const rows = names
    .map((name) => {
      const left = pair.left[name] ?? "";
      const right = pair.right[name] ?? "";
      const leftTokens = tokenize(left);
      const rightTokens = tokenize(right);
      const same =
        leftTokens.size === rightTokens.size && [...leftTokens].every((t) => rightTokens.has(t));
      const cls = same ? "attr-same" : "attr-diff";
      return (
        `<tr class="${cls}"><th>${escapeHtml(name)}</th>` +
        `<td>${escapeHtml(left)}</td><td>${escapeHtml(right)}</td></tr>`
      );
    })
    .join("");
  return (
    `<table class="pair-table"><thead><tr><th></th><th>Record A</th><th>Record B</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>`
  );
}

export function renderEvidence(pair: PendingPair): string {
  if (pair.votes === null || pair.positive_ratio === null || pair.entropy === null) {
    return `<p class="evidence evidence-none">sampled randomly (no committee run)</p>`;
  }
  const votes = pair.votes.map((v) => (v === 1 ? "yes" : "no")).join(", ");
  return (
    `<p class="evidence">committee votes: <strong>${votes}</strong> · ` +
    `positive ratio ${escapeHtml(String(pair.positive_ratio))} · ` +
    `entropy ${escapeHtml(String(pair.entropy))}</p>`
  );
}

export function renderCard(store: BatchStore, card: CardState, index: number): string {
  const pairId = card.pair.pair_id;
  const focused = index === store.focusIndex ? " focused" : "";
  const matchOn = card.label === 1 ? " active" : "";
  const nonMatchOn = card.label === 0 ? " active" : "";
  const explanationField = `
    <label class="explanation-label">explanation${store.requireExplanation ? " (required)" : ""}
      <textarea data-explanation="${escapeHtml(pairId)}" rows="2"
        placeholder="why is this a ${card.label === 0 ? "non-match" : "match"}?">${escapeHtml(card.explanation)}</textarea>
    </label>`;
  const state = store.cardComplete(card)
    ? `<span class="card-state done">ready</span>`
    : `<span class="card-state">needs input</span>`;
  return `
  <section class="card${focused}" data-card="${escapeHtml(pairId)}" data-index="${index}">
    <header><h3>${escapeHtml(pairId)}</h3>${state}</header>
    ${renderPairTable(card.pair)}
    ${renderEvidence(card.pair)}
    <div class="label-buttons">
      <button type="button" class="label-match${matchOn}" data-label="1" data-pair="${escapeHtml(pairId)}">match (1)</button>
      <button type="button" class="label-nonmatch${nonMatchOn}" data-label="0" data-pair="${escapeHtml(pairId)}">non-match (0)</button>
    </div>
    ${explanationField}
  </section>`;
}

export function renderBatch(store: BatchStore): string {
  const cards = store.cards.map((card, index) => renderCard(store, card, index)).join("\n");
  const missing = store.missingCards().length;
  const disabled = store.canSubmit() ? "" : " disabled";
  const hint =
    missing > 0
      ? `<p class="submit-hint">${missing} card(s) still need a label${store.requireExplanation ? " and explanation" : ""}</p>`
      : "";
  return `
  <h2>Iteration ${store.iteration}: ${store.cards.length} pair(s) to annotate</h2>
  <p class="shortcut-hint">keys: 1 = match, 0 = non-match, arrows move between cards</p>
  ${cards}
  ${hint}
  <button type="button" id="submit-batch"${disabled}>Submit batch</button>`;
}

export function renderMetricsTable(evaluations: EvaluationReport[]): string {
  if (evaluations.length === 0) return `<p class="zero-state">no evaluations yet</p>`;
  const head = ["iteration", ...METRIC_NAMES, "unparseable"]
    .map((name) => `<th>${name}</th>`)
    .join("");
  const body = metricsTableRows(evaluations)
    .map((row) => `<tr>${row.map((cell) => `<td>${escapeHtml(cell)}</td>`).join("")}</tr>`)
    .join("");
  return `<table class="metrics-table"><thead><tr>${head}</tr></thead><tbody>${body}</tbody></table>`;
}

export function renderMetricsChart(evaluations: EvaluationReport[], width = 420, height = 160): string {
  if (evaluations.length === 0) return "";
  const series = metricSeries(evaluations);
  const paths = series
    .map(
      (entry, index) =>
        `<path class="series series-${entry.name}" data-series="${entry.name}" ` +
        `d="${linePath(entry.points.map((p) => p.value), width, height)}" ` +
        `fill="none" stroke-width="2" stroke="hsl(${index * 80}, 60%, 45%)"></path>`,
    )
    .join("");
  const legend = series
    .map(
      (entry, index) =>
        `<span class="legend-item" style="color: hsl(${index * 80}, 60%, 45%)">${entry.name}</span>`,
    )
    .join(" ");
  return (
    `<svg viewBox="0 0 ${width} ${height}" class="metrics-chart" role="img">${paths}</svg>` +
    `<div class="legend">${legend}</div>`
  );
}

export function renderAnnotationHistory(annotations: AnnotationRecord[]): string {
  if (annotations.length === 0) return `<p class="zero-state">nothing annotated yet</p>`;
  const items = annotations
    .map(
      (record) =>
        `<li>iter ${record.iteration}: <code>${escapeHtml(record.pair_id)}</code> → ` +
        `${record.label === 1 ? "match" : "non-match"}` +
        `${record.explanation ? ` — ${escapeHtml(record.explanation)}` : ""}</li>`,
    )
    .join("");
  return `<ul class="annotation-history">${items}</ul>`;
}

export function renderZeroState(): string {
  return `
  <div class="zero-state-panel">
    <h2>No batch in flight</h2>
    <p>Run an iteration to let the committee pick the most ambiguous pairs
    from the pool, then label them here. Metrics land on the dashboard after
    each evaluation.</p>
  </div>`;
}

export function renderBanner(kind: "error" | "info", message: string): string {
  return `<div class="banner banner-${kind}">${escapeHtml(message)}</div>`;
}
