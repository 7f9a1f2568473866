/** Pure HTML renderers. No fetching, no DOM reads; everything testable as
 * plain string functions. The app layer wires these into the page. */

import type { ExpertiseEntry, QueueItem, Report, ReviewItem } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;")
    .replaceAll("'", "&#39;");
}

const DIAGNOSIS_LABELS: Record<string, string> = {
  clean: "clean",
  noisy_label: "noisy label",
  missing_label: "missing label",
  noisy_and_missing: "noisy + missing",
  unresolved: "unresolved",
};

export function renderDiagnosisBadge(diagnosis: string): string {
  const label = DIAGNOSIS_LABELS[diagnosis] ?? diagnosis;
  return `<span class="badge badge-${escapeHtml(diagnosis)}">${escapeHtml(label)}</span>`;
}

/** Likelihood bars for the candidate labels, proportional with numeric values. */
export function renderCandidates(item: ReviewItem, selection: Set<string>): string {
  if (item.labels.length === 0) {
    return `<p class="empty-note">No label survived filtering for this image.</p>`;
  }
  return item.labels
    .map((entry, index) => {
      const pct = Math.round(entry.likelihood * 1000) / 10;
      const selected = selection.has(entry.label) ? " selected" : "";
      const key = index < 9 ? `<kbd>${index + 1}</kbd>` : "";
      return `
<div class="candidate${selected}" data-label="${escapeHtml(entry.label)}">
  ${key}
  <span class="candidate-label">${escapeHtml(entry.label)}</span>
  <span class="bar-track"><span class="bar-fill" style="width:${pct}%"></span></span>
  <span class="candidate-value">${pct.toFixed(1)}%</span>
  <span class="candidate-score">score ${entry.score.toFixed(3)}</span>
</div>`;
    })
    .join("");
}

/** Vocabulary picker: only served labels are selectable, filtered client-side. */
export function renderVocabulary(
  vocabulary: string[],
  selection: Set<string>,
  filter: string,
): string {
  const needle = filter.trim().toLowerCase();
  const visible = needle
    ? vocabulary.filter((label) => label.includes(needle))
    : vocabulary;
  const rows = visible
    .slice(0, 60)
    .map((label) => {
      const selected = selection.has(label) ? " selected" : "";
      return `<button type="button" class="vocab-option${selected}" data-label="${escapeHtml(label)}">${escapeHtml(label)}</button>`;
    })
    .join("");
  const overflow =
    visible.length > 60
      ? `<span class="overflow-note">${visible.length - 60} more, keep typing</span>`
      : "";
  return rows + overflow;
}

export function renderItem(item: ReviewItem, selection: Set<string>, filter: string): string {
  return `
<div class="item" data-image-id="${escapeHtml(item.image_id)}">
  <div class="item-media">
    <img src="${escapeHtml(item.image_url)}" alt="${escapeHtml(item.image_id)}"
         onerror="this.classList.add('missing')">
    <div class="item-meta">
      <code>${escapeHtml(item.image_id)}</code>
      <span class="context-tag">${escapeHtml(item.context)}</span>
      ${renderDiagnosisBadge(item.diagnosis)}
    </div>
  </div>
  <div class="item-detail">
    <p class="original">original label:
      <strong>${escapeHtml(item.original)}</strong>
      <kbd>a</kbd> accepts it
    </p>
    <div class="candidates">${renderCandidates(item, selection)}</div>
    <div class="selection-line">
      selection: ${renderSelection(selection)}
    </div>
    <input id="vocab-filter" type="text" placeholder="filter vocabulary…"
           value="${escapeHtml(filter)}" autocomplete="off">
    <div class="vocab-grid">${renderVocabulary(item.vocabulary, selection, filter)}</div>
  </div>
</div>`;
}

export function renderSelection(selection: Set<string>): string {
  if (selection.size === 0) {
    return `<em>empty (submit records "none apply")</em>`;
  }
  return [...selection]
    .map((label) => `<span class="chip">${escapeHtml(label)}</span>`)
    .join(" ");
}

export function renderQueueStatus(position: number, queue: QueueItem[]): string {
  const calibration = queue.filter((q) => q.context === "calibration").length;
  return `item ${position + 1} of ${queue.length} (${calibration} calibration pending)`;
}

export function renderCompletion(): string {
  return `
<div class="completion">
  <h2>Queue empty</h2>
  <p>Every calibration image has a verdict and no flagged images await review.</p>
  <p>Run a recompute (<kbd>r</kbd>) to fold the verdicts back into the expertise weights.</p>
</div>`;
}

export function renderReport(report: Report, expertise: ExpertiseEntry[]): string {
  const rows = expertise
    .map(
      (e) => `
    <tr>
      <td>${escapeHtml(e.method)}</td>
      <td>${e.est_acc.toFixed(3)}</td>
      <td>${e.coverage.toFixed(3)}</td>
      <td>${e.penalty.toFixed(3)}</td>
    </tr>`,
    )
    .join("");
  const d = report.diagnosis_counts;
  return `
<div class="report">
  <p>
    <strong>${escapeHtml(report.dataset_id)}</strong>:
    ${report.image_count} images,
    ${report.noisy_label_count} noisy,
    ${report.missing_label_count} missing,
    ${d.unresolved} unresolved
    (cutoff ${report.cutoff.toFixed(4)}, top-${report.top_k},
    full score ${report.full_score.toFixed(3)})
  </p>
  <table>
    <thead><tr><th>method</th><th>est. acc</th><th>coverage</th><th>penalty</th></tr></thead>
    <tbody>${rows}</tbody>
  </table>
</div>`;
}

export function renderBanner(message: string): string {
  return `<div class="banner">${escapeHtml(message)} <button type="button" id="retry">retry</button></div>`;
}
