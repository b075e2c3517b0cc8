// Pure HTML renderers for the console panels. Kept DOM-free so the
// contract and end-to-end tests can assert on the produced markup.

import { DocChange, ReportTable, SolveResponse, ValidationReport } from "./api.js";
import { SessionView } from "./session.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderYamlPanel(view: SessionView): string {
  if (!view.yaml) {
    return `<div class="yaml-panel empty">No model yet. Describe your problem to begin.</div>`;
  }
  const badge = renderBadge(view.validation);
  const marked = markChangedLines(view.yaml, view.lastDiff);
  return `<div class="yaml-panel">${badge}<pre class="yaml">${marked}</pre></div>`;
}

function renderBadge(validation: ValidationReport | null): string {
  if (!validation) {
    return "";
  }
  const cls = validation.verdict.toLowerCase();
  const notes: string[] = [];
  for (const correction of validation.corrections) {
    notes.push(
      `<li class="correction">${escapeHtml(correction.kind)} at ${escapeHtml(correction.path)}: ` +
        `${escapeHtml(correction.before)} → ${escapeHtml(correction.after)}</li>`,
    );
  }
  for (const violation of validation.violations) {
    notes.push(
      `<li class="violation">${escapeHtml(violation.kind)} at ${escapeHtml(violation.path)}</li>`,
    );
  }
  for (const semantic of validation.semantic_errors) {
    notes.push(
      `<li class="semantic">${escapeHtml(semantic.kind)}: ${escapeHtml(semantic.name)}</li>`,
    );
  }
  const list = notes.length ? `<ul class="validation-notes">${notes.join("")}</ul>` : "";
  return `<span class="badge badge-${cls}">${validation.verdict}</span>${list}`;
}

// lines belonging to a changed generator/constructor get a highlight
// span, mirroring the server-side diff (never recomputed locally)
function markChangedLines(yaml: string, diff: DocChange[]): string {
  const changedTexts = diff
    .filter((change) => change.kind === "Changed" && typeof change.after === "string")
    .map((change) => change.after as string);
  return yaml
    .split("\n")
    .map((line) => {
      const escaped = escapeHtml(line);
      const hit = changedTexts.some((text) => text.length > 0 && line.includes(text));
      return hit ? `<mark class="diff-changed">${escaped}</mark>` : escaped;
    })
    .join("\n");
}

export function renderDiffPanel(diff: DocChange[]): string {
  if (diff.length === 0) {
    return `<div class="diff-panel empty">No changes.</div>`;
  }
  const items = diff
    .map((change) => {
      const before = formatValue(change.before);
      const after = formatValue(change.after);
      return (
        `<li class="diff-${change.kind.toLowerCase()}"><code>${escapeHtml(change.path)}</code> ` +
        `<span class="kind">${change.kind}</span>` +
        (before ? `<del>${escapeHtml(before)}</del>` : "") +
        (after ? `<ins>${escapeHtml(after)}</ins>` : "") +
        `</li>`
      );
    })
    .join("");
  return `<div class="diff-panel"><ul>${items}</ul></div>`;
}

function formatValue(value: unknown): string {
  if (value === null || value === undefined) {
    return "";
  }
  return typeof value === "string" ? value : JSON.stringify(value);
}

export function renderOutcomePanel(view: SessionView): string {
  const outcome = view.outcome;
  if (!outcome) {
    return `<div class="outcome-panel empty">Not solved yet.</div>`;
  }
  const rows: string[] = [];
  rows.push(`<div class="status status-${outcome.status.toLowerCase()}">${outcome.status}</div>`);
  if (outcome.objective !== null) {
    rows.push(`<div class="objective">objective: ${outcome.objective}</div>`);
  }
  rows.push(renderDelta(view.objectiveDelta));
  if (outcome.solver) {
    rows.push(
      `<div class="solver">solver: ${escapeHtml(outcome.solver.backend)} (${escapeHtml(outcome.solver.origin)})</div>`,
    );
  }
  if (outcome.assignment) {
    const cells = Object.entries(outcome.assignment)
      .map(([name, value]) => `<tr><td>${escapeHtml(name)}</td><td>${value}</td></tr>`)
      .join("");
    rows.push(`<table class="assignment"><tbody>${cells}</tbody></table>`);
  }
  if (outcome.logs.length) {
    rows.push(`<details class="logs"><summary>logs</summary><pre>${escapeHtml(outcome.logs.join("\n"))}</pre></details>`);
  }
  return `<div class="outcome-panel">${rows.join("")}</div>`;
}

export function renderDelta(delta: number | null): string {
  if (delta === null) {
    return `<div class="delta none">Δ objective: n/a</div>`;
  }
  const direction = delta > 0 ? "worse" : delta < 0 ? "better" : "same";
  const sign = delta > 0 ? "+" : "";
  return `<div class="delta delta-${direction}">Δ objective: ${sign}${delta}</div>`;
}

export function renderReportPanel(tables: ReportTable[] | null): string {
  if (!tables || tables.length === 0) {
    return `<div class="report-panel empty">No report.</div>`;
  }
  const blocks = tables.map((table) => {
    const head = table.columns.map((c) => `<th>${escapeHtml(c)}</th>`).join("");
    const body = table.rows
      .map((row) => `<tr>${row.map((cell) => `<td>${escapeHtml(String(cell))}</td>`).join("")}</tr>`)
      .join("");
    return (
      `<section class="report-table"><h3>${escapeHtml(table.name)}</h3>` +
      `<table><thead><tr>${head}</tr></thead><tbody>${body}</tbody></table></section>`
    );
  });
  return `<div class="report-panel">${blocks.join("")}</div>`;
}

export function renderTimeline(view: SessionView): string {
  if (view.timeline.length === 0) {
    return `<div class="timeline empty"></div>`;
  }
  const items = view.timeline
    .map(
      (entry) =>
        `<li class="version" data-index="${entry.index}">` +
        `<span class="query">${escapeHtml(entry.query)}</span>` +
        (entry.diff.length ? `<span class="diff-badge">${entry.diff.length}</span>` : "") +
        `</li>`,
    )
    .join("");
  return `<ol class="timeline">${items}</ol>`;
}

export function renderContractPanel(view: SessionView): string {
  if (view.contractIssues.length === 0) {
    const status = view.dataAccepted ? "data accepted" : "no data yet";
    return `<div class="contract-panel ok">${status}</div>`;
  }
  const items = view.contractIssues
    .map(
      (issue) =>
        `<li class="issue issue-${issue.kind.toLowerCase()}">` +
        `<code>${escapeHtml(issue.input)}</code> ${escapeHtml(issue.kind)}: ${escapeHtml(issue.detail)}</li>`,
    )
    .join("");
  return `<div class="contract-panel"><ul>${items}</ul></div>`;
}

export function renderErrorBanner(view: SessionView): string {
  if (!view.error) {
    return "";
  }
  const attempts = view.failedAttempts
    ? `<span class="attempts">${view.failedAttempts} failed attempt(s)</span>`
    : "";
  return `<div class="error-banner">${escapeHtml(view.error)}${attempts}</div>`;
}
