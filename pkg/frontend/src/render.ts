import { CaseOutcome, DiagnosisView, ReviewItem, SafetyView } from "./types.js";

/** DOM builders for outcome and queue views.
 *
 * Every number shown here is copied from an API response; the console never
 * derives clinical quantities of its own (formatting only).
 */

const TOP_BARS = 5;
const MARKER = /\[(?:REMOVED|ADJUSTED):[^\]]*\]/g;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function formatPercent(value: number): string {
  return `${(value * 100).toFixed(1)}%`;
}

export function formatScore(value: number): string {
  return value.toFixed(4);
}

function probabilityBars(diagnosis: DiagnosisView): HTMLElement {
  const wrap = el("div", "prob-bars");
  const top = [...diagnosis.probabilities]
    .sort((a, b) => b.prob - a.prob)
    .slice(0, TOP_BARS);
  for (const entry of top) {
    const row = el("div", "bar-row");
    row.appendChild(el("span", "bar-label", entry.label));
    const track = el("div", "bar-track");
    const fill = el("div", "bar-fill");
    fill.style.width = `${Math.max(0.5, entry.prob * 100)}%`;
    track.appendChild(fill);
    row.appendChild(track);
    row.appendChild(el("span", "bar-value", formatPercent(entry.prob)));
    wrap.appendChild(row);
  }
  return wrap;
}

/** Plan text with safety annotations highlighted without using innerHTML. */
function annotatedText(text: string): HTMLElement {
  const p = el("p", "plan-text");
  let cursor = 0;
  for (const match of text.matchAll(MARKER)) {
    const start = match.index ?? 0;
    if (start > cursor) p.appendChild(document.createTextNode(text.slice(cursor, start)));
    const mark = el("mark", "safety-annotation", match[0]);
    p.appendChild(mark);
    cursor = start + match[0].length;
  }
  if (cursor < text.length) p.appendChild(document.createTextNode(text.slice(cursor)));
  return p;
}

function safetyPanel(safety: SafetyView): HTMLElement {
  const panel = el("div", "safety-panel");
  panel.appendChild(el("h4", undefined, "Safety review"));
  if (safety.pharmacist_flag) {
    panel.appendChild(el("span", "badge badge-pharmacist", "pharmacist review"));
  }
  const risks = el("p", "risk-terms");
  risks.textContent =
    `interaction risk ${formatScore(safety.ddi_risk)} - ` +
    `stewardship violations ${formatScore(safety.as_violation)}`;
  panel.appendChild(risks);
  if (safety.stewardship_violations.length) {
    const list = el("ul", "violations");
    for (const violation of safety.stewardship_violations) {
      list.appendChild(el(
        "li",
        `violation violation-${violation.action}`,
        `${violation.rule_id}: ${violation.action} ${violation.drug}` +
          (violation.substitute_with ? ` -> ${violation.substitute_with}` : ""),
      ));
    }
    panel.appendChild(list);
  }
  if (safety.ddi_findings.length) {
    const list = el("ul", "ddi-findings");
    for (const finding of safety.ddi_findings) {
      const disposition = finding.disposition ? ` [${finding.disposition}]` : "";
      list.appendChild(el(
        "li",
        `ddi ddi-${finding.disposition ?? "noted"}`,
        `${finding.pair[0]} + ${finding.pair[1]} (${finding.severity})${disposition}`,
      ));
    }
    panel.appendChild(list);
  }
  return panel;
}

export function renderOutcome(outcome: CaseOutcome): HTMLElement {
  const root = el("section", `outcome outcome-${outcome.status}`);
  root.appendChild(el("h3", undefined, `Case ${outcome.case_id}`));

  if (outcome.status === "failed") {
    const error = outcome.error;
    root.appendChild(el(
      "p", "error-panel",
      error ? `failed at ${error.stage}: ${error.message}` : "failed"));
    return root;
  }

  const diagnosis = outcome.diagnosis;
  if (diagnosis) {
    const header = el("div", "diagnosis-header");
    header.appendChild(el("span", "diagnosis-label", diagnosis.label.name));
    if (diagnosis.flagged) {
      header.appendChild(el("span", "badge badge-flagged", "flagged for expert review"));
    }
    root.appendChild(header);
    const uncertainty = el("p", "uncertainty");
    uncertainty.textContent =
      `uncertainty ${diagnosis.uncertainty.toExponential(3)} ` +
      `(threshold ${diagnosis.threshold_used.toExponential(3)}, ` +
      `${diagnosis.passes} passes)`;
    root.appendChild(uncertainty);
    root.appendChild(probabilityBars(diagnosis));
  }

  if (outcome.status === "flagged") {
    const note = el("p", "flagged-note",
      "No automated treatment for flagged cases; adjudicate it in the queue.");
    root.appendChild(note);
    return root; // flagged view never shows a treatment panel
  }

  if (outcome.retrieval) {
    const evidence = el("div", "evidence");
    evidence.appendChild(el("h4", undefined, "Evidence"));
    if (outcome.retrieval.hits.length === 0) {
      evidence.appendChild(el("p", "evidence-empty", "(no evidence above threshold)"));
    } else {
      const list = el("ol", "evidence-list");
      for (const hit of outcome.retrieval.hits) {
        list.appendChild(el("li", "evidence-hit",
          `${hit.id} (score ${formatScore(hit.score)})`));
      }
      evidence.appendChild(list);
    }
    root.appendChild(evidence);
  }

  if (outcome.plan && outcome.safety) {
    const treatment = el("div", "treatment-panel");
    treatment.appendChild(el("h4", undefined, "Treatment suggestion"));
    treatment.appendChild(annotatedText(outcome.safety.adjusted_text));
    if (outcome.safety.adjusted_drugs.length) {
      const chips = el("div", "drug-chips");
      for (const drug of outcome.safety.adjusted_drugs) {
        chips.appendChild(el("span", "chip", drug));
      }
      treatment.appendChild(chips);
    }
    treatment.appendChild(safetyPanel(outcome.safety));
    if (outcome.scgs) {
      treatment.appendChild(el("p", "scgs",
        `safety-constrained score ${formatScore(outcome.scgs.value)}`));
    }
    root.appendChild(treatment);
  }
  return root;
}

export interface QueueHandlers {
  onResolve: (item: ReviewItem, action: "confirm_label" | "override_label",
              label: string, notes: string, resolver: string) => void;
}

export function renderQueueItem(item: ReviewItem, handlers: QueueHandlers): HTMLElement {
  const root = el("article", `queue-item queue-${item.status}`);
  root.dataset.itemId = item.item_id;
  const head = el("header", "queue-head");
  head.appendChild(el("strong", undefined, item.case_id));
  head.appendChild(el("span", "queue-status", item.status));
  root.appendChild(head);

  const diagnosis = item.outcome.diagnosis;
  if (diagnosis) {
    root.appendChild(el("p", "queue-diagnosis",
      `model suggestion: ${diagnosis.label.name} ` +
      `(uncertainty ${diagnosis.uncertainty.toExponential(3)})`));
  }

  if (item.status === "resolved") {
    const resolution = item.resolution;
    const summary = resolution
      ? `${resolution.action}${resolution.label ? ` -> ${resolution.label}` : ""}` +
        (resolution.notes ? ` (${resolution.notes})` : "")
      : "";
    root.appendChild(el("p", "resolution",
      `resolved by ${item.resolver ?? "?"}: ${summary}`));
    return root;
  }

  const form = el("form", "resolve-form");
  const actionSelect = el("select", "resolve-action") as HTMLSelectElement;
  for (const action of ["confirm_label", "override_label"]) {
    const option = el("option", undefined, action) as HTMLOptionElement;
    option.value = action;
    actionSelect.appendChild(option);
  }
  const labelInput = el("input", "resolve-label") as HTMLInputElement;
  labelInput.placeholder = "override label";
  const notesInput = el("input", "resolve-notes") as HTMLInputElement;
  notesInput.placeholder = "notes";
  const resolverInput = el("input", "resolve-resolver") as HTMLInputElement;
  resolverInput.placeholder = "your id";
  const submit = el("button", "resolve-submit", "Resolve") as HTMLButtonElement;
  submit.type = "submit";
  form.append(actionSelect, labelInput, notesInput, resolverInput, submit);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    handlers.onResolve(
      item,
      actionSelect.value as "confirm_label" | "override_label",
      labelInput.value,
      notesInput.value,
      resolverInput.value || "anonymous",
    );
  });
  root.appendChild(form);
  return root;
}

export function renderNotice(message: string, kind: "info" | "error" = "info"): HTMLElement {
  return el("p", `notice notice-${kind}`, message);
}
