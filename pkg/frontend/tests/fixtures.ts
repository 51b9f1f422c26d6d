import { CaseOutcome, ReviewItem } from "../src/types.js";

export function completedOutcome(overrides: Partial<CaseOutcome> = {}): CaseOutcome {
  return {
    case_id: "fx-1",
    status: "completed",
    empty_evidence: false,
    timings_ms: { classify: 1.2, retrieve: 0.4, generate: 0.1, safety: 0.2 },
    provenance: {},
    error: null,
    diagnosis: {
      label: { index: 1, name: "beta rash" },
      flagged: false,
      threshold_used: 0.004,
      uncertainty: 0.00123,
      passes: 8,
      probabilities: [
        { label: "alpha fever", prob: 0.05 },
        { label: "beta rash", prob: 0.8 },
        { label: "gamma cough", prob: 0.1 },
        { label: "delta stomach", prob: 0.03 },
        { label: "epsilon", prob: 0.015 },
        { label: "zeta", prob: 0.005 },
      ],
      variance: [0, 0, 0, 0, 0, 0],
    },
    retrieval: {
      hits: [
        { id: "dlg-1", score: 0.41 },
        { id: "dlg-2", score: 0.33 },
      ],
      k_requested: 3,
      min_score: 0.15,
    },
    plan: {
      text: "For beta rash: apply calamine. Follow up with a clinician.",
      drugs: [{ canonical: "calamine", span: [22, 30] }],
      source: "builtin-template",
      generation_params: { beam_size: 3, temperature: 0.7, max_tokens: 256 },
    },
    safety: {
      stewardship_violations: [
        { rule_id: "rule-x", drug: "ibuprofen", action: "forbid", substitute_with: null },
      ],
      ddi_findings: [
        { pair: ["adrug", "bdrug"], severity: "major", note: "", disposition: "flagged" },
      ],
      adjusted_text:
        "For beta rash: apply calamine, not [REMOVED: rule-x]. Follow up with a clinician.",
      adjusted_drugs: ["calamine"],
      pharmacist_flag: true,
      ddi_risk: 0.25,
      as_violation: 0.5,
    },
    scgs: { value: 0.71, raw: 0.71, inputs: null },
    ...overrides,
  };
}

export function flaggedOutcome(): CaseOutcome {
  const base = completedOutcome();
  return {
    ...base,
    case_id: "fx-flagged",
    status: "flagged",
    retrieval: null,
    plan: null,
    safety: null,
    scgs: null,
    diagnosis: { ...base.diagnosis!, flagged: true, uncertainty: 0.09 },
    timings_ms: { classify: 1.0 },
  };
}

export function pendingItem(overrides: Partial<ReviewItem> = {}): ReviewItem {
  return {
    item_id: "rv-000001",
    case_id: "fx-flagged",
    submitted_at: "2026-01-01T00:00:00+00:00",
    outcome: flaggedOutcome(),
    status: "pending",
    resolution: null,
    resolver: null,
    resolved_at: null,
    ...overrides,
  };
}
