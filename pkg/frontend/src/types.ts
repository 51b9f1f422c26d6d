/** Wire types mirroring the pipeline service JSON. The console never
 * computes clinical values; it only displays fields from these payloads. */

export interface LabelRef {
  index: number;
  name: string;
}

export interface ProbabilityEntry {
  label: string;
  prob: number;
}

export interface DiagnosisView {
  label: LabelRef;
  flagged: boolean;
  threshold_used: number;
  uncertainty: number;
  passes: number;
  probabilities: ProbabilityEntry[];
  variance: number[];
}

export interface RetrievalHit {
  id: string;
  score: number;
}

export interface RetrievalView {
  hits: RetrievalHit[];
  k_requested: number;
  min_score: number;
}

export interface DrugMentionView {
  canonical: string;
  span: [number, number];
}

export interface PlanView {
  text: string;
  drugs: DrugMentionView[];
  source: string;
  generation_params: { beam_size: number; temperature: number; max_tokens: number };
}

export interface StewardshipViolationView {
  rule_id: string;
  drug: string;
  action: string;
  substitute_with: string | null;
}

export interface DdiFindingView {
  pair: [string, string];
  severity: string;
  note: string;
  disposition: "removed" | "flagged" | null;
}

export interface SafetyView {
  stewardship_violations: StewardshipViolationView[];
  ddi_findings: DdiFindingView[];
  adjusted_text: string;
  adjusted_drugs: string[];
  pharmacist_flag: boolean;
  ddi_risk: number;
  as_violation: number;
}

export interface ScgsView {
  value: number;
  raw: number;
  inputs: Record<string, number> | null;
}

export interface CaseOutcome {
  case_id: string;
  status: "completed" | "flagged" | "failed";
  empty_evidence: boolean;
  timings_ms: Record<string, number>;
  provenance: Record<string, unknown>;
  error: { stage: string; message: string } | null;
  diagnosis: DiagnosisView | null;
  retrieval: RetrievalView | null;
  plan: PlanView | null;
  safety: SafetyView | null;
  scgs: ScgsView | null;
}

export interface Resolution {
  action: "confirm_label" | "override_label";
  label?: string;
  plan_text?: string;
  approved?: boolean;
  notes?: string;
}

export interface ReviewItem {
  item_id: string;
  case_id: string;
  submitted_at: string;
  outcome: CaseOutcome;
  status: "pending" | "resolved";
  resolution: Resolution | null;
  resolver: string | null;
  resolved_at: string | null;
}

export interface CaseRequest {
  id?: string;
  symptom_text: string;
  vitals?: {
    temperature?: number;
    spo2?: number;
    heart_rate?: number;
    age?: number;
    sex?: string;
  };
  reference_treatment?: string;
}
