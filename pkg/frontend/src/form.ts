import { CaseRequest } from "./types.js";

/** Live case submission form state. Submission stays disabled until the
 * symptom text is non-empty (and while a request is in flight). */
export interface CaseFormState {
  symptomText: string;
  temperature: string;
  spo2: string;
  heartRate: string;
  age: string;
  sex: string;
  submitting: boolean;
}

export function emptyForm(): CaseFormState {
  return {
    symptomText: "",
    temperature: "",
    spo2: "",
    heartRate: "",
    age: "",
    sex: "",
    submitting: false,
  };
}

export function canSubmit(state: CaseFormState): boolean {
  return state.symptomText.trim().length > 0 && !state.submitting;
}

export interface FormParse {
  request: CaseRequest | null;
  errors: string[];
}

function parseNumber(raw: string, field: string, errors: string[]): number | undefined {
  const trimmed = raw.trim();
  if (!trimmed) return undefined;
  const value = Number(trimmed);
  if (!Number.isFinite(value)) {
    errors.push(`${field} must be a number`);
    return undefined;
  }
  return value;
}

/** Build the request body. Only filled vitals fields are sent; the server
 * owns all range validation. */
export function toRequest(state: CaseFormState): FormParse {
  const errors: string[] = [];
  if (!state.symptomText.trim()) errors.push("symptom text is required");
  const vitals: NonNullable<CaseRequest["vitals"]> = {};
  const temperature = parseNumber(state.temperature, "temperature", errors);
  if (temperature !== undefined) vitals.temperature = temperature;
  const spo2 = parseNumber(state.spo2, "spo2", errors);
  if (spo2 !== undefined) vitals.spo2 = spo2;
  const heartRate = parseNumber(state.heartRate, "heart rate", errors);
  if (heartRate !== undefined) vitals.heart_rate = heartRate;
  const age = parseNumber(state.age, "age", errors);
  if (age !== undefined) vitals.age = age;
  if (state.sex.trim()) vitals.sex = state.sex.trim();
  if (errors.length) return { request: null, errors };
  const request: CaseRequest = { symptom_text: state.symptomText.trim() };
  if (Object.keys(vitals).length) request.vitals = vitals;
  return { request, errors: [] };
}
