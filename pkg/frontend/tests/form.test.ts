import { describe, expect, it } from "vitest";

import { canSubmit, emptyForm, toRequest } from "../src/form.js";

describe("case form state", () => {
  it("disables submission until symptom text is non-empty", () => {
    const state = emptyForm();
    expect(canSubmit(state)).toBe(false);
    state.symptomText = "   ";
    expect(canSubmit(state)).toBe(false);
    state.symptomText = "fever and rash";
    expect(canSubmit(state)).toBe(true);
  });

  it("disables submission while a request is in flight", () => {
    const state = emptyForm();
    state.symptomText = "fever";
    state.submitting = true;
    expect(canSubmit(state)).toBe(false);
  });

  it("builds a minimal request without vitals", () => {
    const state = emptyForm();
    state.symptomText = "  dry cough  ";
    const parsed = toRequest(state);
    expect(parsed.errors).toEqual([]);
    expect(parsed.request).toEqual({ symptom_text: "dry cough" });
  });

  it("includes only filled vitals fields", () => {
    const state = emptyForm();
    state.symptomText = "fever";
    state.temperature = "101.5";
    state.age = "19";
    state.sex = "female";
    const parsed = toRequest(state);
    expect(parsed.request?.vitals).toEqual({
      temperature: 101.5,
      age: 19,
      sex: "female",
    });
  });

  it("rejects non-numeric vitals with a named error", () => {
    const state = emptyForm();
    state.symptomText = "fever";
    state.spo2 = "ninety";
    const parsed = toRequest(state);
    expect(parsed.request).toBeNull();
    expect(parsed.errors.join(" ")).toContain("spo2");
  });
});
