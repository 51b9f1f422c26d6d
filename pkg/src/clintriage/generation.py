"""Prompt assembly, treatment generation, and drug-mention extraction.

Two generator routes exist behind one interface: a deterministic builtin
template that reuses the best retrieved clinician response, and an external
HTTP endpoint speaking a small JSON contract. The builtin route doubles as
the fallback when the external endpoint fails, so generation never silently
returns nothing for a valid diagnosis.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from typing import Optional

import requests

from .domain import DiseaseLabel, Vitals
from .errors import GenerationUnavailableError, ValidationError
from .retrieval import DialogueEntry

logger = logging.getLogger(__name__)

SOURCE_BUILTIN = "builtin-template"
SOURCE_EXTERNAL = "external"

DEFAULT_EVIDENCE_BUDGET = 2000
GENERIC_FALLBACK_KEY = "__default__"


@dataclass(frozen=True)
class GenerationParams:
    beam_size: int = 3
    temperature: float = 0.7
    max_tokens: int = 256


@dataclass(frozen=True)
class PromptContext:
    symptoms: str
    vitals: Vitals
    evidence: tuple[tuple[DialogueEntry, float], ...]
    diagnosis: DiseaseLabel

    def __post_init__(self) -> None:
        scores = [s for _, s in self.evidence]
        if any(a < b for a, b in zip(scores, scores[1:])):
            raise ValidationError("evidence scores must be non-increasing")


@dataclass(frozen=True)
class DrugMention:
    canonical: str
    span: tuple[int, int]


@dataclass(frozen=True)
class TreatmentPlan:
    text: str
    drugs: tuple[DrugMention, ...]
    source: str
    generation_params: GenerationParams

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for mention in self.drugs:
            if mention.canonical in seen:
                raise ValidationError(
                    f"duplicate canonical drug {mention.canonical!r} in plan")
            seen.add(mention.canonical)
            start, end = mention.span
            if not (0 <= start < end <= len(self.text)):
                raise ValidationError(
                    f"drug span {mention.span} does not index into plan text")

    def drug_ids(self) -> tuple[str, ...]:
        return tuple(m.canonical for m in self.drugs)


class DrugLexicon:
    """Case-insensitive surface-form to canonical-id map with class tags."""

    def __init__(self, entries: dict[str, str],
                 class_tags: dict[str, frozenset[str]]):
        self.entries = {k.lower(): v for k, v in entries.items()}
        # every canonical id is findable under its own name
        for canonical in set(self.entries.values()):
            self.entries.setdefault(canonical.lower(), canonical)
        self.class_tags = {k: frozenset(v) for k, v in class_tags.items()}
        surfaces = sorted(self.entries, key=len, reverse=True)
        joined = "|".join(re.escape(s) for s in surfaces)
        self._pattern = re.compile(
            rf"(?<![A-Za-z0-9])(?:{joined})(?![A-Za-z0-9])", re.IGNORECASE)

    def canonical(self, surface: str) -> Optional[str]:
        return self.entries.get(surface.lower())

    def classes_of(self, canonical: str) -> frozenset[str]:
        return self.class_tags.get(canonical, frozenset())

    def has_canonical(self, canonical: str) -> bool:
        return canonical in set(self.entries.values())


def load_drug_lexicon(path: str) -> DrugLexicon:
    """Read a JSON object mapping surface forms to {canonical, classes}."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"lexicon {path!r}: invalid JSON") from exc
    if not isinstance(raw, dict) or not raw:
        raise ValidationError(f"lexicon {path!r}: expected a non-empty JSON object")
    entries: dict[str, str] = {}
    class_tags: dict[str, set[str]] = {}
    for surface, spec in raw.items():
        if not isinstance(spec, dict) or "canonical" not in spec:
            raise ValidationError(
                f"lexicon {path!r}: entry {surface!r} missing 'canonical'")
        canonical = str(spec["canonical"])
        entries[surface] = canonical
        class_tags.setdefault(canonical, set()).update(spec.get("classes", []))
    return DrugLexicon(entries=entries,
                       class_tags={k: frozenset(v) for k, v in class_tags.items()})


def _all_mentions(text: str, lexicon: DrugLexicon) -> list[DrugMention]:
    mentions = []
    for match in lexicon._pattern.finditer(text):
        canonical = lexicon.canonical(match.group(0))
        mentions.append(DrugMention(canonical=canonical, span=match.span()))
    return mentions


def extract_drug_mentions(text: str, lexicon: DrugLexicon) -> list[DrugMention]:
    """Longest-match-first scan; one mention per canonical id (first occurrence)."""
    out: list[DrugMention] = []
    seen: set[str] = set()
    for mention in _all_mentions(text, lexicon):
        if mention.canonical not in seen:
            seen.add(mention.canonical)
            out.append(mention)
    return out


def _format_vitals(vitals: Vitals) -> str:
    present = vitals.present_fields()
    if not present:
        return "(none)"
    parts = []
    for name, value in present.items():
        parts.append(f"{name}={value}")
    return "; ".join(parts)


def assemble_prompt(ctx: PromptContext,
                    evidence_budget: int = DEFAULT_EVIDENCE_BUDGET) -> str:
    """Fixed-order sections; evidence capped at a character budget.

    Evidence blocks are added highest-score first and whole blocks are dropped
    from the low-score end once the budget is exceeded.
    """
    lines = [
        f"DIAGNOSIS: {ctx.diagnosis.name}",
        f"SYMPTOMS: {ctx.symptoms}",
        f"VITALS: {_format_vitals(ctx.vitals)}",
        "EVIDENCE:",
    ]
    if not ctx.evidence:
        lines.append("(none)")
        return "\n".join(lines)
    used = 0
    blocks: list[str] = []
    for rank, (entry, score) in enumerate(ctx.evidence, start=1):
        block = f"[{rank}] (score={score:.4f}) {entry.doctor_response}"
        if used + len(block) > evidence_budget and blocks:
            break
        if len(block) > evidence_budget and not blocks:
            # never emit an empty evidence section when evidence exists
            blocks.append(block)
            break
        blocks.append(block)
        used += len(block)
    lines.extend(blocks)
    return "\n".join(lines)


def load_fallback_table(path: str) -> dict[str, str]:
    with open(path, "r", encoding="utf-8") as fh:
        table = json.load(fh)
    if not isinstance(table, dict) or GENERIC_FALLBACK_KEY not in table:
        raise ValidationError(
            f"fallback table {path!r} must be a JSON object with a "
            f"{GENERIC_FALLBACK_KEY!r} entry")
    return {str(k): str(v) for k, v in table.items()}


def generate_builtin(ctx: PromptContext, lexicon: DrugLexicon,
                     fallbacks: dict[str, str],
                     params: GenerationParams = GenerationParams()) -> TreatmentPlan:
    """Deterministic template generation from the top retrieved response."""
    if ctx.evidence:
        top_response = ctx.evidence[0][0].doctor_response.strip().rstrip(".")
        text = f"For {ctx.diagnosis.name}: {top_response}. Follow up with a clinician."
    else:
        text = fallbacks.get(ctx.diagnosis.name,
                             fallbacks.get(GENERIC_FALLBACK_KEY,
                                           "Supportive care; follow up with a clinician."))
    drugs = tuple(extract_drug_mentions(text, lexicon))
    return TreatmentPlan(text=text, drugs=drugs, source=SOURCE_BUILTIN,
                         generation_params=params)


def generate_external(ctx: PromptContext, endpoint: str,
                      params: GenerationParams, lexicon: DrugLexicon,
                      timeout_s: float = 30.0,
                      evidence_budget: int = DEFAULT_EVIDENCE_BUDGET) -> TreatmentPlan:
    """POST the assembled prompt to an external generator endpoint.

    Raises GenerationUnavailableError on timeout, connection failure, non-200
    status, or a response without a 'text' field; callers fall back to the
    builtin generator and record the incident.
    """
    prompt = assemble_prompt(ctx, evidence_budget)
    body = {
        "prompt": prompt,
        "beam_size": params.beam_size,
        "temperature": params.temperature,
        "max_tokens": params.max_tokens,
    }
    try:
        response = requests.post(endpoint, json=body, timeout=timeout_s)
    except requests.RequestException as exc:
        raise GenerationUnavailableError(
            f"external generator unreachable: {exc}") from exc
    if response.status_code != 200:
        raise GenerationUnavailableError(
            f"external generator returned HTTP {response.status_code}")
    try:
        payload = response.json()
    except ValueError as exc:
        raise GenerationUnavailableError("external generator returned non-JSON") from exc
    if not isinstance(payload, dict) or not isinstance(payload.get("text"), str):
        raise GenerationUnavailableError(
            "external generator response missing 'text'")
    text = payload["text"]
    if not text.strip():
        raise GenerationUnavailableError("external generator returned empty text")
    drugs = tuple(extract_drug_mentions(text, lexicon))
    return TreatmentPlan(text=text, drugs=drugs, source=SOURCE_EXTERNAL,
                         generation_params=params)
