"""Stewardship rule enforcement, drug-interaction screening, and safety scoring.

This module is fail-closed: rule and interaction files are validated at load
time and the pipeline refuses to start on invalid safety data. All checks are
pure functions over immutable inputs, so concurrent evaluation is safe.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, replace
from typing import Optional

from .domain import DiseaseLabel
from .errors import ValidationError
from .generation import DrugLexicon, DrugMention, TreatmentPlan, _all_mentions

logger = logging.getLogger(__name__)

SEVERITIES = ("minor", "moderate", "major", "contraindicated")
_SEVERITY_RANK = {name: rank for rank, name in enumerate(SEVERITIES)}

ACTION_FORBID = "forbid"
ACTION_SUBSTITUTE = "substitute"
ACTION_REQUIRE_FLAG = "require_flag"
_ACTIONS = (ACTION_FORBID, ACTION_SUBSTITUTE, ACTION_REQUIRE_FLAG)

DEFAULT_REMOVAL_LEVEL = "contraindicated"
DEFAULT_FLAG_LEVEL = "major"


def severity_rank(severity: str) -> int:
    try:
        return _SEVERITY_RANK[severity]
    except KeyError:
        raise ValidationError(
            f"unknown severity {severity!r}; expected one of {SEVERITIES}") from None


@dataclass(frozen=True)
class StewardshipRule:
    id: str
    scope: str  # disease name or "*"
    trigger: str  # canonical drug id or drug class
    action: str
    substitute_with: Optional[str] = None
    rationale: str = ""

    def __post_init__(self) -> None:
        if self.action not in _ACTIONS:
            raise ValidationError(
                f"rule {self.id!r}: unknown action {self.action!r}")
        if self.action == ACTION_SUBSTITUTE and not self.substitute_with:
            raise ValidationError(
                f"rule {self.id!r}: substitute action requires a target drug")


@dataclass(frozen=True)
class DDIRecord:
    drug_a: str
    drug_b: str
    severity: str
    note: str = ""

    def __post_init__(self) -> None:
        if self.drug_a == self.drug_b:
            raise ValidationError(f"interaction pair ({self.drug_a!r}) with itself")
        severity_rank(self.severity)

    @property
    def key(self) -> frozenset[str]:
        return frozenset((self.drug_a, self.drug_b))


@dataclass(frozen=True)
class StewardshipViolation:
    rule_id: str
    drug: str
    action: str
    substitute_with: Optional[str] = None


@dataclass(frozen=True)
class DDIFinding:
    pair: tuple[str, str]  # lexicographically ordered
    severity: str
    note: str = ""
    disposition: Optional[str] = None  # removed | flagged | None


@dataclass(frozen=True)
class SafetyReport:
    stewardship_violations: tuple[StewardshipViolation, ...]
    ddi_findings: tuple[DDIFinding, ...]
    adjusted_plan: TreatmentPlan
    pharmacist_flag: bool
    ddi_risk: float
    as_violation: float


def _file_checksum(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def load_stewardship_rules(path: str, lexicon: DrugLexicon) -> tuple[StewardshipRule, ...]:
    """Load and validate the rules file (JSON array of rule objects)."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"rules file {path!r}: invalid JSON") from exc
    if not isinstance(raw, list):
        raise ValidationError(f"rules file {path!r}: expected a JSON array")
    rules: list[StewardshipRule] = []
    seen: set[str] = set()
    for obj in raw:
        rule = StewardshipRule(
            id=str(obj["id"]), scope=str(obj["scope"]), trigger=str(obj["trigger"]),
            action=str(obj["action"]), substitute_with=obj.get("substitute_with"),
            rationale=str(obj.get("rationale", "")))
        if rule.id in seen:
            raise ValidationError(f"rules file {path!r}: duplicate rule id {rule.id!r}")
        seen.add(rule.id)
        if rule.action == ACTION_SUBSTITUTE and not lexicon.has_canonical(rule.substitute_with):
            raise ValidationError(
                f"rule {rule.id!r}: substitute target {rule.substitute_with!r} "
                "not present in lexicon")
        rules.append(rule)
    logger.info("loaded %d stewardship rules from %s (sha256=%s)",
                len(rules), path, _file_checksum(path))
    return tuple(rules)


def load_ddi_database(path: str) -> dict[frozenset[str], DDIRecord]:
    """Load the interaction CSV ``drug_a,drug_b,severity,note``."""
    import csv

    db: dict[frozenset[str], DDIRecord] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"drug_a", "drug_b", "severity"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ValidationError(
                f"interaction file {path!r}: header must contain {sorted(required)}")
        for row_number, row in enumerate(reader, start=1):
            record = DDIRecord(
                drug_a=row["drug_a"].strip(), drug_b=row["drug_b"].strip(),
                severity=row["severity"].strip(),
                note=(row.get("note") or "").strip())
            if record.key in db:
                raise ValidationError(
                    f"interaction file {path!r} row {row_number}: duplicate pair "
                    f"{sorted(record.key)}")
            db[record.key] = record
    if not db:
        raise ValidationError(f"interaction file {path!r} contains no records")
    logger.info("loaded %d interaction records from %s (sha256=%s)",
                len(db), path, _file_checksum(path))
    return db


def _trigger_matches(trigger: str, drug: str, lexicon: DrugLexicon) -> bool:
    return trigger == drug or trigger in lexicon.classes_of(drug)


def check_stewardship(plan: TreatmentPlan, diagnosis: DiseaseLabel,
                      rules: tuple[StewardshipRule, ...],
                      lexicon: DrugLexicon) -> tuple[StewardshipViolation, ...]:
    """Return every rule firing for this plan and diagnosis.

    A rule fires when its scope is "*" or matches the diagnosis name
    (case-insensitive) and its trigger matches a plan drug or one of the
    drug's classes.
    """
    violations: list[StewardshipViolation] = []
    for rule in rules:
        if rule.scope != "*" and rule.scope.lower() != diagnosis.name.lower():
            continue
        for drug in plan.drug_ids():
            if _trigger_matches(rule.trigger, drug, lexicon):
                violations.append(StewardshipViolation(
                    rule_id=rule.id, drug=drug, action=rule.action,
                    substitute_with=rule.substitute_with))
    return tuple(violations)


import re as _re

_MARKER_RE = _re.compile(r"\[(?:REMOVED|ADJUSTED):[^\]]*\]")


def _scannable(text: str) -> str:
    """Blank out annotation markers (offsets preserved) so marker contents
    are never mistaken for drug mentions on later scans."""
    return _MARKER_RE.sub(lambda m: " " * len(m.group(0)), text)


def _edit_plan(plan: TreatmentPlan, lexicon: DrugLexicon,
               removals: dict[str, str],
               substitutions: dict[str, tuple[str, str]]) -> TreatmentPlan:
    """Replace or swap every mention of the targeted drugs in one pass.

    Mention spans for the surviving drugs are re-derived by position
    bookkeeping rather than re-extraction, so inserted marker text can never
    introduce phantom mentions.
    """
    from .generation import DrugMention

    text = plan.text
    out: list[str] = []
    new_mentions: list[DrugMention] = []
    pos = 0
    length = 0
    for mention in _all_mentions(_scannable(text), lexicon):
        start, end = mention.span
        out.append(text[pos:start])
        length += start - pos
        if mention.canonical in removals:
            marker = removals[mention.canonical]
            out.append(marker)
            length += len(marker)
        elif mention.canonical in substitutions:
            target, suffix = substitutions[mention.canonical]
            out.append(target)
            new_mentions.append(DrugMention(target, (length, length + len(target))))
            length += len(target)
            out.append(suffix)
            length += len(suffix)
        else:
            out.append(text[start:end])
            new_mentions.append(DrugMention(mention.canonical,
                                            (length, length + end - start)))
            length += end - start
        pos = end
    out.append(text[pos:])

    seen: set[str] = set()
    drugs = []
    for mention in new_mentions:
        if mention.canonical not in seen:
            seen.add(mention.canonical)
            drugs.append(mention)
    return replace(plan, text="".join(out), drugs=tuple(drugs))


def adjust_antibiotics(plan: TreatmentPlan,
                       violations: tuple[StewardshipViolation, ...],
                       lexicon: DrugLexicon) -> TreatmentPlan:
    """Apply forbid/substitute firings to the plan; idempotent.

    Forbidden drugs are removed from the drug list and every mention in the
    text is replaced by a ``[REMOVED: <rule id>]`` marker. Substitutions swap
    the canonical id and annotate the text. ``require_flag`` leaves the plan
    unchanged (the pharmacist flag is raised by the caller).
    """
    removed: set[str] = set()
    substitutions: dict[str, tuple[str, str]] = {}
    rule_of: dict[str, str] = {}
    for violation in violations:
        if violation.action == ACTION_FORBID:
            removed.add(violation.drug)
            rule_of[violation.drug] = violation.rule_id
        elif violation.action == ACTION_SUBSTITUTE:
            substitutions[violation.drug] = (
                violation.substitute_with, f" [ADJUSTED: {violation.rule_id}]")

    present = set(plan.drug_ids())
    removed &= present
    substitutions = {d: v for d, v in substitutions.items()
                     if d in present and d not in removed}
    if not removed and not substitutions:
        return plan
    removals = {drug: f"[REMOVED: {rule_of[drug]}]" for drug in removed}
    return _edit_plan(plan, lexicon, removals, substitutions)


def check_ddi(plan: TreatmentPlan,
              db: dict[frozenset[str], DDIRecord]) -> tuple[DDIFinding, ...]:
    """Look up every unordered pair of distinct plan drugs."""
    drugs = plan.drug_ids()
    findings: list[DDIFinding] = []
    for i in range(len(drugs)):
        for j in range(i + 1, len(drugs)):
            record = db.get(frozenset((drugs[i], drugs[j])))
            if record is not None:
                pair = tuple(sorted((drugs[i], drugs[j])))
                findings.append(DDIFinding(pair=pair, severity=record.severity,
                                           note=record.note))
    return tuple(findings)


def fix_or_flag(plan: TreatmentPlan, findings: tuple[DDIFinding, ...],
                db: dict[frozenset[str], DDIRecord], lexicon: DrugLexicon,
                removal_level: str = DEFAULT_REMOVAL_LEVEL,
                flag_level: str = DEFAULT_FLAG_LEVEL):
    """Remove or flag interacting pairs; returns (plan, findings, pharmacist_flag).

    Pairs at or above the removal level lose their later-mentioned drug (the
    earlier mention is retained); the check repeats after each removal until
    no removable pair remains. Surviving pairs at or above the flag level set
    the pharmacist flag. Idempotent: a second application is a no-op.
    """
    removal_rank = severity_rank(removal_level)
    flag_rank = severity_rank(flag_level)
    if removal_rank < flag_rank:
        raise ValidationError("removal level must be at or above flag level")

    current = plan
    dispositions: dict[tuple[str, str], str] = {}
    while True:
        active = check_ddi(current, db)
        removable = sorted(
            (f for f in active if severity_rank(f.severity) >= removal_rank),
            key=lambda f: f.pair)
        if not removable:
            break
        finding = removable[0]
        order = current.drug_ids()
        later = max(finding.pair, key=order.index)
        marker = f"[REMOVED: ddi {finding.pair[0]}+{finding.pair[1]}]"
        current = _edit_plan(current, lexicon, {later: marker}, {})
        dispositions[finding.pair] = "removed"

    final_drugs = set(current.drug_ids())
    annotated: list[DDIFinding] = []
    pharmacist_flag = False
    for finding in findings:
        rank = severity_rank(finding.severity)
        if finding.pair in dispositions:
            annotated.append(replace(finding, disposition="removed"))
        elif rank >= removal_rank and not set(finding.pair) <= final_drugs:
            # pair dissolved as a side effect of another removal
            annotated.append(replace(finding, disposition="removed"))
        elif rank >= flag_rank and set(finding.pair) <= final_drugs:
            pharmacist_flag = True
            annotated.append(replace(finding, disposition="flagged"))
        else:
            annotated.append(finding)
    return current, tuple(annotated), pharmacist_flag


def compute_risk_terms(plan: TreatmentPlan, findings: tuple[DDIFinding, ...],
                       violations: tuple[StewardshipViolation, ...]) -> tuple[float, float]:
    """Interaction and stewardship penalty terms, both in [0, 1].

    Interaction risk is the fraction of distinct drug pairs at major severity
    or above (0 with fewer than two drugs); the stewardship term is fired
    forbid/substitute rules over the drug count, clamped to [0, 1]. Both are
    computed against the original, unadjusted plan.
    """
    n_drugs = len(plan.drugs)
    total_pairs = n_drugs * (n_drugs - 1) // 2
    if total_pairs == 0:
        ddi_risk = 0.0
    else:
        risky = {f.pair for f in findings
                 if severity_rank(f.severity) >= severity_rank("major")}
        ddi_risk = len(risky) / total_pairs
    fired = sum(1 for v in violations
                if v.action in (ACTION_FORBID, ACTION_SUBSTITUTE))
    as_violation = min(1.0, fired / max(1, n_drugs))
    return float(ddi_risk), float(as_violation)


@dataclass(frozen=True)
class ScgsResult:
    value: float
    raw: float


def scgs(bert_f1: float, ddi_risk: float, as_violation: float,
         lam: float = 0.5) -> ScgsResult:
    """Blend semantic fidelity with safety penalties.

    score = lam * bert_f1 + (1 - lam) * (1 - ddi_risk - as_violation),
    clamped to [0, 1]; the unclamped value is reported alongside.
    """
    if not 0.0 <= lam <= 1.0:
        raise ValidationError(f"lambda {lam} outside [0, 1]")
    for name, value in (("bert_f1", bert_f1), ("ddi_risk", ddi_risk),
                        ("as_violation", as_violation)):
        if not 0.0 <= value <= 1.0:
            raise ValidationError(f"{name} = {value} outside [0, 1]")
    raw = lam * bert_f1 + (1.0 - lam) * (1.0 - ddi_risk - as_violation)
    return ScgsResult(value=float(min(1.0, max(0.0, raw))), raw=float(raw))
