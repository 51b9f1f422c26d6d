"""End-to-end case orchestration, review-queue persistence, and evaluation.

The case flow mirrors the inference procedure: classify with uncertainty,
stop and enqueue for expert review when flagged, otherwise retrieve evidence,
generate a treatment, and run the safety post-processing chain. The engine is
fail-closed: no outcome ever carries a plan that skipped safety checks, and
any stage error produces a failed outcome naming the stage.
"""

from __future__ import annotations

import json
import logging
import os
import re
import threading
import time
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from typing import Optional

import numpy as np

from . import metrics as metrics_mod
from . import retrieval as retrieval_mod
from .classifier import (ClassifierModel, DiagnosisResult, FeatureSet,
                         calibrate_threshold, case_seed, classify,
                         encode_dataset, init_model, load_checkpoint,
                         save_checkpoint, save_history_csv, softmax, train,
                         training_profile, _forward_batch)
from .config import SystemConfig
from .domain import (LabeledDataset, PatientRecord, load_symptom2disease,
                     stratified_split)
from .errors import (ConfigError, GenerationUnavailableError, QueueError,
                     ValidationError)
from .generation import (DrugLexicon, PromptContext, TreatmentPlan,
                         generate_builtin, generate_external,
                         load_drug_lexicon, load_fallback_table)
from .preprocess import load_synonyms, smote_oversample
from .safety import (SafetyReport, ScgsResult, check_ddi, check_stewardship,
                     adjust_antibiotics, compute_risk_terms, fix_or_flag,
                     load_ddi_database, load_stewardship_rules, scgs,
                     ACTION_REQUIRE_FLAG)

logger = logging.getLogger(__name__)

STATUS_COMPLETED = "completed"
STATUS_FLAGGED = "flagged"
STATUS_FAILED = "failed"


@dataclass(frozen=True)
class CaseOutcome:
    case_id: str
    status: str
    diagnosis: Optional[DiagnosisResult]
    retrieval: Optional[retrieval_mod.RetrievalResult]
    empty_evidence: bool
    plan: Optional[TreatmentPlan]
    safety: Optional[SafetyReport]
    scgs_result: Optional[ScgsResult]
    scgs_inputs: Optional[dict]
    timings_ms: dict[str, float]
    provenance: dict
    error: Optional[dict]

    def __post_init__(self) -> None:
        if self.plan is not None and self.safety is None:
            raise ValidationError("outcome carries a plan without a safety report")
        if self.status == STATUS_FLAGGED and (
                self.plan is not None or self.retrieval is not None):
            raise ValidationError("flagged outcome must not carry retrieval or plan")
        if self.status == STATUS_COMPLETED and (
                self.plan is None or self.safety is None):
            raise ValidationError("completed outcome must carry plan and safety report")


def outcome_to_dict(outcome: CaseOutcome, label_set: tuple[str, ...]) -> dict:
    """JSON-safe snapshot of an outcome (used by the API and the journal)."""
    d: dict = {
        "case_id": outcome.case_id,
        "status": outcome.status,
        "empty_evidence": outcome.empty_evidence,
        "timings_ms": {k: round(v, 3) for k, v in outcome.timings_ms.items()},
        "provenance": outcome.provenance,
        "error": outcome.error,
        "diagnosis": None,
        "retrieval": None,
        "plan": None,
        "safety": None,
        "scgs": None,
    }
    diag = outcome.diagnosis
    if diag is not None:
        probs = diag.mcd.mean_probs
        d["diagnosis"] = {
            "label": {"index": diag.label.index, "name": diag.label.name},
            "flagged": diag.flagged,
            "threshold_used": diag.threshold_used,
            "uncertainty": diag.mcd.uncertainty,
            "passes": diag.mcd.passes,
            "probabilities": [
                {"label": label_set[i], "prob": float(probs[i])}
                for i in range(len(label_set))
            ],
            "variance": [float(x) for x in diag.mcd.variance],
        }
    if outcome.retrieval is not None:
        d["retrieval"] = {
            "hits": [{"id": h[0], "score": h[1]} for h in outcome.retrieval.hits],
            "k_requested": outcome.retrieval.k_requested,
            "min_score": outcome.retrieval.min_score,
        }
    if outcome.plan is not None:
        d["plan"] = {
            "text": outcome.plan.text,
            "drugs": [{"canonical": m.canonical, "span": list(m.span)}
                      for m in outcome.plan.drugs],
            "source": outcome.plan.source,
            "generation_params": asdict(outcome.plan.generation_params),
        }
    if outcome.safety is not None:
        s = outcome.safety
        d["safety"] = {
            "stewardship_violations": [asdict(v) for v in s.stewardship_violations],
            "ddi_findings": [
                {"pair": list(f.pair), "severity": f.severity, "note": f.note,
                 "disposition": f.disposition}
                for f in s.ddi_findings],
            "adjusted_text": s.adjusted_plan.text,
            "adjusted_drugs": list(s.adjusted_plan.drug_ids()),
            "pharmacist_flag": s.pharmacist_flag,
            "ddi_risk": s.ddi_risk,
            "as_violation": s.as_violation,
        }
    if outcome.scgs_result is not None:
        d["scgs"] = {"value": outcome.scgs_result.value,
                     "raw": outcome.scgs_result.raw,
                     "inputs": outcome.scgs_inputs}
    return d


# ---------------------------------------------------------------------------
# Review queue: append-only JSON Lines journal; replay reconstructs state.
# ---------------------------------------------------------------------------


@dataclass
class ReviewItem:
    item_id: str
    case_id: str
    submitted_at: str
    outcome: dict
    status: str = "pending"
    resolution: Optional[dict] = None
    resolver: Optional[str] = None
    resolved_at: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "item_id": self.item_id, "case_id": self.case_id,
            "submitted_at": self.submitted_at, "outcome": self.outcome,
            "status": self.status, "resolution": self.resolution,
            "resolver": self.resolver, "resolved_at": self.resolved_at,
        }


_RESOLUTION_ACTIONS = ("confirm_label", "override_label")
_ITEM_ID_RE = re.compile(r"rv-(\d+)$")


def _validate_resolution(resolution: dict) -> dict:
    if not isinstance(resolution, dict):
        raise ValidationError("resolution must be an object")
    action = resolution.get("action")
    if action not in _RESOLUTION_ACTIONS:
        raise ValidationError(
            f"resolution action must be one of {_RESOLUTION_ACTIONS}")
    if action == "override_label" and not resolution.get("label"):
        raise ValidationError("override_label resolution requires a label")
    allowed = {"action", "label", "plan_text", "approved", "notes"}
    unknown = set(resolution) - allowed
    if unknown:
        raise ValidationError(f"unknown resolution field(s): {sorted(unknown)}")
    return resolution


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


class ReviewQueue:
    """Durable flagged-case queue backed by an append-only journal.

    Every mutation is journaled before it is applied in memory; replaying the
    journal (or any prefix of it) reconstructs the corresponding state.
    Resolved items are immutable.
    """

    def __init__(self, journal_path: str):
        self.journal_path = journal_path
        self._lock = threading.Lock()
        self._items: dict[str, ReviewItem] = {}
        self._next_seq = 0
        if os.path.exists(journal_path):
            self._replay()

    def _replay(self) -> None:
        with open(self.journal_path, "r", encoding="utf-8") as fh:
            for line_number, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    event = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise QueueError(
                        f"journal {self.journal_path!r} line {line_number}: "
                        f"corrupt event") from exc
                self._apply(event, line_number)

    def _apply(self, event: dict, line_number: int) -> None:
        etype = event.get("type")
        if etype == "enqueue":
            item = ReviewItem(
                item_id=event["item_id"], case_id=event["case_id"],
                submitted_at=event["submitted_at"], outcome=event["outcome"])
            if item.item_id in self._items:
                raise QueueError(
                    f"journal line {line_number}: duplicate item {item.item_id!r}")
            self._items[item.item_id] = item
            match = _ITEM_ID_RE.match(item.item_id)
            if match:
                self._next_seq = max(self._next_seq, int(match.group(1)) + 1)
            else:
                self._next_seq = max(self._next_seq, len(self._items))
        elif etype == "resolve":
            item = self._items.get(event["item_id"])
            if item is None or item.status != "pending":
                raise QueueError(
                    f"journal line {line_number}: resolve of unknown or "
                    f"resolved item {event.get('item_id')!r}")
            item.status = "resolved"
            item.resolution = event["resolution"]
            item.resolver = event.get("resolver")
            item.resolved_at = event.get("resolved_at")
        else:
            raise QueueError(f"journal line {line_number}: unknown event type {etype!r}")

    def _append(self, event: dict) -> None:
        with open(self.journal_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, sort_keys=True) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def enqueue(self, case_id: str, outcome: dict) -> ReviewItem:
        with self._lock:
            item = ReviewItem(
                item_id=f"rv-{self._next_seq:06d}", case_id=case_id,
                submitted_at=_now_iso(), outcome=outcome)
            self._append({"type": "enqueue", "item_id": item.item_id,
                          "case_id": case_id, "submitted_at": item.submitted_at,
                          "outcome": outcome})
            self._items[item.item_id] = item
            self._next_seq += 1
            return item

    def list_items(self, status: Optional[str] = None) -> list[ReviewItem]:
        with self._lock:
            items = list(self._items.values())
        if status is not None:
            if status not in ("pending", "resolved"):
                raise ValidationError(f"unknown queue status filter {status!r}")
            items = [i for i in items if i.status == status]
        return items

    def get(self, item_id: str) -> ReviewItem:
        with self._lock:
            item = self._items.get(item_id)
        if item is None:
            raise QueueError(f"unknown review item {item_id!r}")
        return item

    def resolve(self, item_id: str, resolution: dict,
                resolver: str) -> ReviewItem:
        resolution = _validate_resolution(resolution)
        with self._lock:
            item = self._items.get(item_id)
            if item is None:
                raise QueueError(f"unknown review item {item_id!r}")
            if item.status != "pending":
                raise QueueError(f"review item {item_id!r} is already resolved")
            resolved_at = _now_iso()
            self._append({"type": "resolve", "item_id": item_id,
                          "resolution": resolution, "resolver": resolver,
                          "resolved_at": resolved_at})
            item.status = "resolved"
            item.resolution = resolution
            item.resolver = resolver
            item.resolved_at = resolved_at
            return item

    def compact(self) -> None:
        """Rewrite the journal to the minimal event sequence for current state."""
        with self._lock:
            tmp = self.journal_path + ".tmp"
            with open(tmp, "w", encoding="utf-8") as fh:
                for item in self._items.values():
                    fh.write(json.dumps(
                        {"type": "enqueue", "item_id": item.item_id,
                         "case_id": item.case_id,
                         "submitted_at": item.submitted_at,
                         "outcome": item.outcome}, sort_keys=True) + "\n")
                    if item.status == "resolved":
                        fh.write(json.dumps(
                            {"type": "resolve", "item_id": item.item_id,
                             "resolution": item.resolution,
                             "resolver": item.resolver,
                             "resolved_at": item.resolved_at},
                            sort_keys=True) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, self.journal_path)


# ---------------------------------------------------------------------------
# Engine
# ---------------------------------------------------------------------------


class _StageTimer:
    def __init__(self):
        self.timings: dict[str, float] = {}
        self.order: list[str] = []

    def __call__(self, name: str):
        timer = self

        class _Ctx:
            def __enter__(self_inner):
                self_inner.start = time.perf_counter()
                return self_inner

            def __exit__(self_inner, exc_type, exc, tb):
                timer.timings[name] = (time.perf_counter() - self_inner.start) * 1000.0
                timer.order.append(name)
                return False

        return _Ctx()


class PipelineEngine:
    """Loaded model plus retrieval index, safety data, and the review queue."""

    def __init__(self, config: SystemConfig, model: ClassifierModel,
                 threshold: float, index: retrieval_mod.EmbeddingIndex,
                 corpus: list[retrieval_mod.DialogueEntry],
                 lexicon: DrugLexicon, rules, ddi_db, fallbacks: dict[str, str],
                 synonyms: Optional[dict[str, str]], queue: ReviewQueue):
        self.config = config
        self.model = model
        self.threshold = threshold
        self.index = index
        self.corpus_by_id = {e.id: e for e in corpus}
        self.lexicon = lexicon
        self.rules = rules
        self.ddi_db = ddi_db
        self.fallbacks = fallbacks
        self.synonyms = synonyms
        self.queue = queue
        self.outcomes: dict[str, dict] = {}
        self._outcomes_lock = threading.Lock()
        self._embedder = retrieval_mod.make_builtin_embedder(
            model.featurizer, synonyms)
        if index.dimension != model.featurizer.dimension:
            raise ConfigError(
                f"index dimension {index.dimension} does not match the "
                f"featurizer dimension {model.featurizer.dimension}; queries "
                "cannot be embedded against this index")

    @classmethod
    def from_config(cls, config: SystemConfig) -> "PipelineEngine":
        model = load_checkpoint(config.resolve(config.paths.model))
        threshold = config.inference.threshold
        if threshold is None:
            calib_path = config.resolve(config.paths.calibration)
            if calib_path is None or not os.path.exists(calib_path):
                raise ConfigError(
                    "no inference threshold configured and no calibration file "
                    f"found at {calib_path!r}; run the calibrate command first")
            with open(calib_path, "r", encoding="utf-8") as fh:
                threshold = float(json.load(fh)["threshold"])
        corpus = retrieval_mod.load_corpus_jsonl(config.resolve(config.paths.corpus))
        emb_path = config.resolve(config.paths.embeddings)
        synonyms = None
        if config.paths.synonyms:
            synonyms = load_synonyms(config.resolve(config.paths.synonyms))
        if emb_path is not None and os.path.exists(emb_path):
            index = retrieval_mod.load_external_embeddings(emb_path)
        else:
            index = retrieval_mod.build_index(
                corpus,
                retrieval_mod.make_builtin_embedder(model.featurizer, synonyms),
                embed_fields=config.retrieval.embed_fields)
        known = {e.id for e in corpus}
        missing = [i for i in index.ids if i not in known]
        if missing:
            raise ConfigError(
                f"embedding index names {len(missing)} id(s) absent from the "
                f"corpus, e.g. {missing[:3]}")
        lexicon = load_drug_lexicon(config.resolve(config.paths.lexicon))
        rules = load_stewardship_rules(config.resolve(config.paths.rules), lexicon)
        ddi_db = load_ddi_database(config.resolve(config.paths.ddi))
        fallbacks = load_fallback_table(config.resolve(config.paths.fallbacks))
        queue = ReviewQueue(config.resolve(config.paths.queue_journal))
        return cls(config, model, threshold, index, corpus, lexicon, rules,
                   ddi_db, fallbacks, synonyms, queue)

    # -- case flow ---------------------------------------------------------

    def run_case(self, record: PatientRecord,
                 reference: Optional[str] = None) -> CaseOutcome:
        """Execute the full inference procedure for one record."""
        cfg = self.config
        timer = _StageTimer()
        seed = case_seed(cfg.seed, record.id)
        provenance: dict = {"seed": seed, "stages": timer.order}
        stage = "classify"
        try:
            with timer("classify"):
                diagnosis = classify(self.model, record, self.threshold,
                                     cfg.inference.passes, seed, self.synonyms)

            if diagnosis.flagged:
                outcome = CaseOutcome(
                    case_id=record.id, status=STATUS_FLAGGED,
                    diagnosis=diagnosis, retrieval=None, empty_evidence=False,
                    plan=None, safety=None, scgs_result=None, scgs_inputs=None,
                    timings_ms=timer.timings, provenance=provenance, error=None)
                snapshot = outcome_to_dict(outcome, self.model.label_set)
                self.queue.enqueue(record.id, snapshot)
                self._store(record.id, snapshot)
                return outcome

            stage = "retrieve"
            with timer("retrieve"):
                query_text = retrieval_mod.construct_query(diagnosis.label, record)
                query = retrieval_mod.embed_query(query_text, self._embedder)
                result = retrieval_mod.search(self.index, query,
                                              cfg.retrieval.k,
                                              cfg.retrieval.min_score)
            evidence = tuple(
                (self.corpus_by_id[hit_id], score) for hit_id, score in result.hits)
            empty_evidence = not evidence
            provenance["query"] = query_text
            provenance["evidence"] = [
                {"id": h[0], "score": h[1]} for h in result.hits]
            provenance["empty_evidence"] = empty_evidence

            stage = "generate"
            with timer("generate"):
                ctx = PromptContext(symptoms=record.symptom_text,
                                    vitals=record.vitals, evidence=evidence,
                                    diagnosis=diagnosis.label)
                params = cfg.generation.params()
                generator_used = "builtin"
                generator_fallback = False
                if cfg.generation.mode == "external":
                    try:
                        plan = generate_external(
                            ctx, cfg.generation.endpoint, params, self.lexicon,
                            cfg.generation.timeout_s, cfg.generation.evidence_budget)
                        generator_used = "external"
                    except GenerationUnavailableError as exc:
                        logger.warning("external generator failed (%s); "
                                       "falling back to builtin", exc)
                        plan = generate_builtin(ctx, self.lexicon,
                                                self.fallbacks, params)
                        generator_fallback = True
                else:
                    plan = generate_builtin(ctx, self.lexicon, self.fallbacks,
                                            params)
            provenance["generator"] = generator_used
            provenance["generator_fallback"] = generator_fallback

            stage = "safety"
            with timer("safety"):
                violations = check_stewardship(plan, diagnosis.label,
                                               self.rules, self.lexicon)
                adjusted = adjust_antibiotics(plan, violations, self.lexicon)
                findings = check_ddi(adjusted, self.ddi_db)
                adjusted, findings, ddi_flag = fix_or_flag(
                    adjusted, findings, self.ddi_db, self.lexicon,
                    cfg.safety.removal_level, cfg.safety.flag_level)
                ddi_risk, as_violation = compute_risk_terms(plan, findings,
                                                            violations)
                pharmacist_flag = ddi_flag or any(
                    v.action == ACTION_REQUIRE_FLAG for v in violations)
                report = SafetyReport(
                    stewardship_violations=violations, ddi_findings=findings,
                    adjusted_plan=adjusted, pharmacist_flag=pharmacist_flag,
                    ddi_risk=ddi_risk, as_violation=as_violation)
            provenance["rule_firings"] = [v.rule_id for v in violations]
            provenance["ddi_pairs"] = [list(f.pair) for f in findings]

            scgs_result = None
            scgs_inputs = None
            if reference is not None and reference.strip():
                stage = "score"
                with timer("score"):
                    bert = metrics_mod.bertscore_f1(adjusted.text, reference)
                    scgs_result = scgs(bert, ddi_risk, as_violation,
                                       cfg.safety.scgs_lambda)
                    scgs_inputs = {"bert_f1": bert, "ddi_risk": ddi_risk,
                                   "as_violation": as_violation,
                                   "lambda": cfg.safety.scgs_lambda}

            outcome = CaseOutcome(
                case_id=record.id, status=STATUS_COMPLETED, diagnosis=diagnosis,
                retrieval=result, empty_evidence=empty_evidence, plan=adjusted,
                safety=report, scgs_result=scgs_result, scgs_inputs=scgs_inputs,
                timings_ms=timer.timings, provenance=provenance, error=None)
            self._store(record.id, outcome_to_dict(outcome, self.model.label_set))
            return outcome
        except Exception as exc:  # fail closed: no plan escapes a broken stage
            logger.exception("case %s failed at stage %s", record.id, stage)
            outcome = CaseOutcome(
                case_id=record.id, status=STATUS_FAILED, diagnosis=None,
                retrieval=None, empty_evidence=False, plan=None, safety=None,
                scgs_result=None, scgs_inputs=None, timings_ms=timer.timings,
                provenance=provenance,
                error={"stage": stage, "message": str(exc)})
            self._store(record.id, outcome_to_dict(outcome, self.model.label_set))
            return outcome

    def _store(self, case_id: str, snapshot: dict) -> None:
        with self._outcomes_lock:
            self.outcomes[case_id] = snapshot

    def get_outcome(self, case_id: str) -> Optional[dict]:
        with self._outcomes_lock:
            return self.outcomes.get(case_id)

    def summary(self) -> dict:
        from . import kernels

        with self._outcomes_lock:
            snapshots = list(self.outcomes.values())
        by_status = {STATUS_COMPLETED: 0, STATUS_FLAGGED: 0, STATUS_FAILED: 0}
        total_ms = []
        for snap in snapshots:
            by_status[snap["status"]] = by_status.get(snap["status"], 0) + 1
            total_ms.append(sum(snap["timings_ms"].values()))
        pending = len(self.queue.list_items("pending"))
        resolved = len(self.queue.list_items("resolved"))
        n = len(snapshots)
        return {
            "cases_total": n,
            "completed": by_status[STATUS_COMPLETED],
            "flagged": by_status[STATUS_FLAGGED],
            "failed": by_status[STATUS_FAILED],
            "flag_rate": (by_status[STATUS_FLAGGED] / n) if n else 0.0,
            "mean_total_ms": (sum(total_ms) / n) if n else 0.0,
            "queue_pending": pending,
            "queue_resolved": resolved,
            "kernel_backend": kernels.backend_name(),
        }


# ---------------------------------------------------------------------------
# Training and evaluation entry points used by the CLI.
# ---------------------------------------------------------------------------


def _encode_with_smote(train_ds: LabeledDataset, config: SystemConfig,
                       synonyms) -> FeatureSet:
    encoded = encode_dataset(train_ds, config.featurizer, synonyms)
    fused = np.hstack([encoded.text, encoded.vitals])
    fused, labels = smote_oversample(fused, encoded.labels,
                                     config.training.smote_k, config.seed)
    text_dim = config.featurizer.dimension
    return FeatureSet(text=fused[:, :text_dim], vitals=fused[:, text_dim:],
                      labels=labels)


def train_from_config(config: SystemConfig):
    """Dataset -> split -> featurize -> SMOTE -> train -> checkpoint + history."""
    synonyms = None
    if config.paths.synonyms:
        synonyms = load_synonyms(config.resolve(config.paths.synonyms))
    ds = load_symptom2disease(config.resolve(config.paths.dataset))
    train_ds, val_ds = stratified_split(ds, config.training.train_fraction,
                                        config.seed)
    train_set = _encode_with_smote(train_ds, config, synonyms)
    val_set = encode_dataset(val_ds, config.featurizer, synonyms)

    t = config.training
    overrides = dict(epochs=t.epochs, batch_size=t.batch_size, seed=config.seed,
                     focal_gamma=t.focal_gamma, weight_decay=t.weight_decay,
                     warmup_fraction=t.warmup_fraction, layer_decay=t.layer_decay,
                     clip_norm=t.clip_norm)
    if t.lr_override is not None:
        overrides["learning_rate"] = t.lr_override
        overrides["lr_multiplier"] = 1.0
    train_cfg = training_profile(t.profile, **overrides)

    model = init_model(ds.label_set, config.featurizer,
                       vit_hidden=t.vit_hidden, trunk_hidden=t.trunk_hidden,
                       dropout_rate=t.dropout_rate, seed=config.seed)
    model, history = train(model, train_set, val_set, train_cfg)
    save_checkpoint(model, config.resolve(config.paths.model))
    save_history_csv(history, config.resolve(config.paths.history))
    return model, history, train_ds, val_ds


def calibrate_from_config(config: SystemConfig,
                          target: Optional[float] = None) -> dict:
    """Compute and persist the triage threshold on the validation split."""
    synonyms = None
    if config.paths.synonyms:
        synonyms = load_synonyms(config.resolve(config.paths.synonyms))
    model = load_checkpoint(config.resolve(config.paths.model))
    ds = load_symptom2disease(config.resolve(config.paths.dataset))
    _, val_ds = stratified_split(ds, config.training.train_fraction, config.seed)
    rate = target if target is not None else config.inference.target_flag_rate
    threshold = calibrate_threshold(model, val_ds, rate,
                                    config.inference.passes, config.seed,
                                    synonyms)
    flagged = 0
    for record, _ in val_ds.records:
        result = classify(model, record, threshold, config.inference.passes,
                          case_seed(config.seed, record.id), synonyms)
        flagged += int(result.flagged)
    payload = {
        "threshold": threshold,
        "target_flag_rate": rate,
        "val_size": len(val_ds),
        "flagged": flagged,
        "flag_rate": flagged / len(val_ds),
        "passes": config.inference.passes,
        "seed": config.seed,
    }
    with open(config.resolve(config.paths.calibration), "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return payload


def evaluate_from_config(config: SystemConfig) -> dict:
    """Classification, calibration, and (when fixtures exist) retrieval and
    generation metrics on the validation split; writes the report files."""
    synonyms = None
    if config.paths.synonyms:
        synonyms = load_synonyms(config.resolve(config.paths.synonyms))
    model = load_checkpoint(config.resolve(config.paths.model))
    ds = load_symptom2disease(config.resolve(config.paths.dataset))
    _, val_ds = stratified_split(ds, config.training.train_fraction, config.seed)
    val_set = encode_dataset(val_ds, model.featurizer, synonyms)

    logits, _ = _forward_batch(model, val_set.text, val_set.vitals, None, None)
    probs = softmax(logits)
    predictions = logits.argmax(axis=1)
    report = metrics_mod.classification_report(val_set.labels, predictions,
                                               model.n_classes)
    auc = metrics_mod.roc_auc_per_class(val_set.labels, probs, model.n_classes)

    bundle: dict = {
        "classification": metrics_mod.report_to_dict(report, model.label_set),
        "roc_auc": {model.label_set[c]: v for c, v in auc.items()},
        "val_size": len(val_ds),
    }

    threshold = config.inference.threshold
    calib_path = config.resolve(config.paths.calibration)
    if threshold is None and calib_path and os.path.exists(calib_path):
        with open(calib_path, "r", encoding="utf-8") as fh:
            threshold = float(json.load(fh)["threshold"])
    if threshold is not None:
        results = [classify(model, record, threshold, config.inference.passes,
                            case_seed(config.seed, record.id), synonyms)
                   for record, _ in val_ds.records]
        bundle["flag_rate"] = metrics_mod.flag_rate(results)
        bundle["threshold"] = threshold

    if config.paths.judgments:
        bundle["retrieval"] = _judged_retrieval_metrics(config, model, synonyms)
    else:
        bundle["retrieval"] = None
        bundle["notes"] = bundle.get("notes", []) + [
            "no judged retrieval fixture configured; P@k and MRR omitted"]
    if config.paths.references:
        bundle["generation"] = _reference_generation_metrics(
            config, model, val_ds, synonyms)
    else:
        bundle["generation"] = None

    reports_dir = config.resolve(config.paths.reports_dir)
    os.makedirs(reports_dir, exist_ok=True)
    metrics_mod.write_report_json(bundle, os.path.join(reports_dir, "report.json"))
    with open(os.path.join(reports_dir, "report.txt"), "w", encoding="utf-8") as fh:
        fh.write(metrics_mod.format_report_text(report, model.label_set) + "\n")
    report.confusion.to_csv(os.path.join(reports_dir, "confusion.csv"),
                            labels=model.label_set)
    return bundle


def _judged_retrieval_metrics(config: SystemConfig, model, synonyms) -> dict:
    corpus = retrieval_mod.load_corpus_jsonl(config.resolve(config.paths.corpus))
    embedder = retrieval_mod.make_builtin_embedder(model.featurizer, synonyms)
    index = retrieval_mod.build_index(corpus, embedder,
                                      embed_fields=config.retrieval.embed_fields)
    judgments = []
    with open(config.resolve(config.paths.judgments), "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            query = retrieval_mod.embed_query(obj["query"], embedder)
            result = retrieval_mod.search(index, query, config.retrieval.k,
                                          min_score=-1.0)
            judgments.append(metrics_mod.QueryJudgment(
                retrieved=tuple(h[0] for h in result.hits),
                relevant=frozenset(obj["relevant"])))
    ranked = metrics_mod.RankedJudgments(queries=tuple(judgments))
    return {
        "queries": len(judgments),
        "precision_at_k": metrics_mod.precision_at_k(ranked, config.retrieval.k),
        "mrr": metrics_mod.mean_reciprocal_rank(ranked),
        "k": config.retrieval.k,
    }


def _reference_generation_metrics(config: SystemConfig, model,
                                  val_ds: LabeledDataset, synonyms,
                                  max_cases: int = 48) -> dict:
    with open(config.resolve(config.paths.references), "r", encoding="utf-8") as fh:
        references = json.load(fh)
    corpus = retrieval_mod.load_corpus_jsonl(config.resolve(config.paths.corpus))
    corpus_by_id = {e.id: e for e in corpus}
    embedder = retrieval_mod.make_builtin_embedder(model.featurizer, synonyms)
    index = retrieval_mod.build_index(corpus, embedder,
                                      embed_fields=config.retrieval.embed_fields)
    lexicon = load_drug_lexicon(config.resolve(config.paths.lexicon))
    fallbacks = load_fallback_table(config.resolve(config.paths.fallbacks))
    rules = load_stewardship_rules(config.resolve(config.paths.rules), lexicon)
    ddi_db = load_ddi_database(config.resolve(config.paths.ddi))

    scored = []
    for record, label in val_ds.records:
        reference = references.get(label.name)
        if reference is None or len(scored) >= max_cases:
            continue
        query = retrieval_mod.embed_query(
            retrieval_mod.construct_query(label, record), embedder)
        result = retrieval_mod.search(index, query, config.retrieval.k,
                                      config.retrieval.min_score)
        evidence = tuple((corpus_by_id[h[0]], h[1]) for h in result.hits)
        ctx = PromptContext(symptoms=record.symptom_text, vitals=record.vitals,
                            evidence=evidence, diagnosis=label)
        plan = generate_builtin(ctx, lexicon, fallbacks,
                                config.generation.params())
        violations = check_stewardship(plan, label, rules, lexicon)
        adjusted = adjust_antibiotics(plan, violations, lexicon)
        findings = check_ddi(adjusted, ddi_db)
        adjusted, findings, _ = fix_or_flag(adjusted, findings, ddi_db, lexicon,
                                            config.safety.removal_level,
                                            config.safety.flag_level)
        ddi_risk, as_violation = compute_risk_terms(plan, findings, violations)
        bert = metrics_mod.bertscore_f1(adjusted.text, reference)
        score = scgs(bert, ddi_risk, as_violation, config.safety.scgs_lambda)
        scored.append({"case_id": record.id, "disease": label.name,
                       "bert_f1": bert, "scgs": score.value})
    if not scored:
        return {"cases": 0}
    return {
        "cases": len(scored),
        "mean_bert_f1": float(np.mean([s["bert_f1"] for s in scored])),
        "mean_scgs": float(np.mean([s["scgs"] for s in scored])),
    }
