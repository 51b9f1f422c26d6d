"""Classification, retrieval, calibration, and generation metrics."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ValidationError
from .preprocess import FeaturizerConfig, TokenSequence, featurize_text, tokenize_and_lemmatize


@dataclass(frozen=True)
class ConfusionMatrix:
    """C x C counts; rows are true classes, columns predicted classes."""

    counts: np.ndarray

    def __post_init__(self) -> None:
        if self.counts.ndim != 2 or self.counts.shape[0] != self.counts.shape[1]:
            raise ValidationError("confusion matrix must be square")
        if (self.counts < 0).any():
            raise ValidationError("confusion matrix counts must be nonnegative")

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def to_csv(self, path: str, labels: Optional[Sequence[str]] = None) -> None:
        import csv

        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            if labels is not None:
                writer.writerow(["true\\pred", *labels])
            for i, row in enumerate(self.counts):
                prefix = [labels[i]] if labels is not None else []
                writer.writerow(prefix + [int(x) for x in row])


@dataclass(frozen=True)
class ClassificationReport:
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray
    macro_precision: float
    macro_recall: float
    macro_f1: float
    accuracy: float
    confusion: ConfusionMatrix


@dataclass(frozen=True)
class QueryJudgment:
    retrieved: tuple[str, ...]
    relevant: frozenset[str]

    def __post_init__(self) -> None:
        if len(set(self.retrieved)) != len(self.retrieved):
            raise ValidationError("retrieved ids must be unique per query")


@dataclass(frozen=True)
class RankedJudgments:
    queries: tuple[QueryJudgment, ...]


def classification_report(truth: Sequence[int], predictions: Sequence[int],
                          n_classes: int) -> ClassificationReport:
    """One-vs-rest counts per class; zero denominators yield 0; macro averages."""
    truth = np.asarray(truth, dtype=np.int64)
    predictions = np.asarray(predictions, dtype=np.int64)
    if truth.shape != predictions.shape:
        raise ValidationError("truth and prediction lengths differ")
    if truth.size and (truth.min() < 0 or truth.max() >= n_classes
                       or predictions.min() < 0 or predictions.max() >= n_classes):
        raise ValidationError("label index out of range")

    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(counts, (truth, predictions), 1)
    tp = np.diag(counts).astype(np.float64)
    fp = counts.sum(axis=0) - tp
    fn = counts.sum(axis=1) - tp

    with np.errstate(divide="ignore", invalid="ignore"):
        precision = np.where(tp + fp > 0, tp / (tp + fp), 0.0)
        recall = np.where(tp + fn > 0, tp / (tp + fn), 0.0)
        denom = precision + recall
        f1 = np.where(denom > 0, 2.0 * precision * recall / denom, 0.0)
    accuracy = float(tp.sum() / truth.size) if truth.size else 0.0
    return ClassificationReport(
        precision=precision, recall=recall, f1=f1,
        support=counts.sum(axis=1),
        macro_precision=float(precision.mean()),
        macro_recall=float(recall.mean()),
        macro_f1=float(f1.mean()),
        accuracy=accuracy,
        confusion=ConfusionMatrix(counts=counts))


def precision_at_k(judgments: RankedJudgments, k: int) -> float:
    """Mean over queries of |relevant in top-k| / k (k is always the denominator)."""
    if k < 1:
        raise ValidationError("k must be >= 1")
    if not judgments.queries:
        raise ValidationError("no queries to evaluate")
    per_query = [len(set(q.retrieved[:k]) & q.relevant) / k
                 for q in judgments.queries]
    return float(np.mean(per_query))


def mean_reciprocal_rank(judgments: RankedJudgments) -> float:
    """Mean of 1/rank of the first relevant hit; 0 when none is retrieved."""
    if not judgments.queries:
        raise ValidationError("no queries to evaluate")
    total = 0.0
    for q in judgments.queries:
        for rank, retrieved_id in enumerate(q.retrieved, start=1):
            if retrieved_id in q.relevant:
                total += 1.0 / rank
                break
    return total / len(judgments.queries)


def default_token_embedder(dimension: int = 1024,
                           hash_seed: int = 101) -> Callable[[str], np.ndarray]:
    """Per-token hashing embedder: same token -> identical unit vector."""
    cfg = FeaturizerConfig(dimension=dimension, hash_seed=hash_seed,
                           ngram_orders=(1,))

    def embed(token: str) -> np.ndarray:
        seq = TokenSequence(tokens=(token,), negated_mask=(False,),
                            boundary_before=(False,))
        return featurize_text(seq, cfg).values

    return embed


def bertscore_f1(candidate: str, reference: str,
                 token_embedder: Optional[Callable[[str], np.ndarray]] = None) -> float:
    """Greedy token-matching F1 between candidate and reference.

    Precision is the mean over candidate tokens of the best cosine against
    reference tokens, recall is the symmetric quantity, and the two combine
    as 2PR/(P+R).
    """
    if token_embedder is None:
        token_embedder = default_token_embedder()
    cand_tokens = tokenize_and_lemmatize(candidate).tokens if candidate.strip() else ()
    ref_tokens = tokenize_and_lemmatize(reference).tokens if reference.strip() else ()
    if not cand_tokens or not ref_tokens:
        raise ValidationError("both texts must be nonempty after tokenization")

    def embed_all(tokens: tuple[str, ...]) -> np.ndarray:
        rows = []
        for token in tokens:
            vec = np.asarray(token_embedder(token), dtype=np.float64).ravel()
            norm = np.linalg.norm(vec)
            rows.append(vec if norm == 0.0 else vec / norm)
        return np.vstack(rows)

    cand = embed_all(cand_tokens)
    ref = embed_all(ref_tokens)
    sims = cand @ ref.T
    p = float(sims.max(axis=1).mean())
    r = float(sims.max(axis=0).mean())
    if p + r == 0.0:
        return 0.0
    return 2.0 * p * r / (p + r)


def _rank_with_ties(scores: np.ndarray) -> np.ndarray:
    """1-based ranks, ties receiving the average rank of their run."""
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(scores.size, dtype=np.float64)
    i = 0
    while i < scores.size:
        j = i
        while j + 1 < scores.size and scores[order[j + 1]] == scores[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def roc_auc_per_class(truth: Sequence[int], probs: np.ndarray,
                      n_classes: int) -> dict[int, Optional[float]]:
    """One-vs-rest AUC via the rank statistic, ties contributing one half.

    Classes absent from the truth (or covering it entirely) have no defined
    AUC and are reported as None.
    """
    truth = np.asarray(truth, dtype=np.int64)
    probs = np.asarray(probs, dtype=np.float64)
    if probs.shape != (truth.size, n_classes):
        raise ValidationError(
            f"probs shape {probs.shape} does not match ({truth.size}, {n_classes})")
    out: dict[int, Optional[float]] = {}
    for c in range(n_classes):
        positives = truth == c
        n_pos = int(positives.sum())
        n_neg = truth.size - n_pos
        if n_pos == 0 or n_neg == 0:
            out[c] = None
            continue
        ranks = _rank_with_ties(probs[:, c])
        rank_sum = float(ranks[positives].sum())
        u_stat = rank_sum - n_pos * (n_pos + 1) / 2.0
        out[c] = u_stat / (n_pos * n_neg)
    return out


def flag_rate(results: Sequence) -> float:
    """Fraction of diagnosis results carrying the triage flag."""
    if not results:
        raise ValidationError("cannot compute flag rate of an empty list")
    return sum(1 for r in results if r.flagged) / len(results)


# ---------------------------------------------------------------------------
# Report export
# ---------------------------------------------------------------------------


def report_to_dict(report: ClassificationReport,
                   labels: Optional[Sequence[str]] = None) -> dict:
    n = report.precision.shape[0]
    names = list(labels) if labels is not None else [str(i) for i in range(n)]
    return {
        "accuracy": report.accuracy,
        "macro_precision": report.macro_precision,
        "macro_recall": report.macro_recall,
        "macro_f1": report.macro_f1,
        "per_class": [
            {
                "label": names[i],
                "precision": float(report.precision[i]),
                "recall": float(report.recall[i]),
                "f1": float(report.f1[i]),
                "support": int(report.support[i]),
            }
            for i in range(n)
        ],
    }


def write_report_json(report_dict: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report_dict, fh, indent=2, sort_keys=True)
        fh.write("\n")


def format_report_text(report: ClassificationReport,
                       labels: Optional[Sequence[str]] = None) -> str:
    d = report_to_dict(report, labels)
    width = max(len(row["label"]) for row in d["per_class"])
    width = max(width, len("macro avg"))
    lines = [f"{'class'.ljust(width)}  precision  recall     f1         support"]
    for row in d["per_class"]:
        lines.append(f"{row['label'].ljust(width)}  "
                     f"{row['precision']:<9.4f}  {row['recall']:<9.4f}  "
                     f"{row['f1']:<9.4f}  {row['support']}")
    lines.append(f"{'macro avg'.ljust(width)}  {d['macro_precision']:<9.4f}  "
                 f"{d['macro_recall']:<9.4f}  {d['macro_f1']:<9.4f}  "
                 f"{report.confusion.total}")
    lines.append(f"accuracy: {d['accuracy']:.4f}")
    return "\n".join(lines)
