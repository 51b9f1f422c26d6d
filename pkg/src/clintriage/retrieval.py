"""Dense cosine-similarity retrieval over a dialogue corpus.

Search is exhaustive (flat) by design: corpora at this scale are small enough
that exact scoring is cheap, and exactness lets an independent brute-force
oracle verify every result. A pruning backend could replace the scoring loop
later but must pass the same equivalence suite.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import kernels
from .domain import DiseaseLabel, PatientRecord
from .errors import EmbeddingFileError, ValidationError
from .preprocess import FeaturizerConfig, featurize_record_text

logger = logging.getLogger(__name__)

PROVENANCE_BUILTIN = "builtin-featurizer"
PROVENANCE_EXTERNAL = "external-file"


@dataclass(frozen=True)
class DialogueEntry:
    id: str
    patient_utterance: str
    doctor_response: str
    disease_tag: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.doctor_response or not self.doctor_response.strip():
            raise ValidationError(f"dialogue {self.id!r}: empty doctor response")


@dataclass(frozen=True)
class EmbeddingIndex:
    dimension: int
    ids: tuple[str, ...]
    matrix: np.ndarray  # (n, dimension), unit rows
    provenance: str

    def __len__(self) -> int:
        return len(self.ids)


@dataclass(frozen=True)
class Query:
    text: str
    vector: np.ndarray


@dataclass(frozen=True)
class RetrievalResult:
    hits: tuple[tuple[str, float], ...]
    k_requested: int
    min_score: float

    @property
    def empty(self) -> bool:
        return not self.hits


def construct_query(diagnosis: DiseaseLabel, record: PatientRecord) -> str:
    """Deterministic query template: '<disease> treatment: <symptoms>'."""
    return f"{diagnosis.name} treatment: {record.symptom_text}"


def load_corpus_jsonl(path: str) -> list[DialogueEntry]:
    """Read a JSON Lines corpus with fields id, patient, doctor, disease."""
    entries: list[DialogueEntry] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(
                    f"corpus {path!r} line {line_number}: invalid JSON") from exc
            try:
                entry = DialogueEntry(
                    id=str(obj["id"]),
                    patient_utterance=str(obj.get("patient", "")),
                    doctor_response=str(obj["doctor"]),
                    disease_tag=obj.get("disease"))
            except KeyError as exc:
                raise ValidationError(
                    f"corpus {path!r} line {line_number}: missing field {exc}") from exc
            if entry.id in seen:
                raise ValidationError(
                    f"corpus {path!r} line {line_number}: duplicate id {entry.id!r}")
            seen.add(entry.id)
            entries.append(entry)
    if not entries:
        raise ValidationError(f"corpus {path!r} contains no entries")
    return entries


def make_builtin_embedder(cfg: FeaturizerConfig,
                          synonyms: dict[str, str] | None = None) -> Callable[[str], np.ndarray]:
    """Text embedder backed by the deterministic hashing featurizer."""
    def embed(text: str) -> np.ndarray:
        return featurize_record_text(text, cfg, synonyms).values
    return embed


def build_index(corpus: list[DialogueEntry], embedder: Callable[[str], np.ndarray],
                embed_fields: str = "both",
                provenance: str = PROVENANCE_BUILTIN) -> EmbeddingIndex:
    """Embed each entry (doctor response, optionally followed by the patient
    utterance), L2-normalize, and assemble the index.

    Entries whose embedding is the zero vector are rejected with their ids.
    """
    if not corpus:
        raise ValidationError("cannot build an index from an empty corpus")
    if embed_fields not in ("both", "doctor"):
        raise ValidationError("embed_fields must be 'both' or 'doctor'")
    vectors: list[np.ndarray] = []
    dimension: Optional[int] = None
    zero_ids: list[str] = []
    for entry in corpus:
        text = entry.doctor_response
        if embed_fields == "both" and entry.patient_utterance.strip():
            text = f"{entry.doctor_response} {entry.patient_utterance}"
        vec = np.asarray(embedder(text), dtype=np.float64).ravel()
        if dimension is None:
            dimension = vec.shape[0]
        elif vec.shape[0] != dimension:
            raise ValidationError(
                f"entry {entry.id!r}: embedding dimension {vec.shape[0]} "
                f"differs from {dimension}")
        norm = np.linalg.norm(vec)
        if norm == 0.0:
            zero_ids.append(entry.id)
            vectors.append(vec)
            continue
        vectors.append(vec / norm)
    if zero_ids:
        raise ValidationError(f"entries embedded to the zero vector: {zero_ids}")
    matrix = np.vstack(vectors)
    return EmbeddingIndex(dimension=int(dimension), ids=tuple(e.id for e in corpus),
                          matrix=matrix, provenance=provenance)


def cosine_similarity(u: np.ndarray, v: np.ndarray) -> float:
    """u . v / (||u|| ||v||); both vectors must be nonzero."""
    u = np.asarray(u, dtype=np.float64).ravel()
    v = np.asarray(v, dtype=np.float64).ravel()
    if u.shape != v.shape:
        raise ValidationError(f"vector shapes differ: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ValidationError("cosine similarity undefined for zero-norm input")
    return float(np.dot(u, v) / (nu * nv))


def embed_query(text: str, embedder: Callable[[str], np.ndarray]) -> Query:
    vec = np.asarray(embedder(text), dtype=np.float64).ravel()
    norm = np.linalg.norm(vec)
    if norm == 0.0:
        raise ValidationError(f"query {text!r} embedded to the zero vector")
    return Query(text=text, vector=vec / norm)


def search(index: EmbeddingIndex, query: Query, k: int,
           min_score: float = -1.0) -> RetrievalResult:
    """Exhaustive scoring; descending score, ties broken by ascending id.

    Entries scoring below ``min_score`` are excluded even if fewer than k
    remain.
    """
    if k < 1:
        raise ValidationError("k must be >= 1")
    qv = np.asarray(query.vector, dtype=np.float64).ravel()
    if qv.shape[0] != index.dimension:
        raise ValidationError(
            f"query dimension {qv.shape[0]} does not match index {index.dimension}")
    qnorm = np.linalg.norm(qv)
    if qnorm == 0.0:
        raise ValidationError("query vector has zero norm")
    scores = kernels.dot_scores(index.matrix, qv / qnorm)
    order = sorted(range(len(index.ids)),
                   key=lambda i: (-scores[i], index.ids[i]))
    hits: list[tuple[str, float]] = []
    for i in order:
        if scores[i] < min_score:
            break
        hits.append((index.ids[i], float(scores[i])))
        if len(hits) == k:
            break
    return RetrievalResult(hits=tuple(hits), k_requested=k, min_score=min_score)


# ---------------------------------------------------------------------------
# Embedding file format: text header `dim=<D> count=<N>`, then one row per
# entry: id, whitespace, D decimal floats.
# ---------------------------------------------------------------------------


def save_embeddings(index: EmbeddingIndex, path: str) -> None:
    for entry_id in index.ids:
        if any(ch.isspace() for ch in entry_id):
            raise ValidationError(
                f"id {entry_id!r} contains whitespace; not representable")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"dim={index.dimension} count={len(index.ids)}\n")
        for entry_id, row in zip(index.ids, index.matrix):
            floats = " ".join(f"{x:.9e}" for x in row)
            fh.write(f"{entry_id} {floats}\n")


def load_external_embeddings(path: str) -> EmbeddingIndex:
    """Parse, validate, and L2-normalize an embedding file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise EmbeddingFileError(f"cannot read embedding file {path!r}: {exc}") from exc
    if not lines:
        raise EmbeddingFileError(f"embedding file {path!r} is empty (count zero)")
    header = lines[0].split()
    try:
        if len(header) != 2:
            raise ValueError
        dim = int(header[0].removeprefix("dim="))
        count = int(header[1].removeprefix("count="))
    except ValueError:
        raise EmbeddingFileError(
            f"embedding file {path!r}: malformed header {lines[0]!r}; "
            "expected 'dim=<D> count=<N>'") from None
    if count == 0:
        raise EmbeddingFileError(f"embedding file {path!r} declares count zero")
    if dim < 1:
        raise EmbeddingFileError(f"embedding file {path!r} declares dim < 1")

    ids: list[str] = []
    rows: list[np.ndarray] = []
    seen: set[str] = set()
    for row_number, line in enumerate(lines[1:], start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != dim + 1:
            raise EmbeddingFileError(
                f"embedding file {path!r} row {row_number}: expected id plus "
                f"{dim} floats, got {len(parts) - 1}")
        entry_id = parts[0]
        if entry_id in seen:
            raise EmbeddingFileError(
                f"embedding file {path!r} row {row_number}: duplicate id {entry_id!r}")
        seen.add(entry_id)
        try:
            vec = np.array([float(x) for x in parts[1:]], dtype=np.float64)
        except ValueError:
            raise EmbeddingFileError(
                f"embedding file {path!r} row {row_number}: non-numeric value") from None
        if not np.isfinite(vec).all():
            raise EmbeddingFileError(
                f"embedding file {path!r} row {row_number}: non-finite value")
        norm = np.linalg.norm(vec)
        if norm == 0.0:
            raise EmbeddingFileError(
                f"embedding file {path!r} row {row_number}: zero vector")
        ids.append(entry_id)
        rows.append(vec / norm)
    if len(ids) != count:
        raise EmbeddingFileError(
            f"embedding file {path!r}: header declares {count} rows, found {len(ids)}")
    return EmbeddingIndex(dimension=dim, ids=tuple(ids), matrix=np.vstack(rows),
                          provenance=PROVENANCE_EXTERNAL)
