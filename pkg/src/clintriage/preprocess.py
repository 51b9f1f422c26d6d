"""Text normalization, negation handling, deterministic featurization, and SMOTE.

The featurizer is a signed feature-hashing scheme over token n-grams. It is a
deterministic stand-in for a learned sentence encoder: same text and config
always produce the same vector, on any platform, with no model weights. Real
encoders plug in at the retrieval module's embedding-import boundary instead.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .domain import VITALS_RANGES, Vitals
from .errors import StratificationError, ValidationError

NEGATION_CUES = frozenset({"no", "not", "without", "denies", "never"})
WINDOW_TERMINATORS = frozenset({"but", "and", "however"})
# Words exempt from suffix stripping so negation cues and terminators keep
# their surface form after lemmatization.
_SUFFIX_EXEMPT = NEGATION_CUES | WINDOW_TERMINATORS

_SENTENCE_BOUNDARY = frozenset(".;!?:")


@dataclass(frozen=True)
class TokenSequence:
    """Lowercase tokens with per-token negation marks and boundary flags.

    ``boundary_before[i]`` is True when sentence punctuation separated token i
    from token i-1 in the original text.
    """

    tokens: tuple[str, ...]
    negated_mask: tuple[bool, ...]
    boundary_before: tuple[bool, ...]

    def __post_init__(self) -> None:
        if not (len(self.tokens) == len(self.negated_mask) == len(self.boundary_before)):
            raise ValidationError("token sequence masks must match token count")


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    norm: float
    degenerate: bool = False


@dataclass(frozen=True)
class VitalsVector:
    """Interleaved (scaled value, presence mask) pairs, one per vitals field."""

    values: np.ndarray


@dataclass(frozen=True)
class FeaturizerConfig:
    dimension: int = 1024
    hash_seed: int = 101
    ngram_orders: tuple[int, ...] = (1, 2)
    negation_window: int = 3

    def __post_init__(self) -> None:
        if self.dimension < 64:
            raise ValidationError("featurizer dimension must be >= 64")
        if self.dimension & (self.dimension - 1):
            raise ValidationError("featurizer dimension must be a power of two")
        if self.negation_window < 1:
            raise ValidationError("negation window must be >= 1")
        if not self.ngram_orders or any(n < 1 for n in self.ngram_orders):
            raise ValidationError("ngram orders must be positive")


VITALS_FIELD_ORDER = (*VITALS_RANGES, "sex")
VITALS_VECTOR_DIM = 2 * len(VITALS_FIELD_ORDER)


def _lemmatize(token: str) -> str:
    # Light rule-based stripping: -ing, -ed, plural -es/-s, 3-letter stem minimum.
    if token in _SUFFIX_EXEMPT or token.isdigit():
        return token
    if token.endswith("ing") and len(token) - 3 >= 3:
        return token[:-3]
    if token.endswith("ed") and len(token) - 2 >= 3:
        return token[:-2]
    if token.endswith("es") and len(token) - 2 >= 3:
        return token[:-2]
    if token.endswith("s") and not token.endswith("ss") and len(token) - 1 >= 3:
        return token[:-1]
    return token


def tokenize_and_lemmatize(text: str) -> TokenSequence:
    """Lowercase, drop punctuation, strip common suffixes, record boundaries."""
    if not text or not text.strip():
        raise ValidationError("cannot tokenize empty text")
    tokens: list[str] = []
    boundaries: list[bool] = []
    pending_boundary = False
    current: list[str] = []

    def flush() -> None:
        nonlocal pending_boundary
        if current:
            tokens.append(_lemmatize("".join(current)))
            boundaries.append(pending_boundary)
            pending_boundary = False
            current.clear()

    for ch in text.lower():
        if ch.isalnum():
            current.append(ch)
        else:
            flush()
            if ch in _SENTENCE_BOUNDARY:
                pending_boundary = True
    flush()
    return TokenSequence(tokens=tuple(tokens),
                         negated_mask=(False,) * len(tokens),
                         boundary_before=tuple(boundaries))


def detect_negations(seq: TokenSequence, window: int = 3) -> TokenSequence:
    """Mark tokens inside a negation window following a cue word.

    The window covers up to ``window`` tokens after the cue and closes early
    at a terminator word or a sentence punctuation boundary.
    """
    mask = list(seq.negated_mask)
    n = len(seq.tokens)
    for i, token in enumerate(seq.tokens):
        if token not in NEGATION_CUES:
            continue
        for j in range(i + 1, min(i + 1 + window, n)):
            if seq.boundary_before[j] or seq.tokens[j] in WINDOW_TERMINATORS:
                break
            if seq.tokens[j] not in NEGATION_CUES:
                mask[j] = True
    return TokenSequence(tokens=seq.tokens, negated_mask=tuple(mask),
                         boundary_before=seq.boundary_before)


def load_synonyms(path: str) -> dict[str, str]:
    """Read a tab-separated ``surface<TAB>canonical`` synonym file."""
    mapping: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
                raise ValidationError(
                    f"synonym file {path!r} line {line_number}: "
                    "expected 'surface<TAB>canonical'")
            mapping[parts[0].strip().lower()] = parts[1].strip().lower()
    return mapping


def apply_synonyms(seq: TokenSequence, mapping: dict[str, str]) -> TokenSequence:
    """Replace tokens by their canonical forms; multiword canonicals expand."""
    if not mapping:
        return seq
    tokens: list[str] = []
    mask: list[bool] = []
    boundary: list[bool] = []
    for token, negated, bound in zip(seq.tokens, seq.negated_mask, seq.boundary_before):
        replacement = mapping.get(token)
        if replacement is None:
            tokens.append(token)
            mask.append(negated)
            boundary.append(bound)
        else:
            for k, part in enumerate(replacement.split()):
                tokens.append(_lemmatize(part))
                mask.append(negated)
                boundary.append(bound if k == 0 else False)
    return TokenSequence(tokens=tuple(tokens), negated_mask=tuple(mask),
                         boundary_before=tuple(boundary))


def _hash64(data: str, seed: int) -> int:
    key = seed.to_bytes(8, "little", signed=True)
    digest = hashlib.blake2b(data.encode("utf-8"), digest_size=8, key=key).digest()
    return int.from_bytes(digest, "little")


def featurize_text(seq: TokenSequence, cfg: FeaturizerConfig) -> FeatureVector:
    """Signed hashing of token n-grams into ``cfg.dimension`` buckets.

    Negated tokens are hashed under a ``NEG_`` prefix so an affirmed and a
    negated mention occupy different buckets. Nonzero outputs are
    L2-normalized; total cancellation yields a zero vector flagged degenerate.
    """
    values = np.zeros(cfg.dimension)
    toks = [("NEG_" + t) if neg else t
            for t, neg in zip(seq.tokens, seq.negated_mask)]
    mask = cfg.dimension - 1
    for order in sorted(cfg.ngram_orders):
        for i in range(len(toks) - order + 1):
            h = _hash64(" ".join(toks[i:i + order]), cfg.hash_seed)
            sign = 1.0 if (h >> 32) & 1 else -1.0
            values[h & mask] += sign
    norm = float(np.linalg.norm(values))
    if norm == 0.0:
        return FeatureVector(values=values, norm=0.0, degenerate=True)
    values /= norm
    return FeatureVector(values=values, norm=1.0, degenerate=False)


def featurize_record_text(text: str, cfg: FeaturizerConfig,
                          synonyms: dict[str, str] | None = None) -> FeatureVector:
    """Full text path: tokenize, mark negations, apply synonyms, hash."""
    seq = detect_negations(tokenize_and_lemmatize(text), window=cfg.negation_window)
    if synonyms:
        seq = apply_synonyms(seq, synonyms)
    return featurize_text(seq, cfg)


def encode_vitals(v: Vitals) -> VitalsVector:
    """Min-max scale each field by its physiologic range plus a presence mask.

    Absent fields encode as (0.5, 0); sex maps male -> 0, female -> 1 and
    'unspecified' counts as absent.
    """
    v.validate()
    values = np.empty(VITALS_VECTOR_DIM)
    for k, name in enumerate(VITALS_FIELD_ORDER):
        raw = getattr(v, name)
        if name == "sex":
            if raw is None or raw == "unspecified":
                scaled, present = 0.5, 0.0
            else:
                scaled, present = (0.0 if raw == "male" else 1.0), 1.0
        elif raw is None:
            scaled, present = 0.5, 0.0
        else:
            lo, hi = VITALS_RANGES[name]
            scaled, present = (float(raw) - lo) / (hi - lo), 1.0
        values[2 * k] = scaled
        values[2 * k + 1] = present
    return VitalsVector(values=values)


def smote_oversample(features: np.ndarray, labels: np.ndarray,
                     k_neighbors: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Balance classes by interpolating between same-class nearest neighbors.

    Every class is brought up to the majority count. Each synthetic point is
    ``x + u * (x_nn - x)`` with u uniform in [0, 1] and x_nn one of the k
    nearest same-class neighbors of x by Euclidean distance. Original rows are
    returned verbatim, synthetics appended grouped by ascending class id.
    """
    if k_neighbors < 1:
        raise ValidationError("k_neighbors must be >= 1")
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    if features.ndim != 2 or features.shape[0] != labels.shape[0]:
        raise ValidationError("features and labels shapes do not match")

    classes, counts = np.unique(labels, return_counts=True)
    majority = int(counts.max())
    rng = np.random.default_rng(seed)
    synth_rows: list[np.ndarray] = []
    synth_labels: list[object] = []
    for cls, count in zip(classes, counts):
        deficit = majority - int(count)
        if deficit == 0:
            continue
        if count < 2:
            raise StratificationError(
                f"class {cls!r} has a single member; cannot interpolate")
        members = features[labels == cls]
        dists = kernels.pairwise_sq_dists(members)
        k_eff = min(k_neighbors, int(count) - 1)
        order = np.argsort(dists, axis=1, kind="stable")
        neighbor_table = np.empty((int(count), k_eff), dtype=np.int64)
        for i in range(int(count)):
            row = [j for j in order[i] if j != i]
            neighbor_table[i] = row[:k_eff]
        for _ in range(deficit):
            base = int(rng.integers(int(count)))
            nn = int(neighbor_table[base, int(rng.integers(k_eff))])
            u = rng.random()
            synth_rows.append(members[base] + u * (members[nn] - members[base]))
            synth_labels.append(cls)

    if not synth_rows:
        return features.copy(), labels.copy()
    out_x = np.vstack([features, np.array(synth_rows)])
    out_y = np.concatenate([labels, np.array(synth_labels, dtype=labels.dtype)])
    return out_x, out_y
