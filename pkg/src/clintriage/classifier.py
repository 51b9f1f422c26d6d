"""Fusion MLP classifier with focal-loss training and dropout-based uncertainty.

Architecture: a small ReLU branch embeds the vitals vector, its output is
concatenated with the hashed text features, and a one-hidden-layer trunk maps
the fused vector to class logits. Dropout follows each hidden layer
(inverted: survivors scaled by 1/(1-rate)).

Training implements decoupled-weight-decay Adam (beta1=0.9, beta2=0.999,
eps=1e-8) with linear warmup then linear decay, per-layer learning-rate
multipliers (head outward to input), and global gradient-norm clipping.
Everything is double precision and deterministic under a seed, including
batch shuffling and dropout masks.

Inference-time uncertainty: repeated stochastic forward passes with dropout
active; the mean of the per-pass softmax outputs is the predictive
distribution and the per-class variance across passes is the uncertainty
estimate. The triage scalar is the variance of the predicted class.
"""

from __future__ import annotations

import csv
import json
import logging
import struct
import zlib
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import kernels
from .domain import DiseaseLabel, LabeledDataset, PatientRecord
from .errors import (CheckpointError, TrainingDivergedError, ValidationError)
from .preprocess import (FeaturizerConfig, VITALS_VECTOR_DIM, encode_vitals,
                         featurize_record_text)

logger = logging.getLogger(__name__)

_EPS = 1e-12
_ADAM_B1 = 0.9
_ADAM_B2 = 0.999
_ADAM_EPS = 1e-8

_CKPT_MAGIC = b"CTRIAGE\x00"
_CKPT_VERSION = 1


@dataclass(frozen=True)
class FusedFeatures:
    """Pre-branch concatenation input: [text features, raw vitals vector]."""

    values: np.ndarray


@dataclass
class ClassifierModel:
    w_vit: np.ndarray    # (vitals_dim, vit_hidden)
    b_vit: np.ndarray    # (vit_hidden,)
    w_trunk: np.ndarray  # (text_dim + vit_hidden, trunk_hidden)
    b_trunk: np.ndarray  # (trunk_hidden,)
    w_head: np.ndarray   # (trunk_hidden, n_classes)
    b_head: np.ndarray   # (n_classes,)
    dropout_rate: float
    label_set: tuple[str, ...]
    featurizer: FeaturizerConfig

    @property
    def vitals_dim(self) -> int:
        return self.w_vit.shape[0]

    @property
    def vit_hidden(self) -> int:
        return self.w_vit.shape[1]

    @property
    def text_dim(self) -> int:
        return self.w_trunk.shape[0] - self.vit_hidden

    @property
    def trunk_hidden(self) -> int:
        return self.w_trunk.shape[1]

    @property
    def n_classes(self) -> int:
        return self.w_head.shape[1]

    # Parameter tensors grouped by layer depth: 0 = head, counting toward input.
    def layers(self) -> tuple[tuple[str, ...], ...]:
        return (("w_head", "b_head"), ("w_trunk", "b_trunk"), ("w_vit", "b_vit"))

    def param_names(self) -> tuple[str, ...]:
        return ("w_vit", "b_vit", "w_trunk", "b_trunk", "w_head", "b_head")

    def copy(self) -> "ClassifierModel":
        return replace(self, **{n: getattr(self, n).copy() for n in self.param_names()})


@dataclass(frozen=True)
class TrainingConfig:
    learning_rate: float = 3e-5
    lr_multiplier: float = 1.0
    epochs: int = 10
    batch_size: int = 16
    warmup_fraction: float = 0.1
    layer_decay: float = 0.95
    clip_norm: float = 1.0
    focal_alpha: float | np.ndarray = 1.0
    focal_gamma: float = 2.0
    weight_decay: float = 0.01
    seed: int = 0

    def __post_init__(self) -> None:
        if self.learning_rate < 0 or self.lr_multiplier <= 0:
            raise ValidationError("learning rate and multiplier must be nonnegative/positive")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValidationError("epochs and batch_size must be >= 1")
        if not 0.0 <= self.warmup_fraction < 1.0:
            raise ValidationError("warmup_fraction must be in [0, 1)")
        if self.focal_gamma < 0:
            raise ValidationError("focal_gamma must be >= 0")
        if self.clip_norm <= 0 or self.layer_decay <= 0:
            raise ValidationError("clip_norm and layer_decay must be positive")

    @property
    def effective_lr(self) -> float:
        return self.learning_rate * self.lr_multiplier


# Learning-rate profiles. The two low-rate profiles preserve the documented
# encoder fine-tuning settings; "desk" scales the base rate up for the
# from-scratch MLP trained here.
TRAINING_PROFILES: dict[str, dict[str, float]] = {
    "paper-train": {"learning_rate": 3e-5, "lr_multiplier": 1.0},
    "paper-eval": {"learning_rate": 2e-5, "lr_multiplier": 1.0},
    "desk": {"learning_rate": 3e-5, "lr_multiplier": 100.0},
}


def training_profile(name: str, **overrides) -> TrainingConfig:
    if name not in TRAINING_PROFILES:
        raise ValidationError(
            f"unknown training profile {name!r}; choose from {sorted(TRAINING_PROFILES)}")
    params = dict(TRAINING_PROFILES[name])
    params.update(overrides)
    return TrainingConfig(**params)


@dataclass(frozen=True)
class MCDResult:
    mean_probs: np.ndarray
    variance: np.ndarray
    uncertainty: float
    passes: int


@dataclass(frozen=True)
class DiagnosisResult:
    label: DiseaseLabel
    mcd: MCDResult
    flagged: bool
    threshold_used: float


@dataclass(frozen=True)
class FeatureSet:
    """Featurized dataset: aligned text features, vitals vectors, and labels."""

    text: np.ndarray    # (n, text_dim)
    vitals: np.ndarray  # (n, vitals_dim)
    labels: np.ndarray  # (n,) int

    def __post_init__(self) -> None:
        if not (self.text.shape[0] == self.vitals.shape[0] == self.labels.shape[0]):
            raise ValidationError("feature set arrays must share the first dimension")

    def __len__(self) -> int:
        return self.labels.shape[0]


def encode_dataset(ds: LabeledDataset, cfg: FeaturizerConfig,
                   synonyms: dict[str, str] | None = None) -> FeatureSet:
    """Featurize every record; degenerate texts become zero vectors."""
    n = len(ds)
    text = np.zeros((n, cfg.dimension))
    vitals = np.zeros((n, VITALS_VECTOR_DIM))
    labels = np.zeros(n, dtype=np.int64)
    degenerate = 0
    for i, (record, label) in enumerate(ds.records):
        fv = featurize_record_text(record.symptom_text, cfg, synonyms)
        if fv.degenerate:
            degenerate += 1
        text[i] = fv.values
        vitals[i] = encode_vitals(record.vitals).values
        labels[i] = label.index
    if degenerate:
        logger.warning("%d of %d records produced degenerate feature vectors",
                       degenerate, n)
    return FeatureSet(text=text, vitals=vitals, labels=labels)


def init_model(label_set: tuple[str, ...], featurizer: FeaturizerConfig,
               vitals_dim: int = VITALS_VECTOR_DIM, vit_hidden: int = 32,
               trunk_hidden: int = 256, dropout_rate: float = 0.1,
               seed: int = 0) -> ClassifierModel:
    """Create a model with Kaiming-style uniform fan-in init and zero biases."""
    if not 0.0 <= dropout_rate < 1.0:
        raise ValidationError("dropout_rate must be in [0, 1)")
    if len(label_set) < 2:
        raise ValidationError("need at least two classes")
    rng = np.random.default_rng(seed)

    def kaiming(fan_in: int, fan_out: int) -> np.ndarray:
        bound = np.sqrt(6.0 / fan_in)
        return rng.uniform(-bound, bound, size=(fan_in, fan_out))

    text_dim = featurizer.dimension
    return ClassifierModel(
        w_vit=kaiming(vitals_dim, vit_hidden),
        b_vit=np.zeros(vit_hidden),
        w_trunk=kaiming(text_dim + vit_hidden, trunk_hidden),
        b_trunk=np.zeros(trunk_hidden),
        w_head=kaiming(trunk_hidden, len(label_set)),
        b_head=np.zeros(len(label_set)),
        dropout_rate=dropout_rate,
        label_set=tuple(label_set),
        featurizer=featurizer,
    )


def _as_values(x) -> np.ndarray:
    return np.asarray(getattr(x, "values", x), dtype=np.float64)


def draw_dropout_masks(rng: np.random.Generator, rate: float,
                       shape_vit: tuple, shape_trunk: tuple) -> tuple[np.ndarray, np.ndarray]:
    """Pre-scaled inverted-dropout masks; vitals mask is drawn first."""
    if rate == 0.0:
        return np.ones(shape_vit), np.ones(shape_trunk)
    keep = 1.0 - rate
    mask_v = (rng.random(shape_vit) >= rate) / keep
    mask_t = (rng.random(shape_trunk) >= rate) / keep
    return mask_v, mask_t


def _forward_batch(model: ClassifierModel, x_text: np.ndarray, x_vit: np.ndarray,
                   mask_v: Optional[np.ndarray], mask_t: Optional[np.ndarray]):
    """Batched forward pass; returns logits plus the cache used for backprop."""
    pre_v = x_vit @ model.w_vit + model.b_vit
    a_v = np.maximum(pre_v, 0.0)
    a_vm = a_v if mask_v is None else a_v * mask_v
    fused = np.concatenate([x_text, a_vm], axis=1)
    pre_t = fused @ model.w_trunk + model.b_trunk
    a_t = np.maximum(pre_t, 0.0)
    a_tm = a_t if mask_t is None else a_t * mask_t
    logits = a_tm @ model.w_head + model.b_head
    cache = (x_vit, pre_v, a_vm, fused, pre_t, a_tm, mask_v, mask_t)
    return logits, cache


def forward(model: ClassifierModel, text, vitals, dropout_active: bool = False,
            rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Single-sample forward pass returning raw logits.

    With dropout active each hidden unit is zeroed independently with
    probability ``dropout_rate`` and survivors are scaled by 1/(1-rate);
    inactive dropout makes the pass deterministic.
    """
    x_text = _as_values(text).reshape(1, -1)
    x_vit = _as_values(vitals).reshape(1, -1)
    if x_text.shape[1] != model.text_dim or x_vit.shape[1] != model.vitals_dim:
        raise ValidationError(
            f"input dims ({x_text.shape[1]}, {x_vit.shape[1]}) do not match model "
            f"({model.text_dim}, {model.vitals_dim})")
    mask_v = mask_t = None
    if dropout_active and model.dropout_rate > 0.0:
        if rng is None:
            raise ValidationError("dropout_active requires a seeded rng")
        mask_v, mask_t = draw_dropout_masks(
            rng, model.dropout_rate, (1, model.vit_hidden), (1, model.trunk_hidden))
    logits, _ = _forward_batch(model, x_text, x_vit, mask_v, mask_t)
    return logits[0]


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _alpha_for(alpha, targets: np.ndarray, n_classes: int) -> np.ndarray:
    arr = np.asarray(alpha, dtype=np.float64)
    if arr.ndim == 0:
        return np.full(targets.shape, float(arr))
    if arr.shape != (n_classes,):
        raise ValidationError(
            f"focal alpha must be scalar or length-{n_classes}, got {arr.shape}")
    return arr[targets]


def focal_loss(probs: np.ndarray, target: int, alpha=1.0, gamma: float = 2.0) -> float:
    """Focal loss -alpha_t * (1 - p_t)^gamma * log(p_t) for one distribution."""
    probs = np.asarray(probs, dtype=np.float64)
    if not 0 <= target < probs.shape[-1]:
        raise ValidationError(f"target index {target} out of range")
    if gamma < 0:
        raise ValidationError("gamma must be >= 0")
    a = float(_alpha_for(alpha, np.array([target]), probs.shape[-1])[0])
    p_t = float(np.clip(probs[target], _EPS, 1.0 - _EPS))
    return -a * (1.0 - p_t) ** gamma * np.log(p_t)


def _focal_batch(probs: np.ndarray, targets: np.ndarray, alpha, gamma: float):
    """Per-sample losses and dL/dp_t for a batch of softmax outputs."""
    n = probs.shape[0]
    a = _alpha_for(alpha, targets, probs.shape[1])
    p_t = np.clip(probs[np.arange(n), targets], _EPS, 1.0 - _EPS)
    one_minus = 1.0 - p_t
    log_p = np.log(p_t)
    losses = -a * one_minus ** gamma * log_p
    if gamma == 0.0:
        dl_dpt = -a / p_t
    else:
        dl_dpt = a * (gamma * one_minus ** (gamma - 1.0) * log_p
                      - one_minus ** gamma / p_t)
    return losses, dl_dpt


def loss_and_gradients(model: ClassifierModel, x_text: np.ndarray, x_vit: np.ndarray,
                       targets: np.ndarray, alpha=1.0, gamma: float = 2.0,
                       mask_v: Optional[np.ndarray] = None,
                       mask_t: Optional[np.ndarray] = None):
    """Mean focal loss over the batch and analytic gradients per tensor."""
    targets = np.asarray(targets, dtype=np.int64)
    logits, cache = _forward_batch(model, x_text, x_vit, mask_v, mask_t)
    x_vit_c, pre_v, a_vm, fused, pre_t, a_tm, mv, mt = cache
    probs = softmax(logits)
    losses, dl_dpt = _focal_batch(probs, targets, alpha, gamma)
    n = probs.shape[0]

    # dL/dz_j = dL/dp_t * p_t * (1[j == t] - p_j), averaged over the batch
    p_t = probs[np.arange(n), targets]
    d_logits = -probs * (dl_dpt * p_t)[:, None]
    d_logits[np.arange(n), targets] += dl_dpt * p_t
    d_logits /= n

    grads: dict[str, np.ndarray] = {}
    grads["w_head"] = a_tm.T @ d_logits
    grads["b_head"] = d_logits.sum(axis=0)
    d_atm = d_logits @ model.w_head.T
    d_pret = d_atm if mt is None else d_atm * mt
    d_pret = d_pret * (pre_t > 0.0)
    grads["w_trunk"] = fused.T @ d_pret
    grads["b_trunk"] = d_pret.sum(axis=0)
    d_fused = d_pret @ model.w_trunk.T
    d_avm = d_fused[:, model.text_dim:]
    d_prev = d_avm if mv is None else d_avm * mv
    d_prev = d_prev * (pre_v > 0.0)
    grads["w_vit"] = x_vit_c.T @ d_prev
    grads["b_vit"] = d_prev.sum(axis=0)
    return float(losses.mean()), grads


def _lr_at(step: int, total: int, warmup_steps: int, peak: float) -> float:
    if step <= warmup_steps:
        return peak * step / max(1, warmup_steps)
    return peak * (total - step) / max(1, total - warmup_steps)


def evaluate_split(model: ClassifierModel, data: FeatureSet, alpha, gamma: float):
    """Deterministic (dropout-off) mean loss and accuracy over a feature set."""
    logits, _ = _forward_batch(model, data.text, data.vitals, None, None)
    probs = softmax(logits)
    losses, _ = _focal_batch(probs, data.labels, alpha, gamma)
    acc = float((logits.argmax(axis=1) == data.labels).mean())
    return float(losses.mean()), acc


def train(model: ClassifierModel, train_set: FeatureSet,
          val_set: Optional[FeatureSet], cfg: TrainingConfig,
          grad_norm_log: Optional[list] = None):
    """Train in place on a copy of the model; returns (model, history).

    History holds one dict per epoch with train_loss, val_loss, train_acc and
    val_acc. ``grad_norm_log``, when given, collects the post-clip global
    gradient norm of every step.
    """
    if len(train_set) == 0:
        raise ValidationError("empty training set")
    model = model.copy()
    rng = np.random.default_rng(cfg.seed)
    n = len(train_set)
    steps_per_epoch = (n + cfg.batch_size - 1) // cfg.batch_size
    total_steps = steps_per_epoch * cfg.epochs
    warmup_steps = int(round(cfg.warmup_fraction * total_steps))
    peak = cfg.effective_lr

    names = model.param_names()
    m_state = {k: np.zeros_like(getattr(model, k)) for k in names}
    v_state = {k: np.zeros_like(getattr(model, k)) for k in names}
    layer_mult = {}
    for depth, group in enumerate(model.layers()):
        for name in group:
            layer_mult[name] = cfg.layer_decay ** depth

    history: list[dict] = []
    step = 0
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        epoch_loss_sum = 0.0
        for start in range(0, n, cfg.batch_size):
            step += 1
            idx = order[start:start + cfg.batch_size]
            xb_text = train_set.text[idx]
            xb_vit = train_set.vitals[idx]
            yb = train_set.labels[idx]
            mask_v = mask_t = None
            if model.dropout_rate > 0.0:
                mask_v, mask_t = draw_dropout_masks(
                    rng, model.dropout_rate,
                    (len(idx), model.vit_hidden), (len(idx), model.trunk_hidden))
            loss, grads = loss_and_gradients(
                model, xb_text, xb_vit, yb, cfg.focal_alpha, cfg.focal_gamma,
                mask_v, mask_t)
            if not np.isfinite(loss):
                raise TrainingDivergedError(f"non-finite loss at step {step}")
            epoch_loss_sum += loss * len(idx)

            global_norm = np.sqrt(sum(float((g * g).sum()) for g in grads.values()))
            if global_norm > cfg.clip_norm:
                scale = cfg.clip_norm / global_norm
                for g in grads.values():
                    g *= scale
                global_norm = cfg.clip_norm
            if grad_norm_log is not None:
                grad_norm_log.append(global_norm)

            lr = _lr_at(step, total_steps, warmup_steps, peak)
            bias1 = 1.0 - _ADAM_B1 ** step
            bias2 = 1.0 - _ADAM_B2 ** step
            for name in names:
                g = grads[name]
                theta = getattr(model, name)
                m_state[name] = _ADAM_B1 * m_state[name] + (1.0 - _ADAM_B1) * g
                v_state[name] = _ADAM_B2 * v_state[name] + (1.0 - _ADAM_B2) * g * g
                m_hat = m_state[name] / bias1
                v_hat = v_state[name] / bias2
                theta -= (lr * layer_mult[name]) * (
                    m_hat / (np.sqrt(v_hat) + _ADAM_EPS) + cfg.weight_decay * theta)

        train_loss, train_acc = evaluate_split(
            model, train_set, cfg.focal_alpha, cfg.focal_gamma)
        if val_set is not None and len(val_set):
            val_loss, val_acc = evaluate_split(
                model, val_set, cfg.focal_alpha, cfg.focal_gamma)
        else:
            val_loss, val_acc = float("nan"), float("nan")
        history.append({
            "epoch": epoch,
            "train_loss": train_loss,
            "val_loss": val_loss,
            "train_acc": train_acc,
            "val_acc": val_acc,
            "running_train_loss": epoch_loss_sum / n,
        })
        logger.info("epoch %d: train_loss=%.5f val_loss=%.5f train_acc=%.4f val_acc=%.4f",
                    epoch, train_loss, val_loss, train_acc, val_acc)
    return model, history


def save_history_csv(history: list[dict], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["epoch", "train_loss", "val_loss", "train_acc", "val_acc"])
        for row in history:
            writer.writerow([row["epoch"], row["train_loss"], row["val_loss"],
                             row["train_acc"], row["val_acc"]])


def mc_dropout_predict(model: ClassifierModel, text, vitals, T: int,
                       seed: int) -> MCDResult:
    """Stochastic forward passes with dropout active; mean, variance, triage scalar.

    Per-class variance is computed as E[f^2] - (E[f])^2 over the passes and
    clamped at zero. With dropout rate 0 every pass is identical, so the
    result is computed from a single deterministic pass with exact zero
    variance.
    """
    if T < 1:
        raise ValidationError("number of passes T must be >= 1")
    x_text = _as_values(text)
    x_vit = _as_values(vitals)
    if x_text.shape[-1] != model.text_dim or x_vit.shape[-1] != model.vitals_dim:
        raise ValidationError("input dimensions do not match model")

    if model.dropout_rate == 0.0:
        logits = forward(model, x_text, x_vit, dropout_active=False)
        mean = softmax(logits)
        variance = np.zeros_like(mean)
        return MCDResult(mean_probs=mean, variance=variance,
                         uncertainty=0.0, passes=T)

    rng = np.random.default_rng(seed)
    mask_v, mask_t = draw_dropout_masks(
        rng, model.dropout_rate, (T, model.vit_hidden), (T, model.trunk_hidden))
    text_contrib = x_text @ model.w_trunk[:model.text_dim]
    probs = kernels.mcd_forward_probs(
        text_contrib, x_vit, model.w_vit, model.b_vit,
        model.w_trunk[model.text_dim:], model.b_trunk,
        model.w_head, model.b_head, mask_v, mask_t)
    mean = probs.mean(axis=0)
    variance = np.maximum((probs * probs).mean(axis=0) - mean * mean, 0.0)
    predicted = int(mean.argmax())
    return MCDResult(mean_probs=mean, variance=variance,
                     uncertainty=float(variance[predicted]), passes=T)


def case_seed(base_seed: int, case_id: str) -> int:
    """Stable per-case RNG seed derived from the base seed and the case id."""
    return zlib.crc32(f"{base_seed}:{case_id}".encode("utf-8")) & 0x7FFFFFFF


def uncertainty_scores(model: ClassifierModel, val_set: LabeledDataset, T: int,
                       seed: int, synonyms: dict[str, str] | None = None) -> np.ndarray:
    """Triage uncertainty for every record, with per-record derived seeds."""
    scores = np.empty(len(val_set))
    for i, (record, _) in enumerate(val_set.records):
        fv = featurize_record_text(record.symptom_text, model.featurizer, synonyms)
        vv = encode_vitals(record.vitals)
        mcd = mc_dropout_predict(model, fv, vv, T, case_seed(seed, record.id))
        scores[i] = mcd.uncertainty
    return scores


def calibrate_threshold(model: ClassifierModel, val_set: LabeledDataset,
                        target_flag_rate: float, T: int, seed: int,
                        synonyms: dict[str, str] | None = None) -> float:
    """Empirical (1 - target) quantile of validation uncertainty scores.

    Linear interpolation between order statistics; flagging uses a strict
    ``score > threshold`` comparison downstream.
    """
    if len(val_set) == 0:
        raise ValidationError("validation set is empty")
    if not 0.0 < target_flag_rate < 1.0:
        raise ValidationError("target_flag_rate must be in (0, 1)")
    scores = uncertainty_scores(model, val_set, T, seed, synonyms)
    return float(np.quantile(scores, 1.0 - target_flag_rate, method="linear"))


def classify(model: ClassifierModel, record: PatientRecord, threshold: float,
             T: int, seed: int, synonyms: dict[str, str] | None = None) -> DiagnosisResult:
    """Preprocess a record, run the uncertainty estimate, apply the triage rule.

    Flagging is strict: a case is flagged only when uncertainty exceeds the
    threshold. Argmax ties resolve to the lowest class index.
    """
    fv = featurize_record_text(record.symptom_text, model.featurizer, synonyms)
    vv = encode_vitals(record.vitals)
    mcd = mc_dropout_predict(model, fv, vv, T, seed)
    predicted = int(mcd.mean_probs.argmax())
    return DiagnosisResult(
        label=DiseaseLabel(index=predicted, name=model.label_set[predicted]),
        mcd=mcd,
        flagged=bool(mcd.uncertainty > threshold),
        threshold_used=float(threshold),
    )


# ---------------------------------------------------------------------------
# Checkpoint format: magic, version, JSON header, little-endian float64
# payload, trailing CRC-32 of everything before it.
# ---------------------------------------------------------------------------


def save_checkpoint(model: ClassifierModel, path: str) -> None:
    header = {
        "format_version": _CKPT_VERSION,
        "text_dim": model.text_dim,
        "vitals_dim": model.vitals_dim,
        "vit_hidden": model.vit_hidden,
        "trunk_hidden": model.trunk_hidden,
        "n_classes": model.n_classes,
        "dropout_rate": model.dropout_rate,
        "label_set": list(model.label_set),
        "featurizer": {
            "dimension": model.featurizer.dimension,
            "hash_seed": model.featurizer.hash_seed,
            "ngram_orders": list(model.featurizer.ngram_orders),
            "negation_window": model.featurizer.negation_window,
        },
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    payload = b"".join(
        np.ascontiguousarray(getattr(model, name), dtype="<f8").tobytes()
        for name in model.param_names())
    body = (_CKPT_MAGIC + struct.pack("<I", _CKPT_VERSION)
            + struct.pack("<I", len(header_bytes)) + header_bytes + payload)
    crc = zlib.crc32(body) & 0xFFFFFFFF
    with open(path, "wb") as fh:
        fh.write(body + struct.pack("<I", crc))


def load_checkpoint(path: str) -> ClassifierModel:
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path!r}: {exc}") from exc
    if len(blob) < len(_CKPT_MAGIC) + 12 or not blob.startswith(_CKPT_MAGIC):
        raise CheckpointError(f"{path!r} is not a model checkpoint (bad magic)")
    body, crc_bytes = blob[:-4], blob[-4:]
    if zlib.crc32(body) & 0xFFFFFFFF != struct.unpack("<I", crc_bytes)[0]:
        raise CheckpointError(f"checkpoint {path!r} failed CRC-32 verification")
    off = len(_CKPT_MAGIC)
    version, = struct.unpack_from("<I", body, off)
    if version != _CKPT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    off += 4
    hlen, = struct.unpack_from("<I", body, off)
    off += 4
    try:
        header = json.loads(body[off:off + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"checkpoint {path!r} header is corrupt") from exc
    off += hlen

    fz = header["featurizer"]
    featurizer = FeaturizerConfig(
        dimension=fz["dimension"], hash_seed=fz["hash_seed"],
        ngram_orders=tuple(fz["ngram_orders"]),
        negation_window=fz["negation_window"])
    shapes = {
        "w_vit": (header["vitals_dim"], header["vit_hidden"]),
        "b_vit": (header["vit_hidden"],),
        "w_trunk": (header["text_dim"] + header["vit_hidden"], header["trunk_hidden"]),
        "b_trunk": (header["trunk_hidden"],),
        "w_head": (header["trunk_hidden"], header["n_classes"]),
        "b_head": (header["n_classes"],),
    }
    tensors: dict[str, np.ndarray] = {}
    for name in ("w_vit", "b_vit", "w_trunk", "b_trunk", "w_head", "b_head"):
        shape = shapes[name]
        count = int(np.prod(shape))
        raw = body[off:off + 8 * count]
        if len(raw) != 8 * count:
            raise CheckpointError(f"checkpoint {path!r} payload truncated at {name}")
        tensors[name] = np.frombuffer(raw, dtype="<f8").reshape(shape).astype(np.float64)
        off += 8 * count
    if off != len(body):
        raise CheckpointError(f"checkpoint {path!r} has trailing bytes")
    return ClassifierModel(dropout_rate=header["dropout_rate"],
                           label_set=tuple(header["label_set"]),
                           featurizer=featurizer, **tensors)
