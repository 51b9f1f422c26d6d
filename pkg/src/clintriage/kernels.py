"""Hot numeric kernels with numba acceleration and a pure-numpy fallback.

Three inner loops dominate runtime: the repeated stochastic forward passes
used for dropout-based uncertainty estimates, brute-force similarity scoring
over an embedding matrix, and pairwise squared distances for minority-class
oversampling. Each exists in two variants: an explicit-loop version compiled
with ``numba.njit`` and a vectorized numpy version.

Dispatch is decided once at import time. Set ``CLINTRIAGE_NUMBA=0`` in the
environment to force the numpy path (e.g. on platforms where numba is
unavailable or for benchmarking). ``benchmarks/bench_kernels.py`` times both
variants side by side.
"""

from __future__ import annotations

import os

import numpy as np

_flag = os.environ.get("CLINTRIAGE_NUMBA", "1").strip().lower()
NUMBA_REQUESTED = _flag not in ("0", "off", "false", "no")

try:
    from numba import njit as _njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    NUMBA_AVAILABLE = False

NUMBA_ACTIVE = NUMBA_REQUESTED and NUMBA_AVAILABLE


def backend_name() -> str:
    return "numba" if NUMBA_ACTIVE else "numpy"


# ---------------------------------------------------------------------------
# Loop-style sources, compiled with njit when active. They are kept importable
# as plain Python so the benchmark can run them uncompiled if needed.
# ---------------------------------------------------------------------------


def _mcd_forward_loops(text_contrib, vit, w_vit, b_vit, w_trunk_vit, b_trunk,
                       w_head, b_head, vit_masks, trunk_masks):
    n_passes = vit_masks.shape[0]
    h_vit = w_vit.shape[1]
    h_trunk = w_trunk_vit.shape[1]
    n_classes = w_head.shape[1]
    probs = np.empty((n_passes, n_classes))

    # Pre-mask vitals activation is identical across passes.
    av0 = np.dot(vit, w_vit) + b_vit
    for j in range(h_vit):
        if av0[j] < 0.0:
            av0[j] = 0.0

    av = np.empty(h_vit)
    z = np.empty(h_trunk)
    logits = np.empty(n_classes)
    for t in range(n_passes):
        for j in range(h_vit):
            av[j] = av0[j] * vit_masks[t, j]
        zt = np.dot(av, w_trunk_vit)
        for j in range(h_trunk):
            v = zt[j] + text_contrib[j] + b_trunk[j]
            if v < 0.0:
                v = 0.0
            z[j] = v * trunk_masks[t, j]
        lt = np.dot(z, w_head)
        m = -np.inf
        for c in range(n_classes):
            logits[c] = lt[c] + b_head[c]
            if logits[c] > m:
                m = logits[c]
        s = 0.0
        for c in range(n_classes):
            e = np.exp(logits[c] - m)
            probs[t, c] = e
            s += e
        for c in range(n_classes):
            probs[t, c] /= s
    return probs


def _dot_scores_loops(mat, q):
    n = mat.shape[0]
    out = np.empty(n)
    for i in range(n):
        out[i] = np.dot(mat[i], q)
    return out


def _pairwise_sq_dists_loops(x):
    n, d = x.shape
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            s = 0.0
            for k in range(d):
                diff = x[i, k] - x[j, k]
                s += diff * diff
            out[i, j] = s
            out[j, i] = s
    return out


# ---------------------------------------------------------------------------
# Vectorized numpy variants (fallback path).
# ---------------------------------------------------------------------------


def _mcd_forward_numpy(text_contrib, vit, w_vit, b_vit, w_trunk_vit, b_trunk,
                       w_head, b_head, vit_masks, trunk_masks):
    av0 = np.maximum(vit @ w_vit + b_vit, 0.0)
    avm = vit_masks * av0
    z = avm @ w_trunk_vit + (text_contrib + b_trunk)
    atm = np.maximum(z, 0.0) * trunk_masks
    logits = atm @ w_head + b_head
    logits -= logits.max(axis=1, keepdims=True)
    np.exp(logits, out=logits)
    logits /= logits.sum(axis=1, keepdims=True)
    return logits


def _dot_scores_numpy(mat, q):
    return mat @ q


def _pairwise_sq_dists_numpy(x):
    sq = np.einsum("ij,ij->i", x, x)
    out = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.maximum(out, 0.0, out=out)
    np.fill_diagonal(out, 0.0)
    return out


if NUMBA_AVAILABLE:
    _mcd_forward_numba = _njit(cache=True)(_mcd_forward_loops)
    _dot_scores_numba = _njit(cache=True)(_dot_scores_loops)
    _pairwise_sq_dists_numba = _njit(cache=True)(_pairwise_sq_dists_loops)

if NUMBA_ACTIVE:
    _mcd_forward = _mcd_forward_numba
    _dot_scores = _dot_scores_numba
    _pairwise_sq_dists = _pairwise_sq_dists_numba
else:
    _mcd_forward = _mcd_forward_numpy
    _dot_scores = _dot_scores_numpy
    _pairwise_sq_dists = _pairwise_sq_dists_numpy


def _c(a: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.float64)


def mcd_forward_probs(text_contrib, vit, w_vit, b_vit, w_trunk_vit, b_trunk,
                      w_head, b_head, vit_masks, trunk_masks) -> np.ndarray:
    """Run the masked forward passes and return per-pass class probabilities.

    ``text_contrib`` is the (precomputed) text-feature contribution to the
    trunk pre-activation; ``vit_masks``/``trunk_masks`` are the pre-scaled
    inverted-dropout masks, one row per pass. Returns shape (passes, classes).
    """
    return _mcd_forward(_c(text_contrib), _c(vit), _c(w_vit), _c(b_vit),
                        _c(w_trunk_vit), _c(b_trunk), _c(w_head), _c(b_head),
                        _c(vit_masks), _c(trunk_masks))


def dot_scores(mat: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Dot product of every row of ``mat`` against ``q``."""
    return _dot_scores(_c(mat), _c(q))


def pairwise_sq_dists(x: np.ndarray) -> np.ndarray:
    """Symmetric matrix of squared Euclidean distances between rows of ``x``."""
    return _pairwise_sq_dists(_c(x))
