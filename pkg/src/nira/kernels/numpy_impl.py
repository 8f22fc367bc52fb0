"""Pure-numpy propagation kernels (fallback backend).

Per-neuron linearizations reuse the same scalar code as the numba backend;
only the linear-algebra steps are vectorized. Batch evaluation pads every
chunk to a fixed row count so BLAS always takes the same kernel path and a
point's value does not depend on which batch it arrived in.
"""

from __future__ import annotations

import numpy as np

from ..linearize import lsq_line, minimax_line, ACT_SINE, ACT_RELU
from .packed import PackedNet

VARIANT_FULL = 0
VARIANT_FIXED = 1
VARIANT_TRUNCATE = 2
VARIANT_APPEND = 3

# Fixed gemm height: small batches of different sizes may take different BLAS
# micro-kernels with ulp-different results, so every evaluation is padded to
# this many rows.
_PAD_ROWS = 1024


def _act_array(code: int, x: np.ndarray) -> np.ndarray:
    if code == ACT_SINE:
        return np.sin(x)
    if code == ACT_RELU:
        return np.maximum(x, 0.0)
    return np.where(x > 0.0, x, np.expm1(np.minimum(x, 0.0)))


def forward_chunk(packed: PackedNet, pts: np.ndarray) -> np.ndarray:
    n = pts.shape[0]
    x = np.zeros((_PAD_ROWS, pts.shape[1]))
    done = 0
    out = np.empty(n)
    while done < n:
        take = min(n - done, _PAD_ROWS)
        x[:take] = (pts[done:done + take] - packed.dom_center) / packed.dom_half
        x[take:] = 0.0
        h = x
        for l in range(packed.n_layers):
            r, c = packed.rows[l], packed.cols[l]
            h = h[:, :c] @ packed.weights[l, :r, :c].T + packed.bias[l, :r]
            if l < packed.n_layers - 1:
                h = _act_array(packed.act_code, h)
        out[done:done + take] = h[:take, 0]
        done += take
    return packed.value_scale * out + packed.value_offset


def _fold_smallest(col: np.ndarray, keep: int, pair: bool) -> float:
    """Zero out smallest-|coefficient| entries of one form's coefficient
    column until at most ``keep`` remain; returns the folded mass.
    Ties break toward the lowest symbol id (stable sort order)."""
    nz = np.flatnonzero(col)
    if nz.size <= keep:
        return 0.0
    order = nz[np.argsort(np.abs(col[nz]), kind="stable")]
    folded = 0.0
    excess = nz.size - keep
    if pair and excess % 2 == 1:
        excess += 1  # merges remove two entries at a time
    drop = order[:min(excess, order.size)]
    folded = float(np.abs(col[drop]).sum())
    col[drop] = 0.0
    return folded


def ra_propagate(packed: PackedNet, center_n: np.ndarray, axes_n: np.ndarray,
                 variant: int, limit: int):
    """Affine-arithmetic pass; returns (center, sum_abs, sum_sq, err) of the
    output form in normalized output units."""
    cen = center_n.copy()
    CO = np.ascontiguousarray(axes_n.T)  # (symbols, forms)
    err = np.zeros(center_n.shape[0])
    act = packed.act_code
    for l in range(packed.n_layers):
        r, c = packed.rows[l], packed.cols[l]
        W = packed.weights[l, :r, :c]
        cen = W @ cen + packed.bias[l, :r]
        CO = CO @ W.T
        err = np.abs(W) @ err
        if l == packed.n_layers - 1:
            break
        radius = np.abs(CO).sum(axis=0) + err
        alpha = np.empty(r)
        beta = np.empty(r)
        gamma = np.empty(r)
        for i in range(r):
            alpha[i], beta[i], gamma[i] = minimax_line(
                act, cen[i] - radius[i], cen[i] + radius[i])
        cen = alpha * cen + beta
        CO *= alpha
        err = np.abs(alpha) * err
        if variant == VARIANT_FIXED:
            err += gamma
        else:
            fresh_idx = np.flatnonzero(gamma > 0.0)
            fresh = np.zeros((fresh_idx.size, r))
            fresh[np.arange(fresh_idx.size), fresh_idx] = gamma[fresh_idx]
            CO = np.vstack([CO, fresh])
            if variant == VARIANT_TRUNCATE:
                for i in range(r):
                    err[i] += _fold_smallest(CO[:, i], limit, pair=False)
            elif variant == VARIANT_APPEND:
                for i in range(r):
                    err[i] += _fold_smallest(CO[:, i], limit, pair=True)
    out = CO[:, 0]
    return (float(cen[0]), float(np.abs(out).sum()), float(out @ out),
            float(err[0]))


def up_propagate(packed: PackedNet, center_n: np.ndarray, cov_n: np.ndarray,
                 include_error_terms: bool = True):
    """Moment pass equivalent to tracking the full probabilistic form:
    means propagate through the layers, second moments as W Cov W^T, each
    activation contributes an independent residual variance on the diagonal.
    Returns (mean, variance) of the output in normalized units."""
    mean = center_n.copy()
    cov = cov_n.copy()
    act = packed.act_code
    for l in range(packed.n_layers):
        r, c = packed.rows[l], packed.cols[l]
        W = packed.weights[l, :r, :c]
        mean = W @ mean + packed.bias[l, :r]
        cov = W @ cov @ W.T
        if l == packed.n_layers - 1:
            break
        alpha = np.empty(r)
        beta = np.empty(r)
        gamma_sq = np.empty(r)
        for i in range(r):
            sigma = float(np.sqrt(max(cov[i, i], 0.0)))
            alpha[i], beta[i], gamma_sq[i] = lsq_line(act, mean[i], sigma)
        mean = alpha * mean + beta
        cov = cov * np.outer(alpha, alpha)
        if include_error_terms:
            cov[np.diag_indices(r)] += gamma_sq
    return float(mean[0]), float(max(cov[0, 0], 0.0))
