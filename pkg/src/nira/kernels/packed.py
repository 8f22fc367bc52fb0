"""Padded-array network form shared by both kernel backends."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..linearize import ACTIVATION_CODES


@dataclass(frozen=True)
class PackedNet:
    n_layers: int
    rows: np.ndarray          # (L,) int64
    cols: np.ndarray          # (L,) int64
    weights: np.ndarray       # (L, mmax, mmax) float64, zero padded
    bias: np.ndarray          # (L, mmax) float64
    act_code: int
    input_dim: int
    dom_center: np.ndarray    # (input_dim,)
    dom_half: np.ndarray      # (input_dim,)
    value_scale: float
    value_offset: float
    max_width: int
    n_units: int              # symbol capacity for full-tracking propagation


def pack_network(net) -> PackedNet:
    L = net.n_layers
    widths = [net.input_dim] + [layer.rows for layer in net.layers]
    mmax = max(widths)
    W = np.zeros((L, mmax, mmax), dtype=np.float64)
    B = np.zeros((L, mmax), dtype=np.float64)
    rows = np.zeros(L, dtype=np.int64)
    cols = np.zeros(L, dtype=np.int64)
    for l, layer in enumerate(net.layers):
        rows[l] = layer.rows
        cols[l] = layer.cols
        W[l, :layer.rows, :layer.cols] = layer.weights
        B[l, :layer.rows] = layer.bias
    center, half = net.domain_center_half()
    n_units = net.input_dim + sum(layer.rows for layer in net.layers[:-1])
    for arr in (W, B, rows, cols):
        arr.setflags(write=False)
    return PackedNet(
        n_layers=L,
        rows=rows,
        cols=cols,
        weights=W,
        bias=B,
        act_code=ACTIVATION_CODES[net.activation.value],
        input_dim=net.input_dim,
        dom_center=np.ascontiguousarray(center),
        dom_half=np.ascontiguousarray(half),
        value_scale=float(net.value_scale),
        value_offset=float(net.value_offset),
        max_width=mmax,
        n_units=n_units,
    )


def normalize_region(packed: PackedNet, center_w, axes_w):
    """Map a world-space affine region (center + symbol axes) into the
    normalized coordinate frame the layers operate in."""
    center_w = np.asarray(center_w, dtype=np.float64).reshape(-1)
    axes_w = np.asarray(axes_w, dtype=np.float64)
    if axes_w.ndim == 1:
        axes_w = axes_w[:, None]
    center_n = (center_w - packed.dom_center) / packed.dom_half
    axes_n = axes_w / packed.dom_half[:, None]
    return np.ascontiguousarray(center_n), np.ascontiguousarray(axes_n)


def box_axes(lower, upper) -> tuple[np.ndarray, np.ndarray]:
    """Axis-aligned box as (center, axes) with one symbol per axis.

    Degenerate axes keep a zero column: numerically identical to omitting
    the symbol.
    """
    lower = np.asarray(lower, dtype=np.float64).reshape(-1)
    upper = np.asarray(upper, dtype=np.float64).reshape(-1)
    center = 0.5 * (lower + upper)
    half = 0.5 * (upper - lower)
    return center, np.diag(half)


def segment_axes(p0, p1) -> tuple[np.ndarray, np.ndarray]:
    """Line segment as a one-symbol affine region."""
    p0 = np.asarray(p0, dtype=np.float64).reshape(-1)
    p1 = np.asarray(p1, dtype=np.float64).reshape(-1)
    center = 0.5 * (p0 + p1)
    return center, (0.5 * (p1 - p0))[:, None]
