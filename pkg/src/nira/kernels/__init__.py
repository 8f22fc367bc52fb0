"""Kernel dispatch: numba by default, pure numpy as fallback.

The backend is chosen by the ``NIRA_BACKEND`` environment variable
(``numba`` or ``numpy``). Without the variable, numba is used when it
imports cleanly. Within one backend all results are deterministic across
runs and thread counts; across backends they agree to floating-point
reassociation tolerance (covered by the equivalence tests and the
``scripts/bench_backends.py`` comparison).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .._jit import HAVE_NUMBA
from ..errors import ContractViolationError
from . import numpy_impl
from .packed import PackedNet, box_axes, normalize_region, segment_axes

VARIANT_CODES = {
    "full": numpy_impl.VARIANT_FULL,
    "fixed": numpy_impl.VARIANT_FIXED,
    "truncate": numpy_impl.VARIANT_TRUNCATE,
    "append": numpy_impl.VARIANT_APPEND,
}

_FORWARD_CHUNK = 65536


def active_backend() -> str:
    name = os.environ.get("NIRA_BACKEND", "").strip().lower()
    if name in ("numba", "numpy"):
        if name == "numba" and not HAVE_NUMBA:
            raise ContractViolationError(
                "NIRA_BACKEND=numba requested but numba is not importable")
        return name
    return "numba" if HAVE_NUMBA else "numpy"


def _numba():
    from . import numba_impl

    return numba_impl


def batch_forward(packed: PackedNet, pts: np.ndarray, threads: int = 1) -> np.ndarray:
    """Evaluate the network on an (N, dim) batch, data units.

    Work is split into fixed-size chunks regardless of ``threads`` so the
    result bytes never depend on the degree of parallelism.
    """
    n = pts.shape[0]
    out = np.empty(n)
    if n == 0:
        return out
    backend = active_backend()
    if backend == "numba":
        impl = _numba()

        def run(start, stop):
            impl.forward_kernel(
                packed.n_layers, packed.rows, packed.cols, packed.weights,
                packed.bias, packed.act_code, packed.dom_center,
                packed.dom_half, packed.value_scale, packed.value_offset,
                pts[start:stop], out[start:stop])
    else:

        def run(start, stop):
            out[start:stop] = numpy_impl.forward_chunk(packed, pts[start:stop])

    spans = [(s, min(s + _FORWARD_CHUNK, n)) for s in range(0, n, _FORWARD_CHUNK)]
    if threads > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda sp: run(*sp), spans))
    else:
        for sp in spans:
            run(*sp)
    return out


def ra_output(packed: PackedNet, center_w, axes_w, variant: str,
              limit: int = 0):
    """Affine range analysis over a world-space region.

    Returns ``(center, sum_abs, sum_sq, err_accum)`` of the output affine
    form in data units (coefficient aggregates keep their meaning under the
    affine output rescale).
    """
    code = VARIANT_CODES[variant]
    if code in (numpy_impl.VARIANT_TRUNCATE, numpy_impl.VARIANT_APPEND):
        if limit < packed.input_dim:
            raise ContractViolationError(
                f"variant limit {limit} must be >= input dimension "
                f"{packed.input_dim}")
    center_n, axes_n = normalize_region(packed, center_w, axes_w)
    if active_backend() == "numba":
        impl = _numba()
        c, sum_abs, sum_sq, err = impl.ra_kernel(
            packed.n_layers, packed.rows, packed.cols, packed.weights,
            packed.bias, packed.act_code, center_n, axes_n, code, limit,
            packed.n_units)
    else:
        c, sum_abs, sum_sq, err = numpy_impl.ra_propagate(
            packed, center_n, axes_n, code, limit)
    s = packed.value_scale
    a = abs(s)
    return (s * c + packed.value_offset, a * sum_abs, s * s * sum_sq, a * err)


def up_output(packed: PackedNet, center_w, axes_w,
              include_error_terms: bool = True):
    """Uncertainty propagation over a world-space region whose symbols are
    uniform unit-variance sources; returns (mean, sigma) in data units."""
    center_n, axes_n = normalize_region(packed, center_w, axes_w)
    cov_n = (axes_n @ axes_n.T) / 3.0
    if active_backend() == "numba":
        impl = _numba()
        mean, var = impl.up_kernel(
            packed.n_layers, packed.rows, packed.cols, packed.weights,
            packed.bias, packed.act_code, center_n, cov_n,
            include_error_terms)
    else:
        mean, var = numpy_impl.up_propagate(packed, center_n, cov_n,
                                            include_error_terms)
    s = packed.value_scale
    return s * mean + packed.value_offset, abs(s) * float(np.sqrt(max(var, 0.0)))


__all__ = [
    "PackedNet",
    "active_backend",
    "batch_forward",
    "box_axes",
    "normalize_region",
    "ra_output",
    "segment_axes",
    "up_output",
    "VARIANT_CODES",
]
