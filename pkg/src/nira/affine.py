"""Affine arithmetic over MLP networks.

An affine form ``x0 + sum_i x_i e_i`` tracks an interval through the layers:
each ``e_i`` is an unknown in [-1, 1], so the represented interval is
``x0 +/- (sum_i |x_i| + err_accum)``. ``err_accum`` aggregates coefficients
the cheaper variants fold away; it behaves like an always-independent
interval term (it can never cancel), which keeps folding sound.

Linear layers map forms exactly; activations are replaced by their
equioscillating linear surrogate plus a fresh symbol (or an ``err_accum``
contribution) carrying the exact approximation error bound.

The dict-based operations here are the reference semantics; the hot path
(``ra_output_range``) runs the equivalent array kernels.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolationError
from .inr import ActivationKind, LinearLayer, MlpNetwork
from .kernels import box_axes, ra_output
from .linearize import ACTIVATION_CODES, minimax_line


@dataclass
class AffineForm:
    center: float
    coeffs: dict[int, float] = field(default_factory=dict)
    err_accum: float = 0.0

    def radius(self) -> float:
        return sum(abs(v) for v in self.coeffs.values()) + self.err_accum

    def interval(self) -> tuple[float, float]:
        r = self.radius()
        return self.center - r, self.center + r


@dataclass
class FormVector:
    forms: list[AffineForm]
    next_symbol: int


@dataclass(frozen=True)
class RaVariant:
    """Coefficient-management policy: full tracking, a single aggregate
    (fixed), or per-form folding down to a symbol budget."""

    kind: str
    limit: int | None = None

    _KINDS = ("full", "fixed", "truncate", "append")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ContractViolationError(f"unknown RA variant {self.kind!r}")
        if self.kind in ("truncate", "append"):
            if self.limit is None or self.limit < 1:
                raise ContractViolationError(
                    f"variant {self.kind!r} needs a positive symbol limit")

    @classmethod
    def full(cls) -> "RaVariant":
        return cls("full")

    @classmethod
    def fixed(cls) -> "RaVariant":
        return cls("fixed")

    @classmethod
    def truncate(cls, k: int) -> "RaVariant":
        return cls("truncate", int(k))

    @classmethod
    def append(cls, budget: int) -> "RaVariant":
        return cls("append", int(budget))


@dataclass(frozen=True)
class LinearApprox:
    alpha: float
    beta: float
    gamma: float


def default_variant_limit(input_dim: int) -> int:
    return input_dim + 16


def region_to_forms(lower, upper) -> FormVector:
    """One fresh symbol per non-degenerate axis, centered on the box."""
    lower = np.asarray(lower, dtype=np.float64).reshape(-1)
    upper = np.asarray(upper, dtype=np.float64).reshape(-1)
    if lower.shape != upper.shape:
        raise ContractViolationError("region bounds differ in dimension")
    if np.any(lower > upper):
        raise ContractViolationError("region lower bound exceeds upper bound")
    forms = []
    next_symbol = 0
    for lo, hi in zip(lower, upper):
        center = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        if half > 0.0:
            forms.append(AffineForm(center, {next_symbol: half}))
            next_symbol += 1
        else:
            forms.append(AffineForm(center))
    return FormVector(forms, next_symbol)


def apply_linear(fv: FormVector, layer: LinearLayer,
                 variant: RaVariant | None = None) -> FormVector:
    """Exact propagation through y = W x + b (variant plays no role here)."""
    if layer.cols != len(fv.forms):
        raise ContractViolationError(
            f"layer expects {layer.cols} inputs, got {len(fv.forms)} forms")
    W = layer.weights
    out = []
    for i in range(layer.rows):
        center = float(layer.bias[i])
        coeffs: dict[int, float] = {}
        err = 0.0
        for j, form in enumerate(fv.forms):
            w = float(W[i, j])
            center += w * form.center
            err += abs(w) * form.err_accum
            if w != 0.0:
                for s, c in form.coeffs.items():
                    coeffs[s] = coeffs.get(s, 0.0) + w * c
        coeffs = {s: c for s, c in coeffs.items() if c != 0.0}
        out.append(AffineForm(center, coeffs, err))
    return FormVector(out, fv.next_symbol)


def minimax_approx(activation: ActivationKind, lo: float, hi: float) -> LinearApprox:
    """Best (equioscillating) linear fit of the activation on [lo, hi];
    ``gamma`` is its exact maximum absolute error."""
    if not (np.isfinite(lo) and np.isfinite(hi)) or lo > hi:
        raise ContractViolationError(f"bad activation input range [{lo}, {hi}]")
    alpha, beta, gamma = minimax_line(ACTIVATION_CODES[activation.value],
                                      float(lo), float(hi))
    return LinearApprox(alpha, beta, gamma)


def _fold_into_err(form: AffineForm, keep: int, pairwise: bool) -> None:
    count = len(form.coeffs)
    excess = count - keep
    if excess <= 0:
        return
    if pairwise and excess % 2 == 1:
        excess += 1  # merges retire two coefficients at a time
    order = sorted(form.coeffs.items(), key=lambda kv: (abs(kv[1]), kv[0]))
    for s, c in order[:min(excess, count)]:
        form.err_accum += abs(c)
        del form.coeffs[s]


def apply_activation(fv: FormVector, activation: ActivationKind,
                     variant: RaVariant) -> FormVector:
    out = []
    next_symbol = fv.next_symbol
    for form in fv.forms:
        lo, hi = form.interval()
        approx = minimax_approx(activation, lo, hi)
        a = approx.alpha
        new = AffineForm(
            a * form.center + approx.beta,
            {s: a * c for s, c in form.coeffs.items() if a * c != 0.0},
            abs(a) * form.err_accum,
        )
        if variant.kind == "fixed":
            new.err_accum += approx.gamma
        elif approx.gamma > 0.0:
            new.coeffs[next_symbol] = approx.gamma
            next_symbol += 1
        # The symbol budget holds after every activation, whether or not a
        # fresh symbol was spent (linear mixing alone can exceed it).
        if variant.kind == "truncate":
            _fold_into_err(new, variant.limit, pairwise=False)
        elif variant.kind == "append":
            _fold_into_err(new, variant.limit, pairwise=True)
        out.append(new)
    return FormVector(out, next_symbol)


def network_output_form(net: MlpNetwork, lower, upper,
                        variant: RaVariant) -> AffineForm:
    """Reference-path propagation: normalized region through all layers,
    result rescaled to data units."""
    center, half = net.domain_center_half()
    lower = (np.asarray(lower, dtype=np.float64) - center) / half
    upper = (np.asarray(upper, dtype=np.float64) - center) / half
    fv = region_to_forms(lower, upper)
    for l, layer in enumerate(net.layers):
        fv = apply_linear(fv, layer, variant)
        if l < net.n_layers - 1:
            fv = apply_activation(fv, net.activation, variant)
    if len(fv.forms) != 1:
        raise ContractViolationError("range analysis expects one output")
    form = fv.forms[0]
    s = net.value_scale
    return AffineForm(
        s * form.center + net.value_offset,
        {k: s * c for k, c in form.coeffs.items()},
        abs(s) * form.err_accum,
    )


def _check_variant(net: MlpNetwork, variant: RaVariant) -> int:
    if variant.kind in ("truncate", "append"):
        if variant.limit < net.input_dim:
            raise ContractViolationError(
                f"variant limit {variant.limit} must be >= input dimension "
                f"{net.input_dim}")
        return variant.limit
    return 0


def ra_output_range(net: MlpNetwork, lower, upper,
                    variant: RaVariant) -> tuple[float, float]:
    """Guaranteed output interval of the network over the box (data units).

    Sound for every variant; ``full`` is the tightest, folding variants
    only widen.
    """
    limit = _check_variant(net, variant)
    center_w, axes_w = box_axes(lower, upper)
    c, sum_abs, _, err = ra_output(net.packed, center_w, axes_w,
                                   variant.kind, limit)
    r = sum_abs + err
    return c - r, c + r
