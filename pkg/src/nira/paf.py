"""Probabilistic affine forms and uncertainty propagation.

A probabilistic form ``x0 + sum_i x_i Z_i`` combines independent zero-mean
unit-variance sources, so its variance is exactly ``sum_i x_i^2`` and the
central limit theorem motivates summarizing it as ``N(x0, sum x_i^2)``.
Linear layers propagate the distribution exactly; each activation is
replaced by its Gaussian least-squares linearization plus a fresh
independent source carrying the residual variance ``gamma^2`` (only the
variance of the residual matters under the Gaussian summary, its shape is
irrelevant).

A box region enters as one uniform source per axis with coefficient
``half_width / sqrt(3)``, which normalizes the uniform variable to unit
standard deviation.

The dict-based operations are the reference semantics; the hot path
(``up_output_estimate``) runs an exactly equivalent second-moment kernel
(mean vector + covariance of the neurons; fresh independent sources only
ever add to the diagonal).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .affine import RaVariant, _check_variant
from .errors import ContractViolationError, InternalConsistencyError
from .inr import ActivationKind, LinearLayer, MlpNetwork
from .kernels import box_axes, ra_output, up_output
from .linearize import ACTIVATION_CODES, lsq_line

_SQRT3 = math.sqrt(3.0)


@dataclass
class ProbAffineForm:
    center: float
    coeffs: dict[int, float] = field(default_factory=dict)

    def variance(self) -> float:
        return sum(c * c for c in self.coeffs.values())


@dataclass
class PafVector:
    forms: list[ProbAffineForm]
    next_rv: int


@dataclass(frozen=True)
class GaussianEstimate:
    mu: float
    sigma: float

    def __post_init__(self):
        if not (math.isfinite(self.mu) and math.isfinite(self.sigma)):
            raise ContractViolationError("Gaussian estimate must be finite")
        if self.sigma < 0.0:
            raise ContractViolationError("sigma must be non-negative")


@dataclass(frozen=True)
class LsqApprox:
    alpha: float
    beta: float
    gamma_sq: float


def region_to_pafs(lower, upper) -> PafVector:
    lower = np.asarray(lower, dtype=np.float64).reshape(-1)
    upper = np.asarray(upper, dtype=np.float64).reshape(-1)
    if lower.shape != upper.shape:
        raise ContractViolationError("region bounds differ in dimension")
    if np.any(lower > upper):
        raise ContractViolationError("region lower bound exceeds upper bound")
    forms = []
    next_rv = 0
    for lo, hi in zip(lower, upper):
        center = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        if half > 0.0:
            forms.append(ProbAffineForm(center, {next_rv: half / _SQRT3}))
            next_rv += 1
        else:
            forms.append(ProbAffineForm(center))
    return PafVector(forms, next_rv)


def paf_apply_linear(pv: PafVector, layer: LinearLayer) -> PafVector:
    if layer.cols != len(pv.forms):
        raise ContractViolationError(
            f"layer expects {layer.cols} inputs, got {len(pv.forms)} forms")
    W = layer.weights
    out = []
    for i in range(layer.rows):
        center = float(layer.bias[i])
        coeffs: dict[int, float] = {}
        for j, form in enumerate(pv.forms):
            w = float(W[i, j])
            center += w * form.center
            if w != 0.0:
                for s, c in form.coeffs.items():
                    coeffs[s] = coeffs.get(s, 0.0) + w * c
        coeffs = {s: c for s, c in coeffs.items() if c != 0.0}
        out.append(ProbAffineForm(center, coeffs))
    return PafVector(out, pv.next_rv)


def clt_estimate(form: ProbAffineForm) -> GaussianEstimate:
    return GaussianEstimate(form.center, math.sqrt(form.variance()))


def lsq_approx(activation: ActivationKind,
               estimate: GaussianEstimate) -> LsqApprox:
    """Closed-form Gaussian least-squares linearization of the activation."""
    if not (math.isfinite(estimate.mu) and math.isfinite(estimate.sigma)):
        raise ContractViolationError("lsq_approx needs finite mu/sigma")
    try:
        alpha, beta, gamma_sq = lsq_line(
            ACTIVATION_CODES[activation.value], estimate.mu, estimate.sigma)
    except ValueError as exc:
        raise InternalConsistencyError(str(exc)) from None
    return LsqApprox(alpha, beta, gamma_sq)


def paf_apply_activation(pv: PafVector,
                         activation: ActivationKind) -> PafVector:
    out = []
    next_rv = pv.next_rv
    for form in pv.forms:
        approx = lsq_approx(activation, clt_estimate(form))
        a = approx.alpha
        new = ProbAffineForm(
            a * form.center + approx.beta,
            {s: a * c for s, c in form.coeffs.items() if a * c != 0.0},
        )
        if approx.gamma_sq > 0.0:
            new.coeffs[next_rv] = math.sqrt(approx.gamma_sq)
            next_rv += 1
        out.append(new)
    return PafVector(out, next_rv)


def network_output_paf(net: MlpNetwork, lower, upper) -> ProbAffineForm:
    """Reference-path propagation; result rescaled to data units."""
    center, half = net.domain_center_half()
    lower = (np.asarray(lower, dtype=np.float64) - center) / half
    upper = (np.asarray(upper, dtype=np.float64) - center) / half
    pv = region_to_pafs(lower, upper)
    for l, layer in enumerate(net.layers):
        pv = paf_apply_linear(pv, layer)
        if l < net.n_layers - 1:
            pv = paf_apply_activation(pv, net.activation)
    if len(pv.forms) != 1:
        raise ContractViolationError("propagation expects one output")
    form = pv.forms[0]
    s = net.value_scale
    return ProbAffineForm(s * form.center + net.value_offset,
                          {k: s * c for k, c in form.coeffs.items()})


def up_output_estimate(net: MlpNetwork, lower, upper,
                       include_error_terms: bool = True) -> GaussianEstimate:
    """Gaussian summary of the network output over the box (data units).

    ``include_error_terms=False`` drops the per-activation residual
    variances; it exists only so tests can demonstrate the resulting
    under-coverage.
    """
    center_w, axes_w = box_axes(lower, upper)
    mu, sigma = up_output(net.packed, center_w, axes_w,
                          include_error_terms=include_error_terms)
    return GaussianEstimate(mu, sigma)


def ra_ua_estimate(net: MlpNetwork, lower, upper,
                   variant: RaVariant | None = None) -> GaussianEstimate:
    """Gaussian read-off of the range-analysis output form, assuming each
    unit interval symbol is uniform: variance (1/3) (sum x_i^2 + err^2).

    Interior layers still use hard interval bounds; only the final form is
    reinterpreted. The aggregate term is treated as one more uniform symbol,
    an extrapolation noted in the docs.
    """
    variant = variant or RaVariant.full()
    limit = _check_variant(net, variant)
    center_w, axes_w = box_axes(lower, upper)
    c, _, sum_sq, err = ra_output(net.packed, center_w, axes_w,
                                  variant.kind, limit)
    return GaussianEstimate(c, math.sqrt((sum_sq + err * err) / 3.0))


def soft_bound(est: GaussianEstimate, t: float) -> tuple[float, float]:
    """Confidence interval [mu - t sigma, mu + t sigma]."""
    if not t > 0.0:
        raise ContractViolationError("confidence level t must be positive")
    return est.mu - t * est.sigma, est.mu + t * est.sigma
