"""Scalar linearizations of activation functions.

Two families of linear surrogates ``f(x) ~ alpha*x + beta`` are provided:

* ``minimax_line`` -- equioscillating (Chebyshev-style) approximation over a
  closed interval. ``gamma`` is the exact maximum absolute error of the
  returned line over the interval, so an affine propagation that widens by
  ``gamma`` stays sound.
* ``lsq_line`` -- the mean-squared-error minimizer under a Gaussian input
  ``N(mu, sigma^2)``. ``gamma_sq`` is the residual variance of the fit. The
  solution is the Gaussian linear regression of ``f(X)`` on ``X``::

      alpha = Cov(X, f(X)) / sigma^2      (Stein: = E[f'(X)])
      beta  = E[f(X)] - alpha * mu
      gamma_sq = Var(f(X)) - alpha^2 sigma^2

  All moments have closed forms for sine / ReLU / ELU; ELU tail terms route
  through ``erfcx`` to avoid 0*inf at large positive means.

Everything here is plain scalar math so the same code runs interpreted and
inside numba kernels.
"""

import math

from ._jit import register_jitable
from .special import erfcx

ACT_SINE = 0
ACT_RELU = 1
ACT_ELU = 2

ACTIVATION_CODES = {"sine": ACT_SINE, "relu": ACT_RELU, "elu": ACT_ELU}

_HALF_PI = 0.5 * math.pi
_TWO_PI = 2.0 * math.pi
_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

# Input sigma below this (relative) threshold degenerates the Gaussian moment
# formulas to 0/0; the limit is the tangent line at mu.
_SIGMA_TINY_REL = 1e-7
# Floating-point cancellation in the closed forms can leave gamma_sq barely
# negative; anything more negative than this indicates a real bug.
_GAMMA_SQ_CLAMP = -1e-12


@register_jitable
def act_value(act: int, x: float) -> float:
    if act == ACT_SINE:
        return math.sin(x)
    if act == ACT_RELU:
        return x if x > 0.0 else 0.0
    return x if x > 0.0 else math.expm1(x)


@register_jitable
def act_tangent_slope(act: int, x: float) -> float:
    """Derivative used for point linearizations; ReLU at 0 takes the
    subgradient midpoint 0.5."""
    if act == ACT_SINE:
        return math.cos(x)
    if act == ACT_RELU:
        if x > 0.0:
            return 1.0
        if x < 0.0:
            return 0.0
        return 0.5
    return 1.0 if x > 0.0 else math.exp(x)


@register_jitable
def _tangent_line(act: int, x: float):
    alpha = act_tangent_slope(act, x)
    return alpha, act_value(act, x) - alpha * x, 0.0


@register_jitable
def _center_line(act: int, alpha: float, lo: float, hi: float,
                 c1: float, c2: float, use1: bool, use2: bool):
    """Best vertical placement for slope ``alpha``: center the deviation
    g(x) = f(x) - alpha*x over its extrema (endpoints plus stationary
    candidates c1/c2). Returns (alpha, beta, gamma) with gamma the exact
    max-abs error."""
    g_lo = act_value(act, lo) - alpha * lo
    g_hi = act_value(act, hi) - alpha * hi
    g_max = g_lo if g_lo > g_hi else g_hi
    g_min = g_lo if g_lo < g_hi else g_hi
    if use1:
        g1 = act_value(act, c1) - alpha * c1
        if g1 > g_max:
            g_max = g1
        if g1 < g_min:
            g_min = g1
    if use2:
        g2 = act_value(act, c2) - alpha * c2
        if g2 > g_max:
            g_max = g2
        if g2 < g_min:
            g_min = g2
    return alpha, 0.5 * (g_max + g_min), 0.5 * (g_max - g_min)


@register_jitable
def _minimax_relu(lo: float, hi: float):
    if hi <= 0.0:
        return 0.0, 0.0, 0.0
    if lo >= 0.0:
        return 1.0, 0.0, 0.0
    alpha = hi / (hi - lo)
    return _center_line(ACT_RELU, alpha, lo, hi, 0.0, 0.0, True, False)


@register_jitable
def _minimax_elu(lo: float, hi: float):
    if lo >= 0.0:
        return 1.0, 0.0, 0.0
    alpha = (act_value(ACT_ELU, hi) - act_value(ACT_ELU, lo)) / (hi - lo)
    use1 = 0.0 < alpha < 1.0
    c1 = math.log(alpha) if use1 else 0.0
    use1 = use1 and lo < c1 < hi
    return _center_line(ACT_ELU, alpha, lo, hi, c1, 0.0, use1, False)


@register_jitable
def _minimax_sine(lo: float, hi: float):
    width = hi - lo
    # Turning points pi/2 + k*pi fold the function back on itself; once the
    # interval holds one (always true for width >= pi), a constant line with
    # the exact sine extrema is the sound fallback.
    k0 = math.ceil((lo - _HALF_PI) / math.pi)
    first_crit = _HALF_PI + k0 * math.pi
    if width >= math.pi or first_crit <= hi:
        s_lo = math.sin(lo)
        s_hi = math.sin(hi)
        big = s_lo if s_lo > s_hi else s_hi
        small = s_lo if s_lo < s_hi else s_hi
        if math.ceil((lo - _HALF_PI) / _TWO_PI) <= math.floor((hi - _HALF_PI) / _TWO_PI):
            big = 1.0
        if math.ceil((lo + _HALF_PI) / _TWO_PI) <= math.floor((hi + _HALF_PI) / _TWO_PI):
            small = -1.0
        return 0.0, 0.5 * (big + small), 0.5 * (big - small)
    # Monotone stretch: chord slope, stationary candidates where cos x = alpha
    # inside the half-period window containing the interval.
    alpha = (math.sin(hi) - math.sin(lo)) / width
    w = math.floor((lo + _HALF_PI) / math.pi)
    aa = abs(alpha)
    if aa > 1.0:
        aa = 1.0
    y = math.acos(aa)
    c1 = w * math.pi + y
    c2 = w * math.pi - y
    return _center_line(ACT_SINE, alpha, lo, hi,
                        c1, c2, lo < c1 < hi, lo < c2 < hi)


@register_jitable
def minimax_line(act: int, lo: float, hi: float):
    """Equioscillating linear approximation of the activation on [lo, hi].

    Returns ``(alpha, beta, gamma)`` with
    ``gamma = max_{x in [lo,hi]} |f(x) - (alpha x + beta)|`` exactly (up to
    roundoff); exact-linear stretches give gamma == 0.
    """
    if lo == hi:
        return _tangent_line(act, lo)
    if act == ACT_SINE:
        return _minimax_sine(lo, hi)
    if act == ACT_RELU:
        return _minimax_relu(lo, hi)
    return _minimax_elu(lo, hi)


@register_jitable
def _finish_gamma_sq(g2: float) -> float:
    if g2 >= 0.0:
        return g2
    if g2 >= _GAMMA_SQ_CLAMP:
        return 0.0
    raise ValueError("internal consistency: closed-form error variance is "
                     "negative beyond the cancellation tolerance")


@register_jitable
def _lsq_relu(mu: float, sigma: float):
    z = mu / (_SQRT2 * sigma)
    p_pos = 0.5 * math.erfc(-z)          # P(X > 0)
    p_neg = 0.5 * math.erfc(z)
    a = p_neg - p_pos                    # erf(-mu / (sqrt2 sigma))
    dens = _INV_SQRT_2PI * math.exp(-z * z)
    alpha = p_pos
    beta = sigma * dens
    g2 = p_pos * p_neg * (mu * mu + sigma * sigma) + a * mu * beta - beta * beta
    return alpha, beta, _finish_gamma_sq(g2)


@register_jitable
def _lsq_elu(mu: float, sigma: float):
    s2 = sigma * sigma
    z = mu / (_SQRT2 * sigma)
    p_pos = 0.5 * math.erfc(-z)
    p_neg = 0.5 * math.erfc(z)
    dens = _INV_SQRT_2PI * math.exp(-z * z)
    # b  = E[e^X 1{X<=0}] * 2 = erfc((mu+s2)/(sqrt2 s)) e^{mu+s2/2}
    # B2 = E[e^{2X} 1{X<=0}] * 2 = erfc((mu+2s2)/(sqrt2 s)) e^{2mu+2s2}
    # Both collapse to erfcx(w) e^{-mu^2/(2s2)} which stays finite for mu >> 0.
    w1 = (mu + s2) / (_SQRT2 * sigma)
    if w1 > 5.0:
        b = erfcx(w1) * math.exp(-z * z)
    else:
        b = math.erfc(w1) * math.exp(mu + 0.5 * s2)
    w2 = (mu + 2.0 * s2) / (_SQRT2 * sigma)
    if w2 > 5.0:
        b2 = erfcx(w2) * math.exp(-z * z)
    else:
        b2 = math.erfc(w2) * math.exp(2.0 * mu + 2.0 * s2)
    alpha = p_pos + 0.5 * b
    beta = 0.5 * b * (1.0 - mu) - p_neg + dens * sigma
    mean = alpha * mu + beta
    second = (mu * mu + s2) * p_pos + mu * sigma * dens + 0.5 * b2 - b + p_neg
    g2 = second - mean * mean - alpha * alpha * s2
    return alpha, beta, _finish_gamma_sq(g2)


@register_jitable
def _lsq_sine(mu: float, sigma: float):
    t = sigma * sigma
    damp = math.exp(-0.5 * t)            # E[cos] / cos(mu) attenuation
    cos_mu = math.cos(mu)
    sin_mu = math.sin(mu)
    alpha = damp * cos_mu
    beta = damp * (sin_mu - mu * cos_mu)
    # Var(sin X) - alpha^2 sigma^2, written with expm1 so the small-sigma
    # cancellation (true value ~ sigma^4/2 sin^2 mu + sigma^6/6 cos^2 mu)
    # survives in float64.
    damp2 = math.exp(-t)
    g2 = (0.5 * (-math.expm1(-2.0 * t))
          - damp2 * t * cos_mu * cos_mu
          - sin_mu * sin_mu * damp2 * (-math.expm1(-t)))
    return alpha, beta, _finish_gamma_sq(g2)


@register_jitable
def lsq_line(act: int, mu: float, sigma: float):
    """Gaussian least-squares linearization of the activation.

    Returns ``(alpha, beta, gamma_sq)`` minimizing
    ``E[(f(X) - alpha X - beta)^2]`` for ``X ~ N(mu, sigma^2)``;
    ``gamma_sq`` is the minimized value (the residual variance, since the
    fit is unbiased). Near-zero sigma returns the tangent at mu.
    """
    if sigma < _SIGMA_TINY_REL * max(1.0, abs(mu)):
        return _tangent_line(act, mu)
    if act == ACT_SINE:
        return _lsq_sine(mu, sigma)
    if act == ACT_RELU:
        return _lsq_relu(mu, sigma)
    return _lsq_elu(mu, sigma)
