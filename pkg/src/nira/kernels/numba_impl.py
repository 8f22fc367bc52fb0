"""Numba propagation kernels (default backend).

Straight loop transcriptions of the same math as ``numpy_impl``; the scalar
activation / linearization code is literally shared (``register_jitable``).
All kernels are single-threaded and allocation-light so callers can fan them
out across Python threads (``nogil=True``).
"""

import numpy as np
from numba import njit

from .._jit import JIT_OPTIONS
from ..linearize import act_value, lsq_line, minimax_line

VARIANT_FULL = 0
VARIANT_FIXED = 1
VARIANT_TRUNCATE = 2
VARIANT_APPEND = 3


@njit(**JIT_OPTIONS)
def forward_kernel(L, rows, cols, W, B, act, dom_c, dom_h, vscale, voff,
                   pts, out):
    mmax = W.shape[1]
    buf_a = np.empty(mmax)
    buf_b = np.empty(mmax)
    d_in = pts.shape[1]
    for p in range(pts.shape[0]):
        for d in range(d_in):
            buf_a[d] = (pts[p, d] - dom_c[d]) / dom_h[d]
        src = buf_a
        dst = buf_b
        for l in range(L):
            r = rows[l]
            c = cols[l]
            last = l == L - 1
            for i in range(r):
                s = B[l, i]
                for j in range(c):
                    s += W[l, i, j] * src[j]
                dst[i] = s if last else act_value(act, s)
            tmp = src
            src = dst
            dst = tmp
        out[p] = vscale * src[0] + voff


@njit(**JIT_OPTIONS)
def ra_kernel(L, rows, cols, W, B, act, center_n, axes_n, variant, limit,
              cap):
    mmax = W.shape[1]
    d_in = center_n.shape[0]
    k0 = axes_n.shape[1]
    cen = np.zeros(mmax)
    cen_new = np.zeros(mmax)
    err = np.zeros(mmax)
    err_new = np.zeros(mmax)
    CO = np.zeros((cap + k0, mmax))
    CO_new = np.zeros((cap + k0, mmax))
    for d in range(d_in):
        cen[d] = center_n[d]
        for s in range(k0):
            CO[s, d] = axes_n[d, s]
    n_sym = k0
    width = d_in
    for l in range(L):
        r = rows[l]
        c = cols[l]
        for i in range(r):
            acc = B[l, i]
            eacc = 0.0
            for j in range(c):
                w = W[l, i, j]
                acc += w * cen[j]
                eacc += abs(w) * err[j]
            cen_new[i] = acc
            err_new[i] = eacc
        for s in range(n_sym):
            for i in range(r):
                acc = 0.0
                for j in range(c):
                    acc += W[l, i, j] * CO[s, j]
                CO_new[s, i] = acc
        tmp = cen
        cen = cen_new
        cen_new = tmp
        tmp = err
        err = err_new
        err_new = tmp
        tmpm = CO
        CO = CO_new
        CO_new = tmpm
        width = r
        if l == L - 1:
            break
        for i in range(r):
            radius = err[i]
            for s in range(n_sym):
                radius += abs(CO[s, i])
            alpha, beta, gamma = minimax_line(act, cen[i] - radius,
                                              cen[i] + radius)
            cen[i] = alpha * cen[i] + beta
            for s in range(n_sym):
                CO[s, i] *= alpha
            err[i] = abs(alpha) * err[i]
            if variant == VARIANT_FIXED:
                err[i] += gamma
            elif gamma > 0.0:
                for ii in range(width):
                    CO[n_sym, ii] = 0.0
                CO[n_sym, i] = gamma
                n_sym += 1
            if variant == VARIANT_TRUNCATE or variant == VARIANT_APPEND:
                # enforce the per-form symbol budget after every activation
                count = 0
                for s in range(n_sym):
                    if CO[s, i] != 0.0:
                        count += 1
                excess = count - limit
                if excess > 0:
                    if variant == VARIANT_APPEND and excess % 2 == 1:
                        excess += 1
                    if excess > count:
                        excess = count
                    for _ in range(excess):
                        # smallest |coefficient|, ties to lowest symbol id
                        best = -1
                        best_abs = 0.0
                        for s in range(n_sym):
                            v = CO[s, i]
                            if v != 0.0:
                                av = abs(v)
                                if best < 0 or av < best_abs:
                                    best = s
                                    best_abs = av
                        err[i] += best_abs
                        CO[best, i] = 0.0
    c_out = cen[0]
    sum_abs = 0.0
    sum_sq = 0.0
    for s in range(n_sym):
        v = CO[s, 0]
        sum_abs += abs(v)
        sum_sq += v * v
    return c_out, sum_abs, sum_sq, err[0]


@njit(**JIT_OPTIONS)
def up_kernel(L, rows, cols, W, B, act, center_n, cov_n, include_error_terms):
    mmax = W.shape[1]
    d_in = center_n.shape[0]
    mean = np.zeros(mmax)
    mean_new = np.zeros(mmax)
    cov = np.zeros((mmax, mmax))
    cov_tmp = np.zeros((mmax, mmax))
    cov_new = np.zeros((mmax, mmax))
    alphas = np.zeros(mmax)  # alpha per neuron
    for d in range(d_in):
        mean[d] = center_n[d]
        for e in range(d_in):
            cov[d, e] = cov_n[d, e]
    for l in range(L):
        r = rows[l]
        c = cols[l]
        for i in range(r):
            acc = B[l, i]
            for j in range(c):
                acc += W[l, i, j] * mean[j]
            mean_new[i] = acc
        # cov <- W cov W^T
        for i in range(r):
            for j in range(c):
                acc = 0.0
                for k in range(c):
                    acc += W[l, i, k] * cov[k, j]
                cov_tmp[i, j] = acc
        for i in range(r):
            for j in range(r):
                acc = 0.0
                for k in range(c):
                    acc += cov_tmp[i, k] * W[l, j, k]
                cov_new[i, j] = acc
        tmp = mean
        mean = mean_new
        mean_new = tmp
        tmpm = cov
        cov = cov_new
        cov_new = tmpm
        if l == L - 1:
            break
        for i in range(r):
            var = cov[i, i]
            sigma = np.sqrt(var) if var > 0.0 else 0.0
            alpha, beta, gamma_sq = lsq_line(act, mean[i], sigma)
            alphas[i] = alpha
            mean[i] = alpha * mean[i] + beta
            cov_new[i, i] = gamma_sq  # stash residual variances
        for i in range(r):
            ai = alphas[i]
            for j in range(r):
                cov[i, j] *= ai * alphas[j]
        if include_error_terms:
            for i in range(r):
                cov[i, i] += cov_new[i, i]
    var_out = cov[0, 0]
    if var_out < 0.0:
        var_out = 0.0
    return mean[0], var_out
