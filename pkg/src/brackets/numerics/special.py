"""Floating-point special functions: Gamma (Lanczos), K_0 and Ei(-x).

All evaluators accept Python scalars or numpy arrays and return the same
shape.  ``gamma``/``loggamma`` also accept complex input, which the
Mellin-Barnes contour checks need.
"""

from __future__ import annotations

import math

import numpy as np

EULER_GAMMA = 0.57721566490153286060651209008240243

# Lanczos coefficients, g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS_P = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _loggamma_right(z):
    # valid for Re z >= 1/2
    z = z - 1.0
    acc = _LANCZOS_P[0]
    for k in range(1, len(_LANCZOS_P)):
        acc = acc + _LANCZOS_P[k] / (z + k)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * np.log(t) - t + np.log(acc)


def _sinpi(z):
    # sin(pi z) with the integer part removed exactly, so that accuracy
    # survives next to the poles of the reflection formula
    k = np.round(z.real)
    sign = np.where(np.mod(k, 2) == 0, 1.0, -1.0)
    return sign * np.sin(np.pi * (z - k))


def loggamma(z):
    """Complex log-Gamma (principal branch is *not* guaranteed).

    Only ``exp(loggamma(z))`` is meaningful; the imaginary part may differ from
    the principal value by multiples of 2*pi.
    """
    z = np.asarray(z, dtype=complex)
    left = z.real < 0.5
    out = np.empty_like(z)
    if np.any(~left):
        out[~left] = _loggamma_right(z[~left])
    if np.any(left):
        zl = z[left]
        out[left] = (math.log(math.pi) - np.log(_sinpi(zl))
                     - _loggamma_right(1.0 - zl))
    return out[()] if out.ndim == 0 else out


def _is_pole(z):
    z = np.asarray(z)
    return (z.imag == 0) & (z.real <= 0) & (z.real == np.round(z.real))


def gamma(z):
    """Gamma function; real in, real out.  Poles give ``inf``."""
    arr = np.asarray(z)
    is_complex = np.iscomplexobj(arr)
    zc = arr.astype(complex)
    poles = _is_pole(zc)
    safe = np.where(poles, 0.5, zc)
    with np.errstate(over="ignore", invalid="ignore"):
        # beyond the float range the result is inf, like the poles
        val = np.exp(loggamma(safe))
    if not is_complex:
        val = val.real
    val = np.where(poles, np.inf, val)
    return val[()] if np.ndim(val) == 0 else val


def _k0_series(x):
    # -ln(x/2) * sum q^k/(k!)^2 + sum psi(k+1) q^k/(k!)^2,  q = x^2/4
    q = (x / 2.0) ** 2
    term = np.ones_like(x)
    psi = -EULER_GAMMA
    s_plain = term.copy()
    s_psi = psi * term
    for k in range(1, 40):
        term = term * q / (k * k)
        psi += 1.0 / k
        s_plain = s_plain + term
        s_psi = s_psi + psi * term
    return -np.log(x / 2.0) * s_plain + s_psi


def _k0_trapezoid(x):
    # K0(x) = int_0^inf exp(-x cosh t) dt; the trapezoid rule converges
    # geometrically for this analytic, doubly-decaying integrand.
    nodes = 64
    t_max = np.arccosh(1.0 + 45.0 / x)
    h = t_max / nodes
    k = np.arange(nodes + 1)
    t = h[:, None] * k[None, :]
    vals = np.exp(-x[:, None] * (np.cosh(t) - 1.0))
    vals[:, 0] *= 0.5
    return h * vals.sum(axis=1) * np.exp(-x)


def eval_K0(x):
    """Modified Bessel function K_0 for x > 0."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0) or np.any(np.isnan(arr)):
        raise ValueError("K0 requires x > 0")
    flat = np.atleast_1d(arr).ravel()
    out = np.zeros_like(flat)
    small = flat <= 2.0
    mid = (~small) & (flat < 745.0)
    if np.any(small):
        out[small] = _k0_series(flat[small])
    if np.any(mid):
        out[mid] = _k0_trapezoid(flat[mid])
    out = out.reshape(np.shape(arr))
    return float(out) if out.ndim == 0 else out


def _e1_series(x):
    # E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
    total = np.zeros_like(x)
    term = np.ones_like(x)
    for k in range(1, 60):
        term = term * (-x) / k
        total = total + term / k
    return -EULER_GAMMA - np.log(x) - total


def _e1_continued_fraction(x):
    # modified Lentz on the even contraction of the E1 continued fraction
    tiny = 1e-300
    b = x + 1.0
    c = np.full_like(x, 1.0 / tiny)
    d = 1.0 / b
    h = d.copy()
    for i in range(1, 500):
        an = -float(i * i)
        b = b + 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h = h * delta
        if np.all(np.abs(delta - 1.0) < 1e-16):
            break
    return h * np.exp(-x)


def eval_Ei_neg(x):
    """Ei(-x) for x > 0 (always negative)."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0) or np.any(np.isnan(arr)):
        raise ValueError("Ei(-x) requires x > 0")
    flat = np.atleast_1d(arr).ravel()
    out = np.zeros_like(flat)
    small = flat <= 1.0
    mid = (~small) & (flat < 745.0)
    if np.any(small):
        out[small] = -_e1_series(flat[small])
    if np.any(mid):
        out[mid] = -_e1_continued_fraction(flat[mid])
    out = out.reshape(np.shape(arr))
    return float(out) if out.ndim == 0 else out
