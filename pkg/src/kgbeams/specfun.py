"""Complex-argument special functions used by the closed-form beams.

All functions accept scalars or numpy arrays and return complex values of the
same shape.  Polynomials are evaluated by their three-term recurrences; the
Bessel function by its ascending series; the Macdonald function ``K_1`` by a
series / continued-fraction / asymptotic split on ``|z|``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import gmpy2
import numpy as np

EULER_GAMMA = 0.57721566490153286061

# |z| above which the ascending Bessel series is not used
BESSEL_MAX_ABS = 100.0
# float-path cancellation (sum |terms| / |sum|) beyond which the series is
# re-summed in extended precision
BESSEL_MAX_LOSS = 1e3

K1_SERIES_MAX_ABS = 2.0
K1_ASYMPTOTIC_MIN_ABS = 25.0


class SeriesConvergenceError(ArithmeticError):
    pass


@dataclass(frozen=True)
class SeriesControl:
    max_terms: int = 200
    tail_tolerance: float = 1e-16

    def __post_init__(self):
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")
        if not self.tail_tolerance > 0:
            raise ValueError("tail_tolerance must be positive")


DEFAULT_SERIES = SeriesControl()


def _out(a):
    return a[()] if a.ndim == 0 else a


def laguerre(n: int, alpha: int, z):
    """Generalized Laguerre polynomial ``L_n^alpha(z)`` for complex ``z``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    z = np.asarray(z, dtype=complex)
    prev = np.ones_like(z)
    if n == 0:
        return _out(prev)
    cur = 1.0 + alpha - z
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 + alpha - z) * cur - (k + alpha) * prev) / (k + 1)
    return _out(cur)


def hermite(m: int, z):
    """Physicists' Hermite polynomial ``H_m(z)`` for complex ``z``."""
    if m < 0:
        raise ValueError("m must be >= 0")
    z = np.asarray(z, dtype=complex)
    prev = np.ones_like(z)
    if m == 0:
        return _out(prev)
    cur = 2.0 * z
    for k in range(1, m):
        prev, cur = cur, 2.0 * z * cur - 2.0 * k * prev
    return _out(cur)


# ---------------------------------------------------------------- Bessel J


def _bessel_series_float(l, z, ctl):
    """Float ascending series; returns (sum, sum of |terms|)."""
    term = (z / 2.0) ** l / math.factorial(l)
    total = term.copy()
    abs_total = np.abs(term)
    w = -(z * z) / 4.0
    aw = np.abs(w)
    done = np.zeros(z.shape, dtype=bool)
    for k in range(1, ctl.max_terms + 1):
        term = term * w / (k * (k + l))
        total = total + np.where(done, 0.0, term)
        abs_total = abs_total + np.where(done, 0.0, np.abs(term))
        ratio = aw / ((k + 1) * (k + 1 + l))
        with np.errstate(divide="ignore", invalid="ignore"):
            tail = np.abs(term) * ratio / (1.0 - ratio)
        done |= (ratio < 0.5) & (tail <= ctl.tail_tolerance * np.abs(total))
        if done.all():
            return total, abs_total
    raise SeriesConvergenceError(
        f"Bessel series did not converge within {ctl.max_terms} terms")


def _bessel_series_mp(l, zc, ctl, bits):
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        z = gmpy2.mpc(zc)
        term = (z / 2) ** l / gmpy2.fac(l)
        total = term
        abs_total = abs(term)
        w = -(z * z) / 4
        aw = abs(w)
        tol = gmpy2.mpfr(ctl.tail_tolerance)
        for k in range(1, ctl.max_terms + 1):
            term = term * w / (k * (k + l))
            total += term
            abs_total += abs(term)
            ratio = aw / ((k + 1) * (k + 1 + l))
            if ratio < 0.5 and abs(term) * ratio / (1 - ratio) <= tol * abs(total):
                return complex(total), float(abs_total / abs(total)) if total != 0 else math.inf
    raise SeriesConvergenceError(
        f"Bessel series did not converge within {ctl.max_terms} terms at z={zc!r}")


def bessel_j(l: int, z, ctl: SeriesControl = DEFAULT_SERIES):
    """Integer-order Bessel function ``J_l(z)`` for complex ``z``, ``|z| <= 100``.

    The ascending series is summed in double precision first.  Where the
    ratio of the summed magnitudes to the result shows that rounding would
    cost more than about three digits (large, nearly real arguments), the
    same series is re-summed with enough extra bits to cover the loss.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) > BESSEL_MAX_ABS):
        raise ValueError(f"bessel_j validated for |z| <= {BESSEL_MAX_ABS}")
    sign = 1.0
    if l < 0:
        l = -l
        sign = (-1.0) ** l
    total, abs_total = _bessel_series_float(l, z, ctl)
    with np.errstate(divide="ignore", invalid="ignore"):
        loss = abs_total / np.abs(total)
    redo = np.flatnonzero(~(loss <= BESSEL_MAX_LOSS) & (abs_total > 0))
    if redo.size:
        flat_total = total.ravel().copy()
        flat_z = z.ravel()
        flat_abs = abs_total.ravel()
        for i in redo:
            zi = complex(flat_z[i])
            # bits to cover sum|t| ~ I_l(|z|) against |J_l(z)| ~ exp|Im z|/sqrt(2 pi |z|)
            est = (abs(zi) - abs(zi.imag)) / math.log(2) + 0.5 * math.log2(2 * math.pi * abs(zi) + 1)
            bits = 80 + max(int(est), int(math.log2(max(flat_abs[i], 1.0))))
            for _ in range(4):
                val, mp_loss = _bessel_series_mp(l, zi, ctl, bits)
                if math.log2(max(mp_loss, 1.0)) < bits - 70:
                    break
                bits += int(math.log2(max(mp_loss, 2.0))) + 32
            flat_total[i] = val
        total = flat_total.reshape(z.shape)
    return _out(sign * total)


# ---------------------------------------------------------------- Macdonald K1


def _k1_series(z):
    """Ascending series with logarithmic term, intended for |z| <= 2."""
    w = z * z / 4.0
    half = z / 2.0
    term = np.ones_like(z)  # (z^2/4)^k / (k! (k+1)!)
    i1_sum = term.copy()
    psi_k1 = -EULER_GAMMA          # psi(k+1)
    psi_k2 = 1.0 - EULER_GAMMA     # psi(k+2)
    rest = (psi_k1 + psi_k2) * term
    for k in range(1, 60):
        term = term * w / (k * (k + 1))
        psi_k1 += 1.0 / k
        psi_k2 += 1.0 / (k + 1)
        i1_sum = i1_sum + term
        rest = rest + (psi_k1 + psi_k2) * term
        if np.all(np.abs(term) * (psi_k1 + psi_k2) <= 1e-18 * np.abs(rest)):
            break
    i1 = half * i1_sum
    return 1.0 / z + np.log(half) * i1 - 0.5 * half * rest


def _k1_continued_fraction(z, max_iter=20000, eps=1e-17):
    """Steed's evaluation of the CF2 continued fraction for K_0, K_1 (|z| > 2)."""
    b = 2.0 * (1.0 + z)
    d = 1.0 / b
    h = d.copy()
    delh = d.copy()
    q1 = np.zeros_like(z)
    q2 = np.ones_like(z)
    a1 = 0.25
    q = np.full_like(z, a1)
    c = a1
    a = -a1
    s = 1.0 + q * delh
    done = np.zeros(z.shape, dtype=bool)
    for i in range(2, max_iter):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h = np.where(done, h, h + delh)
        dels = q * delh
        s = np.where(done, s, s + dels)
        done |= np.abs(dels) < eps * np.abs(s)
        if done.all():
            break
    else:
        raise SeriesConvergenceError("K1 continued fraction did not converge")
    h = a1 * h
    k0 = np.sqrt(np.pi / (2.0 * z)) * np.exp(-z) / s
    return k0 * (z + 0.5 - h) / z


def _k1_asymptotic(z):
    """Large-|z| expansion sqrt(pi/2z) e^-z (1 + 3/(8z) - 15/(128 z^2) + ...)."""
    total = np.ones_like(z)
    term = np.ones_like(z)
    prev_abs = np.full(z.shape, np.inf)
    active = np.ones(z.shape, dtype=bool)
    for k in range(1, 80):
        term = term * (4.0 - (2 * k - 1) ** 2) / (k * 8.0 * z)
        a = np.abs(term)
        active &= a < prev_abs
        total = np.where(active, total + term, total)
        prev_abs = a
        active &= a > 1e-18 * np.abs(total)
        if not active.any():
            break
    return np.sqrt(np.pi / (2.0 * z)) * np.exp(-z) * total


def macdonald_k1(z):
    """Modified Bessel function of the second kind ``K_1(z)`` for ``Re z > 0``."""
    z = np.asarray(z, dtype=complex)
    if np.any(~(z.real > 0)):
        raise ValueError("macdonald_k1 requires Re(z) > 0")
    r = np.abs(z)
    out = np.empty_like(z)
    small = r <= K1_SERIES_MAX_ABS
    large = r >= K1_ASYMPTOTIC_MIN_ABS
    mid = ~small & ~large
    if small.any():
        out[small] = _k1_series(z[small])
    if mid.any():
        out[mid] = _k1_continued_fraction(z[mid])
    if large.any():
        out[large] = _k1_asymptotic(z[large])
    return _out(out)
