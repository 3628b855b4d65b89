"""Bessel functions of the first kind (orders 0, 1, 2) and their positive zeros.

These are the only special functions the closed-form surface response needs.
Evaluation uses the ascending power series below ``_SERIES_CUTOFF`` and the
Hankel asymptotic expansion above it; a single series loses precision once the
argument grows (arguments scale like R*kappa*chi and can reach 1e4 for mmWave
carriers and large surfaces).  Zeros are found by Newton iteration seeded with
McMahon's asymptotic estimates and cached, since the orientation-control path
queries them in a hot loop.
"""

from __future__ import annotations

import numpy as np

_SERIES_CUTOFF = 15.0
_ZERO_BLOCK = 64  # zeros are precomputed in blocks of this size

# cache: order -> ndarray of positive zeros j_{order,1..n}
_zero_tables: dict[int, np.ndarray] = {}


def _series(order: int, ax: np.ndarray) -> np.ndarray:
    # ascending series in extended precision; the largest term reaches ~2e5
    # at the cutoff, so float64 accumulation alone would eat into the error
    # budget
    x = ax.astype(np.longdouble)
    q = 0.25 * x * x
    term = (0.5 * x) ** order
    if order == 2:
        term = term / 2.0
    total = term.copy()
    for k in range(1, 42):
        term = term * (-q) / (k * (k + order))
        total += term
    return total.astype(np.float64)


def _asymptotic(order: int, ax: np.ndarray) -> np.ndarray:
    # Hankel expansion J_m(x) ~ sqrt(2/(pi x)) (P cos w - Q sin w); the series
    # is divergent, so each element stops at its smallest term
    mu = 4.0 * order * order
    inv8x = 1.0 / (8.0 * ax)
    p = np.ones_like(ax)
    q = np.zeros_like(ax)
    term = np.ones_like(ax)
    active = np.ones(ax.shape, dtype=bool)
    for j in range(1, 40):
        new = term * ((mu - (2 * j - 1) ** 2) / j) * inv8x
        active &= np.abs(new) < np.abs(term)
        term = np.where(active & (np.abs(new) > 1e-19), new, 0.0)
        if not term.any():
            break
        r = j % 4
        if r == 1:
            q += term
        elif r == 2:
            p -= term
        elif r == 3:
            q -= term
        else:
            p += term
    omega = ax - (2 * order + 1) * (np.pi / 4.0)
    return np.sqrt(2.0 / (np.pi * ax)) * (p * np.cos(omega) - q * np.sin(omega))


def bessel_j(order: int, x):
    """Evaluate J_order(x) for order in {0, 1, 2}.

    Accepts scalars or arrays; absolute error is below 1e-12 for |x| <= 1e4.
    Raises ValueError for unsupported orders or non-finite arguments.
    """
    if order not in (0, 1, 2):
        raise ValueError(f"unsupported Bessel order {order!r}; expected 0, 1 or 2")
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError("bessel_j requires finite arguments")
    scalar = arr.ndim == 0
    ax = np.abs(np.atleast_1d(arr))
    out = np.empty_like(ax)
    small = ax < _SERIES_CUTOFF
    if small.any():
        out[small] = _series(order, ax[small])
    if (~small).any():
        out[~small] = _asymptotic(order, ax[~small])
    if order == 1:
        out = np.where(np.atleast_1d(arr) < 0, -out, out)
    return float(out[0]) if scalar else out


def _bessel_j_prime(order: int, x: np.ndarray) -> np.ndarray:
    # J_m'(x) = J_{m-1}(x) - (m/x) J_m(x); only needed away from x = 0
    return bessel_j(order - 1, x) - order * bessel_j(order, x) / x


def _mcmahon_guess(order: int, n: np.ndarray) -> np.ndarray:
    # McMahon's expansion for the n-th zero of J_order
    mu = 4.0 * order * order
    beta = (n + 0.5 * order - 0.25) * np.pi
    b8 = 8.0 * beta
    guess = beta - (mu - 1.0) / b8
    guess -= 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * b8**3)
    guess -= 32.0 * (mu - 1.0) * (83.0 * mu**2 - 982.0 * mu + 3779.0) / (15.0 * b8**5)
    return guess


def _compute_zeros(order: int, count: int) -> np.ndarray:
    n = np.arange(1, count + 1, dtype=np.float64)
    x = _mcmahon_guess(order, n)
    for _ in range(60):
        step = bessel_j(order, x) / _bessel_j_prime(order, x)
        x = x - step
        if np.max(np.abs(step)) < 1e-14 * np.max(x):
            break
    else:
        raise ArithmeticError(f"Newton iteration for J_{order} zeros did not converge")
    # sanity: simple zeros, strictly increasing, sign change across each root
    resid = np.abs(bessel_j(order, x))
    if np.max(resid) > 1e-10 or np.any(np.diff(x) <= 0.0):
        raise ArithmeticError(f"zero table for J_{order} failed validation")
    if np.any(bessel_j(order, x - 0.2) * bessel_j(order, x + 0.2) >= 0.0):
        raise ArithmeticError(f"zeros of J_{order} are not bracketed by sign changes")
    return x


def bessel_zeros(order: int, count: int) -> np.ndarray:
    """Return the first `count` positive zeros of J_order, order in {1, 2}."""
    if order not in (1, 2):
        raise ValueError(f"zeros are tabulated for orders 1 and 2, not {order!r}")
    if count < 1:
        raise ValueError("count must be >= 1")
    table = _zero_tables.get(order)
    if table is None or table.size < count:
        size = max(count, _ZERO_BLOCK)
        table = _compute_zeros(order, size)
        _zero_tables[order] = table
    return table[:count]


def bessel_zero(order: int, n: int) -> float:
    """Return j_{order,n}, the n-th positive zero of J_order (n >= 1)."""
    return float(bessel_zeros(order, n)[n - 1])
