"""Effective channel of a circular surface under matched filtering.

Closed-form surface response B(R, kappa, chi) = 2 pi R J1(R kappa chi) /
(kappa chi), its array-gain-normalized form, the unit-modulus phase factor,
the orientation that minimizes the normalized response for a user pair, the
Ricean cross-interference term, and an independent 2-D quadrature oracle that
integrates the raw planar-wave fields over the disc.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .scene import (
    PairCoeffs,
    Surface,
    User,
    chi_of_orientation,
    direction_cosines,
    pair_coeffs,
    rotate_into_surface,
)
from .specfun import bessel_j, bessel_zeros

_DEGENERATE_PAIR = 1e-24  # eta^2 + zeta^2 below this: chi is orientation-independent


@dataclass(frozen=True)
class LisResponse:
    """Surface response B in m^2 and its normalized form B / (pi R^2)."""

    value: float
    normalized: float


@dataclass(frozen=True)
class EffectiveChannel:
    """Unit-modulus phase factor and response; their product is the
    matched-filter effective channel in m^2."""

    phase: complex
    response: LisResponse

    @property
    def sigma(self) -> complex:
        return self.phase * self.response.value


def normalized_response(radius: float, kappa: float, chi):
    """Normalized response 2 J1(u)/u with u = R kappa chi; equals 1 at chi=0.

    Accepts scalar or array chi.  Signed: the response oscillates around zero.
    """
    u = np.asarray(radius * kappa * chi, dtype=np.float64)
    scalar = u.ndim == 0
    u = np.atleast_1d(u)
    out = np.empty_like(u)
    small = np.abs(u) < 1e-6
    if small.any():
        us = u[small]
        out[small] = 1.0 - us * us / 8.0
    if (~small).any():
        ub = u[~small]
        out[~small] = 2.0 * bessel_j(1, ub) / ub
    return float(out[0]) if scalar else out


def lis_response(radius: float, kappa: float, chi: float) -> LisResponse:
    """Closed-form response of a circular surface of the given radius."""
    if radius <= 0.0 or kappa <= 0.0:
        raise ValueError("radius and wavenumber must be positive")
    if chi < 0.0:
        raise ValueError("chi must be >= 0")
    btilde = normalized_response(radius, kappa, chi)
    gain = math.pi * radius * radius
    return LisResponse(gain * btilde, btilde)


def effective_channel(
    user_a: User, user_b: User, surface: Surface, kappa: float
) -> EffectiveChannel:
    """Effective channel of a pair: phase factor times closed-form response.

    The pair coefficients are evaluated in the surface's rotated frame; for
    user_a == user_b this reduces to the array gain pi R^2.
    """
    pair = pair_coeffs(user_a, user_b, surface)
    da = math.dist(user_a.position, surface.center)
    db = math.dist(user_b.position, surface.center)
    if da == 0.0 or db == 0.0:
        raise ValueError("user coincides with surface center")
    phase = np.exp(1j * (kappa * (da - db) + user_a.phase - user_b.phase))
    return EffectiveChannel(complex(phase), lis_response(surface.radius, kappa, pair.chi))


def quadrature_oracle(
    user_a: User,
    user_b: User,
    surface: Surface,
    kappa: float,
    n_radial: int = 512,
    n_angular: int = 512,
) -> complex:
    """Numerically integrate the conjugated field product over the disc.

    Uses the planar-wave phase model directly (distance-to-reference-line
    times kappa), a polar midpoint rule with radial weight r, and none of the
    closed forms above; serves as the independent oracle for
    `effective_channel`.  Converges for R*kappa*chi up to roughly half the
    angular resolution.
    """
    if n_radial < 64 or n_angular < 64:
        raise ValueError("quadrature resolution must be at least 64 x 64")
    r_step = surface.radius / n_radial
    a_step = 2.0 * math.pi / n_angular
    r = (np.arange(n_radial) + 0.5) * r_step
    ang = (np.arange(n_angular) + 0.5) * a_step
    x = np.outer(r, np.cos(ang))
    y = np.outer(r, np.sin(ang))

    def field(user: User) -> np.ndarray:
        px, py, pz = rotate_into_surface(user, surface)
        d = math.sqrt(px * px + py * py + pz * pz)
        if d == 0.0:
            raise ValueError("user coincides with surface center")
        # planar-wave phase: kappa * (d + y*uy - x*ux) + original phase
        ph = kappa * (d + y * (py / d) - x * (px / d)) + user.phase
        return np.exp(-1j * ph)

    integrand = np.conj(field(user_a)) * field(user_b) * r[:, None]
    return complex(integrand.sum() * r_step * a_step)


def _wrap_angle(theta: float) -> float:
    return (theta + math.pi) % (2.0 * math.pi) - math.pi


def stationary_orientations(pair: PairCoeffs) -> list[float]:
    """The four orientations (pi/2 apart) where d/dtheta of eta(theta)^2
    vanishes; two are minima (chi = |xi|) and two maxima (chi = varpi)."""
    base = 0.5 * math.atan2(2.0 * pair.eta * pair.zeta, pair.eta**2 - pair.zeta**2)
    return [_wrap_angle(base + n * math.pi / 2.0) for n in range(4)]


def min_normalized_response(
    pair: PairCoeffs, radius: float, kappa: float
) -> tuple[float, float]:
    """Orientation minimizing |B~| for a pair, and the achieved |B~|.

    chi(theta) sweeps [|xi|, varpi]; if some zero j_{1,n}/(R kappa) lies in
    that range the response is nulled exactly (smallest such n is used to
    keep arguments small), otherwise the better of the two endpoint
    orientations is returned.
    """
    if radius <= 0.0 or kappa <= 0.0:
        raise ValueError("radius and wavenumber must be positive")
    s = pair.eta**2 + pair.zeta**2
    lo = abs(pair.xi)
    if s < _DEGENERATE_PAIR:
        # chi does not depend on orientation
        return 0.0, abs(normalized_response(radius, kappa, lo))
    hi = pair.varpi
    theta_peak = math.atan2(pair.zeta, pair.eta)  # chi(theta_peak) = varpi

    target = _smallest_zero_in(radius * kappa * lo, radius * kappa * hi)
    if target is not None:
        chi_target = target / (radius * kappa)
        ratio = min(max((chi_target**2 - pair.xi**2) / s, 0.0), 1.0)
        theta = _wrap_angle(theta_peak + math.acos(math.sqrt(ratio)))
        if abs(chi_of_orientation(pair, theta) - chi_target) > 1e-9 * max(1.0, chi_target):
            # analytic root failed (extreme cancellation); bracket on the
            # monotone quarter-period between the stationary points
            theta = _wrap_angle(
                brentq(
                    lambda t: chi_of_orientation(pair, t) - chi_target,
                    theta_peak,
                    theta_peak + math.pi / 2.0,
                    xtol=1e-14,
                )
            )
        achieved = abs(normalized_response(radius, kappa, chi_of_orientation(pair, theta)))
        return theta, achieved

    b_lo = abs(normalized_response(radius, kappa, lo))
    b_hi = abs(normalized_response(radius, kappa, hi))
    if b_lo <= b_hi:
        return _wrap_angle(theta_peak + math.pi / 2.0), b_lo
    return _wrap_angle(theta_peak), b_hi


def _smallest_zero_in(u_lo: float, u_hi: float) -> float | None:
    # smallest zero of J1 inside [u_lo, u_hi], or None
    if u_hi < 2.0:  # j_{1,1} ~ 3.83
        return None
    count = max(8, int(u_hi / math.pi) + 2)
    zeros = bessel_zeros(1, count)
    idx = int(np.searchsorted(zeros, u_lo))
    if idx < zeros.size and zeros[idx] <= u_hi:
        return float(zeros[idx])
    return None


def ricean_interference(
    user_k: User, user_k2: User, surface: Surface, kappa: float
) -> float:
    """Expected interference power between two Ricean-faded users.

    Evaluates the closed approximation combining the LoS response at the pair
    separation chi, the per-user responses at their in-plane fractions iota,
    and the scattered-path constant (pi^2 R^2 / 4)(pi^2 R^2 + 1).
    """
    ga, gb = user_k.ricean_factor, user_k2.ricean_factor
    if ga < 0.0 or gb < 0.0:
        raise ValueError("Ricean factors must be >= 0")
    if not (math.isfinite(ga) and math.isfinite(gb)):
        raise ValueError("Ricean interference needs finite Ricean factors")
    pair = pair_coeffs(user_k, user_k2, surface)
    iota_a = direction_cosines(user_k, surface).iota
    iota_b = direction_cosines(user_k2, surface).iota
    r2 = math.pi * surface.radius**2
    b_chi = lis_response(surface.radius, kappa, pair.chi).value
    b_ia = lis_response(surface.radius, kappa, iota_a).value
    b_ib = lis_response(surface.radius, kappa, iota_b).value
    total = (
        ga * gb * b_chi**2
        + ga * b_ia**2
        + gb * b_ib**2
        + math.sqrt(ga * gb) * math.pi * r2 * b_chi
        + 0.25 * math.pi * r2 * (math.pi * r2 + 1.0)
    )
    return total / ((1.0 + ga) * (1.0 + gb))
