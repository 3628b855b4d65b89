"""Spectral efficiency and SINR under matched filtering.

Centralized and distributed layouts, pure LoS and Ricean fading, the
large-surface/high-frequency upper bound, and the power-control-scaled SINR.
All formulas take per-user transmit powers from the `User` records and the
noise variance from a `LinkBudget`; only the ratio p / sigma^2 matters for
the resulting SINRs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import channel
from .scene import Surface, User, pair_coeffs, path_loss


@dataclass(frozen=True)
class LinkBudget:
    """Default per-user transmit power p (watts) and noise variance sigma^2.

    The harness assigns `p` to every user it creates (equal powers by
    default); per-user overrides go through `User.power`.
    """

    p: float
    sigma2: float

    def __post_init__(self):
        if self.p <= 0.0 or self.sigma2 <= 0.0:
            raise ValueError("power and noise variance must be positive")

    @property
    def rho(self) -> float:
        return self.p / self.sigma2

    @classmethod
    def from_db(cls, rho_db: float, sigma2_dbm_hz: float = -174.0) -> "LinkBudget":
        """Build from the transmit-power-to-noise ratio in dB and the noise
        spectral density in dBm/Hz."""
        sigma2 = 10.0 ** ((sigma2_dbm_hz - 30.0) / 10.0)
        return cls(sigma2 * 10.0 ** (rho_db / 10.0), sigma2)


@dataclass(frozen=True)
class SeReport:
    """Per-user SE values with their sum and minimum (bits/s/Hz)."""

    per_user: tuple[float, ...]
    sum: float = field(init=False)
    min: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "sum", float(np.sum(self.per_user)))
        object.__setattr__(self, "min", float(np.min(self.per_user)) if self.per_user else 0.0)


def se_report(per_user: Sequence[float]) -> SeReport:
    return SeReport(tuple(float(v) for v in per_user))


def se_general(
    k: int, users: Sequence[User], surface: Surface, kappa: float, budget: LinkBudget
) -> float:
    """Achievable SE of user k from the complex effective channels.

    This route goes through the full phase-factor-times-response product and
    is kept independent of `se_clis` (which uses the normalized response) so
    the two can cross-check each other.
    """
    me = users[k]
    sig_kk = channel.effective_channel(me, me, surface, kappa).sigma.real
    pl_k = path_loss(math.dist(me.position, surface.center), kappa)
    interference = 0.0
    for i, other in enumerate(users):
        if i == k:
            continue
        sig = channel.effective_channel(me, other, surface, kappa).sigma
        pl_o = path_loss(math.dist(other.position, surface.center), kappa)
        interference += other.power * pl_o * abs(sig) ** 2
    num = me.power * pl_k * sig_kk**2
    den = sig_kk * budget.sigma2 + interference
    return math.log2(1.0 + num / den)


def _se_surface(
    k: int, users: Sequence[User], surface: Surface, kappa: float, budget: LinkBudget
) -> float:
    # normalized-response form shared by the centralized surface and the
    # distributed units
    me = users[k]
    gain = math.pi * surface.radius**2
    pl_k = path_loss(math.dist(me.position, surface.center), kappa)
    interference = 0.0
    for i, other in enumerate(users):
        if i == k:
            continue
        bt = channel.normalized_response(
            surface.radius, kappa, pair_coeffs(me, other, surface).chi
        )
        pl_o = path_loss(math.dist(other.position, surface.center), kappa)
        interference += other.power * pl_o * bt * bt
    return math.log2(1.0 + me.power * pl_k / (budget.sigma2 / gain + interference))


def se_clis(
    k: int, users: Sequence[User], surface: Surface, kappa: float, budget: LinkBudget
) -> float:
    """Achievable SE of user k on a centralized surface (LoS), using the
    normalized response at the pair separations in the surface frame."""
    return _se_surface(k, users, surface, kappa, budget)


def se_upper_bound(
    k: int, users: Sequence[User], surface: Surface, kappa: float, budget: LinkBudget
) -> float:
    """Interference-free SE bound log2(1 + (p/sigma^2) pi R^2 PL_k)."""
    me = users[k]
    pl_k = path_loss(math.dist(me.position, surface.center), kappa)
    gain = math.pi * surface.radius**2
    return math.log2(1.0 + me.power / budget.sigma2 * gain * pl_k)


def se_ricean(
    k: int, users: Sequence[User], surface: Surface, kappa: float, budget: LinkBudget
) -> float:
    """Achievable SE of user k under Ricean fading (closed approximation)."""
    me = users[k]
    gamma_k = me.ricean_factor
    if not math.isfinite(gamma_k):
        raise ValueError("se_ricean needs finite Ricean factors; use se_clis for LoS")
    gain = math.pi * surface.radius**2
    pl_k = path_loss(math.dist(me.position, surface.center), kappa)
    interference = 0.0
    for i, other in enumerate(users):
        if i == k:
            continue
        pl_o = path_loss(math.dist(other.position, surface.center), kappa)
        interference += other.power * pl_o * channel.ricean_interference(
            me, other, surface, kappa
        )
    num = me.power * pl_k * gain * (gain + (1.0 + gamma_k) ** -2)
    den = gain * budget.sigma2 + interference
    return math.log2(1.0 + num / den)


def se_dlis(
    k: int, users: Sequence[User], unit: Surface, kappa: float, budget: LinkBudget
) -> float:
    """Achievable SE of user k at a distributed unit, with per-unit path
    losses and pair separations in the unit's rotated frame."""
    return _se_surface(k, users, unit, kappa, budget)


def dlis_link_matrices(
    unit_of_user: Sequence[int],
    users: Sequence[User],
    units: Sequence[Surface],
    kappa: float,
    budget: LinkBudget,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Link gains of an assigned distributed layout.

    Returns (signal, cross, noise): signal[k] = p_k PL_{k,m_k};
    cross[k, k'] = p_k' PL_{k',m_k} * Btilde^2 at the serving unit of k
    (zero diagonal); noise[k] = sigma^2 / (pi R_{m_k}^2).  SINR_k(tau) =
    tau_k signal[k] / (noise[k] + sum_{k'} cross[k,k'] tau_k').
    """
    n = len(unit_of_user)
    signal = np.zeros(n)
    cross = np.zeros((n, n))
    noise = np.zeros(n)
    for k, m in enumerate(unit_of_user):
        unit = units[m]
        signal[k] = users[k].power * path_loss(
            math.dist(users[k].position, unit.center), kappa
        )
        noise[k] = budget.sigma2 / (math.pi * unit.radius**2)
        for i, other in enumerate(users):
            if i == k:
                continue
            bt = channel.normalized_response(
                unit.radius, kappa, pair_coeffs(users[k], other, unit).chi
            )
            pl_o = path_loss(math.dist(other.position, unit.center), kappa)
            cross[k, i] = other.power * pl_o * bt * bt
    return signal, cross, noise


def sinr_with_power_control(
    k: int,
    unit_of_user: Sequence[int],
    users: Sequence[User],
    units: Sequence[Surface],
    kappa: float,
    budget: LinkBudget,
    tau: Sequence[float],
) -> float:
    """SINR of user k at its assigned unit with power coefficients tau."""
    tau = np.asarray(tau, dtype=np.float64)
    signal, cross, noise = dlis_link_matrices(unit_of_user, users, units, kappa, budget)
    return float(tau[k] * signal[k] / (noise[k] + cross[k] @ tau))


def se_with_power_control(
    unit_of_user: Sequence[int],
    users: Sequence[User],
    units: Sequence[Surface],
    kappa: float,
    budget: LinkBudget,
    tau: Sequence[float] | None = None,
) -> SeReport:
    """Per-user SE of an assigned distributed layout (tau defaults to 1)."""
    n = len(unit_of_user)
    t = np.ones(n) if tau is None else np.asarray(tau, dtype=np.float64)
    signal, cross, noise = dlis_link_matrices(unit_of_user, users, units, kappa, budget)
    sinr = t * signal / (noise + cross @ t)
    return se_report(np.log2(1.0 + sinr))
