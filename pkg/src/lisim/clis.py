"""Sum-SE maximization for a centralized surface by exhaustive search.

The full search sweeps a wavenumber-by-orientation lattice; the reduced
search fixes the wavenumber and sweeps orientation only.  Each normalized
response is computed once per lattice point; with K users that is
K(K-1)/2 evaluations per point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import normalized_response
from .scene import Surface, User, pair_coeffs
from .se import LinkBudget, SeReport, se_clis, se_report


@dataclass(frozen=True)
class SearchGrid:
    """Lattice over wavenumber (rad/m) and orientation (rad)."""

    kappa_min: float
    kappa_max: float
    delta_kappa: float
    delta_theta: float = 2.0 * math.pi / 720.0

    def __post_init__(self):
        if self.kappa_min <= 0.0 or self.kappa_max < self.kappa_min:
            raise ValueError("need 0 < kappa_min <= kappa_max")
        if self.delta_kappa <= 0.0 or self.delta_theta <= 0.0:
            raise ValueError("grid steps must be positive")

    def kappa_values(self) -> np.ndarray:
        count = int(math.floor((self.kappa_max - self.kappa_min) / self.delta_kappa + 1e-9)) + 1
        return self.kappa_min + self.delta_kappa * np.arange(count)

    def theta_values(self) -> np.ndarray:
        count = max(1, round(2.0 * math.pi / self.delta_theta))
        return -math.pi + self.delta_theta * np.arange(count)


def _sum_se_over_thetas(
    users: Sequence[User],
    surface: Surface,
    kappa: float,
    thetas: np.ndarray,
    budget: LinkBudget,
) -> np.ndarray:
    """Sum of per-user SE at each orientation in `thetas` (vectorized)."""
    n = len(users)
    base = surface.with_orientation(0.0)
    dists = np.array([math.dist(u.position, surface.center) for u in users])
    powers = np.array([u.power for u in users])
    pl = (1.0 / (2.0 * kappa * dists)) ** 2
    gain = math.pi * surface.radius**2
    cos_t, sin_t = np.cos(thetas), np.sin(thetas)
    interference = np.zeros((n, thetas.size))
    for a in range(n):
        for b in range(a + 1, n):
            pc = pair_coeffs(users[a], users[b], base)
            eta_t = pc.eta * cos_t + pc.zeta * sin_t
            bt2 = normalized_response(
                surface.radius, kappa, np.hypot(pc.xi, eta_t)
            ) ** 2
            interference[a] += powers[b] * pl[b] * bt2
            interference[b] += powers[a] * pl[a] * bt2
    sinr = (powers * pl)[:, None] / (budget.sigma2 / gain + interference)
    return np.log2(1.0 + sinr).sum(axis=0)


def sum_se_clis(
    users: Sequence[User],
    surface: Surface,
    kappa: float,
    budget: LinkBudget,
    theta: float | None = None,
) -> float:
    """Sum SE at one orientation (defaults to the surface's own)."""
    t = surface.orientation if theta is None else theta
    return float(
        _sum_se_over_thetas(users, surface, kappa, np.array([t]), budget)[0]
    )


def maximize_sum_se_full(
    users: Sequence[User],
    surface: Surface,
    grid: SearchGrid,
    budget: LinkBudget,
) -> tuple[float, float, SeReport]:
    """Exhaustive sum-SE maximization over the kappa x theta lattice.

    Ties break toward smaller theta, then smaller kappa.  Returns the
    maximizing pair and the per-user SE report at the optimum.
    """
    if not users:
        raise ValueError("need at least one user")
    thetas = grid.theta_values()
    best = (-math.inf, math.inf, math.inf)  # (sum, theta, kappa)
    for kappa in grid.kappa_values():
        sums = _sum_se_over_thetas(users, surface, kappa, thetas, budget)
        i = int(np.argmax(sums))  # first occurrence = smallest theta
        cand = (float(sums[i]), float(thetas[i]), float(kappa))
        if cand[0] > best[0] or (
            cand[0] == best[0] and (cand[1], cand[2]) < (best[1], best[2])
        ):
            best = cand
    k_star, t_star = best[2], best[1]
    oriented = surface.with_orientation(t_star)
    report = se_report(
        [se_clis(k, users, oriented, k_star, budget) for k in range(len(users))]
    )
    return k_star, t_star, report


def maximize_sum_se_theta(
    users: Sequence[User],
    surface: Surface,
    kappa_min: float,
    delta_theta: float,
    budget: LinkBudget,
) -> tuple[float, SeReport]:
    """Orientation-only exhaustive search at a fixed wavenumber."""
    grid = SearchGrid(kappa_min, kappa_min, 1.0, delta_theta)
    _, t_star, report = maximize_sum_se_full(users, surface, grid, budget)
    return t_star, report
