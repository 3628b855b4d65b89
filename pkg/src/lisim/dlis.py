"""Resource allocation for distributed surface units.

User association by reweighted l1 relaxation of the binary selection matrix
(iterated LPs with weights 1/(s + rho)), per-unit orientation control via the
closed-form minimum of the normalized response, a per-unit exhaustive
orientation search used as its oracle, and max-min power control by bisection
over a quasi-linear feasibility problem solved with Gaussian elimination.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from .channel import min_normalized_response, normalized_response
from .scene import Surface, User, pair_coeffs
from .se import LinkBudget, dlis_link_matrices


@dataclass(frozen=True)
class SelectionMatrix:
    """Binary K x M user-to-unit selection: every row sums to 1 (each user is
    served), every column sums to 0 or 1 (a unit serves at most one user)."""

    entries: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.entries, dtype=np.int64)
        object.__setattr__(self, "entries", s)
        if s.ndim != 2:
            raise ValueError("selection matrix must be 2-D")
        if not np.isin(s, (0, 1)).all():
            raise ValueError("selection entries must be 0 or 1")
        if not (s.sum(axis=1) == 1).all():
            raise ValueError("every user must be served by exactly one unit")
        if not (s.sum(axis=0) <= 1).all():
            raise ValueError("a unit may serve at most one user")

    def assignment(self) -> "Assignment":
        return Assignment(tuple(int(m) for m in np.argmax(self.entries, axis=1)))


@dataclass(frozen=True)
class Assignment:
    """Injective user -> unit map; entry k is the unit serving user k."""

    unit_of_user: tuple[int, ...]

    def __post_init__(self):
        if len(set(self.unit_of_user)) != len(self.unit_of_user):
            raise ValueError("assignment must map users to distinct units")

    def __len__(self) -> int:
        return len(self.unit_of_user)

    def __getitem__(self, k: int) -> int:
        return self.unit_of_user[k]


@dataclass(frozen=True)
class RelaxedSelection:
    """One reweighting iterate: relaxed entries in [0,1] and the weights
    1/(entries + stability) that the next LP will use."""

    entries: np.ndarray
    stability: float
    weights: np.ndarray = field(init=False)

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=np.float64)
        if (e < -1e-9).any() or (e > 1.0 + 1e-9).any():
            raise ValueError("relaxed entries must lie in [0, 1]")
        if self.stability <= 0.0:
            raise ValueError("stability must be positive")
        object.__setattr__(self, "entries", np.clip(e, 0.0, 1.0))
        object.__setattr__(self, "weights", 1.0 / (self.entries + self.stability))


@dataclass(frozen=True)
class PowerCoeffs:
    """Power-control result: coefficients in [0,1]^K, the achieved min-SINR
    t, and the bisection trace as (t, feasible) pairs."""

    tau: np.ndarray
    t: float
    trace: tuple[tuple[float, bool], ...]


@dataclass(frozen=True)
class LpResult:
    status: str  # "optimal" | "infeasible"
    x: np.ndarray | None
    objective: float | None


def lp_solve(
    c: np.ndarray,
    a_ub: np.ndarray | None = None,
    b_ub: np.ndarray | None = None,
    a_eq: np.ndarray | None = None,
    b_eq: np.ndarray | None = None,
    bounds: Sequence[tuple[float | None, float | None]] | None = None,
) -> LpResult:
    """Maximize c @ x subject to a_ub @ x <= b_ub, a_eq @ x == b_eq, bounds.

    Dense instances only (a few thousand variables).  Infeasible problems
    yield an explicit result; unboundedness cannot occur with box bounds and
    raises if the solver reports it anyway.
    """
    res = linprog(
        -np.asarray(c, dtype=np.float64),
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=bounds,
        method="highs",
    )
    if res.status == 2:
        return LpResult("infeasible", None, None)
    if res.status == 3:
        raise ArithmeticError("LP reported unbounded; box bounds should prevent this")
    if not res.success:
        raise ArithmeticError(f"LP solver failed: {res.message}")
    return LpResult("optimal", np.asarray(res.x), -float(res.fun))


def _association_lp(
    pl: np.ndarray, weights: np.ndarray, objective: str
) -> np.ndarray:
    """One LP of the reweighted relaxation; returns the relaxed entries."""
    n_users, n_units = pl.shape
    nv = n_users * n_units
    a_eq = np.zeros((n_users, nv))
    for k in range(n_users):
        a_eq[k, k * n_units : (k + 1) * n_units] = weights[k]
    a_col = np.zeros((n_units, nv))
    for m in range(n_units):
        a_col[m, m::n_units] = weights[:, m]
    b_eq = np.ones(n_users)
    b_col = np.ones(n_units)
    if objective == "sum":
        c = (weights * pl).ravel()
        res = lp_solve(c, a_col, b_col, a_eq, b_eq, bounds=[(0.0, 1.0)] * nv)
        if res.status != "optimal":
            raise ArithmeticError("association LP infeasible")
        return res.x.reshape(n_users, n_units)
    if objective == "max-min":
        # epigraph variable t: each user's weighted served path loss >= t
        c = np.zeros(nv + 1)
        c[-1] = 1.0
        rows = np.zeros((n_users, nv + 1))
        for k in range(n_users):
            rows[k, k * n_units : (k + 1) * n_units] = -(weights[k] * pl[k])
            rows[k, -1] = 1.0
        a_ub = np.vstack([rows, np.hstack([a_col, np.zeros((n_units, 1))])])
        b_ub = np.concatenate([np.zeros(n_users), b_col])
        a_eq2 = np.hstack([a_eq, np.zeros((n_users, 1))])
        res = lp_solve(
            c, a_ub, b_ub, a_eq2, b_eq, bounds=[(0.0, 1.0)] * nv + [(0.0, None)]
        )
        if res.status != "optimal":
            raise ArithmeticError("association LP infeasible")
        return res.x[:-1].reshape(n_users, n_units)
    raise ValueError(f"unknown association objective {objective!r}")


def lua_relaxation(
    pl_matrix: np.ndarray,
    objective: str = "sum",
    max_iter: int = 20,
    rho: float = 1e-5,
) -> list[RelaxedSelection]:
    """Run the reweighted iterations and return every iterate."""
    pl = np.asarray(pl_matrix, dtype=np.float64)
    if pl.ndim != 2 or (pl <= 0.0).any():
        raise ValueError("path-loss matrix must be 2-D and positive")
    n_users, n_units = pl.shape
    if n_units < n_users:
        raise ValueError("need at least as many units as users")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    weights = np.ones_like(pl)
    iterates: list[RelaxedSelection] = []
    for it in range(max_iter):
        try:
            entries = _association_lp(pl, weights, objective)
        except ArithmeticError as exc:
            raise ArithmeticError(f"association LP failed at iteration {it}") from exc
        state = RelaxedSelection(entries, rho)
        iterates.append(state)
        weights = state.weights
    return iterates


def greedy_assignment(pl_matrix: np.ndarray) -> Assignment:
    """Assign every user to its best still-free unit, greedily by descending
    path loss; the 'nearest' association baseline."""
    pl = np.asarray(pl_matrix, dtype=np.float64)
    return Assignment(tuple(_repair([None] * pl.shape[0], pl)))


def _repair(chosen: list[int | None], pl: np.ndarray) -> list[int]:
    """Resolve column conflicts and unserved users greedily by path loss."""
    n_users, n_units = pl.shape
    taken: dict[int, int] = {}
    pool: list[int] = []
    for k, m in enumerate(chosen):
        if m is None:
            pool.append(k)
        elif m in taken:
            # keep the stronger user on the contested unit
            rival = taken[m]
            if pl[k, m] > pl[rival, m]:
                taken[m] = k
                pool.append(rival)
            else:
                pool.append(k)
        else:
            taken[m] = k
    result: list[int | None] = [None] * n_users
    for m, k in taken.items():
        result[k] = m
    free = sorted(set(range(n_units)) - set(taken))
    while pool:
        best = max(
            ((pl[k, m], -k, -m, k, m) for k in pool for m in free),
        )
        _, _, _, k, m = best
        result[k] = m
        pool.remove(k)
        free.remove(m)
    return result  # type: ignore[return-value]


def lua(
    pl_matrix: np.ndarray,
    objective: str = "sum",
    max_iter: int = 20,
    tol: float = 0.5,
    rho: float = 1e-5,
) -> SelectionMatrix:
    """Large-scale-fading user association by reweighted l1 relaxation.

    Iterates the weighted LP `max_iter` times, thresholds entries >= tol to
    one, and repairs any constraint violations greedily by descending path
    loss (displaced users take their best free unit).
    """
    iterates = lua_relaxation(pl_matrix, objective, max_iter, rho)
    pl = np.asarray(pl_matrix, dtype=np.float64)
    final = iterates[-1].entries
    polarization = float(np.max(np.minimum(final, 1.0 - final)))
    if polarization > 1e-3:
        history = [float(np.max(np.minimum(s.entries, 1.0 - s.entries))) for s in iterates]
        warnings.warn(
            f"association entries did not fully polarize (residual {polarization:.2e}; "
            f"per-iteration residuals {history})",
            RuntimeWarning,
        )
    chosen: list[int | None] = []
    for k in range(pl.shape[0]):
        above = np.flatnonzero(final[k] >= tol)
        if above.size == 0:
            chosen.append(None)
        else:
            # prefer the largest relaxed entry, then the better path loss
            order = sorted(above, key=lambda m: (-final[k, m], -pl[k, m], m))
            chosen.append(int(order[0]))
    repaired = _repair(chosen, pl)
    entries = np.zeros_like(pl, dtype=np.int64)
    for k, m in enumerate(repaired):
        entries[k, m] = 1
    return SelectionMatrix(entries)


def orientation_control(
    assignment: Assignment,
    users: Sequence[User],
    units: Sequence[Surface],
    kappa: float,
) -> np.ndarray:
    """Closed-form orientation control: per serving unit, null (or minimize)
    the normalized response toward the interferer with the smallest pair
    separation at zero orientation.  Returns one angle per unit; unassigned
    units stay at zero.
    """
    thetas = np.zeros(len(units))
    if len(users) < 2:
        return thetas
    for k, m in enumerate(assignment.unit_of_user):
        frame = units[m].with_orientation(0.0)
        target = None
        target_chi = math.inf
        for i in range(len(users)):
            if i == k:
                continue
            pc = pair_coeffs(users[k], users[i], frame)
            if pc.chi < target_chi:
                target_chi = pc.chi
                target = pc
        theta, _ = min_normalized_response(target, units[m].radius, kappa)
        thetas[m] = theta
    return thetas


def orientation_control_exhaustive(
    assignment: Assignment,
    users: Sequence[User],
    units: Sequence[Surface],
    kappa: float,
    delta_theta: float = 2.0 * math.pi / 720.0,
) -> np.ndarray:
    """Per-unit grid search maximizing the served user's SE.

    At fixed powers the orientation enters only through the total interference
    at the unit, so maximizing SE is minimizing the weighted sum of squared
    normalized responses; no noise level is needed.
    """
    if delta_theta <= 0.0:
        raise ValueError("delta_theta must be positive")
    count = max(1, round(2.0 * math.pi / delta_theta))
    grid = -math.pi + delta_theta * np.arange(count)
    cos_t, sin_t = np.cos(grid), np.sin(grid)
    thetas = np.zeros(len(units))
    for k, m in enumerate(assignment.unit_of_user):
        frame = units[m].with_orientation(0.0)
        total = np.zeros(count)
        any_interferer = False
        for i in range(len(users)):
            if i == k:
                continue
            any_interferer = True
            pc = pair_coeffs(users[k], users[i], frame)
            eta_t = pc.eta * cos_t + pc.zeta * sin_t
            bt2 = normalized_response(units[m].radius, kappa, np.hypot(pc.xi, eta_t)) ** 2
            pl_i = (1.0 / (2.0 * kappa * math.dist(users[i].position, units[m].center))) ** 2
            total += users[i].power * pl_i * bt2
        if any_interferer:
            thetas[m] = float(grid[int(np.argmin(total))])
    return thetas


def max_min_power_control(
    assignment: Assignment,
    orientations: Sequence[float],
    users: Sequence[User],
    units: Sequence[Surface],
    kappa: float,
    budget: LinkBudget,
    eps: float = 1e-4,
) -> PowerCoeffs:
    """Max-min power control by bisection over the quasi-linear problem.

    At each candidate min-SINR t the balancing system SINR_k(tau) = t is
    solved by Gaussian elimination; t is feasible iff the solution lies in
    [0,1]^K.  `eps` is the bisection tolerance relative to the initial upper
    bound (the best interference-free SINR at full power).
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    oriented = [u.with_orientation(float(t)) for u, t in zip(units, orientations)]
    signal, cross, noise = dlis_link_matrices(
        assignment.unit_of_user, users, oriented, kappa, budget
    )
    n = len(users)

    def solve_at(t: float) -> np.ndarray | None:
        try:
            tau = np.linalg.solve(np.diag(signal) - t * cross, t * noise)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(tau)):
            return None
        if (tau < -1e-12).any() or (tau > 1.0 + 1e-12).any():
            return None
        return np.clip(tau, 0.0, 1.0)

    t_hi = float(np.max(signal / noise))  # upper-bounds any feasible t
    t_lo = 0.0
    tau_best = np.zeros(n)
    trace: list[tuple[float, bool]] = []
    tol = eps * t_hi
    while t_hi - t_lo > tol:
        t_mid = 0.5 * (t_lo + t_hi)
        tau = solve_at(t_mid)
        trace.append((t_mid, tau is not None))
        if tau is not None:
            t_lo = t_mid
            tau_best = tau
        else:
            t_hi = t_mid
    return PowerCoeffs(tau_best, t_lo, tuple(trace))
