"""Monte-Carlo experiment engine.

Random user drops over a square service area, centralized-vs-distributed
layouts, empirical CDFs, and the experiment presets driven by a single
`ScenarioConfig`.  Every drop gets its own RNG sub-stream spawned from the
master seed, so results are bit-identical regardless of execution order or
thread count.

Geometry convention: surfaces lie on the z = 0 plane of their local frame and
users sit at a fixed standoff height above it (default 25 m), uniform over
the square.  Absolute SE levels depend on this choice; orderings and trends
are what the presets are meant to reproduce.
"""

from __future__ import annotations

import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from typing import Callable, Sequence

import numpy as np

from . import dlis as dlis_mod
from .channel import normalized_response
from .scene import Surface, User, check_far_field, path_loss
from .se import LinkBudget, se_clis, se_ricean, se_upper_bound, se_with_power_control

C_LIGHT = 299792458.0


class ConfigError(ValueError):
    """Invalid scenario configuration; carries the offending field path."""

    def __init__(self, field_path: str, message: str):
        super().__init__(f"{field_path}: {message}")
        self.field = field_path


class FarFieldWarning(UserWarning):
    """A drop placed users inside the Fraunhofer distance of a surface."""


@dataclass(frozen=True)
class ScenarioConfig:
    """One reproducible experiment.  Fields map to the nested config-file
    sections noted in the comments; all of them have defaults."""

    # top level
    experiment: str = "clis"  # clis | dlis | compare | response
    seed: int = 0
    drops: int = 100
    threads: int = 1
    # scene
    area_side: float = 1000.0
    k_users: int = 10
    m_units: int = 20
    radius: float = 5.0
    unit_radius: float | None = None  # default: equal total area, R/sqrt(M)
    user_height: float = 25.0
    frequency_hz: float = 2e9
    far_field: str = "warn"  # warn | resample | ignore
    # link
    rho_db: float = 100.0
    sigma2_dbm_hz: float = -174.0
    ricean_factor_db: float | None = None  # None: pure LoS
    # algorithms
    association: str = "lua"  # lua | random | nearest
    lua_objective: str = "sum"  # sum | max-min
    oc: bool = False
    oc_mode: str = "closed"  # closed | exhaustive
    pc: bool = False
    order: str = "oc-pc"  # oc-pc | pc-oc
    lua_iters: int = 20
    lua_tol: float = 0.5
    lua_rho: float = 1e-5
    pc_eps: float = 1e-4
    # grid
    delta_theta: float = 2.0 * math.pi / 720.0
    kappa_steps: int = 64
    # sweep
    radius_list: tuple[float, ...] | None = None
    lambda_list: tuple[float, ...] | None = None
    frequencies: tuple[float, ...] = (2e9, 50e9)
    # response
    response_mode: str = "chi"  # chi | radius
    chi_max: float = 0.2
    points: int = 512
    chi: float = 0.0
    radius_max: float | None = None

    _SECTIONS = {
        "": ("experiment", "seed", "drops", "threads"),
        "scene": (
            "area_side",
            "k_users",
            "m_units",
            "radius",
            "unit_radius",
            "user_height",
            "frequency_hz",
            "far_field",
        ),
        "link": ("rho_db", "sigma2_dbm_hz", "ricean_factor_db"),
        "algorithms": (
            "association",
            "lua_objective",
            "oc",
            "oc_mode",
            "pc",
            "order",
            "lua_iters",
            "lua_tol",
            "lua_rho",
            "pc_eps",
        ),
        "grid": ("delta_theta", "kappa_steps"),
        "sweep": ("radius_list", "lambda_list", "frequencies"),
        "response": ("response_mode", "chi_max", "points", "chi", "radius_max"),
    }

    def __post_init__(self):
        self.validate()

    def validate(self):
        def bad(path, msg):
            raise ConfigError(path, msg)

        if self.experiment not in ("clis", "dlis", "compare", "response"):
            bad("experiment", f"unknown experiment {self.experiment!r}")
        if not 0 <= self.seed < 2**64:
            bad("seed", "seed must be a 64-bit non-negative integer")
        if self.drops < 1:
            bad("drops", "need at least one drop")
        if self.threads < 1:
            bad("threads", "thread count must be >= 1")
        if self.area_side <= 0.0:
            bad("scene.area_side", "area side must be positive")
        if self.k_users < 0:
            bad("scene.k_users", "user count must be >= 0")
        if self.radius <= 0.0:
            bad("scene.radius", "radius must be positive")
        if self.unit_radius is not None and self.unit_radius <= 0.0:
            bad("scene.unit_radius", "unit radius must be positive")
        if self.user_height <= 0.0:
            bad("scene.user_height", "user height must be positive")
        if self.frequency_hz <= 0.0:
            bad("scene.frequency_hz", "frequency must be positive")
        if self.far_field not in ("warn", "resample", "ignore"):
            bad("scene.far_field", f"unknown far-field mode {self.far_field!r}")
        if self.ricean_factor_db is not None and not math.isfinite(self.ricean_factor_db):
            bad("link.ricean_factor_db", "Ricean factor must be finite (or null for LoS)")
        if self.association not in ("lua", "random", "nearest"):
            bad("algorithms.association", f"unknown association {self.association!r}")
        if self.lua_objective not in ("sum", "max-min"):
            bad("algorithms.lua_objective", f"unknown objective {self.lua_objective!r}")
        if self.oc_mode not in ("closed", "exhaustive"):
            bad("algorithms.oc_mode", f"unknown orientation mode {self.oc_mode!r}")
        if self.order not in ("oc-pc", "pc-oc"):
            bad("algorithms.order", f"unknown order {self.order!r}")
        if self.lua_iters < 1:
            bad("algorithms.lua_iters", "need at least one iteration")
        if not 0.0 < self.lua_tol <= 1.0:
            bad("algorithms.lua_tol", "rounding threshold must be in (0, 1]")
        if self.lua_rho <= 0.0:
            bad("algorithms.lua_rho", "stability term must be positive")
        if self.pc_eps <= 0.0:
            bad("algorithms.pc_eps", "bisection tolerance must be positive")
        if self.delta_theta <= 0.0 or self.delta_theta > 2.0 * math.pi:
            bad("grid.delta_theta", "orientation step must be in (0, 2*pi]")
        if self.kappa_steps < 1:
            bad("grid.kappa_steps", "need at least one wavenumber step")
        if self.experiment in ("dlis", "compare"):
            if self.m_units < max(1, self.k_users):
                bad("scene.m_units", "need at least as many units as users")
        if self.experiment == "response" and self.response_mode not in ("chi", "radius"):
            bad("response.response_mode", f"unknown mode {self.response_mode!r}")
        if self.response_mode == "radius" and self.radius_max is not None:
            if self.radius_max <= 0.0:
                bad("response.radius_max", "radius_max must be positive")
        if self.points < 2:
            bad("response.points", "need at least two sweep points")

    # -- derived quantities -------------------------------------------------

    @property
    def wavelength(self) -> float:
        return C_LIGHT / self.frequency_hz

    @property
    def kappa(self) -> float:
        return 2.0 * math.pi / self.wavelength

    @property
    def effective_unit_radius(self) -> float:
        """Unit radius; defaults to the equal-total-area rule R / sqrt(M)."""
        if self.unit_radius is not None:
            return self.unit_radius
        return self.radius / math.sqrt(self.m_units)

    def budget(self) -> LinkBudget:
        return LinkBudget.from_db(self.rho_db, self.sigma2_dbm_hz)

    def ricean_factor(self) -> float:
        if self.ricean_factor_db is None:
            return math.inf
        return 10.0 ** (self.ricean_factor_db / 10.0)

    def central_surface(self) -> Surface:
        return Surface((self.area_side / 2.0, self.area_side / 2.0, 0.0), self.radius)

    # -- (de)serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        raw = {f.name: getattr(self, f.name) for f in fields(self)}
        out: dict = {}
        for section, names in self._SECTIONS.items():
            chunk = {}
            for name in names:
                v = raw[name]
                if isinstance(v, tuple):
                    v = list(v)
                chunk[name] = v
            if section:
                out[section] = chunk
            else:
                out.update(chunk)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        if not isinstance(data, dict):
            raise ConfigError("config", "expected a JSON object at the top level")
        known_sections = {s for s in cls._SECTIONS if s}
        kwargs: dict = {}
        for key, value in data.items():
            if key in known_sections:
                if not isinstance(value, dict):
                    raise ConfigError(key, "expected a nested object")
                for name, v in value.items():
                    if name not in cls._SECTIONS[key]:
                        raise ConfigError(f"{key}.{name}", "unknown field")
                    kwargs[name] = v
            elif key in cls._SECTIONS[""]:
                kwargs[key] = value
            else:
                raise ConfigError(key, "unknown field")
        for name in ("radius_list", "lambda_list", "frequencies"):
            if kwargs.get(name) is not None:
                try:
                    kwargs[name] = tuple(float(v) for v in kwargs[name])
                except (TypeError, ValueError):
                    raise ConfigError(f"sweep.{name}", "expected a list of numbers")
        try:
            return cls(**kwargs)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError("config", str(exc))

    @classmethod
    def from_file(cls, path) -> "ScenarioConfig":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError("config", f"cannot read {path}: {exc}")
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON in {path}: {exc}")
        return cls.from_dict(data)


@dataclass(frozen=True)
class CdfSeries:
    """Sorted sample values with empirical CDF ordinates (1/n .. 1)."""

    values: np.ndarray

    @classmethod
    def from_samples(cls, samples) -> "CdfSeries":
        arr = np.sort(np.asarray(samples, dtype=np.float64).ravel())
        if arr.size == 0:
            raise ValueError("CDF needs at least one sample")
        return cls(arr)

    @property
    def ordinates(self) -> np.ndarray:
        n = self.values.size
        return np.arange(1, n + 1) / n

    def percentile(self, q: float) -> float:
        return float(np.quantile(self.values, q))

    @property
    def median(self) -> float:
        return self.percentile(0.5)

    @property
    def p95_likely(self) -> float:
        """The 95%-likely level: the 5th percentile of the samples."""
        return self.percentile(0.05)


# -- drops ---------------------------------------------------------------


def drop_users(
    config: ScenarioConfig,
    rng: np.random.Generator,
    surfaces: Sequence[Surface] = (),
) -> list[User]:
    """Draw the configured number of users uniformly over the square.

    Phases are uniform in [-pi, pi].  Far-field handling against `surfaces`
    follows config.far_field: "warn" keeps violating users and emits a
    FarFieldWarning, "resample" redraws them (a config error after 1000
    consecutive rejections), "ignore" does nothing.
    """
    budget = config.budget()
    gamma = config.ricean_factor()
    users: list[User] = []
    violations = 0
    rejections = 0
    while len(users) < config.k_users:
        x, y = rng.uniform(0.0, config.area_side, size=2)
        phase = rng.uniform(-math.pi, math.pi)
        user = User((float(x), float(y), config.user_height), budget.p, float(phase), gamma)
        far = all(check_far_field(user, s, config.wavelength) for s in surfaces)
        if not far and config.far_field == "resample":
            rejections += 1
            if rejections >= 1000:
                raise ConfigError(
                    "scene.far_field",
                    "1000 consecutive rejections: the region lies inside the "
                    "Fraunhofer distance of a surface",
                )
            continue
        rejections = 0
        if not far:
            violations += 1
        users.append(user)
    if violations and config.far_field == "warn":
        warnings.warn(
            "some users fall inside the Fraunhofer distance; the far-field "
            "path-loss model is extrapolated there",
            FarFieldWarning,
        )
    return users


def drop_units(config: ScenarioConfig, rng: np.random.Generator) -> list[Surface]:
    """Place the configured number of units uniformly over the square."""
    r_d = config.effective_unit_radius
    units = []
    for _ in range(config.m_units):
        x, y = rng.uniform(0.0, config.area_side, size=2)
        units.append(Surface((float(x), float(y), 0.0), r_d))
    return units


def _drop_seeds(config: ScenarioConfig) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(config.seed).spawn(config.drops)


def _run_drops(config: ScenarioConfig, worker: Callable[[int, np.random.Generator], object]) -> list:
    """Run `worker` over all drop indices, optionally on a thread pool;
    results are ordered by drop index either way."""
    seeds = _drop_seeds(config)
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            return list(
                pool.map(lambda i: worker(i, np.random.default_rng(seeds[i])), range(config.drops))
            )
    return [worker(i, np.random.default_rng(seeds[i])) for i in range(config.drops)]


# -- experiments -----------------------------------------------------------


@dataclass(frozen=True)
class ClisResult:
    """Sum-SE curves against the swept quantity, plus per-user samples."""

    sweep_kind: str  # radius | wavelength | none
    values: tuple[float, ...]
    sum_los: np.ndarray  # (n_values, drops)
    sum_upper: np.ndarray
    sum_ricean: np.ndarray | None
    per_user_los: np.ndarray  # (n_values, drops * K)

    def mean_curve(self, which: str) -> np.ndarray:
        return getattr(self, f"sum_{which}").mean(axis=1)

    def cdf_los(self, value_index: int = 0) -> CdfSeries:
        return CdfSeries.from_samples(self.per_user_los[value_index])


def run_clis_experiment(config: ScenarioConfig) -> ClisResult:
    """Sweep radius or wavelength for the centralized layout; per drop and
    sweep value, collect LoS, Ricean and upper-bound sum SE."""
    if config.k_users < 1:
        raise ConfigError("scene.k_users", "need at least one user")
    if config.radius_list and config.lambda_list:
        raise ConfigError("sweep", "sweep either radius or wavelength, not both")
    if config.radius_list:
        kind, values = "radius", tuple(config.radius_list)
    elif config.lambda_list:
        kind, values = "wavelength", tuple(config.lambda_list)
    else:
        kind, values = "none", (config.radius,)
    want_ricean = config.ricean_factor_db is not None
    n_vals, n_users = len(values), config.k_users

    def worker(_i: int, rng: np.random.Generator):
        base = config.central_surface()
        users = drop_users(config, rng, (base,))
        out_los = np.empty(n_vals)
        out_upper = np.empty(n_vals)
        out_ricean = np.empty(n_vals)
        out_per_user = np.empty((n_vals, n_users))
        for vi, v in enumerate(values):
            surface = Surface(base.center, v) if kind == "radius" else base
            kappa = 2.0 * math.pi / v if kind == "wavelength" else config.kappa
            budget = config.budget()
            los = [se_clis(k, users, surface, kappa, budget) for k in range(n_users)]
            upper = [se_upper_bound(k, users, surface, kappa, budget) for k in range(n_users)]
            out_per_user[vi] = los
            out_los[vi] = sum(los)
            out_upper[vi] = sum(upper)
            out_ricean[vi] = (
                sum(se_ricean(k, users, surface, kappa, budget) for k in range(n_users))
                if want_ricean
                else math.nan
            )
        return out_los, out_upper, out_ricean, out_per_user

    results = _run_drops(config, worker)
    sum_los = np.stack([r[0] for r in results], axis=1)
    sum_upper = np.stack([r[1] for r in results], axis=1)
    sum_ricean = np.stack([r[2] for r in results], axis=1) if want_ricean else None
    per_user = np.concatenate([r[3] for r in results], axis=1)
    return ClisResult(kind, values, sum_los, sum_upper, sum_ricean, per_user)


@dataclass(frozen=True)
class Variant:
    """One algorithm combination evaluated on shared drops."""

    label: str
    kind: str = "dlis"  # dlis | clis
    association: str = "lua"
    lua_objective: str = "sum"
    oc: str = "off"  # off | closed | exhaustive
    pc: bool = False
    order: str = "oc-pc"


def variant_from_config(config: ScenarioConfig, label: str = "dlis") -> Variant:
    return Variant(
        label,
        "dlis",
        config.association,
        config.lua_objective,
        config.oc_mode if config.oc else "off",
        config.pc,
        config.order,
    )


@dataclass(frozen=True)
class DlisCurve:
    """Per-user SE samples of one variant across all drops."""

    label: str
    per_user: np.ndarray  # (drops, K)

    @property
    def cdf(self) -> CdfSeries:
        return CdfSeries.from_samples(self.per_user)

    @property
    def mean_sum(self) -> float:
        return float(self.per_user.sum(axis=1).mean())


def _associate(
    variant: Variant,
    pl: np.ndarray,
    perm: np.ndarray,
    config: ScenarioConfig,
) -> dlis_mod.Assignment:
    if variant.association == "lua":
        sel = dlis_mod.lua(
            pl, variant.lua_objective, config.lua_iters, config.lua_tol, config.lua_rho
        )
        return sel.assignment()
    if variant.association == "random":
        return dlis_mod.Assignment(tuple(int(m) for m in perm[: pl.shape[0]]))
    if variant.association == "nearest":
        return dlis_mod.greedy_assignment(pl)
    raise ConfigError("algorithms.association", f"unknown association {variant.association!r}")


def _eval_variant(
    variant: Variant,
    users: list[User],
    units: list[Surface],
    perm: np.ndarray,
    kappa: float,
    config: ScenarioConfig,
) -> np.ndarray:
    budget = config.budget()
    n = len(users)
    if variant.kind == "clis":
        surface = config.central_surface()
        return np.array([se_clis(k, users, surface, kappa, budget) for k in range(n)])
    pl = np.array(
        [
            [path_loss(math.dist(u.position, s.center), kappa) for s in units]
            for u in users
        ]
    )
    assignment = _associate(variant, pl, perm, config)
    orientations = np.zeros(len(units))

    def run_oc():
        if variant.oc == "closed":
            return dlis_mod.orientation_control(assignment, users, units, kappa)
        if variant.oc == "exhaustive":
            return dlis_mod.orientation_control_exhaustive(
                assignment, users, units, kappa, config.delta_theta
            )
        return orientations

    tau = None
    if variant.order == "oc-pc":
        orientations = run_oc()
        if variant.pc:
            tau = dlis_mod.max_min_power_control(
                assignment, orientations, users, units, kappa, budget, config.pc_eps
            ).tau
    else:
        if variant.pc:
            tau = dlis_mod.max_min_power_control(
                assignment, orientations, users, units, kappa, budget, config.pc_eps
            ).tau
        orientations = run_oc()
    oriented = [u.with_orientation(float(t)) for u, t in zip(units, orientations)]
    report = se_with_power_control(
        assignment.unit_of_user, users, oriented, kappa, budget, tau
    )
    return np.asarray(report.per_user)


def run_dlis_experiment(
    config: ScenarioConfig, variants: Sequence[Variant] | None = None
) -> dict[str, DlisCurve]:
    """Evaluate one or more algorithm combinations on shared drops.

    All variants see identical users, unit placements and baseline
    permutations within each drop, so curves are directly comparable.
    """
    if config.k_users < 1:
        raise ConfigError("scene.k_users", "need at least one user")
    if config.m_units < config.k_users:
        raise ConfigError("scene.m_units", "need at least as many units as users")
    if variants is None:
        variants = (variant_from_config(config),)

    def worker(_i: int, rng: np.random.Generator):
        users = drop_users(config, rng, (config.central_surface(),))
        units = drop_units(config, rng)
        perm = rng.permutation(config.m_units)
        return {
            v.label: _eval_variant(v, users, units, perm, config.kappa, config)
            for v in variants
        }

    results = _run_drops(config, worker)
    return {
        v.label: DlisCurve(v.label, np.stack([r[v.label] for r in results]))
        for v in variants
    }


def run_frequency_comparison(
    config: ScenarioConfig, variants: Sequence[Variant] | None = None
) -> dict[str, DlisCurve]:
    """Run identical drops at each configured frequency for the centralized
    and distributed layouts; labels are '<band>GHz_<variant>'."""
    if variants is None:
        variants = (
            Variant("clis", kind="clis"),
            variant_from_config(config, label="dlis"),
        )
    out: dict[str, DlisCurve] = {}
    for freq in config.frequencies:
        sub = replace(config, frequency_hz=freq)
        curves = run_dlis_experiment(sub, variants)
        for label, curve in curves.items():
            out[f"{freq / 1e9:g}GHz_{label}"] = DlisCurve(
                f"{freq / 1e9:g}GHz_{label}", curve.per_user
            )
    return out


def response_sweep(
    kappa: float,
    radius_list: Sequence[float] | None = None,
    chi_max: float = 0.2,
    points: int = 512,
    radius_range: tuple[float, float] | None = None,
    chi: float = 0.0,
) -> dict[str, np.ndarray]:
    """Tables of the effective-channel magnitude.

    With `radius_list`: |Sigma| (m^2) against chi in [0, chi_max], one column
    per radius.  With `radius_range`: the normalized response against radius
    at fixed chi.
    """
    if points < 2:
        raise ValueError("need at least two sweep points")
    if radius_range is not None:
        r_lo, r_hi = radius_range
        if not 0.0 < r_lo < r_hi:
            raise ValueError("radius range must be increasing and positive")
        radii = np.linspace(r_lo, r_hi, points)
        return {
            "radius": radii,
            "normalized_response": np.array(
                [normalized_response(r, kappa, chi) for r in radii]
            ),
        }
    if not radius_list:
        raise ValueError("need a radius list or a radius range")
    chis = np.linspace(0.0, chi_max, points)
    out: dict[str, np.ndarray] = {"chi": chis}
    for r in radius_list:
        gain = math.pi * r * r
        out[f"abs_sigma_r{r:g}"] = np.abs(gain * normalized_response(r, kappa, chis))
    return out
