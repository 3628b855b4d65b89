"""Geometry of users and surfaces.

Distances, free-space path loss, direction cosines and the direction-cosine
differences of user pairs, all evaluated in a surface's local frame.  A
surface sits on the z = 0 plane of its own frame and can be rotated about its
y-axis by an orientation angle; users must end up at z > 0 in that frame for
the propagation model to make sense.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class User:
    """A single uplink terminal.

    position: (x, y, z) in meters, global frame.
    power: transmit power in watts.
    phase: original phase in [-pi, pi].
    ricean_factor: LoS-to-scatter power ratio; math.inf means pure LoS.
    """

    position: tuple[float, float, float]
    power: float = 1.0
    phase: float = 0.0
    ricean_factor: float = math.inf

    def __post_init__(self):
        if self.power <= 0.0:
            raise ValueError("user power must be positive")
        if self.ricean_factor < 0.0:
            raise ValueError("Ricean factor must be >= 0")


@dataclass(frozen=True)
class Surface:
    """A circular surface: center in the global frame, radius, and the
    rotation angle about its local y-axis."""

    center: tuple[float, float, float] = (0.0, 0.0, 0.0)
    radius: float = 1.0
    orientation: float = 0.0

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ValueError("surface radius must be positive")
        if not -math.pi <= self.orientation <= math.pi:
            raise ValueError("orientation must lie in [-pi, pi]")

    def with_orientation(self, theta: float) -> "Surface":
        return Surface(self.center, self.radius, theta)


@dataclass(frozen=True)
class DirectionCosines:
    """Unit direction of a user as seen from a surface center, plus the
    in-plane fraction iota = sqrt(x^2 + y^2) / d used by the Ricean terms."""

    ux: float
    uy: float
    uz: float
    iota: float


@dataclass(frozen=True)
class PairCoeffs:
    """Direction-cosine differences of a user pair in a surface frame.

    chi^2 = eta^2 + xi^2 drives the in-plane response; varpi^2 adds the
    boresight component zeta^2 and bounds what orientation changes can reach.
    """

    eta: float
    xi: float
    zeta: float
    chi: float = field(init=False)
    varpi: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "chi", math.hypot(self.eta, self.xi))
        object.__setattr__(
            self, "varpi", math.sqrt(self.eta**2 + self.xi**2 + self.zeta**2)
        )


def rotate_into_surface(user: User, surface: Surface) -> tuple[float, float, float]:
    """User coordinates in the surface's local (translated, rotated) frame.

    Implemented as the planar rotation x' = x cos(t) + z sin(t),
    z' = z cos(t) - x sin(t), which is regular at t = +-pi/2 where the
    tan-based form of the same map is singular.
    """
    x = user.position[0] - surface.center[0]
    y = user.position[1] - surface.center[1]
    z = user.position[2] - surface.center[2]
    c = math.cos(surface.orientation)
    s = math.sin(surface.orientation)
    return (x * c + z * s, y, z * c - x * s)


def effective_distance(user: User, surface: Surface) -> float:
    """Distance from the user to the surface center (rotation invariant)."""
    x, y, z = rotate_into_surface(user, surface)
    d = math.sqrt(x * x + y * y + z * z)
    if d == 0.0:
        raise ValueError("user coincides with surface center")
    return d


def path_loss(d: float, kappa: float) -> float:
    """Far-field free-space path loss (1 / (2 kappa d))^2."""
    if d <= 0.0:
        raise ValueError("distance must be positive")
    if kappa <= 0.0:
        raise ValueError("wavenumber must be positive")
    return (1.0 / (2.0 * kappa * d)) ** 2


def check_far_field(user: User, surface: Surface, wavelength: float) -> bool:
    """True iff the user is beyond the Fraunhofer distance 8 R^2 / lambda."""
    if wavelength <= 0.0:
        raise ValueError("wavelength must be positive")
    return effective_distance(user, surface) > 8.0 * surface.radius**2 / wavelength


def faces_user(user: User, surface: Surface) -> bool:
    """True iff the user lies in the half-space the surface faces (z' > 0)."""
    return rotate_into_surface(user, surface)[2] > 0.0


def direction_cosines(user: User, surface: Surface) -> DirectionCosines:
    x, y, z = rotate_into_surface(user, surface)
    d = math.sqrt(x * x + y * y + z * z)
    if d == 0.0:
        raise ValueError("user coincides with surface center")
    return DirectionCosines(x / d, y / d, z / d, math.hypot(x, y) / d)


def pair_coeffs(user_a: User, user_b: User, surface: Surface) -> PairCoeffs:
    """Direction-cosine differences (eta, xi, zeta) of a pair in the
    surface frame; identical users give the all-zero coefficients."""
    if user_a == user_b:
        return PairCoeffs(0.0, 0.0, 0.0)
    ca = direction_cosines(user_a, surface)
    cb = direction_cosines(user_b, surface)
    return PairCoeffs(ca.ux - cb.ux, ca.uy - cb.uy, ca.uz - cb.uz)


def eta_of_orientation(pair: PairCoeffs, theta: float) -> float:
    """In-plane x-difference after an extra rotation by theta:
    eta(theta) = eta cos(theta) + zeta sin(theta)."""
    return pair.eta * math.cos(theta) + pair.zeta * math.sin(theta)


def chi_of_orientation(pair: PairCoeffs, theta: float) -> float:
    """chi after an extra rotation by theta; sweeps [|xi|, varpi]."""
    return math.hypot(pair.xi, eta_of_orientation(pair, theta))
