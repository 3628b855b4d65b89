"""Uplink simulator and resource allocation for large intelligent surfaces.

Core pieces: closed-form effective channel of a circular surface under
matched filtering (`channel`), spectral-efficiency formulas for centralized
and distributed layouts (`se`), exhaustive sum-SE search (`clis`), user
association / orientation control / max-min power control (`dlis`), and a
Monte-Carlo harness with CLI front end (`harness`, `cli`).
"""

__version__ = "0.1.0"

from .scene import PairCoeffs, Surface, User
from .se import LinkBudget, SeReport

__all__ = ["PairCoeffs", "Surface", "User", "LinkBudget", "SeReport", "__version__"]
