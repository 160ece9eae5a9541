"""Uniform symmetric grid in the log variable; radial grids are its exponential image."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LogGrid:
    """Nodes kappa_i = -L + i*h, i = 0..M-1, with M odd so kappa = 0 is a node."""

    L: float
    M: int

    def __post_init__(self):
        if self.L <= 0:
            raise ValueError(f"grid half-width must be positive, got L={self.L}")
        if self.M < 3 or self.M % 2 == 0:
            raise ValueError(f"node count must be odd and >= 3, got M={self.M}")

    @property
    def h(self) -> float:
        return 2.0 * self.L / (self.M - 1)

    @property
    def mid(self) -> int:
        """Index of the kappa = 0 node."""
        return (self.M - 1) // 2

    def nodes(self) -> np.ndarray:
        return -self.L + self.h * np.arange(self.M)

    def radii(self) -> np.ndarray:
        """Radial image r_i = e^{kappa_i}."""
        return np.exp(self.nodes())
