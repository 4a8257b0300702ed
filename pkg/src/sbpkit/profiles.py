"""Trial profiles: named families and seeded random bump sums."""

from __future__ import annotations

import numpy as np

from .grids import RadialFunction, RadialGrid


def gaussian(grid: RadialGrid, alpha: float = 1.0, amplitude: float = 1.0) -> RadialFunction:
    return RadialFunction(grid, amplitude * np.exp(-alpha * grid.r ** 2))


def exponential(grid: RadialGrid, alpha: float = 1.0, amplitude: float = 1.0) -> RadialFunction:
    return RadialFunction(grid, amplitude * np.exp(-alpha * grid.r))


def random_bumps(grid: RadialGrid, rng: np.random.Generator) -> RadialFunction:
    """Sum of 1-3 radial Gaussian bumps with seeded centers and widths.

    Centers and widths are drawn so every bump has decayed by r_max,
    keeping the profiles inside the computational ball.
    """
    vals = np.zeros(grid.n)
    for _ in range(int(rng.integers(1, 4))):
        center = rng.uniform(0.0, 0.12 * grid.r_max)
        width = rng.uniform(0.3, 2.0)
        amp = rng.uniform(0.2, 1.5)
        vals += amp * np.exp(-width * (grid.r - center) ** 2)
    return RadialFunction(grid, vals)
