"""Reproducible Brownian paths on uniform time grids.

Every path is a pure function of ``(seed, path_index, grid)``: the pair
``(seed, path_index)`` keys a counter-based Philox stream, so distinct path
indices give statistically independent paths and any worker layout reproduces
the same numbers bit for bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

_UINT64 = (1 << 64) - 1


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_i = i * horizon / steps on [0, horizon]."""

    horizon: float
    steps: int

    def __post_init__(self) -> None:
        if not (isinstance(self.horizon, (int, float)) and math.isfinite(self.horizon)):
            raise ValueError(f"horizon must be finite, got {self.horizon!r}")
        if self.horizon <= 0.0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")

    @property
    def dt(self) -> float:
        return self.horizon / self.steps

    @cached_property
    def nodes(self) -> np.ndarray:
        # cached per instance (grids are immutable and shared across paths);
        # frozen out so a stray caller cannot corrupt the shared array
        nodes = np.linspace(0.0, self.horizon, self.steps + 1)
        nodes.setflags(write=False)
        return nodes

    def index_of(self, t: float) -> int:
        """Node index of t. Rejects times that do not sit on a grid node."""
        i = int(round(t / self.dt))
        if not 0 <= i <= self.steps or not math.isclose(
            i * self.dt, t, rel_tol=1e-9, abs_tol=1e-12 * self.horizon
        ):
            raise ValueError(f"t={t} is not a node of grid(horizon={self.horizon}, steps={self.steps})")
        return i


@dataclass(frozen=True)
class BrownianPath:
    """One discretized Brownian sample, W_0 = 0, plus its RNG provenance."""

    grid: TimeGrid
    values: np.ndarray
    seed: int
    path_index: int

    def __post_init__(self) -> None:
        if self.values.shape != (self.grid.steps + 1,):
            raise ValueError(
                f"values must have shape ({self.grid.steps + 1},), got {self.values.shape}"
            )
        if self.values[0] != 0.0:
            raise ValueError("path must start at W_0 = 0")
        self.values.setflags(write=False)

    @property
    def terminal(self) -> float:
        """B_T, the final grid value."""
        return float(self.values[-1])

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.values)


def _stream(seed: int, path_index: int) -> np.random.Generator:
    if path_index < 0:
        raise ValueError(f"path_index must be >= 0, got {path_index}")
    key = np.array([seed & _UINT64, path_index & _UINT64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def generate_path(grid: TimeGrid, seed: int, path_index: int = 0) -> BrownianPath:
    """Sample one Brownian path; increments are N(0, dt), W_0 = 0."""
    rng = _stream(seed, path_index)
    dw = rng.standard_normal(grid.steps) * math.sqrt(grid.dt)
    values = np.empty(grid.steps + 1)
    values[0] = 0.0
    np.cumsum(dw, out=values[1:])
    return BrownianPath(grid=grid, values=values, seed=seed, path_index=path_index)


def girsanov_shift(
    path: BrownianPath, rate: float, window: tuple[float, float]
) -> BrownianPath:
    """Deterministic path translation W(u) -> W(u) - rate * (min(u, t) - s)^+.

    The window endpoints must be grid nodes; the terminal value maps
    B_T -> B_T - rate * (t - s).
    """
    s, t = window
    if s > t:
        raise ValueError(f"window start {s} exceeds end {t}")
    path.grid.index_of(s)
    path.grid.index_of(t)
    drift = rate * np.clip(np.minimum(path.grid.nodes, t) - s, 0.0, None)
    return replace(path, values=path.values - drift)


def coarsen(path: BrownianPath, factor: int) -> BrownianPath:
    """Restrict a path to every factor-th node (grid refinement inverse).

    The restriction of Brownian motion to a sub-grid is again Brownian on that
    grid, so coarsened paths share B_T with their parent; this is what makes
    common-path convergence studies across step counts meaningful.
    """
    if factor < 1:
        raise ValueError(f"factor must be >= 1, got {factor}")
    if path.grid.steps % factor:
        raise ValueError(f"factor {factor} does not divide {path.grid.steps} steps")
    grid = TimeGrid(path.grid.horizon, path.grid.steps // factor)
    return BrownianPath(
        grid=grid,
        values=path.values[::factor].copy(),
        seed=path.seed,
        path_index=path.path_index,
    )
