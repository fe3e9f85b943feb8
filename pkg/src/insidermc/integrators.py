"""Schemes and exact evaluators for dS = mu S dt + sigma S dB with terminal-value data.

Four readings of the noise term are supported. For an initial condition
C(B_T) the exact per-path solutions are

* forward (and Ito, when C is constant):  S(t) = C(B_T) * E(t),
* Ayed-Kuo and Hitsuda-Skorokhod:         S(t) = C(B_T - sigma t) * E(t),

with E(t) = exp((mu - sigma^2/2) t + sigma B_t). The two anticipating
variants share one code path, so their outputs are identical to the bit.

Discrete primitives: a left-point forward Riemann sum, the mixed-endpoint
sum that evaluates adapted factors at the left node and future factors at
the right node, and the divergence-type integral obtained from the forward
sum by subtracting the Malliavin trace term.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Union

import numpy as np

from .functionals import (
    Indicator,
    NonDifferentiableError,
    ProductIntegrand,
    TerminalFunctional,
    malliavin_trace_partial,
)
from .paths import BrownianPath, TimeGrid

if TYPE_CHECKING:
    from .market import MarketParams

Integrand = Union[ProductIntegrand, Callable]

_MAX_CORRECTION_LEVELS = 8


class Interpretation(enum.Enum):
    """Which stochastic integral the noise term denotes."""

    ITO = "ito"
    FORWARD = "forward"
    AYED_KUO = "ayed-kuo"
    HITSUDA_SKOROKHOD = "hitsuda-skorokhod"


ANTICIPATING = (Interpretation.AYED_KUO, Interpretation.HITSUDA_SKOROKHOD)


@dataclass(frozen=True)
class WealthProcess:
    """Per-node samples of one wealth trajectory plus its provenance."""

    grid: TimeGrid
    samples: np.ndarray
    interpretation: Interpretation
    seed: int
    path_index: int

    def __post_init__(self) -> None:
        if self.samples.shape != (self.grid.steps + 1,):
            raise ValueError(
                f"samples must have shape ({self.grid.steps + 1},), got {self.samples.shape}"
            )
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("wealth samples must be finite")
        self.samples.setflags(write=False)

    @property
    def terminal(self) -> float:
        return float(self.samples[-1])


def _growth_factor(params: "MarketParams", path: BrownianPath) -> np.ndarray:
    nodes = path.grid.nodes
    return np.exp((params.mu - 0.5 * params.sigma**2) * nodes + params.sigma * path.values)


def exact_solution(
    c: TerminalFunctional,
    params: "MarketParams",
    path: BrownianPath,
    interp: Interpretation,
) -> WealthProcess:
    """Closed-form per-path solution under the chosen interpretation.

    The anticipating variants evaluate the translated functional
    C(. - sigma t_i) at B_T node by node; the forward variant keeps C(B_T)
    frozen. Ito is only defined for deterministic C.
    """
    if interp is Interpretation.ITO and not c.is_deterministic:
        raise ValueError("Ito interpretation requires a deterministic initial condition")
    growth = _growth_factor(params, path)
    if interp in ANTICIPATING:
        initial = c.evaluate(path.terminal - params.sigma * path.grid.nodes)
    else:
        initial = c.evaluate(path.terminal)
    return WealthProcess(
        grid=path.grid,
        samples=np.asarray(initial * growth, dtype=float),
        interpretation=interp,
        seed=path.seed,
        path_index=path.path_index,
    )


def euler_forward(
    c: TerminalFunctional, params: "MarketParams", path: BrownianPath
) -> WealthProcess:
    """Left-point Euler scheme for the forward equation, S_0 = C(B_T)."""
    growth = 1.0 + params.mu * path.grid.dt + params.sigma * path.increments
    samples = np.empty(path.grid.steps + 1)
    samples[0] = float(np.asarray(c.evaluate(path.terminal)))
    samples[1:] = samples[0] * np.cumprod(growth)
    return WealthProcess(
        grid=path.grid,
        samples=samples,
        interpretation=Interpretation.FORWARD,
        seed=path.seed,
        path_index=path.path_index,
    )


def ak_integral(u: Integrand, path: BrownianPath, t: float) -> float:
    """Mixed-endpoint Riemann sum over [0, t].

    Each term is u(t_{i-1}, W_{i-1}, B_T - W_i) * (W_i - W_{i-1}): the time
    and running-value arguments sit at the left node, the future-increment
    argument at the right node. With no future dependence this is the plain
    Ito left-point sum.
    """
    i = path.grid.index_of(t)
    if i == 0:
        return 0.0
    w = path.values
    s = path.grid.nodes[:i]
    x = w[:i]
    y = path.terminal - w[1 : i + 1]
    dw = np.diff(w[: i + 1])
    return float(np.sum(u(s, x, y) * dw))


def forward_integral(u: Integrand, path: BrownianPath, t: float) -> float:
    """Left-point Riemann sum over [0, t]: all arguments at the left node."""
    i = path.grid.index_of(t)
    if i == 0:
        return 0.0
    w = path.values
    s = path.grid.nodes[:i]
    x = w[:i]
    y = path.terminal - w[:i]
    dw = np.diff(w[: i + 1])
    return float(np.sum(u(s, x, y) * dw))


def skorokhod_integral(u: ProductIntegrand, path: BrownianPath, t: float) -> float:
    """Divergence-type integral: forward sum minus the Malliavin trace term."""
    i = path.grid.index_of(t)
    if i == 0:
        return 0.0
    w = path.values
    s = path.grid.nodes[:i]
    x = w[:i]
    y = path.terminal - w[:i]
    trace = np.broadcast_to(
        np.asarray(malliavin_trace_partial(u, s, x, y), dtype=float), s.shape
    )
    return forward_integral(u, path, t) - path.grid.dt * float(np.sum(trace))


def solution_integrand(
    c: TerminalFunctional, params: "MarketParams"
) -> Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]:
    """The anticipating exact solution as a two-argument integrand.

    Written in the adapted/future split (s, x=B_s, y=B_T-B_s):
    Phi(s, x, y) = C(y + x - sigma s) * exp((mu - sigma^2/2) s + sigma x).
    """
    mu, sigma = params.mu, params.sigma

    def phi(s, x, y):
        return c.evaluate(y + x - sigma * s) * np.exp((mu - 0.5 * sigma**2) * s + sigma * x)

    return phi


def ak_residual(
    c: TerminalFunctional, params: "MarketParams", path: BrownianPath, t: float | None = None
) -> float:
    """Defect of the anticipating exact solution in the mixed-endpoint integral form.

    R = S(t) - S(0) - mu * sum S(t_{i-1}) dt - sigma * (mixed-endpoint sum of S).
    For smooth C the residual vanishes with the mesh; for indicator C its
    behavior is the numerical evidence the open solution question turns on.
    """
    if t is None:
        t = path.grid.horizon
    i = path.grid.index_of(t)
    proc = exact_solution(c, params, path, Interpretation.AYED_KUO)
    samples = proc.samples
    drift = params.mu * path.grid.dt * float(np.sum(samples[:i]))
    stochastic = ak_integral(solution_integrand(c, params), path, t)
    return float(samples[i] - samples[0] - drift - params.sigma * stochastic)


def _correction_stack(c: TerminalFunctional) -> list[TerminalFunctional]:
    """C and its derivatives, stopping at zero or at the last available level.

    The first derivative is mandatory (the per-step drift correction needs
    it); deeper levels refine the correction's own dynamics and are optional.
    For affine C the stack terminates exactly.
    """
    levels = [c]
    nxt = c.derivative()  # propagate NonDifferentiableError for indicator C
    while not nxt.is_zero and len(levels) < _MAX_CORRECTION_LEVELS:
        levels.append(nxt)
        try:
            nxt = nxt.derivative()
        except NonDifferentiableError:
            break
    return levels


def skorokhod_via_correction(
    c: TerminalFunctional, params: "MarketParams", path: BrownianPath
) -> WealthProcess:
    """Forward Euler with the per-step Malliavin drift correction.

    Each stack level k holds the k-th derivative process started at
    C^(k)(B_T) and is corrected by sigma * dt times the level below it;
    level 0 is the wealth. With a vanishing first derivative this reduces to
    the plain Euler recursion, bit for bit.
    """
    levels = _correction_stack(c)
    dt = path.grid.dt
    sigma = params.sigma
    n = path.grid.steps
    g = 1.0 + params.mu * dt + sigma * path.increments
    start = [float(np.asarray(lvl.evaluate(path.terminal))) for lvl in levels]

    # Work in ratios r_m = S_m / prod(g_1..g_m); the correction recursion is
    # then r_m = r_{m-1} - sigma*dt * r^below_{m-1} / g_m, which cumsum solves.
    left = np.full(n, start[-1])
    full = None
    for k in range(len(levels) - 2, -1, -1):
        corrections = np.cumsum(left / g)
        full = start[k] - sigma * dt * corrections
        left = np.empty(n)
        left[0] = start[k]
        left[1:] = full[:-1]
    prods = np.cumprod(g)
    samples = np.empty(n + 1)
    samples[0] = start[0]
    samples[1:] = start[0] * prods if full is None else full * prods
    return WealthProcess(
        grid=path.grid,
        samples=samples,
        interpretation=Interpretation.HITSUDA_SKOROKHOD,
        seed=path.seed,
        path_index=path.path_index,
    )


def indicator_factor(
    c: Indicator, params: "MarketParams", path: BrownianPath, interp: Interpretation
) -> np.ndarray:
    """Boolean on/off state of the indicator leg at every node."""
    if interp in ANTICIPATING:
        args = path.terminal - params.sigma * path.grid.nodes
    else:
        args = np.full(path.grid.steps + 1, path.terminal)
    return np.greater(args, c.threshold)


def detect_indicator_flip(
    c: Indicator,
    params: "MarketParams",
    path: BrownianPath,
    interp: Interpretation = Interpretation.AYED_KUO,
) -> tuple[bool, float | None]:
    """Locate the on/off flip of the indicator leg along the grid.

    Returns (flipped, estimated flip time); the estimate is the midpoint of
    the bracketing interval. The flip is a functional-form event, so the
    detector looks at the indicator factor rather than the wealth samples.
    """
    factor = indicator_factor(c, params, path, interp)
    changes = np.nonzero(factor[1:] != factor[:-1])[0]
    if changes.size == 0:
        return False, None
    i = int(changes[0])
    nodes = path.grid.nodes
    return True, float(0.5 * (nodes[i] + nodes[i + 1]))
