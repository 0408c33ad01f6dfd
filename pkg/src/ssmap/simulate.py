"""Trajectory generation for both frameworks.

Continuous: classic fixed-step RK4 on x' = decay*(F(x) - x), clamped to
the unit cube; an overshoot of 10*dt or more aborts, since it signals a
map that genuinely leaves the cube rather than integration noise.
Discrete: synchronous iteration until the first revisit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backend import kernel
from .errors import DivergedOutsideCube, SemanticError
from .hill import HillSystem, eval_system
from .spaces import MultistateNetwork, State

OVERSHOOT_FACTOR = 10.0


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    points: np.ndarray               # shape (len(times), N)
    terminal_residual: float         # ||F(p_end) - p_end||

    @property
    def terminal(self) -> np.ndarray:
        return self.points[-1]


@dataclass(frozen=True)
class DiscreteOrbit:
    states: tuple[State, ...]
    outcome: str                     # "fixed_point" | "cycle"
    period: int
    phase: int                       # index where the recurring part starts

    @property
    def attractor(self) -> tuple[State, ...]:
        return self.states[self.phase : self.phase + self.period]


def integrate_ode(sys: HillSystem, x0, dt: float = 0.01, t_end: float = 100.0,
                  record_every: int = 1) -> Trajectory:
    """Integrate from x0 in [0,1]^N with fixed step dt up to t_end.

    Points are recorded every record_every steps (the initial point
    always). Raises DivergedOutsideCube when a step overshoots the cube
    by 10*dt or more.
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (sys.n_vars,):
        raise SemanticError(f"x0 has shape {x0.shape}, system has {sys.n_vars} variables")
    if np.any(x0 < 0.0) or np.any(x0 > 1.0):
        raise SemanticError(f"x0 must lie in [0,1]^N, got {x0.tolist()}")
    if dt <= 0.0 or t_end <= 0.0:
        raise SemanticError("dt and t_end must be positive")
    n_steps = int(round(t_end / dt))
    path, diverged = kernel().rk4_path(
        sys.compiled(), x0, dt, n_steps, record_every, OVERSHOOT_FACTOR * dt)
    if diverged >= 0:
        raise DivergedOutsideCube(int(diverged), path[-1])
    times = np.arange(path.shape[0]) * (dt * record_every)
    residual = float(np.linalg.norm(eval_system(sys, path[-1], check_range=False) - path[-1]))
    return Trajectory(times, path, residual)


def iterate_discrete(mn: MultistateNetwork, x0, max_steps: int | None = None) -> DiscreteOrbit:
    """Iterate the update map from x0 until a state repeats.

    The orbit ends in a fixed point or a cycle within the state count
    (pigeonhole); max_steps only tightens that default guard.
    """
    x = tuple(x0)
    if not mn.space.contains(x):
        raise SemanticError(f"state {x} outside the state space")
    limit = mn.space.state_count if max_steps is None else min(max_steps, mn.space.state_count)
    seen = {x: 0}
    states = [x]
    for _ in range(limit):
        x = mn.table[x]
        if x in seen:
            phase = seen[x]
            period = len(states) - phase
            outcome = "fixed_point" if period == 1 else "cycle"
            return DiscreteOrbit(tuple(states), outcome, period, phase)
        seen[x] = len(states)
        states.append(x)
    raise SemanticError(f"no revisit within {limit} steps (max_steps too small)")
