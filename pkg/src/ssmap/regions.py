"""Threshold geometry: regions of the unit cube and their compact insets.

Per variable i, an increasing list of thresholds in (0,1) cuts [0,1]
into level intervals: level 0 is [0,k_1[, level l is ]k_l,k_{l+1}[ and
the top level is ]k_m,1]. A region is the product of level intervals
for a discrete state; a compact box insets each region side that abuts
a threshold by a margin so the boxes are closed and pairwise disjoint.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import MarginTooLarge, SemanticError
from .spaces import State, StateSpace

DEFAULT_BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class ThresholdScheme:
    """Per-variable strictly increasing thresholds in (0,1)."""

    thresholds: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "thresholds", tuple(tuple(float(k) for k in ks) for ks in self.thresholds)
        )
        for i, ks in enumerate(self.thresholds):
            if not ks:
                raise SemanticError(f"variable index {i} has no thresholds")
            if any(not (0.0 < k < 1.0) for k in ks):
                raise SemanticError(f"thresholds of variable index {i} must lie in (0,1): {ks}")
            if any(a >= b for a, b in zip(ks, ks[1:])):
                raise SemanticError(f"thresholds of variable index {i} must increase: {ks}")

    @property
    def n_vars(self) -> int:
        return len(self.thresholds)

    def space(self) -> StateSpace:
        """The state space this scheme partitions (m_i thresholds give m_i+1 levels)."""
        return StateSpace(tuple(len(ks) for ks in self.thresholds))

    def validate_against(self, space: StateSpace) -> None:
        if self.n_vars != space.n_vars:
            raise SemanticError(
                f"scheme covers {self.n_vars} variables, space has {space.n_vars}"
            )
        for i, (ks, m) in enumerate(zip(self.thresholds, space.levels)):
            if len(ks) != m:
                raise SemanticError(
                    f"variable index {i}: {len(ks)} thresholds for maximum level {m} "
                    f"(needs {m})"
                )

    def cuts(self, var: int) -> tuple[float, ...]:
        """Interval endpoints 0, k_1, ..., k_m, 1 for one variable."""
        return (0.0,) + self.thresholds[var] + (1.0,)


@dataclass(frozen=True)
class Boundary:
    """Returned when a point sits on a threshold in the listed variables."""

    vars: tuple[int, ...]


@dataclass(frozen=True)
class RegionBox:
    """Open/half-open product interval of a discrete state."""

    state: State
    lo: tuple[float, ...]
    hi: tuple[float, ...]
    lo_open: tuple[bool, ...]
    hi_open: tuple[bool, ...]

    def contains(self, point) -> bool:
        for x, a, b, ao, bo in zip(point, self.lo, self.hi, self.lo_open, self.hi_open):
            if ao and not x > a:
                return False
            if not ao and not x >= a:
                return False
            if bo and not x < b:
                return False
            if not bo and not x <= b:
                return False
        return True


@dataclass(frozen=True)
class CompactBox:
    """Closed inset box K of a region; sides at 0 or 1 are not inset."""

    state: State
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    @property
    def center(self) -> np.ndarray:
        return (np.asarray(self.lo) + np.asarray(self.hi)) / 2.0

    @property
    def volume(self) -> float:
        return float(np.prod(np.asarray(self.hi) - np.asarray(self.lo)))

    def contains(self, point, tol: float = 0.0) -> bool:
        p = np.asarray(point, dtype=float)
        return bool(np.all(p >= np.asarray(self.lo) - tol) and np.all(p <= np.asarray(self.hi) + tol))


def region_box(scheme: ThresholdScheme, state: State) -> RegionBox:
    lo, hi, lo_open, hi_open = [], [], [], []
    for i, level in enumerate(state):
        cuts = scheme.cuts(i)
        m = len(cuts) - 2
        lo.append(cuts[level])
        hi.append(cuts[level + 1])
        lo_open.append(level > 0)       # closed at 0
        hi_open.append(level < m)       # closed at 1
    return RegionBox(tuple(state), tuple(lo), tuple(hi), tuple(lo_open), tuple(hi_open))


def region_of(point, scheme: ThresholdScheme, tau_b: float = DEFAULT_BOUNDARY_TOL):
    """Classify a cube point to its discrete state.

    Returns the state tuple, or Boundary(vars) listing every coordinate
    within tau_b of a threshold (open regions make exact hits ambiguous).
    """
    point = np.asarray(point, dtype=float)
    if point.shape != (scheme.n_vars,):
        raise SemanticError(f"point has shape {point.shape}, expected ({scheme.n_vars},)")
    on_boundary = []
    levels = []
    for i, x in enumerate(point):
        ks = scheme.thresholds[i]
        if any(abs(x - k) <= tau_b for k in ks):
            on_boundary.append(i)
            levels.append(-1)
        else:
            levels.append(bisect_left(ks, x))
    if on_boundary:
        return Boundary(tuple(on_boundary))
    return tuple(levels)


def classify_points(scheme: ThresholdScheme, pts: np.ndarray, tau_b: float = DEFAULT_BOUNDARY_TOL):
    """Vectorized region_of over rows of pts.

    Returns (levels (M,N) int array, boundary_mask (M,) bool array); rows
    with a threshold hit are masked and their levels are not meaningful.
    """
    pts = np.asarray(pts, dtype=float)
    m = pts.shape[0]
    levels = np.zeros((m, scheme.n_vars), dtype=np.int64)
    boundary = np.zeros(m, dtype=bool)
    for i in range(scheme.n_vars):
        ks = np.asarray(scheme.thresholds[i])
        col = pts[:, i]
        levels[:, i] = np.searchsorted(ks, col, side="left")
        boundary |= (np.abs(col[:, None] - ks[None, :]) <= tau_b).any(axis=1)
    return levels, boundary


@dataclass(frozen=True)
class Cover:
    """All compact boxes of a scheme plus the measure they leave out."""

    boxes: tuple[CompactBox, ...]
    margin: tuple[float, ...]
    excluded_measure: float

    def box(self, state: State) -> CompactBox:
        return self._by_state[tuple(state)]

    def __post_init__(self):
        object.__setattr__(self, "_by_state", {b.state: b for b in self.boxes})

    def states(self):
        return [b.state for b in self.boxes]


def build_cover(scheme: ThresholdScheme, space: StateSpace, margin,
                strict: bool = True) -> Cover:
    """Inset every region by a per-variable margin into a closed box.

    margin may be a scalar or one value per variable. In strict mode a
    zero margin is rejected (the boxes would touch the thresholds and
    stop being pairwise disjoint). excluded_measure is the exact Lebesgue
    measure of the cube minus all boxes: 1 - prod_i(1 - 2*margin_i*m_i).
    """
    scheme.validate_against(space)
    n = space.n_vars
    margin = np.broadcast_to(np.asarray(margin, dtype=float), (n,)).copy()
    if np.any(margin < 0.0):
        raise SemanticError(f"margins must be nonnegative, got {margin.tolist()}")
    for i in range(n):
        cuts = scheme.cuts(i)
        if strict and margin[i] == 0.0:
            raise MarginTooLarge(
                i, f"variable index {i}: zero margin leaves boxes touching thresholds "
                   f"(pass strict=False to allow region closures)")
        for lvl in range(len(cuts) - 1):
            inset = margin[i] * ((lvl > 0) + (lvl < len(cuts) - 2))
            width = cuts[lvl + 1] - cuts[lvl]
            if width - inset <= 0.0:
                raise MarginTooLarge(
                    i, f"variable index {i}: margin {margin[i]} leaves level {lvl} "
                       f"interval of width {width:.6g} empty")
    boxes = []
    for state in space.states():
        lo, hi = [], []
        for i, lvl in enumerate(state):
            cuts = scheme.cuts(i)
            m = len(cuts) - 2
            lo.append(cuts[lvl] + (margin[i] if lvl > 0 else 0.0))
            hi.append(cuts[lvl + 1] - (margin[i] if lvl < m else 0.0))
        boxes.append(CompactBox(state, tuple(lo), tuple(hi)))
    # exact rational product over the margins' decimal values, rounded once,
    # so decimal inputs (0.05) give the decimal answer (0.36) bit-exactly
    prod = Fraction(1)
    for i in range(n):
        prod *= Fraction(1) - 2 * Fraction(repr(float(margin[i]))) * space.levels[i]
    excluded = float(Fraction(1) - prod)
    return Cover(tuple(boxes), tuple(margin.tolist()), excluded)


def points_in_cover(cover: Cover, pts: np.ndarray) -> np.ndarray:
    """Boolean mask of rows of pts lying in some compact box."""
    pts = np.asarray(pts, dtype=float)
    mask = np.zeros(pts.shape[0], dtype=bool)
    for box in cover.boxes:
        lo = np.asarray(box.lo)
        hi = np.asarray(box.hi)
        mask |= np.all((pts >= lo) & (pts <= hi), axis=1)
    return mask
