"""Sigmoidal systems built from Hill terms.

Each component function is a sum of positive-coefficient products of
unary Hill factors: activating x^n/(k^n + x^n) or repressing
k^n/(k^n + x^n). The system pairs N such expressions with a positive
diagonal decay matrix, giving the vector field decay * (F(x) - x).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .backend import kernel
from .errors import RangeViolationWarning, SemanticError

ACTIVATING = "act"
REPRESSING = "rep"


@dataclass(frozen=True)
class HillTerm:
    """One sigmoidal factor on a single variable."""

    var: int
    orientation: str  # "act" or "rep"
    threshold: float
    exponent_slot: str

    def __post_init__(self):
        if self.orientation not in (ACTIVATING, REPRESSING):
            raise SemanticError(f"orientation must be act or rep, got {self.orientation!r}")
        if not (0.0 < self.threshold < 1.0):
            raise SemanticError(f"threshold must lie strictly in (0,1), got {self.threshold}")
        if self.var < 0:
            raise SemanticError(f"variable index must be nonnegative, got {self.var}")

    @property
    def sign(self) -> int:
        return +1 if self.orientation == ACTIVATING else -1


@dataclass(frozen=True)
class ProductTerm:
    """coefficient * product of Hill factors."""

    coefficient: float
    factors: tuple[HillTerm, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if self.coefficient <= 0.0:
            raise SemanticError(f"term coefficient must be positive, got {self.coefficient}")
        if not self.factors:
            raise SemanticError("term needs at least one Hill factor")


@dataclass(frozen=True)
class HillExpression:
    """Sum of product terms; the empty sum is the constant 0."""

    terms: tuple[ProductTerm, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    def variables(self) -> set[int]:
        return {f.var for t in self.terms for f in t.factors}

    def monotone_directions(self, n_vars: int) -> list[int] | None:
        """Per-variable slope sign (+1/-1, 0 if absent), or None when some
        variable appears with both orientations (the expression is then not
        coordinate-wise monotone and interval bounds may not sit on corners)."""
        dirs = [0] * n_vars
        for t in self.terms:
            for f in t.factors:
                if dirs[f.var] == 0:
                    dirs[f.var] = f.sign
                elif dirs[f.var] != f.sign:
                    return None
        return dirs

    @property
    def is_monotone(self) -> bool:
        n = max((f.var for t in self.terms for f in t.factors), default=-1) + 1
        return self.monotone_directions(n) is not None


@dataclass(frozen=True)
class CompiledSystem:
    """Flat array form consumed by the numeric kernels.

    Expression i owns terms expr_term_start[i]:expr_term_start[i+1]; term t
    owns factors term_fac_start[t]:term_fac_start[t+1]. fac_sign is +1 for
    activating and -1 for repressing factors.
    """

    n_vars: int
    expr_term_start: np.ndarray
    term_coef: np.ndarray
    term_fac_start: np.ndarray
    fac_var: np.ndarray
    fac_sign: np.ndarray
    fac_k: np.ndarray
    fac_n: np.ndarray
    decay: np.ndarray


@dataclass
class HillSystem:
    """N Hill expressions, a positive diagonal decay and exponent values.

    Exponent slots are named; ``exponents`` must assign every referenced
    slot a value >= 1 so derivatives stay bounded on the unit cube.
    Treat instances as immutable; derived systems come from
    :meth:`with_uniform_exponent`.
    """

    expressions: tuple[HillExpression, ...]
    decay: tuple[float, ...]
    exponents: dict[str, float]

    def __post_init__(self):
        self.expressions = tuple(self.expressions)
        self.decay = tuple(float(d) for d in self.decay)
        if len(self.decay) != self.n_vars:
            raise SemanticError(
                f"decay has {len(self.decay)} entries for {self.n_vars} expressions"
            )
        if any(d <= 0.0 for d in self.decay):
            raise SemanticError(f"decay entries must be positive, got {self.decay}")
        for i, expr in enumerate(self.expressions):
            for v in expr.variables():
                if v >= self.n_vars:
                    raise SemanticError(
                        f"expression {i} references variable index {v} of {self.n_vars}"
                    )
        missing = self.slots() - set(self.exponents)
        if missing:
            raise SemanticError(f"exponent slots without values: {sorted(missing)}")
        for slot, n in self.exponents.items():
            if not np.isfinite(n) or n < 1.0:
                raise SemanticError(f"exponent {slot} must be finite and >= 1, got {n}")
        self._compiled: CompiledSystem | None = None

    @property
    def n_vars(self) -> int:
        return len(self.expressions)

    def slots(self) -> set[str]:
        return {f.exponent_slot for e in self.expressions for t in e.terms for f in t.factors}

    def with_uniform_exponent(self, n: float) -> "HillSystem":
        """Copy with every exponent slot set to n."""
        return HillSystem(self.expressions, self.decay, {s: float(n) for s in self.exponents})

    def monotone_directions(self) -> list[list[int] | None]:
        return [e.monotone_directions(self.n_vars) for e in self.expressions]

    def compiled(self) -> CompiledSystem:
        if self._compiled is None:
            self._compiled = _compile(self)
        return self._compiled


def _compile(sys: HillSystem) -> CompiledSystem:
    expr_term_start = [0]
    term_coef: list[float] = []
    term_fac_start = [0]
    fac_var: list[int] = []
    fac_sign: list[float] = []
    fac_k: list[float] = []
    fac_n: list[float] = []
    for expr in sys.expressions:
        for term in expr.terms:
            term_coef.append(term.coefficient)
            for f in term.factors:
                fac_var.append(f.var)
                fac_sign.append(float(f.sign))
                fac_k.append(f.threshold)
                fac_n.append(sys.exponents[f.exponent_slot])
            term_fac_start.append(len(fac_var))
        expr_term_start.append(len(term_coef))
    return CompiledSystem(
        n_vars=sys.n_vars,
        expr_term_start=np.asarray(expr_term_start, dtype=np.int32),
        term_coef=np.asarray(term_coef, dtype=np.float64),
        term_fac_start=np.asarray(term_fac_start, dtype=np.int32),
        fac_var=np.asarray(fac_var, dtype=np.int32),
        fac_sign=np.asarray(fac_sign, dtype=np.float64),
        fac_k=np.asarray(fac_k, dtype=np.float64),
        fac_n=np.asarray(fac_n, dtype=np.float64),
        decay=np.asarray(sys.decay, dtype=np.float64),
    )


def _as_points(point, n_vars: int) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(point, dtype=np.float64))
    if pts.shape[1] != n_vars:
        raise SemanticError(f"point has dimension {pts.shape[1]}, system has {n_vars}")
    return np.ascontiguousarray(pts)


def eval_system(sys: HillSystem, point, check_range: bool = True) -> np.ndarray:
    """Evaluate F at a point in [0,1]^N (or at a batch of row points).

    Components above 1 trigger a RangeViolationWarning: the framework
    assumes F maps the cube to itself, which coefficient sums make a
    numerical rather than structural fact.
    """
    pts = _as_points(point, sys.n_vars)
    out = kernel().eval_many(sys.compiled(), pts)
    if not np.all(np.isfinite(out)):
        raise ArithmeticError("non-finite value while evaluating the system")
    if check_range and np.any(out > 1.0 + 1e-15):
        warnings.warn(
            f"system value exceeds 1 (max {float(out.max()):.6g})", RangeViolationWarning,
            stacklevel=2,
        )
    return out[0] if np.ndim(point) == 1 else out


def jacobian(sys: HillSystem, point) -> np.ndarray:
    """Analytic Jacobian dF_i/dx_j at a point (or (M,N,N) for a batch)."""
    pts = _as_points(point, sys.n_vars)
    out = kernel().jacobian_many(sys.compiled(), pts)
    return out[0] if np.ndim(point) == 1 else out


def sample_range_supremum(sys: HillSystem, n_samples: int = 4096, seed: int = 0) -> float:
    """Observed supremum of max_i F_i over quasi-random cube samples."""
    from scipy.stats import qmc

    sampler = qmc.Halton(d=sys.n_vars, scramble=True, seed=seed)
    pts = sampler.random(n_samples)
    vals = eval_system(sys, pts, check_range=False)
    return float(vals.max())
