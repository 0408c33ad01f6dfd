"""Region-by-region correspondence between a sigmoidal system and its
induced discrete network.

Pipeline: compute the plateau limit of every region, classify it back to
a region (the induced network), build a compact cover, certify each box
(maps-into or steady-state-free), bound the Jacobian over the cover (the
uniqueness/stability certificate), then locate the continuous steady
state in every box whose state is a discrete fixed point.
"""

from __future__ import annotations

import itertools
import os
import warnings
from bisect import bisect_left
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .backend import kernel
from .errors import SemanticError, SingularNewtonStep, UndeclaredThreshold
from .hill import HillSystem, eval_system, jacobian
from .regions import (
    DEFAULT_BOUNDARY_TOL,
    CompactBox,
    Cover,
    ThresholdScheme,
    build_cover,
)
from .spaces import MultistateNetwork, State
from .discrete import fixed_points

ASYMPTOTICALLY_STABLE = "asymptotically_stable"
UNSTABLE = "unstable"
MARGINAL = "marginal"

INVARIANT = "invariant"
EXCLUDED = "excluded"
DEGENERATE = "degenerate"

ONE_TO_ONE = "one_to_one"
PARTIAL = "partial"
FAILED = "failed"


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances and iteration limits for the per-box root search."""

    tol: float = 1e-10              # inf-norm residual target of the iteration
    max_iter: int = 10_000
    newton_max_steps: int = 60
    newton_backtracks: int = 40
    corner_cap: int = 32            # extra iteration starts from box corners
    tau_b: float = DEFAULT_BOUNDARY_TOL
    tau_lambda: float = 1e-9        # eigenvalue real-part margin


@dataclass(frozen=True)
class LimitPoint:
    """Plateau value every expression approaches on a region as all
    exponents grow; a finite sum of coefficient products."""

    state: State
    value: np.ndarray
    on_threshold: tuple[int, ...]  # coordinates equal to a declared threshold


@dataclass(frozen=True)
class RegionVerdict:
    state: State
    status: str  # invariant | excluded | degenerate
    evidence: dict


@dataclass(frozen=True)
class ContractionCertificate:
    """Sampled sup of ||F'||_F over the cover against the stability bound
    min(decay) / (sqrt(N) * ||decay||_F). Sampled, hence not rigorous."""

    sampled_sup_norm: float
    bound: float
    passes: bool
    samples_per_box: int
    n_boxes: int
    method: str  # grid | quasirandom


@dataclass(frozen=True)
class StabilityResult:
    eigenvalues: np.ndarray | None
    verdict: str
    gershgorin_certified: bool


@dataclass(frozen=True)
class SteadyStateRecord:
    point: np.ndarray
    residual: float
    region: State
    eigenvalues: np.ndarray | None
    stability: str
    gershgorin_certified: bool
    matched_discrete_fixed_point: State | None = None
    distance_to_limit: float | None = None


@dataclass(frozen=True)
class CorrespondenceReport:
    induced: MultistateNetwork
    induced_warnings: dict[State, tuple[int, ...]]
    discrete_fixed_points: tuple[State, ...]
    region_verdicts: dict[State, RegionVerdict]
    steady_states: tuple[SteadyStateRecord, ...]
    contraction: ContractionCertificate
    excluded_measure: float
    audit: bool
    verdict: str  # one_to_one | partial | failed
    reasons: tuple[str, ...]


def _threshold_index(ks: tuple[float, ...], k: float, tau_b: float) -> int | None:
    for j, declared in enumerate(ks):
        if abs(k - declared) <= tau_b:
            return j
    return None


def _classify_value(v: float, ks: tuple[float, ...], tau_b: float) -> tuple[int, bool]:
    """Level of a coordinate value; exact threshold hits classify to the
    lower adjacent level and are flagged."""
    j = _threshold_index(ks, v, tau_b)
    if j is not None:
        return j, True
    return bisect_left(ks, v), False


def limit_point(sys: HillSystem, scheme: ThresholdScheme, state: State,
                tau_b: float = DEFAULT_BOUNDARY_TOL) -> LimitPoint:
    """Large-exponent limit of the system on a region.

    Activating factors become 1 when the region interval lies above the
    factor threshold and 0 below; repressing factors the complement. A
    factor threshold that is not one of its variable's declared
    thresholds raises UndeclaredThreshold (the limit would not be
    constant on the region).
    """
    state = tuple(state)
    value = np.zeros(sys.n_vars)
    for i, expr in enumerate(sys.expressions):
        total = 0.0
        for term in expr.terms:
            prod = term.coefficient
            for f in term.factors:
                idx = _threshold_index(scheme.thresholds[f.var], f.threshold, tau_b)
                if idx is None:
                    raise UndeclaredThreshold(f.var, f.threshold)
                above = state[f.var] >= idx + 1
                plateau = 1.0 if above else 0.0
                prod *= plateau if f.sign > 0 else 1.0 - plateau
                if prod == 0.0:
                    break
            total += prod
        value[i] = total
    on_thr = tuple(
        i for i in range(sys.n_vars)
        if _threshold_index(scheme.thresholds[i], float(value[i]), tau_b) is not None
    )
    return LimitPoint(state, value, on_thr)


def _induced_image(sys: HillSystem, scheme: ThresholdScheme, state: State,
                   tau_b: float = DEFAULT_BOUNDARY_TOL) -> tuple[State, tuple[int, ...], LimitPoint]:
    lp = limit_point(sys, scheme, state, tau_b)
    image = []
    flagged = []
    for i, v in enumerate(lp.value):
        level, on_thr = _classify_value(float(v), scheme.thresholds[i], tau_b)
        image.append(level)
        if on_thr:
            flagged.append(i)
    return tuple(image), tuple(flagged), lp


def induced_network(sys: HillSystem, scheme: ThresholdScheme,
                    tau_b: float = DEFAULT_BOUNDARY_TOL
                    ) -> tuple[MultistateNetwork, dict[State, tuple[int, ...]]]:
    """Discretize the system: map each state to the region of its limit.

    Returns the network and a map of degeneracy warnings: states whose
    limit has a coordinate exactly on a threshold (classified to the
    lower level).
    """
    space = scheme.space()
    table: dict[State, State] = {}
    flags: dict[State, tuple[int, ...]] = {}
    for state in space.states():
        image, flagged, _ = _induced_image(sys, scheme, state, tau_b)
        table[state] = image
        if flagged:
            flags[state] = flagged
    return MultistateNetwork(space, table), flags


def _box_grid(box: CompactBox, per_axis: int, cap: int, seed: int) -> tuple[np.ndarray, str]:
    n = len(box.lo)
    lo = np.asarray(box.lo)
    hi = np.asarray(box.hi)
    if per_axis**n <= cap:
        axes = [np.linspace(lo[i], hi[i], per_axis) for i in range(n)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1), "grid"
    from scipy.stats import qmc

    m = max(4, int(np.log2(max(cap, 16))))
    sampler = qmc.Sobol(d=n, scramble=True, seed=seed)
    u = sampler.random_base2(m)
    return lo + u * (hi - lo), "quasirandom"


def check_invariance(sys: HillSystem, scheme: ThresholdScheme, cover: Cover,
                     state: State, grid_points: int = 17,
                     tau_b: float = DEFAULT_BOUNDARY_TOL) -> RegionVerdict:
    """Certify what the system does to one compact box.

    For a state fixed under the induced network the check is
    f(K_x) inside K_x (status invariant); otherwise it is
    f(K_x) disjoint from K_x (status excluded). Bounds come from corner
    evaluation where the expression is coordinate-wise monotone (exact)
    and from grid sampling with a Lipschitz slack otherwise; inconclusive
    bounds or an on-threshold limit point give status degenerate.
    """
    state = tuple(state)
    box = cover.box(state)
    image_state, flagged, lp = _induced_image(sys, scheme, state, tau_b)
    lo_img, hi_img, slack, method = _image_bounds(sys, box, grid_points)

    # the map is nonnegative, so the slack never pushes the image below 0
    wide_lo = np.maximum(lo_img - slack, 0.0)
    wide_hi = hi_img + slack
    target = cover.box(image_state)
    t_lo = np.asarray(target.lo)
    t_hi = np.asarray(target.hi)
    inclusion = bool(np.all(wide_lo >= t_lo) and np.all(wide_hi <= t_hi))
    x_lo = np.asarray(box.lo)
    x_hi = np.asarray(box.hi)
    exclusion = bool(np.any((wide_hi < x_lo) | (wide_lo > x_hi)))

    evidence = {
        "image_lo": lo_img,
        "image_hi": hi_img,
        "slack": slack,
        "method": method,
        "image_state": image_state,
        "limit": lp.value,
        "on_threshold": flagged,
        "inclusion": inclusion,
        "exclusion": exclusion,
    }
    if flagged:
        status = DEGENERATE
    elif image_state == state:
        status = INVARIANT if inclusion else DEGENERATE
    else:
        status = EXCLUDED if exclusion else DEGENERATE
    return RegionVerdict(state, status, evidence)


def _image_bounds(sys: HillSystem, box: CompactBox, grid_points: int
                  ) -> tuple[np.ndarray, np.ndarray, np.ndarray, str]:
    n = sys.n_vars
    lo_img = np.empty(n)
    hi_img = np.empty(n)
    slack = np.zeros(n)
    dirs = sys.monotone_directions()
    need_grid = [i for i, d in enumerate(dirs) if d is None]
    method = "corners"

    lo = np.asarray(box.lo)
    hi = np.asarray(box.hi)
    for i, d in enumerate(dirs):
        if d is None:
            continue
        d_arr = np.asarray(d)
        corner_min = np.where(d_arr >= 0, lo, hi)
        corner_max = np.where(d_arr >= 0, hi, lo)
        vals = eval_system(sys, np.stack([corner_min, corner_max]), check_range=False)
        lo_img[i] = vals[0, i]
        hi_img[i] = vals[1, i]

    if need_grid:
        pts, kind = _box_grid(box, grid_points, 100_000, seed=0)
        vals = eval_system(sys, pts, check_range=False)
        jac = kernel().jacobian_many(sys.compiled(), pts)
        widths = hi - lo
        if kind == "grid":
            steps = widths / max(grid_points - 1, 1)
        else:
            steps = widths / max(pts.shape[0] ** (1.0 / n), 2.0)
        cell_diam = float(np.linalg.norm(steps))
        for i in need_grid:
            lo_img[i] = float(vals[:, i].min())
            hi_img[i] = float(vals[:, i].max())
            lipschitz = float(np.linalg.norm(jac[:, i, :], axis=1).max())
            slack[i] = 2.0 * cell_diam * lipschitz
        method = kind
    return lo_img, hi_img, slack, method


def check_contraction(sys: HillSystem, cover: Cover, grid_points: int = 17,
                      max_total_points: int = 1_000_000, seed: int = 0
                      ) -> ContractionCertificate:
    """Sampled sup of ||F'||_F over all boxes vs min(D)/(sqrt(N)||D||_F).

    Full per-box grids with grid_points per axis when affordable, else
    scrambled Sobol points, budgeted across boxes. The certificate is
    sampled, not rigorous.
    """
    d = np.asarray(sys.decay)
    n = sys.n_vars
    bound = float(d.min() / (np.sqrt(n) * np.linalg.norm(d)))
    n_boxes = len(cover.boxes)
    per_box_cap = max(16, max_total_points // max(n_boxes, 1))
    sup = 0.0
    method = "grid"
    count = 0
    cs = sys.compiled()
    for bi, box in enumerate(cover.boxes):
        pts, kind = _box_grid(box, grid_points, per_box_cap, seed=seed + bi)
        method = kind if kind == "quasirandom" else method
        count = max(count, pts.shape[0])
        sup = max(sup, float(kernel().max_jacobian_fro(cs, pts)))
    return ContractionCertificate(
        sampled_sup_norm=sup,
        bound=bound,
        passes=sup < bound,
        samples_per_box=count,
        n_boxes=n_boxes,
        method=method,
    )


def stability(sys: HillSystem, point, cfg: SolverConfig = SolverConfig(),
              decay=None) -> StabilityResult:
    """Eigenvalue verdict for the linearization D(F'(x) - I) at a steady
    state, plus the eigenvalue-free Gershgorin sufficient condition
    sqrt(N) * ||D F'(x)||_F < min(D)."""
    d = np.asarray(sys.decay if decay is None else decay, dtype=float)
    jac_f = jacobian(sys, np.asarray(point, dtype=float))
    n = sys.n_vars
    b_mat = d[:, None] * jac_f
    certified = bool(np.sqrt(n) * np.linalg.norm(b_mat) < d.min())
    j_ode = b_mat - np.diag(d)
    try:
        eigs = np.linalg.eigvals(j_ode)
    except np.linalg.LinAlgError:
        verdict = ASYMPTOTICALLY_STABLE if certified else MARGINAL
        return StabilityResult(None, verdict, certified)
    re = eigs.real
    if np.all(re < -cfg.tau_lambda):
        verdict = ASYMPTOTICALLY_STABLE
    elif np.any(re > cfg.tau_lambda):
        verdict = UNSTABLE
    else:
        verdict = MARGINAL
    return StabilityResult(eigs, verdict, certified)


def _damped_newton(sys: HillSystem, p0: np.ndarray, cfg: SolverConfig
                   ) -> tuple[np.ndarray, float, bool]:
    """Newton on g(p) = F(p) - p with step halving on the residual norm."""
    p = np.array(p0, dtype=float)
    n = sys.n_vars
    eye = np.eye(n)
    for _ in range(cfg.newton_max_steps):
        g = eval_system(sys, p, check_range=False) - p
        res = float(np.abs(g).max())
        if res < cfg.tol:
            return p, res, True
        jg = jacobian(sys, p) - eye
        try:
            step = np.linalg.solve(jg, -g)
        except np.linalg.LinAlgError:
            raise SingularNewtonStep(f"singular Jacobian at {p.tolist()}")
        base = float(np.linalg.norm(g))
        t = 1.0
        improved = False
        for _ in range(cfg.newton_backtracks):
            cand = p + t * step
            if float(np.linalg.norm(eval_system(sys, cand, check_range=False) - cand)) < base:
                improved = True
                break
            t *= 0.5
        if not improved:
            break
        p = p + t * step
    g = eval_system(sys, p, check_range=False) - p
    res = float(np.abs(g).max())
    return p, res, res < cfg.tol


def _iteration_starts(box: CompactBox, hints, cap: int) -> list[np.ndarray]:
    lo = np.asarray(box.lo)
    hi = np.asarray(box.hi)
    starts = [(lo + hi) / 2.0]
    for h in hints:
        starts.append(np.clip(np.asarray(h, dtype=float), lo, hi))
    n = len(box.lo)
    if 2**n <= cap:
        for bits in itertools.product((0, 1), repeat=n):
            starts.append(np.where(np.asarray(bits, bool), hi, lo))
    else:
        starts.append(lo.copy())
        starts.append(hi.copy())
    return starts


def find_steady_state(sys: HillSystem, box: CompactBox,
                      cfg: SolverConfig = SolverConfig(),
                      start_hints=()) -> SteadyStateRecord | None:
    """Locate the steady state of decay*(F(x)-x) inside one compact box.

    Projected fixed-point iteration runs from the box center, then from
    any hints (the region's limit point, when the caller knows it), then
    from box corners in lexicographic order; the first converged start
    wins. If every iteration stalls, damped Newton runs from the center;
    its result only counts when it lands inside the box (within the
    boundary tolerance). Returns None when nothing qualifies.
    """
    cs = sys.compiled()
    lo = np.asarray(box.lo)
    hi = np.asarray(box.hi)
    for start in _iteration_starts(box, start_hints, cfg.corner_cap):
        p, res, _, converged = kernel().project_iterate(
            cs, lo, hi, start, cfg.tol, cfg.max_iter)
        if converged:
            return _record_at(sys, box, p, cfg)
    try:
        p, res, ok = _damped_newton(sys, (lo + hi) / 2.0, cfg)
    except SingularNewtonStep:
        warnings.warn(f"singular Newton step in box {box.state}; no steady state reported",
                      stacklevel=2)
        return None
    if ok and box.contains(p, tol=cfg.tau_b):
        return _record_at(sys, box, p, cfg)
    return None


def _record_at(sys: HillSystem, box: CompactBox, p: np.ndarray,
               cfg: SolverConfig) -> SteadyStateRecord:
    g = eval_system(sys, p, check_range=False) - p
    st = stability(sys, p, cfg)
    return SteadyStateRecord(
        point=p,
        residual=float(np.linalg.norm(g)),
        region=box.state,
        eigenvalues=st.eigenvalues,
        stability=st.verdict,
        gershgorin_certified=st.gershgorin_certified,
    )


def multi_start_roots(sys: HillSystem, box: CompactBox, n_starts: int = 32,
                      seed: int = 0, cfg: SolverConfig = SolverConfig()
                      ) -> list[np.ndarray]:
    """Distinct steady states found in a box from random starts.

    Each start runs the projected iteration and then a Newton polish, so
    iteration-repelling roots are found too. Points are distinct when
    separated by more than 10*tol."""
    rng = np.random.default_rng(seed)
    lo = np.asarray(box.lo)
    hi = np.asarray(box.hi)
    cs = sys.compiled()
    roots: list[np.ndarray] = []

    def consider(p: np.ndarray, res: float):
        if res >= cfg.tol or not box.contains(p, tol=cfg.tau_b):
            return
        for r in roots:
            if float(np.abs(r - p).max()) <= 10.0 * cfg.tol:
                return
        roots.append(p)

    for _ in range(n_starts):
        start = lo + rng.random(sys.n_vars) * (hi - lo)
        p, res, _, converged = kernel().project_iterate(cs, lo, hi, start, cfg.tol, cfg.max_iter)
        if converged:
            consider(p, res)
            continue
        try:
            p2, res2, ok = _damped_newton(sys, start, cfg)
        except SingularNewtonStep:
            continue
        if ok:
            consider(p2, res2)
    return roots


def _n_threads() -> int:
    raw = os.environ.get("SSMAP_THREADS", "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _parallel_map(fn, items):
    n = _n_threads()
    items = list(items)
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def correspondence_report(sys: HillSystem, scheme: ThresholdScheme, margin=0.05,
                          n_override: float | None = None, audit: bool = False,
                          cfg: SolverConfig = SolverConfig(), grid_points: int = 17,
                          seed: int = 0,
                          contraction_points: int = 1_000_000) -> CorrespondenceReport:
    """Full pipeline: induced network, fixed points, cover, per-region
    verdicts, contraction certificate and per-box steady states.

    Verdict one_to_one requires every fixed-point box to yield exactly
    one steady state, every other solved box to yield none (checked when
    audit is set, which solves all boxes), and the contraction
    certificate to pass; partial keeps the matching but drops the
    certificate; anything else is failed, with reasons.
    """
    if n_override is not None:
        sys = sys.with_uniform_exponent(n_override)
    space = scheme.space()
    if sys.n_vars != space.n_vars:
        raise SemanticError(
            f"system has {sys.n_vars} variables, scheme has {space.n_vars}")
    induced, induced_flags = induced_network(sys, scheme, cfg.tau_b)
    dfp = tuple(fixed_points(induced))
    cover = build_cover(scheme, space, margin)

    verdicts_list = _parallel_map(
        lambda st: check_invariance(sys, scheme, cover, st, grid_points, cfg.tau_b),
        cover.states())
    verdicts = {v.state: v for v in verdicts_list}

    contraction = check_contraction(sys, cover, grid_points, contraction_points, seed)

    dfp_set = set(dfp)
    solve_states = list(cover.states()) if audit else list(dfp)
    limits = {st: limit_point(sys, scheme, st, cfg.tau_b) for st in solve_states}

    def solve(st: State) -> tuple[State, SteadyStateRecord | None]:
        rec = find_steady_state(sys, cover.box(st), cfg, start_hints=(limits[st].value,))
        return st, rec

    solved = _parallel_map(solve, solve_states)
    records = []
    reasons = []
    for st, rec in solved:
        if rec is None:
            if st in dfp_set:
                reasons.append(f"no steady state found in the box of fixed point {st}")
            continue
        if st not in dfp_set:
            reasons.append(
                f"steady state {np.round(rec.point, 6).tolist()} found in box {st}, "
                f"which is not a fixed point of the induced network")
        rec = replace(
            rec,
            matched_discrete_fixed_point=st if st in dfp_set else None,
            distance_to_limit=float(np.linalg.norm(rec.point - limits[st].value)),
        )
        records.append(rec)

    matching_ok = not reasons
    if not contraction.passes:
        reasons.append(
            f"contraction certificate failed: sampled sup {contraction.sampled_sup_norm:.6g} "
            f">= bound {contraction.bound:.6g}")
    if matching_ok and contraction.passes:
        verdict = ONE_TO_ONE
    elif matching_ok:
        verdict = PARTIAL
    else:
        verdict = FAILED
    return CorrespondenceReport(
        induced=induced,
        induced_warnings=induced_flags,
        discrete_fixed_points=dfp,
        region_verdicts=verdicts,
        steady_states=tuple(records),
        contraction=contraction,
        excluded_measure=cover.excluded_measure,
        audit=audit,
        verdict=verdict,
        reasons=tuple(reasons),
    )
