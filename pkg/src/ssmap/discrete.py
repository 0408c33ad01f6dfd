"""Finite-dynamics analysis: fixed points, phase portraits, signed wiring
diagrams, elementary cycles and positive feedback vertex sets.

Sign conventions: an edge j -> i means component i depends on variable
j; its sign is '+' when the dependence is non-decreasing in every
context, '-' when non-increasing, '+-' when mixed. A cycle's sign is the
product of its edge signs; cycles containing a '+-' edge count as both
positive and negative, which keeps the steady-state bound sound.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .errors import SemanticError, TooLarge
from .hill import HillSystem
from .spaces import MultistateNetwork, State, StateSpace

POSITIVE = "+"
NEGATIVE = "-"
MIXED = "+-"

# enumeration guards
PORTRAIT_STATE_LIMIT = 2**20
CYCLE_VERTEX_LIMIT = 24


@dataclass(frozen=True)
class SignedDigraph:
    """Directed graph with at most one signed edge per ordered pair."""

    n_vertices: int
    edges: dict[tuple[int, int], str] = field(default_factory=dict)

    def __post_init__(self):
        for (src, dst), sign in self.edges.items():
            if not (0 <= src < self.n_vertices and 0 <= dst < self.n_vertices):
                raise SemanticError(f"edge ({src},{dst}) outside vertex range")
            if sign not in (POSITIVE, NEGATIVE, MIXED):
                raise SemanticError(f"bad edge sign {sign!r} on ({src},{dst})")

    def successors(self, v: int) -> list[int]:
        return sorted(dst for (src, dst) in self.edges if src == v)

    def without_edge(self, src: int, dst: int) -> "SignedDigraph":
        edges = {e: s for e, s in self.edges.items() if e != (src, dst)}
        return SignedDigraph(self.n_vertices, edges)


@dataclass(frozen=True)
class SignedCycle:
    """Elementary cycle, canonicalized to start at its smallest vertex."""

    vertices: tuple[int, ...]
    sign: str

    @property
    def is_positive(self) -> bool:
        return self.sign in (POSITIVE, MIXED)

    @property
    def is_negative(self) -> bool:
        return self.sign in (NEGATIVE, MIXED)


@dataclass(frozen=True)
class PhasePortrait:
    """Functional graph of an update map over its whole state space."""

    space: StateSpace
    successor: dict[State, State]
    fixed_points: tuple[State, ...]
    cycles: tuple[tuple[State, ...], ...]
    basins: dict[State, int]  # state -> index into cycles

    @property
    def arrows(self) -> list[tuple[State, State]]:
        return sorted(self.successor.items())


@dataclass(frozen=True)
class PfvsResult:
    """Minimum vertex set hitting every positive cycle, with certificate."""

    vertices: tuple[int, ...]
    bound: int
    certificate: tuple[tuple[SignedCycle, int], ...]  # (positive cycle, hitting vertex)


def fixed_points(mn: MultistateNetwork) -> list[State]:
    """All states with f(x) = x, in lexicographic order."""
    return [x for x in mn.space.states() if mn.table[x] == x]


def phase_portrait(mn: MultistateNetwork) -> PhasePortrait:
    """Complete functional graph with attractors and basins."""
    count = mn.space.state_count
    if count > PORTRAIT_STATE_LIMIT:
        raise TooLarge(f"{count} states exceed the portrait guard of {PORTRAIT_STATE_LIMIT}")
    successor = dict(mn.table)
    cycles: list[tuple[State, ...]] = []
    basin: dict[State, int] = {}
    for start in mn.space.states():
        if start in basin:
            continue
        path = []
        seen_at: dict[State, int] = {}
        x = start
        while x not in basin and x not in seen_at:
            seen_at[x] = len(path)
            path.append(x)
            x = successor[x]
        if x in basin:
            attractor = basin[x]
        else:
            entry = seen_at[x]
            cycle = tuple(path[entry:])
            # canonical rotation so revisits of the same loop dedupe
            pivot = cycle.index(min(cycle))
            cycles.append(cycle[pivot:] + cycle[:pivot])
            attractor = len(cycles) - 1
        for y in path:
            basin[y] = attractor
    fps = tuple(x for x in mn.space.states() if successor[x] == x)
    return PhasePortrait(mn.space, successor, fps, tuple(cycles), basin)


def wiring_diagram_discrete(mn: MultistateNetwork) -> SignedDigraph:
    """Edge j -> i iff f_i varies with x_j in some context; signs record
    monotonicity across all contexts."""
    space = mn.space
    n = space.n_vars
    edges: dict[tuple[int, int], str] = {}
    for j in range(n):
        others = [range(m + 1) for k, m in enumerate(space.levels) if k != j]
        increases = [False] * n
        decreases = [False] * n
        for ctx in itertools.product(*others):
            outputs = []
            for xj in range(space.levels[j] + 1):
                state = list(ctx[:j]) + [xj] + list(ctx[j:])
                outputs.append(mn.table[tuple(state)])
            for i in range(n):
                for a, b in zip(outputs, outputs[1:]):
                    if b[i] > a[i]:
                        increases[i] = True
                    elif b[i] < a[i]:
                        decreases[i] = True
        for i in range(n):
            if increases[i] and decreases[i]:
                edges[(j, i)] = MIXED
            elif increases[i]:
                edges[(j, i)] = POSITIVE
            elif decreases[i]:
                edges[(j, i)] = NEGATIVE
    return SignedDigraph(n, edges)


def wiring_diagram_continuous(sys: HillSystem) -> SignedDigraph:
    """Edges read structurally: activating factors contribute '+',
    repressing '-', a variable appearing both ways gives '+-'."""
    n = sys.n_vars
    edges: dict[tuple[int, int], str] = {}
    for i, expr in enumerate(sys.expressions):
        signs: dict[int, set[int]] = {}
        for term in expr.terms:
            for f in term.factors:
                signs.setdefault(f.var, set()).add(f.sign)
        for j, ss in signs.items():
            edges[(j, i)] = MIXED if len(ss) == 2 else (POSITIVE if +1 in ss else NEGATIVE)
    return SignedDigraph(n, edges)


def positive_cycles(g: SignedDigraph) -> list[SignedCycle]:
    """All elementary cycles with their signs (not only the positive ones;
    the name follows the downstream use). Deterministic order: by length,
    then lexicographically."""
    if g.n_vertices > CYCLE_VERTEX_LIMIT:
        raise TooLarge(f"{g.n_vertices} vertices exceed the cycle guard of {CYCLE_VERTEX_LIMIT}")
    out = []
    for cyc in _elementary_circuits(g):
        signs = [g.edges[(a, b)] for a, b in zip(cyc, cyc[1:] + cyc[:1])]
        if MIXED in signs:
            sign = MIXED
        else:
            sign = NEGATIVE if signs.count(NEGATIVE) % 2 else POSITIVE
        out.append(SignedCycle(tuple(cyc), sign))
    out.sort(key=lambda c: (len(c.vertices), c.vertices))
    return out


def _elementary_circuits(g: SignedDigraph):
    """Johnson's circuit enumeration; yields vertex lists rotated to start
    at their smallest vertex, each circuit exactly once."""
    adj = {v: set() for v in range(g.n_vertices)}
    for (src, dst) in g.edges:
        if src == dst:
            yield [src]
        else:
            adj[src].add(dst)
    for root in range(g.n_vertices):
        # search the subgraph on vertices >= root; every circuit found
        # contains root, so it comes out already in canonical rotation
        sub = {v: {w for w in adj[v] if w >= root} for v in range(root, g.n_vertices)}
        blocked = {v: False for v in sub}
        blocked_on: dict[int, set[int]] = {v: set() for v in sub}
        stack = [root]
        blocked[root] = True
        iters = [iter(sorted(sub[root]))]
        found_at_depth = [False]

        def unblock(v):
            pending = [v]
            while pending:
                u = pending.pop()
                if blocked[u]:
                    blocked[u] = False
                    pending.extend(blocked_on[u])
                    blocked_on[u].clear()

        while stack:
            advanced = False
            for w in iters[-1]:
                if w == root:
                    yield list(stack)
                    found_at_depth[-1] = True
                elif not blocked[w]:
                    stack.append(w)
                    blocked[w] = True
                    iters.append(iter(sorted(sub[w])))
                    found_at_depth.append(False)
                    advanced = True
                    break
            if advanced:
                continue
            v = stack.pop()
            iters.pop()
            found = found_at_depth.pop()
            if found:
                unblock(v)
                if found_at_depth:
                    found_at_depth[-1] = True
            else:
                for w in sub[v]:
                    blocked_on[w].add(v)


def min_pfvs(g: SignedDigraph, space: StateSpace) -> PfvsResult:
    """Smallest vertex set meeting every positive cycle, by exhaustive
    search in increasing size; ties break to the lexicographically
    smallest set. The bound multiplies (m_i + 1) over the chosen set."""
    if g.n_vertices != space.n_vars:
        raise SemanticError(
            f"graph has {g.n_vertices} vertices, space has {space.n_vars} variables")
    pos = [c for c in positive_cycles(g) if c.is_positive]
    if not pos:
        return PfvsResult((), 1, ())
    cycle_sets = [frozenset(c.vertices) for c in pos]
    candidates = sorted(frozenset().union(*cycle_sets))
    # vertices on some cycle all cycles pass through can prune hard, but
    # exhaustive search is fine under the 24-vertex guard
    for size in range(1, len(candidates) + 1):
        for combo in itertools.combinations(candidates, size):
            chosen = set(combo)
            if all(chosen & cs for cs in cycle_sets):
                cert = tuple(
                    (c, min(chosen & frozenset(c.vertices))) for c in pos
                )
                bound = math.prod(space.levels[i] + 1 for i in combo)
                return PfvsResult(tuple(combo), bound, cert)
    raise AssertionError("vertex union of the cycles always hits them")
