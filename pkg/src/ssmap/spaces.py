"""Finite state spaces and multistate update maps.

A variable i takes integer levels 0..levels[i]; a state is a tuple of
levels, one per variable. A multistate network is a total map on the
product space, iterated in discrete time.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator

from .errors import SemanticError

State = tuple[int, ...]

# reject spaces whose state count cannot be enumerated
MAX_STATE_COUNT = 2**32


@dataclass(frozen=True)
class StateSpace:
    """Product of level sets; levels[i] is the highest level of variable i."""

    levels: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(int(m) for m in self.levels))
        if len(self.levels) < 1:
            raise SemanticError("state space needs at least one variable")
        if any(m < 1 for m in self.levels):
            raise SemanticError(f"every variable needs at least two levels, got maxima {self.levels}")
        if self.state_count > MAX_STATE_COUNT:
            raise SemanticError(f"state count {self.state_count} exceeds the supported 2^32")

    @property
    def n_vars(self) -> int:
        return len(self.levels)

    @property
    def state_count(self) -> int:
        return math.prod(m + 1 for m in self.levels)

    def states(self) -> Iterator[State]:
        """All states in lexicographic order."""
        return itertools.product(*(range(m + 1) for m in self.levels))

    def contains(self, state: State) -> bool:
        return len(state) == self.n_vars and all(
            0 <= x <= m for x, m in zip(state, self.levels)
        )


@dataclass
class MultistateNetwork:
    """Total update map f on a StateSpace, stored as an explicit table."""

    space: StateSpace
    table: dict[State, State] = field(repr=False)

    def __post_init__(self):
        count = self.space.state_count
        if len(self.table) != count:
            raise SemanticError(
                f"table has {len(self.table)} rows, needs all {count} states"
            )
        for x, y in self.table.items():
            if not self.space.contains(x):
                raise SemanticError(f"table input {x} outside the state space")
            if not self.space.contains(y):
                raise SemanticError(f"table output {y} for input {x} outside the state space")

    @classmethod
    def from_function(cls, space: StateSpace, fn: Callable[[State], State]) -> "MultistateNetwork":
        return cls(space, {x: tuple(fn(x)) for x in space.states()})

    def __call__(self, state: State) -> State:
        return self.table[tuple(state)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultistateNetwork):
            return NotImplemented
        return self.space == other.space and self.table == other.table
