"""
Stable plateaux, cycles, valleys and plateau depths.
"""

import logging
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from metastable.core.errors import (
    EmptySet,
    FullSet,
    InvariantViolation,
    NotACycle,
    NotConnected,
    SingleGround,
)
from metastable.core.landscape import (
    Energy,
    Landscape,
    MergeTree,
    StateSet,
    allowed_neighborhood,
    barrier_filtration,
    bottom,
    boundary_sets,
    state_set,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Plateau:
    """
    Equal-energy state set.

    Level-one plateaux are connected with a strictly higher boundary. From
    level two on, a plateau is the union of the level-one plateaux forming
    one recurrent class, which need not be connected.
    """
    states: StateSet
    energy: Energy

    @property
    def anchor(self) -> int:
        """Smallest member; used as the canonical sort key."""
        return self.states[0]


@dataclass(frozen=True)
class Cycle:
    """Connected set whose interior maximum lies strictly below its boundary minimum."""
    states: StateSet
    depth: Energy
    bottom: StateSet

    def __len__(self) -> int:
        return len(self.states)


def stable_plateaux(L: Landscape) -> list[Plateau]:
    """
    All stable plateaux, sorted by smallest member.

    Equal-energy connected components are found by BFS; a component is kept
    when no member has a strictly lower neighbour (equal neighbours are in
    the component by construction).
    """
    seen = [False] * L.n_states
    found: list[Plateau] = []
    for start in range(L.n_states):
        if seen[start]:
            continue
        level = L.energies[start]
        component = [start]
        seen[start] = True
        queue = deque([start])
        stable = True
        while queue:
            s = queue.popleft()
            for u in L.neighbors[s]:
                e = L.energies[u]
                if e < level:
                    stable = False
                elif e == level and not seen[u]:
                    seen[u] = True
                    component.append(u)
                    queue.append(u)
        if stable:
            found.append(Plateau(state_set(component), level))
    found.sort(key=lambda p: p.anchor)
    logger.debug(f"Found {len(found)} stable plateaux")
    return found


def _is_connected(L: Landscape, members: frozenset) -> bool:
    start = next(iter(members))
    seen = {start}
    queue = deque([start])
    while queue:
        s = queue.popleft()
        for u in L.neighbors[s]:
            if u in members and u not in seen:
                seen.add(u)
                queue.append(u)
    return len(seen) == len(members)


def validate_cycle(L: Landscape, C: Iterable[int]) -> Cycle:
    """
    Check the cycle property and compute depth and bottom.

    Raises:
        EmptySet: C is empty
        FullSet: C is the whole landscape
        NotConnected: C is not connected
        NotACycle: Some interior energy reaches the boundary minimum
    """
    members = frozenset(C)
    if not members:
        raise EmptySet("Cycle candidate is empty")
    if len(members) == L.n_states:
        raise FullSet("The whole state space is not a cycle")
    if not _is_connected(L, members):
        raise NotConnected(f"Cycle candidate {state_set(members)} is not connected")

    boundary, min_boundary = boundary_sets(L, members)
    boundary_min = L.energies[min_boundary[0]]
    interior_max = max(L.energies[s] for s in members)
    if interior_max >= boundary_min:
        raise NotACycle(
            f"Interior maximum {interior_max} is not below boundary minimum {boundary_min} "
            f"for {state_set(members)}"
        )
    floor = bottom(L, members)
    return Cycle(state_set(members), boundary_min - L.energies[floor[0]], floor)


def valley(L: Landscape, P: Union[Plateau, Sequence[int]], gamma: Energy, energy: Optional[Energy] = None) -> Cycle:
    """
    States whose communication height with P is less than H(P) + gamma.

    Args:
        L: Landscape
        P: Plateau (or a state set together with `energy`)
        gamma: Depth of P at the current level

    Returns:
        Validated Cycle with bottom containing P and depth gamma

    Raises:
        NotACycle / InvariantViolation: gamma is not the depth of P
    """
    if isinstance(P, Plateau):
        states, energy = P.states, P.energy
    else:
        states = state_set(P)
        if energy is None:
            energy = L.energies[states[0]]
    reach = allowed_neighborhood(L, states, cap=energy + gamma, strict=True)
    cycle = validate_cycle(L, reach)
    if cycle.depth != gamma or not set(states) <= set(cycle.bottom):
        raise InvariantViolation(
            f"Valley of {states} has depth {cycle.depth} and bottom {cycle.bottom}; expected depth {gamma}"
        )
    return cycle


def plateau_barriers(tree: MergeTree, plateaux: Sequence[Plateau]) -> np.ndarray:
    """Pairwise communication heights between plateaux (diagonal unset)."""
    return tree.group_heights([p.states for p in plateaux])


def initial_depths(
    L: Landscape,
    plateaux: Sequence[Plateau],
    tree: Optional[MergeTree] = None,
    barriers: Optional[np.ndarray] = None,
) -> tuple[tuple[Energy, ...], Energy]:
    """
    Depth of each plateau against the union of all others, and their minimum.

    The same formula gives the level-h depths when called with the level-h
    plateaux.

    Raises:
        SingleGround: Fewer than two plateaux
    """
    if len(plateaux) < 2:
        raise SingleGround(f"Need at least two plateaux, got {len(plateaux)}")
    if barriers is None:
        barriers = plateau_barriers(tree or barrier_filtration(L), plateaux)
    separation = barriers.min(axis=1)
    depths = tuple(int(separation[i]) - p.energy for i, p in enumerate(plateaux))
    return depths, min(depths)
