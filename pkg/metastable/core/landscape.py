"""
Finite energy landscapes and their static primitives.

A landscape is a connected, irreflexive, symmetric state graph with exact
integer energies. Everything downstream (plateaux, cycles, the level
hierarchy, finite-beta verification) is expressed in terms of the helpers
here:

    bottom / boundary_sets        argmin of energy, outer boundary and its minimizers
    comm_height                   minimax path energy between two state sets
    barrier_filtration            union-find merge tree answering comm_height in bulk
    restrict_to_omega_bar         sublevel component of the ground states below the tunneling barrier
    allowed_neighborhood          capped reachability avoiding a forbidden set

Energies are Python ints throughout. Landscapes with rational energies must be
rescaled by the caller before building.
"""

import heapq
import json
import logging
import re
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple, Optional, Sequence, Union

import numpy as np
from pydantic import ValidationError

from metastable.core.errors import (
    CapExceeded,
    CapExcludesSource,
    DisconnectedGraph,
    EmptyInput,
    EmptySet,
    FullSet,
    GroundMismatch,
    IndexOutOfRange,
    InputError,
    InvalidEdge,
    LandscapeFormatError,
    Overlap,
    SelfLoop,
    SingleGround,
)
from metastable.models import LandscapeFile, StateEntry

logger = logging.getLogger(__name__)

Energy = int
StateId = int
StateSet = tuple[StateId, ...]

DEFAULT_STATE_CAP = 5_000_000


def state_set(states: Iterable[StateId]) -> StateSet:
    """Canonical form of a state set: sorted, duplicate-free tuple."""
    return tuple(sorted(set(states)))


@dataclass(frozen=True, eq=False)
class Landscape:
    """
    Immutable state graph with integer energies.

    Attributes:
        energies: Energy of each state, indexed by StateId
        neighbors: Sorted adjacency tuple per state
        labels: Optional opaque label per state
    """

    energies: tuple[Energy, ...]
    neighbors: tuple[tuple[StateId, ...], ...]
    labels: tuple[Optional[str], ...]

    def __len__(self) -> int:
        return len(self.energies)

    @property
    def n_states(self) -> int:
        return len(self.energies)

    def energy(self, state: StateId) -> Energy:
        return self.energies[state]

    def edges(self) -> Iterator[tuple[StateId, StateId]]:
        """Each undirected edge once, as (i, j) with i < j."""
        for i, nbrs in enumerate(self.neighbors):
            for j in nbrs:
                if i < j:
                    yield i, j

    @cached_property
    def n_edges(self) -> int:
        return sum(len(nbrs) for nbrs in self.neighbors) // 2

    @cached_property
    def energy_array(self) -> np.ndarray:
        return np.asarray(self.energies, dtype=np.int64)

    @cached_property
    def _label_index(self) -> dict[str, StateId]:
        return {label: i for i, label in enumerate(self.labels) if label is not None}

    def index_of(self, label: str) -> StateId:
        """Look up a state by its label."""
        try:
            return self._label_index[label]
        except KeyError:
            raise IndexOutOfRange(f"No state labelled {label!r}") from None

    def ground_states(self) -> StateSet:
        """The global energy minimizers of the landscape."""
        return bottom(self, range(self.n_states))

    def subgraph(self, states: Iterable[StateId]) -> tuple["Landscape", StateSet]:
        """
        Induced sub-landscape on `states`.

        Returns:
            Tuple of (sub-landscape, old ids). New StateId i corresponds to
            old StateId old_ids[i]; relative order is preserved.
        """
        old_ids = state_set(states)
        new_id = {old: new for new, old in enumerate(old_ids)}
        neighbors = tuple(
            tuple(new_id[u] for u in self.neighbors[old] if u in new_id)
            for old in old_ids
        )
        sub = Landscape(
            energies=tuple(self.energies[old] for old in old_ids),
            neighbors=neighbors,
            labels=tuple(self.labels[old] for old in old_ids),
        )
        return sub, old_ids


def _member_ids(L: Landscape, states: Iterable[StateId], name: str) -> frozenset[StateId]:
    members = frozenset(states)
    for s in members:
        if not isinstance(s, (int, np.integer)) or not 0 <= s < L.n_states:
            raise IndexOutOfRange(f"{name}: state {s!r} not in landscape of {L.n_states} states")
    return frozenset(int(s) for s in members)


def _nonempty(L: Landscape, states: Iterable[StateId], name: str) -> frozenset[StateId]:
    members = _member_ids(L, states, name)
    if not members:
        raise EmptySet(f"{name} must be nonempty")
    return members


def build_landscape(
    states: Sequence[tuple[Optional[str], Energy]],
    edges: Iterable[tuple[StateId, StateId]],
    state_cap: int = DEFAULT_STATE_CAP,
) -> Landscape:
    """
    Build and validate a landscape. StateIds follow input order.

    Args:
        states: (label, energy) per state; label may be None
        edges: Undirected index pairs; duplicates are dropped with a warning
        state_cap: Hard limit on the number of states

    Returns:
        Connected Landscape

    Raises:
        EmptyInput: No states
        CapExceeded: More than state_cap states
        LandscapeFormatError: Non-integer energy
        InvalidEdge: Endpoint out of range
        SelfLoop: Edge (i, i)
        DisconnectedGraph: Graph has more than one component
    """
    n = len(states)
    if n == 0:
        raise EmptyInput("Landscape needs at least one state")
    if n > state_cap:
        raise CapExceeded(f"{n} states exceed the configured cap of {state_cap}")

    labels: list[Optional[str]] = []
    energies: list[Energy] = []
    for i, (label, energy) in enumerate(states):
        if isinstance(energy, bool) or not isinstance(energy, (int, np.integer)):
            raise LandscapeFormatError(f"State {i}: energy must be an integer, got {energy!r}")
        labels.append(label)
        energies.append(int(energy))

    adjacency: list[set[StateId]] = [set() for _ in range(n)]
    duplicates = 0
    for k, (i, j) in enumerate(edges):
        if not (0 <= i < n and 0 <= j < n):
            raise InvalidEdge(f"Edge {k}: ({i}, {j}) references a state outside 0..{n - 1}")
        if i == j:
            raise SelfLoop(f"Edge {k}: self-loop on state {i}")
        if j in adjacency[i]:
            duplicates += 1
            continue
        adjacency[i].add(j)
        adjacency[j].add(i)
    if duplicates:
        logger.warning(f"Dropped {duplicates} duplicate edge(s)")

    landscape = Landscape(
        energies=tuple(energies),
        neighbors=tuple(tuple(sorted(nbrs)) for nbrs in adjacency),
        labels=tuple(labels),
    )

    reached = _reachable(landscape, [0], lambda s: True, frozenset())
    if len(reached) != n:
        missing = min(set(range(n)) - reached)
        raise DisconnectedGraph(
            f"Landscape is disconnected: state {missing} unreachable from state 0 "
            f"({len(reached)} of {n} states reachable)"
        )

    logger.debug(f"Built landscape: {n} states, {landscape.n_edges} edges")
    return landscape


def _reachable(L: Landscape, sources, allowed, forbidden: frozenset) -> set[StateId]:
    seen = set(sources)
    queue = deque(seen)
    while queue:
        s = queue.popleft()
        for u in L.neighbors[s]:
            if u not in seen and u not in forbidden and allowed(u):
                seen.add(u)
                queue.append(u)
    return seen


def bottom(L: Landscape, A: Iterable[StateId]) -> StateSet:
    """
    Energy minimizers of A.

    Raises:
        EmptySet: A is empty
    """
    members = _nonempty(L, A, "A")
    low = min(L.energies[s] for s in members)
    return state_set(s for s in members if L.energies[s] == low)


def boundary_sets(L: Landscape, A: Iterable[StateId]) -> tuple[StateSet, StateSet]:
    """
    Outer boundary of A and its energy minimizers.

    Raises:
        EmptySet: A is empty
        FullSet: A is the whole state space
    """
    members = _nonempty(L, A, "A")
    if len(members) == L.n_states:
        raise FullSet("Boundary of the whole state space is undefined")
    boundary = {u for s in members for u in L.neighbors[s] if u not in members}
    return state_set(boundary), bottom(L, boundary)


def comm_height(L: Landscape, A: Iterable[StateId], B: Iterable[StateId]) -> Energy:
    """
    Communication height between A and B: the least, over paths from A to B,
    of the highest energy met along the path.

    Raises:
        EmptySet: A or B empty
        Overlap: A and B intersect
    """
    sources = _nonempty(L, A, "A")
    targets = _nonempty(L, B, "B")
    if sources & targets:
        raise Overlap(f"A and B share states {state_set(sources & targets)}")

    best: dict[StateId, Energy] = {}
    heap = [(L.energies[s], s) for s in sources]
    heapq.heapify(heap)
    for height, s in heap:
        best[s] = height
    while heap:
        height, s = heapq.heappop(heap)
        if height > best.get(s, height):
            continue
        if s in targets:
            return height
        for u in L.neighbors[s]:
            candidate = max(height, L.energies[u])
            if candidate < best.get(u, candidate + 1):
                best[u] = candidate
                heapq.heappush(heap, (candidate, u))
    raise DisconnectedGraph("No path between A and B")


def allowed_neighborhood(
    L: Landscape,
    A: Iterable[StateId],
    cap: Energy,
    forbidden: Iterable[StateId] = (),
    strict: bool = False,
) -> StateSet:
    """
    States reachable from A along paths that stay at energy <= cap
    (< cap when strict) and never touch `forbidden`.

    Raises:
        EmptySet: A empty
        Overlap: A meets forbidden
        CapExcludesSource: Some state of A violates the cap
    """
    sources = _nonempty(L, A, "A")
    blocked = _member_ids(L, forbidden, "forbidden")
    if sources & blocked:
        raise Overlap(f"A meets the forbidden set at {state_set(sources & blocked)}")

    if strict:
        allowed = lambda s: L.energies[s] < cap  # noqa: E731
    else:
        allowed = lambda s: L.energies[s] <= cap  # noqa: E731
    offending = [s for s in sources if not allowed(s)]
    if offending:
        raise CapExcludesSource(
            f"States {state_set(offending)} exceed the cap {cap} ({'strict' if strict else 'non-strict'})"
        )
    return state_set(_reachable(L, sources, allowed, blocked))


@dataclass(frozen=True)
class MergeEvent:
    """Two sublevel components join at `energy`; left/right are members of each."""

    energy: Energy
    left: StateId
    right: StateId


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return ra


class MergeTree:
    """
    Merge structure of the sublevel filtration.

    Leaves are states at their own energy; each merge event adds an internal
    node at the energy where two components join. The communication height
    of a pair is the energy of their lowest common ancestor, found by binary
    lifting.

    Args:
        energies: Energy per state
        events: Merge events in non-decreasing energy order
    """

    UNSET = np.iinfo(np.int64).max

    def __init__(self, energies: Sequence[Energy], events: Sequence[MergeEvent]):
        self.energies = tuple(energies)
        self.events = tuple(events)
        n, m = len(self.energies), len(self.events)
        total = n + m

        node_energy = list(self.energies) + [ev.energy for ev in self.events]
        up = np.arange(total, dtype=np.int64)
        uf = _UnionFind(n)
        top = list(range(n))
        for k, ev in enumerate(self.events):
            node = n + k
            ra, rb = uf.find(ev.left), uf.find(ev.right)
            up[top[ra]] = node
            up[top[rb]] = node
            top[uf.union(ra, rb)] = node

        depth = np.zeros(total, dtype=np.int64)
        for x in range(total - 1, -1, -1):
            if up[x] != x:
                depth[x] = depth[up[x]] + 1

        levels = max(1, int(total).bit_length())
        ancestors = np.empty((levels, total), dtype=np.int64)
        ancestors[0] = up
        for k in range(1, levels):
            ancestors[k] = ancestors[k - 1][ancestors[k - 1]]

        self._node_energy = node_energy
        self._depth = depth
        self._ancestors = ancestors

    def height(self, a: StateId, b: StateId) -> Energy:
        """Communication height of a and b; height(a, a) is the energy of a."""
        if a == b:
            return self.energies[a]
        anc, depth = self._ancestors, self._depth
        if depth[a] < depth[b]:
            a, b = b, a
        diff = int(depth[a] - depth[b])
        k = 0
        while diff:
            if diff & 1:
                a = int(anc[k][a])
            diff >>= 1
            k += 1
        if a == b:
            return self._node_energy[a]
        for k in range(anc.shape[0] - 1, -1, -1):
            if anc[k][a] != anc[k][b]:
                a, b = int(anc[k][a]), int(anc[k][b])
        if anc[0][a] == a:
            raise DisconnectedGraph(f"States {a} and {b} lie in different components")
        return self._node_energy[int(anc[0][a])]

    def set_height(self, A: Iterable[StateId], B: Iterable[StateId]) -> Energy:
        """Communication height between disjoint state sets, by replaying the merges."""
        sources, targets = frozenset(A), frozenset(B)
        if not sources or not targets:
            raise EmptySet("A and B must be nonempty")
        if sources & targets:
            raise Overlap(f"A and B share states {state_set(sources & targets)}")
        uf = _UnionFind(len(self.energies))
        flags = [0] * len(self.energies)
        for s in sources:
            flags[s] |= 1
        for s in targets:
            flags[s] |= 2
        for ev in self.events:
            ra, rb = uf.find(ev.left), uf.find(ev.right)
            joined = flags[ra] | flags[rb]
            if joined == 3:
                return ev.energy
            flags[uf.union(ra, rb)] = joined
        raise DisconnectedGraph("A and B lie in different components")

    def group_heights(self, groups: Sequence[Iterable[StateId]]) -> np.ndarray:
        """
        Pairwise communication heights between disjoint groups of states.

        Returns:
            Symmetric int64 matrix M with M[i, j] = height(G_i, G_j) for i != j.
            The diagonal holds MergeTree.UNSET.
        """
        k = len(groups)
        owner: dict[StateId, int] = {}
        for g, members in enumerate(groups):
            for s in members:
                if s in owner:
                    raise Overlap(f"State {s} belongs to groups {owner[s]} and {g}")
                owner[s] = g

        heights = np.full((k, k), self.UNSET, dtype=np.int64)
        uf = _UnionFind(len(self.energies))
        tags: dict[int, set[int]] = {s: {g} for s, g in owner.items()}
        for ev in self.events:
            ra, rb = uf.find(ev.left), uf.find(ev.right)
            ta, tb = tags.pop(ra, None), tags.pop(rb, None)
            if ta and tb:
                ia = np.fromiter(ta, dtype=np.int64)
                ib = np.fromiter(tb, dtype=np.int64)
                block = heights[np.ix_(ia, ib)]
                block[block == self.UNSET] = ev.energy
                heights[np.ix_(ia, ib)] = block
                heights[np.ix_(ib, ia)] = block.T
            root = uf.union(ra, rb)
            if ta or tb:
                if ta and tb and len(ta) < len(tb):
                    ta, tb = tb, ta
                merged = ta or set()
                if tb:
                    merged |= tb
                tags[root] = merged
        np.fill_diagonal(heights, self.UNSET)
        return heights


def barrier_filtration(L: Landscape) -> MergeTree:
    """
    Sweep states by ascending energy, merging each newly activated state with
    its already-active neighbours at the state's own energy.
    """
    order = sorted(range(L.n_states), key=lambda s: (L.energies[s], s))
    active = [False] * L.n_states
    uf = _UnionFind(L.n_states)
    events: list[MergeEvent] = []
    for v in order:
        active[v] = True
        for u in L.neighbors[v]:
            if active[u] and uf.find(u) != uf.find(v):
                events.append(MergeEvent(L.energies[v], v, u))
                uf.union(u, v)
    return MergeTree(L.energies, events)


class OmegaBar(NamedTuple):
    """Result of restricting a landscape below the ground-state tunneling barrier."""

    phi_bar: Energy
    restricted: Landscape
    state_map: StateSet


def restrict_to_omega_bar(
    L: Landscape,
    ground: Optional[Iterable[StateId]] = None,
    tree: Optional[MergeTree] = None,
) -> OmegaBar:
    """
    Restrict to the states reachable from the ground states without exceeding
    the largest pairwise ground-state barrier.

    Args:
        L: Landscape
        ground: Expected ground states; validated against the true minimizers
        tree: Precomputed merge tree of L

    Returns:
        OmegaBar(phi_bar, restricted landscape, restricted id -> original id)

    Raises:
        GroundMismatch: `ground` differs from the landscape's minimizers
        SingleGround: Fewer than two ground states
    """
    minimizers = L.ground_states()
    if ground is not None and state_set(ground) != minimizers:
        raise GroundMismatch(f"Given ground states {state_set(ground)} differ from minimizers {minimizers}")
    if len(minimizers) < 2:
        raise SingleGround(f"Landscape has a single ground state {minimizers}")

    tree = tree or barrier_filtration(L)
    phi_bar = max(tree.height(a, b) for a, b in combinations(minimizers, 2))
    reach = allowed_neighborhood(L, minimizers, cap=phi_bar)
    restricted, state_map = L.subgraph(reach)
    logger.info(
        f"Restricted to {restricted.n_states} of {L.n_states} states below barrier {phi_bar}"
    )
    return OmegaBar(phi_bar, restricted, state_map)


def _json_path(loc: Sequence[Union[str, int]]) -> str:
    path = ""
    for part in loc:
        path += f"[{part}]" if isinstance(part, int) else (f".{part}" if path else str(part))
    return path or "<root>"


_JSON_WS = re.compile(r"[ \t\n\r]*")


def _skip(text: str, pos: int) -> int:
    return _JSON_WS.match(text, pos).end()


def _locate(text: str, loc: Sequence[Union[str, int]]) -> Optional[int]:
    """
    Offset of the value at a pydantic error location in the JSON text, or
    None when the text does not follow the location. A missing key resolves
    to the start of its object.
    """
    decoder = json.JSONDecoder()
    pos = _skip(text, 0)
    try:
        for part in loc:
            if isinstance(part, int):
                if text[pos] != "[":
                    return None
                pos = _skip(text, pos + 1)
                for _ in range(part):
                    _, pos = decoder.raw_decode(text, pos)
                    pos = _skip(text, pos)
                    if text[pos] != ",":
                        return None
                    pos = _skip(text, pos + 1)
                continue
            if text[pos] != "{":
                return None
            start = pos
            pos = _skip(text, pos + 1)
            while text[pos] != "}":
                key, pos = decoder.raw_decode(text, pos)
                pos = _skip(text, _skip(text, pos) + 1)
                if key == part:
                    break
                _, pos = decoder.raw_decode(text, pos)
                pos = _skip(text, pos)
                if text[pos] == ",":
                    pos = _skip(text, pos + 1)
            else:
                return start
    except (IndexError, ValueError):
        return None
    return pos


def _line_col(text: str, pos: int) -> tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    return line, pos - (text.rfind("\n", 0, pos) + 1) + 1


def load_landscape(path: Union[str, Path], state_cap: int = DEFAULT_STATE_CAP) -> Landscape:
    """
    Load a landscape from its JSON file.

    Raises:
        FileNotFoundError: Missing file
        LandscapeFormatError: Syntax errors (with line:column) or schema
            errors (with line:column of the offending value and its JSON path)
        InputError: Any build_landscape error, prefixed with the file name
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Landscape file not found: {path}")
    text = path.read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise LandscapeFormatError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from e
    try:
        doc = LandscapeFile.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        where = _locate(text, first["loc"])
        prefix = str(path)
        if where is not None:
            line, col = _line_col(text, where)
            prefix = f"{path}:{line}:{col}"
        raise LandscapeFormatError(f"{prefix}: {_json_path(first['loc'])}: {first['msg']}") from e

    try:
        landscape = build_landscape(
            [(entry.label, entry.energy) for entry in doc.states],
            [(i, j) for i, j in doc.edges],
            state_cap=state_cap,
        )
    except InputError as e:
        raise type(e)(f"{path}: {e}") from e
    logger.info(f"Loaded landscape from {path}: {landscape.n_states} states")
    return landscape


def landscape_document(L: Landscape) -> LandscapeFile:
    """The JSON document model of a landscape."""
    return LandscapeFile(
        states=[StateEntry(label=label, energy=energy) for label, energy in zip(L.labels, L.energies)],
        edges=[[i, j] for i, j in L.edges()],
    )


def save_landscape(L: Landscape, path: Union[str, Path]) -> Path:
    """Write a landscape in the JSON file format."""
    from metastable.core.report_io import write_json

    return write_json(landscape_document(L).model_dump(mode="json"), path)
