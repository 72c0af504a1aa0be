"""
Kawasaki lattice gas on the K x L torus.

Configurations are integers used as bit sets: site (column k, row l) is bit
l * K + k. The particle count is L * N0; the ground states are the vertical
strips of width N0. Exchanging an occupied site with an adjacent vacant one
is the only move.
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Optional

import numpy as np

from metastable.core.errors import (
    CapExceeded,
    IndexOutOfRange,
    InvalidParams,
    WrongParticleCount,
)
from metastable.core.landscape import Energy, Landscape, barrier_filtration, build_landscape

logger = logging.getLogger(__name__)

DEFAULT_ENUMERATION_CAP = 10_000_000


@dataclass(frozen=True)
class KawasakiParams:
    """
    Torus geometry and particle count.

    Args:
        K: Number of columns
        L: Number of rows (K > L)
        N0: Strip width, with L/4 < N0 < K/2; there are L * N0 particles
    """
    K: int
    L: int
    N0: int

    def __post_init__(self):
        for name in ("K", "L", "N0"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise InvalidParams(f"{name} must be a positive integer, got {value!r}")
        if self.K <= self.L:
            raise InvalidParams(f"Need K > L, got K={self.K}, L={self.L}")
        if not (self.L < 4 * self.N0 and 2 * self.N0 < self.K):
            raise InvalidParams(f"Need L/4 < N0 < K/2, got N0={self.N0} with K={self.K}, L={self.L}")

    @property
    def n_sites(self) -> int:
        return self.K * self.L

    @property
    def n_particles(self) -> int:
        return self.L * self.N0

    @property
    def ground_energy(self) -> Energy:
        return -2 * self.L * self.N0 + self.L

    @property
    def barrier(self) -> Energy:
        """Communication height between distinct ground states."""
        return self.ground_energy + 4

    def site(self, k: int, l: int) -> int:
        return (l % self.L) * self.K + (k % self.K)

    def coords(self, x: int) -> tuple[int, int]:
        """(column, row) of a site."""
        return x % self.K, x // self.K

    @cached_property
    def neighbor_sites(self) -> tuple[tuple[int, ...], ...]:
        table = []
        for x in range(self.n_sites):
            k, l = self.coords(x)
            nbrs = {self.site(k + 1, l), self.site(k - 1, l), self.site(k, l + 1), self.site(k, l - 1)}
            nbrs.discard(x)
            table.append(tuple(sorted(nbrs)))
        return tuple(table)

    @cached_property
    def neighbor_masks(self) -> tuple[int, ...]:
        return tuple(sum(1 << y for y in nbrs) for nbrs in self.neighbor_sites)

    @cached_property
    def bonds(self) -> tuple[tuple[int, int], ...]:
        """Each nearest-neighbour bond once, as (x, y) with x < y."""
        return tuple((x, y) for x, nbrs in enumerate(self.neighbor_sites) for y in nbrs if x < y)

    @cached_property
    def _forward_masks(self) -> tuple[int, ...]:
        return tuple(sum(1 << y for y in nbrs if y > x) for x, nbrs in enumerate(self.neighbor_sites))


@dataclass(frozen=True, order=True)
class LatticeConfig:
    """Occupancy bit set with its site count and cached particle count."""
    bits: int
    n_sites: int = field(compare=False)
    particles: int = field(compare=False)

    @classmethod
    def from_bits(cls, p: KawasakiParams, bits: int) -> "LatticeConfig":
        if bits < 0 or bits >> p.n_sites:
            raise IndexOutOfRange(f"Bit pattern {bits:#x} does not fit {p.n_sites} sites")
        return cls(bits, p.n_sites, bits.bit_count())

    @classmethod
    def from_sites(cls, p: KawasakiParams, sites: Iterable[int]) -> "LatticeConfig":
        bits = 0
        for x in sites:
            if not 0 <= x < p.n_sites:
                raise IndexOutOfRange(f"Site {x} outside 0..{p.n_sites - 1}")
            bits |= 1 << x
        return cls.from_bits(p, bits)

    def occupied(self, x: int) -> bool:
        return bool(self.bits >> x & 1)

    def sites(self) -> tuple[int, ...]:
        return tuple(x for x in range(self.n_sites) if self.bits >> x & 1)

    def to_grid(self, p: KawasakiParams) -> np.ndarray:
        """Occupancy as an L x K array (row, column)."""
        flat = np.array([(self.bits >> x) & 1 for x in range(p.n_sites)], dtype=np.uint8)
        return flat.reshape(p.L, p.K)

    @property
    def label(self) -> str:
        return f"{self.bits:0{(self.n_sites + 3) // 4}x}"


def decode_label(p: KawasakiParams, label: str) -> LatticeConfig:
    return LatticeConfig.from_bits(p, int(label, 16))


def _check_count(p: KawasakiParams, c: LatticeConfig) -> None:
    if c.particles != p.n_particles:
        raise WrongParticleCount(f"Configuration has {c.particles} particles, expected {p.n_particles}")


def hamiltonian(p: KawasakiParams, c: LatticeConfig) -> Energy:
    """Minus the number of occupied nearest-neighbour bonds."""
    _check_count(p, c)
    bits = c.bits
    forward = p._forward_masks
    return -sum((bits & forward[x]).bit_count() for x in range(p.n_sites) if bits >> x & 1)


def interface_count(p: KawasakiParams, c: LatticeConfig) -> int:
    """Number of bonds joining an occupied and a vacant site."""
    _check_count(p, c)
    bits = c.bits
    return sum(1 for x, y in p.bonds if (bits >> x & 1) != (bits >> y & 1))


def interface_decomposition(p: KawasakiParams, c: LatticeConfig) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """
    Interfaces split by orientation.

    Returns:
        (per-column counts of vertical-bond interfaces, per-row counts of
        horizontal-bond interfaces); the grand total is interface_count.
    """
    _check_count(p, c)
    columns = [0] * p.K
    rows = [0] * p.L
    bits = c.bits
    for x, y in p.bonds:
        if (bits >> x & 1) == (bits >> y & 1):
            continue
        (kx, lx), (ky, _) = p.coords(x), p.coords(y)
        if kx == ky:
            columns[kx] += 1
        else:
            rows[lx] += 1
    return tuple(columns), tuple(rows)


def kawasaki_neighbors(p: KawasakiParams, c: LatticeConfig) -> list[LatticeConfig]:
    """All configurations one particle/vacancy exchange away, sorted by bit pattern."""
    _check_count(p, c)
    bits = c.bits
    found = set()
    for x in range(p.n_sites):
        if not bits >> x & 1:
            continue
        for y in p.neighbor_sites[x]:
            if not bits >> y & 1:
                found.add(bits ^ (1 << x) ^ (1 << y))
    return [LatticeConfig(b, p.n_sites, c.particles) for b in sorted(found)]


def translate(p: KawasakiParams, c: LatticeConfig, dx: int = 0, dy: int = 0) -> LatticeConfig:
    """Shift every particle by dx columns and dy rows."""
    moved = []
    for x in c.sites():
        k, l = p.coords(x)
        moved.append(p.site(k + dx, l + dy))
    return LatticeConfig.from_sites(p, moved)


def _check_column(p: KawasakiParams, k: int) -> None:
    if not 0 <= k < p.K:
        raise IndexOutOfRange(f"Column {k} outside 0..{p.K - 1}")


def _check_row(p: KawasakiParams, l: int) -> None:
    if not 0 <= l < p.L:
        raise IndexOutOfRange(f"Row {l} outside 0..{p.L - 1}")


def stick(p: KawasakiParams, k: int, m: int, l: int) -> tuple[int, ...]:
    """Sites of the vertical segment of length m in column k starting at row l."""
    _check_column(p, k % p.K)
    if not 0 <= m <= p.L:
        raise IndexOutOfRange(f"Stick length {m} outside 0..{p.L}")
    return tuple(p.site(k, l + i) for i in range(m))


def ground_state(p: KawasakiParams, k: int) -> LatticeConfig:
    """Strip occupying columns k .. k + N0 - 1."""
    _check_column(p, k)
    return LatticeConfig.from_sites(
        p, (p.site(k + j, l) for j in range(p.N0) for l in range(p.L))
    )


def shallow_bottom(p: KawasakiParams, k: int, m: int, l: int, l2: int) -> LatticeConfig:
    """
    Strip with its left column split into two sticks: L - m particles stay in
    column k from row l, m particles sit in column k + N0 from row l2.
    """
    _check_column(p, k)
    if not 1 <= m <= p.L - 1:
        raise IndexOutOfRange(f"Stick length m={m} outside 1..{p.L - 1}")
    _check_row(p, l)
    _check_row(p, l2)
    sites = [p.site(k + j, row) for j in range(1, p.N0) for row in range(p.L)]
    sites += stick(p, k, p.L - m, l)
    sites += stick(p, (k + p.N0) % p.K, m, l2)
    return LatticeConfig.from_sites(p, sites)


def shallow_family(p: KawasakiParams, k: int, m: int) -> list[LatticeConfig]:
    """The L * L shallow bottoms with stick length m next to strip k."""
    return [shallow_bottom(p, k, m, l, l2) for l in range(p.L) for l2 in range(p.L)]


def reference_path(p: KawasakiParams, k: int) -> list[LatticeConfig]:
    """
    Path from strip k to strip k + 1 in L * N0 exchanges, shifting one row at
    a time, right-most particle first.
    """
    _check_column(p, k)
    current = ground_state(p, k)
    path = [current]
    for q in range(p.L):
        for j in range(p.N0):
            src = p.site(k + p.N0 - j - 1, q)
            dst = p.site(k + p.N0 - j, q)
            current = LatticeConfig(current.bits ^ (1 << src) ^ (1 << dst), p.n_sites, current.particles)
            path.append(current)
    if path[-1].bits != ground_state(p, (k + 1) % p.K).bits:
        raise AssertionError(f"Reference path from strip {k} does not end at strip {(k + 1) % p.K}")
    return path


def enumerate_omega_bar(p: KawasakiParams, cap: int = DEFAULT_ENUMERATION_CAP) -> Landscape:
    """
    States reachable from the ground strips through exchanges that never
    exceed the ground-state barrier, as a Landscape.

    Energies are updated incrementally: moving a particle from x to vacant y
    changes the energy by n(x) - (n(y) - 1), where n counts occupied
    neighbours before the move.

    Raises:
        CapExceeded: More than `cap` states
    """
    ceiling = p.barrier
    masks = p.neighbor_masks
    nbr_sites = p.neighbor_sites
    n_sites = p.n_sites

    energy: dict[int, Energy] = {}
    queue: deque[int] = deque()
    for k in range(p.K):
        bits = ground_state(p, k).bits
        energy[bits] = p.ground_energy
        queue.append(bits)

    while queue:
        bits = queue.popleft()
        e = energy[bits]
        for x in range(n_sites):
            if not bits >> x & 1:
                continue
            lost = (bits & masks[x]).bit_count()
            for y in nbr_sites[x]:
                if bits >> y & 1:
                    continue
                moved = e + lost - ((bits & masks[y]).bit_count() - 1)
                if moved > ceiling:
                    continue
                nb = bits ^ (1 << x) ^ (1 << y)
                if nb not in energy:
                    energy[nb] = moved
                    if len(energy) > cap:
                        raise CapExceeded(f"Sublevel enumeration exceeded {cap} states")
                    queue.append(nb)

    ordered = sorted(energy)
    index = {bits: i for i, bits in enumerate(ordered)}
    edges = []
    for i, bits in enumerate(ordered):
        for x in range(n_sites):
            if not bits >> x & 1:
                continue
            for y in nbr_sites[x]:
                if bits >> y & 1:
                    continue
                j = index.get(bits ^ (1 << x) ^ (1 << y))
                if j is not None and i < j:
                    edges.append((i, j))

    width = (n_sites + 3) // 4
    states = [(f"{bits:0{width}x}", energy[bits]) for bits in ordered]
    landscape = build_landscape(states, edges, state_cap=max(cap, len(states)))
    logger.info(
        f"Enumerated {landscape.n_states} states and {landscape.n_edges} edges at or below energy {ceiling} "
        f"for K={p.K}, L={p.L}, N0={p.N0}"
    )
    ground_barrier(p, landscape)
    return landscape


def ground_barrier(p: KawasakiParams, L: Landscape) -> Energy:
    """
    Largest communication height between two ground strips of an enumerated
    landscape.

    Strips of width 2 can tunnel one unit below `p.barrier`, so the value is
    computed rather than assumed; a warning is logged whenever the two differ.
    """
    grounds = [state_of(L, ground_state(p, k)) for k in range(p.K)]
    if any(g is None for g in grounds):
        raise IndexOutOfRange("Landscape is missing a ground strip")
    tree = barrier_filtration(L)
    height = max(tree.height(a, b) for a, b in combinations(grounds, 2))
    if height < p.barrier:
        logger.warning(
            f"Ground-state barrier {height} for K={p.K}, L={p.L}, N0={p.N0} is below "
            f"H0+4 = {p.barrier}; the enumerated set extends past the tunneling region"
        )
    return height


def config_of(p: KawasakiParams, L: Landscape, state: int) -> LatticeConfig:
    """Configuration behind a state of an enumerated landscape."""
    label = L.labels[state]
    if label is None:
        raise IndexOutOfRange(f"State {state} carries no configuration label")
    return decode_label(p, label)


def state_of(L: Landscape, c: LatticeConfig) -> Optional[int]:
    """StateId of a configuration in an enumerated landscape, or None."""
    try:
        return L.index_of(c.label)
    except IndexOutOfRange:
        return None
