"""
Level hierarchy of the limit dynamics.

Each level contracts the current cycles into single nodes and keeps only the
order-one jumps (induced chain). It then watches that chain on the bottoms of
the deep cycles (trace chain) and splits the result into recurrent classes
and transient plateaux. The recurrent classes of level h-1 merge into the
plateaux of level h. Iteration stops at the first level with a single class.

Node numbering in an InducedChain: states keep their StateId; cycle k of the
chain's cycle list is node n_states + k.
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Optional, Sequence, Union

import networkx as nx
import numpy as np

from metastable.core.errors import (
    ClassificationViolation,
    IndexOutOfRange,
    InvariantViolation,
    Overlap,
    SingleGround,
    TerminalReached,
    UnreachableTarget,
)
from metastable.core.exact_linalg import solve_float, solve_rational
from metastable.core.landscape import (
    Energy,
    Landscape,
    MergeTree,
    StateSet,
    barrier_filtration,
    boundary_sets,
    restrict_to_omega_bar,
    state_set,
)
from metastable.core.plateaux import (
    Cycle,
    Plateau,
    initial_depths,
    plateau_barriers,
    stable_plateaux,
    valley,
    validate_cycle,
)

logger = logging.getLogger(__name__)

Rate = Union[Fraction, float]

FLOAT_RESIDUAL = 1e-10


@dataclass(frozen=True, eq=False)
class InducedChain:
    """
    Markov chain on the states outside all cycles plus one node per cycle.

    Attributes:
        landscape: Underlying landscape
        cycles: Contracted cycles, in node order
        gamma_star: Minimal depth among the deep (star) cycles
        owner: Cycle index per state, -1 outside every cycle
        rates: Sparse outgoing rates per node
    """
    landscape: Landscape
    cycles: tuple[Cycle, ...]
    gamma_star: Energy
    owner: np.ndarray
    rates: dict[int, dict[int, Fraction]]

    @property
    def n_states(self) -> int:
        return self.landscape.n_states

    def cycle_node(self, k: int) -> int:
        return self.n_states + k

    def is_cycle(self, node: int) -> bool:
        return node >= self.n_states

    @cached_property
    def delta(self) -> StateSet:
        """States outside every cycle."""
        return tuple(int(s) for s in np.flatnonzero(self.owner < 0))

    @cached_property
    def star_indices(self) -> tuple[int, ...]:
        return tuple(k for k, c in enumerate(self.cycles) if c.depth >= self.gamma_star)

    @cached_property
    def sharp_indices(self) -> tuple[int, ...]:
        return tuple(k for k, c in enumerate(self.cycles) if c.depth < self.gamma_star)

    def rate(self, source: int, target: int) -> Fraction:
        return self.rates.get(source, {}).get(target, Fraction(0))

    def out_rate(self, node: int) -> Fraction:
        return sum(self.rates.get(node, {}).values(), Fraction(0))


@dataclass(frozen=True, eq=False)
class LimitChain:
    """
    Trace of an induced chain on the bottoms of its deep cycles.

    `rates` is dense and includes the diagonal (jumps that leave a cycle and
    come back to it), so each row sums to the total order-one exit rate.
    """
    plateaux: tuple[Plateau, ...]
    rates: tuple[tuple[Rate, ...], ...]
    exact: bool = True

    def __len__(self) -> int:
        return len(self.plateaux)

    def rate(self, i: int, j: int) -> Rate:
        return self.rates[i][j]

    def row_sum(self, i: int) -> Rate:
        return sum(self.rates[i], Fraction(0) if self.exact else 0.0)

    def generator(self) -> np.ndarray:
        """Off-diagonal jump rates with the diagonal set so rows sum to zero."""
        G = np.array([[float(r) for r in row] for row in self.rates], dtype=np.float64)
        np.fill_diagonal(G, 0.0)
        np.fill_diagonal(G, -G.sum(axis=1))
        return G


@dataclass(frozen=True)
class ChainDecomposition:
    components: tuple[tuple[int, ...], ...]
    transient: tuple[int, ...]

    @property
    def nu(self) -> int:
        return len(self.components)


@dataclass(frozen=True, eq=False)
class Level:
    """
    One level of the hierarchy.

    Plateau i, depth i, valley i and limit-chain state i all refer to the
    same level plateau.
    """
    h: int
    plateaux: tuple[Plateau, ...]
    depths: tuple[Energy, ...]
    gamma_star: Energy
    prev_gamma_star: Energy
    valleys: tuple[Cycle, ...]
    sharp_cycles: tuple[Cycle, ...]
    barriers: np.ndarray
    induced: InducedChain
    chain: LimitChain
    components: tuple[tuple[int, ...], ...]
    transient: tuple[int, ...]

    @property
    def nu(self) -> int:
        return len(self.components)

    @property
    def cycles(self) -> tuple[Cycle, ...]:
        return self.valleys + self.sharp_cycles

    @cached_property
    def valley_union(self) -> StateSet:
        return state_set(s for v in self.valleys for s in v.states)

    @cached_property
    def _projection(self) -> dict[int, int]:
        return {s: i for i, v in enumerate(self.valleys) for s in v.states}

    def projection(self, state: int) -> Optional[int]:
        """Index of the valley containing `state`, or None outside all valleys."""
        return self._projection.get(state)

    def generator(self) -> np.ndarray:
        return self.chain.generator()


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    plateau: Optional[int]
    detail: str


@dataclass(frozen=True)
class ClassificationDiagnostics:
    """
    Outcome of the classification checks of one level.

    gamma_tilde holds, per valley, the largest climb needed inside the valley
    to reach its bottom (None for singleton valleys).
    """
    h: int
    results: tuple[CheckResult, ...]
    gamma_tilde: tuple[Optional[Energy], ...]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def failures(self) -> list[CheckResult]:
        return [r for r in self.results if not r.passed]


@dataclass(frozen=True, eq=False)
class HierarchyReport:
    """
    Full hierarchy of an analysed landscape.

    Attributes:
        landscape: Landscape the levels refer to (restricted when requested)
        source_states: State count of the landscape handed in
        state_map: Analysed StateId -> source StateId
        phi_bar: Ground-state tunneling barrier (None when unrestricted)
        nu0: Number of stable plateaux
        levels: Levels 1..terminal
        diagnostics: Classification diagnostics per level
    """
    landscape: Landscape
    source_states: int
    state_map: StateSet
    phi_bar: Optional[Energy]
    nu0: int
    levels: tuple[Level, ...]
    diagnostics: tuple[ClassificationDiagnostics, ...]
    tree: MergeTree = field(repr=False)

    @property
    def terminal(self) -> int:
        return len(self.levels)

    @property
    def gamma_stars(self) -> tuple[Energy, ...]:
        return tuple(level.gamma_star for level in self.levels)

    @property
    def nus(self) -> tuple[int, ...]:
        return tuple(level.nu for level in self.levels)

    def level(self, h: int) -> Level:
        if not 1 <= h <= len(self.levels):
            raise IndexOutOfRange(f"Level {h} outside 1..{len(self.levels)}")
        return self.levels[h - 1]


def induced_chain(L: Landscape, cycles: Sequence[Cycle], gamma_star: Energy) -> InducedChain:
    """
    Contract `cycles` and keep the jumps whose rate does not vanish on the
    gamma_star time scale.

    Rates:
        state -> state     1 when the target is not higher
        state -> cycle     number of edges into the cycle
        cycle -> state     contacts / |bottom|, only for cycles of depth <= gamma_star
                           and targets on the minimal boundary

    Raises:
        Overlap: Two cycles intersect
        InvariantViolation: A cycle boundary touches another cycle
    """
    n = L.n_states
    owner = np.full(n, -1, dtype=np.int64)
    for k, cycle in enumerate(cycles):
        idx = np.asarray(cycle.states, dtype=np.int64)
        clash = owner[idx] >= 0
        if clash.any():
            s = int(idx[clash][0])
            raise Overlap(f"Cycles {int(owner[s])} and {k} share state {s}")
        owner[idx] = k

    one = Fraction(1)
    rates: dict[int, dict[int, Fraction]] = {}
    for eta in np.flatnonzero(owner < 0).tolist():
        row: dict[int, Fraction] = {}
        level = L.energies[eta]
        for xi in L.neighbors[eta]:
            k = int(owner[xi])
            if k < 0:
                if L.energies[xi] <= level:
                    row[xi] = one
            else:
                node = n + k
                row[node] = row.get(node, Fraction(0)) + one
        if row:
            rates[eta] = row

    for k, cycle in enumerate(cycles):
        if cycle.depth > gamma_star:
            continue
        _, exits = boundary_sets(L, cycle.states)
        row = {}
        size = len(cycle.bottom)
        for eta in exits:
            if owner[eta] >= 0:
                raise InvariantViolation(f"Boundary state {eta} of cycle {k} lies in cycle {int(owner[eta])}")
            contacts = sum(1 for u in L.neighbors[eta] if owner[u] == k)
            row[eta] = Fraction(contacts, size)
        rates[n + k] = row

    return InducedChain(L, tuple(cycles), gamma_star, owner, rates)


def _absorption(
    ic: InducedChain,
    targets: dict[int, int],
    region: set[int],
    exact: bool,
    residual: float,
) -> dict[int, dict[int, Rate]]:
    """
    Probability, from each node of `region`, of entering each target first.

    The jump graph on `region` is condensed into strongly connected blocks;
    blocks are solved sink-first so every block sees only solved neighbours.
    """
    graph = nx.DiGraph()
    graph.add_nodes_from(region)
    for x in region:
        for y in ic.rates.get(x, {}):
            if y in region:
                graph.add_edge(x, y)

    condensed = nx.condensation(graph)
    solved: dict[int, dict[int, Rate]] = {}
    zero: Rate = Fraction(0) if exact else 0.0
    for block_id in reversed(list(nx.topological_sort(condensed))):
        members = sorted(condensed.nodes[block_id]["members"])
        index = {x: i for i, x in enumerate(members)}
        size = len(members)
        coeffs = [[zero] * size for _ in range(size)]
        rhs: list[dict[int, Rate]] = [{} for _ in range(size)]
        for i, x in enumerate(members):
            coeffs[i][i] += 1
            row = ic.rates[x]
            total = sum(row.values(), Fraction(0))
            for y, r in row.items():
                p: Rate = r / total if exact else float(r) / float(total)
                if y in index:
                    coeffs[i][index[y]] -= p
                elif y in targets:
                    t = targets[y]
                    rhs[i][t] = rhs[i].get(t, zero) + p
                else:
                    for t, v in solved[y].items():
                        rhs[i][t] = rhs[i].get(t, zero) + p * v

        if size == 1:
            solved[members[0]] = rhs[0]
            continue

        columns = sorted({t for row in rhs for t in row})
        if not columns:
            raise UnreachableTarget(f"Block of {size} nodes never reaches a deep cycle")
        B = [[row.get(t, zero) for t in columns] for row in rhs]
        if exact:
            X = solve_rational(coeffs, B)
        else:
            X = solve_float(np.asarray(coeffs, dtype=np.float64), np.asarray(B, dtype=np.float64), residual).tolist()
        for i, x in enumerate(members):
            solved[x] = {t: X[i][c] for c, t in enumerate(columns) if X[i][c] != 0}
    return solved


def trace_chain(ic: InducedChain, exact: bool = True, residual: float = FLOAT_RESIDUAL) -> LimitChain:
    """
    Trace of the induced chain on the deep-cycle bottoms.

    R*(i, j) = sum over eta of R(C_i, eta) * P_eta[first deep cycle entered is C_j]

    Args:
        ic: Induced chain
        exact: Rational arithmetic; False switches to float64 block solves
        residual: Residual bound for the float path

    Raises:
        UnreachableTarget: Some node reachable from a deep cycle never reaches one
    """
    n = ic.n_states
    star = ic.star_indices
    targets = {ic.cycle_node(k): pos for pos, k in enumerate(star)}

    region: set[int] = set()
    queue: deque[int] = deque()
    for k in star:
        for eta in ic.rates.get(ic.cycle_node(k), {}):
            if eta not in targets and eta not in region:
                region.add(eta)
                queue.append(eta)
    while queue:
        x = queue.popleft()
        row = ic.rates.get(x)
        if not row:
            raise UnreachableTarget(f"Node {x} has no order-one exit")
        for y in row:
            if y not in targets and y not in region:
                region.add(y)
                queue.append(y)

    # nodes of the region that can still reach a deep cycle
    predecessors: dict[int, list[int]] = {}
    frontier = deque()
    for x in region:
        for y in ic.rates[x]:
            if y in targets:
                frontier.append(x)
            elif y in region:
                predecessors.setdefault(y, []).append(x)
    alive = set(frontier)
    while frontier:
        y = frontier.popleft()
        for x in predecessors.get(y, ()):
            if x not in alive:
                alive.add(x)
                frontier.append(x)
    stuck = region - alive
    if stuck:
        sample = min(stuck)
        label = f"cycle {sample - n}" if sample >= n else f"state {sample}"
        raise UnreachableTarget(f"{len(stuck)} node(s) cannot reach a deep cycle, e.g. {label}")

    absorbed = _absorption(ic, targets, region, exact, residual)

    size = len(star)
    zero: Rate = Fraction(0) if exact else 0.0
    table = [[zero] * size for _ in range(size)]
    for i, k in enumerate(star):
        for eta, r in ic.rates.get(ic.cycle_node(k), {}).items():
            weight: Rate = r if exact else float(r)
            for j, prob in absorbed[eta].items():
                table[i][j] += weight * prob
    if not exact:
        table = [[0.0 if abs(v) < residual else v for v in row] for row in table]

    plateaux = tuple(
        Plateau(ic.cycles[k].bottom, ic.landscape.energies[ic.cycles[k].bottom[0]]) for k in star
    )
    return LimitChain(plateaux, tuple(tuple(row) for row in table), exact)


def classify_chain(lc: LimitChain) -> ChainDecomposition:
    """
    Closed communicating classes (recurrent components) and transient states,
    ignoring self-rates. Components are ordered by their smallest StateId.
    """
    graph = nx.DiGraph()
    graph.add_nodes_from(range(len(lc)))
    for i, row in enumerate(lc.rates):
        for j, r in enumerate(row):
            if i != j and r > 0:
                graph.add_edge(i, j)
    condensed = nx.condensation(graph)
    closed = [
        tuple(sorted(condensed.nodes[c]["members"]))
        for c in condensed.nodes
        if condensed.out_degree(c) == 0
    ]
    closed.sort(key=lambda comp: min(lc.plateaux[i].anchor for i in comp))
    recurrent = {i for comp in closed for i in comp}
    transient = tuple(i for i in range(len(lc)) if i not in recurrent)
    return ChainDecomposition(tuple(closed), transient)


def _assemble_level(
    L: Landscape,
    h: int,
    plateaux: Sequence[Plateau],
    depths: tuple[Energy, ...],
    gamma_star: Energy,
    prev_gamma_star: Energy,
    valleys: Sequence[Cycle],
    sharp: Sequence[Cycle],
    barriers: np.ndarray,
    exact: bool,
) -> Level:
    induced = induced_chain(L, list(valleys) + list(sharp), gamma_star)
    if len(induced.star_indices) != len(valleys):
        raise InvariantViolation(
            f"Level {h}: {len(induced.star_indices)} deep cycles, expected the {len(valleys)} valleys"
        )
    chain = trace_chain(induced, exact=exact)
    decomposition = classify_chain(chain)
    level = Level(
        h=h,
        plateaux=tuple(plateaux),
        depths=depths,
        gamma_star=gamma_star,
        prev_gamma_star=prev_gamma_star,
        valleys=tuple(valleys),
        sharp_cycles=tuple(sharp),
        barriers=barriers,
        induced=induced,
        chain=chain,
        components=decomposition.components,
        transient=decomposition.transient,
    )
    logger.info(
        f"Level {h}: {len(plateaux)} plateaux, gamma*={gamma_star}, "
        f"{level.nu} recurrent class(es), {len(level.transient)} transient, {len(sharp)} sharp cycle(s)"
    )
    return level


def initial_level(
    L: Landscape,
    tree: Optional[MergeTree] = None,
    plateaux: Optional[Sequence[Plateau]] = None,
    exact: bool = True,
) -> Level:
    """
    First level: stable plateaux, their depths and valleys.

    Raises:
        SingleGround: Fewer than two stable plateaux
    """
    tree = tree or barrier_filtration(L)
    plateaux = list(plateaux) if plateaux is not None else stable_plateaux(L)
    if len(plateaux) < 2:
        raise SingleGround(f"Landscape has {len(plateaux)} stable plateau(x); need at least two")
    barriers = plateau_barriers(tree, plateaux)
    depths, gamma_star = initial_depths(L, plateaux, barriers=barriers)
    valleys = [valley(L, p, d) for p, d in zip(plateaux, depths)]
    return _assemble_level(L, 1, plateaux, depths, gamma_star, 0, valleys, (), barriers, exact)


def advance_level(
    L: Landscape,
    prev: Level,
    tree: Optional[MergeTree] = None,
    exact: Optional[bool] = None,
) -> Level:
    """
    Next level: merge each recurrent class into one plateau, recompute depths
    and valleys, and carry over the transient valleys and sharp cycles that
    no new valley swallows.

    Raises:
        TerminalReached: prev has a single recurrent class
        InvariantViolation: A merged class mixes energies, gamma* fails to
            grow, or the number of classes fails to drop
    """
    if prev.nu <= 1:
        raise TerminalReached(f"Level {prev.h} is terminal")
    tree = tree or barrier_filtration(L)
    exact = prev.chain.exact if exact is None else exact
    h = prev.h + 1

    plateaux = []
    for comp in prev.components:
        energies = {prev.plateaux[i].energy for i in comp}
        if len(energies) != 1:
            raise InvariantViolation(f"Level {h}: recurrent class {comp} mixes energies {sorted(energies)}")
        states = state_set(s for i in comp for s in prev.plateaux[i].states)
        plateaux.append(Plateau(states, energies.pop()))

    barriers = plateau_barriers(tree, plateaux)
    depths, gamma_star = initial_depths(L, plateaux, barriers=barriers)
    if gamma_star <= prev.gamma_star:
        raise InvariantViolation(f"Level {h}: gamma* {gamma_star} does not exceed {prev.gamma_star}")
    valleys = [valley(L, p, d) for p, d in zip(plateaux, depths)]

    covered = {s for v in valleys for s in v.states}
    candidates = [prev.valleys[i] for i in prev.transient] + list(prev.sharp_cycles)
    carried = [c for c in candidates if covered.isdisjoint(c.states)]
    carried.sort(key=lambda c: c.states[0])
    deep = [c for c in carried if c.depth >= gamma_star]
    if deep:
        raise InvariantViolation(f"Level {h}: carried cycle {deep[0].states} is as deep as gamma* {gamma_star}")

    level = _assemble_level(L, h, plateaux, depths, gamma_star, prev.gamma_star, valleys, carried, barriers, exact)
    if level.nu >= prev.nu:
        raise InvariantViolation(f"Level {h}: {level.nu} classes, not fewer than {prev.nu}")
    return level


def _gamma_tilde(L: Landscape, tree: MergeTree, cycle: Cycle) -> Optional[Energy]:
    if len(cycle.states) == 1:
        return None
    anchor = cycle.bottom[0]
    return max(tree.height(s, anchor) - L.energies[s] for s in cycle.states if s != anchor)


def check_classification(
    level: Level,
    L: Landscape,
    tree: Optional[MergeTree] = None,
    strict: bool = True,
) -> ClassificationDiagnostics:
    """
    Verify the recurrent/transient classification of a level.

    Checks:
        singleton-deep      singleton classes are deeper than gamma*
        transient-descent   transient plateaux have depth gamma* and a strictly
                            lower plateau at barrier gamma*
        recurrent-class     larger classes have depth gamma*, equal energies,
                            and equal the gamma*-barrier class
        ground-recurrent    every ground state lies in a recurrent plateau
        rate-sum            trace rows sum to the order-one exit rate
        deep-absorbing      rows of plateaux deeper than gamma* vanish
        negative-drift      positive rates never go up in energy; equal
                            energies imply a positive reverse rate
        valley              valleys are disjoint cycles with the right bottom and depth
        gamma-tilde         climbs inside valleys stay within the previous gamma*

    Raises:
        ClassificationViolation: On the first failed check when strict
    """
    tree = tree or barrier_filtration(L)
    g = level.gamma_star
    energies = [p.energy for p in level.plateaux]
    size = len(level.plateaux)
    relative = level.barriers - np.asarray(energies, dtype=np.int64)[:, None]
    np.fill_diagonal(relative, -1)
    rates = level.chain.rates
    results: list[CheckResult] = []

    def record(name: str, ok: bool, plateau: Optional[int], detail: str) -> None:
        results.append(CheckResult(name, bool(ok), plateau, detail))

    for comp in level.components:
        if len(comp) == 1:
            i = comp[0]
            record("singleton-deep", level.depths[i] > g, i, f"depth {level.depths[i]} vs gamma* {g}")
            continue
        members = set(comp)
        for i in comp:
            at_gamma = {int(j) for j in np.flatnonzero(relative[i] == g)}
            ok = (
                level.depths[i] == g
                and all(energies[j] == energies[i] for j in at_gamma)
                and at_gamma == members - {i}
            )
            record("recurrent-class", ok, i, f"class {sorted(members)}, gamma*-barrier partners {sorted(at_gamma)}")

    for i in level.transient:
        lower = [int(j) for j in np.flatnonzero(relative[i] == g) if energies[j] < energies[i]]
        ok = level.depths[i] == g and bool(lower)
        record("transient-descent", ok, i, f"depth {level.depths[i]}, lower partners {lower}")

    recurrent_states = {s for comp in level.components for i in comp for s in level.plateaux[i].states}
    missing = [s for s in L.ground_states() if s not in recurrent_states]
    record("ground-recurrent", not missing, None, f"ground states outside recurrent plateaux: {missing}")

    induced = level.induced
    for i, k in enumerate(induced.star_indices):
        expected = induced.out_rate(induced.cycle_node(k))
        observed = level.chain.row_sum(i)
        if level.chain.exact:
            ok = observed == expected
        else:
            ok = abs(float(observed) - float(expected)) <= 1e-9 * max(1.0, float(expected))
        record("rate-sum", ok, i, f"row sum {observed} vs exit rate {expected}")
        if level.depths[i] > g:
            record("deep-absorbing", all(r == 0 for r in rates[i]), i, "row must vanish")

    for i in range(size):
        for j in range(size):
            if i == j or not rates[i][j] > 0:
                continue
            ok = energies[i] >= energies[j] and (energies[i] != energies[j] or rates[j][i] > 0)
            if not ok:
                record("negative-drift", False, i, f"rate to {j}: energies {energies[i]} -> {energies[j]}")
    if not any(r.name == "negative-drift" for r in results):
        record("negative-drift", True, None, "all positive rates descend or are reversible")

    seen: set[int] = set()
    for i, v in enumerate(level.valleys):
        revalidated = validate_cycle(L, v.states)
        ok = (
            revalidated.depth == level.depths[i]
            and revalidated.bottom == level.plateaux[i].states
            and seen.isdisjoint(v.states)
        )
        seen.update(v.states)
        record("valley", ok, i, f"depth {revalidated.depth}, bottom size {len(revalidated.bottom)}")

    tildes = tuple(_gamma_tilde(L, tree, v) for v in level.valleys)
    for i, t in enumerate(tildes):
        if t is None:
            continue
        record("gamma-tilde", t <= level.prev_gamma_star, i, f"{t} vs previous gamma* {level.prev_gamma_star}")
        if t != level.prev_gamma_star:
            logger.debug(f"Level {level.h}, valley {i}: inner climb {t} below previous gamma* {level.prev_gamma_star}")

    diagnostics = ClassificationDiagnostics(level.h, tuple(results), tildes)
    if strict and not diagnostics.passed:
        first = diagnostics.failures()[0]
        raise ClassificationViolation(
            f"Level {level.h}: check {first.name} failed for plateau {first.plateau}: {first.detail}",
            level=level.h,
            plateau=first.plateau,
            check=first.name,
            diagnostics=diagnostics,
        )
    return diagnostics


def full_hierarchy(
    L: Landscape,
    restrict: bool = True,
    exact: bool = True,
    strict: bool = True,
) -> HierarchyReport:
    """
    Build every level up to the first one with a single recurrent class.

    Args:
        L: Landscape
        restrict: Analyse the states below the ground-state tunneling barrier
            only; False analyses the whole landscape
        exact: Rational trace-chain solves (False: float64 fallback)
        strict: Raise on classification failures

    Raises:
        SingleGround: Fewer than two ground states (restrict) or stable plateaux
    """
    if restrict:
        omega = restrict_to_omega_bar(L)
        analysed, state_map, phi_bar = omega.restricted, omega.state_map, omega.phi_bar
    else:
        analysed, state_map, phi_bar = L, tuple(range(L.n_states)), None

    tree = barrier_filtration(analysed)
    plateaux = stable_plateaux(analysed)
    logger.info(f"Analysing {analysed.n_states} states with {len(plateaux)} stable plateaux")

    level = initial_level(analysed, tree, plateaux, exact=exact)
    levels = [level]
    diagnostics = [check_classification(level, analysed, tree, strict=strict)]
    while level.nu > 1:
        if len(levels) >= len(plateaux):
            raise InvariantViolation(f"No termination after {len(levels)} levels")
        level = advance_level(analysed, level, tree, exact=exact)
        levels.append(level)
        diagnostics.append(check_classification(level, analysed, tree, strict=strict))

    terminal_states = {s for i in level.components[0] for s in level.plateaux[i].states}
    ground = analysed.ground_states()
    low = analysed.energies[ground[0]]
    if not set(ground) <= terminal_states or any(analysed.energies[s] != low for s in terminal_states):
        raise InvariantViolation("Terminal class is not the set of ground states")

    logger.info(f"Hierarchy terminates at level {len(levels)}; gamma* = {[lv.gamma_star for lv in levels]}")
    return HierarchyReport(
        landscape=analysed,
        source_states=L.n_states,
        state_map=state_map,
        phi_bar=phi_bar,
        nu0=len(plateaux),
        levels=tuple(levels),
        diagnostics=tuple(diagnostics),
        tree=tree,
    )
