"""
Finite-beta verification of the limit objects.

Exact solves:
    exit_distribution_exact    hitting law of the cycle boundary, >= 50 digits via mpmath
                               (scipy sparse LU beyond `dense_limit` states)
    resolvent_deviation        microscopic vs. limit-chain resolvent on the valleys

Monte Carlo (numpy Philox streams keyed by (seed, batch), batches combined by
summation, optionally in parallel with joblib):
    simulate                   one continuous-time Metropolis trajectory
    first_hit_split            which target set is entered first
    exit_frequencies           first boundary state reached from the cycle bottom
    occupation_outside         time fraction spent outside the level valleys

plus random_landscape, the seeded generator for property tests.
"""

import logging
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Optional, Sequence, Union

import mpmath
import numpy as np
import scipy.sparse as sp
from joblib import Parallel, delayed
from scipy.sparse.linalg import splu
from scipy.special import logsumexp

from metastable.core.errors import InvalidParams, InvariantViolation, SingularSystem
from metastable.core.hierarchy import Level
from metastable.core.landscape import Landscape, StateSet, boundary_sets, build_landscape, state_set
from metastable.core.plateaux import Cycle, validate_cycle

logger = logging.getLogger(__name__)

DEFAULT_DPS = 50
DEFAULT_DENSE_LIMIT = 300
DEFAULT_RESIDUAL = 1e-10
DEFAULT_BATCH_SIZE = 16384
DEFAULT_MAX_JUMPS = 10_000_000


@dataclass(frozen=True)
class BetaParams:
    beta: float

    def __post_init__(self):
        if not self.beta > 0:
            raise InvalidParams(f"beta must be positive, got {self.beta}")


@dataclass(frozen=True, eq=False)
class RateSystem:
    """
    Metropolis rates and Gibbs weights of a landscape at inverse temperature beta,
    stored per directed edge in CSR order.

    Attributes:
        indptr, indices: CSR adjacency
        uphill: max(H(target) - H(source), 0) per directed edge
        log_rates: -beta * uphill
        log_weights: log Gibbs weight per state
        log_z: log partition function
    """
    landscape: Landscape
    beta: float
    indptr: np.ndarray
    indices: np.ndarray
    uphill: np.ndarray
    log_rates: np.ndarray
    log_weights: np.ndarray
    log_z: float

    @property
    def rates(self) -> np.ndarray:
        return np.exp(self.log_rates)

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)

    @cached_property
    def sources(self) -> np.ndarray:
        return np.repeat(np.arange(self.landscape.n_states), np.diff(self.indptr))

    @cached_property
    def total_rates(self) -> np.ndarray:
        return np.bincount(self.sources, weights=self.rates, minlength=self.landscape.n_states)

    def rate(self, eta: int, xi: int) -> float:
        row = self.indices[self.indptr[eta]:self.indptr[eta + 1]]
        pos = np.flatnonzero(row == xi)
        if not pos.size:
            return 0.0
        return float(np.exp(self.log_rates[self.indptr[eta] + pos[0]]))


def _csr(L: Landscape) -> tuple[np.ndarray, np.ndarray]:
    degrees = np.fromiter((len(nbrs) for nbrs in L.neighbors), dtype=np.int64, count=L.n_states)
    indptr = np.zeros(L.n_states + 1, dtype=np.int64)
    np.cumsum(degrees, out=indptr[1:])
    indices = np.fromiter((u for nbrs in L.neighbors for u in nbrs), dtype=np.int64, count=int(indptr[-1]))
    return indptr, indices


def rate_system(L: Landscape, beta: float) -> RateSystem:
    """
    Metropolis rates exp(-beta * max(dH, 0)) and Gibbs weights.

    Detailed balance is checked on the integer exponents: for every directed
    edge, H(source) + uphill equals max(H(source), H(target)), which is
    symmetric in the pair.
    """
    BetaParams(beta)
    indptr, indices = _csr(L)
    E = L.energy_array
    sources = np.repeat(np.arange(L.n_states), np.diff(indptr))
    uphill = np.maximum(E[indices] - E[sources], 0)
    if not np.array_equal(E[sources] + uphill, np.maximum(E[sources], E[indices])):
        raise InvariantViolation("Detailed balance fails on integer exponents")
    log_z = float(logsumexp(-beta * E.astype(np.float64)))
    return RateSystem(
        landscape=L,
        beta=float(beta),
        indptr=indptr,
        indices=indices,
        uphill=uphill,
        log_rates=-beta * uphill.astype(np.float64),
        log_weights=-beta * E.astype(np.float64) - log_z,
        log_z=log_z,
    )


def _as_cycle(L: Landscape, C: Union[Cycle, Iterable[int]]) -> Cycle:
    return C if isinstance(C, Cycle) else validate_cycle(L, C)


def exit_distribution_limit(L: Landscape, C: Union[Cycle, Iterable[int]]) -> dict[int, Fraction]:
    """Low-temperature exit law: proportional to edge contacts on the minimal boundary."""
    cycle = _as_cycle(L, C)
    inside = set(cycle.states)
    _, exits = boundary_sets(L, cycle.states)
    contacts = {xi: sum(1 for u in L.neighbors[xi] if u in inside) for xi in exits}
    total = sum(contacts.values())
    return {xi: Fraction(a, total) for xi, a in contacts.items()}


def _start_states(cycle: Cycle, start) -> StateSet:
    if start is None:
        return cycle.bottom
    chosen = state_set([start] if isinstance(start, (int, np.integer)) else start)
    outside = set(chosen) - set(cycle.states)
    if not chosen or outside:
        raise InvalidParams(f"Start states must be a nonempty subset of the cycle, got {chosen}")
    return chosen


def exit_distribution_exact(
    L: Landscape,
    C: Union[Cycle, Iterable[int]],
    beta: float,
    start=None,
    dps: int = DEFAULT_DPS,
    dense_limit: int = DEFAULT_DENSE_LIMIT,
    residual: float = DEFAULT_RESIDUAL,
) -> dict[int, float]:
    """
    Hitting distribution on the cycle boundary at inverse temperature beta.

    Solves h(eta) = sum_zeta p(eta, zeta) h(zeta) over the cycle for the
    embedded jump chain with the boundary absorbing.

    Args:
        start: Start state or states (uniform); default is the cycle bottom

    Raises:
        SingularSystem: Residual check failed
    """
    BetaParams(beta)
    cycle = _as_cycle(L, C)
    starts = _start_states(cycle, start)
    boundary, _ = boundary_sets(L, cycle.states)
    inner = {s: i for i, s in enumerate(cycle.states)}
    outer = {s: j for j, s in enumerate(boundary)}
    n, m = len(inner), len(outer)
    E = L.energies

    if n <= dense_limit:
        with mpmath.workdps(dps):
            b = mpmath.mpf(beta)
            A = mpmath.eye(n)
            B = mpmath.zeros(n, m)
            for s, i in inner.items():
                rates = [(u, mpmath.exp(-b * max(E[u] - E[s], 0))) for u in L.neighbors[s]]
                total = mpmath.fsum(r for _, r in rates)
                for u, r in rates:
                    if u in inner:
                        A[i, inner[u]] -= r / total
                    else:
                        B[i, outer[u]] += r / total
            result = {}
            tolerance = mpmath.mpf(10) ** (-(dps - 10))
            for xi, j in outer.items():
                column = B.column(j)
                try:
                    x = mpmath.lu_solve(A, column)
                except ZeroDivisionError as e:
                    raise SingularSystem(f"Exit system of cycle {cycle.states} is singular") from e
                if mpmath.norm(A * x - column, mpmath.inf) > tolerance:
                    raise SingularSystem(f"Exit solve residual too large at beta={beta}")
                result[xi] = float(mpmath.fsum(x[inner[s]] for s in starts) / len(starts))
        return result

    rows, cols, vals = [], [], []
    Bd = np.zeros((n, m))
    for s, i in inner.items():
        rates = np.exp(-beta * np.maximum(np.array([E[u] for u in L.neighbors[s]]) - E[s], 0))
        probs = rates / rates.sum()
        rows.append(i)
        cols.append(i)
        vals.append(1.0)
        for u, p in zip(L.neighbors[s], probs):
            if u in inner:
                rows.append(i)
                cols.append(inner[u])
                vals.append(-p)
            else:
                Bd[i, outer[u]] += p
    A = sp.csc_matrix((vals, (rows, cols)), shape=(n, n))
    X = _sparse_solve(A, Bd, residual)
    weights = X[[inner[s] for s in starts]].mean(axis=0)
    return {xi: float(weights[j]) for xi, j in outer.items()}


def _sparse_solve(A: sp.spmatrix, B: np.ndarray, residual: float) -> np.ndarray:
    try:
        X = splu(sp.csc_matrix(A)).solve(B)
    except RuntimeError as e:
        raise SingularSystem(f"Sparse {A.shape[0]}x{A.shape[0]} system is singular") from e
    scale = max(1.0, float(np.abs(B).max(initial=0.0)))
    error = float(np.abs(A @ X - B).max(initial=0.0)) / scale
    if error > residual:
        raise SingularSystem(f"Sparse residual {error:.3e} exceeds {residual:.1e}")
    return X


@dataclass(frozen=True)
class ResolventResult:
    """
    Comparison of the microscopic and limit resolvents for one g.

    Attributes:
        deviations: Per valley, sup over the valley of |F - f(plateau)|
        averages: Per valley, Gibbs-weighted average of F
        macroscopic: Limit-chain solution f per plateau
    """
    beta: float
    lam: float
    deviations: tuple[float, ...]
    averages: tuple[float, ...]
    macroscopic: tuple[float, ...]

    @property
    def max_deviation(self) -> float:
        return max(self.deviations, default=0.0)


def resolvent_deviations(
    L: Landscape,
    level: Level,
    lam: float,
    gs: Sequence[Sequence[float]],
    beta: float,
    dps: int = DEFAULT_DPS,
    dense_limit: int = DEFAULT_DENSE_LIMIT,
    residual: float = DEFAULT_RESIDUAL,
) -> list[ResolventResult]:
    """
    Solve (lam - e^{gamma* beta} L_beta) F = G, with G equal to g of the
    valley's plateau on each valley and zero elsewhere, and compare with
    (lam - limit generator) f = g. One factorization serves every g.

    Raises:
        InvalidParams: lam <= 0 or g of the wrong length
        SingularSystem: Residual check failed
    """
    BetaParams(beta)
    if not lam > 0:
        raise InvalidParams(f"lambda must be positive, got {lam}")
    size = len(level.plateaux)
    for g in gs:
        if len(g) != size:
            raise InvalidParams(f"g has {len(g)} entries, level {level.h} has {size} plateaux")

    n = L.n_states
    lift = np.full(n, -1, dtype=np.int64)
    for i, v in enumerate(level.valleys):
        lift[list(v.states)] = i
    M = lam * np.eye(size) - level.generator()
    system = rate_system(L, beta)
    scale_exponent = level.gamma_star * beta
    E = L.energy_array

    def lifted(g) -> np.ndarray:
        values = np.asarray(g, dtype=np.float64)
        G = np.zeros(n)
        inside = lift >= 0
        G[inside] = values[lift[inside]]
        return G

    if n <= dense_limit:
        solutions = []
        with mpmath.workdps(dps):
            b = mpmath.mpf(beta)
            A = mpmath.zeros(n, n)
            for s in range(n):
                A[s, s] += mpmath.mpf(lam)
                for u in L.neighbors[s]:
                    r = mpmath.exp(b * (level.gamma_star - max(int(E[u]) - int(E[s]), 0)))
                    A[s, s] += r
                    A[s, u] -= r
            tolerance = mpmath.mpf(10) ** (-(dps - 20))
            for g in gs:
                G = mpmath.matrix([mpmath.mpf(float(x)) for x in lifted(g)])
                try:
                    F = mpmath.lu_solve(A, G)
                except ZeroDivisionError as e:
                    raise SingularSystem("Resolvent system is singular") from e
                if mpmath.norm(A * F - G, mpmath.inf) > tolerance * max(1, mpmath.norm(A, mpmath.inf)):
                    raise SingularSystem(f"Resolvent residual too large at beta={beta}")
                solutions.append(np.array([float(F[s]) for s in range(n)]))
    else:
        scaled = np.exp(scale_exponent + system.log_rates)
        R = sp.csr_matrix((scaled, system.indices, system.indptr), shape=(n, n))
        A = sp.diags(lam + np.asarray(R.sum(axis=1)).ravel()) - R
        B = np.column_stack([lifted(g) for g in gs])
        X = _sparse_solve(A, B, residual)
        solutions = [X[:, c] for c in range(X.shape[1])]

    results = []
    log_w = system.log_weights
    for g, F in zip(gs, solutions):
        f = np.linalg.solve(M, np.asarray(g, dtype=np.float64))
        deviations, averages = [], []
        for i, v in enumerate(level.valleys):
            idx = np.asarray(v.states, dtype=np.int64)
            deviations.append(float(np.abs(F[idx] - f[i]).max()))
            w = np.exp(log_w[idx] - log_w[idx].max())
            averages.append(float(w @ F[idx] / w.sum()))
        results.append(ResolventResult(float(beta), float(lam), tuple(deviations), tuple(averages), tuple(float(x) for x in f)))
    return results


def resolvent_deviation(
    L: Landscape,
    level: Level,
    lam: float,
    g: Sequence[float],
    beta: float,
    **kwargs,
) -> ResolventResult:
    """Single-g form of resolvent_deviations."""
    return resolvent_deviations(L, level, lam, [g], beta, **kwargs)[0]


@dataclass(frozen=True, eq=False)
class JumpTable:
    """
    Padded per-state jump tables for vectorized sampling.

    cumulative[s, c] is the probability of choosing one of the first c + 1
    neighbours; padding holds 2.0 so it is never selected.
    """
    next_state: np.ndarray
    cumulative: np.ndarray
    total_rate: np.ndarray

    def step(self, states: np.ndarray, u: np.ndarray) -> np.ndarray:
        choice = (self.cumulative[states] <= u[:, None]).sum(axis=1)
        return self.next_state[states, choice]


def jump_table(system: RateSystem) -> JumpTable:
    n = system.landscape.n_states
    degrees = np.diff(system.indptr)
    width = max(1, int(degrees.max(initial=0)))
    column = np.arange(len(system.indices)) - system.indptr[system.sources]
    rates = system.rates
    totals = system.total_rates

    next_state = np.tile(np.arange(n, dtype=np.int64)[:, None], (1, width))
    probs = np.zeros((n, width))
    next_state[system.sources, column] = system.indices
    with np.errstate(invalid="ignore", divide="ignore"):
        probs[system.sources, column] = rates / totals[system.sources]
    cumulative = np.cumsum(probs, axis=1)
    padding = np.arange(width)[None, :] >= degrees[:, None]
    cumulative[padding] = 2.0
    has = degrees > 0
    cumulative[np.flatnonzero(has), degrees[has] - 1] = 1.0
    return JumpTable(next_state, cumulative, totals)


def _stream(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index])))


@dataclass(frozen=True)
class Trajectory:
    """
    Continuous-time trajectory.

    Attributes:
        jumps: (state, holding time) for each visited state before stopping
        seed: Master seed
        stop_reason: "hit", "time" or "max_jumps"
        final_state: State occupied when the run stopped
    """
    jumps: tuple[tuple[int, float], ...]
    seed: int
    stop_reason: str
    final_state: int

    @property
    def duration(self) -> float:
        return sum(t for _, t in self.jumps)


def simulate(
    L: Landscape,
    beta: float,
    start: int,
    hit: Optional[Iterable[int]] = None,
    time_budget: Optional[float] = None,
    seed: int = 0,
    index: int = 0,
    max_jumps: int = 1_000_000,
) -> Trajectory:
    """
    One Metropolis trajectory: exponential holding times with the total exit
    rate, then a neighbour chosen proportionally to its rate.

    Args:
        hit: Stop on entering this set
        time_budget: Stop when the clock reaches this time
        index: Trajectory index; (seed, index) selects the random stream

    Raises:
        InvalidParams: No stopping rule, or a negative budget
    """
    if hit is None and time_budget is None:
        raise InvalidParams("simulate needs a hit set or a time budget")
    if time_budget is not None and time_budget < 0:
        raise InvalidParams(f"time budget must be non-negative, got {time_budget}")
    if not 0 <= start < L.n_states:
        raise InvalidParams(f"start state {start} outside the landscape")
    targets = frozenset(hit or ())
    table = jump_table(rate_system(L, beta))
    rng = _stream(seed, index)

    state, clock = int(start), 0.0
    jumps: list[tuple[int, float]] = []
    if state in targets:
        return Trajectory((), seed, "hit", state)
    if time_budget is not None and time_budget == 0:
        return Trajectory((), seed, "time", state)
    for _ in range(max_jumps):
        hold = float(rng.exponential(1.0 / table.total_rate[state]))
        if time_budget is not None and clock + hold >= time_budget:
            jumps.append((state, time_budget - clock))
            return Trajectory(tuple(jumps), seed, "time", state)
        jumps.append((state, hold))
        clock += hold
        state = int(table.step(np.array([state]), rng.random(1))[0])
        if state in targets:
            return Trajectory(tuple(jumps), seed, "hit", state)
    return Trajectory(tuple(jumps), seed, "max_jumps", state)


def _batches(n_runs: int, batch_size: int) -> list[tuple[int, int]]:
    if n_runs <= 0 or batch_size <= 0:
        raise InvalidParams(f"Need positive run and batch counts, got {n_runs} and {batch_size}")
    return [(b, min(batch_size, n_runs - b * batch_size)) for b in range((n_runs + batch_size - 1) // batch_size)]


def _hit_batch(
    table: JumpTable,
    starts: np.ndarray,
    is_target: np.ndarray,
    home: np.ndarray,
    seed: int,
    batch: int,
    size: int,
    max_jumps: int,
) -> np.ndarray:
    rng = _stream(seed, batch)
    state = starts[rng.integers(0, len(starts), size=size)]
    result = np.full(size, -1, dtype=np.int64)
    armed = ~home[state]
    done = armed & is_target[state]
    result[done] = state[done]
    active = np.flatnonzero(~done)
    for _ in range(max_jumps):
        if not active.size:
            break
        nxt = table.step(state[active], rng.random(active.size))
        state[active] = nxt
        armed[active] |= ~home[nxt]
        hit = is_target[nxt] & armed[active]
        result[active[hit]] = nxt[hit]
        active = active[~hit]
    return result


def _first_hits(
    L: Landscape,
    beta: float,
    starts: Sequence[int],
    targets: Iterable[int],
    n_runs: int,
    seed: int,
    batch_size: int,
    jobs: int,
    max_jumps: int,
    leave: Iterable[int] = (),
) -> Counter:
    table = jump_table(rate_system(L, beta))
    is_target = np.zeros(L.n_states, dtype=bool)
    is_target[list(targets)] = True
    home = np.zeros(L.n_states, dtype=bool)
    home[list(leave)] = True
    start_arr = np.asarray(starts, dtype=np.int64)
    outcomes = Parallel(n_jobs=jobs)(
        delayed(_hit_batch)(table, start_arr, is_target, home, seed, b, size, max_jumps)
        for b, size in _batches(n_runs, batch_size)
    )
    counts: Counter = Counter()
    for hits in outcomes:
        values, freq = np.unique(hits, return_counts=True)
        counts.update({int(v): int(f) for v, f in zip(values, freq)})
    return counts


@dataclass(frozen=True)
class HitSplit:
    """Counts of the first target set entered; `unfinished` ran out of jumps."""
    counts: tuple[int, ...]
    unfinished: int
    n_runs: int

    def fractions(self) -> tuple[float, ...]:
        return tuple(c / self.n_runs for c in self.counts)

    def standard_errors(self) -> tuple[float, ...]:
        return tuple(float(np.sqrt(p * (1 - p) / self.n_runs)) for p in self.fractions())


def first_hit_split(
    L: Landscape,
    beta: float,
    start: Union[int, Iterable[int]],
    targets: Sequence[Iterable[int]],
    n_runs: int,
    seed: int = 0,
    leave: Iterable[int] = (),
    batch_size: int = DEFAULT_BATCH_SIZE,
    jobs: int = 1,
    max_jumps: int = DEFAULT_MAX_JUMPS,
) -> HitSplit:
    """
    Which of the disjoint target sets the jump chain enters first.

    Args:
        start: Start state, or states sampled uniformly
        leave: Targets only count once the walk has stepped outside this set
    """
    BetaParams(beta)
    groups = [state_set(t) for t in targets]
    owner = {s: g for g, members in enumerate(groups) for s in members}
    if len(owner) != sum(len(g) for g in groups):
        raise InvalidParams("Target sets must be disjoint")
    starts = [int(start)] if isinstance(start, (int, np.integer)) else state_set(start)
    counts = _first_hits(L, beta, starts, owner, n_runs, seed, batch_size, jobs, max_jumps, leave)
    split = [0] * len(groups)
    for s, c in counts.items():
        if s >= 0:
            split[owner[s]] += c
    unfinished = counts.get(-1, 0)
    if unfinished:
        logger.warning(f"{unfinished} of {n_runs} trajectories hit no target")
    return HitSplit(tuple(split), unfinished, n_runs)


def exit_frequencies(
    L: Landscape,
    C: Union[Cycle, Iterable[int]],
    beta: float,
    n_runs: int,
    seed: int = 0,
    batch_size: int = DEFAULT_BATCH_SIZE,
    jobs: int = 1,
    max_jumps: int = DEFAULT_MAX_JUMPS,
) -> dict[int, int]:
    """Counts of the first boundary state reached, starting uniformly on the cycle bottom."""
    BetaParams(beta)
    cycle = _as_cycle(L, C)
    boundary, _ = boundary_sets(L, cycle.states)
    counts = _first_hits(L, beta, cycle.bottom, boundary, n_runs, seed, batch_size, jobs, max_jumps)
    unfinished = counts.pop(-1, 0)
    if unfinished:
        logger.warning(f"{unfinished} of {n_runs} trajectories did not leave the cycle")
    return {xi: counts.get(xi, 0) for xi in boundary}


def _occupation_batch(table: JumpTable, starts: np.ndarray, inside: np.ndarray, horizon: float, seed: int, batch: int, size: int) -> np.ndarray:
    rng = _stream(seed, batch)
    state = starts[rng.integers(0, len(starts), size=size)]
    clock = np.zeros(size)
    outside = np.zeros(size)
    active = np.arange(size)
    with np.errstate(divide="ignore"):
        scale = 1.0 / table.total_rate
    while active.size:
        s = state[active]
        end = np.minimum(clock[active] + rng.exponential(scale[s]), horizon)
        away = ~inside[s]
        outside[active[away]] += (end - clock[active])[away]
        clock[active] = end
        active = active[end < horizon]
        if active.size:
            state[active] = table.step(state[active], rng.random(active.size))
    return outside / horizon


@dataclass(frozen=True)
class OccupationEstimate:
    mean: float
    stderr: float
    horizon: float
    n_runs: int


def occupation_outside(
    L: Landscape,
    level: Level,
    beta: float,
    horizon: float = 1.0,
    n_runs: int = 10_000,
    seed: int = 0,
    batch_size: int = DEFAULT_BATCH_SIZE,
    jobs: int = 1,
) -> OccupationEstimate:
    """
    Mean fraction of [0, horizon * e^{gamma* beta}] spent outside the level
    valleys, starting uniformly on the level plateaux.
    """
    BetaParams(beta)
    table = jump_table(rate_system(L, beta))
    inside = np.zeros(L.n_states, dtype=bool)
    inside[list(level.valley_union)] = True
    starts = np.asarray(state_set(s for p in level.plateaux for s in p.states), dtype=np.int64)
    scaled = horizon * float(np.exp(level.gamma_star * beta))
    parts = Parallel(n_jobs=jobs)(
        delayed(_occupation_batch)(table, starts, inside, scaled, seed, b, size)
        for b, size in _batches(n_runs, batch_size)
    )
    fractions = np.concatenate(parts)
    return OccupationEstimate(
        mean=float(fractions.mean()),
        stderr=float(fractions.std(ddof=1) / np.sqrt(n_runs)) if n_runs > 1 else 0.0,
        horizon=scaled,
        n_runs=n_runs,
    )


def random_landscape(
    seed: int,
    n_states: int,
    avg_degree: float = 3.0,
    energy_range: tuple[int, int] = (0, 5),
) -> Landscape:
    """
    Connected random landscape: a random recursive tree plus extra random
    edges up to the requested average degree, with uniform integer energies.
    """
    if n_states < 2:
        raise InvalidParams(f"Need at least two states, got {n_states}")
    low, high = energy_range
    if high < low:
        raise InvalidParams(f"Empty energy range {energy_range}")
    rng = np.random.default_rng(seed)
    edges = {(int(rng.integers(0, i)), i) for i in range(1, n_states)}
    wanted = min(int(round(avg_degree * n_states / 2)), n_states * (n_states - 1) // 2)
    attempts = 0
    while len(edges) < wanted and attempts < 20 * wanted:
        attempts += 1
        i, j = (int(x) for x in rng.integers(0, n_states, size=2))
        if i != j:
            edges.add((min(i, j), max(i, j)))
    energies = rng.integers(low, high + 1, size=n_states)
    return build_landscape(
        [(f"s{i}", int(e)) for i, e in enumerate(energies)],
        sorted(edges),
    )
