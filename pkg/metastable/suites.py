"""
Verification suites.

Each suite runs the finite-beta computations of `metastable.core.markov_verify`
against a limit object and returns `CheckRecord`s. Tolerances are engineering
choices and are written into every record.
"""

import logging
import math
from fractions import Fraction
from typing import Any, Iterable, Optional, Sequence

from metastable.core.errors import IndexOutOfRange
from metastable.core.hierarchy import HierarchyReport, Level
from metastable.core.landscape import Landscape, boundary_sets
from metastable.core.markov_verify import (
    exit_distribution_exact,
    exit_distribution_limit,
    exit_frequencies,
    first_hit_split,
    occupation_outside,
    resolvent_deviations,
)
from metastable.core.plateaux import Cycle
from metastable.core.report_io import append_check_log, tool_version
from metastable.models import CheckRecord, HierarchyReportModel, LevelModel, VerificationReport

logger = logging.getLogger(__name__)


def fraction_text(value) -> str:
    """Rates as 'p/q' strings (floats are written with repr)."""
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    return repr(float(value))


def _record(records: list[CheckRecord], log_path, **fields) -> CheckRecord:
    record = CheckRecord(**fields)
    records.append(record)
    append_check_log(record.model_dump(by_alias=True), log_path)
    level = logging.INFO if record.passed else logging.WARNING
    logger.log(level, f"{record.check}: {'pass' if record.passed else 'FAIL'} ({record.observed})")
    return record


def _label(L: Landscape, state: int) -> str:
    return L.labels[state] or str(state)


def level_model(level: Level) -> LevelModel:
    rates = [
        (i, j, fraction_text(r))
        for i, row in enumerate(level.chain.rates)
        for j, r in enumerate(row)
        if i != j and r > 0
    ]
    return LevelModel(
        h=level.h,
        gamma_star=level.gamma_star,
        nu=level.nu,
        plateaux=[list(p.states) for p in level.plateaux],
        plateau_energies=[p.energy for p in level.plateaux],
        depths=list(level.depths),
        valleys=[list(v.states) for v in level.valleys],
        sharp_cycles=[list(c.states) for c in level.sharp_cycles],
        components=[list(c) for c in level.components],
        transient=list(level.transient),
        rates=rates,
        exact=level.chain.exact,
    )


def hierarchy_checks(report: HierarchyReport, log_path=None) -> list[CheckRecord]:
    """Classification diagnostics of every level as check records."""
    records: list[CheckRecord] = []
    for diag in report.diagnostics:
        for result in diag.results:
            _record(
                records,
                log_path,
                check=f"classification/{result.name}",
                parameters={"level": diag.h, "plateau": result.plateau},
                expected=True,
                observed=result.detail,
                passed=result.passed,
            )
    return records


def hierarchy_document(report: HierarchyReport, config: dict[str, Any], checks: Sequence[CheckRecord] = ()) -> dict:
    """JSON document of a hierarchy run, in analysed-landscape state ids."""
    model = HierarchyReportModel(
        version=tool_version(),
        config=config,
        source_states=report.source_states,
        analysed_states=report.landscape.n_states,
        phi_bar=report.phi_bar,
        ground_states=list(report.landscape.ground_states()),
        terminal=report.terminal,
        gamma_stars=list(report.gamma_stars),
        nus=list(report.nus),
        levels=[level_model(level) for level in report.levels],
        checks=list(checks),
    )
    return model.model_dump(mode="json", by_alias=True)


def verification_document(suite: str, config: dict[str, Any], checks: Sequence[CheckRecord]) -> VerificationReport:
    return VerificationReport(version=tool_version(), config=config, suite=suite, checks=list(checks))


def exit_suite(
    L: Landscape,
    cycle: Cycle,
    beta_grid: Sequence[float],
    tolerance: float = 1e-3,
    mc_runs: int = 0,
    mc_beta: float = 8.0,
    sigmas: float = 3.0,
    seed: int = 0,
    batch_size: int = 16384,
    jobs: int = 1,
    dps: int = 50,
    dense_limit: int = 300,
    log_path=None,
) -> list[CheckRecord]:
    """
    Exit law of a cycle: limit formula, convergence of the exact solve over
    the beta grid, decay of the mass off the minimal boundary, and agreement
    of Monte Carlo frequencies with the exact solve.
    """
    records: list[CheckRecord] = []
    grid = sorted(beta_grid)
    limit = exit_distribution_limit(L, cycle)
    boundary, minimal = boundary_sets(L, cycle.states)
    params = {"cycle": [_label(L, s) for s in cycle.states]}

    _record(
        records, log_path,
        check="exit/limit",
        parameters=params,
        expected="probabilities on the minimal boundary summing to 1",
        observed={_label(L, s): fraction_text(p) for s, p in limit.items()},
        passed=sum(limit.values()) == 1 and set(limit) == set(minimal),
    )

    gaps, off_mass = [], []
    for beta in grid:
        exact = exit_distribution_exact(L, cycle, beta, dps=dps, dense_limit=dense_limit)
        gap = max(abs(exact[s] - float(limit.get(s, 0))) for s in boundary)
        gaps.append(gap)
        off_mass.append(sum(p for s, p in exact.items() if s not in limit))
        logger.info(f"beta={beta}: exit gap {gap:.3e}")

    _record(
        records, log_path,
        check="exit/exact-gap",
        parameters={**params, "beta_grid": grid},
        expected=f"gap at beta={grid[-1]} within tolerance",
        observed=gaps,
        tolerance=tolerance,
        passed=gaps[-1] <= tolerance,
    )
    _record(
        records, log_path,
        check="exit/exact-gap-monotone",
        parameters={**params, "beta_grid": grid},
        expected="non-increasing along the beta grid",
        observed=gaps,
        passed=all(b <= a for a, b in zip(gaps, gaps[1:])),
    )
    _record(
        records, log_path,
        check="exit/off-minimal-mass",
        parameters={**params, "beta_grid": grid},
        expected="non-increasing, within tolerance at the largest beta",
        observed=off_mass,
        tolerance=tolerance,
        passed=off_mass[-1] <= tolerance and all(b <= a + 1e-15 for a, b in zip(off_mass, off_mass[1:])),
    )

    if mc_runs > 0:
        exact = exit_distribution_exact(L, cycle, mc_beta, dps=dps, dense_limit=dense_limit)
        counts = exit_frequencies(L, cycle, mc_beta, mc_runs, seed=seed, batch_size=batch_size, jobs=jobs)
        observed, passed = {}, True
        for s in boundary:
            p = exact[s]
            freq = counts[s] / mc_runs
            bound = sigmas * math.sqrt(p * (1 - p) / mc_runs) + 1 / mc_runs
            passed &= abs(freq - p) <= bound
            observed[_label(L, s)] = {"frequency": freq, "exact": p, "bound": bound}
        _record(
            records, log_path,
            check="exit/monte-carlo",
            parameters={**params, "beta": mc_beta, "runs": mc_runs, "seed": seed},
            expected=f"within {sigmas} binomial standard errors of the exact solve",
            observed=observed,
            tolerance=sigmas,
            passed=passed,
        )
    return records


def indicator_basis(level: Level) -> list[list[float]]:
    size = len(level.plateaux)
    return [[1.0 if j == i else 0.0 for j in range(size)] for i in range(size)]


def resolvent_suite(
    L: Landscape,
    level: Level,
    beta_grid: Sequence[float],
    lam: float = 1.0,
    gs: Optional[Sequence[Sequence[float]]] = None,
    bound: float = 0.05,
    dps: int = 50,
    dense_limit: int = 300,
    log_path=None,
) -> list[CheckRecord]:
    """
    Resolvent condition on one level: for every g the sup deviation on the
    valleys decreases strictly along the beta grid and is within `bound`
    at the largest beta. Default g's are the plateau indicators.
    """
    records: list[CheckRecord] = []
    grid = sorted(beta_grid)
    gs = indicator_basis(level) if gs is None else [list(g) for g in gs]
    by_beta = [resolvent_deviations(L, level, lam, gs, beta, dps=dps, dense_limit=dense_limit) for beta in grid]

    for k, g in enumerate(gs):
        series = [results[k].max_deviation for results in by_beta]
        params = {"level": level.h, "lambda": lam, "g": g, "beta_grid": grid}
        decreasing = all(b < a for a, b in zip(series, series[1:])) or all(d == 0 for d in series)
        _record(
            records, log_path,
            check="resolvent/decreasing",
            parameters=params,
            expected="strictly decreasing in beta",
            observed=series,
            passed=decreasing,
        )
        _record(
            records, log_path,
            check="resolvent/bound",
            parameters={**params, "beta": grid[-1]},
            expected="sup deviation within tolerance",
            observed={"deviation": series[-1], "macroscopic": list(by_beta[-1][k].macroscopic),
                      "averages": list(by_beta[-1][k].averages)},
            tolerance=bound,
            passed=series[-1] <= bound,
        )
    return records


def _jump_law(level: Level, i: int) -> Optional[list[Fraction]]:
    total = level.chain.row_sum(i)
    if not total > 0:
        return None
    return [level.chain.rate(i, j) / total for j in range(len(level.plateaux))]


def occupation_suite(
    L: Landscape,
    level: Level,
    beta: float,
    horizon: float = 1.0,
    n_runs: int = 10_000,
    bound: float = 0.05,
    split_runs: int = 0,
    sigmas: float = 3.0,
    seed: int = 0,
    batch_size: int = 16384,
    jobs: int = 1,
    log_path=None,
) -> list[CheckRecord]:
    """
    Time spent outside the level valleys, and optionally the split of the
    first plateau entered after leaving each valley against the jump law of
    the limit chain.
    """
    records: list[CheckRecord] = []
    estimate = occupation_outside(L, level, beta, horizon, n_runs, seed=seed, batch_size=batch_size, jobs=jobs)
    _record(
        records, log_path,
        check="occupation/outside-valleys",
        parameters={"level": level.h, "beta": beta, "horizon": horizon, "runs": n_runs, "seed": seed},
        expected="mean fraction of time outside the valleys within tolerance",
        observed={"mean": estimate.mean, "stderr": estimate.stderr},
        tolerance=bound,
        passed=estimate.mean <= bound,
    )
    if split_runs <= 0:
        return records

    targets = [p.states for p in level.plateaux]
    for i, plateau in enumerate(level.plateaux):
        law = _jump_law(level, i)
        if law is None:
            continue
        split = first_hit_split(
            L, beta, plateau.states, targets, split_runs,
            seed=seed, leave=level.valleys[i].states, batch_size=batch_size, jobs=jobs,
        )
        observed, passed = {}, split.unfinished == 0
        for j, (count, p) in enumerate(zip(split.counts, law)):
            p = float(p)
            freq = count / split_runs
            tol = sigmas * math.sqrt(p * (1 - p) / split_runs) + 1 / split_runs
            passed &= abs(freq - p) <= tol
            observed[str(j)] = {"frequency": freq, "limit": p, "bound": tol}
        _record(
            records, log_path,
            check="occupation/first-hit-split",
            parameters={"level": level.h, "plateau": i, "beta": beta, "runs": split_runs, "seed": seed},
            expected=f"within {sigmas} binomial standard errors of the limit jump law",
            observed=observed,
            tolerance=sigmas,
            passed=passed,
        )
    return records


def parse_states(L: Landscape, tokens: Iterable[str]) -> list[int]:
    """Resolve labels, falling back to integer state ids."""
    states = []
    for token in tokens:
        token = token.strip()
        if not token:
            continue
        try:
            states.append(L.index_of(token))
        except IndexOutOfRange:
            if not token.isdigit() or int(token) >= L.n_states:
                raise
            states.append(int(token))
    return states
