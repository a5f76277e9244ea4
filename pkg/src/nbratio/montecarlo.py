"""Correlated count simulation, error-rate scans and sample-size planning.

Datasets are generated by a shared-shock bivariate gamma (trivariate
reduction) driving two Poisson layers, so both marginals are exactly
negative binomial and the latent gammas have the requested correlation.
Scans are data-parallel over (efficacy, replicate) cells; every replicate
owns a counter-based RNG stream keyed by (seed, efficacy index, replicate
index), so results are bit-identical for any worker count or chunking.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import FIRST_COMPLETED, ProcessPoolExecutor, wait
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable

import numpy as np

from .design import EfficacyDesign, TypologyGroup
from .errors import (
    DomainError,
    InfeasibleCorrelationError,
    NbRatioError,
    ScanCancelledError,
)
from .estimators import PairedDataset, summarize
from .methods import ALL_METHODS, AnalysisOptions, Method, analyze_summary

THREADS_ENV_VAR = "NBRATIO_THREADS"

# tally layout per (method, r) cell
_T_REJECT_INF = 0
_T_REJECT_NONINF = 1
_T_REDUCED = 2
_T_INCONCLUSIVE = 3
_T_BORDERLINE = 4
_T_ADEQUATE = 5
_T_DEGENERATE = 6
_T_WIDTH = 7

_GROUP_SLOT = {
    TypologyGroup.REDUCED: _T_REDUCED,
    TypologyGroup.INCONCLUSIVE: _T_INCONCLUSIVE,
    TypologyGroup.BORDERLINE: _T_BORDERLINE,
    TypologyGroup.ADEQUATE: _T_ADEQUATE,
}


def default_workers() -> int:
    value = os.environ.get(THREADS_ENV_VAR, "").strip()
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            pass
    return 1


def correlation_bound(k1: float, k2: float) -> float:
    """Largest latent correlation the shared-shock construction supports."""
    lo, hi = min(k1, k2), max(k1, k2)
    return math.sqrt(lo / hi)


@dataclass(frozen=True)
class SimScenario:
    """Generative parameters for one Monte Carlo scan."""

    n: int
    mu1: float
    k1: float
    k2: float
    rho: float
    r_grid: tuple[float, ...]
    replicates: int
    seed: int
    design: EfficacyDesign
    methods: tuple[Method, ...] = ALL_METHODS
    options: AnalysisOptions = field(default_factory=AnalysisOptions)

    def __post_init__(self) -> None:
        object.__setattr__(self, "r_grid", tuple(float(r) for r in self.r_grid))
        object.__setattr__(self, "methods", tuple(Method(m) for m in self.methods))
        if self.n < 2:
            raise DomainError(f"need at least two subjects per group, got {self.n}")
        if not (self.mu1 > 0):
            raise DomainError(f"pre-treatment mean must be positive, got {self.mu1}")
        if not (self.k1 > 0 and self.k2 > 0):
            raise DomainError(f"shapes must be positive, got ({self.k1}, {self.k2})")
        bound = correlation_bound(self.k1, self.k2)
        if not (0.0 <= self.rho < bound):
            raise InfeasibleCorrelationError(
                f"latent correlation {self.rho} outside [0, {bound:.6g}) for "
                f"shapes ({self.k1}, {self.k2})"
            )
        for r in self.r_grid:
            if not (0.0 <= r <= 1.0):
                raise DomainError(f"efficacy grid values must lie in [0, 1], got {r}")
        if any(b <= a for a, b in zip(self.r_grid, self.r_grid[1:])):
            raise DomainError("efficacy grid must be strictly increasing")
        if self.replicates < 0:
            raise DomainError("replicates must be non-negative")
        if not (0 <= self.seed < 2**64):
            raise DomainError("seed must fit in 64 bits")
        if not self.methods:
            raise DomainError("at least one method required")


PRESET_PARAMETERS = {
    "hookworm": dict(mu1=74.0, k1=0.84, k2=0.58, rho=0.65, target=0.70),
    "ascaris": dict(mu1=1255.0, k1=0.08, k2=0.0512, rho=0.67, target=0.95),
    "trichuris": dict(mu1=162.0, k1=0.92, k2=0.53, rho=0.68, target=0.50),
}


def scenario_from_preset(
    species: str,
    *,
    n: int = 91,
    replicates: int = 10_000,
    seed: int = 1,
    margin: float = 0.05,
    alpha: float = 0.025,
    r_grid: Iterable[float] | None = None,
    methods: tuple[Method, ...] = ALL_METHODS,
    options: AnalysisOptions | None = None,
) -> SimScenario:
    """Canonical per-species simulation scenario (reference study estimates)."""
    try:
        params = PRESET_PARAMETERS[species.lower()]
    except KeyError:
        raise DomainError(
            f"unknown species {species!r}; expected one of {sorted(PRESET_PARAMETERS)}"
        ) from None
    design = EfficacyDesign(target=params["target"], margin=margin, alpha=alpha)
    if r_grid is None:
        r_grid = (design.threshold_adequacy, design.threshold_inferiority)
    return SimScenario(
        n=n,
        mu1=params["mu1"],
        k1=params["k1"],
        k2=params["k2"],
        rho=params["rho"],
        r_grid=tuple(r_grid),
        replicates=replicates,
        seed=seed,
        design=design,
        methods=tuple(methods),
        options=options if options is not None else AnalysisOptions(),
    )


def replicate_rng(seed: int, r_index: int, replicate_index: int) -> np.random.Generator:
    """Counter-based stream for one (efficacy, replicate) cell."""
    key = np.array([seed, (r_index << 32) | replicate_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def latent_gamma_pair(
    rng: np.random.Generator, n: int, k1: float, k2: float, rho: float
) -> tuple[np.ndarray, np.ndarray]:
    """Unit-scale gamma pair with shapes (k1, k2) and correlation rho."""
    k0 = rho * math.sqrt(k1 * k2)
    shared = rng.gamma(k0, size=n) if k0 > 0 else np.zeros(n)
    own1 = rng.gamma(k1 - k0, size=n)
    own2 = rng.gamma(k2 - k0, size=n)
    return shared + own1, shared + own2


def simulate_paired(
    n: int,
    mu1: float,
    r: float,
    k1: float,
    k2: float,
    rho: float,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """One paired dataset: NB(k1, mu1) pre counts, NB(k2, (1-r)*mu1) post counts."""
    if not (mu1 > 0):
        raise DomainError(f"mean must be positive, got {mu1}")
    if not (0.0 <= r <= 1.0):
        raise DomainError(f"efficacy must lie in [0, 1], got {r}")
    bound = correlation_bound(k1, k2)
    if not (0.0 <= rho < bound):
        raise InfeasibleCorrelationError(
            f"latent correlation {rho} outside [0, {bound:.6g}) for shapes ({k1}, {k2})"
        )
    g1, g2 = latent_gamma_pair(rng, n, k1, k2, rho)
    x = rng.poisson(mu1 * g1 / k1)
    y = rng.poisson((1.0 - r) * mu1 * g2 / k2)
    return x.astype(np.int64), y.astype(np.int64)


def _analyze_replicate(
    x: np.ndarray, y: np.ndarray, scenario: SimScenario, tally: np.ndarray
) -> None:
    """Tally one simulated dataset into per-method counts.

    Over-dispersion shapes and the pairing correlation are re-estimated
    from the simulated counts before testing.  A method failure counts as
    degenerate (no rejection on either test).
    """
    try:
        summary = summarize(PairedDataset(x, y, paired=True))
    except NbRatioError:
        tally[:, _T_DEGENERATE] += 1
        return
    outcomes = analyze_summary(summary, scenario.design, scenario.options, scenario.methods)
    for idx, outcome in enumerate(outcomes):
        if outcome.degenerate is not None:
            tally[idx, _T_DEGENERATE] += 1
            continue
        group = outcome.classification.group
        tally[idx, _GROUP_SLOT[group]] += 1
        if group in (TypologyGroup.REDUCED, TypologyGroup.BORDERLINE):
            tally[idx, _T_REJECT_INF] += 1
        if group in (TypologyGroup.ADEQUATE, TypologyGroup.BORDERLINE):
            tally[idx, _T_REJECT_NONINF] += 1


def _scan_task(args: tuple[SimScenario, int, int, int]) -> tuple[int, np.ndarray]:
    scenario, r_index, rep_lo, rep_hi = args
    r = scenario.r_grid[r_index]
    tally = np.zeros((len(scenario.methods), _T_WIDTH), dtype=np.int64)
    for rep in range(rep_lo, rep_hi):
        rng = replicate_rng(scenario.seed, r_index, rep)
        x, y = simulate_paired(
            scenario.n, scenario.mu1, r, scenario.k1, scenario.k2, scenario.rho, rng
        )
        _analyze_replicate(x, y, scenario, tally)
    return r_index, tally


@dataclass(frozen=True)
class ScanCell:
    """Rejection and typology tallies for one (method, efficacy) cell."""

    method: Method
    r: float
    replicates: int
    reject_inferiority: int
    reject_noninferiority: int
    reduced: int
    inconclusive: int
    borderline: int
    adequate: int
    degenerate: int

    @property
    def reject_inferiority_rate(self) -> float:
        return self.reject_inferiority / self.replicates if self.replicates else 0.0

    @property
    def reject_noninferiority_rate(self) -> float:
        return self.reject_noninferiority / self.replicates if self.replicates else 0.0

    def frequency(self, group: TypologyGroup) -> float:
        if not self.replicates:
            return 0.0
        value = {
            TypologyGroup.REDUCED: self.reduced,
            TypologyGroup.INCONCLUSIVE: self.inconclusive,
            TypologyGroup.BORDERLINE: self.borderline,
            TypologyGroup.ADEQUATE: self.adequate,
        }[group]
        return value / self.replicates

    @property
    def degenerate_fraction(self) -> float:
        return self.degenerate / self.replicates if self.replicates else 0.0


@dataclass(frozen=True)
class ScanResult:
    scenario: SimScenario
    cells: tuple[ScanCell, ...]

    def cell(self, method: Method, r: float) -> ScanCell:
        for cell in self.cells:
            if cell.method is Method(method) and math.isclose(cell.r, r):
                return cell
        raise KeyError(f"no cell for ({method}, {r})")


def _chunk_bounds(replicates: int, workers: int) -> list[tuple[int, int]]:
    if replicates == 0:
        return []
    chunk = max(25, min(500, math.ceil(replicates / max(1, workers * 8))))
    return [(lo, min(lo + chunk, replicates)) for lo in range(0, replicates, chunk)]


def run_scan(
    scenario: SimScenario,
    parallelism: int | None = None,
    progress: Callable[[int, int], None] | None = None,
    should_stop: Callable[[], bool] | None = None,
) -> ScanResult:
    """Simulate and analyse the full (efficacy x replicate) grid.

    Deterministic for a fixed scenario seed regardless of ``parallelism``.
    ``progress`` receives (completed, total) task counts; ``should_stop``
    is polled between tasks and raises ScanCancelledError when true.
    """
    workers = default_workers() if parallelism is None else max(1, int(parallelism))
    tallies = {
        r_index: np.zeros((len(scenario.methods), _T_WIDTH), dtype=np.int64)
        for r_index in range(len(scenario.r_grid))
    }
    tasks = [
        (scenario, r_index, lo, hi)
        for r_index in range(len(scenario.r_grid))
        for lo, hi in _chunk_bounds(scenario.replicates, workers)
    ]
    done = 0

    def note_progress() -> None:
        if progress is not None:
            progress(done, len(tasks))

    def check_stop() -> None:
        if should_stop is not None and should_stop():
            raise ScanCancelledError("scan cancelled")

    note_progress()
    if workers == 1 or len(tasks) <= 1:
        for task in tasks:
            check_stop()
            r_index, tally = _scan_task(task)
            tallies[r_index] += tally
            done += 1
            note_progress()
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            pending = {pool.submit(_scan_task, task) for task in tasks}
            try:
                while pending:
                    check_stop()
                    finished, pending = wait(pending, return_when=FIRST_COMPLETED)
                    for future in finished:
                        r_index, tally = future.result()
                        tallies[r_index] += tally
                        done += 1
                    note_progress()
            except ScanCancelledError:
                for future in pending:
                    future.cancel()
                raise

    cells = []
    for idx, method in enumerate(scenario.methods):
        for r_index, r in enumerate(scenario.r_grid):
            row = tallies[r_index][idx]
            cells.append(
                ScanCell(
                    method=method,
                    r=r,
                    replicates=scenario.replicates,
                    reject_inferiority=int(row[_T_REJECT_INF]),
                    reject_noninferiority=int(row[_T_REJECT_NONINF]),
                    reduced=int(row[_T_REDUCED]),
                    inconclusive=int(row[_T_INCONCLUSIVE]),
                    borderline=int(row[_T_BORDERLINE]),
                    adequate=int(row[_T_ADEQUATE]),
                    degenerate=int(row[_T_DEGENERATE]),
                )
            )
    return ScanResult(scenario=scenario, cells=tuple(cells))


def typology_curves(result: ScanResult) -> dict:
    """Plot-ready classification-frequency series per method.

    The degenerate fraction is emitted as its own series so the four group
    frequencies plus the degenerate series sum to one at every efficacy.
    """
    design = result.scenario.design
    r_values = list(result.scenario.r_grid)
    methods: dict[str, dict[str, list[float]]] = {}
    for method in result.scenario.methods:
        series: dict[str, list[float]] = {
            "reduced": [],
            "inconclusive": [],
            "borderline": [],
            "adequate": [],
            "degenerate": [],
        }
        for r in r_values:
            cell = result.cell(method, r)
            series["reduced"].append(cell.frequency(TypologyGroup.REDUCED))
            series["inconclusive"].append(cell.frequency(TypologyGroup.INCONCLUSIVE))
            series["borderline"].append(cell.frequency(TypologyGroup.BORDERLINE))
            series["adequate"].append(cell.frequency(TypologyGroup.ADEQUATE))
            series["degenerate"].append(cell.degenerate_fraction)
        methods[method.value] = series
    return {
        "r": r_values,
        "thresholds": {
            "adequacy": design.threshold_adequacy,
            "inferiority": design.threshold_inferiority,
        },
        "methods": methods,
    }


TIDY_CSV_STATISTICS = (
    "reject_inferiority_rate",
    "reject_noninferiority_rate",
    "freq_reduced",
    "freq_inconclusive",
    "freq_borderline",
    "freq_adequate",
    "freq_degenerate",
)


def scan_to_tidy_csv(result: ScanResult) -> str:
    """Long-format CSV: method, r, statistic, value, replicates."""
    lines = ["method,r,statistic,value,replicates"]
    for cell in result.cells:
        values = (
            cell.reject_inferiority_rate,
            cell.reject_noninferiority_rate,
            cell.frequency(TypologyGroup.REDUCED),
            cell.frequency(TypologyGroup.INCONCLUSIVE),
            cell.frequency(TypologyGroup.BORDERLINE),
            cell.frequency(TypologyGroup.ADEQUATE),
            cell.degenerate_fraction,
        )
        for stat, value in zip(TIDY_CSV_STATISTICS, values):
            lines.append(
                f"{cell.method.value},{cell.r!r},{stat},{value!r},{cell.replicates}"
            )
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class PlanCriteria:
    """Planning constraints over the scanned efficacy grid.

    ``max_inconclusive`` applies where a conclusive answer is attainable
    (outside the open threshold band) unless explicit ranges are given;
    ``max_misleading`` bounds the rate of false positive claims everywhere.
    """

    max_inconclusive: float = 1.0
    max_misleading: float = 1.0
    inconclusive_r_ranges: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self) -> None:
        if not (0.0 < self.max_inconclusive <= 1.0):
            raise DomainError("max_inconclusive must lie in (0, 1]")
        if not (0.0 < self.max_misleading <= 1.0):
            raise DomainError("max_misleading must lie in (0, 1]")


def misleading_fraction(cell: ScanCell, design: EfficacyDesign) -> float:
    """Frequency of positive claims contradicted by the true efficacy."""
    out = 0.0
    if cell.r >= design.threshold_inferiority:
        out += cell.frequency(TypologyGroup.REDUCED) + cell.frequency(TypologyGroup.BORDERLINE)
    if cell.r < design.threshold_adequacy:
        out += cell.frequency(TypologyGroup.ADEQUATE) + cell.frequency(TypologyGroup.BORDERLINE)
    return out


@dataclass(frozen=True)
class PlanCandidate:
    n: int
    scan: ScanResult
    passes: bool
    max_inconclusive: dict[str, float]
    max_misleading: dict[str, float]


@dataclass(frozen=True)
class PlanReport:
    criteria: PlanCriteria
    candidates: tuple[PlanCandidate, ...]
    recommended_n: int | None


def _in_inconclusive_ranges(r: float, criteria: PlanCriteria, design: EfficacyDesign) -> bool:
    if criteria.inconclusive_r_ranges is not None:
        return any(lo <= r <= hi for lo, hi in criteria.inconclusive_r_ranges)
    return r <= design.threshold_adequacy or r >= design.threshold_inferiority


def plan_sample_size(
    scenario_template: SimScenario,
    n_candidates: Iterable[int],
    criteria: PlanCriteria,
    parallelism: int | None = None,
    progress: Callable[[int, int], None] | None = None,
    should_stop: Callable[[], bool] | None = None,
) -> PlanReport:
    """Scan each candidate group size and recommend the smallest that meets the criteria."""
    candidates = sorted(set(int(n) for n in n_candidates))
    if not candidates:
        raise DomainError("need at least one candidate sample size")
    design = scenario_template.design
    total = len(candidates)
    reports: list[PlanCandidate] = []
    recommended = None
    for index, n in enumerate(candidates):
        scan = run_scan(
            replace(scenario_template, n=n),
            parallelism=parallelism,
            progress=(
                None
                if progress is None
                else lambda done, tasks, _i=index: progress(_i * tasks + done, total * tasks)
            ),
            should_stop=should_stop,
        )
        worst_inconclusive: dict[str, float] = {}
        worst_misleading: dict[str, float] = {}
        for method in scan.scenario.methods:
            inconclusive = [
                cell.frequency(TypologyGroup.INCONCLUSIVE)
                for cell in scan.cells
                if cell.method is method
                and _in_inconclusive_ranges(cell.r, criteria, design)
            ]
            misleading = [
                misleading_fraction(cell, design)
                for cell in scan.cells
                if cell.method is method
            ]
            worst_inconclusive[method.value] = max(inconclusive, default=0.0)
            worst_misleading[method.value] = max(misleading, default=0.0)
        passes = all(
            v <= criteria.max_inconclusive for v in worst_inconclusive.values()
        ) and all(v <= criteria.max_misleading for v in worst_misleading.values())
        if passes and recommended is None:
            recommended = n
        reports.append(
            PlanCandidate(
                n=n,
                scan=scan,
                passes=passes,
                max_inconclusive=worst_inconclusive,
                max_misleading=worst_misleading,
            )
        )
    return PlanReport(criteria=criteria, candidates=tuple(reports), recommended_n=recommended)
