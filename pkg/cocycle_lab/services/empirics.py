"""
Empirics service
Empirical distributions of normalised cocycle sums, max-norm ball queries, tightness,
density at zero and the local-limit monitors over averaged distributions.
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from cocycle_lab.schemas.config import Exponent, default_L_grid, default_monitor_epsilons, resolve_exponent
from cocycle_lab.schemas.reports import (
    DensityPoint,
    DensityReport,
    MonitorCell,
    MonitorReport,
    Provenance,
    TightnessGridReport,
    TightnessReport,
)
from cocycle_lab.services.cocycle import Cocycle
from cocycle_lab.services.systems import sample_points
from cocycle_lab.utils.errors import ConfigurationError, InsufficientDataError
from cocycle_lab.utils.export import curve_frame, write_csv
from cocycle_lab.utils.seeding import derive_seed
from cocycle_lab.utils.workers import LANE_CHUNK, chunk_ranges, get_worker_pool

logger = logging.getLogger(__name__)

MASS_TOLERANCE = 1e-12
RELIABLE_BALL_COUNT = 20
DEFAULT_CONVOLUTION_SAMPLES = 10**4
MIN_MONITOR_HORIZONS = 4
MAX_LADDER_DEPTH = 12


def max_norm(samples: np.ndarray) -> np.ndarray:
    return np.abs(samples).max(axis=-1)


@dataclass(eq=False)
class EmpiricalMeasure:
    """Weighted samples in R^d; non-finite samples move to overflow_mass"""

    samples: np.ndarray
    weights: np.ndarray
    provenance: Provenance = field(default_factory=Provenance)
    overflow_mass: float = 0.0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim == 1:
            samples = samples[:, None]
        weights = np.asarray(self.weights, dtype=float)
        if samples.ndim != 2 or weights.shape != (samples.shape[0],):
            raise ConfigurationError(f"samples {samples.shape} and weights {weights.shape} do not match")
        if (weights < 0).any():
            raise ConfigurationError("weights must be nonnegative")
        finite = np.isfinite(samples).all(axis=1)
        if not finite.all():
            self.overflow_mass += float(weights[~finite].sum())
            samples, weights = samples[finite], weights[finite]
        if weights.sum() + self.overflow_mass > 1.0 + MASS_TOLERANCE:
            raise ConfigurationError(f"total mass {weights.sum() + self.overflow_mass} exceeds 1")
        self.samples = samples
        self.weights = weights
        order = np.argsort(max_norm(samples), kind="stable")
        self._sorted_norms = max_norm(samples)[order]
        self._cumulative = np.concatenate([[0.0], np.cumsum(weights[order])])

    @classmethod
    def uniform(cls, samples, provenance: Optional[Provenance] = None) -> "EmpiricalMeasure":
        samples = np.asarray(samples, dtype=float)
        if samples.ndim == 1:
            samples = samples[:, None]
        m = samples.shape[0]
        if m == 0:
            raise ConfigurationError("an empirical measure needs at least one sample")
        return cls(samples, np.full(m, 1.0 / m), provenance or Provenance())

    @classmethod
    def point_mass(cls, at) -> "EmpiricalMeasure":
        return cls.uniform(np.atleast_1d(np.asarray(at, dtype=float))[None, :])

    @property
    def dim(self) -> int:
        return self.samples.shape[1]

    @property
    def sample_count(self) -> int:
        return self.samples.shape[0]

    @property
    def total_mass(self) -> float:
        return float(self._cumulative[-1])

    @property
    def sorted_norms(self) -> np.ndarray:
        return self._sorted_norms

    def ball_mass(self, eta: float) -> float:
        """Mass of the open max-norm ball {v : |v| < eta}"""
        if eta <= 0:
            raise ConfigurationError("ball radius must be positive")
        return float(self._cumulative[np.searchsorted(self._sorted_norms, eta, side="left")])

    def closed_ball_mass(self, eta: float) -> float:
        """Mass of {v : |v| <= eta}"""
        if eta < 0:
            raise ConfigurationError("ball radius must be nonnegative")
        return float(self._cumulative[np.searchsorted(self._sorted_norms, eta, side="right")])

    def atom_at_zero(self) -> float:
        return self.closed_ball_mass(0.0)

    def summary(self, eta_grid: Sequence[float] = (0.01, 0.1, 0.5, 1.0, 2.0, 5.0)) -> Dict[str, Any]:
        return {
            "provenance": self.provenance,
            "dim": self.dim,
            "sample_count": self.sample_count,
            "total_mass": self.total_mass,
            "overflow_mass": self.overflow_mass,
            "ball_masses": [{"eta": eta, "mass": self.ball_mass(eta)} for eta in eta_grid],
        }

    def to_csv(self, path: Path) -> Path:
        columns = {f"x{j}": self.samples[:, j] for j in range(self.dim)}
        columns["weight"] = self.weights
        return write_csv(path, curve_frame(columns))


@dataclass
class AveragedMeasure:
    """tau_k = (1/k) * sum of sigma_1 .. sigma_k, components held by reference"""

    components: List[EmpiricalMeasure]

    def __post_init__(self):
        if not self.components:
            raise ConfigurationError("an averaged measure needs at least one component")
        dims = {c.dim for c in self.components}
        if len(dims) != 1:
            raise ConfigurationError(f"components have mixed dimensions {sorted(dims)}")
        exponents = {c.provenance.exponent for c in self.components}
        if len(exponents) != 1:
            raise ConfigurationError("components must share one normalisation exponent")

    @property
    def k(self) -> int:
        return len(self.components)

    @property
    def dim(self) -> int:
        return self.components[0].dim

    @property
    def sample_count(self) -> int:
        return sum(c.sample_count for c in self.components)

    @property
    def sorted_norms(self) -> np.ndarray:
        return np.sort(np.concatenate([c.sorted_norms for c in self.components]))

    def ball_mass(self, eta: float) -> float:
        return sum(c.ball_mass(eta) for c in self.components) / self.k

    def closed_ball_mass(self, eta: float) -> float:
        return sum(c.closed_ball_mass(eta) for c in self.components) / self.k

    def atom_at_zero(self) -> float:
        return self.closed_ball_mass(0.0)


@dataclass
class StreamedAverage:
    """tau_k ball masses counted exactly along each orbit, recorded only for chosen radii"""

    k: int
    dim: int
    sample_count: int
    masses: Dict[float, float]

    def ball_mass(self, eta: float) -> float:
        if eta not in self.masses:
            raise ConfigurationError(f"radius {eta} was not recorded for tau_{self.k}")
        return self.masses[eta]


MeasureLike = Union[EmpiricalMeasure, AveragedMeasure, StreamedAverage]


# Building measures from a cocycle

def _normalise(sums: np.ndarray, n: int, gamma: float) -> np.ndarray:
    return sums / float(n) ** gamma if gamma else sums


def _ladder_chunk(cocycle: Cocycle, seed: int, start: int, stop: int, n_list: Sequence[int]) -> np.ndarray:
    points = sample_points(cocycle.system, seed, range(start, stop))
    lanes = cocycle.lanes(points)
    out = np.empty((len(n_list), stop - start, cocycle.dim))
    for n_first, sums in cocycle.stream_sums(lanes, n_list[-1]):
        last = n_first + sums.shape[1]
        for slot, n in enumerate(n_list):
            if n_first <= n < last:
                out[slot] = sums[:, n - n_first]
    return out


def sum_distribution_ladder(
    cocycle: Cocycle,
    n_list: Sequence[int],
    exponent: Exponent,
    sample_count: int,
    seed: int,
) -> List[EmpiricalMeasure]:
    """sigma_n for every n in an increasing list, from one pass over the same orbits"""
    n_list = [int(n) for n in n_list]
    if not n_list or n_list[0] < 1 or sorted(set(n_list)) != n_list:
        raise ConfigurationError("n_list must be strictly increasing positive integers")
    if sample_count < 1:
        raise ConfigurationError("sample_count must be at least 1")
    gamma = resolve_exponent(exponent, cocycle.dim)
    chunks = chunk_ranges(sample_count, LANE_CHUNK)
    parts = get_worker_pool().map(lambda r: _ladder_chunk(cocycle, seed, r[0], r[1], n_list), chunks)
    sums = np.concatenate(parts, axis=1)
    measures = []
    for i, n in enumerate(n_list):
        provenance = Provenance(
            system=cocycle.system.model_dump(mode="json"),
            cocycle=cocycle.spec.model_dump(mode="json"),
            n=n,
            exponent=gamma,
            seed=seed,
            sample_count=sample_count,
        )
        measures.append(EmpiricalMeasure.uniform(_normalise(sums[i], n, gamma), provenance))
    logger.info(f"📊 Built {len(measures)} sum distribution(s) up to n={n_list[-1]} from {sample_count} orbits")
    return measures


def sum_distribution(cocycle: Cocycle, n: int, exponent: Exponent, sample_count: int, seed: int) -> EmpiricalMeasure:
    """sigma_n: law of f(n, x) / n^gamma for x ~ mu"""
    return sum_distribution_ladder(cocycle, [n], exponent, sample_count, seed)[0]


def average_distributions(measures: Sequence[EmpiricalMeasure]) -> AveragedMeasure:
    return AveragedMeasure(list(measures))


def reflect(measure: EmpiricalMeasure) -> EmpiricalMeasure:
    return EmpiricalMeasure(-measure.samples, measure.weights.copy(), measure.provenance, measure.overflow_mass)


def convolve(
    first: EmpiricalMeasure,
    second: EmpiricalMeasure,
    m_out: int = DEFAULT_CONVOLUTION_SAMPLES,
    seed: int = 0,
) -> EmpiricalMeasure:
    """Monte Carlo convolution from m_out weight-proportional pairs"""
    if first.sample_count == 0 or second.sample_count == 0:
        raise ConfigurationError("cannot convolve an empty measure")
    if first.dim != second.dim:
        raise ConfigurationError(f"cannot convolve dimensions {first.dim} and {second.dim}")
    rng = np.random.default_rng(derive_seed(seed, "convolve"))
    i = rng.choice(first.sample_count, size=m_out, p=first.weights / first.weights.sum())
    j = rng.choice(second.sample_count, size=m_out, p=second.weights / second.weights.sum())
    mass = first.total_mass * second.total_mass
    return EmpiricalMeasure(
        first.samples[i] + second.samples[j],
        np.full(m_out, mass / m_out),
        first.provenance,
    )


# Criteria

def tightness_check(measures: Sequence[MeasureLike], K: float, epsilon: float) -> TightnessReport:
    """Pass iff every measure gives mass > epsilon to the closed ball of radius K"""
    if K <= 0 or not 0 < epsilon < 1:
        raise ConfigurationError("tightness needs K > 0 and epsilon in (0, 1)")
    if not measures:
        raise ConfigurationError("tightness needs at least one measure")
    masses = [m.closed_ball_mass(K) for m in measures]
    labels = [getattr(getattr(m, "provenance", None), "n", None) for m in measures]
    worst = int(np.argmin(masses))
    return TightnessReport(
        K=K,
        epsilon=epsilon,
        passed=all(mass > epsilon for mass in masses),
        worst_n=labels[worst],
        worst_mass=masses[worst],
        masses=masses,
        labels=labels,
    )


def tightness_grid(measures: Sequence[MeasureLike], K_grid: Sequence[float], epsilon_grid: Sequence[float]) -> TightnessGridReport:
    """The (epsilon, K) hypothesis cell by cell, for sums with or without normalisation"""
    passed = [[tightness_check(measures, K, eps).passed for eps in epsilon_grid] for K in K_grid]
    return TightnessGridReport(
        K_grid=list(K_grid),
        epsilon_grid=list(epsilon_grid),
        passed=passed,
        any_passed=any(any(row) for row in passed),
    )


def density_at_zero(measure: MeasureLike, eta_grid: Sequence[float]) -> DensityReport:
    """Ratios ball_mass(eta) / eta^d with binomial errors; thin balls are flagged, not dropped"""
    eta_grid = [float(e) for e in eta_grid]
    if not eta_grid or any(e <= 0 for e in eta_grid) or any(a <= b for a, b in zip(eta_grid, eta_grid[1:])):
        raise ConfigurationError("eta_grid must be positive and strictly decreasing")
    m = measure.sample_count
    d = measure.dim
    points = []
    for eta in eta_grid:
        mass = measure.ball_mass(eta)
        scale = eta ** d
        count = mass * m
        points.append(
            DensityPoint(
                eta=eta,
                mass=mass,
                ratio=mass / scale,
                standard_error=float(np.sqrt(max(mass * (1 - mass), 0.0) / m)) / scale,
                expected_count=count,
                reliable=count >= RELIABLE_BALL_COUNT,
            )
        )
    reliable = [p.ratio for p in points if p.reliable]
    atom = measure.atom_at_zero()
    if atom > 0:
        logger.info(f"📊 Atom of mass {atom:.4f} at 0: ratios diverge as eta shrinks")
    return DensityReport(
        dim=d,
        points=points,
        atom_mass=atom,
        liminf_ratio=min(reliable) if reliable else None,
    )


def streamed_tau_table(
    cocycle: Cocycle,
    requests: Sequence[tuple],
    exponent: Exponent,
    sample_count: int,
    seed: int,
) -> List[StreamedAverage]:
    """
    Exact empirical tau_k(B(r)) for each requested (k, radii) pair: every l <= k along
    each orbit is counted, without storing the sums.
    """
    requests = [(int(k), tuple(float(r) for r in radii)) for k, radii in requests]
    horizon = max(k for k, _ in requests)
    gamma = resolve_exponent(exponent, cocycle.dim)
    radii = sorted({r for _, rs in requests for r in rs})
    horizons = sorted({k for k, _ in requests})

    def chunk(bounds):
        start, stop = bounds
        lanes = cocycle.lanes(sample_points(cocycle.system, seed, range(start, stop)))
        counts = np.zeros((len(radii), horizon + 1), dtype=np.int64)
        for n_first, sums in cocycle.stream_sums(lanes, horizon):
            ns = np.arange(n_first, n_first + sums.shape[1])
            norms = max_norm(sums) / (ns.astype(float) ** gamma if gamma else 1.0)
            for i, r in enumerate(radii):
                counts[i, ns] = (norms < r).sum(axis=0)
        return counts

    counts = sum(get_worker_pool().map(chunk, chunk_ranges(sample_count, LANE_CHUNK)))
    running = np.cumsum(counts, axis=1)
    table = {k: {r: float(running[radii.index(r), k]) / (k * sample_count) for r in radii} for k in horizons}
    return [
        StreamedAverage(k=k, dim=cocycle.dim, sample_count=sample_count, masses={r: table[k][r] for r in rs})
        for k, rs in requests
    ]


def ball_volume(eta: float, d: int) -> float:
    return (2.0 * eta) ** d


def _monitor_cells(observed: float, bound_of, L_grid, epsilon_grid) -> List[MonitorCell]:
    cells = []
    for L in L_grid:
        for eps in epsilon_grid:
            bound = bound_of(L, eps)
            cells.append(MonitorCell(L=L, epsilon=eps, bound=bound, violated=observed > bound))
    return cells


def _default_grids(L_grid, epsilon_grid):
    return list(L_grid or default_L_grid()), list(epsilon_grid or default_monitor_epsilons())


def monitor_average_ball_bound(
    taus: Sequence[MeasureLike],
    eta: float,
    L_grid: Optional[Sequence[int]] = None,
    epsilon_grid: Optional[Sequence[float]] = None,
    d: Optional[int] = None,
) -> MonitorReport:
    """
    limsup_k tau_k(B(eta)) against 2^d L eps^-d (2 eta)^d. The limsup is the max over
    the last half of the ladder; a bound violated for the whole grid is recurrence evidence.
    """
    if len(taus) < MIN_MONITOR_HORIZONS:
        raise InsufficientDataError(f"need at least {MIN_MONITOR_HORIZONS} horizons, got {len(taus)}")
    L_grid, epsilon_grid = _default_grids(L_grid, epsilon_grid)
    d = d or taus[0].dim
    curve = [tau.ball_mass(eta) for tau in taus]
    observed = max(curve[len(curve) // 2:])
    volume = ball_volume(eta, d)
    cells = _monitor_cells(observed, lambda L, eps: 2.0 ** d * L * eps ** -d * volume, L_grid, epsilon_grid)
    return MonitorReport(
        kind="average_ball",
        eta=eta,
        dim=d,
        observed=observed,
        curve=curve,
        cells=cells,
        recurrence_evidence=all(c.violated for c in cells),
        note="limsup replaced by the max over the second half of the horizon ladder",
    )


def monitor_dyadic_ladder_bound(
    taus_dyadic: Sequence[MeasureLike],
    eta: float,
    L_grid: Optional[Sequence[int]] = None,
    epsilon_grid: Optional[Sequence[float]] = None,
    d: Optional[int] = None,
) -> MonitorReport:
    """sum_n 2^n tau_{2^n k}(B(2^(-n/d) eta)) against 2^(d+1) d L^d eps^-d (2 eta)^d"""
    if len(taus_dyadic) < MIN_MONITOR_HORIZONS:
        raise InsufficientDataError(f"need at least {MIN_MONITOR_HORIZONS} horizons, got {len(taus_dyadic)}")
    if len(taus_dyadic) - 1 > MAX_LADDER_DEPTH:
        raise ConfigurationError(f"ladder depth N must be at most {MAX_LADDER_DEPTH}")
    L_grid, epsilon_grid = _default_grids(L_grid, epsilon_grid)
    d = d or taus_dyadic[0].dim
    partial = []
    running = 0.0
    for n, tau in enumerate(taus_dyadic):
        running += 2.0 ** n * tau.ball_mass(dyadic_radius(eta, n, d))
        partial.append(running)
    volume = ball_volume(eta, d)
    cells = _monitor_cells(
        running, lambda L, eps: 2.0 ** (d + 1) * d * L ** d * eps ** -d * volume, L_grid, epsilon_grid
    )
    return MonitorReport(
        kind="dyadic_ladder",
        eta=eta,
        dim=d,
        observed=running,
        curve=partial,
        cells=cells,
        recurrence_evidence=all(c.violated for c in cells),
        note="partial sums over the available dyadic ladder",
    )


def dyadic_radius(eta: float, n: int, d: int) -> float:
    return eta * 2.0 ** (-n / d)


def monitor_ladder(
    cocycle: Cocycle,
    base_horizon: int,
    depth: int,
    eta: float,
    exponent: Exponent,
    sample_count: int,
    seed: int,
    L_grid: Optional[Sequence[int]] = None,
    epsilon_grid: Optional[Sequence[float]] = None,
) -> Dict[str, MonitorReport]:
    """Both monitors on the horizon ladder k, 2k, ..., 2^depth k, from one streamed pass"""
    if depth > MAX_LADDER_DEPTH:
        raise ConfigurationError(f"ladder depth must be at most {MAX_LADDER_DEPTH}")
    d = cocycle.dim
    horizons = [base_horizon * 2 ** n for n in range(depth + 1)]
    requests = [(k, [eta, dyadic_radius(eta, n, d)]) for n, k in enumerate(horizons)]
    taus = streamed_tau_table(cocycle, requests, exponent, sample_count, seed)
    logger.info(f"📊 Monitors over horizons {horizons[0]}..{horizons[-1]} at eta={eta}")
    return {
        "average_ball": monitor_average_ball_bound(taus, eta, L_grid, epsilon_grid, d),
        "dyadic_ladder": monitor_dyadic_ladder_bound(taus, eta, L_grid, epsilon_grid, d),
    }
