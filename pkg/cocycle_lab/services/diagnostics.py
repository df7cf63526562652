"""
Diagnostics service
Finite-horizon recurrence estimates, drift scans over a grid of constants and the
median centering used to seed them.
"""
import logging
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from cocycle_lab.schemas.config import DriftGrid
from cocycle_lab.schemas.reports import DriftCell, DriftScanReport, MedianDriftReport, RecurrenceReport
from cocycle_lab.services.cocycle import Cocycle, build_cocycle, symmetrize
from cocycle_lab.services.empirics import max_norm, sum_distribution_ladder
from cocycle_lab.services.systems import sample_points
from cocycle_lab.utils.errors import ConfigurationError
from cocycle_lab.utils.workers import LANE_CHUNK, chunk_ranges, get_worker_pool

logger = logging.getLogger(__name__)

MIN_SAMPLE_COUNT = 100
RECURRENT = "recurrent-at-resolution"
NOT_FLAGGED = "not-flagged"


def checkpoint_horizons(N: int) -> List[int]:
    """Powers of 2 up to N, then N itself"""
    horizons = [1 << k for k in range(N.bit_length()) if (1 << k) <= N]
    if horizons[-1] != N:
        horizons.append(N)
    return horizons


def _check_scan_inputs(N: int, epsilons: Sequence[float], sample_count: int):
    if N < 1:
        raise ConfigurationError("the horizon must be at least 1")
    if sample_count < MIN_SAMPLE_COUNT:
        raise ConfigurationError(f"sample_count must be at least {MIN_SAMPLE_COUNT}, got {sample_count}")
    if not epsilons or any(e <= 0 for e in epsilons):
        raise ConfigurationError("epsilons must be positive")


def _scan_chunk(
    cocycle: Cocycle,
    seed: int,
    bounds: Tuple[int, int],
    drifts: np.ndarray,
    horizons: Sequence[int],
    epsilons: Sequence[float],
) -> Tuple[np.ndarray, np.ndarray]:
    """
    One pass over the orbits of samples start..stop-1. For every drift c the running
    min of |f(n, x) - n c| is recorded at the checkpoint horizons, together with the
    first n where it drops below each epsilon (-1 when it never does).
    """
    start, stop = bounds
    lanes = cocycle.lanes(sample_points(cocycle.system, seed, range(start, stop)))
    m = stop - start
    cells = drifts.shape[0]
    running = np.full((cells, m), np.inf)
    mins = np.empty((cells, m, len(horizons)))
    first = np.full((cells, len(epsilons), m), -1, dtype=np.int64)
    for n_first, sums in cocycle.stream_sums(lanes, horizons[-1]):
        length = sums.shape[1]
        ns = np.arange(n_first, n_first + length, dtype=float)
        due = [(h, n - n_first) for h, n in enumerate(horizons) if n_first <= n < n_first + length]
        for cell, c in enumerate(drifts):
            norms = max_norm(sums - ns[None, :, None] * c)
            cumulative = np.minimum(np.minimum.accumulate(norms, axis=1), running[cell][:, None])
            for h, column in due:
                mins[cell, :, h] = cumulative[:, column]
            running[cell] = cumulative[:, -1]
            for e, eps in enumerate(epsilons):
                pending = np.flatnonzero(first[cell, e] < 0)
                if len(pending) == 0:
                    continue
                hits = norms[pending] < eps
                found = hits.any(axis=1)
                first[cell, e, pending[found]] = n_first + hits[found].argmax(axis=1)
    return mins, first


def _joint_scan(
    cocycle: Cocycle,
    drifts: np.ndarray,
    N: int,
    epsilons: Sequence[float],
    sample_count: int,
    seed: int,
) -> Tuple[List[int], np.ndarray, np.ndarray]:
    """Every drift cell from the same stream of sums; chunks are gathered in lane order"""
    if drifts.ndim != 2 or drifts.shape[1] != cocycle.dim:
        raise ConfigurationError(f"drift grid has dimension {drifts.shape[-1]}, cocycle has {cocycle.dim}")
    horizons = checkpoint_horizons(N)
    chunks = chunk_ranges(sample_count, LANE_CHUNK)
    parts = get_worker_pool().map(
        lambda bounds: _scan_chunk(cocycle, seed, bounds, drifts, horizons, list(epsilons)), chunks
    )
    mins = np.concatenate([p[0] for p in parts], axis=1)
    first = np.concatenate([p[1] for p in parts], axis=2)
    return horizons, mins, first


def _recurrence_report(
    horizons: List[int], epsilons: Sequence[float], mins: np.ndarray, first: np.ndarray, sample_count: int, seed: int
) -> RecurrenceReport:
    fractions = [[float((mins[:, h] < eps).mean()) for eps in epsilons] for h in range(len(horizons))]
    return RecurrenceReport(
        horizons=horizons,
        epsilons=list(epsilons),
        sample_count=sample_count,
        seed=seed,
        min_norms=mins.tolist(),
        first_near_return_times=[[int(t) if t >= 0 else None for t in row] for row in first],
        fractions=fractions,
    )


def recurrence_estimate(
    cocycle: Cocycle,
    N_max: int,
    epsilons: Sequence[float],
    sample_count: int,
    seed: int,
) -> RecurrenceReport:
    """Near-return statistics of f(n, x), n <= N_max, over sample_count sampled orbits"""
    epsilons = [float(e) for e in epsilons]
    _check_scan_inputs(N_max, epsilons, sample_count)
    logger.info(f"🚀 Recurrence estimate: N={N_max}, m={sample_count}, eps={epsilons}")
    horizons, mins, first = _joint_scan(cocycle, np.zeros((1, cocycle.dim)), N_max, epsilons, sample_count, seed)
    report = _recurrence_report(horizons, epsilons, mins[0], first[0], sample_count, seed)
    logger.info(f"✅ Near-return fraction at N={N_max}: {report.fractions[-1]}")
    return report


def verdict_at_resolution(fraction: float, threshold: float) -> str:
    return RECURRENT if fraction >= threshold else NOT_FLAGGED


def drift_scan(
    cocycle: Cocycle,
    grid: Union[DriftGrid, Sequence, np.ndarray],
    N: int,
    epsilon: float,
    sample_count: int,
    seed: int,
    threshold: float = 0.95,
) -> DriftScanReport:
    """
    Verdict per c on whether f - c returns within epsilon of 0 by N for at least a
    threshold fraction of orbits. The c = 0 cell matches recurrence_estimate exactly.
    """
    if not 0 < threshold < 1:
        raise ConfigurationError("threshold must lie in (0, 1)")
    _check_scan_inputs(N, [epsilon], sample_count)
    drifts = grid.cells() if isinstance(grid, DriftGrid) else np.asarray(grid, dtype=float)
    if drifts.ndim == 1:
        drifts = drifts[:, None]
    if len(drifts) == 0:
        raise ConfigurationError("the drift grid is empty")
    logger.info(f"🚀 Drift scan over {len(drifts)} cell(s): N={N}, eps={epsilon}, m={sample_count}")
    horizons, mins, _ = _joint_scan(cocycle, drifts, N, [epsilon], sample_count, seed)
    cells = []
    for cell, c in enumerate(drifts):
        by_horizon = [float((mins[cell, :, h] < epsilon).mean()) for h in range(len(horizons))]
        fraction = by_horizon[-1]
        cells.append(
            DriftCell(
                c=c.tolist(),
                fraction=fraction,
                standard_error=float(np.sqrt(fraction * (1 - fraction) / sample_count)),
                fractions_by_horizon=by_horizon,
                verdict=verdict_at_resolution(fraction, threshold),
            )
        )
    report = DriftScanReport(
        horizon=N,
        epsilon=epsilon,
        threshold=threshold,
        seed=seed,
        sample_count=sample_count,
        horizons=horizons,
        box_low=drifts.min(axis=0).tolist(),
        box_high=drifts.max(axis=0).tolist(),
        cells=cells,
    )
    logger.info(f"✅ Drift scan flagged {len(report.flagged())} of {len(cells)} cell(s)")
    return report


def median_drift_estimate(cocycle: Cocycle, n_list: Sequence[int], sample_count: int, seed: int) -> MedianDriftReport:
    """a_n = -median(f(n, .)) / n; t is the median of a_n over the top half of n_list"""
    if cocycle.dim != 1:
        raise ConfigurationError("median drift estimation is defined for d = 1")
    measures = sum_distribution_ladder(cocycle, n_list, 1.0, sample_count, seed)
    medians = [float(np.median(m.samples[:, 0])) for m in measures]
    centering = [-med for med in medians]
    location = float(np.median(centering[len(centering) // 2:]))
    report = MedianDriftReport(
        n_list=list(n_list),
        medians=medians,
        centering=centering,
        location=location,
        sup_deviation=float(max(abs(a - location) for a in centering)),
        candidate_drift=-location,
    )
    logger.info(f"📊 Median drift candidate {report.candidate_drift:.6g} (sup deviation {report.sup_deviation:.3g})")
    return report


def symmetrized_cocycle(cocycle: Cocycle) -> Cocycle:
    """f~(x, y) = f(x) - f(y) on the product of the system with itself"""
    system, spec = symmetrize(cocycle.system, cocycle.spec)
    return build_cocycle(system, spec, cocycle.horizon_bound)


def pair_coincidence_report(
    cocycle: Cocycle,
    N_max: int,
    epsilons: Sequence[float],
    sample_count: int,
    seed: int,
) -> RecurrenceReport:
    """Fraction of independent pairs (x, y) with min_n |f(n, x) - f(n, y)| below each epsilon"""
    return recurrence_estimate(symmetrized_cocycle(cocycle), N_max, epsilons, sample_count, seed)


def near_return_curve(report: RecurrenceReport, epsilon: Optional[float] = None) -> List[float]:
    """Fraction against horizon for one recorded epsilon (the first by default)"""
    column = 0 if epsilon is None else report.epsilons.index(epsilon)
    return [row[column] for row in report.fractions]
