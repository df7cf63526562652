"""
Kernels service
Product triangle kernel g_delta, its autocorrelation against empirical measures and the
dyadic floor bounds for symmetrized sums.
"""
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid

from cocycle_lab.schemas.reports import (
    AutocorrelationEstimate,
    AutocorrelationFloorCell,
    FloorBoundReport,
    FloorCell,
    PeakCheckReport,
)
from cocycle_lab.services.empirics import EmpiricalMeasure, convolve, reflect
from cocycle_lab.utils.errors import ConfigurationError
from cocycle_lab.utils.seeding import derive_seed

logger = logging.getLogger(__name__)

DEFAULT_NODES = 10001
QUADRATURE_ROW_CHUNK = 256
DEFAULT_PAIR_BUDGET = 10**6
MIN_PAIR_BUDGET = 10**4
FLOOR_DELTAS = (0.5, 0.1, 0.02)
SE_GUARD = 3.0
HALF_MASS_MARGIN = 1.0001
MIN_HALF_MASS_K = 1e-3
EXACT_TOLERANCE = 1e-12


def _check_delta(delta: float):
    if not 0 < delta < 1:
        raise ConfigurationError(f"delta must lie in (0, 1), got {delta}")


def triangle_kernel(z, delta: float):
    """prod_j (delta - |z_j|)_+ / delta^2 over the last axis; a scalar z is one coordinate"""
    _check_delta(delta)
    z = np.asarray(z, dtype=float)
    if z.ndim == 0:
        return float(max(delta - abs(float(z)), 0.0) / delta ** 2)
    return np.prod(np.clip(delta - np.abs(z), 0.0, None) / delta ** 2, axis=-1)


def box_kernel(z, delta: float):
    """h_delta: indicator of the box [-delta/2, delta/2]^d"""
    z = np.asarray(z, dtype=float)
    if z.ndim == 0:
        return float(abs(float(z)) <= delta / 2)
    return np.all(np.abs(z) <= delta / 2, axis=-1).astype(float)


def box_self_convolution(z, delta: float, nodes: int = DEFAULT_NODES) -> float:
    """(h_delta * h_delta)(z) by trapezoid quadrature, one coordinate at a time"""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    y = np.linspace(-delta, delta, nodes)
    value = 1.0
    for zj in z:
        value *= trapezoid(box_kernel(y[:, None], delta) * box_kernel((zj - y)[:, None], delta), y)
    return float(value)


def kernel_normalization(delta: float, d: int, nodes: int = DEFAULT_NODES) -> float:
    """Iterated trapezoid quadrature of g_delta over [-delta, delta]^d, for d in {1, 2}"""
    _check_delta(delta)
    x = np.linspace(-delta, delta, nodes)
    if d == 1:
        return float(trapezoid(triangle_kernel(x[:, None], delta), x))
    if d != 2:
        raise ConfigurationError("quadrature is provided for d = 1 and d = 2")
    inner = np.empty(nodes)
    for start in range(0, nodes, QUADRATURE_ROW_CHUNK):
        rows = x[start:start + QUADRATURE_ROW_CHUNK]
        grid = np.stack(np.broadcast_arrays(rows[:, None], x[None, :]), axis=-1)
        inner[start:start + len(rows)] = trapezoid(triangle_kernel(grid, delta), x, axis=1)
    return float(trapezoid(inner, x))


# Autocorrelation phi_delta(z) = E g_delta(X - X' + z), X, X' i.i.d. from the measure

def _pair_differences(measure: EmpiricalMeasure, pair_budget: int, seed: int) -> Tuple[np.ndarray, np.ndarray, bool]:
    if measure.sample_count == 0:
        raise ConfigurationError("autocorrelation needs a nonempty measure")
    if pair_budget < MIN_PAIR_BUDGET:
        raise ConfigurationError(f"pair_budget must be at least {MIN_PAIR_BUDGET}")
    samples = measure.samples
    m = measure.sample_count
    p = measure.weights / measure.weights.sum()
    if m * m <= pair_budget:
        diffs = (samples[:, None, :] - samples[None, :, :]).reshape(m * m, measure.dim)
        return diffs, np.outer(p, p).ravel(), True
    rng = np.random.default_rng(derive_seed(seed, "pairs"))
    i = rng.choice(m, size=pair_budget, p=p)
    j = rng.choice(m, size=pair_budget, p=p)
    return samples[i] - samples[j], np.full(pair_budget, 1.0 / pair_budget), False


def _estimate(values: np.ndarray, pair_weights: np.ndarray, exact: bool) -> Tuple[float, float]:
    if exact:
        return float(np.dot(pair_weights, values)), 0.0
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(len(values)))


def kernel_autocorrelation(
    z,
    measure: EmpiricalMeasure,
    delta: float,
    pair_budget: int = DEFAULT_PAIR_BUDGET,
    seed: int = 0,
) -> AutocorrelationEstimate:
    """Exact double sum when m^2 fits the pair budget, Monte Carlo over sampled pairs otherwise"""
    _check_delta(delta)
    z = np.atleast_1d(np.asarray(z, dtype=float))
    diffs, pair_weights, exact = _pair_differences(measure, pair_budget, seed)
    value, se = _estimate(triangle_kernel(diffs + z, delta), pair_weights, exact)
    return AutocorrelationEstimate(
        z=z.tolist(), delta=delta, value=value, standard_error=se, exact=exact, pairs=len(pair_weights)
    )


def autocorrelation_peak_check(
    measure: EmpiricalMeasure,
    delta: float,
    z_grid: Sequence,
    pair_budget: int = DEFAULT_PAIR_BUDGET,
    seed: int = 0,
) -> PeakCheckReport:
    """phi_delta(0) >= phi_delta(z) - 3 SE on every grid z, using common pairs for all z"""
    _check_delta(delta)
    grid = [np.atleast_1d(np.asarray(z, dtype=float)) for z in z_grid]
    if not any(np.all(z == 0) for z in grid):
        raise ConfigurationError("z_grid must include the origin")
    diffs, pair_weights, exact = _pair_differences(measure, pair_budget, seed)
    at_origin = triangle_kernel(diffs, delta)
    origin_value, origin_se = _estimate(at_origin, pair_weights, exact)
    origin = AutocorrelationEstimate(
        z=[0.0] * measure.dim, delta=delta, value=origin_value, standard_error=origin_se,
        exact=exact, pairs=len(pair_weights),
    )
    estimates = []
    passed = True
    for z in grid:
        values = triangle_kernel(diffs + z, delta)
        value, se = _estimate(values, pair_weights, exact)
        estimates.append(
            AutocorrelationEstimate(z=z.tolist(), delta=delta, value=value, standard_error=se,
                                    exact=exact, pairs=len(pair_weights))
        )
        _, gap_se = _estimate(at_origin - values, pair_weights, exact)
        if origin_value < value - SE_GUARD * gap_se - EXACT_TOLERANCE:
            passed = False
            logger.warning(f"⚠️ phi_delta peak check failed at z={z.tolist()}: {value:.6g} > {origin_value:.6g}")
    return PeakCheckReport(delta=delta, origin=origin, estimates=estimates, passed=passed)


# Floors

def autocorrelation_floor(K: float, d: int) -> float:
    """1 / (4 (2K + 2)^d); equals 1 / (8K + 8) on the line"""
    return 1.0 / (4.0 * (2.0 * K + 2.0) ** d)


def half_mass_radius(measures: Sequence[EmpiricalMeasure]) -> float:
    """A K with closed_ball_mass(sigma_n, K/2) > 1/2 for every measure"""
    quantiles = [m.sorted_norms[m.sample_count // 2] for m in measures]
    return max(2.0 * HALF_MASS_MARGIN * max(quantiles), MIN_HALF_MASS_K)


def _floor_report(
    measures: Sequence[EmpiricalMeasure],
    K: Optional[float],
    eta: float,
    k_range: Sequence[int],
    d: int,
    convolution_samples: int,
    pair_budget: int,
    seed: int,
    deltas: Sequence[float],
) -> FloorBoundReport:
    if not measures:
        raise ConfigurationError("floor bounds need at least one measure")
    if any(m.dim != d for m in measures):
        raise ConfigurationError(f"floor bound expects dimension {d}")
    if not 0 < eta <= 1:
        raise ConfigurationError("eta must lie in (0, 1]")
    K = half_mass_radius(measures) if K is None else float(K)
    labels = [m.provenance.n if m.provenance.n is not None else i for i, m in enumerate(measures)]
    precondition = {label: m.closed_ball_mass(K / 2) for label, m in zip(labels, measures)}
    if any(mass <= 0.5 for mass in precondition.values()):
        logger.info(f"📊 Half-mass precondition fails at K={K:.4g}; the floor bound does not apply")
        return FloorBoundReport(dim=d, K=K, eta=eta, status="precondition_failed", precondition_masses=precondition)

    floor = eta ** d * autocorrelation_floor(K, d)
    phi_floor = autocorrelation_floor(K, d)
    cells: List[FloorCell] = []
    phi_cells: List[AutocorrelationFloorCell] = []
    for label, sigma in zip(labels, measures):
        tilde = convolve(sigma, reflect(sigma), convolution_samples, derive_seed(seed, "symmetrized", label))
        for k in k_range:
            scale = 2.0 ** (d * k)
            mass = tilde.closed_ball_mass(eta * 2.0 ** -k)
            count = mass * convolution_samples
            smoothed = (count + 1.0) / (convolution_samples + 2.0)
            se = scale * float(np.sqrt(smoothed * (1 - smoothed) / convolution_samples))
            lhs = scale * mass
            cells.append(FloorCell(n=label, k=k, lhs=lhs, floor=floor, standard_error=se,
                                   verdict=lhs >= floor - SE_GUARD * se))
        for delta in deltas:
            est = kernel_autocorrelation(np.zeros(d), sigma, delta, pair_budget, derive_seed(seed, "phi", label))
            phi_cells.append(
                AutocorrelationFloorCell(
                    n=label, delta=delta, value=est.value, standard_error=est.standard_error, floor=phi_floor,
                    passed=est.value > phi_floor - SE_GUARD * est.standard_error,
                )
            )
    ok = all(c.verdict for c in cells) and all(c.passed for c in phi_cells)
    logger.info(f"📊 Floor bound d={d}, K={K:.4g}, eta={eta}: {'consistent' if ok else 'inconsistent'}")
    return FloorBoundReport(
        dim=d, K=K, eta=eta, status="consistent" if ok else "inconsistent",
        precondition_masses=precondition, cells=cells, autocorrelation_cells=phi_cells,
    )


def symmetrized_line_floor(
    measures: Sequence[EmpiricalMeasure],
    K: Optional[float] = None,
    eta: float = 1.0,
    k_range: Sequence[int] = tuple(range(0, 9)),
    convolution_samples: int = 10**4,
    pair_budget: int = DEFAULT_PAIR_BUDGET,
    seed: int = 0,
    deltas: Sequence[float] = FLOOR_DELTAS,
) -> FloorBoundReport:
    """2^k sigma~_n([-2^-k eta, 2^-k eta]) >= eta / (8K + 8), plus phi_delta(0) > 1 / (8K + 8)"""
    return _floor_report(measures, K, eta, k_range, 1, convolution_samples, pair_budget, seed, deltas)


def symmetrized_box_floor(
    measures: Sequence[EmpiricalMeasure],
    K: Optional[float] = None,
    eta: float = 1.0,
    k_range: Sequence[int] = tuple(range(0, 7)),
    d: int = 2,
    convolution_samples: int = 10**4,
    pair_budget: int = DEFAULT_PAIR_BUDGET,
    seed: int = 0,
    deltas: Sequence[float] = FLOOR_DELTAS,
) -> FloorBoundReport:
    """2^(dk) sigma~_n(box of half-width 2^-k eta) >= eta^d / (4 (2K + 2)^d)"""
    return _floor_report(measures, K, eta, k_range, d, convolution_samples, pair_budget, seed, deltas)
