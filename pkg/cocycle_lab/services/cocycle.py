"""
Cocycle service
Compiles a CocycleSpec over a system into a vectorised evaluator of f along orbit windows,
then builds the sums f(n, x), skew-product steps and the tri-adic orbit cocycle on it.
"""
import logging
from dataclasses import dataclass
from typing import Any, Callable, Iterator, List, Sequence, Tuple

import numpy as np

from cocycle_lab.schemas.cocycle import AddCoboundary, CocycleSpec, SubtractDrift, Symmetrize
from cocycle_lab.schemas.config import DEFAULT_HORIZON_BOUND
from cocycle_lab.schemas.system import OdometerSystem, ProductSystem, coordinate_dim, is_shift
from cocycle_lab.services.systems import (
    MAX_CARRY,
    OdometerPoint,
    get_dynamics,
    swap_digit,
    swap_point,
)
from cocycle_lab.utils.errors import ConfigurationError, ResourceLimitError, SearchExhaustedError

logger = logging.getLogger(__name__)

STREAM_BLOCK = 1024
ORACLE_MARGIN = 4
ORACLE_SLACK = 10
LATTICE_EPSILON = 0.5
CONTINUOUS_EPSILON = 0.05

_U64 = np.uint64
_INV_2_64 = 2.0 ** -64

# (lanes, n0, B) -> array (m, B, d) of f(T^n x_i), n = n0 .. n0+B-1
Evaluator = Callable[[Any, int, int], np.ndarray]


@dataclass(frozen=True)
class SkewState:
    base_point: Any
    fiber: np.ndarray


def _integral(values) -> bool:
    arr = np.asarray(values, dtype=float)
    return bool(np.all(np.isfinite(arr)) and np.all(arr == np.round(arr)))


# Tri-adic orbit cocycle

def _first_non_two(x: OdometerPoint) -> int:
    j = 0
    while x.digit(j) == 2:
        j += 1
        if j > MAX_CARRY:
            raise ResourceLimitError(f"no digit other than 2 among the first {MAX_CARRY} digits")
    return j


def _swapped_value(digits: Sequence[int]) -> int:
    return sum(swap_digit(d) * 3 ** i for i, d in enumerate(digits))


def odometer_orbit_cocycle(x: OdometerPoint) -> int:
    """
    Integer f(x) with T x = T'^f(x) x, where T' = phi o T o phi swaps digits 1 and 2
    around the adding machine. With j the first digit of x that is not 2, f(x) is the
    swapped base-3 value of Tx's first j+1 digits minus that of x's.
    """
    if x.q != 3:
        raise ConfigurationError("the orbit cocycle is defined on the tri-adic odometer")
    j = _first_non_two(x)
    before = x.digits(j + 1)
    after = (0,) * j + (before[j] + 1,)
    return _swapped_value(after) - _swapped_value(before)


def orbit_search_bound(x: OdometerPoint, slack: int = ORACLE_SLACK) -> int:
    """Both swapped values lie in [0, 3^(j+1)), so |f(x)| < 3^(j+1) for j the carry index"""
    return 3 ** (_first_non_two(x) + 1) + slack


def oracle_orbit_cocycle(x: OdometerPoint, k_max: int) -> int:
    """Brute-force f(x): first k in 0, 1, -1, 2, -2, ... with T'^k x = T x on j+5 digits"""
    if x.q != 3:
        raise ConfigurationError("the orbit cocycle is defined on the tri-adic odometer")
    dynamics = get_dynamics(OdometerSystem(q=3))
    length = _first_non_two(x) + 1 + ORACLE_MARGIN
    target = dynamics.step(x).digits(length)
    if x.digits(length) == target:
        return 0
    forward = backward = x
    for k in range(1, k_max + 1):
        forward = swap_point(dynamics.step(swap_point(forward)))
        if forward.digits(length) == target:
            return k
        backward = swap_point(dynamics.step_inverse(swap_point(backward)))
        if backward.digits(length) == target:
            return -k
    raise SearchExhaustedError(f"no k with |k| <= {k_max} maps x to Tx under T'")


def orbit_cocycle_window(window) -> np.ndarray:
    """Closed form on a batch: f = -(3^j - 1)/2 + (2*3^j if x_j = 0 else -3^j)"""
    values = window.values
    remaining = values.copy()
    j = np.zeros(values.shape, dtype=np.int64)
    active = np.ones(values.shape, dtype=bool)
    for _ in range(window.width):
        active &= remaining % 3 == 2
        j += active
        remaining //= 3
    power = np.power(np.int64(3), j)
    digit_j = (values // power) % 3
    f = -(power - 1) // 2 + np.where(digit_j == 0, 2 * power, -power)
    saturated = window.saturated()
    if saturated.any():
        for lane, column in np.argwhere(saturated):
            f[lane, column] = odometer_orbit_cocycle(window.point(int(lane), int(column)))
    return f.astype(np.float64)[..., None]


# Compilation

class Cocycle:
    """f: X -> R^d over one system, with modifiers applied left to right"""

    def __init__(self, system, spec: CocycleSpec, horizon_bound: int = DEFAULT_HORIZON_BOUND):
        self.system = system
        self.spec = spec
        self.horizon_bound = int(horizon_bound)
        self.dynamics = get_dynamics(system)
        self._evaluate, self.dim, self.integer_valued = self._compile()
        logger.debug(
            f"🔧 Compiled {spec.base.kind} cocycle with {len(spec.modifiers)} modifier(s), d={self.dim}"
        )

    # compile helpers

    def _compile(self) -> Tuple[Evaluator, int, bool]:
        modifiers = list(self.spec.modifiers)
        if not self.spec.symmetrized:
            return self._compile_chain(self.system, modifiers)
        position = next(i for i, m in enumerate(modifiers) if m.kind == "symmetrize")
        if self.system.kind != "product" or self.system.left != self.system.right:
            raise ConfigurationError("symmetrize needs a product system S = T x T with equal components")
        inner, dim, integer = self._compile_chain(self.system.left, modifiers[:position])

        def symmetrized(lanes, n0, length):
            return inner(lanes.left, n0, length) - inner(lanes.right, n0, length)

        return self._apply_modifiers(self.system, symmetrized, dim, integer, modifiers[position + 1:])

    def _compile_chain(self, system, modifiers) -> Tuple[Evaluator, int, bool]:
        base, dim, integer = self._compile_base(system)
        return self._apply_modifiers(system, base, dim, integer, modifiers)

    def _compile_base(self, system) -> Tuple[Evaluator, int, bool]:
        base = self.spec.base
        kind = base.kind

        if kind == "constant":
            value = np.asarray(base.value, dtype=float)

            def constant(lanes, n0, length):
                return np.tile(value, (lanes.count, length, 1))

            return constant, len(value), _integral(value)

        if kind in ("indicator", "indicator_minus_mean"):
            self._require(system, "rotation", kind)
            threshold = _U64(min(int(base.beta * 2.0 ** 64), (1 << 64) - 1))
            offset = base.beta if kind == "indicator_minus_mean" else 0.0

            def indicator(lanes, n0, length):
                w = lanes.window(n0, length)
                return (w.fracs < threshold).astype(np.float64)[..., None] - offset

            return indicator, 1, kind == "indicator"

        if kind == "coordinate_read":
            if not is_shift(system):
                raise ConfigurationError("coordinate_read needs an i.i.d. or Markov shift system")
            dynamics = get_dynamics(system)
            table = dynamics.chain.table if system.kind == "markov_shift" else dynamics.sampler.table
            absolute = base.absolute

            def coordinate(lanes, n0, length):
                values = lanes.window(n0, length).values
                return np.abs(values) if absolute else values

            return coordinate, coordinate_dim(system), table is not None and _integral(table)

        if kind == "odometer_orbit":
            self._require(system, "odometer", kind)
            if system.q != 3:
                raise ConfigurationError("odometer_orbit needs the tri-adic odometer (q = 3)")

            def orbit(lanes, n0, length):
                return orbit_cocycle_window(lanes.window(n0, length))

            return orbit, 1, True

        if kind == "lattice_step":
            symbols = self._symbol_count(system)
            if symbols != len(base.steps):
                raise ConfigurationError(f"lattice_step has {len(base.steps)} steps for {symbols} symbols")
            steps = np.asarray(base.steps, dtype=float)

            def lattice(lanes, n0, length):
                return steps[lanes.window(n0, length).symbols]

            return lattice, steps.shape[1], _integral(steps)

        raise ConfigurationError(f"unknown cocycle base {kind!r}")

    def _compile_bounded(self, system, b) -> Tuple[Callable[[Any], np.ndarray], int]:
        if b.kind == "trig_of_rotation":
            self._require(system, "rotation", b.kind)
            multiplier = _U64(b.frequency & ((1 << 64) - 1))

            def trig(w):
                with np.errstate(over="ignore"):
                    turns = (w.fracs * multiplier).astype(np.float64) * _INV_2_64
                return (b.amplitude * np.sin(2.0 * np.pi * turns))[..., None]

            return trig, 1

        if b.kind == "digit_read":
            self._require(system, "odometer", b.kind)

            def digit(w):
                return w.digit(b.position).astype(np.float64)[..., None]

            return digit, 1

        if b.kind == "bounded_coordinate_read":
            if not is_shift(system):
                raise ConfigurationError("bounded_coordinate_read needs a shift system")

            def clamp(w):
                return np.clip(w.values, -b.clamp, b.clamp)

            return clamp, coordinate_dim(system)

        raise ConfigurationError(f"unknown bounded function {b.kind!r}")

    def _apply_modifiers(self, system, fn: Evaluator, dim: int, integer: bool, modifiers) -> Tuple[Evaluator, int, bool]:
        for modifier in modifiers:
            if modifier.kind == "subtract_drift":
                c = np.asarray(modifier.c, dtype=float)
                if len(c) != dim:
                    raise ConfigurationError(f"drift has dimension {len(c)}, cocycle has {dim}")
                fn = self._drifted(fn, c)
                integer = integer and _integral(c)
            elif modifier.kind == "add_coboundary":
                b_fn, b_dim = self._compile_bounded(system, modifier.b)
                if b_dim not in (1, dim):
                    raise ConfigurationError(f"coboundary has dimension {b_dim}, cocycle has {dim}")
                fn = self._perturbed(fn, b_fn)
                integer = integer and modifier.b.kind == "digit_read"
            elif modifier.kind == "compose_shift":
                fn = self._shifted(fn)
            elif modifier.kind == "symmetrize":
                raise ConfigurationError("symmetrize may appear at most once")
        return fn, dim, integer

    @staticmethod
    def _drifted(fn: Evaluator, c: np.ndarray) -> Evaluator:
        def drifted(lanes, n0, length):
            return fn(lanes, n0, length) - c

        return drifted

    @staticmethod
    def _perturbed(fn: Evaluator, b_fn) -> Evaluator:
        def perturbed(lanes, n0, length):
            # the wider window first, so shift lanes can continue from it
            b_values = b_fn(lanes.window(n0, length + 1))
            return fn(lanes, n0, length) + np.diff(b_values, axis=1)

        return perturbed

    @staticmethod
    def _shifted(fn: Evaluator) -> Evaluator:
        def shifted(lanes, n0, length):
            return fn(lanes, n0 + 1, length)

        return shifted

    @staticmethod
    def _require(system, kind: str, what: str):
        if system.kind != kind:
            raise ConfigurationError(f"{what} is defined on {kind} systems, not {system.kind}")

    @staticmethod
    def _symbol_count(system) -> int:
        if system.kind == "markov_shift":
            return system.n_states
        if system.kind == "iid_shift":
            sampler = get_dynamics(system).sampler
            if sampler.symbolic:
                return sampler.n_symbols
        raise ConfigurationError("lattice_step needs a Markov shift or a discrete i.i.d. shift")

    # properties

    @property
    def default_epsilon(self) -> float:
        return LATTICE_EPSILON if self.integer_valued else CONTINUOUS_EPSILON

    @property
    def component_system(self):
        return self.system.left if self.spec.symmetrized else self.system

    def coboundary_bound(self) -> float:
        """Sum of sup|b| over the coboundaries added, so |f'(n, x) - f(n, x)| <= 2 * bound"""
        q = getattr(self.component_system, "q", 0)
        return float(sum(m.b.sup_bound(q) for m in self.spec.modifiers if isinstance(m, AddCoboundary)))

    def with_modifier(self, modifier) -> "Cocycle":
        return Cocycle(self.system, self.spec.with_modifier(modifier), self.horizon_bound)

    # evaluation

    def lanes(self, points: Sequence):
        return self.dynamics.lanes(points)

    def block_values(self, lanes, n0: int, length: int) -> np.ndarray:
        """f(T^n x_i) for every lane i and n in [n0, n0+length), shape (m, length, d)"""
        return self._evaluate(lanes, int(n0), int(length))

    def eval_f(self, x) -> np.ndarray:
        return self.block_values(self.lanes([x]), 0, 1)[0, 0].copy()

    def _check_horizon(self, n: int):
        if abs(n) > self.horizon_bound:
            raise ResourceLimitError(f"|n| = {abs(n)} exceeds the horizon bound {self.horizon_bound}")

    def eval_sum(self, x, n: int) -> np.ndarray:
        """f(n, x) for signed n; f(0, x) = 0 and f(n, x) = -f(-n, T^n x) for n < 0"""
        n = int(n)
        self._check_horizon(n)
        total = np.zeros(self.dim)
        if n == 0:
            return total
        start, stop = (0, n) if n > 0 else (n, 0)
        lanes = self.lanes([x])
        compensation = np.zeros(self.dim)
        for n0 in range(start, stop, STREAM_BLOCK):
            length = min(STREAM_BLOCK, stop - n0)
            block = self.block_values(lanes, n0, length)[0].sum(axis=0)
            y = block - compensation
            t = total + y
            compensation = (t - total) - y
            total = t
        return total if n > 0 else -total

    def stream_sums(self, lanes, N: int, block: int = STREAM_BLOCK) -> Iterator[Tuple[int, np.ndarray]]:
        """
        Yield (n_first, sums) blocks where sums[:, k] = f(n_first + k, x_i), covering n = 1 .. N.
        Sums are cumulative within a block and carried across blocks with Kahan compensation.
        """
        self._check_horizon(N)
        carry = np.zeros((lanes.count, self.dim))
        compensation = np.zeros_like(carry)
        for n0 in range(0, N, block):
            length = min(block, N - n0)
            partial = np.cumsum(self.block_values(lanes, n0, length), axis=1)
            yield n0 + 1, carry[:, None, :] + partial
            y = partial[:, -1] - compensation
            t = carry + y
            compensation = (t - carry) - y
            carry = t

    def eval_sum_stream(self, x, N: int) -> Iterator[Tuple[int, np.ndarray]]:
        """(n, f(n, x)) for n = 1 .. N in one pass over the orbit"""
        for n_first, sums in self.stream_sums(self.lanes([x]), N):
            for k in range(sums.shape[1]):
                yield n_first + k, sums[0, k].copy()

    def skew_step(self, state: SkewState) -> SkewState:
        """(x, g) -> (Tx, f(x) + g)"""
        fiber = np.asarray(state.fiber, dtype=float) + self.eval_f(state.base_point)
        return SkewState(self.dynamics.step(state.base_point), fiber)

    def identity_defect(self, x, m: int, n: int) -> float:
        """|f(m+n, x) - f(m, T^n x) - f(n, x)| in the max norm"""
        lhs = self.eval_sum(x, m + n)
        rhs = self.eval_sum(self.dynamics.advance(x, n), m) + self.eval_sum(x, n)
        return float(np.abs(lhs - rhs).max())


# Cocycle algebra on specs

def subtract_drift(spec: CocycleSpec, c) -> CocycleSpec:
    return spec.with_modifier(SubtractDrift(c=list(np.atleast_1d(np.asarray(c, dtype=float)))))


def perturb_coboundary(spec: CocycleSpec, b) -> CocycleSpec:
    """f' = f + b o T - b"""
    return spec.with_modifier(AddCoboundary(b=b))


def symmetrize(system, spec: CocycleSpec) -> Tuple[ProductSystem, CocycleSpec]:
    """(x, y) -> f(x) - f(y) on S = T x T"""
    return ProductSystem(left=system, right=system), spec.with_modifier(Symmetrize())


def build_cocycle(system, spec: CocycleSpec, horizon_bound: int = DEFAULT_HORIZON_BOUND) -> Cocycle:
    return Cocycle(system, spec, horizon_bound)


def skew_orbit(cocycle: Cocycle, state: SkewState, steps: int) -> List[SkewState]:
    states = [state]
    for _ in range(steps):
        states.append(cocycle.skew_step(states[-1]))
    return states
