"""
System dynamics service
Exact point-level dynamics for rotations, odometers, i.i.d. and Markov shifts and their
products, plus a vectorised lane view that iterates many orbits at once.
"""
import logging
import threading
from bisect import bisect_right
from dataclasses import dataclass, replace
from typing import Any, List, Optional, Sequence, Tuple, Union

import numpy as np
from cachetools import LRUCache, cached
from scipy import stats

from cocycle_lab.schemas.system import (
    IidShiftSystem,
    MarkovShiftSystem,
    OdometerSystem,
    ProductSystem,
)
from cocycle_lab.utils.errors import ConfigurationError, ResourceLimitError, UnsupportedOperationError
from cocycle_lab.utils.seeding import (
    MASK64,
    counter_bits_scalar,
    counter_uniform_scalar,
    counter_uniforms,
    derive_seed,
    to_uint64,
)

logger = logging.getLogger(__name__)

MAX_CARRY = 4096
MARKOV_CHECKPOINT = 1024
LOW_DIGIT_BITS = 62

_U64 = np.uint64


# Points

@dataclass(frozen=True)
class RotationPoint:
    frac: int


@dataclass(frozen=True)
class OdometerPoint:
    """
    Digit sequence over {0, ..., q-1}. Digits past the prefix come from the counter
    stream (optionally digit-swapped) or repeat tail_digit forever. Points are kept
    canonical, so equality is equality of the digit sequences.
    """

    q: int
    stream_seed: Optional[int] = None
    prefix: Tuple[int, ...] = ()
    tail_digit: Optional[int] = None
    swapped: bool = False

    def __post_init__(self):
        if (self.stream_seed is None) == (self.tail_digit is None):
            raise ConfigurationError("an odometer point needs exactly one of stream_seed or tail_digit")
        if any(not 0 <= d < self.q for d in self.prefix):
            raise ConfigurationError(f"odometer digits must lie in [0, {self.q})")

    def generated_digit(self, i: int) -> int:
        if self.tail_digit is not None:
            return self.tail_digit
        d = counter_bits_scalar(self.stream_seed, i) % self.q
        return swap_digit(d) if self.swapped else d

    def digit(self, i: int) -> int:
        if i < len(self.prefix):
            return self.prefix[i]
        return self.generated_digit(i)

    def digits(self, length: int) -> Tuple[int, ...]:
        return tuple(self.digit(i) for i in range(length))

    @property
    def materialized_len(self) -> int:
        return len(self.prefix)


@dataclass(frozen=True)
class ShiftPoint:
    """Two-sided sequence seen from origin_offset; overrides patch absolute times"""

    origin_offset: int
    stream_seed: int
    overrides: Tuple[Tuple[int, Any], ...] = ()

    def override_at(self, absolute_time: int):
        for t, value in self.overrides:
            if t == absolute_time:
                return value
        return None


@dataclass(frozen=True)
class ProductPoint:
    left: Any
    right: Any


SystemPoint = Union[RotationPoint, OdometerPoint, ShiftPoint, ProductPoint]


def swap_digit(d: int) -> int:
    """phi on {0, 1, 2}: interchanges 1 and 2"""
    return (3 - d) % 3


def swap_point(x: OdometerPoint) -> OdometerPoint:
    """Apply phi to every digit of a tri-adic point; phi o phi is the identity"""
    if x.q != 3:
        raise UnsupportedOperationError("digit swapping is only defined for q = 3")
    prefix = tuple(swap_digit(d) for d in x.prefix)
    if x.tail_digit is not None:
        return replace(x, prefix=prefix, tail_digit=swap_digit(x.tail_digit))
    return replace(x, prefix=prefix, swapped=not x.swapped)


def _canonical(x: OdometerPoint, digits: List[int]) -> OdometerPoint:
    k = len(digits)
    while k and digits[k - 1] == x.generated_digit(k - 1):
        k -= 1
    return replace(x, prefix=tuple(digits[:k]))


def _odometer_add(x: OdometerPoint, n: int) -> OdometerPoint:
    """x + n in base q with carry (n > 0) or borrow (n < 0)"""
    if n == 0:
        return x
    q = x.q
    sign = 1 if n > 0 else -1
    magnitude = abs(n)
    addend_len = 0
    while q ** addend_len <= magnitude:
        addend_len += 1

    digits = list(x.prefix)
    carry = 0
    i = 0
    while magnitude or carry:
        if magnitude == 0 and i >= len(digits) and x.tail_digit is not None:
            absorbing = q - 1 if carry > 0 else 0
            if x.tail_digit == absorbing:
                # the carry runs through the whole constant tail
                new_tail = 0 if carry > 0 else q - 1
                return _canonical(replace(x, tail_digit=new_tail), digits)
        if i - addend_len > MAX_CARRY:
            raise ResourceLimitError(f"odometer carry chain exceeded {MAX_CARRY} digits")
        while len(digits) <= i:
            digits.append(x.generated_digit(len(digits)))
        addend = magnitude % q
        magnitude //= q
        total = digits[i] + sign * addend + carry
        carry = total // q
        digits[i] = total % q
        i += 1
    return _canonical(x, digits)


# Marginals

class MarginalSampler:
    """Maps counter uniforms at (stream_seed, time) to marginal values"""

    dim: int = 1
    table: Optional[np.ndarray] = None

    @property
    def symbolic(self) -> bool:
        return self.table is not None

    @property
    def n_symbols(self) -> int:
        if self.table is None:
            raise UnsupportedOperationError("continuous marginals have no symbols")
        return len(self.table)

    def symbols_from_uniforms(self, u: np.ndarray) -> np.ndarray:
        raise UnsupportedOperationError("continuous marginals have no symbols")

    def values_from_seed(self, stream_seed, times) -> np.ndarray:
        raise NotImplementedError

    def symbols(self, stream_seed, times) -> np.ndarray:
        return self.symbols_from_uniforms(counter_uniforms(stream_seed, times))

    def values(self, stream_seed, times) -> np.ndarray:
        """Array of shape times.shape + (dim,)"""
        if self.symbolic:
            return self.table[self.symbols(stream_seed, times)]
        return self.values_from_seed(stream_seed, times)

    def value_of(self, item) -> np.ndarray:
        """Value of an override entry: a symbol for symbolic marginals, else a vector"""
        if self.symbolic:
            return self.table[int(item)]
        return np.asarray(item, dtype=float).reshape(self.dim)


class UniformPm1Sampler(MarginalSampler):
    def __init__(self):
        self.table = np.array([[-1.0], [1.0]])

    def symbols_from_uniforms(self, u):
        return (np.asarray(u) >= 0.5).astype(np.int64)


class LatticeUniformSampler(MarginalSampler):
    """Symbol 2k is +e_k, symbol 2k+1 is -e_k"""

    def __init__(self, d: int):
        self.dim = d
        table = np.zeros((2 * d, d))
        for s in range(2 * d):
            table[s, s // 2] = 1.0 if s % 2 == 0 else -1.0
        self.table = table

    def symbols_from_uniforms(self, u):
        s = np.floor(np.asarray(u) * (2 * self.dim)).astype(np.int64)
        return np.minimum(s, 2 * self.dim - 1)


class DiscreteSampler(MarginalSampler):
    def __init__(self, support: np.ndarray, weights: Sequence[float]):
        self.table = support
        self.dim = support.shape[1]
        self.cumulative = np.cumsum(np.asarray(weights, dtype=float))

    def symbols_from_uniforms(self, u):
        s = np.searchsorted(self.cumulative, np.asarray(u), side="right")
        return np.minimum(s, len(self.table) - 1).astype(np.int64)


class CauchySampler(MarginalSampler):
    def __init__(self, scale: float):
        self.scale = scale

    def values_from_seed(self, stream_seed, times):
        u = counter_uniforms(stream_seed, times)
        return np.asarray(stats.cauchy.ppf(u, scale=self.scale))[..., None]


class GaussianSampler(MarginalSampler):
    """d independent uniform lanes through the normal inverse CDF, then the Cholesky factor"""

    def __init__(self, mean: Sequence[float], covariance: Sequence[Sequence[float]]):
        self.mean = np.asarray(mean, dtype=float)
        self.dim = len(self.mean)
        self.factor = np.linalg.cholesky(np.asarray(covariance, dtype=float))

    def values_from_seed(self, stream_seed, times):
        z = np.stack(
            [stats.norm.ppf(counter_uniforms(stream_seed, times, lane=j)) for j in range(self.dim)],
            axis=-1,
        )
        return self.mean + z @ self.factor.T


def build_sampler(marginal) -> MarginalSampler:
    if marginal.kind == "uniform_pm1":
        return UniformPm1Sampler()
    if marginal.kind == "lattice_uniform":
        return LatticeUniformSampler(marginal.d)
    if marginal.kind == "discrete":
        return DiscreteSampler(marginal.support_array(), marginal.weights)
    if marginal.kind == "cauchy":
        return CauchySampler(marginal.scale)
    if marginal.kind == "gaussian":
        return GaussianSampler(marginal.mean, marginal.covariance)
    raise ConfigurationError(f"unknown marginal kind {marginal.kind!r}")


# Markov chains

class MarkovChain:
    """
    Stationary two-sided chain keyed by a stream seed. X_0 ~ pi uses uniform (seed, 0),
    X_t for t >= 1 steps forward with uniform (seed, t), and X_t for t < 0 steps back
    from X_{t+1} through the time-reversed kernel with uniform (seed, t).
    """

    def __init__(self, spec: MarkovShiftSystem):
        P = np.asarray(spec.transition, dtype=float)
        pi = np.asarray(spec.stationary, dtype=float)
        k = len(pi)
        reversed_kernel = np.array(P, copy=True)
        for i in range(k):
            if pi[i] > 0:
                reversed_kernel[i] = pi * P[:, i] / pi[i]
        self.n_states = k
        self.forward_cumulative = np.cumsum(P, axis=1)
        self.reverse_cumulative = np.cumsum(reversed_kernel, axis=1)
        self.stationary_cumulative = np.cumsum(pi)
        self._forward_rows = [row.tolist() for row in self.forward_cumulative]
        self._reverse_rows = [row.tolist() for row in self.reverse_cumulative]
        self._stationary_row = self.stationary_cumulative.tolist()
        values = spec.state_values if spec.state_values is not None else list(range(k))
        self.table = np.asarray(values, dtype=float).reshape(k, 1)
        self._checkpoints = LRUCache(maxsize=4096)
        self._lock = threading.Lock()

    def value_of(self, item) -> np.ndarray:
        return self.table[int(item)]

    def _draw(self, row: List[float], u: float) -> int:
        return min(bisect_right(row, u), self.n_states - 1)

    def _walk(self, seed: int, state: int, start: int, stop: int) -> int:
        """State at time stop given the state at time start"""
        if stop >= start:
            for t in range(start + 1, stop + 1):
                state = self._draw(self._forward_rows[state], counter_uniform_scalar(seed, t))
        else:
            for t in range(start - 1, stop - 1, -1):
                state = self._draw(self._reverse_rows[state], counter_uniform_scalar(seed, t))
        return state

    def _checkpoint(self, seed: int, c: int) -> int:
        with self._lock:
            hit = self._checkpoints.get((seed, c))
        if hit is not None:
            return hit
        direction = 1 if c > 0 else -1
        j = c
        state = None
        while j != 0:
            j -= direction
            with self._lock:
                state = self._checkpoints.get((seed, j))
            if state is not None:
                break
        if state is None:
            j = 0
            state = self._draw(self._stationary_row, counter_uniform_scalar(seed, 0))
            with self._lock:
                self._checkpoints[(seed, 0)] = state
        while j != c:
            state = self._walk(seed, state, j * MARKOV_CHECKPOINT, (j + direction) * MARKOV_CHECKPOINT)
            j += direction
            with self._lock:
                self._checkpoints[(seed, j)] = state
        return state

    def state_at(self, seed: int, t: int) -> int:
        c = t // MARKOV_CHECKPOINT if t >= 0 else -((-t) // MARKOV_CHECKPOINT)
        return self._walk(seed, self._checkpoint(seed, c), c * MARKOV_CHECKPOINT, t)

    def states(self, seed: int, t0: int, count: int) -> np.ndarray:
        """States at times t0 .. t0+count-1 on the scalar path"""
        out = np.empty(count, dtype=np.int64)
        t_end = t0 + count - 1
        if t0 >= 0:
            state = self.state_at(seed, t0)
            out[0] = state
            for j in range(1, count):
                state = self._walk(seed, state, t0 + j - 1, t0 + j)
                out[j] = state
            return out
        top = min(t_end, 0)
        state = self.state_at(seed, top)
        out[top - t0] = state
        for t in range(top - 1, t0 - 1, -1):
            state = self._walk(seed, state, t + 1, t)
            out[t - t0] = state
        if t_end > 0:
            state = out[-t0]
            for t in range(1, t_end + 1):
                state = self._walk(seed, state, t - 1, t)
                out[t - t0] = state
        return out

    def forward_block(self, seeds: np.ndarray, prev: np.ndarray, abs_start: np.ndarray, length: int) -> np.ndarray:
        """Vectorised forward states for lanes whose window starts at time >= 0"""
        times = abs_start[:, None] + np.arange(length, dtype=np.int64)[None, :]
        uniforms = counter_uniforms(seeds[:, None], times)
        out = np.empty((len(seeds), length), dtype=np.int64)
        state = prev.copy()
        last = self.n_states - 1
        for j in range(length):
            u = uniforms[:, j]
            at_origin = times[:, j] == 0
            safe = np.where(state < 0, 0, state)
            nxt = (self.forward_cumulative[safe] <= u[:, None]).sum(axis=1)
            if at_origin.any():
                nxt[at_origin] = np.searchsorted(self.stationary_cumulative, u[at_origin], side="right")
            state = np.minimum(nxt, last)
            out[:, j] = state
        return out


# Windows and lanes: many orbits, many times at once

@dataclass
class RotationWindow:
    fracs: np.ndarray


@dataclass
class OdometerWindow:
    """Low `width` digits of T^n x as base-q integers, for n = n0 .. n0+B-1"""

    values: np.ndarray
    q: int
    width: int
    n0: int
    lanes: "OdometerLanes"

    @property
    def modulus(self) -> int:
        return self.q ** self.width

    def digit(self, position: int) -> np.ndarray:
        if position >= self.width:
            raise UnsupportedOperationError(f"digit {position} is beyond the batch width {self.width}")
        return (self.values // (self.q ** position)) % self.q

    def saturated(self) -> np.ndarray:
        """Cells whose low digits are all q-1, where the carry index is out of reach"""
        return self.values == self.modulus - 1

    def point(self, lane: int, column: int) -> OdometerPoint:
        return self.lanes.dynamics.advance(self.lanes.points[lane], self.n0 + column)


@dataclass
class ShiftWindow:
    values: np.ndarray
    symbols: Optional[np.ndarray] = None


@dataclass
class ProductWindow:
    left: Any
    right: Any


class RotationLanes:
    def __init__(self, alpha: int, points: Sequence[RotationPoint]):
        self.alpha = _U64(alpha)
        self.fracs = np.array([p.frac for p in points], dtype=_U64)
        self.count = len(points)

    def window(self, n0: int, length: int) -> RotationWindow:
        times = to_uint64(np.arange(n0, n0 + length, dtype=np.int64))
        with np.errstate(over="ignore"):
            fracs = self.fracs[:, None] + times[None, :] * self.alpha
        return RotationWindow(fracs)


class OdometerLanes:
    def __init__(self, dynamics: "OdometerDynamics", points: Sequence[OdometerPoint]):
        self.dynamics = dynamics
        self.points = list(points)
        self.count = len(points)
        q = dynamics.q
        self.width = dynamics.width
        self.low_values = np.array(
            [sum(d * q ** k for k, d in enumerate(p.digits(self.width))) for p in points],
            dtype=np.int64,
        )

    def window(self, n0: int, length: int) -> OdometerWindow:
        modulus = self.dynamics.q ** self.width
        times = np.arange(n0, n0 + length, dtype=np.int64)
        values = np.mod(self.low_values[:, None] + times[None, :], modulus)
        return OdometerWindow(values, self.dynamics.q, self.width, n0, self)


class _ShiftLanesBase:
    def __init__(self, points: Sequence[ShiftPoint]):
        self.points = list(points)
        self.count = len(points)
        self.seeds = np.array([p.stream_seed for p in points], dtype=_U64)
        self.offsets = np.array([p.origin_offset for p in points], dtype=np.int64)
        self._patched = [i for i, p in enumerate(points) if p.overrides]

    def _times(self, n0: int, length: int) -> np.ndarray:
        return self.offsets[:, None] + np.arange(n0, n0 + length, dtype=np.int64)[None, :]

    def _apply_overrides(self, window: ShiftWindow, n0: int, length: int, sampler) -> ShiftWindow:
        for i in self._patched:
            point = self.points[i]
            for t, item in point.overrides:
                column = t - point.origin_offset - n0
                if 0 <= column < length:
                    if window.symbols is not None:
                        window.symbols[i, column] = int(item)
                    window.values[i, column] = sampler.value_of(item)
        return window


class IidShiftLanes(_ShiftLanesBase):
    def __init__(self, sampler: MarginalSampler, points: Sequence[ShiftPoint]):
        super().__init__(points)
        self.sampler = sampler

    def window(self, n0: int, length: int) -> ShiftWindow:
        times = self._times(n0, length)
        seeds = self.seeds[:, None]
        if self.sampler.symbolic:
            symbols = self.sampler.symbols(seeds, times)
            window = ShiftWindow(self.sampler.table[symbols], symbols)
        else:
            window = ShiftWindow(self.sampler.values(seeds, times))
        return self._apply_overrides(window, n0, length, self.sampler)


class MarkovShiftLanes(_ShiftLanesBase):
    """Keeps the last window so consecutive blocks continue the chains without rewinding"""

    def __init__(self, chain: MarkovChain, points: Sequence[ShiftPoint]):
        super().__init__(points)
        self.chain = chain
        self._memo_n0: Optional[int] = None
        self._memo_states: Optional[np.ndarray] = None

    def _states(self, n0: int, length: int) -> np.ndarray:
        memo = self._memo_states
        if memo is not None and self._memo_n0 <= n0 and n0 + length <= self._memo_n0 + memo.shape[1]:
            start = n0 - self._memo_n0
            return memo[:, start:start + length]
        abs_start = self.offsets + n0
        if (abs_start >= 0).all():
            prev = np.full(self.count, -1, dtype=np.int64)
            if memo is not None and self._memo_n0 <= n0 - 1 < self._memo_n0 + memo.shape[1]:
                prev = memo[:, n0 - 1 - self._memo_n0].copy()
            else:
                for i in np.flatnonzero(abs_start >= 1):
                    prev[i] = self.chain.state_at(int(self.seeds[i]), int(abs_start[i]) - 1)
            states = self.chain.forward_block(self.seeds, prev, abs_start, length)
        else:
            states = np.stack(
                [self.chain.states(int(self.seeds[i]), int(abs_start[i]), length) for i in range(self.count)]
            )
        self._memo_n0, self._memo_states = n0, states
        return states

    def window(self, n0: int, length: int) -> ShiftWindow:
        symbols = self._states(n0, length).copy()
        window = ShiftWindow(self.chain.table[symbols], symbols)
        return self._apply_overrides(window, n0, length, self.chain)


class ProductLanes:
    def __init__(self, left, right):
        self.left = left
        self.right = right
        self.count = left.count

    def window(self, n0: int, length: int) -> ProductWindow:
        return ProductWindow(self.left.window(n0, length), self.right.window(n0, length))


# Dynamics

class Dynamics:
    """Exact dynamics of one system spec"""

    point_type: type = object

    def __init__(self, spec):
        self.spec = spec

    @property
    def kind(self) -> str:
        return self.spec.kind

    def check_point(self, x):
        if not isinstance(x, self.point_type):
            raise ConfigurationError(f"{type(x).__name__} is not a point of a {self.kind} system")
        return x

    def sample_point(self, seed: int):
        raise NotImplementedError

    def advance(self, x, n: int):
        raise NotImplementedError

    def step(self, x):
        return self.advance(x, 1)

    def step_inverse(self, x):
        return self.advance(x, -1)

    def read_coordinate(self, x, t: int):
        raise UnsupportedOperationError(f"read_coordinate is only defined on shift systems, not {self.kind}")

    def read_symbol(self, x, t: int) -> int:
        raise UnsupportedOperationError(f"read_symbol is only defined on symbolic shift systems, not {self.kind}")

    def lanes(self, points: Sequence):
        raise NotImplementedError


class RotationDynamics(Dynamics):
    point_type = RotationPoint

    def sample_point(self, seed: int) -> RotationPoint:
        return RotationPoint(derive_seed(seed, "rotation"))

    def advance(self, x, n: int) -> RotationPoint:
        self.check_point(x)
        return RotationPoint((x.frac + n * self.spec.alpha) & MASK64)

    def lanes(self, points):
        return RotationLanes(self.spec.alpha, [self.check_point(p) for p in points])


class OdometerDynamics(Dynamics):
    point_type = OdometerPoint

    def __init__(self, spec: OdometerSystem):
        super().__init__(spec)
        self.q = spec.q
        width = 0
        while self.q ** (width + 1) <= (1 << LOW_DIGIT_BITS):
            width += 1
        self.width = width

    def check_point(self, x):
        super().check_point(x)
        if x.q != self.q:
            raise ConfigurationError(f"odometer point has q={x.q}, system has q={self.q}")
        return x

    def sample_point(self, seed: int) -> OdometerPoint:
        return OdometerPoint(self.q, stream_seed=derive_seed(seed, "odometer"))

    def advance(self, x, n: int) -> OdometerPoint:
        return _odometer_add(self.check_point(x), n)

    def lanes(self, points):
        return OdometerLanes(self, [self.check_point(p) for p in points])


class IidShiftDynamics(Dynamics):
    point_type = ShiftPoint

    def __init__(self, spec: IidShiftSystem):
        super().__init__(spec)
        self.sampler = build_sampler(spec.marginal)

    @property
    def dim(self) -> int:
        return self.sampler.dim

    def sample_point(self, seed: int) -> ShiftPoint:
        return ShiftPoint(0, derive_seed(seed, "shift"))

    def advance(self, x, n: int) -> ShiftPoint:
        self.check_point(x)
        return replace(x, origin_offset=x.origin_offset + n)

    def _vector(self, x: ShiftPoint, t: int) -> np.ndarray:
        absolute = x.origin_offset + t
        item = x.override_at(absolute)
        if item is not None:
            return self.sampler.value_of(item)
        return self.sampler.values(_U64(x.stream_seed), np.int64(absolute))

    def read_coordinate(self, x, t: int):
        value = self._vector(self.check_point(x), t)
        return float(value[0]) if self.dim == 1 else np.array(value)

    def read_symbol(self, x, t: int) -> int:
        self.check_point(x)
        absolute = x.origin_offset + t
        item = x.override_at(absolute)
        if item is not None:
            return int(item)
        return int(self.sampler.symbols(_U64(x.stream_seed), np.int64(absolute)))

    def lanes(self, points):
        return IidShiftLanes(self.sampler, [self.check_point(p) for p in points])


class MarkovShiftDynamics(Dynamics):
    point_type = ShiftPoint
    dim = 1

    def __init__(self, spec: MarkovShiftSystem):
        super().__init__(spec)
        self.chain = MarkovChain(spec)

    def sample_point(self, seed: int) -> ShiftPoint:
        return ShiftPoint(0, derive_seed(seed, "shift"))

    def advance(self, x, n: int) -> ShiftPoint:
        self.check_point(x)
        return replace(x, origin_offset=x.origin_offset + n)

    def read_symbol(self, x, t: int) -> int:
        self.check_point(x)
        absolute = x.origin_offset + t
        item = x.override_at(absolute)
        if item is not None:
            return int(item)
        return self.chain.state_at(x.stream_seed, absolute)

    def read_coordinate(self, x, t: int) -> float:
        return float(self.chain.table[self.read_symbol(x, t), 0])

    def lanes(self, points):
        return MarkovShiftLanes(self.chain, [self.check_point(p) for p in points])


class ProductDynamics(Dynamics):
    point_type = ProductPoint

    def __init__(self, spec: ProductSystem):
        super().__init__(spec)
        self.left = get_dynamics(spec.left)
        self.right = get_dynamics(spec.right)

    def sample_point(self, seed: int) -> ProductPoint:
        return ProductPoint(
            self.left.sample_point(derive_seed(seed, "left")),
            self.right.sample_point(derive_seed(seed, "right")),
        )

    def advance(self, x, n: int) -> ProductPoint:
        self.check_point(x)
        return ProductPoint(self.left.advance(x.left, n), self.right.advance(x.right, n))

    def lanes(self, points):
        points = [self.check_point(p) for p in points]
        return ProductLanes(
            self.left.lanes([p.left for p in points]),
            self.right.lanes([p.right for p in points]),
        )


_DYNAMICS = {
    "rotation": RotationDynamics,
    "odometer": OdometerDynamics,
    "iid_shift": IidShiftDynamics,
    "markov_shift": MarkovShiftDynamics,
    "product": ProductDynamics,
}


@cached(cache=LRUCache(maxsize=64), key=lambda spec: spec.model_dump_json(), lock=threading.Lock())
def get_dynamics(spec) -> Dynamics:
    """Compiled dynamics for a spec, shared across calls"""
    logger.debug(f"🔧 Compiling dynamics for {spec.kind} system")
    return _DYNAMICS[spec.kind](spec)


# Operations

def sample_point(spec, rng_seed: int):
    """A mu-distributed point; independent seeds give independent points"""
    return get_dynamics(spec).sample_point(rng_seed)


def sample_points(spec, seed: int, indices: Sequence[int]) -> list:
    dynamics = get_dynamics(spec)
    return [dynamics.sample_point(derive_seed(seed, "sample", int(i))) for i in indices]


def step(spec, x):
    return get_dynamics(spec).step(x)


def step_inverse(spec, x):
    return get_dynamics(spec).step_inverse(x)


def advance(spec, x, n: int):
    """T^n x for any signed n"""
    return get_dynamics(spec).advance(x, int(n))


def read_coordinate(spec, x, t: int):
    return get_dynamics(spec).read_coordinate(x, int(t))


def read_symbol(spec, x, t: int) -> int:
    return get_dynamics(spec).read_symbol(x, int(t))


def lanes_from_points(spec, points: Sequence):
    return get_dynamics(spec).lanes(points)


def with_override(x: ShiftPoint, t: int, item) -> ShiftPoint:
    """Patch the coordinate at relative time t; later coordinates are not regenerated"""
    absolute = x.origin_offset + t
    kept = tuple((s, v) for s, v in x.overrides if s != absolute)
    return replace(x, overrides=tuple(sorted(kept + ((absolute, item),), key=lambda e: e[0])))

