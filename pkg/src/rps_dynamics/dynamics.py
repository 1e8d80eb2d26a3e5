"""Primal-dual learning dynamics over a cyclic game.

Both learners share a single dual update on accumulated payoffs,

    y^0 = 0,    y^{t+1} = y^t + eta * A x^t,

and differ only in the primal response to the dual vector:

* fictitious play (FP, eta = 1) plays a best-response vertex, breaking argmax
  ties with a pluggable rule;
* online gradient descent (OGD, lazy / dual-averaging form) plays the Euclidean
  projection of y onto the simplex, which is a uniform shift on an active
  support set.

Each dynamic carries a natural energy in dual space: max_i y_i for FP, and for
OGD the optimal value of max_{x in simplex} <x, y> - |x|^2 / 2.  Trajectories
record primals, duals, energies, and supports so the analysis module can audit
energy growth, regions, and regret.

Arithmetic is generic over float64 and exact rationals.  In exact mode every
quantity is an int or ``fractions.Fraction``, comparisons are exact, and a bit
budget guards against denominator blowup.
"""

import math
import random
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    ArithmeticOverflow,
    ConfigInvalid,
    DimensionMismatch,
)
from .game import Number, RpsMatrix, SimplexPoint, all_exact


class Algorithm(str, Enum):
    FICTITIOUS_PLAY = "fp"
    GRADIENT_DESCENT = "gd"


class Arithmetic(str, Enum):
    FLOAT64 = "float"
    EXACT_RATIONAL = "rational"


class TiebreakKind(str, Enum):
    LEXICOGRAPHIC = "lexicographic"
    TOURNAMENT = "tournament"
    RANDOM_SEEDED = "random_seeded"
    PREFER_INCUMBENT = "prefer_incumbent"
    PREFER_SWITCH = "prefer_switch"


@dataclass(frozen=True)
class TiebreakRule:
    """Selects a best-response vertex among argmax-tied coordinates.

    ``seed`` is required for (and only for) the seeded random rule; selection
    there depends only on (seed, step index), so replays are deterministic
    across platforms and processes.
    """

    kind: TiebreakKind = TiebreakKind.LEXICOGRAPHIC
    seed: Optional[int] = None

    def __post_init__(self):
        if self.kind == TiebreakKind.RANDOM_SEEDED:
            if self.seed is None:
                raise ConfigInvalid("random_seeded tiebreak needs a seed")
        elif self.seed is not None:
            raise ConfigInvalid(f"seed is only meaningful for random_seeded, not {self.kind.value}")

    def select(
        self,
        tied: Sequence[int],
        incumbent: Optional[int],
        n: int,
        step: int = 0,
    ) -> int:
        """Pick one index from the (ascending) tied set."""
        if not tied:
            raise ValueError("empty tie set")
        if len(tied) == 1:
            return tied[0]
        kind = self.kind
        if kind == TiebreakKind.LEXICOGRAPHIC:
            return tied[0]
        if kind == TiebreakKind.RANDOM_SEEDED:
            rng = random.Random(f"{self.seed}:{step}")
            return rng.choice(list(tied))
        if kind == TiebreakKind.PREFER_INCUMBENT:
            if incumbent is not None and incumbent in tied:
                return incumbent
            return tied[0]
        if kind == TiebreakKind.PREFER_SWITCH:
            others = [i for i in tied if i != incumbent]
            return others[0] if others else tied[0]
        if kind == TiebreakKind.TOURNAMENT:
            return self._tournament(tied, incumbent, n)
        raise ValueError(f"unknown tiebreak kind {kind!r}")

    @staticmethod
    def _tournament(tied: Sequence[int], incumbent: Optional[int], n: int) -> int:
        # A tie between cyclically adjacent actions goes to the one that beats
        # the other (the cyclic successor); this is what conserves the FP
        # energy once the best-response cycle is underway.
        if len(tied) == 2:
            a, b = tied
            if (b - a) % n == 1:
                return b
            if (a - b) % n == 1:
                return a
        if incumbent is not None:
            members = set(tied)
            for d in range(1, n + 1):
                c = (incumbent + d) % n
                if c in members:
                    return c
        return tied[0]


@dataclass(frozen=True)
class SupportSet:
    """An active coordinate set, kept sorted ascending."""

    indices: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(sorted(self.indices)))

    @property
    def size(self) -> int:
        return len(self.indices)

    @property
    def mask(self) -> int:
        """Bitmask with bit i set for each member index i (zero-based)."""
        m = 0
        for i in self.indices:
            m |= 1 << i
        return m

    @classmethod
    def from_mask(cls, mask: int) -> "SupportSet":
        return cls(tuple(i for i in range(mask.bit_length()) if mask >> i & 1))

    def __contains__(self, i: int) -> bool:
        return i in self.indices

    def __iter__(self):
        return iter(self.indices)

    def __len__(self) -> int:
        return len(self.indices)


def dual_step(
    y: Sequence[Number], x: Sequence[Number], matrix: RpsMatrix, eta: Number
) -> Tuple[Number, ...]:
    """One accumulated-payoff update y + eta * A x."""
    if len(y) != matrix.n:
        raise DimensionMismatch(f"dual vector has length {len(y)}, expected {matrix.n}")
    v = matrix.apply(x)
    return tuple(yi + eta * vi for yi, vi in zip(y, v))


def find_support(y: Sequence[Number]) -> SupportSet:
    """Active set of the Euclidean projection of y onto the simplex.

    Starts from all coordinates and repeatedly drops the current argmin (lowest
    index on ties) while its projected value y_i - mean_S(y) + 1/|S| would be
    negative.  Every surviving coordinate then projects to a nonnegative value.
    """
    n = len(y)
    order = sorted(range(n), key=lambda i: (y[i], i))
    exact = all_exact(y)
    total = sum(y)
    m = n
    k = 0
    while True:
        i = order[k]
        if exact:
            drop = m * y[i] - total + 1 < 0
        else:
            drop = y[i] - total / m + 1.0 / m < 0
        if not drop:
            break
        total -= y[i]
        m -= 1
        k += 1
    return SupportSet(tuple(sorted(order[k:])))


def _projection_coords(y: Sequence[Number], indices: Tuple[int, ...]) -> List[Number]:
    """Coordinates of the simplex projection of y on a given active set.

    The float path forms each coordinate from pairwise differences of dual
    values (which are computed exactly when the values are close) rather than
    subtracting a large mean from a large value; round-off negatives up to
    1e-12 are clamped to zero.
    """
    n = len(y)
    m = len(indices)
    out: List[Number] = [0] * n
    if all_exact(y):
        mu = Fraction(sum(y[j] for j in indices)) / m
        shift = Fraction(1, m)
        for i in indices:
            out[i] = y[i] - mu + shift
        return out
    inv_m = 1.0 / m
    for i in indices:
        s = 0.0
        yi = y[i]
        for j in indices:
            s += yi - y[j]
        c = s * inv_m + inv_m
        if c < 0.0:
            if c < -1e-12:
                raise AssertionError(f"projection coordinate {c!r} below -1e-12")
            c = 0.0
        out[i] = c
    return out


def gd_primal(y: Sequence[Number]) -> SimplexPoint:
    """Euclidean projection of a dual vector onto the simplex."""
    support = find_support(y)
    return SimplexPoint(tuple(_projection_coords(y, support.indices)))


def fp_primal(
    y: Sequence[Number],
    rule: Optional[TiebreakRule] = None,
    incumbent: Optional[int] = None,
    tol: Optional[Number] = None,
    step: int = 0,
) -> int:
    """Index of the best-response vertex for a dual vector.

    ``tol`` widens the argmax tie set to all coordinates within tol of the
    maximum (defaults: 0 for exact inputs, 1e-9 for floats).  ``step`` feeds
    the seeded random rule.
    """
    if rule is None:
        rule = TiebreakRule(TiebreakKind.LEXICOGRAPHIC)
    top = max(y)
    if tol is None:
        tol = 0 if all_exact(y) else 1e-9
    tied = [i for i, v in enumerate(y) if v >= top - tol]
    return rule.select(tied, incumbent=incumbent, n=len(y), step=step)


def energy_fp(y: Sequence[Number]) -> Number:
    """Best-response energy: the largest accumulated payoff."""
    return max(y)


def energy_gd(y: Sequence[Number], support: Optional[SupportSet] = None) -> Number:
    """Projection energy: value of max_{x in simplex} <x, y> - |x|^2 / 2.

    On the active set S with m = |S| and mu = mean_S(y) this equals

        sum_{j in S} (y_j - mu)^2 / 2  +  mu  -  1 / (2m),

    computed in deviation form so that large dual vectors with small spread do
    not lose the spread to cancellation.
    """
    if support is None:
        support = find_support(y)
    idx = support.indices
    m = len(idx)
    if all_exact(y):
        mu = Fraction(sum(y[j] for j in idx)) / m
        dev = sum((y[j] - mu) ** 2 for j in idx)
        return dev / 2 + mu - Fraction(1, 2 * m)
    mu = sum(y[j] for j in idx) / m
    dev = sum((y[j] - mu) ** 2 for j in idx)
    return 0.5 * dev + mu - 0.5 / m


@dataclass(frozen=True)
class LearnerConfig:
    """Everything needed to reproduce one run.

    FP always uses eta = 1 (its dual update is the raw payoff sum).  The
    optional ``eta_schedule="inv_sqrt_t"`` replaces the constant stepsize for
    OGD in float mode: the update producing y^s uses 1/sqrt(s).
    """

    algorithm: Algorithm
    horizon: int
    x0: SimplexPoint
    eta: Number = 1
    tiebreak: Optional[TiebreakRule] = None
    arithmetic: Arithmetic = Arithmetic.FLOAT64
    tie_tolerance: Optional[Number] = None
    bit_budget: int = 4096
    eta_schedule: Optional[str] = None

    def __post_init__(self):
        if not isinstance(self.horizon, int) or self.horizon < 0:
            raise ConfigInvalid(f"horizon must be a nonnegative int, got {self.horizon!r}")
        if not self.eta > 0:
            raise ConfigInvalid(f"eta must be positive, got {self.eta!r}")
        if self.eta_schedule not in (None, "inv_sqrt_t"):
            raise ConfigInvalid(f"unknown eta_schedule {self.eta_schedule!r}")
        if self.algorithm == Algorithm.FICTITIOUS_PLAY:
            if self.eta != 1:
                raise ConfigInvalid("fictitious play runs with eta = 1")
            if self.eta_schedule is not None:
                raise ConfigInvalid("eta_schedule applies to gradient descent only")
        else:
            if self.tiebreak is not None:
                raise ConfigInvalid("tiebreak rules apply to fictitious play only")
            if self.tie_tolerance is not None:
                raise ConfigInvalid("tie_tolerance applies to fictitious play only")
        if self.tie_tolerance is not None and not self.tie_tolerance >= 0:
            raise ConfigInvalid(f"tie_tolerance must be nonnegative, got {self.tie_tolerance!r}")
        if not isinstance(self.bit_budget, int) or self.bit_budget < 16:
            raise ConfigInvalid(f"bit_budget must be an int >= 16, got {self.bit_budget!r}")
        if self.arithmetic == Arithmetic.EXACT_RATIONAL:
            if isinstance(self.eta, float):
                raise ConfigInvalid("rational mode needs an exact eta (int or Fraction)")
            if not all_exact(self.x0.coords):
                raise ConfigInvalid("rational mode needs an exact starting point")
            if self.tie_tolerance not in (None, 0):
                raise ConfigInvalid("rational mode breaks ties exactly; tie_tolerance must be unset")
            if self.eta_schedule is not None:
                raise ConfigInvalid("eta_schedule is float-only (1/sqrt(t) is irrational)")

    @property
    def is_exact(self) -> bool:
        return self.arithmetic == Arithmetic.EXACT_RATIONAL

    @property
    def effective_tiebreak(self) -> TiebreakRule:
        return self.tiebreak if self.tiebreak is not None else TiebreakRule()

    @property
    def effective_tie_tolerance(self) -> Number:
        if self.tie_tolerance is not None:
            return self.tie_tolerance
        return 0 if self.is_exact else 1e-9

    def eta_at(self, step: int) -> Number:
        """Stepsize of the update that produces y^{step+1}."""
        if self.eta_schedule == "inv_sqrt_t":
            return 1.0 / math.sqrt(step + 1)
        return self.eta


def _check_bits(values: Sequence[Number], budget: int, step: int) -> None:
    for v in values:
        if isinstance(v, Fraction):
            if (
                v.numerator.bit_length() > budget
                or v.denominator.bit_length() > budget
            ):
                raise ArithmeticOverflow(
                    f"rational state exceeded {budget} bits at step {step}"
                )
        elif isinstance(v, int) and v.bit_length() > budget:
            raise ArithmeticOverflow(
                f"rational state exceeded {budget} bits at step {step}"
            )


class Trajectory:
    """A recorded run: primals x^0..x^T, duals y^0..y^{T+1}, energies, supports.

    Float runs live in numpy arrays; exact runs in lists of tuples.  Supports
    are stored as bitmasks (bit i = coordinate i): supp(x^0) at t = 0, the
    chosen vertex (FP) or the projection's active set (OGD) for t >= 1.
    """

    __slots__ = ("config", "matrix", "is_exact", "_xs", "_ys", "_energies", "_supports")

    def __init__(self, config, matrix, xs, ys, energies, supports, is_exact):
        self.config = config
        self.matrix = matrix
        self.is_exact = is_exact
        self._xs = xs
        self._ys = ys
        self._energies = energies
        self._supports = supports

    @property
    def horizon(self) -> int:
        return self.config.horizon

    @property
    def n(self) -> int:
        return self.matrix.n

    def x(self, t: int) -> Tuple[Number, ...]:
        if self.is_exact:
            return self._xs[t]
        return tuple(float(v) for v in self._xs[t])

    def y(self, t: int) -> Tuple[Number, ...]:
        if self.is_exact:
            return self._ys[t]
        return tuple(float(v) for v in self._ys[t])

    def energy(self, t: int) -> Number:
        if self.is_exact:
            return self._energies[t]
        return float(self._energies[t])

    def support_mask(self, t: int) -> int:
        return int(self._supports[t])

    def support(self, t: int) -> Tuple[int, ...]:
        return SupportSet.from_mask(self.support_mask(t)).indices

    @property
    def xs_array(self) -> np.ndarray:
        """(T+1, n) float array of primal iterates."""
        if self.is_exact:
            return np.array([[float(c) for c in row] for row in self._xs])
        return self._xs

    @property
    def ys_array(self) -> np.ndarray:
        """(T+2, n) float array of dual iterates."""
        if self.is_exact:
            return np.array([[float(c) for c in row] for row in self._ys])
        return self._ys

    @property
    def energies_array(self) -> np.ndarray:
        if self.is_exact:
            return np.array([float(e) for e in self._energies])
        return self._energies


def run(config: LearnerConfig, matrix: RpsMatrix) -> Trajectory:
    """Simulate the configured learner for horizon T and record everything.

    The loop performs T+1 dual updates (producing y^1 .. y^{T+1}) and T primal
    responses (x^1 .. x^T) after the given x^0.
    """
    n = matrix.n
    if config.x0.n != n:
        raise DimensionMismatch(
            f"x0 has dimension {config.x0.n}, game has {n}"
        )
    exact = config.is_exact
    if exact and not matrix.exact:
        raise ConfigInvalid("rational mode needs exact game weights (int or Fraction)")

    T = config.horizon
    is_fp = config.algorithm == Algorithm.FICTITIOUS_PLAY
    rule = config.effective_tiebreak
    tol = config.effective_tie_tolerance

    if exact:
        mat = matrix
        x: List[Number] = list(config.x0.coords)
        y: List[Number] = [0] * n
        xs: List[Tuple[Number, ...]] = []
        ys: List[Tuple[Number, ...]] = []
        energies: List[Number] = []
        supports: List[int] = []
    else:
        mat = RpsMatrix(tuple(float(w) for w in matrix.weights))
        x = [float(c) for c in config.x0.coords]
        y = [0.0] * n
        xs = np.empty((T + 1, n))
        ys = np.empty((T + 2, n))
        energies = np.empty(T + 2)
        supports = np.zeros(T + 1, dtype=np.uint64)

    def record_x(t, vec, mask):
        if exact:
            xs.append(tuple(vec))
            supports.append(mask)
        else:
            xs[t] = vec
            supports[t] = mask

    def record_y(t, vec, en):
        if exact:
            ys.append(tuple(vec))
            energies.append(en)
        else:
            ys[t] = vec
            energies[t] = en

    supp_mask = 0
    for i, c in enumerate(x):
        if c > 0:
            supp_mask |= 1 << i
    incumbent = config.x0.vertex_index

    record_y(0, y, energy_fp(y) if is_fp else energy_gd(y))
    for t in range(T + 1):
        record_x(t, x, supp_mask)
        eta_t = config.eta_at(t)
        v = mat.apply(x)
        y = [yi + eta_t * vi for yi, vi in zip(y, v)]
        if is_fp:
            en = energy_fp(y)
            support = None
        else:
            support = find_support(y)
            en = energy_gd(y, support)
        record_y(t + 1, y, en)
        if exact:
            _check_bits(y, config.bit_budget, t)
        if t < T:
            if is_fp:
                i = fp_primal(y, rule, incumbent=incumbent, tol=tol, step=t + 1)
                x = [0] * n
                x[i] = 1
                incumbent = i
                supp_mask = 1 << i
            else:
                x = _projection_coords(y, support.indices)
                if exact:
                    _check_bits(x, config.bit_budget, t)
                supp_mask = support.mask

    return Trajectory(config, matrix, xs, ys, energies, supports, exact)
