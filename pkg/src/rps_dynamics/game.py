"""Weighted cyclic matrix games on the probability simplex.

An n-action weighted rock-paper-scissors game is built from one directed cycle
over the actions: action i wins against action i+1 with stake w[i] (indices mod
n, zero-based).  The payoff matrix is skew-symmetric, so the game is symmetric
zero-sum, and every such game is fully described by its tuple of positive cycle
weights.

Arithmetic is generic: weights and points may be ints, floats, or
``fractions.Fraction``; computations stay in the types they are given, which
lets the same code run in float64 or exact-rational mode.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (
    DimensionMismatch,
    DimensionTooSmall,
    NonpositiveWeight,
    SingularSystem,
)

Number = Union[int, float, Fraction]


def is_exact(value: Number) -> bool:
    """True when the value carries no float rounding (int or Fraction)."""
    return not isinstance(value, float)


def all_exact(values: Sequence[Number]) -> bool:
    return all(is_exact(v) for v in values)


def number_to_json(value: Number):
    """JSON-safe encoding: ints/floats pass through, Fractions become 'p/q'."""
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    return value


class RpsMatrix:
    """Payoff matrix of a weighted cyclic game.

    Row i carries +w[i-1] in column i-1 and -w[i] in column i+1 (mod n): the
    row player's action i collects w[i-1] from the predecessor action and pays
    w[i] to the successor.  All other entries are zero.
    """

    __slots__ = ("weights", "n", "a_min", "a_max", "exact")

    def __init__(self, weights: Sequence[Number]):
        ws = tuple(weights)
        if len(ws) < 3:
            raise DimensionTooSmall(
                f"cyclic game needs at least 3 actions, got {len(ws)}"
            )
        for w in ws:
            if not w > 0:
                raise NonpositiveWeight(f"cycle weights must be positive, got {w!r}")
        self.weights = ws
        self.n = len(ws)
        self.a_min = min(ws)
        self.a_max = max(ws)
        self.exact = all_exact(ws)

    def __repr__(self) -> str:
        return f"RpsMatrix(weights={self.weights!r})"

    def entry(self, i: int, j: int) -> Number:
        n = self.n
        if j == (i + 1) % n:
            return -self.weights[i]
        if j == (i - 1) % n:
            return self.weights[(i - 1) % n]
        return 0

    def apply(self, x: Sequence[Number]) -> Tuple[Number, ...]:
        """A @ x using the two nonzero entries per row."""
        n = self.n
        if len(x) != n:
            raise DimensionMismatch(f"expected length {n}, got {len(x)}")
        w = self.weights
        return tuple(
            w[(i - 1) % n] * x[(i - 1) % n] - w[i] * x[(i + 1) % n] for i in range(n)
        )

    def column(self, j: int) -> Tuple[Number, ...]:
        """A @ e_j."""
        n = self.n
        out: List[Number] = [0] * n
        out[(j - 1) % n] = -self.weights[(j - 1) % n]
        out[(j + 1) % n] = self.weights[j]
        return tuple(out)

    def as_array(self) -> np.ndarray:
        n = self.n
        mat = np.zeros((n, n))
        for i in range(n):
            mat[i, (i + 1) % n] = -float(self.weights[i])
            mat[i, (i - 1) % n] = float(self.weights[(i - 1) % n])
        return mat

    def to_json(self) -> dict:
        return {"n": self.n, "weights": [number_to_json(w) for w in self.weights]}

    @classmethod
    def from_json(cls, data: dict) -> "RpsMatrix":
        weights = []
        for w in data["weights"]:
            if isinstance(w, str):
                weights.append(Fraction(w))
            else:
                weights.append(w)
        mat = cls(weights)
        if "n" in data and data["n"] != mat.n:
            raise DimensionMismatch(
                f"declared n={data['n']} but got {mat.n} weights"
            )
        return mat


def make_rps(weights: Sequence[Number]) -> RpsMatrix:
    """Build the payoff matrix of the weighted cyclic game with these stakes."""
    return RpsMatrix(weights)


@dataclass(frozen=True)
class SimplexPoint:
    """A mixed strategy: nonnegative coordinates summing to one.

    The sum must hold exactly for int/Fraction coordinates and within 1e-12
    for floats.
    """

    coords: Tuple[Number, ...]

    def __post_init__(self):
        cs = tuple(self.coords)
        object.__setattr__(self, "coords", cs)
        if len(cs) == 0:
            raise ValueError("empty strategy vector")
        for c in cs:
            if not c >= 0:
                raise ValueError(f"negative coordinate {c!r}")
        total = sum(cs)
        if all_exact(cs):
            if total != 1:
                raise ValueError(f"coordinates sum to {total}, expected exactly 1")
        elif abs(total - 1) > 1e-12:
            raise ValueError(f"coordinates sum to {total!r}, off by more than 1e-12")

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.coords) if c > 0)

    @property
    def is_vertex(self) -> bool:
        return len(self.support) == 1

    @property
    def vertex_index(self) -> Optional[int]:
        s = self.support
        return s[0] if len(s) == 1 else None

    def as_floats(self) -> Tuple[float, ...]:
        return tuple(float(c) for c in self.coords)

    def as_array(self) -> np.ndarray:
        return np.array(self.as_floats())

    @staticmethod
    def vertex(n: int, i: int) -> "SimplexPoint":
        if not 0 <= i < n:
            raise ValueError(f"vertex index {i} outside range({n})")
        return SimplexPoint(tuple(1 if j == i else 0 for j in range(n)))

    @staticmethod
    def uniform(n: int, exact: bool = False) -> "SimplexPoint":
        if exact:
            return SimplexPoint((Fraction(1, n),) * n)
        return SimplexPoint((1.0 / n,) * n)


@dataclass(frozen=True)
class NashResult:
    """Interior equilibrium along with its residual max|.(Ax*)_i|."""

    point: SimplexPoint
    residual: Number
    is_interior: bool


def interior_nash(matrix: RpsMatrix) -> NashResult:
    """Interior equilibrium of the cyclic game, solved exactly.

    Stationarity (Ax)_i = 0 pins down the stride-two recurrence
    x[j+2] = (w[j] / w[j+1]) * x[j] on the cycle.  For odd n the stride-two
    walk visits every coordinate, so the equilibrium is unique.  For even n
    the walk splits into two parity chains; each chain closes consistently if
    and only if the product of even-indexed weights equals the product of
    odd-indexed weights.  When that holds there is a whole segment of
    equilibria and the minimum-norm one is returned (it is automatically
    interior); when it fails the system Ax = 0, sum(x) = 1 has no solution at
    all and SingularSystem is raised.

    The solve always runs in Fraction arithmetic (float weights are converted
    to their exact binary values); results are returned as Fractions for exact
    inputs and as floats otherwise.
    """
    n = matrix.n
    w = [Fraction(v) for v in matrix.weights]
    if n % 2 == 1:
        rel: List[Fraction] = [Fraction(0)] * n
        rel[0] = Fraction(1)
        j = 0
        for _ in range(n - 1):
            nxt = (j + 2) % n
            rel[nxt] = rel[j] * w[j] / w[(j + 1) % n]
            j = nxt
        total = sum(rel)
        coords: Tuple[Fraction, ...] = tuple(c / total for c in rel)
    else:
        even_prod = math.prod(w[0::2])
        odd_prod = math.prod(w[1::2])
        if even_prod != odd_prod:
            raise SingularSystem(
                "no interior equilibrium: for even n one is only consistent "
                f"when prod(even-indexed weights) == prod(odd-indexed weights); "
                f"got {even_prod} != {odd_prod}, so Ax = 0 forces x = 0"
            )
        rays: List[List[Fraction]] = []
        for start in (0, 1):
            chain: List[Fraction] = [Fraction(0)] * n
            chain[start] = Fraction(1)
            j = start
            for _ in range(n // 2 - 1):
                nxt = (j + 2) % n
                chain[nxt] = chain[j] * w[j] / w[(j + 1) % n]
                j = nxt
            s = sum(chain)
            rays.append([c / s for c in chain])
        p, q = rays
        # Disjoint supports, so |x|^2 = lam^2 |p|^2 + (1-lam)^2 |q|^2; the
        # minimizer over the segment lands strictly between the endpoints.
        pp = sum(c * c for c in p)
        qq = sum(c * c for c in q)
        lam = qq / (pp + qq)
        coords = tuple(lam * a + (1 - lam) * b for a, b in zip(p, q))

    if matrix.exact:
        point = SimplexPoint(coords)
        residual: Number = max(abs(v) for v in matrix.apply(coords))
    else:
        point = SimplexPoint(tuple(float(c) for c in coords))
        residual = max(abs(v) for v in matrix.apply(point.coords))
    return NashResult(point=point, residual=residual, is_interior=all(c > 0 for c in point.coords))


def gamma(matrix: RpsMatrix, point: SimplexPoint) -> Number:
    """Smallest pairwise gap among the dual payoff coordinates of A x.

    A positive gap means the payoff vector has a strict ordering; the larger
    the gap, the smaller the stepsize needed for a gradient step from x to
    land in a vertex region.
    """
    v = matrix.apply(point.coords)
    n = len(v)
    return min(abs(v[k] - v[m]) for k in range(n) for m in range(k + 1, n))


def duality_gap(matrix: RpsMatrix, point: SimplexPoint) -> Number:
    """Duality gap of the self-play profile (x, x).

    max_i (Ax)_i - min_j (x^T A)_j; by skew-symmetry this equals
    2 * max_i (Ax)_i, and it vanishes exactly at equilibrium.
    """
    v = matrix.apply(point.coords)
    best_row = max(v)
    worst_col = min(
        sum(c * e for c, e in zip(point.coords, matrix.column(j)) if e != 0)
        for j in range(matrix.n)
    )
    return best_row - worst_col
