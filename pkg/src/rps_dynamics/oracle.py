"""Brute-force references for validating the fast paths.

Each oracle reaches the same quantity as a fast implementation through a
different route: exhaustive support enumeration instead of the sorted
active-set scan, fresh payoff sums instead of stored duals, and finite
differences instead of the closed-form projection.
"""

from fractions import Fraction
from typing import Sequence, Tuple

import numpy as np

from .errors import DimensionTooLarge, TooCloseToBoundary
from .analysis import classify_region
from .dynamics import Trajectory, energy_gd
from .game import Number, SimplexPoint, all_exact


def project_bruteforce(y: Sequence[Number]) -> Tuple[SimplexPoint, Number]:
    """Simplex projection by trying every nonempty support.

    For each candidate support S the equality-constrained maximizer of
    <x, y> - |x|^2/2 is x_i = y_i - mean_S(y) + 1/|S|; candidates with a
    negative coordinate are infeasible.  Returns the best feasible candidate
    and its objective value.  Never calls the fast support scan.
    """
    n = len(y)
    if n > 20:
        raise DimensionTooLarge(f"2^{n} supports is past the enumeration budget")
    exact = all_exact(y)
    best_obj = None
    best_coords = None
    for mask in range(1, 1 << n):
        idx = [i for i in range(n) if mask >> i & 1]
        m = len(idx)
        total = sum(y[i] for i in idx)
        if exact:
            shift = Fraction(1, m) - Fraction(total, m)
        else:
            shift = (1.0 - total) / m
        coords = [0] * n
        feasible = True
        for i in idx:
            c = y[i] + shift
            if c < 0:
                feasible = False
                break
            coords[i] = c
        if not feasible:
            continue
        obj = sum(coords[i] * y[i] for i in idx) - sum(
            coords[i] * coords[i] for i in idx
        ) / (Fraction(2) if exact else 2.0)
        if best_obj is None or obj > best_obj:
            best_obj = obj
            best_coords = coords
    return SimplexPoint(tuple(best_coords)), best_obj


def regret_direct(traj: Trajectory) -> Number:
    """2 * max_i of the summed payoff vectors, straight from the primals."""
    if traj.is_exact:
        totals = [0] * traj.n
        for xv in traj._xs:
            v = traj.matrix.apply(xv)
            totals = [a + b for a, b in zip(totals, v)]
        return 2 * max(totals)
    payoffs = traj.xs_array @ traj.matrix.as_array().T
    return float(2.0 * payoffs.sum(axis=0).max())


def grad_fd(y: Sequence[float], h: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of the projection energy.

    Away from region boundaries the energy is smooth and its gradient is the
    projection itself; within 10h of a boundary the difference stencil may
    straddle a kink, so such points are rejected.
    """
    tag = classify_region(y)
    if tag.min_abs_margin <= 10 * h:
        raise TooCloseToBoundary(
            f"margin {float(tag.min_abs_margin):.3g} <= {10 * h:.3g}"
        )
    base = [float(v) for v in y]
    out = np.empty(len(base))
    for i in range(len(base)):
        hi = list(base)
        lo = list(base)
        hi[i] += h
        lo[i] -= h
        out[i] = (energy_gd(hi) - energy_gd(lo)) / (2.0 * h)
    return out
