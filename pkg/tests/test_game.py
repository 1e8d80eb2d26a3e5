import random
from fractions import Fraction

import numpy as np
import pytest

from rps_dynamics import (
    DimensionMismatch,
    DimensionTooSmall,
    NonpositiveWeight,
    SimplexPoint,
    SingularSystem,
    duality_gap,
    gamma,
    interior_nash,
    make_rps,
)
from rps_dynamics.game import RpsMatrix


def test_matrix_pattern_n3():
    # Row i: +w[i-1] on column i-1, -w[i] on column i+1 (cyclic).
    m = make_rps((1, 2, 3))
    assert m.entry(0, 2) == 3      # row 0 beats row 2 with weight w_2
    assert m.entry(0, 1) == -1
    assert m.entry(1, 0) == 1
    assert m.entry(1, 2) == -2
    assert m.entry(2, 1) == 2
    assert m.entry(2, 0) == -3
    assert m.entry(0, 0) == 0
    assert m.a_min == 1 and m.a_max == 3


def test_matrix_is_skew_symmetric():
    rng = random.Random(7)
    for _ in range(25):
        n = rng.randint(3, 8)
        w = tuple(rng.uniform(0.1, 9.0) for _ in range(n))
        arr = make_rps(w).as_array()
        assert np.allclose(arr, -arr.T)


def test_apply_matches_matrix_vector_product():
    rng = np.random.default_rng(11)
    for _ in range(50):
        n = int(rng.integers(3, 9))
        w = tuple(float(v) for v in rng.uniform(0.5, 4.0, n))
        m = make_rps(w)
        x = rng.uniform(-2, 2, n)
        via_loop = np.array(m.apply(tuple(float(v) for v in x)))
        assert np.allclose(via_loop, m.as_array() @ x, atol=1e-12)


def test_apply_exact_stays_exact():
    m = make_rps((1, 2, 3))
    out = m.apply((Fraction(1, 3), Fraction(1, 2), Fraction(1, 6)))
    assert all(isinstance(v, (int, Fraction)) for v in out)
    assert all(v == 0 for v in out)


def test_matrix_validation():
    with pytest.raises(DimensionTooSmall):
        make_rps((1, 1))
    with pytest.raises(NonpositiveWeight):
        make_rps((1, 0, 1))
    with pytest.raises(NonpositiveWeight):
        make_rps((1, -2, 1))
    with pytest.raises(DimensionMismatch):
        make_rps((1, 1, 1)).apply((0.5, 0.5))


def test_matrix_json_roundtrip():
    m = make_rps((1, Fraction(2, 3), 0.25))
    m2 = RpsMatrix.from_json(m.to_json())
    assert m2.weights == m.weights


def test_column_consistency():
    m = make_rps((1.5, 2.5, 0.5, 3.0))
    arr = m.as_array()
    for j in range(4):
        assert np.allclose([float(v) for v in m.column(j)], arr[:, j])


# ---------------------------------------------------------------------------
# Simplex points


def test_simplex_point_validation():
    SimplexPoint((0.2, 0.3, 0.5))
    SimplexPoint((Fraction(1, 2), Fraction(1, 2), 0))
    with pytest.raises(ValueError):
        SimplexPoint((0.5, 0.6, 0.1))       # sums to 1.2
    with pytest.raises(ValueError):
        SimplexPoint((0.5, 0.6, -0.1))      # negative coordinate
    with pytest.raises(ValueError):
        SimplexPoint((Fraction(1, 2), Fraction(1, 3)))  # exact sum != 1


def test_vertex_and_uniform():
    v = SimplexPoint.vertex(4, 2)
    assert v.coords == (0, 0, 1, 0)
    assert v.is_vertex and v.vertex_index == 2
    u = SimplexPoint.uniform(3, exact=True)
    assert u.coords == (Fraction(1, 3),) * 3
    assert not u.is_vertex and u.vertex_index is None
    assert SimplexPoint.uniform(5).support == (0, 1, 2, 3, 4)
    with pytest.raises(ValueError):
        SimplexPoint.vertex(3, 3)


# ---------------------------------------------------------------------------
# Interior equilibrium


def test_nash_weighted_three_cycle():
    """The weighted 3-cycle (1,2,3) equilibrates at (1/3, 1/2, 1/6)."""
    res = interior_nash(make_rps((1, 2, 3)))
    assert res.point.coords == (Fraction(1, 3), Fraction(1, 2), Fraction(1, 6))
    assert res.residual == 0
    assert res.is_interior


def test_nash_uniform_for_equal_weights():
    for n in (3, 4, 5, 6, 7):
        res = interior_nash(make_rps((2,) * n))
        assert res.point.coords == (Fraction(1, n),) * n


def test_nash_odd_n_property():
    # Any positive weights on an odd cycle give a unique interior equilibrium
    # with exactly zero residual when solved in rationals.
    rng = random.Random(123)
    for _ in range(60):
        n = rng.choice([3, 5, 7])
        w = tuple(Fraction(rng.randint(1, 40), rng.randint(1, 40)) for _ in range(n))
        res = interior_nash(make_rps(w))
        assert res.residual == 0
        assert min(res.point.coords) > 0
        assert sum(res.point.coords) == 1


def test_nash_even_n_needs_matched_products():
    # Generic even-cycle weights admit no interior solution at all.
    with pytest.raises(SingularSystem):
        interior_nash(make_rps((1, 2, 3, 4)))
    # Matching alternating products (1*3 == 3*1) restores solvability.
    res = interior_nash(make_rps((1, 3, 3, 1)))
    assert res.residual == 0
    assert min(res.point.coords) > 0


def test_nash_even_n_min_norm_is_valid_equilibrium():
    rng = random.Random(99)
    hits = 0
    for _ in range(40):
        n = rng.choice([4, 6])
        w = [Fraction(rng.randint(1, 9)) for _ in range(n)]
        # Force the closure condition by solving the last weight from the rest.
        even = Fraction(1)
        odd = Fraction(1)
        for i in range(0, n, 2):
            even *= w[i]
        for i in range(1, n - 1, 2):
            odd *= w[i]
        w[n - 1] = even / odd
        res = interior_nash(make_rps(tuple(w)))
        assert res.residual == 0
        assert min(res.point.coords) > 0
        hits += 1
    assert hits == 40


def test_nash_float_weights_small_residual():
    rng = np.random.default_rng(5)
    for _ in range(50):
        n = int(rng.choice([3, 5, 7]))
        w = tuple(float(v) for v in rng.uniform(0.5, 5.0, n))
        res = interior_nash(make_rps(w))
        assert float(res.residual) <= 1e-12
        assert min(res.point.coords) > 0


# ---------------------------------------------------------------------------
# Payoff geometry helpers


def test_gamma_known_value():
    m = make_rps((1.0,) * 4)
    x0 = SimplexPoint((0.05, 0.35, 0.39, 0.21))
    g = gamma(m, x0)
    assert abs(g - 0.2) < 1e-12


def test_gamma_zero_at_equilibrium():
    m = make_rps((1, 2, 3))
    star = interior_nash(m).point
    assert gamma(m, star) == 0


def test_duality_gap_zero_exactly_at_nash():
    m = make_rps((1, 2, 3))
    star = interior_nash(m).point
    assert duality_gap(m, star) == 0
    off = SimplexPoint((Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)))
    assert duality_gap(m, off) > 0


def test_duality_gap_is_twice_best_payoff():
    # For skew-symmetric A the column minimum is the negated row maximum.
    rng = np.random.default_rng(21)
    for _ in range(30):
        n = int(rng.integers(3, 7))
        m = make_rps(tuple(float(v) for v in rng.uniform(0.5, 3.0, n)))
        raw = rng.uniform(0.01, 1.0, n)
        x = SimplexPoint(tuple(float(v) for v in raw / raw.sum()))
        gap = duality_gap(m, x)
        best = max(m.apply(x.coords))
        assert abs(gap - 2.0 * best) < 1e-12
