import math
import random
from fractions import Fraction

import numpy as np
import pytest

from rps_dynamics import (
    Algorithm,
    Arithmetic,
    ConfigInvalid,
    LearnerConfig,
    NonpositiveRegret,
    Phase,
    PhaseSummary,
    RegionKind,
    SimplexPoint,
    TiebreakKind,
    TiebreakRule,
    TooFewPhases,
    UnclassifiableTransition,
    boundary_invariance_check,
    check_dual_subspace,
    classify_region,
    detect_phases,
    duality_gap,
    energy_growth_ledger,
    fit_regret_slope,
    interior_nash,
    ledger_summary,
    make_rps,
    phase_length_check,
    regret,
    regret_at,
    run,
    small_stepsize_energy_check,
    verify_cycling,
)
from rps_dynamics.oracle import regret_direct


def _fp(n=3, T=50, weights=None, rule=None, exact=False):
    cfg = LearnerConfig(
        algorithm=Algorithm.FICTITIOUS_PLAY,
        horizon=T,
        x0=SimplexPoint.vertex(n, 0),
        tiebreak=rule,
        arithmetic=Arithmetic.EXACT_RATIONAL if exact else Arithmetic.FLOAT64,
    )
    return run(cfg, make_rps(weights or (1,) * n))


def _gd(n=3, T=50, eta=1, weights=None, x0=None, exact=False):
    cfg = LearnerConfig(
        algorithm=Algorithm.GRADIENT_DESCENT,
        horizon=T,
        x0=x0 or SimplexPoint.vertex(n, 0),
        eta=eta,
        arithmetic=Arithmetic.EXACT_RATIONAL if exact else Arithmetic.FLOAT64,
    )
    return run(cfg, make_rps(weights or ((1,) * n if exact else (1.0,) * n)))


# ---------------------------------------------------------------------------
# Regions


def test_region_vertex():
    tag = classify_region([5.0, 1.0, 0.0])
    assert tag.kind == RegionKind.VERTEX and tag.index == 0
    assert abs(tag.margin - 3.0) < 1e-15       # tightest slack: y0 - y1 - 1
    assert tag.label() == "vertex_0"


def test_region_edge():
    tag = classify_region([2.0, 1.8, -3.0])
    assert tag.kind == RegionKind.EDGE and tag.index == 0
    assert abs(tag.margin - 0.8) < 1e-15
    assert tag.label() == "edge_0"


def test_region_interior():
    tag = classify_region([0.0, 0.0, 0.0])
    assert tag.kind == RegionKind.INTERIOR and tag.index is None
    assert abs(tag.margin - 1.0 / 3) < 1e-15


def test_region_other_boundary():
    # Projection support {0, 2} on n=4 is a non-adjacent pair: no named region.
    tag = classify_region([3.0, 0.0, 3.0, 0.0])
    assert tag.kind == RegionKind.OTHER_BOUNDARY
    assert abs(tag.margin - 1.0) < 1e-15


def test_region_near_boundary_ambiguity():
    eps = 1e-12
    tag = classify_region([1.0 + eps, 0.0, 0.0])
    assert tag.kind == RegionKind.VERTEX and tag.index == 0
    assert tag.min_abs_margin < 1e-11
    far = classify_region([10.0, 2.0, -8.0])
    assert far.min_abs_margin > 0.5


def test_region_matches_projection_support():
    """Region labels and the projection's support tell the same story."""
    from rps_dynamics import find_support

    rng = np.random.default_rng(8)
    checked = 0
    for _ in range(800):
        n = int(rng.integers(3, 6))
        y = [float(v) for v in rng.uniform(-3, 3, n)]
        tag = classify_region(y)
        if tag.min_abs_margin < 1e-9:
            continue  # genuinely ambiguous; no claim
        s = find_support(y).indices
        if tag.kind == RegionKind.VERTEX:
            assert s == (tag.index,)
        elif tag.kind == RegionKind.EDGE:
            assert s == tuple(sorted((tag.index, (tag.index + 1) % n)))
        elif tag.kind == RegionKind.INTERIOR:
            assert s == tuple(range(n))
        checked += 1
    assert checked > 500


def test_region_exact_arithmetic():
    tag = classify_region((Fraction(3), Fraction(1), Fraction(0)))
    assert tag.kind == RegionKind.VERTEX and tag.index == 0
    assert tag.margin == 1
    # Exact boundary point: y0 - y1 = 1 exactly fails the strict vertex test.
    tag = classify_region((Fraction(1), Fraction(0), Fraction(-9)))
    assert tag.kind == RegionKind.EDGE and tag.index == 0
    assert tag.min_abs_margin == 0


# ---------------------------------------------------------------------------
# Regret


def test_regret_matches_definition_fp():
    traj = _fp(T=60)
    rep = regret(traj)
    # 2 * best fixed action against the empirical play sequence.
    assert abs(float(rep.regret_total) - float(regret_direct(traj))) < 1e-12
    assert rep.regret_by_energy == rep.regret_total  # FP: energy is the max
    assert rep.regret_upper == rep.regret_total


def test_regret_prefix_consistency():
    traj = _fp(T=80)
    short = _fp(T=25)
    assert regret_at(traj, 25) == regret_at(short, 25)
    assert regret_at(traj, 80) == regret(traj).regret_total


def test_regret_gap_identity_exact():
    for build in (lambda: _fp(T=40, weights=(1, 2, 3), exact=True),
                  lambda: _gd(T=40, exact=True)):
        traj = build()
        rep = regret(traj)
        assert rep.duality_gap_avg * (traj.horizon + 1) == rep.regret_total


def test_regret_gap_identity_float_random():
    rng = random.Random(17)
    for _ in range(8):
        n = rng.choice([3, 4, 5])
        algo = rng.choice(["fp", "gd"])
        if algo == "fp":
            traj = _fp(n=n, T=rng.randint(10, 60))
        else:
            traj = _gd(n=n, T=rng.randint(10, 60), eta=rng.choice([0.3, 1.0, 5.0]))
        rep = regret(traj)
        lhs = float(rep.duality_gap_avg) * (traj.horizon + 1)
        assert abs(lhs - float(rep.regret_total)) <= 1e-9 * max(1.0, abs(lhs))


def test_regret_upper_bound_gd():
    traj = _gd(T=60, eta=4.0, x0=SimplexPoint((0.2, 0.5, 0.3)))
    rep = regret(traj)
    assert rep.regret_upper is not None
    assert float(rep.regret_total) <= float(rep.regret_upper) + 1e-12


def test_regret_curve_shape():
    traj = _fp(T=100)
    rep = regret(traj, curve_points=9)
    ts = [t for t, _ in rep.per_T_curve]
    assert ts == sorted(set(ts))
    assert ts[-1] == 100
    assert float(rep.per_T_curve[-1][1]) == float(rep.regret_total)


def test_fit_regret_slope_power_laws():
    for p in (0.5, 1.0, 0.25):
        curve = [(T, 3.0 * T**p) for T in (10, 100, 1000, 10000)]
        slope, intercept = fit_regret_slope(curve)
        assert abs(slope - p) < 1e-12
        assert abs(intercept - math.log10(3.0)) < 1e-12


def test_fit_regret_slope_errors():
    with pytest.raises(ValueError):
        fit_regret_slope([(10, 1.0), (100, 2.0)])
    with pytest.raises(NonpositiveRegret):
        fit_regret_slope([(10, 1.0), (100, 0.0), (1000, 2.0)])


# ---------------------------------------------------------------------------
# Phases


def test_phase_tiling_and_reference_values():
    traj = _fp(T=30)
    ph = detect_phases(traj)
    assert ph.t0 == 1
    got = [(p.t_start, p.length, p.vertex) for p in ph.phases[:3]]
    assert got == [(1, 3, 1), (4, 5, 2), (9, 7, 0)]
    assert [p.start_energy for p in ph.phases[:4]] == [1.0, 2.0, 2.0, 3.0]
    assert [p.energy_increased for p in ph.phases[:4]] == [False, True, False, True]
    # Phase lengths tile [t0, T] exactly.
    assert sum(p.length for p in ph.phases) == traj.horizon + 1 - ph.t0
    for a, b in zip(ph.phases, ph.phases[1:]):
        assert b.t_start == a.t_start + a.length
        assert b.vertex != a.vertex


def test_phase_detection_gd():
    traj = _gd(n=4, T=300, eta=6.0, x0=SimplexPoint((0.05, 0.35, 0.39, 0.21)))
    ph = detect_phases(traj)
    assert ph.t0 == 1
    assert verify_cycling(ph, 4) is None
    assert sum(p.length for p in ph.phases) == 300
    # Energies at phase starts never decrease.
    starts = [float(p.start_energy) for p in ph.phases]
    assert all(b >= a - 1e-9 for a, b in zip(starts, starts[1:]))


def test_phase_start_rule_energy_increase():
    traj = _fp(T=30)
    ph = detect_phases(traj, start_rule="energy_increase")
    # First energy increase happens entering y^4 (energy 2 > 1).
    assert ph.t0 == 4
    assert ph.phases[0].vertex == 2
    with pytest.raises(ConfigInvalid):
        detect_phases(traj, start_rule="whenever")


def test_verify_cycling_detects_breaks():
    def mk(vertices):
        phases = tuple(
            Phase(index=k, t_start=3 * k, length=3, vertex=v,
                  start_energy=float(k), energy_increased=k > 0)
            for k, v in enumerate(vertices)
        )
        return PhaseSummary(phases=phases, t0=0, start_rule="first_vertex")

    assert verify_cycling(mk([0, 1, 2, 0, 1]), 3) is None
    assert verify_cycling(mk([0, 1, 0]), 3) == 2
    assert verify_cycling(mk([2, 0, 1]), 3) is None
    with pytest.raises(TooFewPhases):
        verify_cycling(mk([0]), 3)


def test_phase_length_fit_linear_growth():
    # tau = 2*gamma + 1 exactly, plus a horizon-truncated final phase that the
    # fit must ignore.
    phases = tuple(
        Phase(index=k, t_start=0, length=2 * g + 1, vertex=k % 3,
              start_energy=float(g), energy_increased=True)
        for k, g in enumerate([1, 2, 3, 4])
    ) + (Phase(index=4, t_start=0, length=2, vertex=1, start_energy=5.0,
               energy_increased=True),)
    summary = PhaseSummary(phases=phases, t0=0, start_rule="first_vertex")
    fit = phase_length_check(summary)
    assert not fit.degenerate
    assert abs(fit.alpha - 2.0) < 1e-12
    assert fit.beta == 0.0
    assert abs(fit.min_residual - 1.0) < 1e-12
    assert fit.phases_used == 4


def test_phase_length_fit_degenerate_single_abscissa():
    phases = tuple(
        Phase(index=k, t_start=0, length=3, vertex=k % 3,
              start_energy=1.0, energy_increased=False)
        for k in range(5)
    )
    fit = phase_length_check(PhaseSummary(phases=phases, t0=0, start_rule="first_vertex"))
    assert fit.degenerate


def test_phase_length_check_min_count():
    phases = tuple(
        Phase(index=k, t_start=0, length=3, vertex=k % 3,
              start_energy=float(k), energy_increased=False)
        for k in range(5)
    )
    summary = PhaseSummary(phases=phases, t0=0, start_rule="first_vertex")
    with pytest.raises(TooFewPhases):
        phase_length_check(summary, n=3)   # needs 2n = 6


# ---------------------------------------------------------------------------
# Energy-growth ledger


def test_ledger_fp_reference_run():
    traj = _fp(T=30)
    entries = energy_growth_ledger(traj)
    assert entries[0].transition == "initial"
    assert entries[0].ok is None
    by_t = {e.t: e for e in entries}
    assert by_t[1].transition == "fp_same" and by_t[1].delta == 0
    assert by_t[3].transition == "fp_switch" and by_t[3].delta == 1.0
    summary = ledger_summary(entries)
    assert summary["violations"] == 0 and summary["uncovered"] == 0
    assert summary["steps"] == 30
    assert summary["in_bounds"] == 30 - summary["ambiguous"]


def test_ledger_fp_switch_bound_is_a_max():
    traj = _fp(T=120, weights=(1, 2, 3), exact=True)
    entries = energy_growth_ledger(traj)
    for e in entries[1:]:
        assert e.transition in ("fp_same", "fp_switch")
        assert e.ok
        if e.transition == "fp_switch":
            assert 0 <= e.delta <= 3


def test_ledger_gd_large_step_classes():
    traj = _gd(n=4, T=400, eta=6.0, x0=SimplexPoint((0.05, 0.35, 0.39, 0.21)))
    entries = energy_growth_ledger(traj)
    summary = ledger_summary(entries)
    assert summary["violations"] == 0
    assert summary["uncovered"] == 0
    seen = {e.transition for e in entries[1:] if not e.ambiguous}
    assert "gd_vertex_same" in seen
    assert "gd_vertex_to_edge" in seen or "gd_vertex_advance" in seen


def test_ledger_small_step_is_uncovered():
    # Tiny stepsize keeps iterates interior: no tabulated transition applies,
    # and the ledger says so instead of inventing bounds.
    traj = _gd(T=20, eta=0.01, x0=SimplexPoint((0.3, 0.4, 0.3)))
    entries = energy_growth_ledger(traj)
    assert any(e.transition.startswith("uncovered:interior") for e in entries)
    assert ledger_summary(entries)["uncovered"] > 0
    with pytest.raises(UnclassifiableTransition):
        energy_growth_ledger(traj, on_unclassifiable="raise")


def test_ledger_delta_sums_to_energy_gain():
    traj = _gd(n=4, T=200, eta=6.0, x0=SimplexPoint((0.05, 0.35, 0.39, 0.21)))
    entries = energy_growth_ledger(traj)
    total = sum(float(e.delta) for e in entries)
    assert abs(total - (float(traj.energy(201)) - float(traj.energy(0)))) < 1e-9


# ---------------------------------------------------------------------------
# Subspace / boundary / small-step checks


def test_dual_subspace_exact_zero():
    traj = _fp(T=200, weights=(1, 2, 3), exact=True)
    star = interior_nash(make_rps((1, 2, 3))).point
    assert check_dual_subspace(traj, star) == 0


def test_dual_subspace_float_rounding_only():
    traj = _gd(T=500, eta=0.3, weights=(1.0, 2.0, 3.0), x0=SimplexPoint.uniform(3))
    star = interior_nash(make_rps((1, 2, 3))).point
    assert check_dual_subspace(traj, star) < 1e-10


def test_dual_subspace_dimension_check():
    traj = _fp(T=5)
    with pytest.raises(ConfigInvalid):
        check_dual_subspace(traj, SimplexPoint.uniform(4))


def test_boundary_invariance_moderate_step():
    traj = _gd(T=2000, eta=0.3, x0=SimplexPoint((0.3, 0.4, 0.3)))
    b = boundary_invariance_check(traj)
    assert b.first_boundary_t is not None
    assert b.first_exceed_t is not None
    assert not b.full_support_after_exceed


def test_boundary_invariance_needs_gd():
    with pytest.raises(ConfigInvalid):
        boundary_invariance_check(_fp(T=10))


def test_small_stepsize_check_paths():
    T = 400
    ok = _gd(T=T, eta=1.0 / math.sqrt(T), x0=SimplexPoint((0.3, 0.4, 0.3)))
    v = small_stepsize_energy_check(ok)
    assert v.status == "pass"
    assert v.energy_final <= v.energy_bound
    wrong_eta = _gd(T=T, eta=0.5, x0=SimplexPoint((0.3, 0.4, 0.3)))
    assert small_stepsize_energy_check(wrong_eta).status == "not_applicable"
    with pytest.raises(ConfigInvalid):
        small_stepsize_energy_check(_fp(T=10))


# ---------------------------------------------------------------------------
# Cross-cutting property: monotone energy on random configurations


def test_energy_monotone_random_games():
    rng = random.Random(55)
    for _ in range(12):
        n = rng.choice([3, 4, 5])
        if rng.random() < 0.5:
            traj = _fp(n=n, T=100, weights=tuple(rng.randint(1, 4) for _ in range(n)))
        else:
            traj = _gd(n=n, T=100, eta=rng.choice([0.5, 2.0, 8.0]),
                       x0=SimplexPoint.uniform(n))
        H = traj.energies_array
        rel = np.diff(H)[1:] / np.maximum(1.0, np.abs(H[1:-1]))
        assert rel.min() >= -1e-9
