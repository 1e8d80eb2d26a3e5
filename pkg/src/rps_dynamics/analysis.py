"""Trajectory analysis: regions, phases, regret accounting, energy audits.

Everything here is a pure function of a recorded :class:`~.dynamics.Trajectory`.
The dual space decomposes into regions by what the simplex projection does to a
dual vector y:

* ``vertex`` i  — y_i - y_j > 1 for every other j; the projection is e_i;
* ``edge`` i    — |y_i - y_{i+1}| <= 1 and the pair's midpoint clears every
  other coordinate by more than 1/2; the projection lives on the open edge
  between e_i and e_{i+1};
* ``interior``  — the projection has full support;
* ``other_boundary`` — everything else.

Phases segment a trajectory into maximal runs at one best-response vertex, and
the energy-growth ledger classifies each dual step against the per-case growth
bounds those regions admit.  In float mode a step whose defining inequalities
sit within ``1e-9`` of zero is tagged ambiguous and excluded from case
assertions; exact-rational trajectories are audited with exact comparisons.
"""

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    ConfigInvalid,
    EmptyTrajectory,
    NonpositiveRegret,
    NoVertexReached,
    TooFewPhases,
    UnclassifiableTransition,
)
from .dynamics import Algorithm, Trajectory, fp_primal
from .game import Number, SimplexPoint, all_exact, duality_gap


class RegionKind(str, Enum):
    VERTEX = "vertex"
    EDGE = "edge"
    INTERIOR = "interior"
    OTHER_BOUNDARY = "other_boundary"


@dataclass(frozen=True)
class RegionTag:
    """Region assignment for one dual vector.

    ``margin`` is how deeply the defining inequalities of the assigned region
    are satisfied (for ``other_boundary``: how far the vector is from
    qualifying for any named region).  ``min_abs_margin`` is the smallest
    absolute slack over every region-defining inequality and measures distance
    to the nearest classification boundary.
    """

    kind: RegionKind
    index: Optional[int]
    margin: Number
    min_abs_margin: Number

    def label(self) -> str:
        if self.index is None:
            return self.kind.value
        return f"{self.kind.value}_{self.index}"


def _div(q: Number, d: int, exact: bool) -> Number:
    return Fraction(q, d) if exact else q / d


def classify_region(y: Sequence[Number]) -> RegionTag:
    """Assign a dual vector to its region, with margins.

    Checks vertex regions first, then edges, then the full-support region; the
    three families are pairwise disjoint, so order only decides how boundary
    points (where a non-strict inequality holds with equality) are labeled.
    """
    n = len(y)
    exact = all_exact(y)
    abs_slacks: List[Number] = []
    candidates: List[Number] = []

    vertex_hit: Optional[int] = None
    vertex_margin: Optional[Number] = None
    for i in range(n):
        slacks = [y[i] - y[j] - 1 for j in range(n) if j != i]
        m_i = min(slacks)
        abs_slacks.extend(abs(s) for s in slacks)
        candidates.append(m_i)
        if m_i > 0:
            vertex_hit, vertex_margin = i, m_i

    edge_hit: Optional[int] = None
    edge_margin: Optional[Number] = None
    for i in range(n):
        j = (i + 1) % n
        d = y[i] - y[j]
        s1 = 1 - (d if d >= 0 else -d)
        mids = [
            _div(y[i] + y[j] - 2 * y[k] - 1, 2, exact)
            for k in range(n)
            if k != i and k != j
        ]
        s2 = min(mids)
        abs_slacks.append(abs(s1))
        abs_slacks.extend(abs(s) for s in mids)
        candidates.append(min(s1, s2))
        if edge_hit is None and s1 >= 0 and s2 > 0:
            edge_hit, edge_margin = i, min(s1, s2)

    total = sum(y)
    interior_slacks = [_div(n * y[i] - total + 1, n, exact) for i in range(n)]
    interior_margin = min(interior_slacks)
    abs_slacks.extend(abs(s) for s in interior_slacks)
    candidates.append(interior_margin)

    min_abs = min(abs_slacks)
    if vertex_hit is not None:
        return RegionTag(RegionKind.VERTEX, vertex_hit, vertex_margin, min_abs)
    if edge_hit is not None:
        return RegionTag(RegionKind.EDGE, edge_hit, edge_margin, min_abs)
    if interior_margin >= 0:
        return RegionTag(RegionKind.INTERIOR, None, interior_margin, min_abs)
    return RegionTag(RegionKind.OTHER_BOUNDARY, None, -max(candidates), min_abs)


# ---------------------------------------------------------------------------
# Regret


@dataclass(frozen=True)
class RegretReport:
    """Regret of the self-play sequence, via several routes.

    ``regret_total`` is the realized regret (2/eta) * max_i y^{T+1}_i (for a
    decreasing-stepsize run it is the equivalent summed-payoff form).
    ``regret_by_energy`` re-expresses it through the dynamic's own energy and
    ``regret_upper`` adds the regularizer width (0 for FP, 1/2 for OGD), giving
    the guaranteed upper bound; both are None for decreasing stepsizes.
    ``duality_gap_avg`` is the gap of the time-averaged iterate, which satisfies
    duality_gap_avg * (T+1) == regret_total exactly.
    """

    regret_total: Number
    regret_by_energy: Optional[Number]
    regret_upper: Optional[Number]
    duality_gap_avg: Number
    average_iterate: SimplexPoint
    per_T_curve: Tuple[Tuple[int, Number], ...]


def regret_at(traj: Trajectory, horizon: int) -> Number:
    """Regret of the run truncated at a shorter horizon.

    Dual iterates of a truncated run coincide with a prefix of the longer run,
    so this reads y^{horizon+1} straight from storage.  Constant stepsize only.
    """
    if traj.config.eta_schedule is not None:
        raise ConfigInvalid("prefix regret needs a constant stepsize")
    if not 0 <= horizon <= traj.horizon:
        raise ValueError(f"horizon {horizon} outside [0, {traj.horizon}]")
    eta = traj.config.eta
    if traj.is_exact:
        return 2 * Fraction(max(traj.y(horizon + 1))) / eta
    return float(2.0 * traj.ys_array[horizon + 1].max() / eta)


def _curve_horizons(T: int, count: int) -> List[int]:
    if T < 1:
        return [0]
    raw = np.unique(
        np.round(np.logspace(0.0, math.log10(T), count)).astype(int)
    )
    pts = [int(p) for p in raw if 1 <= p <= T]
    if not pts or pts[-1] != T:
        pts.append(T)
    return pts


def regret(traj: Trajectory, curve_points: int = 33) -> RegretReport:
    """Full regret accounting for one trajectory."""
    T = traj.horizon
    if (len(traj._ys) if traj.is_exact else traj.ys_array.shape[0]) < 2:
        raise EmptyTrajectory("trajectory holds no dual step")
    cfg = traj.config
    is_fp = cfg.algorithm == Algorithm.FICTITIOUS_PLAY
    horizons = _curve_horizons(T, curve_points)

    if cfg.eta_schedule is not None:
        payoffs = traj.xs_array @ traj.matrix.as_array().T
        cum = np.cumsum(payoffs, axis=0)
        total: Number = 2.0 * float(cum[T].max())
        curve = tuple((h, 2.0 * float(cum[h].max())) for h in horizons)
        by_energy: Optional[Number] = None
        upper: Optional[Number] = None
    else:
        eta = cfg.eta
        total = regret_at(traj, T)
        curve = tuple((h, regret_at(traj, h)) for h in horizons)
        H = traj.energy(T + 1)
        if traj.is_exact:
            by_energy = 2 * Fraction(H) / eta
            upper = by_energy if is_fp else (2 * Fraction(H) + 1) / eta
        else:
            by_energy = 2 * H / eta
            upper = by_energy if is_fp else (2 * H + 1) / eta

    if traj.is_exact:
        count = T + 1
        sums = [sum(col) for col in zip(*traj._xs)]
        avg = SimplexPoint(tuple(Fraction(s, count) for s in sums))
    else:
        avg = SimplexPoint(tuple(float(c) for c in traj.xs_array.mean(axis=0)))
    gap = duality_gap(traj.matrix, avg)

    return RegretReport(
        regret_total=total,
        regret_by_energy=by_energy,
        regret_upper=upper,
        duality_gap_avg=gap,
        average_iterate=avg,
        per_T_curve=curve,
    )


def fit_regret_slope(curve: Sequence[Tuple[int, Number]]) -> Tuple[float, float]:
    """Least-squares slope and intercept of log10(Reg) against log10(T)."""
    pts = [(t, r) for t, r in curve if t >= 1]
    if len(pts) < 3:
        raise ValueError(f"need at least 3 positive-horizon points, got {len(pts)}")
    for _, r in pts:
        if not r > 0:
            raise NonpositiveRegret(f"cannot take log of regret {r!r}")
    xs = np.log10([float(t) for t, _ in pts])
    ys = np.log10([float(r) for _, r in pts])
    slope, intercept = np.polyfit(xs, ys, 1)
    return float(slope), float(intercept)


# ---------------------------------------------------------------------------
# Phases


@dataclass(frozen=True)
class Phase:
    """One maximal run of iterates at a single best-response vertex."""

    index: int
    t_start: int
    length: int
    vertex: int
    start_energy: Number        # gamma_k = H(y^{t_k})
    energy_increased: bool      # c_k; False for the first phase

    @property
    def t_end(self) -> int:
        return self.t_start + self.length


@dataclass(frozen=True)
class PhaseSummary:
    phases: Tuple[Phase, ...]
    t0: int
    start_rule: str

    @property
    def count(self) -> int:
        return len(self.phases)


def _vertex_label(traj: Trajectory, t: int, is_fp: bool) -> Optional[int]:
    if is_fp:
        mask = traj.support_mask(t)
        if mask and mask & (mask - 1) == 0:
            return mask.bit_length() - 1
        return None
    tag = classify_region(traj.y(t))
    return tag.index if tag.kind == RegionKind.VERTEX else None


def detect_phases(
    traj: Trajectory, start_rule: str = "first_vertex", tol: Optional[float] = None
) -> PhaseSummary:
    """Segment a trajectory into vertex phases.

    ``start_rule`` picks t0: ``"first_vertex"`` (default) takes the first
    t >= 1 whose iterate sits at a vertex; ``"energy_increase"`` takes the
    first t whose energy strictly exceeds H(y^1) (then advances to the next
    vertex if that iterate is not one).  A phase ends at the first later
    iterate sitting at a *different* vertex; edge or boundary iterates in
    between extend the current phase.  The final phase is truncated by the
    horizon: its length counts through iterate T, so lengths plus t0 tile
    [t0, T] exactly.
    """
    if start_rule not in ("first_vertex", "energy_increase"):
        raise ConfigInvalid(f"unknown start_rule {start_rule!r}")
    T = traj.horizon
    is_fp = traj.config.algorithm == Algorithm.FICTITIOUS_PLAY
    if T < 1:
        raise NoVertexReached("no iterate beyond the starting point")

    labels: Dict[int, Optional[int]] = {
        t: _vertex_label(traj, t, is_fp) for t in range(1, T + 1)
    }

    start_at = 1
    if start_rule == "energy_increase":
        h1 = traj.energy(1)
        thresh = h1 if traj.is_exact else h1 + 1e-9 * max(1.0, abs(h1))
        start_at = next(
            (t for t in range(2, T + 1) if traj.energy(t) > thresh), None
        )
        if start_at is None:
            raise NoVertexReached("energy never increased beyond H(y^1)")
    t0 = next((t for t in range(start_at, T + 1) if labels[t] is not None), None)
    if t0 is None:
        raise NoVertexReached("no vertex-region iterate found")

    starts: List[Tuple[int, int]] = [(t0, labels[t0])]
    for t in range(t0 + 1, T + 1):
        lab = labels[t]
        if lab is not None and lab != starts[-1][1]:
            starts.append((t, lab))

    def increased(curr: Number, prev: Number) -> bool:
        if traj.is_exact:
            return curr > prev
        return curr > prev + 1e-9 * max(1.0, abs(prev))

    phases: List[Phase] = []
    for k, (tk, vk) in enumerate(starts):
        t_next = starts[k + 1][0] if k + 1 < len(starts) else T + 1
        hk = traj.energy(tk)
        c_k = k > 0 and increased(hk, phases[-1].start_energy)
        phases.append(
            Phase(
                index=k,
                t_start=tk,
                length=t_next - tk,
                vertex=vk,
                start_energy=hk,
                energy_increased=c_k,
            )
        )
    return PhaseSummary(phases=tuple(phases), t0=t0, start_rule=start_rule)


def verify_cycling(phases: PhaseSummary, n: int) -> Optional[int]:
    """None when every phase vertex is its predecessor's cyclic successor;
    otherwise the index of the first offending phase."""
    ps = phases.phases
    if len(ps) < 2:
        raise TooFewPhases(f"cycling needs at least 2 phases, got {len(ps)}")
    for k in range(1, len(ps)):
        if ps[k].vertex != (ps[k - 1].vertex + 1) % n:
            return k
    return None


@dataclass(frozen=True)
class PhaseLengthFit:
    """Support-line fit tau >= alpha * gamma - beta over the phase cloud."""

    alpha: Optional[float]
    beta: Optional[float]
    min_residual: Optional[float]
    degenerate: bool
    phases_used: int


def phase_length_check(
    phases: PhaseSummary, n: Optional[int] = None
) -> PhaseLengthFit:
    """Fit the steepest lower support line to the (start energy, length) cloud.

    The last (horizon-truncated) phase is dropped from the fit.  The slope is
    the steepest positive edge of the lower convex hull; beta is the smallest
    nonnegative intercept making tau_k >= alpha*gamma_k - beta hold for every
    fitted phase.  With a single distinct abscissa or no positive hull slope
    the fit is reported degenerate.
    """
    required = 2 * n if n is not None else 2
    if phases.count < required:
        raise TooFewPhases(
            f"support-line fit wants >= {required} phases, got {phases.count}"
        )
    fitted = phases.phases[:-1] if phases.count > 1 else phases.phases
    # Collapse duplicate abscissae to their binding (smallest) length.
    best: Dict[float, int] = {}
    for p in fitted:
        g = float(p.start_energy)
        if g not in best or p.length < best[g]:
            best[g] = p.length
    pts = sorted((g, float(tau)) for g, tau in best.items())
    used = len(fitted)
    span = pts[-1][0] - pts[0][0] if pts else 0.0
    if len(pts) < 2 or span <= 1e-12 * max(1.0, abs(pts[-1][0])):
        return PhaseLengthFit(None, None, None, True, used)

    hull: List[Tuple[float, float]] = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) <= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    slopes = [
        (hull[k + 1][1] - hull[k][1]) / (hull[k + 1][0] - hull[k][0])
        for k in range(len(hull) - 1)
    ]
    alpha = max((s for s in slopes if s > 0), default=None)
    if alpha is None:
        return PhaseLengthFit(None, None, None, True, used)
    beta = max(0.0, max(alpha * g - tau for g, tau in pts))
    resid = min(tau - alpha * g + beta for g, tau in pts)
    return PhaseLengthFit(alpha, beta, resid, False, used)


# ---------------------------------------------------------------------------
# Energy-growth ledger


INITIAL = "initial"
FP_SAME = "fp_same"
FP_SWITCH = "fp_switch"
GD_VERTEX_SAME = "gd_vertex_same"
GD_VERTEX_ADVANCE = "gd_vertex_advance"
GD_VERTEX_TO_EDGE = "gd_vertex_to_edge"
GD_EDGE_TO_VERTEX = "gd_edge_to_vertex"
GD_EDGE_ADVANCE = "gd_edge_advance"

# Classes whose bound is an exact point get a tighter float tolerance.
_EXACT_CLASSES = (FP_SAME, GD_VERTEX_SAME)


@dataclass(frozen=True)
class LedgerEntry:
    """One audited dual step y^t -> y^{t+1}.

    ``ok`` is None for rows without bounds (the initial step and transitions
    outside the tabulated cases); ``ambiguous`` marks float steps whose region
    assignment sits within the ambiguity tolerance of a boundary.
    """

    t: int
    delta: Number
    transition: str
    bound_lo: Optional[Number]
    bound_hi: Optional[Number]
    ok: Optional[bool]
    ambiguous: bool


def _within(delta, lo, hi, exact: bool, strict: bool, cls: str) -> bool:
    if exact:
        if strict:
            return lo < delta < hi
        return lo <= delta <= hi
    tol = 1e-12 if cls in _EXACT_CLASSES else 1e-9
    return lo - tol <= delta <= hi + tol


def energy_growth_ledger(
    traj: Trajectory,
    ambiguity_tol: float = 1e-9,
    on_unclassifiable: str = "record",
) -> List[LedgerEntry]:
    """Classify every dual step and check it against its case bound.

    FP steps split on whether the best response changed: an unchanged response
    cannot move the maximum (bound exactly 0), a switch gains at most a_max.
    OGD steps are classified by the source/destination regions: staying on a
    vertex costs nothing; jumping a vertex forward gains in (1, eta*a_max);
    sliding from a vertex onto its edge gains at most 1; leaving an edge for a
    vertex at most (eta*a_max)^2/4; and hopping edge-to-edge at most
    eta*a_max + 5/4.  The step from y^0 is recorded as "initial" with no
    bound, since x^0 is chosen by the experimenter rather than the dynamics.

    Transitions outside the table are recorded with class
    ``uncovered:<src>-><dst>`` (or raised, with on_unclassifiable="raise").
    """
    if on_unclassifiable not in ("record", "raise"):
        raise ConfigInvalid(f"unknown on_unclassifiable {on_unclassifiable!r}")
    T = traj.horizon
    cfg = traj.config
    exact = traj.is_exact
    is_fp = cfg.algorithm == Algorithm.FICTITIOUS_PLAY
    a_max = traj.matrix.a_max if exact else float(traj.matrix.a_max)
    energies = traj._energies

    entries: List[LedgerEntry] = []
    prev_tag: Optional[RegionTag] = None
    for t in range(T + 1):
        delta = energies[t + 1] - energies[t]
        if not exact:
            delta = float(delta)
        if t == 0:
            entries.append(LedgerEntry(0, delta, INITIAL, None, None, None, False))
            continue

        if is_fp:
            cur = traj.support_mask(t).bit_length() - 1
            if t < T:
                nxt = traj.support_mask(t + 1).bit_length() - 1
            else:
                # No stored x^{T+1}; classify the final dual step against the
                # response the dynamics would have played next.
                nxt = fp_primal(
                    traj.y(T + 1),
                    cfg.effective_tiebreak,
                    incumbent=cur,
                    tol=cfg.effective_tie_tolerance,
                    step=T + 1,
                )
            if nxt == cur:
                cls, lo, hi, strict = FP_SAME, 0, 0, False
            else:
                cls, lo, hi, strict = FP_SWITCH, 0, a_max, False
            ok = _within(delta, lo, hi, exact, strict, cls)
            entries.append(LedgerEntry(t, delta, cls, lo, hi, ok, False))
            continue

        src = prev_tag if prev_tag is not None else classify_region(traj.y(t))
        dst = classify_region(traj.y(t + 1))
        prev_tag = dst
        eta_t = cfg.eta_at(t)
        b = eta_t * a_max
        n = traj.n
        cls = None
        strict = False
        if src.kind == RegionKind.VERTEX and dst.kind == RegionKind.VERTEX:
            if dst.index == src.index:
                cls, lo, hi = GD_VERTEX_SAME, 0, 0
            elif dst.index == (src.index + 1) % n:
                cls, lo, hi, strict = GD_VERTEX_ADVANCE, 1, b, True
        elif src.kind == RegionKind.VERTEX and dst.kind == RegionKind.EDGE:
            if dst.index == src.index:
                cls, lo, hi = GD_VERTEX_TO_EDGE, 0, 1
        elif src.kind == RegionKind.EDGE and dst.kind == RegionKind.VERTEX:
            if dst.index in ((src.index + 1) % n, (src.index + 2) % n):
                cls, lo, hi = GD_EDGE_TO_VERTEX, 0, _div(b * b, 4, exact)
        elif src.kind == RegionKind.EDGE and dst.kind == RegionKind.EDGE:
            if dst.index == (src.index + 1) % n:
                cls, lo, hi = GD_EDGE_ADVANCE, 0, b + _div(5, 4, exact)
            elif dst.index == src.index:
                # Lingering on one edge never happens under a large stepsize;
                # leave it uncovered rather than invent a bound.
                cls = None
        ambiguous = (not exact) and min(
            src.min_abs_margin, dst.min_abs_margin
        ) <= ambiguity_tol
        if cls is None:
            name = f"uncovered:{src.label()}->{dst.label()}"
            if on_unclassifiable == "raise":
                raise UnclassifiableTransition(f"step {t}: {name}")
            entries.append(LedgerEntry(t, delta, name, None, None, None, ambiguous))
        else:
            ok = _within(delta, lo, hi, exact, strict, cls)
            entries.append(LedgerEntry(t, delta, cls, lo, hi, ok, ambiguous))
    return entries


def ledger_summary(entries: Sequence[LedgerEntry]) -> Dict[str, int]:
    """Counts used by reports: audited steps, violations, exclusions."""
    out = {
        "steps": 0,
        "in_bounds": 0,
        "violations": 0,
        "uncovered": 0,
        "ambiguous": 0,
        "initial": 0,
    }
    for e in entries:
        if e.transition == INITIAL:
            out["initial"] += 1
            continue
        out["steps"] += 1
        if e.ambiguous:
            out["ambiguous"] += 1
            continue
        if e.ok is None:
            out["uncovered"] += 1
        elif e.ok:
            out["in_bounds"] += 1
        else:
            out["violations"] += 1
    return out


# ---------------------------------------------------------------------------
# Subspace, boundary, and small-stepsize checks


def check_dual_subspace(traj: Trajectory, star: SimplexPoint) -> Number:
    """max over t of |<x*, y^t>|; the dual walk never leaves the hyperplane
    orthogonal to an interior equilibrium, so this is rounding noise (exactly
    zero in rational mode)."""
    if star.n != traj.n:
        raise ConfigInvalid(f"equilibrium has dimension {star.n}, game {traj.n}")
    if traj.is_exact:
        worst: Number = 0
        for yv in traj._ys:
            val = abs(sum(c * v for c, v in zip(star.coords, yv)))
            if val > worst:
                worst = val
        return worst
    prods = traj.ys_array @ star.as_array()
    return float(np.abs(prods).max())


@dataclass(frozen=True)
class BoundaryInvariance:
    """Empirical audit of the one-way interior -> boundary passage.

    ``first_exceed_t`` is the first boundary iterate whose energy tops every
    energy ever seen at a full-support iterate of the same run
    (``max_interior_energy``; if no iterate t >= 1 has full support, the first
    boundary iterate counts as exceeding).  ``full_support_after_exceed``
    reports whether any later iterate regained full support — the dynamics
    say it never should.
    """

    first_boundary_t: Optional[int]
    ever_returns_interior: bool
    energy_at_first_boundary: Optional[Number]
    max_interior_energy: Optional[Number]
    first_exceed_t: Optional[int]
    full_support_after_exceed: bool


def boundary_invariance_check(traj: Trajectory) -> BoundaryInvariance:
    if traj.config.algorithm != Algorithm.GRADIENT_DESCENT:
        raise ConfigInvalid("boundary invariance is a gradient-descent property")
    T = traj.horizon
    full = (1 << traj.n) - 1
    full_at = [t for t in range(1, T + 1) if traj.support_mask(t) == full]
    boundary_at = [t for t in range(1, T + 1) if traj.support_mask(t) != full]
    first_boundary = boundary_at[0] if boundary_at else None
    max_interior = max((traj.energy(t) for t in full_at), default=None)
    returns = first_boundary is not None and any(t > first_boundary for t in full_at)

    first_exceed = None
    for t in boundary_at:
        if max_interior is None or traj.energy(t) > max_interior:
            first_exceed = t
            break
    after_exceed = first_exceed is not None and any(t > first_exceed for t in full_at)
    return BoundaryInvariance(
        first_boundary_t=first_boundary,
        ever_returns_interior=returns,
        energy_at_first_boundary=(
            traj.energy(first_boundary) if first_boundary is not None else None
        ),
        max_interior_energy=max_interior,
        first_exceed_t=first_exceed,
        full_support_after_exceed=after_exceed,
    )


@dataclass(frozen=True)
class SmallStepVerdict:
    status: str                 # "pass" | "fail" | "not_applicable"
    reason: str
    energy_final: Optional[float] = None
    energy_bound: Optional[float] = None
    regret_total: Optional[float] = None
    regret_bound: Optional[float] = None


def small_stepsize_energy_check(traj: Trajectory) -> SmallStepVerdict:
    """Audit the eta = 1/sqrt(T) regime: while every iterate keeps full
    support, the final energy stays below n*a_max^2/2 and regret below
    sqrt(T)*(n*a_max^2/2 + 1)."""
    cfg = traj.config
    if cfg.algorithm != Algorithm.GRADIENT_DESCENT:
        raise ConfigInvalid("small-stepsize audit applies to gradient descent")
    T = traj.horizon
    if T >= 1:
        if cfg.eta_schedule is not None or abs(float(cfg.eta) * math.sqrt(T) - 1.0) > 1e-9:
            return SmallStepVerdict(
                "not_applicable", f"stepsize {cfg.eta!r} is not 1/sqrt({T})"
            )
    full = (1 << traj.n) - 1
    for t in range(1, T + 1):
        if traj.support_mask(t) != full:
            return SmallStepVerdict(
                "not_applicable", f"iterate at t={t} is not interior"
            )
    n = traj.n
    a_max = float(traj.matrix.a_max)
    bound_e = n * a_max * a_max / 2.0
    e_final = float(traj.energy(T + 1))
    ok = e_final <= bound_e + 1e-9
    if T == 0:
        return SmallStepVerdict(
            "pass" if ok else "fail",
            "single dual step; regret bound not evaluated",
            energy_final=e_final,
            energy_bound=bound_e,
        )
    reg = float(regret(traj, curve_points=2).regret_total)
    bound_r = math.sqrt(T) * (bound_e + 1.0) + 1e-6
    ok = ok and reg <= bound_r
    return SmallStepVerdict(
        "pass" if ok else "fail",
        "all iterates interior",
        energy_final=e_final,
        energy_bound=bound_e,
        regret_total=reg,
        regret_bound=bound_r,
    )
