"""Pinned experiment presets for the standard figures.

Each preset bundles one or more fully-resolved :class:`ExperimentSpec`s; the
CLI can list them (``rpsdyn preset list``) and run them (``rpsdyn preset run
<id>``).  Parameters are pinned, not defaults — editing them changes the
figures they reproduce.
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Tuple

from .dynamics import Algorithm, LearnerConfig, TiebreakKind, TiebreakRule
from .errors import ConfigInvalid
from .experiment import ExperimentSpec
from .game import SimplexPoint


@dataclass(frozen=True)
class FigurePreset:
    id: str
    description: str
    specs: Tuple[ExperimentSpec, ...]


def _fp(name, n, horizon, tiebreak=None, x0=None, note=""):
    return ExperimentSpec(
        name=name,
        weights=(1,) * n,
        learner=LearnerConfig(
            algorithm=Algorithm.FICTITIOUS_PLAY,
            horizon=horizon,
            x0=x0 if x0 is not None else SimplexPoint.vertex(n, 0),
            eta=1,
            tiebreak=tiebreak,
        ),
        note=note,
    )


def _gd(name, n, horizon, eta, x0, sweep=(), eta_schedule=None, note=""):
    return ExperimentSpec(
        name=name,
        weights=(1,) * n,
        learner=LearnerConfig(
            algorithm=Algorithm.GRADIENT_DESCENT,
            horizon=horizon,
            x0=SimplexPoint(tuple(x0)),
            eta=eta,
            eta_schedule=eta_schedule,
        ),
        sweep=sweep,
        note=note,
    )


def _build() -> List[FigurePreset]:
    presets = []

    presets.append(
        FigurePreset(
            "fig1a",
            "Fictitious play on the unit 3-cycle from a vertex: dual spiral, "
            "growing phases, staircase energy.",
            (_fp("fig1a", 3, 200, tiebreak=TiebreakRule(TiebreakKind.LEXICOGRAPHIC)),),
        )
    )
    presets.append(
        FigurePreset(
            "fig1b",
            "Gradient descent, eta=0.5, on the unit 3-cycle from a vertex: the "
            "same outward spiral with smooth edge segments.",
            (_gd("fig1b", 3, 200, 0.5, (1, 0, 0)),),
        )
    )
    presets.append(
        FigurePreset(
            "fig1c",
            "Gradient descent, eta=1, on the unit 4-cycle from an interior "
            "point close to uniform.",
            (
                _gd(
                    "fig1c",
                    4,
                    200,
                    1,
                    (0.05, 0.35, 0.39, 0.21),
                    note="companion run: same weights with x0 cyclically "
                    "permuted one step gives the same picture rotated",
                ),
            ),
        )
    )
    presets.append(
        FigurePreset(
            "fig_gd_eta_compare",
            "Gradient descent on the unit 4-cycle, one interior start, three "
            "stepsizes: sublinear drift vs. fast lock-in to the cycling regime.",
            (
                _gd(
                    "fig_gd_eta_compare",
                    4,
                    100,
                    0.1,
                    (0.2, 0.2, 0.25, 0.35),
                    sweep=(("eta", (0.1, 0.3, 10)),),
                ),
            ),
        )
    )
    presets.append(
        FigurePreset(
            "fig_fp_regret",
            "Fictitious play regret growth over T=1000 from a vertex, "
            "dimensions 3 and 4.",
            (
                _fp("fig_fp_regret_n3", 3, 1000),
                _fp("fig_fp_regret_n4", 4, 1000),
            ),
        )
    )
    presets.append(
        FigurePreset(
            "fig_tournament",
            "Fictitious play on the unit 3-cycle under lexicographic vs. "
            "cyclic-successor tie breaking: the latter freezes the energy.",
            (
                _fp(
                    "fig_tournament_lex",
                    3,
                    1000,
                    tiebreak=TiebreakRule(TiebreakKind.LEXICOGRAPHIC),
                ),
                _fp(
                    "fig_tournament_cyclic",
                    3,
                    1000,
                    tiebreak=TiebreakRule(TiebreakKind.TOURNAMENT),
                ),
            ),
        )
    )
    presets.append(
        FigurePreset(
            "fig_gd_regret",
            "Gradient descent regret over T=1000 on the unit 3-cycle for a "
            "theory-scaled, a moderate, and a large constant stepsize.",
            (
                _gd(
                    "fig_gd_regret",
                    3,
                    1000,
                    0.3,
                    (0.3, 0.4, 0.3),
                    sweep=(("eta", (1 / math.sqrt(1000), 0.3, 10)),),
                ),
            ),
        )
    )
    presets.append(
        FigurePreset(
            "fig_decreasing",
            "Gradient descent on the unit 3-cycle over T=5000: the decreasing "
            "stepsize 1/sqrt(t+1) converges inward while constant eta=10 cycles.",
            (
                _gd(
                    "fig_decreasing_schedule",
                    3,
                    5000,
                    1,
                    (0.3, 0.4, 0.3),
                    eta_schedule="inv_sqrt_t",
                ),
                _gd("fig_decreasing_constant", 3, 5000, 10, (0.3, 0.4, 0.3)),
            ),
        )
    )
    return presets


_PRESETS: Dict[str, FigurePreset] = {p.id: p for p in _build()}


def all_presets() -> List[FigurePreset]:
    return list(_PRESETS.values())


def get_preset(preset_id: str) -> FigurePreset:
    try:
        return _PRESETS[preset_id]
    except KeyError:
        raise ConfigInvalid(
            f"unknown preset {preset_id!r}; available: {', '.join(_PRESETS)}"
        ) from None
