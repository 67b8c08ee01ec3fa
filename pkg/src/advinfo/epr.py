"""Two photons in a polarization singlet and backdated state reduction.

Polarization basis is ``00, 01, 10, 11`` over ``(L, R)`` with 0 horizontal
and 1 vertical.  Position is only a tag: both photons at the origin at t=0,
apart at t=T.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import ContractViolation
from .state import TOL, MeasurementRecord, marginal, project, sample_outcome, sequential_distribution

PHOTON_QUBIT = {"L": 0, "R": 1}
POSITIONS = {"0": ("x_O", "x_O"), "T": ("x_L", "x_R")}


class TwoPhotonState:
    __slots__ = ("time", "polarization")

    def __init__(self, time: str, polarization: Any):
        if time not in POSITIONS:
            raise ContractViolation(f"time tag must be '0' or 'T', got {time!r}")
        amps = np.array(polarization, dtype=np.complex128).reshape(-1)
        if amps.shape != (4,):
            raise ContractViolation("polarization needs 4 amplitudes")
        if abs(np.linalg.norm(amps) - 1) > TOL:
            raise ContractViolation("polarization state is not normalized")
        amps.setflags(write=False)
        object.__setattr__(self, "time", time)
        object.__setattr__(self, "polarization", amps)

    def __setattr__(self, name: str, value: Any) -> None:
        raise AttributeError("TwoPhotonState is immutable")

    @property
    def positions(self) -> tuple[str, str]:
        return POSITIONS[self.time]

    def amplitude(self, bits: str) -> complex:
        return complex(self.polarization[int(bits, 2)])

    def max_difference(self, other: "TwoPhotonState") -> float:
        return float(np.max(np.abs(self.polarization - other.polarization)))

    def to_records(self) -> list[dict]:
        return [
            {"L": format(i, "02b")[0], "R": format(i, "02b")[1], "re": float(a.real), "im": float(a.imag)}
            for i, a in enumerate(self.polarization)
            if abs(a) >= TOL
        ]

    def __str__(self) -> str:
        pl, pr = self.positions
        terms = []
        for rec in self.to_records():
            terms.append(f"{rec['re']:+.6f} |{pl}>_L |{pr}>_R |{rec['L']}>_L |{rec['R']}>_R")
        return " ".join(terms)

    def __repr__(self) -> str:
        return f"TwoPhotonState(t={self.time}, {self.polarization.tolist()})"


def make_singlet() -> TwoPhotonState:
    s = 1 / math.sqrt(2)
    return TwoPhotonState("0", [0, s, -s, 0])


def evolve_to_T(state: TwoPhotonState) -> TwoPhotonState:
    """Free flight from the common origin; polarization is untouched."""
    if state.time != "0":
        raise ContractViolation("state has already evolved to t=T")
    return TwoPhotonState("T", state.polarization)


def _photons(which: str | tuple[str, ...]) -> tuple[int, ...]:
    names = (which,) if isinstance(which, str) else which
    try:
        return tuple(PHOTON_QUBIT[w] for w in names)
    except KeyError:
        raise ContractViolation(f"photon must be 'L' or 'R', got {which!r}") from None


def measure_photon(state: TwoPhotonState, which: str, outcome: str | None = None, seed: int | None = None) -> MeasurementRecord:
    """H/V measurement of one photon, forced or sampled with ``seed``."""
    qs = _photons(which)
    mode = "forced"
    if outcome is None:
        outcome = sample_outcome(marginal(state.polarization, 2, qs), 0 if seed is None else seed)
        mode = "sampled"
    prob, post = project(state.polarization, 2, qs, str(outcome))
    return MeasurementRecord(qs, str(outcome), prob, TwoPhotonState(state.time, post), mode)


def joint_distribution(state: TwoPhotonState, order: tuple[str, str] = ("L", "R")) -> dict[tuple[str, str], float]:
    """Exact ``(L, R) -> probability`` table, measuring in ``order``.

    Keys are always ``(L outcome, R outcome)`` whatever the order.
    """
    sets = [_photons(w) for w in order]
    table = sequential_distribution(state.polarization, 2, sets)
    if tuple(order) == ("R", "L"):
        table = {(l, r): p for (r, l), p in table.items()}
    return table


def anticorrelation(state: TwoPhotonState, order: tuple[str, str] = ("L", "R")) -> float:
    """Probability that both photons show the same polarization."""
    return sum(p for (l, r), p in joint_distribution(state, order).items() if l == r)


@dataclass
class BackdatingBranch:
    outcome: str
    probability_at_T: float
    probability_at_0: float
    max_difference: float
    final_measured_at_T: TwoPhotonState
    final_backdated: TwoPhotonState
    r_outcome_at_T: dict[str, float]
    r_outcome_backdated: dict[str, float]

    @property
    def equal(self) -> bool:
        return (
            self.max_difference <= TOL
            and abs(self.probability_at_T - self.probability_at_0) <= TOL
            and self.final_measured_at_T.time == self.final_backdated.time
        )


@dataclass
class BackdatingReport:
    branches: list[BackdatingBranch] = field(default_factory=list)
    joint_measured_at_T: dict[tuple[str, str], float] = field(default_factory=dict)
    joint_backdated: dict[tuple[str, str], float] = field(default_factory=dict)
    same_polarization: float = 0.0
    order_invariant: bool = False

    @property
    def distributions_equal(self) -> bool:
        return all(abs(self.joint_measured_at_T[k] - self.joint_backdated[k]) <= TOL for k in self.joint_measured_at_T)

    @property
    def passed(self) -> bool:
        return (
            all(b.equal for b in self.branches)
            and self.distributions_equal
            and self.same_polarization == 0.0
            and self.order_invariant
        )


def backdating_equivalence_check() -> BackdatingReport:
    """Compare reduce-at-T with reduce-at-0-then-evolve for each L outcome.

    Pipeline A evolves the singlet to T and then measures L.  Pipeline B
    applies the same reduction to the t=0 state and then evolves it.
    """
    singlet = make_singlet()
    at_T = evolve_to_T(singlet)
    report = BackdatingReport()
    joint_b: dict[tuple[str, str], float] = {}
    for b in ("0", "1"):
        a_rec = measure_photon(at_T, "L", b)
        b_rec = measure_photon(singlet, "L", b)
        b_final = evolve_to_T(b_rec.state)
        r_a = marginal(a_rec.state.polarization, 2, (1,))
        r_b = marginal(b_final.polarization, 2, (1,))
        report.branches.append(
            BackdatingBranch(
                outcome=b,
                probability_at_T=a_rec.probability,
                probability_at_0=b_rec.probability,
                max_difference=a_rec.state.max_difference(b_final),
                final_measured_at_T=a_rec.state,
                final_backdated=b_final,
                r_outcome_at_T=r_a,
                r_outcome_backdated=r_b,
            )
        )
        for r, q in r_b.items():
            joint_b[(b, r)] = b_rec.probability * q
    report.joint_measured_at_T = joint_distribution(at_T, ("L", "R"))
    report.joint_backdated = joint_b
    report.same_polarization = anticorrelation(at_T)
    lr = joint_distribution(at_T, ("L", "R"))
    rl = joint_distribution(at_T, ("R", "L"))
    report.order_invariant = all(abs(lr[k] - rl[k]) <= TOL for k in lr)
    return report
