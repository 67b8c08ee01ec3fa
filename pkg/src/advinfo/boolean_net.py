"""The N=4 search problem as a Boolean network.

``delta = AND(y0, y1)`` with ``y_i = NOT XOR(k_i, x_i)``; satisfying the
network means finding x equal to k.  One classical trial is one evaluation of
all three gates, i.e. one oracle query.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import ContractViolation
from .state import TOL, StateVector, joint_outcome_distribution, measure

VARIABLES = ("k0", "k1", "x0", "x1")
X_VALUES = ("00", "01", "10", "11")


@dataclass(frozen=True)
class NetworkAssignment:
    k0: int
    k1: int
    x0: int
    x1: int
    y0: int
    y1: int
    delta: int

    @property
    def k(self) -> str:
        return f"{self.k0}{self.k1}"

    @property
    def x(self) -> str:
        return f"{self.x0}{self.x1}"

    def to_record(self) -> dict:
        return asdict(self)


def _xnor(a: int, b: int) -> int:
    return 1 - (a ^ b)


def eval_network(k0: int, k1: int, x0: int, x1: int) -> NetworkAssignment:
    for name, bit in zip(VARIABLES, (k0, k1, x0, x1)):
        if bit not in (0, 1):
            raise ContractViolation(f"{name} must be 0 or 1, got {bit!r}")
    y0 = _xnor(k0, x0)
    y1 = _xnor(k1, x1)
    return NetworkAssignment(k0, k1, x0, x1, y0, y1, y0 & y1)


def eval_network_general(k: str, x: str) -> int:
    """AND of bitwise XNORs for registers of any width."""
    if len(k) != len(x):
        raise ContractViolation("k and x must have equal length")
    return int(all(_xnor(int(a), int(b)) for a, b in zip(k, x)))


def satisfying_assignments(fixed: Mapping[str, int] | None = None) -> list[NetworkAssignment]:
    """Every completion of ``fixed`` for which ``delta = 1``."""
    fixed = dict(fixed or {})
    unknown = set(fixed) - set(VARIABLES)
    if unknown:
        raise ContractViolation(f"unknown network variables {sorted(unknown)}")
    out = []
    for bits in itertools.product((0, 1), repeat=4):
        values = dict(zip(VARIABLES, bits))
        if any(values[name] != bit for name, bit in fixed.items()):
            continue
        a = eval_network(*bits)
        if a.delta:
            out.append(a)
    return out


def fixed_k(k: str) -> dict[str, int]:
    if len(k) != 2 or set(k) - {"0", "1"}:
        raise ContractViolation(f"k must be a 2-bit string, got {k!r}")
    return {"k0": int(k[0]), "k1": int(k[1])}


def trials_to_satisfy(k: str, order: Sequence[str]) -> int:
    """Trials with ``order`` until delta=1, the last x being inferred untried."""
    for i, x in enumerate(order):
        if i == len(order) - 1:
            return i
        if eval_network(int(k[0]), int(k[1]), int(x[0]), int(x[1])).delta:
            return i + 1
    raise ContractViolation("empty trial order")


@dataclass(frozen=True)
class TrialCount:
    expected: Fraction
    worst: int
    counts: tuple[int, ...]


def classical_trial_count(k: str | None = None, order: Sequence[str] | None = None) -> TrialCount:
    """Exact trial statistics for satisfying the network classically.

    ``k`` fixes the oracle's choice (otherwise it is uniform over all four);
    ``order`` fixes the trial order (otherwise every one of the 24 orders is
    equally likely).
    """
    if order is not None and sorted(order) != list(X_VALUES):
        raise ContractViolation("trial order must be a permutation of 00, 01, 10, 11")
    ks = [k] if k is not None else list(X_VALUES)
    if k is not None:
        fixed_k(k)
    orders = [tuple(order)] if order is not None else list(itertools.permutations(X_VALUES))
    counts = tuple(trials_to_satisfy(kk, o) for kk in ks for o in orders)
    return TrialCount(Fraction(sum(counts), len(counts)), max(counts), counts)


@dataclass
class SatisfactionReport:
    mass_on_solutions: float
    support: list[tuple[str, str]]
    distribution: dict[tuple[str, str], float]

    @property
    def support_size(self) -> int:
        return len(self.support)

    @property
    def definite(self) -> bool:
        return self.support_size == 1


def verify_quantum_satisfaction(state: StateVector) -> SatisfactionReport:
    """Exact probability that measuring K and X lands on a network solution."""
    if state.n != 2:
        raise ContractViolation("the Boolean network is defined for two-bit registers")
    table = joint_outcome_distribution(state, "K", "X")
    mass = sum(p for (k, x), p in table.items() if eval_network_general(k, x))
    support = sorted(key for key, p in table.items() if p > TOL)
    return SatisfactionReport(mass, support, table)


@dataclass
class DefiniteOutcomeReport:
    seeds: int
    sampled_outcomes: list[str]
    support: list[str]

    @property
    def definite(self) -> bool:
        return len(self.support) == 1 and set(self.sampled_outcomes) == set(self.support)


def definite_outcome_check(state: StateVector, register: str = "X", seeds: Iterable[int] = range(64)) -> DefiniteOutcomeReport:
    """Sample ``register`` with many seeds through the ordinary Born sampler.

    The outcome comes out the same every time only because the exact
    distribution has a single point of support; nothing bypasses the sampler.
    """
    seeds = list(seeds)
    outcomes = [measure(state, register, seed=s).outcome for s in seeds]
    table = joint_outcome_distribution(state, register)
    support = sorted(key[0] for key, p in table.items() if p > TOL)
    return DefiniteOutcomeReport(len(seeds), outcomes, support)
