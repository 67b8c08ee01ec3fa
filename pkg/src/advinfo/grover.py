"""Grover search over the K, X, V registers.

The oracle computes the Kronecker function of K and X and adds it modulo 2
into V.  The rotation of X after the oracle is the usual inversion about the
mean, acting on X alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ContractViolation
from .state import (
    TOL,
    BasisIndex,
    BasisMap,
    RegisterLayout,
    StateVector,
    apply_basis_map,
    make_uniform_input,
    sharp_state,
)


@dataclass(frozen=True)
class OracleSpec:
    n: int

    def delta(self, k: str, x: str) -> int:
        if len(k) != self.n or len(x) != self.n:
            raise ContractViolation(f"delta expects {self.n}-bit arguments, got {k!r}, {x!r}")
        return int(k == x)


class QueryCounter:
    """Number of oracle evaluations made so far.  Only ever goes up."""

    def __init__(self) -> None:
        self._count = 0

    @property
    def count(self) -> int:
        return self._count

    def increment(self, by: int = 1) -> None:
        if by < 0:
            raise ContractViolation("query counter cannot decrease")
        self._count += by

    def __repr__(self) -> str:
        return f"QueryCounter({self._count})"


def oracle_map(n: int) -> BasisMap:
    """``|k, x, v> -> |k, x, v XOR delta(k, x)>`` as a basis permutation."""
    layout = RegisterLayout(n)
    spec = OracleSpec(n)
    return BasisMap.from_function(
        layout, lambda b: BasisIndex(b.k, b.x, b.v ^ spec.delta(b.k, b.x)), name="oracle"
    )


def oracle_apply(state: StateVector, counter: QueryCounter | None = None) -> StateVector:
    out = apply_basis_map(state, oracle_map(state.n))
    if counter is not None:
        counter.increment()
    return out


def diffusion_matrix(n: int) -> np.ndarray:
    """``2|s><s| - I`` on a single n-qubit register."""
    size = 1 << n
    return np.full((size, size), 2.0 / size) - np.eye(size)


def diffusion_apply(state: StateVector) -> StateVector:
    """Inversion about the mean on register X; K and V are untouched."""
    size = 1 << state.n
    amps = state.amplitudes.reshape(size, size, 2)
    mean = amps.mean(axis=1, keepdims=True)
    return StateVector(state.layout, (2 * mean - amps).reshape(-1), normalize=True)


@dataclass(frozen=True)
class Stage:
    name: str
    op: BasisMap | Callable[[StateVector], StateVector]
    queries: int = 0

    def apply(self, state: StateVector) -> StateVector:
        if isinstance(self.op, BasisMap):
            return apply_basis_map(state, self.op)
        return self.op(state)


def grover_pipeline(n: int, iterations: int = 1) -> list[Stage]:
    if iterations < 1:
        raise ContractViolation("need at least one iteration")
    oracle = oracle_map(n)
    stages = []
    for _ in range(iterations):
        stages.append(Stage("oracle", oracle, queries=1))
        stages.append(Stage("diffusion_X", diffusion_apply))
    return stages


def run_pipeline(stages: Sequence[Stage], state: StateVector, counter: QueryCounter | None = None) -> StateVector:
    for stage in stages:
        state = stage.apply(state)
        if counter is not None and stage.queries:
            counter.increment(stage.queries)
    return state


def run_grover(n: int, iterations: int = 1, counter: QueryCounter | None = None) -> StateVector:
    """Prepare the uniform input and run ``iterations`` oracle+diffusion rounds."""
    if iterations < 1:
        raise ContractViolation("need at least one iteration")
    state = make_uniform_input(n)
    for _ in range(iterations):
        state = oracle_apply(state, counter)
        state = diffusion_apply(state)
    return state


def swap_kx_map(n: int) -> BasisMap:
    """Exchange the contents of K and X.  Deliberately alters K."""
    return BasisMap.from_function(RegisterLayout(n), lambda b: BasisIndex(b.x, b.k, b.v), name="swap_KX")


@dataclass
class InvarianceReport:
    invariant: bool
    checked: int
    violations: list[str] = field(default_factory=list)


def k_register_invariance_check(stages: Sequence[Stage], n: int) -> InvarianceReport:
    """Check that no stage moves amplitude between different values of k.

    Basis maps are inspected directly; other stages are applied to every
    sharp basis state and the support of the image is checked.
    """
    layout = RegisterLayout(n)
    violations = []
    checked = 0
    for stage in stages:
        for b in layout.basis_states():
            checked += 1
            if isinstance(stage.op, BasisMap):
                images = [stage.op.image(b)[0]]
            else:
                out = stage.apply(sharp_state(layout, b))
                images = [layout.basis(int(i)) for i in np.flatnonzero(np.abs(out.amplitudes) > TOL)]
            for img in images:
                if img.k != b.k:
                    violations.append(f"{stage.name}: {b} -> {img}")
    return InvarianceReport(not violations, checked, violations)
