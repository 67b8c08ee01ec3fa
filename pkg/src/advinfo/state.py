"""Dense state vectors over the three-register system K, X, V.

K and X hold ``n`` qubits each, V holds one.  A sharp configuration is
written ``(k, x, v)`` with ``k`` and ``x`` as bitstrings.  The flat index of
a configuration is the integer whose binary expansion is ``k + x + v``, so the
first K qubit is the most significant bit and V is the least significant.
Qubits are numbered in that same left-to-right order: K is ``0..n-1``, X is
``n..2n-1`` and V is ``2n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Iterator, Mapping, Sequence, Union

import numpy as np

from .errors import ContractViolation, ImpossibleOutcomeError, SizeError

TOL = 1e-12

# 2n+1 qubits must index into a signed 64-bit word.
MAX_LAYOUT_QUBITS = 62
# Largest register count we are willing to allocate densely.
MAX_DENSE_QUBITS = 27

QubitSpec = Union[str, Sequence[int]]


@dataclass(frozen=True)
class BasisIndex:
    """One sharp configuration ``|k>_K |x>_X |v>_V``."""

    k: str
    x: str
    v: int

    def __post_init__(self) -> None:
        if len(self.k) != len(self.x) or not self.k:
            raise ContractViolation(f"k and x must be nonempty and equal length: {self.k!r}, {self.x!r}")
        if set(self.k + self.x) - {"0", "1"}:
            raise ContractViolation(f"not a bitstring: {self.k!r}, {self.x!r}")
        if self.v not in (0, 1):
            raise ContractViolation(f"v must be 0 or 1, got {self.v!r}")

    @property
    def n(self) -> int:
        return len(self.k)

    def __str__(self) -> str:
        return f"|{self.k}>_K |{self.x}>_X |{self.v}>_V"


@dataclass(frozen=True)
class RegisterLayout:
    n: int

    def __post_init__(self) -> None:
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool):
            raise SizeError(f"register size must be an integer, got {self.n!r}")
        if self.n < 1:
            raise SizeError(f"register size must be >= 1, got {self.n}")
        if 2 * self.n + 1 > MAX_LAYOUT_QUBITS:
            raise SizeError(f"2n+1 = {2 * self.n + 1} qubits overflows a 64-bit index")

    @property
    def num_qubits(self) -> int:
        return 2 * self.n + 1

    @property
    def dim(self) -> int:
        return 1 << self.num_qubits

    @property
    def k_qubits(self) -> tuple[int, ...]:
        return tuple(range(self.n))

    @property
    def x_qubits(self) -> tuple[int, ...]:
        return tuple(range(self.n, 2 * self.n))

    @property
    def v_qubit(self) -> int:
        return 2 * self.n

    def index(self, b: BasisIndex) -> int:
        if b.n != self.n:
            raise ContractViolation(f"basis state {b} does not fit layout n={self.n}")
        return int(b.k + b.x + str(b.v), 2)

    def basis(self, i: int) -> BasisIndex:
        if not 0 <= i < self.dim:
            raise ContractViolation(f"index {i} out of range for dimension {self.dim}")
        bits = format(i, f"0{self.num_qubits}b")
        return BasisIndex(bits[: self.n], bits[self.n : 2 * self.n], int(bits[-1]))

    def basis_states(self) -> Iterator[BasisIndex]:
        for i in range(self.dim):
            yield self.basis(i)

    def bitstrings(self) -> list[str]:
        """All register values ``0...0`` to ``1...1`` in ascending order."""
        return [format(i, f"0{self.n}b") for i in range(1 << self.n)]

    def qubits(self, spec: QubitSpec) -> tuple[int, ...]:
        """Resolve ``"K"``, ``"X"``, ``"V"`` or an explicit qubit list."""
        if isinstance(spec, str):
            named = {"K": self.k_qubits, "X": self.x_qubits, "V": (self.v_qubit,)}
            if spec in named:
                return named[spec]
            if set(spec) <= set("KXV") and spec:
                return tuple(q for c in spec for q in named[c])
            raise ContractViolation(f"unknown subsystem {spec!r}")
        qs = tuple(int(q) for q in spec)
        if len(set(qs)) != len(qs):
            raise ContractViolation(f"repeated qubit in {qs}")
        if any(not 0 <= q < self.num_qubits for q in qs):
            raise ContractViolation(f"qubit out of range in {qs}")
        return qs


def _as_layout(n_or_layout: int | RegisterLayout) -> RegisterLayout:
    if isinstance(n_or_layout, RegisterLayout):
        return n_or_layout
    return RegisterLayout(n_or_layout)


def _check_dense(layout: RegisterLayout) -> None:
    if layout.num_qubits > MAX_DENSE_QUBITS:
        raise SizeError(f"{layout.num_qubits} qubits is beyond the dense limit of {MAX_DENSE_QUBITS}")


class StateVector:
    """Normalized, immutable amplitude vector for a :class:`RegisterLayout`."""

    __slots__ = ("layout", "amplitudes")

    def __init__(self, layout: RegisterLayout, amplitudes: Any, *, normalize: bool = False):
        _check_dense(layout)
        amps = np.array(amplitudes, dtype=np.complex128).reshape(-1)
        if amps.shape != (layout.dim,):
            raise ContractViolation(f"expected {layout.dim} amplitudes, got {amps.shape[0]}")
        norm = float(np.linalg.norm(amps))
        if normalize:
            if norm <= TOL:
                raise ContractViolation("cannot normalize the zero vector")
            amps = amps / norm
        elif abs(norm - 1.0) > TOL:
            raise ContractViolation(f"state is not normalized (norm={norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "layout", layout)
        object.__setattr__(self, "amplitudes", amps)

    def __setattr__(self, name: str, value: Any) -> None:
        raise AttributeError("StateVector is immutable")

    def __repr__(self) -> str:
        return f"StateVector(n={self.layout.n}, terms={len(self.to_records())})"

    @property
    def n(self) -> int:
        return self.layout.n

    def amplitude(self, k: str, x: str, v: int) -> complex:
        return complex(self.amplitudes[self.layout.index(BasisIndex(k, x, v))])

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def max_difference(self, other: "StateVector") -> float:
        if other.layout != self.layout:
            raise ContractViolation("layouts differ")
        return float(np.max(np.abs(self.amplitudes - other.amplitudes)))

    def allclose(self, other: "StateVector", tol: float = TOL) -> bool:
        return self.max_difference(other) <= tol

    def to_records(self, tol: float = TOL) -> list[dict]:
        """Nonzero terms as ``{k, x, v, re, im}`` records in index order."""
        records = []
        for i in np.flatnonzero(np.abs(self.amplitudes) >= tol):
            b = self.layout.basis(int(i))
            a = self.amplitudes[i]
            records.append({"k": b.k, "x": b.x, "v": b.v, "re": float(a.real), "im": float(a.imag)})
        return records

    @classmethod
    def from_records(cls, n: int | RegisterLayout, records: Iterable[Mapping]) -> "StateVector":
        layout = _as_layout(n)
        amps = np.zeros(layout.dim, dtype=np.complex128)
        for r in records:
            amps[layout.index(BasisIndex(r["k"], r["x"], int(r["v"])))] = complex(r["re"], r["im"])
        return cls(layout, amps)


def sharp_state(layout: RegisterLayout, b: BasisIndex) -> StateVector:
    amps = np.zeros(layout.dim, dtype=np.complex128)
    amps[layout.index(b)] = 1.0
    return StateVector(layout, amps)


def make_uniform_input(n: int) -> StateVector:
    """Even superposition over K and X with V in ``(|0> - |1>)/sqrt(2)``."""
    layout = _as_layout(n)
    _check_dense(layout)
    amps = np.full(layout.dim, 1.0 / ((1 << layout.n) * math.sqrt(2)), dtype=np.complex128)
    amps[1::2] *= -1  # v is the lowest bit
    return StateVector(layout, amps)


class BasisMap:
    """A signed permutation of basis states: ``|b> -> sign(b) |target(b)>``."""

    def __init__(self, layout: RegisterLayout, targets: Sequence[int], signs: Sequence[int], name: str = ""):
        t = np.asarray(targets, dtype=np.int64)
        s = np.asarray(signs, dtype=np.int8)
        if t.shape != (layout.dim,) or s.shape != (layout.dim,):
            raise ContractViolation("basis map must be defined on every basis state")
        if not np.array_equal(np.sort(t), np.arange(layout.dim)):
            raise ContractViolation(f"basis map {name!r} is not a bijection")
        if not np.all(np.abs(s) == 1):
            raise ContractViolation(f"basis map {name!r} has a phase outside {{+1, -1}}")
        t.setflags(write=False)
        s.setflags(write=False)
        self.layout = layout
        self.targets = t
        self.signs = s
        self.name = name

    @classmethod
    def from_function(
        cls,
        layout: RegisterLayout,
        fn: Callable[[BasisIndex], BasisIndex | tuple[BasisIndex, int]],
        name: str = "",
    ) -> "BasisMap":
        targets, signs = [], []
        for b in layout.basis_states():
            out = fn(b)
            sign = 1
            if isinstance(out, tuple):
                out, sign = out
            targets.append(layout.index(out))
            signs.append(sign)
        return cls(layout, targets, signs, name)

    @classmethod
    def identity(cls, layout: RegisterLayout) -> "BasisMap":
        return cls(layout, np.arange(layout.dim), np.ones(layout.dim), "identity")

    def image(self, b: BasisIndex) -> tuple[BasisIndex, int]:
        i = self.layout.index(b)
        return self.layout.basis(int(self.targets[i])), int(self.signs[i])

    def apply_array(self, amps: np.ndarray) -> np.ndarray:
        out = np.empty_like(amps)
        out[self.targets] = self.signs * amps
        return out

    def __call__(self, state: StateVector) -> StateVector:
        return apply_basis_map(state, self)

    def __repr__(self) -> str:
        return f"BasisMap({self.name!r}, n={self.layout.n})"


def apply_basis_map(state: StateVector, mapping: BasisMap | Callable | Mapping) -> StateVector:
    """Apply a signed basis permutation.

    ``mapping`` may be a :class:`BasisMap`, a function from
    :class:`BasisIndex` to ``BasisIndex`` or ``(BasisIndex, sign)``, or a dict
    with the same values (missing keys map to themselves).
    """
    if isinstance(mapping, Mapping):
        table = mapping
        mapping = BasisMap.from_function(state.layout, lambda b: table.get(b, b))
    elif not isinstance(mapping, BasisMap):
        mapping = BasisMap.from_function(state.layout, mapping)
    if mapping.layout != state.layout:
        raise ContractViolation("basis map and state have different layouts")
    return StateVector(state.layout, mapping.apply_array(state.amplitudes))


# --- measurement primitives on raw amplitude arrays -------------------------
#
# These work for any qubit count so the two-photon model can share them.


def _probability_tensor(amps: np.ndarray, num_qubits: int) -> np.ndarray:
    return (np.abs(amps) ** 2).reshape((2,) * num_qubits)


def marginal(amps: np.ndarray, num_qubits: int, qubits: Sequence[int]) -> dict[str, float]:
    """Born-rule distribution of ``qubits`` (in the given order)."""
    probs = _probability_tensor(amps, num_qubits)
    others = tuple(q for q in range(num_qubits) if q not in qubits)
    reduced = probs.sum(axis=others) if others else probs
    # sum() keeps the surviving axes in ascending qubit order
    reduced = np.transpose(reduced, np.argsort(np.argsort(qubits)))
    flat = reduced.reshape(-1)
    width = len(qubits)
    return {format(i, f"0{width}b"): float(p) for i, p in enumerate(flat)}


def project(amps: np.ndarray, num_qubits: int, qubits: Sequence[int], outcome: str) -> tuple[float, np.ndarray]:
    """Probability of ``outcome`` and the renormalized projected amplitudes."""
    if len(outcome) != len(qubits) or set(outcome) - {"0", "1"}:
        raise ContractViolation(f"outcome {outcome!r} does not match {len(qubits)} qubits")
    tensor = amps.reshape((2,) * num_qubits).copy()
    mask = np.ones((2,) * num_qubits, dtype=bool)
    for q, bit in zip(qubits, outcome):
        idx = [slice(None)] * num_qubits
        idx[q] = 1 - int(bit)
        mask[tuple(idx)] = False
    tensor[~mask] = 0
    flat = tensor.reshape(-1)
    prob = float(np.sum(np.abs(flat) ** 2))
    if prob <= TOL:
        raise ImpossibleOutcomeError(f"outcome {outcome!r} on qubits {tuple(qubits)} has probability {prob:.3g}")
    return prob, flat / math.sqrt(prob)


def sample_outcome(distribution: Mapping[str, float], seed: int) -> str:
    """Draw one outcome; only outcomes above the tolerance are eligible."""
    outcomes = sorted(o for o, p in distribution.items() if p > TOL)
    weights = np.array([distribution[o] for o in outcomes])
    rng = np.random.default_rng(seed)
    return outcomes[int(rng.choice(len(outcomes), p=weights / weights.sum()))]


@dataclass(frozen=True)
class MeasurementRecord:
    qubits: tuple[int, ...]
    outcome: str
    probability: float
    state: Any
    mode: str = "forced"


def measure(state: StateVector, qubits: QubitSpec, outcome: str | None = None, seed: int | None = None) -> MeasurementRecord:
    """Projective computational-basis measurement.

    With ``outcome`` given the result is forced (and must be possible);
    otherwise it is sampled from the Born distribution using ``seed``.
    """
    qs = state.layout.qubits(qubits)
    nq = state.layout.num_qubits
    mode = "forced"
    if outcome is None:
        outcome = sample_outcome(marginal(state.amplitudes, nq, qs), 0 if seed is None else seed)
        mode = "sampled"
    prob, post = project(state.amplitudes, nq, qs, outcome)
    return MeasurementRecord(qs, outcome, prob, StateVector(state.layout, post, normalize=True), mode)


def _check_disjoint(sets: Sequence[tuple[int, ...]]) -> None:
    if not sets or any(len(s) == 0 for s in sets):
        raise ContractViolation("need at least one nonempty qubit set")
    flat = [q for s in sets for q in s]
    if len(set(flat)) != len(flat):
        raise ContractViolation("qubit sets overlap")


def sequential_distribution(amps: np.ndarray, num_qubits: int, sets: Sequence[tuple[int, ...]]) -> dict[tuple[str, ...], float]:
    """Joint outcome table from measuring ``sets`` one after another.

    Each later set is measured on the state reduced by the earlier
    outcomes, so the table reflects the given order of measurement.
    """
    _check_disjoint(sets)
    first, rest = sets[0], sets[1:]
    table: dict[tuple[str, ...], float] = {}
    for outcome, p in marginal(amps, num_qubits, first).items():
        if not rest:
            table[(outcome,)] = p
            continue
        if p <= TOL:
            for tail in _all_outcomes(rest):
                table[(outcome, *tail)] = 0.0
            continue
        _, post = project(amps, num_qubits, first, outcome)
        for tail, q in sequential_distribution(post, num_qubits, rest).items():
            table[(outcome, *tail)] = p * q
    return table


def _all_outcomes(sets: Sequence[tuple[int, ...]]) -> list[tuple[str, ...]]:
    out: list[tuple[str, ...]] = [()]
    for s in sets:
        out = [t + (format(i, f"0{len(s)}b"),) for t in out for i in range(1 << len(s))]
    return out


def joint_outcome_distribution(state: StateVector, *qubit_sets: QubitSpec) -> dict[tuple[str, ...], float]:
    """Exact table ``(outcome of set 1, outcome of set 2, ...) -> probability``."""
    sets = [state.layout.qubits(s) for s in qubit_sets]
    return sequential_distribution(state.amplitudes, state.layout.num_qubits, sets)


def permute_table(table: Mapping[tuple[str, ...], float], order: Sequence[int]) -> dict[tuple[str, ...], float]:
    """Reorder the key tuples of an outcome table, e.g. ``(x, k) -> (k, x)``."""
    return {tuple(key[i] for i in order): p for key, p in table.items()}


# --- reduced states ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ReducedDensity:
    label: str
    qubits: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = self.matrix
        if abs(np.trace(m) - 1) > TOL:
            raise ContractViolation(f"reduced density has trace {np.trace(m)}")
        if np.max(np.abs(m - m.conj().T)) > TOL:
            raise ContractViolation("reduced density is not Hermitian")
        if np.min(np.linalg.eigvalsh(m)) < -TOL:
            raise ContractViolation("reduced density has a negative eigenvalue")

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def entropy(self) -> float:
        return von_neumann_entropy(self.eigenvalues())

    def rank(self, tol: float = 1e-9) -> int:
        return int(np.sum(self.eigenvalues() > tol))


def von_neumann_entropy(eigenvalues: np.ndarray) -> float:
    """Base-2 entropy of a spectrum; eigenvalues below 1e-15 count as zero."""
    lam = np.asarray(eigenvalues, dtype=float)
    lam = lam[lam > 1e-15]
    return max(0.0, float(-np.sum(lam * np.log2(lam))))


def reduced_matrix(amps: np.ndarray, num_qubits: int, keep: Sequence[int]) -> np.ndarray:
    rest = [q for q in range(num_qubits) if q not in keep]
    psi = np.transpose(amps.reshape((2,) * num_qubits), list(keep) + rest)
    psi = psi.reshape(1 << len(keep), -1)
    return psi @ psi.conj().T


def partial_trace(state: StateVector, keep: QubitSpec) -> ReducedDensity:
    """Reduced density matrix of ``keep`` with everything else traced out."""
    qs = state.layout.qubits(keep)
    if not qs or len(qs) == state.layout.num_qubits:
        raise ContractViolation("subsystem must be a nonempty proper subset")
    label = keep if isinstance(keep, str) else ",".join(map(str, qs))
    return ReducedDensity(label, qs, reduced_matrix(state.amplitudes, state.layout.num_qubits, qs))


def entanglement_entropy(state: StateVector, part: QubitSpec = "K") -> float:
    """Entropy in bits of ``part`` against the rest of the system."""
    return partial_trace(state, part).entropy()
