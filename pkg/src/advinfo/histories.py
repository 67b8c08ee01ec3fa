"""Classical search with half of the oracle's choice known in advance.

A history is a pair of sharp states, before and after one computation of
delta.  Weighting every history of the full basis by a sign and summing gives
back the quantum states around the oracle call; the functions here build those
sums, count classical queries, and search sign patterns exhaustively for the
one that maximizes K/X entanglement after the oracle.
"""

from __future__ import annotations

import itertools
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ContractViolation, DegenerateSumError
from .grover import OracleSpec, QueryCounter, run_grover
from .state import (
    BasisIndex,
    RegisterLayout,
    StateVector,
    entanglement_entropy,
    joint_outcome_distribution,
)


@dataclass(frozen=True)
class AdvancedInfo:
    """Known bits of the oracle's choice.

    Bit ``i`` of ``known_mask`` (counting from the left, so ``k0`` is the
    most significant) is set when ``k_i`` is known; its value sits at the
    same position of ``known_values``.
    """

    n: int
    known_mask: int
    known_values: int

    def __post_init__(self) -> None:
        RegisterLayout(self.n)
        full = (1 << self.n) - 1
        if self.known_mask & ~full or self.known_values & ~self.known_mask:
            raise ContractViolation("known bits fall outside the register")
        if bin(self.known_mask).count("1") != self.n // 2:
            raise ContractViolation(f"exactly {self.n // 2} of {self.n} bits must be known")

    @classmethod
    def from_bits(cls, n: int, known: Mapping[int, int]) -> "AdvancedInfo":
        mask = values = 0
        for pos, bit in known.items():
            if not 0 <= pos < n or bit not in (0, 1):
                raise ContractViolation(f"bad known bit k{pos}={bit}")
            mask |= 1 << (n - 1 - pos)
            values |= bit << (n - 1 - pos)
        return cls(n, mask, values)

    @classmethod
    def parse(cls, n: int, text: str) -> "AdvancedInfo":
        """Parse ``"k0=0"`` or ``"k0=1,k2=0"``."""
        known = {}
        for part in filter(None, (p.strip() for p in text.split(","))):
            m = re.fullmatch(r"k(\d+)=([01])", part)
            if not m:
                raise ContractViolation(f"cannot parse known bit {part!r}")
            pos = int(m.group(1))
            if pos in known:
                raise ContractViolation(f"k{pos} given twice")
            known[pos] = int(m.group(2))
        return cls.from_bits(n, known)

    @property
    def known(self) -> dict[int, int]:
        return {
            i: (self.known_values >> (self.n - 1 - i)) & 1
            for i in range(self.n)
            if self.known_mask >> (self.n - 1 - i) & 1
        }

    def candidates(self) -> list[str]:
        return [
            format(k, f"0{self.n}b")
            for k in range(1 << self.n)
            if k & self.known_mask == self.known_values
        ]

    def __str__(self) -> str:
        return ",".join(f"k{i}={b}" for i, b in self.known.items()) or "(nothing known)"


def all_advanced_infos(n: int) -> list[AdvancedInfo]:
    infos = []
    for positions in itertools.combinations(range(n), n // 2):
        for bits in itertools.product((0, 1), repeat=len(positions)):
            infos.append(AdvancedInfo.from_bits(n, dict(zip(positions, bits))))
    return infos


def classical_delta_step(s_in: BasisIndex) -> BasisIndex:
    return BasisIndex(s_in.k, s_in.x, s_in.v ^ int(s_in.k == s_in.x))


@dataclass(frozen=True)
class History:
    s_in: BasisIndex
    s_out: BasisIndex

    def __post_init__(self) -> None:
        if classical_delta_step(self.s_in) != self.s_out:
            raise ContractViolation(f"{self.s_out} is not the image of {self.s_in} under delta")

    @classmethod
    def starting_at(cls, s_in: BasisIndex) -> "History":
        return cls(s_in, classical_delta_step(s_in))

    def to_record(self) -> dict:
        return {
            "initial": {"k": self.s_in.k, "x": self.s_in.x, "v": self.s_in.v},
            "after": {"k": self.s_out.k, "x": self.s_out.x, "v": self.s_out.v},
        }

    def __str__(self) -> str:
        return f"initial state {self.s_in}, state after the computation {self.s_out}"


def enumerate_histories(info: AdvancedInfo, query: str) -> list[History]:
    """Histories of one advanced-information query, ordered by k then v."""
    cands = info.candidates()
    if query not in cands:
        raise ContractViolation(f"query {query} is not a candidate under {info} (candidates {cands})")
    return [History.starting_at(BasisIndex(k, query, v)) for k in cands for v in (0, 1)]


def full_history_space(n: int) -> list[History]:
    return [History.starting_at(b) for b in RegisterLayout(n).basis_states()]


@dataclass(frozen=True)
class PhaseAssignment:
    phases: Mapping[BasisIndex, int]

    def __post_init__(self) -> None:
        bad = [b for b, s in self.phases.items() if s not in (1, -1)]
        if bad:
            raise ContractViolation(f"phases must be +1 or -1 (offending: {bad[0]})")

    def __getitem__(self, b: BasisIndex) -> int:
        return self.phases[b]

    def __contains__(self, b: object) -> bool:
        return b in self.phases


def derive_phases(n: int) -> PhaseAssignment:
    """Signs that make the input-side sum equal the uniform input state.

    Each basis state starts exactly one history, so matching the input state
    fixes every sign to ``(-1)**v`` (up to one global sign).
    """
    return PhaseAssignment({b: -1 if b.v else 1 for b in RegisterLayout(n).basis_states()})


def reconstruct(phases: PhaseAssignment, space: Sequence[History]) -> tuple[StateVector, StateVector]:
    """Normalized signed sums over the initial and final states of ``space``."""
    if not space:
        raise ContractViolation("empty history space")
    layout = RegisterLayout(space[0].s_in.n)
    starts = [h.s_in for h in space]
    if len(set(starts)) != len(starts):
        raise ContractViolation("two histories share an initial state")
    before = np.zeros(layout.dim, dtype=np.complex128)
    after = np.zeros(layout.dim, dtype=np.complex128)
    for h in space:
        if h.s_in not in phases:
            raise ContractViolation(f"no phase for history starting at {h.s_in}")
        before[layout.index(h.s_in)] += phases[h.s_in]
        after[layout.index(h.s_out)] += phases[h.s_in]
    if np.linalg.norm(before) == 0 or np.linalg.norm(after) == 0:
        raise DegenerateSumError("signed history sum vanishes")
    return StateVector(layout, before, normalize=True), StateVector(layout, after, normalize=True)


# --- exhaustive sign search ----------------------------------------------------


def sign_matrices(n: int, start: int, stop: int) -> np.ndarray:
    """Sign patterns ``start..stop-1`` as ``(count, 2^n, 2^n)`` arrays of +-1.

    Bit ``j`` of a pattern's integer code is the sign of the j-th ``(k, x)``
    pair in row-major order (k major); a set bit means -1.
    """
    size = 1 << n
    codes = np.arange(start, stop, dtype=np.int64)
    bits = (codes[:, None] >> np.arange(size * size)) & 1
    return (1 - 2 * bits).reshape(-1, size, size).astype(float)


def sign_code(signs: np.ndarray) -> int:
    flat = np.asarray(signs).reshape(-1)
    return int(sum(1 << j for j, s in enumerate(flat) if s < 0))


def k_entropies(signs: np.ndarray) -> np.ndarray:
    """Entropy of K for each ``sum sigma(k,x)|k>|x>`` (V factor is a product)."""
    sv = np.linalg.svd(signs, compute_uv=False)
    p = sv**2 / np.sum(sv**2, axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 1e-15, -p * np.log2(p), 0.0)
    return np.maximum(terms.sum(axis=-1), 0.0)


@dataclass(frozen=True)
class ChunkResult:
    max_entropy: float
    maximizers: int
    cases: int


MAX_TOL = 1e-9


def search_chunk(n: int, start: int, stop: int) -> ChunkResult:
    ent = k_entropies(sign_matrices(n, start, stop))
    top = float(ent.max())
    return ChunkResult(top, int(np.sum(ent >= top - MAX_TOL)), stop - start)


def merge_chunks(results: Iterable[ChunkResult]) -> ChunkResult:
    results = list(results)
    top = max(r.max_entropy for r in results)
    count = sum(r.maximizers for r in results if r.max_entropy >= top - MAX_TOL)
    return ChunkResult(top, count, sum(r.cases for r in results))


@dataclass
class EntanglementSearchReport:
    n: int
    cases: int
    max_entropy: float
    maximizers: int
    quantum_entropy: float
    quantum_attains_max: bool
    all_plus_entropy: float
    quantum_signs: list[list[int]] = field(default_factory=list)


def quantum_sign_pattern(n: int) -> np.ndarray:
    """Signs of the ``(k, x)`` terms after the oracle in the history sum."""
    _, after = reconstruct(derive_phases(n), full_history_space(n))
    size = 1 << n
    v0 = after.amplitudes.reshape(size, size, 2)[:, :, 0].real
    return np.sign(v0).astype(int)


def entanglement_max_search(n: int = 2, workers: int = 1, chunks: int = 16) -> EntanglementSearchReport:
    """Try every v-independent sign pattern on the post-oracle ``(k, x)`` terms.

    The 2^(4^n) patterns are split into ``chunks`` ranges, searched
    independently (in a process pool when ``workers > 1``) and merged by
    taking the maximum.
    """
    if n not in (1, 2):
        raise ContractViolation("exhaustive sign search is only tractable for n <= 2")
    total = 1 << (1 << 2 * n)
    chunks = max(1, min(chunks, total))
    bounds = [total * i // chunks for i in range(chunks + 1)]
    ranges = list(zip(bounds[:-1], bounds[1:]))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(search_chunk, [n] * len(ranges), *zip(*ranges)))
    else:
        results = [search_chunk(n, a, b) for a, b in ranges]
    merged = merge_chunks(results)

    _, after = reconstruct(derive_phases(n), full_history_space(n))
    q_entropy = entanglement_entropy(after, "K")
    q_signs = quantum_sign_pattern(n)
    return EntanglementSearchReport(
        n=n,
        cases=merged.cases,
        max_entropy=merged.max_entropy,
        maximizers=merged.maximizers,
        quantum_entropy=q_entropy,
        quantum_attains_max=q_entropy >= merged.max_entropy - MAX_TOL,
        all_plus_entropy=float(k_entropies(sign_matrices(n, 0, 1))[0]),
        quantum_signs=q_signs.tolist(),
    )


# --- classical query accounting ------------------------------------------------


@dataclass(frozen=True)
class ClassicalRunRecord:
    oracle_k: str
    strategy: str
    queries: tuple[str, ...]
    deltas: tuple[int, ...]
    solution: str
    inferred: bool

    @property
    def query_count(self) -> int:
        return len(self.queries)

    @property
    def correct(self) -> bool:
        return self.solution == self.oracle_k

    def to_record(self) -> dict:
        return {
            "oracle_k": self.oracle_k,
            "strategy": self.strategy,
            "queries": list(self.queries),
            "deltas": list(self.deltas),
            "solution": self.solution,
            "inferred": self.inferred,
            "query_count": self.query_count,
        }


def _sequential_search(order: Sequence[str], oracle_k: str, strategy: str) -> ClassicalRunRecord:
    """Query ``order`` until delta=1; the last remaining drawer is inferred."""
    delta = OracleSpec(len(oracle_k)).delta
    queries, deltas = [], []
    for i, x in enumerate(order):
        if i == len(order) - 1:
            return ClassicalRunRecord(oracle_k, strategy, tuple(queries), tuple(deltas), x, True)
        d = delta(oracle_k, x)
        queries.append(x)
        deltas.append(d)
        if d:
            return ClassicalRunRecord(oracle_k, strategy, tuple(queries), tuple(deltas), x, False)
    raise ContractViolation("empty search order")


def plain_classical_search(strategy: Sequence[str], oracle_k: str) -> ClassicalRunRecord:
    n = len(oracle_k)
    if sorted(strategy) != RegisterLayout(n).bitstrings():
        raise ContractViolation(f"strategy must be a permutation of all {1 << n} drawers")
    return _sequential_search(list(strategy), oracle_k, "plain[" + ",".join(strategy) + "]")


def advanced_classical_search(info: AdvancedInfo, oracle_k: str, query: str | None = None) -> ClassicalRunRecord:
    """Search only the candidates left by ``info``, starting with ``query``."""
    cands = info.candidates()
    if oracle_k not in cands:
        raise ContractViolation(f"oracle choice {oracle_k} contradicts {info}")
    if query is None:
        query = cands[0]
    if query not in cands:
        raise ContractViolation(f"query {query} is not a candidate under {info}")
    order = [query] + [c for c in cands if c != query]
    return _sequential_search(order, oracle_k, f"advanced[{info}]")


@dataclass
class QueryTable:
    n: int
    plain_average: Fraction
    plain_worst: int
    plain_order_independent: bool | None
    advanced: int
    advanced_average: Fraction
    quantum: int
    quantum_success: float


# permutations of more drawers than this are not enumerated
MAX_ORDER_CHECK_DRAWERS = 8


def expected_query_table(n: int) -> QueryTable:
    """Exact query counts by enumeration over every oracle choice.

    The plain average uses ascending order; when there are at most eight
    drawers every order is enumerated and checked to give the same average.
    """
    drawers = RegisterLayout(n).bitstrings()
    runs = [plain_classical_search(drawers, k) for k in drawers]
    plain_avg = Fraction(sum(r.query_count for r in runs), len(drawers))
    plain_worst = max(r.query_count for r in runs)

    order_independent = None
    if len(drawers) <= MAX_ORDER_CHECK_DRAWERS:
        order_independent = all(
            Fraction(sum(plain_classical_search(order, k).query_count for k in drawers), len(drawers)) == plain_avg
            for order in itertools.permutations(drawers)
        )

    adv_counts = [
        advanced_classical_search(info, k, q).query_count
        for info in all_advanced_infos(n)
        for q in info.candidates()
        for k in info.candidates()
    ]

    counter = QueryCounter()
    final = run_grover(n, 1, counter)
    table = joint_outcome_distribution(final, "K", "X")
    success = math.fsum(p for (k, x), p in table.items() if k == x)

    return QueryTable(
        n=n,
        plain_average=plain_avg,
        plain_worst=plain_worst,
        plain_order_independent=order_independent,
        advanced=max(adv_counts),
        advanced_average=Fraction(sum(adv_counts), len(adv_counts)),
        quantum=counter.count,
        quantum_success=success,
    )
