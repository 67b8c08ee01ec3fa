"""Command-line front end.

Every subcommand builds a :class:`~advinfo.report.Report`; ``--format json``
prints it as one JSON document, ``--format text`` prints a reading in ket
notation.  Exit status is 0 when all checks pass, 1 when a check fails and 2
on usage errors.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from typing import Callable, Sequence

from . import __version__
from .boolean_net import (
    X_VALUES,
    classical_trial_count,
    definite_outcome_check,
    fixed_k,
    satisfying_assignments,
    verify_quantum_satisfaction,
)
from .epr import backdating_equivalence_check, evolve_to_T, make_singlet, measure_photon
from .errors import AdvinfoError, ContractViolation
from .grover import QueryCounter, oracle_apply, run_grover
from .histories import (
    AdvancedInfo,
    advanced_classical_search,
    derive_phases,
    entanglement_max_search,
    enumerate_histories,
    expected_query_table,
    full_history_space,
    reconstruct,
)
from .report import Report, exact, table_records
from .state import TOL, joint_outcome_distribution, make_uniform_input, measure

MAX_GROVER_N = 10
MAX_PHASES_N = 3
MAX_QUERYCOUNT_N = 3


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    n: int = 2
    oracle_k: str | None = None
    known_bit: str | None = None
    query: str | None = None
    fixed_k: str | None = None
    sample: bool = False
    seed: int = 0
    output_format: str = "text"
    iterations: int = 1
    workers: int = 1

    def bits(self, value: str | None, what: str, width: int | None = None) -> str | None:
        width = self.n if width is None else width
        if value is not None and (len(value) != width or set(value) - {"0", "1"}):
            raise UsageError(f"{what} must be a {width}-bit string, got {value!r}")
        return value


def _config(args: argparse.Namespace) -> RunConfig:
    fields = RunConfig.__dataclass_fields__
    cfg = RunConfig(**{k: v for k, v in vars(args).items() if k in fields})
    if cfg.n < 1:
        raise UsageError("--n must be at least 1")
    if cfg.seed < 0:
        raise UsageError("--seed must be a nonnegative integer")
    return cfg


def _ket(rec: dict) -> str:
    return f"|{rec['k']}>_K |{rec['x']}>_X |{rec['v']}>_V"


def _fmt_amp(re: float, im: float) -> str:
    if abs(im) < TOL:
        return f"{re:+.6f}"
    return f"({re:+.6f}{im:+.6f}j)"


# --- scenarios ---------------------------------------------------------------


def cmd_grover(cfg: RunConfig) -> Report:
    if cfg.n > MAX_GROVER_N:
        raise UsageError(f"--n must be <= {MAX_GROVER_N} for grover")
    if cfg.iterations < 1:
        raise UsageError("--iterations must be >= 1")
    cfg.bits(cfg.oracle_k, "--oracle-k")
    counter = QueryCounter()
    final = run_grover(cfg.n, cfg.iterations, counter)
    table = joint_outcome_distribution(final, "K", "X")
    success = math.fsum(p for (k, x), p in table.items() if k == x)
    results = {
        "final_state": final.to_records(),
        "queries": counter.count,
        "joint_KX": table_records(table, ("k", "x"), TOL),
        "success_probability": success,
    }
    checks = {"normalized": abs(final.norm() - 1) <= TOL}
    if cfg.n <= 2 and cfg.iterations == 1:
        checks["k_x_perfectly_correlated"] = abs(success - 1) <= TOL

    if cfg.oracle_k is not None or cfg.sample:
        k_rec = measure(final, "K", outcome=cfg.oracle_k, seed=cfg.seed)
        x_rec = measure(k_rec.state, "X", seed=cfg.seed)
        results["measure_K"] = {"outcome": k_rec.outcome, "probability": k_rec.probability, "mode": k_rec.mode}
        results["reduced_state"] = k_rec.state.to_records()
        results["measure_X"] = {"outcome": x_rec.outcome, "probability": x_rec.probability, "mode": x_rec.mode}
        results["solution"] = x_rec.outcome
        if cfg.n <= 2 and cfg.iterations == 1:
            checks["solution_equals_k"] = x_rec.outcome == k_rec.outcome and abs(x_rec.probability - 1) <= TOL
    inputs = {"n": cfg.n, "iterations": cfg.iterations, "oracle_k": cfg.oracle_k, "sample": cfg.sample, "seed": cfg.seed}
    return Report("grover", inputs, results, checks)


def cmd_histories(cfg: RunConfig) -> Report:
    if cfg.known_bit is None:
        raise UsageError("--known-bit is required, e.g. --known-bit k0=0")
    try:
        info = AdvancedInfo.parse(cfg.n, cfg.known_bit)
    except ContractViolation as exc:
        raise UsageError(str(exc)) from None
    query = cfg.bits(cfg.query, "--query") or info.candidates()[0]
    if query not in info.candidates():
        raise UsageError(f"--query {query} is not a candidate under {info}; candidates are {info.candidates()}")
    histories = enumerate_histories(info, query)
    runs = [advanced_classical_search(info, k, query) for k in info.candidates()]
    results = {
        "candidates": info.candidates(),
        "histories": [h.to_record() for h in histories],
        "runs": [r.to_record() for r in runs],
    }
    checks = {
        "histories_consistent": all(h.s_in.k == h.s_out.k and h.s_in.x == h.s_out.x for h in histories),
        "runs_correct": all(r.correct for r in runs),
    }
    if cfg.n == 2:
        checks["one_query_each"] = all(r.query_count == 1 for r in runs)
    return Report("histories", {"n": cfg.n, "known_bit": str(info), "query": query}, results, checks)


def cmd_phases(cfg: RunConfig) -> Report:
    if cfg.n > MAX_PHASES_N:
        raise UsageError(f"--n must be <= {MAX_PHASES_N} for phases (reconstruction limit)")
    before, after = reconstruct(derive_phases(cfg.n), full_history_space(cfg.n))
    expected_in = make_uniform_input(cfg.n)
    expected_out = oracle_apply(expected_in)
    d_in = before.max_difference(expected_in)
    d_out = after.max_difference(expected_out)
    search = entanglement_max_search(2, workers=cfg.workers)
    results = {
        "reconstruction": {
            "histories": 1 << (2 * cfg.n + 1),
            "input_max_difference": d_in,
            "output_max_difference": d_out,
            "output_state": after.to_records(),
        },
        "entanglement_search": {
            "n": search.n,
            "cases": search.cases,
            "max_entropy_bits": search.max_entropy,
            "maximizers": search.maximizers,
            "quantum_entropy_bits": search.quantum_entropy,
            "quantum_attains_max": search.quantum_attains_max,
            "all_plus_entropy_bits": search.all_plus_entropy,
            "quantum_signs": search.quantum_signs,
        },
    }
    checks = {
        "reconstruction_input": d_in <= TOL,
        "reconstruction_output": d_out <= TOL,
        "quantum_attains_max": search.quantum_attains_max,
    }
    return Report("phases", {"n": cfg.n, "search_n": 2, "workers": cfg.workers}, results, checks)


def cmd_querycount(cfg: RunConfig) -> Report:
    if cfg.n > MAX_QUERYCOUNT_N:
        raise UsageError(f"--n must be <= {MAX_QUERYCOUNT_N} for querycount")
    t = expected_query_table(cfg.n)
    results = {
        "plain_average": exact(t.plain_average),
        "plain_worst": t.plain_worst,
        "plain_order_independent": t.plain_order_independent,
        "advanced": t.advanced,
        "advanced_average": exact(t.advanced_average),
        "quantum": t.quantum,
        "quantum_success_probability": t.quantum_success,
    }
    checks = {}
    if t.plain_order_independent is not None:
        checks["plain_order_independent"] = t.plain_order_independent
    return Report("querycount", {"n": cfg.n}, results, checks)


def cmd_boolean(cfg: RunConfig) -> Report:
    if cfg.n != 2:
        raise UsageError("the Boolean network is defined for --n 2 only")
    cfg.bits(cfg.fixed_k, "--fixed-k", 2)
    fixed = fixed_k(cfg.fixed_k) if cfg.fixed_k else None
    sols = satisfying_assignments(fixed)
    ascending = classical_trial_count(cfg.fixed_k, X_VALUES)
    all_orders = classical_trial_count(cfg.fixed_k)
    output = run_grover(2, 1)
    sat_out = verify_quantum_satisfaction(output)
    results = {
        "satisfying": [s.to_record() for s in sols],
        "trials_ascending": {"expected": exact(ascending.expected), "worst": ascending.worst},
        "trials_all_orders": {"expected": exact(all_orders.expected), "worst": all_orders.worst},
        "output_state": {
            "mass_on_solutions": sat_out.mass_on_solutions,
            "support_size": sat_out.support_size,
        },
    }
    checks = {"output_mass_one": abs(sat_out.mass_on_solutions - 1) <= TOL}
    if cfg.fixed_k:
        reduced = measure(output, "K", outcome=cfg.fixed_k).state
        sat_red = verify_quantum_satisfaction(reduced)
        definite = definite_outcome_check(reduced, "X", range(cfg.seed, cfg.seed + 64))
        results["reduced_state"] = {
            "mass_on_solutions": sat_red.mass_on_solutions,
            "support": [list(s) for s in sat_red.support],
        }
        results["definite_outcome"] = {
            "seeds": definite.seeds,
            "distinct_sampled": sorted(set(definite.sampled_outcomes)),
            "support": definite.support,
        }
        checks["one_solution"] = len(sols) == 1 and sols[0].x == cfg.fixed_k
        checks["definite_outcome"] = definite.definite and definite.support == [cfg.fixed_k]
    else:
        checks["solutions_are_x_equals_k"] = len(sols) == 4 and all(s.x == s.k for s in sols)
    return Report("boolean", {"fixed_k": cfg.fixed_k, "seed": cfg.seed}, results, checks)


def cmd_epr(cfg: RunConfig) -> Report:
    rep = backdating_equivalence_check()
    singlet = make_singlet()
    sampled = measure_photon(evolve_to_T(singlet), "L", seed=cfg.seed)
    partner = measure_photon(sampled.state, "R", seed=cfg.seed)
    results = {
        "singlet": singlet.to_records(),
        "joint_measured_at_T": table_records(rep.joint_measured_at_T, ("L", "R")),
        "joint_backdated": table_records(rep.joint_backdated, ("L", "R")),
        "same_polarization_probability": rep.same_polarization,
        "branches": [
            {
                "L": b.outcome,
                "probability": b.probability_at_T,
                "max_difference": b.max_difference,
                "final_state": b.final_backdated.to_records(),
            }
            for b in rep.branches
        ],
        "sampled": {"L": sampled.outcome, "R": partner.outcome, "R_probability": partner.probability},
    }
    checks = {
        "anticorrelation": rep.same_polarization == 0.0,
        "order_invariant": rep.order_invariant,
        "backdating_amplitudes_equal": all(b.equal for b in rep.branches),
        "backdating_distributions_equal": rep.distributions_equal,
    }
    return Report("epr", {"seed": cfg.seed}, results, checks)


COMMANDS: dict[str, Callable[[RunConfig], Report]] = {
    "grover": cmd_grover,
    "histories": cmd_histories,
    "phases": cmd_phases,
    "querycount": cmd_querycount,
    "boolean": cmd_boolean,
    "epr": cmd_epr,
}


# --- text rendering ------------------------------------------------------------


def _render_state(records: list[dict], indent: str = "  ") -> list[str]:
    return [f"{indent}{_fmt_amp(r['re'], r['im'])} {_ket(r)}" for r in records]


def render_text(report: Report) -> str:
    r = report.results
    lines = [f"[{report.scenario}] " + " ".join(f"{k}={v}" for k, v in report.inputs.items() if v is not None)]
    if report.scenario == "grover":
        lines.append(f"oracle queries: {r['queries']}")
        lines.append("final state:")
        lines += _render_state(r["final_state"])
        lines.append("joint distribution of (K, X):")
        lines += [f"  |{e['k']}>_K |{e['x']}>_X  p={e['p']:.6f}" for e in r["joint_KX"]]
        if "measure_K" in r:
            mk, mx = r["measure_K"], r["measure_X"]
            lines.append(f"measure K ({mk['mode']}): k={mk['outcome']} p={mk['probability']:.6f}; reduced state:")
            lines += _render_state(r["reduced_state"])
            lines.append(f"measure X ({mx['mode']}): x={mx['outcome']} p={mx['probability']:.6f}")
            lines.append(f"solution: {r['solution']}")
    elif report.scenario == "histories":
        lines.append(f"candidates: {', '.join(r['candidates'])}")
        for i, h in enumerate(r["histories"], 1):
            a, b = h["initial"], h["after"]
            lines.append(f"History #{i}: initial state {_ket(a)}, state after the computation {_ket(b)}")
        for run in r["runs"]:
            how = "inferred" if run["inferred"] else "confirmed"
            lines.append(
                f"oracle k={run['oracle_k']}: queried {','.join(run['queries'])} -> delta={run['deltas']}, "
                f"solution {run['solution']} ({how}), {run['query_count']} query"
            )
    elif report.scenario == "phases":
        rec, s = r["reconstruction"], r["entanglement_search"]
        lines.append(
            f"reconstruction over {rec['histories']} histories: input diff {rec['input_max_difference']:.3g}, "
            f"output diff {rec['output_max_difference']:.3g}"
        )
        lines.append(f"entropy of K after the oracle, quantum phases: {s['quantum_entropy_bits']:.6f} bits")
        lines.append(
            f"exhaustive search over {s['cases']} sign patterns (n={s['n']}): max {s['max_entropy_bits']:.6f} bits, "
            f"{s['maximizers']} maximizers; all-plus pattern {s['all_plus_entropy_bits']:.6f} bits"
        )
    elif report.scenario == "querycount":
        lines.append(f"plain classical, average: {r['plain_average']['exact']} = {r['plain_average']['value']}")
        lines.append(f"plain classical, worst case: {r['plain_worst']}")
        lines.append(f"with half the bits known in advance: {r['advanced']} (average {r['advanced_average']['exact']})")
        lines.append(f"quantum: {r['quantum']} (success probability {r['quantum_success_probability']:.6f})")
    elif report.scenario == "boolean":
        for s in r["satisfying"]:
            lines.append(f"solution: k={s['k0']}{s['k1']} x={s['x0']}{s['x1']} (y0={s['y0']}, y1={s['y1']}, delta={s['delta']})")
        ta, to = r["trials_ascending"], r["trials_all_orders"]
        lines.append(f"classical trials, ascending order: expected {ta['expected']['exact']}, worst {ta['worst']}")
        lines.append(f"classical trials, all orders: expected {to['expected']['exact']}, worst {to['worst']}")
        lines.append(f"output state mass on delta=1: {r['output_state']['mass_on_solutions']:.6f}")
        if "definite_outcome" in r:
            d = r["definite_outcome"]
            lines.append(f"reduced state support: {r['reduced_state']['support']}")
            lines.append(f"sampled X over {d['seeds']} seeds: {d['distinct_sampled']} (exact support {d['support']})")
    elif report.scenario == "epr":
        lines.append("singlet at t=0: " + " ".join(f"{_fmt_amp(e['re'], e['im'])} |{e['L']}>_L |{e['R']}>_R" for e in r["singlet"]))
        lines += [f"  P(L={e['L']}, R={e['R']}) = {e['p']:.6f}" for e in r["joint_measured_at_T"]]
        lines.append(f"P(L = R) = {r['same_polarization_probability']}")
        for b in r["branches"]:
            lines.append(f"L={b['L']}: measured at T vs backdated to t=0, max amplitude difference {b['max_difference']:.3g}")
        s = r["sampled"]
        lines.append(f"sampled: L={s['L']}, then R={s['R']} (p={s['R_probability']:.6f})")
    for name, ok in report.checks.items():
        lines.append(f"{'PASS' if ok else 'FAIL'}  {name}")
    return "\n".join(lines) + "\n"


# --- entry point ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", dest="output_format", choices=("text", "json"), default="text")
    common.add_argument("--seed", type=int, default=0, help="seed for sampled measurements")

    sized = argparse.ArgumentParser(add_help=False)
    sized.add_argument("--n", type=int, default=2, help="qubits per search register (default 2)")

    parser = argparse.ArgumentParser(prog="advinfo", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("grover", parents=[common, sized], help="run Grover search")
    p.add_argument("--oracle-k", help="force the K measurement to this value")
    p.add_argument("--sample", action="store_true", help="sample K with --seed instead of forcing it")
    p.add_argument("--iterations", type=int, default=1)

    p = sub.add_parser("histories", parents=[common, sized], help="histories of an advanced-information query")
    p.add_argument("--known-bit", required=True, help="e.g. k0=0")
    p.add_argument("--query", help="drawer to query (default: first candidate)")

    p = sub.add_parser("phases", parents=[common, sized], help="sum over histories and entanglement search")
    p.add_argument("--workers", type=int, default=1, help="processes for the exhaustive search")

    sub.add_parser("querycount", parents=[common, sized], help="classical vs quantum query counts")

    p = sub.add_parser("boolean", parents=[common, sized], help="Boolean network formulation")
    p.add_argument("--fixed-k", help="fix the oracle's choice, e.g. 01")

    sub.add_parser("epr", parents=[common], help="singlet and backdated reduction")
    return parser


def run(argv: Sequence[str] | None = None) -> Report:
    """Parse ``argv`` and return the report (raises ``SystemExit(2)`` on misuse)."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        parser.error(str(exc))
        raise  # unreachable


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        report = COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        parser.error(str(exc))
    except AdvinfoError as exc:
        print(f"advinfo: error: {exc}", file=sys.stderr)
        return 1
    out = report.to_json() if cfg.output_format == "json" else render_text(report)
    sys.stdout.write(out)
    if not report.passed:
        failed = [k for k, ok in report.checks.items() if not ok]
        print(f"advinfo: checks failed: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
