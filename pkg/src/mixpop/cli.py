"""Command-line front end.

Exit codes: 0 success, 1 I/O failure, 2 invalid population or input,
3 a size cap was hit, 4 an internal cross-check failed. Failures print a JSON
object with ``error`` and ``message`` keys on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import dynamics, invariant, oracle, stability, synchronous
from .population import (
    BenchmarkQuad,
    PopulationSpec,
    SpecError,
    load_spec,
    parse_state,
    require_valid,
    validate_spec,
    zero_state,
)

EXIT_OK, EXIT_IO, EXIT_INVALID, EXIT_CAP, EXIT_MISMATCH = 0, 1, 2, 3, 4


class CrossCheckMismatch(RuntimeError):
    pass


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _emit(args, name: str, text: str) -> None:
    """Write ``text`` to ``<out>/<name>``, or to stdout when no output directory was given."""
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text)
    else:
        sys.stdout.write(text)


def _states_csv(spec: PopulationSpec, states) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(dynamics.trajectory_header(spec)[1:])
    for s in states:
        w.writerow([*s.canonical(), sum(s.canonical())])
    return buf.getvalue()


def _load(args, *, analytic: bool = False) -> PopulationSpec:
    spec = load_spec(args.spec)
    require_valid(spec, analytic=analytic)
    return spec


def _initial(args, spec):
    return parse_state(args.init, spec) if args.init else zero_state(spec)


# subcommands ------------------------------------------------------------------


def cmd_validate(args) -> int:
    report = validate_spec(load_spec(args.spec))
    _emit(args, "validation.json", _dump_json(report.to_json()))
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_simulate(args) -> int:
    spec = _load(args)
    rng = np.random.Generator(np.random.Philox(args.seed))
    traj = dynamics.random_trajectory(spec, _initial(args, spec), args.steps, rng)
    _emit(args, "trajectory.csv", dynamics.trajectory_csv(spec, traj))
    if args.log:
        Path(args.log).write_text(dynamics.activation_log_csv(spec, traj))
    return EXIT_OK


def cmd_replay(args) -> int:
    spec = _load(args)
    if not args.log:
        raise SpecError("replay needs --log with the activation sequence")
    rows = dynamics.parse_activation_log(Path(args.log).read_text())
    traj = dynamics.replay(spec, _initial(args, spec), [a for a, _ in rows])
    for t, (_, expected) in enumerate(rows):
        if expected is None:
            continue
        moved = sum(traj.states[t + 1].canonical()) - sum(traj.states[t].canonical())
        got = {1: "A", -1: "B", 0: rows[t][0].current_strategy.value}[moved]
        if got != expected.value:
            raise CrossCheckMismatch(f"activation #{t}: log says {expected.value}, dynamics give {got}")
    _emit(args, "trajectory.csv", dynamics.trajectory_csv(spec, traj))
    return EXIT_OK


def _characterize(args, spec):
    return invariant.characterize(spec, cap=args.cap_states)


def cmd_characterize(args) -> int:
    spec = _load(args, analytic=True)
    sets = _characterize(args, spec)
    report = {"psi": [list(p) for p in invariant.psi_set(spec)], "sets": []}
    for cs in sets:
        entry = cs.to_json()
        if cs.members is not None and args.out:
            name = f"members_{'_'.join(map(str, cs.benchmarks.as_tuple()))}.csv"
            _emit(args, name, _states_csv(spec, cs.members))
            entry["members_file"] = name
        report["sets"].append(entry)
    _emit(args, "characterize.json", _dump_json(report))
    return EXIT_OK


def _verdict(spec, bm: BenchmarkQuad, members, method: str, pinned_edges: bool) -> dict:
    if method == "onestep":
        return stability.verify_one_step(spec, members, cap=10 * 10**6).to_json()
    if method == "theorem" and not stability.theorem_guards_hold(spec, bm):
        out = stability.check_proposition(spec, bm, members, pinned_edges=pinned_edges).to_json()
        out["note"] = "theorem guards do not hold; proposition used"
        return out
    check = stability.check_theorem if method == "theorem" else stability.check_proposition
    return check(spec, bm, members, pinned_edges=pinned_edges).to_json()


def cmd_stability(args) -> int:
    spec = _load(args, analytic=True)
    if not validate_spec(spec).stability_assumption:
        raise SpecError("anticoordinator tempers share a floor; only --method onestep applies")
    out = []
    for cs in _characterize(args, spec):
        entry = {"set": str(cs.benchmarks), "a_window": list(stability.a_window(spec, cs.benchmarks))}
        if cs.members is None:
            raise invariant.CapExceeded(f"{cs.benchmarks} was not enumerated under the cap")
        if not cs.members:
            entry["verdict"] = None
            entry["note"] = "empty set"
        else:
            entry["verdict"] = _verdict(spec, cs.benchmarks, cs.members, args.method, args.pinned_edges)
            if args.cross_check:
                brute = stability.verify_one_step(spec, cs.members).stable
                entry["onestep_stable"] = brute
                if brute != entry["verdict"]["stable"]:
                    _emit(args, "stability.json", _dump_json({"sets": out + [entry]}))
                    raise CrossCheckMismatch(f"{cs.benchmarks}: {args.method} and one-step verdicts differ")
        out.append(entry)
    _emit(args, "stability.json", _dump_json({"sets": out}))
    return EXIT_OK


def cmd_sync(args) -> int:
    spec = _load(args)
    profile = synchronous.f_profile(spec)
    _emit(args, "f_profile.csv", profile.to_csv())
    report = {"scalar": synchronous.cycle_report_json(synchronous.find_cycles_f(spec), states=False)}
    if spec.state_space_size() <= args.cap_states:
        beta = synchronous.find_cycles_beta(spec, "all", cap=args.cap_states)
        report["full"] = synchronous.cycle_report_json(beta, states=True)
        for entry, cyc in zip(report["full"]["cycles"], beta.cycles):
            if len(cyc) == 1:
                entry["rest_point"] = synchronous.is_rest_point(spec, parse_state(",".join(map(str, cyc[0])), spec))
    else:
        report["full"] = None
        report["note"] = f"state space above {args.cap_states}; full map skipped"
    _emit(args, "cycles.json", _dump_json(report))
    return EXIT_OK


def cmd_oracle(args) -> int:
    spec = _load(args)
    graph = oracle.build_graph(spec, cap=args.cap_states)
    if args.dump:
        graph.dump(args.dump)
    analytic = validate_spec(spec).has_constant_agents is False
    candidates = _characterize(args, spec) if analytic else []
    report = oracle.minimal_invariant_sets(spec, graph, candidates)
    body = report.to_json()
    problems = []
    checks = []
    classes = [{s.canonical() for s in m.states} for m in report.sets]
    for cs in candidates:
        if cs.members is None:
            checks.append({"set": str(cs.benchmarks), "status": "not enumerated"})
            continue
        if not cs.members:
            checks.append({"set": str(cs.benchmarks), "status": "empty"})
            continue
        closed = oracle.is_invariant(spec, cs.members)
        mine = {m.canonical() for m in cs.members}
        inside = [k for k, c in enumerate(classes) if c <= mine]
        status = "equal" if any(classes[k] == mine for k in inside) else ("contains" if inside else "no terminal class")
        checks.append(
            {"set": str(cs.benchmarks), "closed": closed.closed, "status": status, "terminal_classes": inside}
        )
        if not closed.closed:
            problems.append(f"{cs.benchmarks} is not closed: {closed.state} -> {closed.successor}")
        if not inside:
            problems.append(f"{cs.benchmarks} contains no terminal class")
    body["cross_check"] = {
        "candidates": checks,
        "unmatched_terminal_classes": [k for k, m in enumerate(report.sets) if m.matched_candidate is None],
        "ok": not problems,
        "problems": problems,
    }
    _emit(args, "oracle.json", _dump_json(body))
    if problems:
        raise CrossCheckMismatch("; ".join(problems))
    return EXIT_OK


# wiring -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mixpop", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--spec", required=True, help="population JSON file")
        p.add_argument("--out", help="directory for output files (default: stdout)")
        p.set_defaults(func=fn)
        return p

    add("validate", cmd_validate, "check a population file")
    p = add("simulate", cmd_simulate, "random asynchronous trajectory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--init", help="initial state 'x1,..,xb|x'b',..,x'1' (default: all B)")
    p.add_argument("--log", help="also write the activation log CSV here")
    p = add("replay", cmd_replay, "trajectory from an activation log")
    p.add_argument("--init", help="initial state (default: all B)")
    p.add_argument("--log", help="activation log CSV (t,role,type,from[,to])")
    for name, fn, help_ in (
        ("characterize", cmd_characterize, "candidate invariant sets"),
        ("stability", cmd_stability, "stability verdict per candidate set"),
        ("sync", cmd_sync, "synchronous map, scalar profile and cycles"),
        ("oracle", cmd_oracle, "terminal classes of the full transition graph"),
    ):
        p = add(name, fn, help_)
        p.add_argument("--cap-states", type=int, default=10**7 if name in ("sync", "oracle") else 10**6)
        if name == "stability":
            p.add_argument("--method", choices=("theorem", "proposition", "onestep"), default="theorem")
            p.add_argument("--pinned-edges", action="store_true", help="pin w/v markers at the edge cases")
            p.add_argument("--cross-check", action="store_true", help="also run the one-step check and compare")
        if name == "oracle":
            p.add_argument("--dump", help="path stem for the binary graph dump and its JSON sidecar")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    kinds = (
        (CrossCheckMismatch, "cross-check", EXIT_MISMATCH),
        (invariant.CapExceeded, "cap", EXIT_CAP),
        ((SpecError, ValueError), "validation", EXIT_INVALID),
        (OSError, "io", EXIT_IO),
    )
    try:
        return args.func(args)
    except Exception as exc:
        for cls, kind, code in kinds:
            if isinstance(exc, cls):
                sys.stderr.write(_dump_json({"error": kind, "message": str(exc)}))
                return code
        raise


if __name__ == "__main__":
    sys.exit(main())
