"""Command-line experiment runner: generate, solve, evaluate, bench.

Errors are reported on stderr as one line,

    error code=<exit code> type=<exception class> message=<JSON string>

with exit codes 2 (bad input), 3 (no convergence) and 4 (I/O).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import matrixgame
from .dynamic import MODES, ConvergenceError, SolveTimeout, backward_induction, expand_state_space, value_iteration
from .evaluation import (
    DepthRow,
    PolicyRow,
    SweepRow,
    compare_policies,
    rollout,
    sweep,
)
from .generators import REFERENCE_20_VERSION, gen_fig1_tree, gen_reference_20, gen_watts_strogatz
from .graph import AttackGraph, enumerate_attack_paths
from .io import TraceRecord, read_graph_file, save_graph, trace_records, write_csv
from .matrixgame import SolverError
from .stage import GameParams

EXIT_OK, EXIT_INPUT, EXIT_CONVERGENCE, EXIT_IO = 0, 2, 3, 4
FIXTURES = ("ref20", "fig1")
PARAM_FLAGS = ("depth", "gamma", "mu", "budget", "cap", "esc", "cd", "ca", "tol_vi", "tol_lp", "max_sweeps", "eligible")


class BadInput(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse would print usage and exit
        raise BadInput(message)


# ---- graph sources and parameters


def _ws_spec(tokens: Sequence[str]) -> dict:
    keys = {"n": int, "k": int, "p": float, "entries": int, "targets": int}
    out = {}
    for tok in tokens:
        key, sep, val = tok.partition("=")
        if not sep or key not in keys:
            raise BadInput(f"--ws expects n=.. k=.. p=.. [entries=..] [targets=..], got {tok!r}")
        try:
            out[key] = keys[key](val)
        except ValueError:
            raise BadInput(f"--ws {key} must be {keys[key].__name__}, got {val!r}") from None
    missing = {"n", "k", "p"} - set(out)
    if missing:
        raise BadInput(f"--ws is missing {', '.join(sorted(missing))}")
    return out


def load_source(args) -> tuple[AttackGraph, dict]:
    """The graph selected by --graph, --fixture or --ws, with file metadata."""
    chosen = [x for x in (args.graph, args.fixture, args.ws) if x]
    if len(chosen) != 1:
        raise BadInput("give exactly one of --graph, --fixture, --ws")
    if args.graph:
        gf = read_graph_file(args.graph)
        return gf.graph, gf.metadata
    if args.fixture:
        if args.fixture == "ref20":
            return gen_reference_20(args.seed), {"fixture": "ref20", "fixture_version": REFERENCE_20_VERSION, "seed": args.seed}
        if args.fixture == "fig1":
            return gen_fig1_tree(), {"fixture": "fig1"}
        raise BadInput(f"unknown fixture {args.fixture!r}; have {', '.join(FIXTURES)}")
    ws = _ws_spec(args.ws)
    g = gen_watts_strogatz(
        ws["n"], ws["k"], ws["p"], args.seed, n_entry=ws.get("entries", 3), n_target=ws.get("targets", 3)
    )
    return g, {"generator": "watts_strogatz", "seed": args.seed, **ws}


def game_params(args) -> GameParams:
    overrides = {k: getattr(args, k) for k in PARAM_FLAGS if getattr(args, k, None) is not None}
    return GameParams(**overrides)


def _entries(args, g: AttackGraph) -> list[int] | None:
    if not args.entry:
        return None
    bad = sorted(set(args.entry) - g.entry)
    if bad:
        raise BadInput(f"--entry {bad} are not entry nodes of the graph")
    return sorted(set(args.entry))


def _outdir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _edge_label(e) -> str:
    return f"{e[0]}-{e[1]}"


# ---- commands


def cmd_generate(args) -> int:
    if not args.out:
        raise BadInput("generate needs --out FILE")
    g, meta = load_source(args)
    save_graph(g, args.out, meta)
    paths = enumerate_attack_paths(g)
    print(
        f"nodes={len(g.nodes)} edges={len(g.edges)} entries={','.join(map(str, sorted(g.entry)))} "
        f"targets={','.join(map(str, sorted(g.targets)))} paths={len(paths)}"
    )
    for e in sorted(g.entry):
        print(f"entry={e} paths={sum(p.entry == e for p in paths)}")
    return EXIT_OK


@dataclass
class ValueRow:
    state: int
    depth: int
    removed: str
    terminal: bool
    paths: int
    allocations: int
    value: float


@dataclass
class StrategyRow:
    state: int
    player: str
    index: int
    action: str
    probability: float


def _strategy_rows(space, params, x_pol, y_pol) -> list[StrategyRow]:
    rows = []
    for s in space.states:
        data = space.stage_data(s.id, params)
        if data is None:
            rows.append(StrategyRow(s.id, "defender", 0, "none", 1.0))
            continue
        n = len(data.eligible)
        for i in np.flatnonzero(x_pol[s.id] > 0):
            label = " ".join(_edge_label(data.eligible[k]) for k in data.combos[i] if k < n) or "none"
            rows.append(StrategyRow(s.id, "defender", int(i), label, float(x_pol[s.id][i])))
        for j in np.flatnonzero(y_pol[s.id] > 0):
            label = "-".join(map(str, s.paths[j].nodes))
            rows.append(StrategyRow(s.id, "attacker", int(j), label, float(y_pol[s.id][j])))
    return rows


def cmd_solve(args) -> int:
    if not args.out:
        raise BadInput("solve needs --out DIR")
    g, _ = load_source(args)
    params = game_params(args)
    entries = _entries(args, g)
    out = _outdir(args.out)
    space = expand_state_space(g, params, args.mode or "full", entries)
    result = backward_induction(space, params, args.threads)

    vrows = []
    for s in space.states:
        data = space.stage_data(s.id, params)
        n_alloc = 1 if data is None else data.combos.shape[0]
        removed = " ".join(map(str, s.removed))
        vrows.append(ValueRow(s.id, s.depth, removed, s.terminal, len(s.paths), n_alloc, float(result.values[s.id])))
    write_csv(vrows, out / "values.csv", ValueRow)
    write_csv(_strategy_rows(space, params, result.defender_policy, result.attacker_policy), out / "policies.csv", StrategyRow)

    summary = f"states={len(space)} root_value={result.root_value:.9g}"
    if args.no_trace:
        write_csv([], out / "trace.csv", TraceRecord)
    else:
        try:
            vi = value_iteration(space, params, args.threads)
        except ConvergenceError as exc:
            write_csv(trace_records(exc.result.trace), out / "trace.csv", TraceRecord)
            raise
        write_csv(trace_records(vi.trace), out / "trace.csv", TraceRecord)
        gap = float(np.max(np.abs(vi.values - result.values))) if len(space) else 0.0
        summary += f" sweeps={len(vi.trace)} final_delta={vi.trace.deltas[-1]:.3g} method_gap={gap:.3g}"
    print(summary)
    return EXIT_OK


@dataclass
class RolloutRow:
    mode: str
    episodes: int
    seed: int
    analytic: float
    estimate: float
    std_error: float
    half_width: float


def cmd_evaluate(args) -> int:
    if not args.out:
        raise BadInput("evaluate needs --out DIR")
    g, _ = load_source(args)
    params = game_params(args)
    entries = _entries(args, g)
    modes = (args.mode,) if args.mode else MODES
    out = _outdir(args.out)
    sweeps = [_sweep_spec(s) for s in args.sweep or []]
    if args.episodes is not None and args.episodes < 1:
        raise BadInput("--episodes must be >= 1")

    report = compare_policies(g, params, modes, entries, args.threads, defender=args.defender)
    write_csv(report.rows, out / "policies.csv", PolicyRow)
    write_csv(report.depth_rows, out / "depth.csv", DepthRow)
    for r in report.rows:
        print(f"mode={r.mode} entry={r.entry} policy={r.policy} attacker_reward={r.attacker_reward:.9g}")

    if sweeps:
        rows = []
        for name, values in sweeps:
            for mode in modes:
                rows.extend(sweep(g, params, name, values, mode, entries, args.threads))
        write_csv(rows, out / "sweep.csv", SweepRow)

    if args.episodes:
        rows = []
        for mode in modes:
            space = expand_state_space(g, params, mode, entries)
            solved = backward_induction(space, params, args.threads)
            est = rollout(space, solved.defender_policy, solved.attacker_policy, args.episodes, args.seed, params)
            rows.append(
                RolloutRow(mode, est.episodes, args.seed, solved.root_value, est.mean, est.std_error, est.half_width)
            )
            print(f"mode={mode} rollout={est.mean:.9g} analytic={solved.root_value:.9g} half_width={est.half_width:.3g}")
        write_csv(rows, out / "rollout.csv", RolloutRow)
    return EXIT_OK


def _sweep_spec(text: str) -> tuple[str, list[float]]:
    name, sep, vals = text.partition("=")
    if not sep or name not in ("cap", "esc", "cd", "ca"):
        raise BadInput(f"--sweep expects cap|esc|cd|ca=v1,v2,..., got {text!r}")
    try:
        return name, [float(v) for v in vals.split(",")]
    except ValueError:
        raise BadInput(f"--sweep values must be numbers, got {vals!r}") from None


@dataclass
class BenchRow:
    n: int
    k: int
    p: float
    budget: int
    depth: int
    mode: str
    seed: int
    backend: str
    states: int
    root_value: float | None
    status: str
    seconds: float


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise BadInput(f"expected comma-separated integers, got {text!r}") from None


def cmd_bench(args) -> int:
    if not args.out:
        raise BadInput("bench needs --out DIR")
    sizes, budgets = _int_list(args.sizes), _int_list(args.budgets)
    modes = (args.mode,) if args.mode else MODES
    base = game_params(args)
    out = _outdir(args.out)
    rows = []
    for n in sizes:
        g = gen_watts_strogatz(n, args.k, args.p, args.seed)
        for h in budgets:
            params = dataclasses.replace(base, budget=h)
            for mode in modes:
                t0 = time.perf_counter()
                deadline = t0 + args.timeout if args.timeout else None
                space = expand_state_space(g, params, mode)
                try:
                    res = backward_induction(space, params, args.threads, deadline)
                    value, status = res.root_value, "ok"
                except SolveTimeout:
                    value, status = None, "timeout"
                secs = time.perf_counter() - t0
                row = BenchRow(n, args.k, args.p, h, params.depth, mode, args.seed, matrixgame.get_backend(),
                               len(space), value, status, secs)  # fmt: skip
                rows.append(row)
                print(f"n={n} budget={h} mode={mode} states={len(space)} status={status} seconds={secs:.3f}")
    write_csv(rows, out / "bench.csv", BenchRow)
    return EXIT_OK


# ---- parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="honeyalloc", description=__doc__.splitlines()[0])
    parser.add_argument("--backend", choices=("compiled", "python"), help="matrix-game kernel")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, source=True):
        if source:
            p.add_argument("--graph", help="graph file to load")
            p.add_argument("--fixture", help=f"built-in graph: {', '.join(FIXTURES)}")
            p.add_argument("--ws", nargs="+", metavar="KEY=VAL", help="Watts-Strogatz graph, e.g. n=100 k=4 p=0.1")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out")

    def game(p):
        p.add_argument("--mode", choices=MODES)
        p.add_argument("--depth", type=int)
        p.add_argument("--gamma", type=float)
        p.add_argument("--mu", type=float)
        p.add_argument("--budget", type=int)
        p.add_argument("--cap", type=float)
        p.add_argument("--esc", type=float)
        p.add_argument("--cd", type=float)
        p.add_argument("--ca", type=float)
        p.add_argument("--tol-vi", dest="tol_vi", type=float)
        p.add_argument("--tol-lp", dest="tol_lp", type=float)
        p.add_argument("--max-sweeps", dest="max_sweeps", type=int)
        p.add_argument("--eligible", choices=("paths", "all"))
        p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("generate", help="write a graph file")
    common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="solve the mobility game")
    common(p)
    game(p)
    p.add_argument("--entry", type=int, action="append", help="restrict the attacker to this entry (repeatable)")
    p.add_argument("--no-trace", action="store_true", help="skip the value-iteration convergence trace")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("evaluate", help="compare random, myopic and predictive defenders")
    common(p)
    game(p)
    p.add_argument("--entry", type=int, action="append", help="evaluate only these entries (repeatable)")
    p.add_argument("--defender", choices=("entry", "global"), default="entry",
                   help="solve defender policies per entry or once for all entries")  # fmt: skip
    p.add_argument("--sweep", action="append", metavar="NAME=V1,V2,..", help="reward-parameter sweep")
    p.add_argument("--episodes", type=int, help="Monte Carlo check of the root value")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", help="time solves on Watts-Strogatz graphs")
    common(p, source=False)
    game(p)
    p.add_argument("--sizes", default="20,50,100")
    p.add_argument("--budgets", default="1,2")
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--p", type=float, default=0.1)
    p.add_argument("--timeout", type=float, default=600.0, help="seconds per cell; 0 disables")
    p.set_defaults(func=cmd_bench)
    return parser


def _fail(code: int, exc: BaseException) -> int:
    msg = " ".join(str(exc).split())
    print(f"error code={code} type={type(exc).__name__} message={json.dumps(msg)}", file=sys.stderr)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    backend = matrixgame.get_backend()
    try:
        args = build_parser().parse_args(argv)
        if args.backend:
            matrixgame.set_backend(args.backend)
        if getattr(args, "threads", 1) < 1:
            raise BadInput("--threads must be >= 1")
        return args.func(args)
    except (ConvergenceError, SolverError, SolveTimeout) as exc:
        return _fail(EXIT_CONVERGENCE, exc)
    except OSError as exc:
        return _fail(EXIT_IO, exc)
    except (ValueError, KeyError) as exc:
        return _fail(EXIT_INPUT, exc)
    finally:
        matrixgame.set_backend(backend)


if __name__ == "__main__":
    sys.exit(main())
