"""Compiled vs numpy simplex kernel: random matrix games and whole solves.

    python benchmarks/bench_kernels.py [--games 300] [--out bench_kernels.csv]
"""

from __future__ import annotations

import argparse
import dataclasses
import time

import numpy as np

from honeyalloc import matrixgame
from honeyalloc.dynamic import backward_induction, expand_state_space
from honeyalloc.generators import gen_reference_20, gen_watts_strogatz
from honeyalloc.io import write_csv
from honeyalloc.matrixgame import solve_matrix_game
from honeyalloc.stage import GameParams

SHAPES = [(4, 4), (11, 4), (23, 14), (60, 60), (300, 40), (1200, 46)]


@dataclasses.dataclass
class Row:
    workload: str
    backend: str
    runs: int
    seconds: float
    per_run_ms: float
    identical: bool


def time_games(shape, games, seed):
    rng = np.random.default_rng(seed)
    mats = [rng.uniform(-10, 10, shape) for _ in range(games)]
    out, ref = {}, None
    for name in matrixgame.available_backends():
        t0 = time.perf_counter()
        sols = [solve_matrix_game(M, backend=name) for M in mats]
        out[name] = time.perf_counter() - t0
        vals = np.array([s.value for s in sols] + [x for s in sols for x in s.x])
        same = ref is None or np.array_equal(vals, ref)
        ref = vals if ref is None else ref
        out[name] = (out[name], same)
    return out


def time_solve(label, g, params, mode):
    out, ref = {}, None
    for name in matrixgame.available_backends():
        matrixgame.set_backend(name)
        space = expand_state_space(g, params, mode)
        t0 = time.perf_counter()
        res = backward_induction(space, params)
        secs = time.perf_counter() - t0
        same = ref is None or np.array_equal(res.values, ref)
        ref = res.values if ref is None else ref
        out[name] = (secs, same)
    return out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--games", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out")
    ap.add_argument("--skip-ws", action="store_true", help="skip the n=100 Watts-Strogatz solve")
    args = ap.parse_args()
    if len(matrixgame.available_backends()) < 2:
        print("compiled kernel not built; only the numpy kernel is available")

    rows = []
    for shape in SHAPES:
        games = max(3, args.games if shape[0] * shape[1] <= 400 else args.games // 10)
        for name, (secs, same) in time_games(shape, games, args.seed).items():
            rows.append(Row(f"random {shape[0]}x{shape[1]}", name, games, secs, 1e3 * secs / games, same))

    solves = [("ref20 full H=1", gen_reference_20(0), GameParams(), "full")]
    if not args.skip_ws:
        ws = gen_watts_strogatz(100, 4, 0.1, 0)
        solves.append(("ws100 compact H=2", ws, dataclasses.replace(GameParams(), budget=2), "compact"))
    default = matrixgame.get_backend()
    for label, g, params, mode in solves:
        for name, (secs, same) in time_solve(label, g, params, mode).items():
            rows.append(Row(label, name, 1, secs, 1e3 * secs, same))
    matrixgame.set_backend(default)

    print(f"{'workload':<22}{'backend':<10}{'runs':>6}{'ms/run':>12}  same-as-numpy")
    for r in rows:
        print(f"{r.workload:<22}{r.backend:<10}{r.runs:>6}{r.per_run_ms:>12.3f}  {r.identical}")
    if args.out:
        write_csv(rows, args.out, Row)


if __name__ == "__main__":
    main()
