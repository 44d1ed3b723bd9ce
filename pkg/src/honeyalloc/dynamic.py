"""The mobility Markov game: state space, transition kernel and solvers.

A state is the attack graph left after a set of intermediate nodes has
moved away. From a non-terminal state the network stays put with
probability ``mu``; otherwise exactly one removable node ``u`` leaves, with
probability proportional to ``1 - (v(u)/v_max) * (deg(u)/deg_max)``.

The reward of a step depends on the successor: the attacker's path is
executed on the topology that results from the step, so if a node of the
path leaves, the attacker only collects the part of the path before it.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .graph import AttackGraph, AttackPath, Edge, GraphError, NodeId, enumerate_attack_paths, remove_node
from .matrixgame import GameSolution, solve_matrix_game
from .stage import Allocation, GameParams, allocation_index, eligible_edges, payoff_from_index

FULL = "full"
COMPACT = "compact"
MODES = (FULL, COMPACT)


class ConvergenceError(RuntimeError):
    """Value iteration hit the sweep cap; ``result`` holds the partial solve."""

    def __init__(self, message: str, result: "SolveResult") -> None:
        super().__init__(message)
        self.result = result


class SolveTimeout(TimeoutError):
    pass


@dataclass
class GameState:
    id: int
    graph: AttackGraph
    removed: tuple[NodeId, ...]
    depth: int
    terminal: bool
    paths: tuple[AttackPath, ...]
    removable: tuple[NodeId, ...]


@dataclass
class StageData:
    """Action spaces and payoff matrices of one state."""

    paths: tuple[AttackPath, ...]
    eligible: tuple[Edge, ...]
    combos: np.ndarray
    stage: np.ndarray  # payoffs on the current topology
    expected: np.ndarray  # payoffs averaged over the mobility step

    @property
    def allocations(self) -> list[Allocation]:
        n = len(self.eligible)
        return [Allocation(tuple(self.eligible[k] for k in row if k < n)) for row in self.combos]


@dataclass
class StateSpace:
    states: list[GameState]
    root: int
    successors: list[list[tuple[int, float]]]
    mode: str
    mu: float
    entries: frozenset[NodeId] | None = None
    index: dict[tuple[NodeId, ...], int] = field(default_factory=dict, repr=False)
    cache_cells: int = 20_000_000
    _cache: dict[int, StageData] = field(default_factory=dict, repr=False)
    _cached: int = field(default=0, repr=False)

    def __len__(self) -> int:
        return len(self.states)

    def layers(self) -> list[list[int]]:
        out: list[list[int]] = []
        for s in self.states:
            while len(out) <= s.depth:
                out.append([])
            out[s.depth].append(s.id)
        return out

    def children(self, sid: int) -> list[tuple[int, float]]:
        return [(t, p) for t, p in self.successors[sid] if t != sid]

    def removal_probs(self, sid: int) -> dict[NodeId, float]:
        """Probability that each node leaves during a step from ``sid``."""
        s = self.states[sid]
        out = {}
        for t, p in self.children(sid):
            (u,) = set(self.states[t].removed) - set(s.removed)
            out[u] = p
        return out

    def stage_data(self, sid: int, params: GameParams) -> StageData | None:
        """Payoff matrices of state ``sid``; ``None`` when it has no attack path."""
        hit = self._cache.get(sid)
        if hit is not None:
            return hit
        s = self.states[sid]
        if not s.paths:
            return None
        eligible = tuple(eligible_edges(s.graph, params, s.paths))
        combos = allocation_index(len(eligible), params.budget)
        stage = payoff_from_index(s.graph, eligible, combos, s.paths, params)
        if s.terminal:
            expected = stage
        else:
            expected = payoff_from_index(s.graph, eligible, combos, s.paths, params, self.removal_probs(sid))
        data = StageData(s.paths, eligible, combos, stage, expected)
        if self._cached + 2 * stage.size <= self.cache_cells:
            self._cache[sid] = data
            self._cached += 2 * stage.size
        return data

    def realized_payoffs(self, sid: int, params: GameParams) -> dict[NodeId, np.ndarray]:
        """Payoffs when node ``u`` leaves during the step, for each on-path removable ``u``."""
        s = self.states[sid]
        data = self.stage_data(sid, params)
        on_path = {u for p in s.paths for u in p.nodes}
        return {
            u: payoff_from_index(s.graph, data.eligible, data.combos, s.paths, params, {u: 1.0})
            for u in s.removable
            if u in on_path
        }


def removal_weight(g: AttackGraph, u: NodeId) -> float:
    """Unnormalised chance that ``u`` leaves: ``1 - (v/v_max)(deg/deg_max)``."""
    if u not in g:
        raise GraphError(f"unknown node {u}")
    if u in g.entry or u in g.targets:
        raise GraphError(f"node {u} is not removable")
    vmax, dmax = g.max_value, g.max_degree
    if vmax <= 0 or dmax <= 0:
        return 1.0
    return 1.0 - (g.value(u) / vmax) * (g.degree(u) / dmax)


def removable_nodes(g: AttackGraph, mode: str, paths: Sequence[AttackPath]) -> tuple[NodeId, ...]:
    if mode == FULL:
        return g.intermediates
    if mode == COMPACT:
        on_path = {u for p in paths for u in p.nodes}
        return tuple(u for u in g.intermediates if u in on_path)
    raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def transition_distribution(state: GameState, params: GameParams) -> list[tuple[tuple[NodeId, ...], float]]:
    """Successors of ``state`` as (removed-node set, probability) pairs, self-loop first."""
    if state.terminal:
        raise ValueError(f"state {state.id} is terminal and has no transitions")
    w = np.array([removal_weight(state.graph, u) for u in state.removable])
    total = w.sum()
    if total > 0:
        probs = (1.0 - params.mu) * w / total
    else:
        probs = np.full(len(w), (1.0 - params.mu) / len(w))
    out = [(state.removed, params.mu)]
    for u, p in zip(state.removable, probs):
        out.append((tuple(sorted(state.removed + (u,))), float(p)))
    return out


def expand_state_space(
    g0: AttackGraph,
    params: GameParams,
    mode: str = FULL,
    entries: Iterable[NodeId] | None = None,
) -> StateSpace:
    """Breadth-first expansion of the removal states up to ``params.depth``."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    entries = None if entries is None else frozenset(entries)
    if entries is not None and not entries <= g0.entry:
        raise GraphError(f"attacker entries {sorted(entries - g0.entry)} are not entry nodes")

    states: list[GameState] = []
    index: dict[tuple[NodeId, ...], int] = {}

    def make(graph: AttackGraph, removed: tuple[NodeId, ...], depth: int) -> int:
        paths = tuple(enumerate_attack_paths(graph, entries))
        removable = removable_nodes(graph, mode, paths)
        terminal = depth >= params.depth or not paths or not removable
        sid = len(states)
        states.append(GameState(sid, graph, removed, depth, terminal, paths, removable))
        index[removed] = sid
        return sid

    root = make(g0, (), 0)
    successors: list[list[tuple[int, float]]] = []
    frontier = [root]
    while frontier:
        nxt = []
        for sid in frontier:
            s = states[sid]
            while len(successors) <= sid:
                successors.append([])
            if s.terminal:
                continue
            row = []
            for removed, p in transition_distribution(s, params):
                if removed == s.removed:
                    row.append((sid, p))
                    continue
                tid = index.get(removed)
                if tid is None:
                    (u,) = set(removed) - set(s.removed)
                    tid = make(remove_node(s.graph, u), removed, s.depth + 1)
                    nxt.append(tid)
                row.append((tid, p))
            successors[sid] = row
        frontier = nxt
    while len(successors) < len(states):
        successors.append([])
    return StateSpace(states, root, successors, mode, params.mu, entries, index)


def q_value(
    space: StateSpace,
    sid: int,
    d: int,
    a: int,
    V: Sequence[float],
    params: GameParams,
) -> float:
    """Quality of allocation ``d`` against path ``a`` at state ``sid`` given values ``V``."""
    data = space.stage_data(sid, params)
    if data is None:
        return 0.0
    if space.states[sid].terminal:
        return float(data.stage[d, a])
    cont = sum(p * V[t] for t, p in space.successors[sid])
    return float(data.expected[d, a] + params.gamma * cont)


@dataclass
class Trace:
    deltas: list[float] = field(default_factory=list)
    snapshots: list[np.ndarray] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.deltas)


@dataclass
class SolveResult:
    space: StateSpace
    values: np.ndarray
    defender_policy: list[np.ndarray]
    attacker_policy: list[np.ndarray]
    trace: Trace
    converged: bool = True
    seconds: float = 0.0

    @property
    def root_value(self) -> float:
        return float(self.values[self.space.root])


def _empty_policies(space: StateSpace) -> tuple[list, list]:
    # a state without attack paths leaves the defender only the empty allocation
    return [np.ones(1) for _ in space.states], [np.zeros(0) for _ in space.states]


def _map(fn: Callable, items: list, threads: int) -> list:
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def value_iteration(space: StateSpace, params: GameParams, threads: int = 1) -> SolveResult:
    """Synchronous Q-minimax sweeps until the sup-norm change drops below ``tol_vi``.

    Terminal states hold their stage-game value from the start. Raises
    :class:`ConvergenceError` after ``params.max_sweeps`` sweeps.
    """
    t0 = time.perf_counter()
    n = len(space)
    V = np.zeros(n)
    x_pol, y_pol = _empty_policies(space)
    live = []
    for s in space.states:
        data = space.stage_data(s.id, params)
        if data is None:
            continue
        if s.terminal:
            sol = solve_matrix_game(data.stage, params.tol_lp)
            V[s.id] = sol.value
            x_pol[s.id], y_pol[s.id] = sol.x, sol.y
        else:
            live.append(s.id)

    trace = Trace()
    converged = n == 0

    def sweep(sid: int) -> GameSolution:
        data = space.stage_data(sid, params)
        cont = sum(p * V[t] for t, p in space.successors[sid])
        return solve_matrix_game(data.expected + params.gamma * cont, params.tol_lp)

    for _ in range(params.max_sweeps):
        sols = _map(sweep, live, threads)
        V_new = V.copy()
        for sid, sol in zip(live, sols):
            V_new[sid] = sol.value
            x_pol[sid], y_pol[sid] = sol.x, sol.y
        delta = float(np.max(np.abs(V_new - V))) if n else 0.0
        V = V_new
        trace.deltas.append(delta)
        trace.snapshots.append(V.copy())
        if delta < params.tol_vi:
            converged = True
            break

    result = SolveResult(space, V, x_pol, y_pol, trace, converged, time.perf_counter() - t0)
    if not converged:
        raise ConvergenceError(
            f"value iteration did not reach {params.tol_vi:g} in {params.max_sweeps} sweeps "
            f"(last delta {trace.deltas[-1]:.3g})",
            result,
        )
    return result


def backward_induction(
    space: StateSpace,
    params: GameParams,
    threads: int = 1,
    deadline: float | None = None,
) -> SolveResult:
    """One pass over the layers from the deepest up.

    Every non-self transition moves one layer down, so deeper values are
    final when a layer is solved. The self-loop only adds ``gamma*mu*V(s)``
    to every entry of the state's matrix, which leaves the equilibrium
    strategies unchanged; the value is the fixed point
    ``V = (val(expected) + gamma * sum_child p V(child)) / (1 - gamma*mu)``.
    """
    t0 = time.perf_counter()
    V = np.zeros(len(space))
    x_pol, y_pol = _empty_policies(space)

    def solve(sid: int) -> tuple[int, GameSolution | None]:
        if deadline is not None and time.perf_counter() > deadline:
            raise SolveTimeout(f"solve exceeded its deadline at state {sid}")
        data = space.stage_data(sid, params)
        if data is None:
            return sid, None
        if space.states[sid].terminal:
            return sid, solve_matrix_game(data.stage, params.tol_lp)
        return sid, solve_matrix_game(data.expected, params.tol_lp)

    for layer in reversed(space.layers()):
        for sid, sol in _map(solve, layer, threads):
            if sol is None:
                continue
            x_pol[sid], y_pol[sid] = sol.x, sol.y
            if space.states[sid].terminal:
                V[sid] = sol.value
            else:
                cont = sum(p * V[t] for t, p in space.children(sid))
                V[sid] = (sol.value + params.gamma * cont) / (1.0 - params.gamma * space.mu)

    trace = Trace([float(np.max(np.abs(V))) if len(V) else 0.0], [V.copy()])
    return SolveResult(space, V, x_pol, y_pol, trace, True, time.perf_counter() - t0)


def predictive_solve(
    g0: AttackGraph,
    params: GameParams,
    mode: str = FULL,
    entries: Iterable[NodeId] | None = None,
    threads: int = 1,
    deadline: float | None = None,
) -> SolveResult:
    """Expand the mobility states of ``g0`` and solve them by backward induction."""
    space = expand_state_space(g0, params, mode, entries)
    return backward_induction(space, params, threads, deadline)


def myopic_strategies(space: StateSpace, params: GameParams) -> list[np.ndarray]:
    """Per-state stage-game equilibrium strategies of the defender (current topology only)."""
    x_pol, _ = _empty_policies(space)
    for s in space.states:
        data = space.stage_data(s.id, params)
        if data is not None:
            x_pol[s.id] = solve_matrix_game(data.stage, params.tol_lp).x
    return x_pol
