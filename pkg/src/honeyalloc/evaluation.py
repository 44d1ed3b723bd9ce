"""Baseline defender policies, attacker best responses and Monte Carlo rollouts."""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .dynamic import MODES, SolveResult, StateSpace, backward_induction, expand_state_space, myopic_strategies
from .graph import AttackGraph, NodeId
from .stage import GameParams

POLICIES = ("random", "myopic", "predictive")


@dataclass
class DefenderPolicy:
    label: str
    strategies: list[np.ndarray]

    def __post_init__(self) -> None:
        for sid, x in enumerate(self.strategies):
            if x.size and (np.any(x < -1e-12) or abs(x.sum() - 1.0) > 1e-9):
                raise ValueError(f"strategy at state {sid} is not a distribution")


def random_policy(space: StateSpace, params: GameParams) -> DefenderPolicy:
    out = []
    for s in space.states:
        data = space.stage_data(s.id, params)
        k = 1 if data is None else data.combos.shape[0]
        out.append(np.full(k, 1.0 / k))
    return DefenderPolicy("random", out)


def myopic_policy(space: StateSpace, params: GameParams) -> DefenderPolicy:
    return DefenderPolicy("myopic", myopic_strategies(space, params))


def predictive_policy(result: SolveResult) -> DefenderPolicy:
    return DefenderPolicy("predictive", result.defender_policy)


def _payoff(space: StateSpace, sid: int, params: GameParams) -> np.ndarray | None:
    data = space.stage_data(sid, params)
    if data is None:
        return None
    return data.stage if space.states[sid].terminal else data.expected


def attacker_best_response(
    space: StateSpace, pi_d: DefenderPolicy, params: GameParams, entry: NodeId | None = None
) -> tuple[list[np.ndarray], np.ndarray]:
    """Attacker's optimal reply to a fixed defender policy.

    Returns per-state pure strategies (one-hot, lowest index on ties) and
    per-state attacker values. Transitions do not depend on the attacker's
    choice, so the reply at each state maximises the expected step payoff
    and the continuation is added in closed form. With ``entry`` the
    attacker may only use paths that start there; a state offering no such
    path yields no step reward.
    """
    U = np.zeros(len(space))
    policy = [np.zeros(0) for _ in space.states]
    for layer in reversed(space.layers()):
        for sid in layer:
            R = _payoff(space, sid, params)
            if R is None:
                continue
            gains = -(pi_d.strategies[sid] @ R)
            if entry is not None:
                allowed = np.array([p.entry == entry for p in space.states[sid].paths])
                gains = np.where(allowed, gains, -np.inf)
            j = int(np.argmax(gains))
            if np.isfinite(gains[j]):
                policy[sid], g_j = np.eye(len(gains))[j], gains[j]
            else:
                policy[sid], g_j = np.zeros(len(gains)), 0.0
            if space.states[sid].terminal:
                U[sid] = g_j
            else:
                cont = sum(p * U[t] for t, p in space.children(sid))
                U[sid] = (g_j + params.gamma * cont) / (1.0 - params.gamma * space.mu)
    return policy, U


def evaluate_pair(
    space: StateSpace, pi_d: Sequence[np.ndarray], pi_a: Sequence[np.ndarray], params: GameParams
) -> np.ndarray:
    """Defender's expected discounted reward per state under a fixed policy pair."""
    V = np.zeros(len(space))
    for layer in reversed(space.layers()):
        for sid in layer:
            R = _payoff(space, sid, params)
            if R is None:
                continue
            r = float(pi_d[sid] @ R @ pi_a[sid])
            if space.states[sid].terminal:
                V[sid] = r
            else:
                cont = sum(p * V[t] for t, p in space.children(sid))
                V[sid] = (r + params.gamma * cont) / (1.0 - params.gamma * space.mu)
    return V


@dataclass(frozen=True)
class RolloutEstimate:
    mean: float
    std_error: float
    half_width: float  # 95% normal interval
    episodes: int


def rollout(
    space: StateSpace,
    pi_d: Sequence[np.ndarray],
    pi_a: Sequence[np.ndarray],
    episodes: int,
    seed: int,
    params: GameParams,
    block: int = 4096,
) -> RolloutEstimate:
    """Monte Carlo estimate of the root's discounted defender reward.

    Episodes are simulated in blocks of ``block``; block ``b`` draws from the
    ``b``-th child of ``SeedSequence(seed)``, so the estimate does not depend
    on how blocks are scheduled. An episode collects the terminal state's
    reward once and stops there.
    """
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    n = len(space)
    payoff = [None] * n
    realized = [None] * n
    succ_ids, succ_cum, succ_node = [None] * n, [None] * n, [None] * n
    xcum = [np.cumsum(x) for x in pi_d]
    ycum = [np.cumsum(y) for y in pi_a]
    for s in space.states:
        data = space.stage_data(s.id, params)
        if data is None:
            continue
        payoff[s.id] = data.stage
        if not s.terminal:
            realized[s.id] = space.realized_payoffs(s.id, params)
            ids, probs, nodes = [], [], []
            for t, p in space.successors[s.id]:
                ids.append(t)
                probs.append(p)
                extra = set(space.states[t].removed) - set(s.removed)
                nodes.append(extra.pop() if extra else None)
            succ_ids[s.id] = np.array(ids)
            succ_cum[s.id] = np.cumsum(probs)
            succ_node[s.id] = nodes

    def draw(cum: np.ndarray, u: np.ndarray) -> np.ndarray:
        return np.minimum(np.searchsorted(cum, u * cum[-1], side="right"), len(cum) - 1)

    totals = np.empty(episodes)
    seqs = np.random.SeedSequence(seed).spawn((episodes + block - 1) // block)
    for b, ss in enumerate(seqs):
        rng = np.random.default_rng(ss)
        lo, hi = b * block, min(episodes, (b + 1) * block)
        state = np.full(hi - lo, space.root)
        disc = np.ones(hi - lo)
        total = np.zeros(hi - lo)
        alive = np.ones(hi - lo, dtype=bool)
        while alive.any():
            for sid in np.unique(state[alive]):
                idx = np.flatnonzero(alive & (state == sid))
                R = payoff[sid]
                if R is None:
                    alive[idx] = False
                    continue
                u = rng.random((3, idx.size))
                d = draw(xcum[sid], u[0])
                a = draw(ycum[sid], u[1])
                if space.states[sid].terminal:
                    total[idx] += disc[idx] * R[d, a]
                    alive[idx] = False
                    continue
                k = draw(succ_cum[sid], u[2])
                r = R[d, a].copy()
                for kk in np.unique(k):
                    node = succ_node[sid][kk]
                    if node is not None and node in realized[sid]:
                        m = k == kk
                        r[m] = realized[sid][node][d[m], a[m]]
                total[idx] += disc[idx] * r
                disc[idx] *= params.gamma
                state[idx] = succ_ids[sid][k]
        totals[lo:hi] = total
    mean = float(totals.mean())
    se = float(totals.std(ddof=1) / np.sqrt(episodes)) if episodes > 1 else 0.0
    return RolloutEstimate(mean, se, 1.96 * se, episodes)


def reach_probabilities(space: StateSpace) -> np.ndarray:
    """Probability that the chain's non-self moves pass through each state."""
    reach = np.zeros(len(space))
    reach[space.root] = 1.0
    for layer in space.layers():
        for sid in layer:
            kids = space.children(sid)
            mass = sum(p for _, p in kids)
            for t, p in kids:
                reach[t] += reach[sid] * p / mass
    return reach


@dataclass
class PolicyRow:
    mode: str
    entry: int
    policy: str
    attacker_reward: float
    states: int


@dataclass
class DepthRow:
    mode: str
    entry: int
    policy: str
    depth: int
    attacker_reward: float  # reach-weighted mean over the layer
    states: int


@dataclass
class EvalReport:
    rows: list[PolicyRow] = field(default_factory=list)
    depth_rows: list[DepthRow] = field(default_factory=list)
    state_values: dict = field(default_factory=dict)  # (mode, entry, policy) -> per-state attacker values
    spaces: dict = field(default_factory=dict)  # (mode, entry) -> StateSpace
    seconds: dict = field(default_factory=dict)  # (mode, entry) -> solve time

    def reward(self, mode: str, entry: int, policy: str) -> float:
        for r in self.rows:
            if (r.mode, r.entry, r.policy) == (mode, entry, policy):
                return r.attacker_reward
        raise KeyError((mode, entry, policy))


def policy_set(space: StateSpace, params: GameParams, threads: int = 1) -> dict[str, DefenderPolicy]:
    solved = backward_induction(space, params, threads)
    return {
        "random": random_policy(space, params),
        "myopic": myopic_policy(space, params),
        "predictive": predictive_policy(solved),
    }


def compare_policies(
    g0: AttackGraph,
    params: GameParams,
    modes: Iterable[str] = MODES,
    entries: Iterable[NodeId] | None = None,
    threads: int = 1,
    defender: str = "entry",
) -> EvalReport:
    """Attacker best-response reward against each defender policy, per entry node.

    For each entry the attacker is restricted to paths starting there. With
    ``defender="entry"`` the defender policies are rebuilt on that restricted
    game (the defender knows where the attack starts). With ``"global"`` they
    come from the unrestricted game and only the attacker's reply changes;
    the equilibrium then no longer bounds each entry separately.
    """
    if defender not in ("entry", "global"):
        raise ValueError(f"defender must be 'entry' or 'global', got {defender!r}")
    report = EvalReport()
    entries = sorted(g0.entry if entries is None else entries)
    for mode in modes:
        shared = None
        if defender == "global":
            t0 = time.perf_counter()
            space_all = expand_state_space(g0, params, mode)
            shared = (space_all, policy_set(space_all, params, threads), time.perf_counter() - t0)
        for e in entries:
            t0 = time.perf_counter()
            if shared is None:
                space = expand_state_space(g0, params, mode, [e])
                pols = policy_set(space, params, threads)
                restrict = None
                report.seconds[(mode, e)] = time.perf_counter() - t0
            else:
                space, pols, secs = shared
                restrict = e
                report.seconds[(mode, e)] = secs
            report.spaces[(mode, e)] = space
            reach = reach_probabilities(space)
            layers = space.layers()
            for name in POLICIES:
                _, U = attacker_best_response(space, pols[name], params, restrict)
                report.state_values[(mode, e, name)] = U
                report.rows.append(PolicyRow(mode, e, name, float(U[space.root]), len(space)))
                for depth, layer in enumerate(layers):
                    w = reach[layer]
                    avg = float(w @ U[layer] / w.sum()) if w.sum() > 0 else 0.0
                    report.depth_rows.append(DepthRow(mode, e, name, depth, avg, len(layer)))
    return report


@dataclass
class SweepRow:
    parameter: str
    value: float
    mode: str
    policy: str
    attacker_reward: float


def sweep(
    g0: AttackGraph,
    params: GameParams,
    parameter: str,
    values: Sequence[float],
    mode: str = "full",
    entries: Iterable[NodeId] | None = None,
    threads: int = 1,
) -> list[SweepRow]:
    """Root attacker reward per policy while one reward parameter varies."""
    rows = []
    for v in values:
        p = dataclasses.replace(params, **{parameter: float(v)})
        space = expand_state_space(g0, p, mode, entries)
        pols = policy_set(space, p, threads)
        for name in POLICIES:
            _, U = attacker_best_response(space, pols[name], p)
            rows.append(SweepRow(parameter, float(v), mode, name, float(U[space.root])))
    return rows
