"""The one-shot honeypot allocation game played on a single attack graph."""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .graph import AttackGraph, AttackPath, Edge, NodeId, enumerate_attack_paths, is_attack_path


class ActionError(ValueError):
    """An action is not in the current state's action space."""


class NoAttackPathError(ValueError):
    """The attacker has no entry->target path, so there is no game to play."""


@dataclass(frozen=True)
class GameParams:
    """Reward weights, budget and solver settings.

    ``cap``/``esc`` weight captured/escaped node values, ``cd`` is the cost of
    one honeypot and ``ca`` the attacker's cost per traversed node. ``mu`` is
    the probability that no node leaves during a step and ``depth`` the
    number of removals looked ahead.
    """

    cap: float = 1.0
    esc: float = 1.0
    cd: float = 2.0
    ca: float = 1.0
    budget: int = 1
    gamma: float = 0.9
    mu: float = 0.2
    depth: int = 2
    tol_vi: float = 1e-6
    tol_lp: float = 1e-9
    max_sweeps: int = 500
    eligible: str = "paths"

    def __post_init__(self) -> None:
        for name in ("cap", "esc", "cd", "ca"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be a finite non-negative number, got {v!r}")
        if int(self.budget) != self.budget or self.budget < 1:
            raise ValueError(f"budget must be a positive integer, got {self.budget!r}")
        if not 0 < self.gamma < 1:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma!r}")
        if not 0 <= self.mu < 1:
            raise ValueError(f"mu must lie in [0, 1), got {self.mu!r}")
        if int(self.depth) != self.depth or self.depth < 0:
            raise ValueError(f"depth must be a non-negative integer, got {self.depth!r}")
        if not (self.tol_vi > 0 and self.tol_lp > 0):
            raise ValueError("tolerances must be positive")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1")
        if self.eligible not in ("paths", "all"):
            raise ValueError(f"eligible must be 'paths' or 'all', got {self.eligible!r}")


@dataclass(frozen=True)
class Allocation:
    """A defender pure action: the set of monitored edges."""

    edges: tuple[Edge, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "edges", tuple(sorted(Edge(*e) for e in self.edges)))

    def __len__(self) -> int:
        return len(self.edges)

    def __contains__(self, e: object) -> bool:
        return e in self.edges

    def vector(self, eligible: Sequence[Edge]) -> np.ndarray:
        """Binary allocation vector over ``eligible``."""
        chosen = set(self.edges)
        return np.array([e in chosen for e in eligible], dtype=np.int8)


@dataclass(frozen=True)
class PayoffMatrix:
    rows: tuple[Allocation, ...]
    cols: tuple[AttackPath, ...]
    values: np.ndarray  # defender payoff, rows x cols

    @property
    def attacker_values(self) -> np.ndarray:
        return -self.values

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


def attacker_action_space(g: AttackGraph, entries: Iterable[NodeId] | None = None) -> list[AttackPath]:
    return enumerate_attack_paths(g, entries)


def eligible_edges(
    g: AttackGraph,
    params: GameParams,
    paths: Sequence[AttackPath] | None = None,
    entries: Iterable[NodeId] | None = None,
) -> list[Edge]:
    """Edges a honeypot may be placed on, sorted."""
    if params.eligible == "all":
        return list(g.edges)
    if paths is None:
        paths = enumerate_attack_paths(g, entries)
    return sorted({e for p in paths for e in p.edges})


def defender_action_space(
    g: AttackGraph,
    params: GameParams,
    entries: Iterable[NodeId] | None = None,
    paths: Sequence[AttackPath] | None = None,
) -> list[Allocation]:
    """Every allocation of at most ``budget`` eligible edges, empty one first."""
    edges = eligible_edges(g, params, paths, entries)
    out = []
    for size in range(min(params.budget, len(edges)) + 1):
        out.extend(Allocation(c) for c in itertools.combinations(edges, size))
    return out


def _survival(path: AttackPath, removal_probs: Mapping[NodeId, float] | None) -> list[float]:
    # probability that the attacker still reaches position i of the path,
    # given at most one node leaves during the step
    if not removal_probs:
        return [1.0] * (len(path) - 1)
    out, gone = [], 0.0
    for u in path.nodes[1:]:
        gone += removal_probs.get(u, 0.0)
        out.append(max(0.0, 1.0 - gone))
    return out


def stage_reward(
    g: AttackGraph,
    a_d: Allocation,
    a_a: AttackPath,
    params: GameParams,
    entries: Iterable[NodeId] | None = None,
    removal_probs: Mapping[NodeId, float] | None = None,
) -> float:
    """Defender reward for one action profile.

    Each non-entry node of the path contributes ``cap * v`` when the edge the
    path enters it by is monitored and ``-esc * v`` otherwise, plus the
    attacker's per-node cost ``ca``; the defender pays ``cd`` per honeypot.
    With ``removal_probs`` (node -> probability it leaves during the step)
    each node's contribution is weighted by the chance the path still reaches
    it, i.e. the expectation over the mobility step.
    """
    if not is_attack_path(g, a_a.nodes) or (entries is not None and a_a.entry not in set(entries)):
        raise ActionError(f"{a_a.nodes} is not an attack path of this state")
    if len(a_d) > params.budget:
        raise ActionError(f"allocation uses {len(a_d)} honeypots, budget is {params.budget}")
    allowed = set(eligible_edges(g, params, entries=entries))
    if not set(a_d.edges) <= allowed:
        raise ActionError(f"allocation {a_d.edges} uses ineligible edges")

    monitored = set(a_d.edges)
    total = 0.0
    for (u, i), q in zip(a_a.edges, _survival(a_a, removal_probs)):
        v = g.value(i)
        if (u, i) in monitored:
            total += q * (params.cap * v + params.ca)
        else:
            total += q * (-params.esc * v + params.ca)
    return total - params.cd * len(a_d)


@functools.lru_cache(maxsize=64)
def allocation_index(n_edges: int, budget: int) -> np.ndarray:
    """Allocations as rows of eligible-edge indices padded with ``n_edges``.

    Row order matches :func:`defender_action_space`: by size, then
    lexicographic.
    """
    width = max(min(budget, n_edges), 1)
    rows = []
    for size in range(min(budget, n_edges) + 1):
        for combo in itertools.combinations(range(n_edges), size):
            rows.append(combo + (n_edges,) * (width - size))
    out = np.array(rows, dtype=np.intp).reshape(len(rows), width)
    out.setflags(write=False)
    return out


def payoff_from_index(
    g: AttackGraph,
    eligible: Sequence[Edge],
    combos: np.ndarray,
    paths: Sequence[AttackPath],
    params: GameParams,
    removal_probs: Mapping[NodeId, float] | None = None,
) -> np.ndarray:
    """Defender payoffs for allocations given as index rows over ``eligible``."""
    index = {e: k for k, e in enumerate(eligible)}
    n = len(eligible)
    weight = np.zeros((n + 1, len(paths)))  # last row pads short allocations
    base = np.zeros(len(paths))
    for j, p in enumerate(paths):
        for e, q in zip(p.edges, _survival(p, removal_probs)):
            v = g.value(e.dst)
            k = index.get(e)
            if k is not None:
                weight[k, j] = q * v
            base[j] += q * (params.ca - params.esc * v)
    sizes = (combos < n).sum(axis=1)
    covered = weight[combos].sum(axis=1)
    return (params.cap + params.esc) * covered + base[None, :] - params.cd * sizes[:, None]


def payoff_values(
    g: AttackGraph,
    allocations: Sequence[Allocation],
    paths: Sequence[AttackPath],
    params: GameParams,
    removal_probs: Mapping[NodeId, float] | None = None,
) -> np.ndarray:
    """Vectorised defender payoffs for every (allocation, path) pair."""
    eligible = sorted({e for a in allocations for e in a.edges})
    index = {e: k for k, e in enumerate(eligible)}
    width = max((len(a) for a in allocations), default=0) or 1
    combos = np.full((len(allocations), width), len(eligible), dtype=np.intp)
    for r, a in enumerate(allocations):
        combos[r, : len(a)] = [index[e] for e in a.edges]
    return payoff_from_index(g, eligible, combos, paths, params, removal_probs)


def build_payoff_matrix(
    g: AttackGraph,
    params: GameParams,
    entries: Iterable[NodeId] | None = None,
    removal_probs: Mapping[NodeId, float] | None = None,
) -> PayoffMatrix:
    paths = attacker_action_space(g, entries)
    if not paths:
        raise NoAttackPathError("no entry->target path; the state is terminal with value 0")
    eligible = eligible_edges(g, params, paths)
    combos = allocation_index(len(eligible), params.budget)
    allocations = tuple(Allocation(tuple(eligible[k] for k in row if k < len(eligible))) for row in combos)
    values = payoff_from_index(g, eligible, combos, paths, params, removal_probs)
    return PayoffMatrix(allocations, tuple(paths), values)
