"""Honeypot allocation on attack graphs whose nodes can leave the network."""

from .dynamic import (
    COMPACT,
    FULL,
    MODES,
    ConvergenceError,
    GameState,
    SolveResult,
    SolveTimeout,
    StateSpace,
    backward_induction,
    expand_state_space,
    predictive_solve,
    q_value,
    removal_weight,
    transition_distribution,
    value_iteration,
)
from .evaluation import (
    DefenderPolicy,
    EvalReport,
    attacker_best_response,
    compare_policies,
    evaluate_pair,
    myopic_policy,
    predictive_policy,
    random_policy,
    rollout,
    sweep,
)
from .generators import gen_fig1_tree, gen_reference_20, gen_watts_strogatz
from .graph import (
    AttackGraph,
    AttackPath,
    Edge,
    GraphError,
    Node,
    NodeKind,
    NodeType,
    build_graph,
    enumerate_attack_paths,
    remove_node,
    remove_nodes,
)
from .io import GraphFile, GraphFormatError, load_graph, read_graph_file, save_graph, write_csv
from .matrixgame import GameSolution, SolverError, solve_matrix_game
from .stage import (
    ActionError,
    Allocation,
    GameParams,
    NoAttackPathError,
    PayoffMatrix,
    attacker_action_space,
    build_payoff_matrix,
    defender_action_space,
    stage_reward,
)

__version__ = "0.1.0"
