"""Hierarchical Q-learning path planner for dynamic grid mazes.

The grid is decomposed into a quadtree of sub-environments whose policies are
trained with tabular or federated asynchronous Q-learning; only regions whose
success rate degrades get retrained, escalating toward the root when local
retraining is not enough. A* baselines and a seeded change simulator provide
the benchmark harness.
"""

from .environment import (
    ACTION_OFFSETS,
    CellType,
    ChangeEvent,
    Difficulty,
    GridEnvironment,
    apply_changes,
    generate,
    generate_edge_case,
    make_rng,
    sample_change_count,
    step,
)
from .hierarchy import (
    Policy,
    QTable,
    Region,
    TreeNode,
    compute_success_rate,
    decompose,
    extract_policy,
    leaves_for_changes,
    path_search,
    policy_text,
    propagate_down,
    propagate_up,
)
from .learning_single import (
    Experience,
    LearnerConfig,
    ReplayBuffer,
    StartSelector,
    check_convergence,
    q_update,
    run_episode,
    select_start,
    train_single,
)
from .learning_fed import (
    FedConfig,
    VisitCounts,
    WeightScheme,
    aggregate,
    importance_weights,
    local_step,
    train_fed,
)
from .planning_astar import (
    PathTable,
    astar_path,
    chebyshev,
    oracle_step,
    plan_all,
    static_evaluate,
)
from .strategy import (
    StrategyConfig,
    TrainingMode,
    only_train_leaf_nodes,
    retrain_decision,
    smart_hierarchy,
)
from .experiments import (
    Approach,
    ExperimentConfig,
    MetricsRecord,
    evaluate_astar,
    evaluate_learned,
    run_full_experiment,
    write_results,
)

__all__ = [name for name in dir() if not name.startswith("_")]
