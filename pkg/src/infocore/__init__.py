"""Network-based recommendation on bipartite graphs with information cores."""

from .core import CORE_METHODS, CoreSet, core_restricted_scores, dump_core, extract_core
from .errors import (EmptyDatasetError, EmptyProfileError, NoEligibleUsersError,
                     NoEvaluableUsersError, RecsysError)
from .evaluate import (EvalResult, ExperimentConfig, ExperimentReport,
                       evaluate_system, recall_user, run_experiment)
from .graph import (BipartiteGraph, InteractionList, SplitPair, build_graph,
                    sample_users, split_train_probe)
from .io import load_edge_list, save_edge_list
from .recommend import (AlgorithmSpec, DiffusionEngine, NeighborSelection,
                        RecList, ScoreVector, hybrid_scores, knnmd_scores,
                        make_scorer, md_scores, select_neighbors, top_l,
                        ucf_scores)
from .similarity import NeighborTable, cosine, dump_table, load_table, top_n_table
from .synth import SyntheticSpec, generate_synthetic

__version__ = "0.1.0"

__all__ = [
    "AlgorithmSpec", "BipartiteGraph", "CORE_METHODS", "CoreSet",
    "DiffusionEngine", "EmptyDatasetError", "EmptyProfileError", "EvalResult",
    "ExperimentConfig", "ExperimentReport", "InteractionList",
    "NeighborSelection", "NeighborTable", "NoEligibleUsersError",
    "NoEvaluableUsersError", "RecList", "RecsysError", "ScoreVector",
    "SplitPair", "SyntheticSpec", "build_graph", "core_restricted_scores",
    "cosine", "dump_core", "dump_table", "evaluate_system",
    "generate_synthetic", "hybrid_scores", "knnmd_scores", "load_edge_list",
    "load_table", "make_scorer", "md_scores", "recall_user", "run_experiment",
    "sample_users", "save_edge_list", "select_neighbors", "split_train_probe",
    "top_l", "top_n_table", "ucf_scores",
]
