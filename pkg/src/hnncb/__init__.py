"""Hierarchical nearest-neighbour contextual bandits on metric spaces.

Library layout:

* :mod:`hnncb.metric` -- metric instances, axiom checks, aspect ratio, binning
* :mod:`hnncb.annindex` -- approximate nearest-neighbour indices
* :mod:`hnncb.router` -- online hierarchical routing (depths and parents)
* :mod:`hnncb.bandit` -- the parent-fed bandit subroutine
* :mod:`hnncb.environments` -- instance generators, loss models, CSV ingestion
* :mod:`hnncb.agents` -- full agent runs and baselines
* :mod:`hnncb.audit` -- analysis quantities and inequality checks
* :mod:`hnncb.cli` -- the ``hnncb`` command-line harness
"""

from .agents import (RunRecord, regret_vs, run_exp3, run_hnn_cb, run_nan,
                     run_nn_cb)
from .annindex import LinearScanIndex, NavigatingNetIndex
from .audit import (AnalysisConstants, AuditReport, MarginSpec,
                    build_hbar, compute_boundary_sets, compute_cts,
                    margin_quantities, packing_number, theorem2_margin,
                    verify_lemmas)
from .bandit import (BanditNode, SubroutineParams, create_node, select_action,
                     switch_count, update)
from .environments import (BoundaryCoverConfig, DiskPolicy, HalfspacePolicy,
                           LossModel, TwoBallsConfig, gen_boundary_cover,
                           gen_two_balls, ingest_csv)
from .metric import (MetricInstance, ValidationReport, aspect_ratio,
                     dedup_bin, validate_metric)
from .router import HnnRouter, tree_relations

__version__ = "0.1.0"

__all__ = [
    "AnalysisConstants", "AuditReport", "BanditNode", "BoundaryCoverConfig",
    "DiskPolicy", "HalfspacePolicy", "HnnRouter", "LinearScanIndex",
    "LossModel", "MarginSpec", "MetricInstance", "NavigatingNetIndex",
    "RunRecord", "SubroutineParams", "TwoBallsConfig", "ValidationReport",
    "aspect_ratio", "build_hbar", "compute_boundary_sets", "compute_cts",
    "create_node", "dedup_bin", "gen_boundary_cover", "gen_two_balls",
    "ingest_csv", "margin_quantities", "packing_number", "regret_vs",
    "run_exp3", "run_hnn_cb", "run_nan", "run_nn_cb", "select_action",
    "switch_count", "theorem2_margin", "tree_relations", "update",
    "validate_metric", "verify_lemmas",
]
