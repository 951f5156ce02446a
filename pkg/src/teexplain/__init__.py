"""Formal explanations for tree ensembles.

Abductive and contrastive explanations, their inflated (interval) forms, and
maximum-coverage inflated AXps computed by implicit hitting-set
dualization over MaxSAT.
"""

from .explain import (Explanation, ExplanationProblem, ICxp, compute_axp, compute_cxp,
                      greedy_iaxp, inflate_axp, is_weak_axp, reduce_counterexample_to_icxp)
from .hitset import BoundsOracle, NaiveOracle, build_candidate_oracle, export_lp
from .intervals import (DataProportionMeasure, IntervalTable, ProportionMeasure, Region,
                        build_interval_table, fsc, make_measure)
from .maxiaxp import MaxIaxpResult, compute_max_iaxp, seed_singleton_icxps
from .model import ModelError, TreeEnsemble, class_weights, load_model, predict
from .wcnf import MaxSat, Wcnf, solve_maxsat

__all__ = [
    "BoundsOracle", "DataProportionMeasure", "Explanation", "ExplanationProblem", "ICxp",
    "IntervalTable", "MaxIaxpResult", "MaxSat", "ModelError", "NaiveOracle",
    "ProportionMeasure", "Region", "TreeEnsemble", "Wcnf", "build_candidate_oracle",
    "build_interval_table", "class_weights", "compute_axp", "compute_cxp", "compute_max_iaxp",
    "export_lp", "fsc", "greedy_iaxp", "inflate_axp", "is_weak_axp", "load_model",
    "make_measure", "predict", "reduce_counterexample_to_icxp", "seed_singleton_icxps",
    "solve_maxsat",
]
