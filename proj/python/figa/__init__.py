"""Feature-importance guided evasion attacks on tabular classifiers."""

from figa._core import (
    AttackPlan,
    Dataset,
    FeatureRanking,
    FeatureSchema,
    FigaError,
    Model,
    auprc,
    compute_direction,
    evaluate_attack,
    extract_features,
    fit,
    gini_gain,
    grid_search,
    info_gain_ratio,
    inject,
    linspace,
    load_dataset,
    make_plan,
    model_kinds,
    rank_features,
    recall,
    split,
    success_rate,
    web_feature_names,
)

__all__ = [
    "AttackPlan",
    "Dataset",
    "FeatureRanking",
    "FeatureSchema",
    "FigaError",
    "Model",
    "auprc",
    "compute_direction",
    "evaluate_attack",
    "extract_features",
    "fit",
    "gini_gain",
    "grid_search",
    "info_gain_ratio",
    "inject",
    "linspace",
    "load_dataset",
    "make_plan",
    "model_kinds",
    "rank_features",
    "recall",
    "split",
    "success_rate",
    "web_feature_names",
]
