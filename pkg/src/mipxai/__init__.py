"""Collinearity-aware re-ranking of feature-importance lists.

Repeatedly drop the top-ranked feature, retrain and re-explain, then score
each feature by how quickly it climbs to the top (MIP) and summarise rank
churn with the normalised movement rate (NMR).
"""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    FeatureId,
    MovementRecord,
    Ranking,
    displacement,
    max_possible_movement,
    ranking_from_importances,
)
from .dataset import Dataset, split  # noqa: E402
from .estimator import MIPRanker  # noqa: E402
from .explainers import (  # noqa: E402
    ExplainerSpec,
    exact_shap_row,
    explain_global,
    kernel_shap_row,
    permutation_importance,
)
from .mip import (  # noqa: E402
    EliminationTrace,
    ScoreTable,
    StabilityReport,
    mip_scores,
    nmr,
    run_elimination,
    score_sd,
    stability_report,
)
from .models import ModelSpec, accuracy, train, tune  # noqa: E402
from .pca import PCA, fit_pca  # noqa: E402
from .rank_stats import kendall_tau_b, pearson_r  # noqa: E402
from .synth import SynthSpec, correlation_matrix, generate  # noqa: E402

__all__ = [
    "Dataset",
    "EliminationTrace",
    "ExplainerSpec",
    "FeatureId",
    "MIPRanker",
    "ModelSpec",
    "MovementRecord",
    "PCA",
    "Ranking",
    "ScoreTable",
    "StabilityReport",
    "SynthSpec",
    "accuracy",
    "correlation_matrix",
    "displacement",
    "exact_shap_row",
    "explain_global",
    "fit_pca",
    "generate",
    "kendall_tau_b",
    "kernel_shap_row",
    "max_possible_movement",
    "mip_scores",
    "nmr",
    "pearson_r",
    "permutation_importance",
    "ranking_from_importances",
    "run_elimination",
    "score_sd",
    "split",
    "stability_report",
    "train",
    "tune",
]
