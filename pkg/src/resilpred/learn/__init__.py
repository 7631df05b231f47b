"""Regression learners and the tuning pipeline for resilience prediction."""

from ._kernels import BACKEND
from .cv import CVResult, fold_indices, kfold_cv, mean_accuracy, prediction_accuracy
from .models import (DEFAULT_GRIDS, GBRT, KNN, MODEL_KINDS, Forest, ModelSpec, Ridge,
                     SingularSystemError, Tree, fit_model)
from .predictor import (PipelineConfig, TrainedPredictor, bagging_train, fit_pipeline,
                        load_model, save_model, train)
from .preprocess import Whitener, whiten_apply, whiten_fit
from .selection import FeatureRanking, grid_search, rank_features, top_k_sweep

__all__ = [
    "BACKEND", "CVResult", "DEFAULT_GRIDS", "FeatureRanking", "Forest", "GBRT", "KNN",
    "MODEL_KINDS", "ModelSpec", "PipelineConfig", "Ridge", "SingularSystemError",
    "TrainedPredictor", "Tree", "Whitener", "bagging_train", "fit_model", "fit_pipeline",
    "fold_indices", "grid_search", "kfold_cv", "load_model", "mean_accuracy",
    "prediction_accuracy", "rank_features", "save_model", "top_k_sweep", "train",
    "whiten_apply", "whiten_fit",
]
