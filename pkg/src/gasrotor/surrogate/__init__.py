"""Ensemble network surrogate of the film + rotor stability pipeline."""

from .dataset import (DEFAULT_RANGES, RANGE_PRESETS,
                      REFERENCE_NEIGHBORHOOD_RANGES, TrainingDataset,
                      generate_dataset, load_dataset, save_dataset)
from .ensemble import (GATE_THRESHOLD, EnsembleBlock, Normalizer, SurrogateModel,
                       ensemble_predict, mode_results_from_batch, predict_batch,
                       predict_mode, train_block)
from .ga import DEFAULT_SPACE, GAResult, ga_search
from .modelio import load_model, model_digest, save_model, serialize_model
from .net import MLPSpec, forward, init_params, loss_and_grad
from .training import Hyperparams, TrainingHistory, train_network

__all__ = [
    "DEFAULT_RANGES", "DEFAULT_SPACE", "EnsembleBlock", "GAResult",
    "GATE_THRESHOLD", "Hyperparams", "MLPSpec", "Normalizer", "RANGE_PRESETS",
    "REFERENCE_NEIGHBORHOOD_RANGES", "SurrogateModel", "TrainingDataset",
    "TrainingHistory", "ensemble_predict", "forward", "ga_search",
    "generate_dataset", "init_params", "load_dataset", "load_model",
    "loss_and_grad", "mode_results_from_batch", "model_digest", "predict_batch",
    "predict_mode", "save_dataset", "save_model", "serialize_model",
    "train_block", "train_network",
]
