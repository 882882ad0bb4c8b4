"""End-to-end surrogate fitting and evaluation against a labelled dataset."""

from __future__ import annotations

import time

import numpy as np

from .. import __version__
from ..errors import InvariantError
from .dataset import TrainingDataset
from .ensemble import (TASKS, EnsembleBlock, SurrogateModel, ensemble_predict,
                       train_block)
from .net import MLPSpec
from .training import Hyperparams

N_MODES = 4


def default_spec(task: str, width: int = 48, n_hidden: int = 2) -> MLPSpec:
    head = "logistic" if task in ("excited", "stable") else "identity"
    return MLPSpec(widths=(11,) + (width,) * n_hidden + (1,), activation="tanh", head=head)


def _block_seed(seed: int, mode: int, task: str) -> int:
    return int(np.random.SeedSequence((seed, mode, TASKS.index(task))).generate_state(1)[0])


def _task_rows(dataset: TrainingDataset, part: str, mode: int, task: str) -> np.ndarray:
    rows = dataset.part(part)
    if task == "excited":
        return rows
    return rows[dataset.excited[rows, mode]]


def _task_targets(dataset: TrainingDataset, rows: np.ndarray, mode: int,
                  task: str) -> np.ndarray:
    if task == "excited":
        return dataset.excited[rows, mode].astype(float)
    if task == "stable":
        return dataset.stable[rows, mode].astype(float)
    if task == "wsr":
        return dataset.wsr[rows, mode]
    return dataset.logdec[rows, mode]


def train_surrogate(dataset: TrainingDataset, width: int = 48, n_hidden: int = 2,
                    hp: Hyperparams | None = None, seed: int = 0,
                    progress=None, extra_metadata: dict | None = None) -> SurrogateModel:
    """Train all 16 ensemble blocks; deterministic for a fixed seed.

    The excited classifier of each mode trains on the full split; the
    stability classifier and the two regressors train on the rows where
    that mode is actually excited.
    """
    hp = hp or Hyperparams()
    pipelines: list[dict[str, EnsembleBlock]] = []
    done = 0
    for mode in range(N_MODES):
        pipeline: dict[str, EnsembleBlock] = {}
        for task in TASKS:
            rows_tr = _task_rows(dataset, "train", mode, task)
            rows_va = _task_rows(dataset, "val", mode, task)
            if rows_tr.size < 10 or rows_va.size < 2:
                raise InvariantError(
                    f"mode {mode + 1} task {task}: too few rows "
                    f"(train {rows_tr.size}, val {rows_va.size})", path="dataset")
            pipeline[task] = train_block(
                dataset.features[rows_tr], _task_targets(dataset, rows_tr, mode, task),
                dataset.features[rows_va], _task_targets(dataset, rows_va, mode, task),
                task, default_spec(task, width, n_hidden), hp,
                seed=_block_seed(seed, mode, task))
            done += 1
            if progress is not None:
                progress(done, N_MODES * len(TASKS))
        pipelines.append(pipeline)
    metadata = {
        "created_unix": time.time(),
        "seed": seed,
        "dataset_digest": dataset.digest(),
        "feature_ranges": {k: list(v) for k, v in dataset.ranges.items()},
        "training": {"width": width, "n_hidden": n_hidden,
                     "learning_rate": hp.learning_rate, "batch_size": hp.batch_size,
                     "epochs": hp.epochs, "patience": hp.patience},
        "package_version": __version__,
    }
    if extra_metadata:
        metadata.update(extra_metadata)
    return SurrogateModel(pipelines=pipelines, metadata=metadata)


# ---------------------------------------------------------------------------
# metrics


def accuracy(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    return float(np.mean(y_true == y_pred)) if y_true.size else float("nan")


def balanced_accuracy(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    """Mean of the per-class recalls; classes absent from y_true are skipped."""
    recalls = []
    for cls in (False, True):
        mask = y_true == cls
        if mask.any():
            recalls.append(float(np.mean(y_pred[mask] == cls)))
    return float(np.mean(recalls)) if recalls else float("nan")


def r2_score(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    if y_true.size == 0:
        return float("nan")
    ss_res = float(np.sum((y_true - y_pred) ** 2))
    ss_tot = float(np.sum((y_true - np.mean(y_true)) ** 2))
    return 1.0 - ss_res / ss_tot if ss_tot > 0 else float("nan")


def mean_absolute_error(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    return float(np.mean(np.abs(y_true - y_pred))) if y_true.size else float("nan")


def evaluate_model(model: SurrogateModel, dataset: TrainingDataset,
                   part: str = "test") -> dict:
    """Block-level metrics on one split, pooled over modes and per mode.

    Classifiers are scored on their own target populations (the stability
    classifier and both regressors on rows where the mode is truly
    excited), isolating each block from gate errors upstream.
    """
    from .ensemble import GATE_THRESHOLD

    per_mode: list[dict] = []
    pool: dict[str, list[np.ndarray]] = {t: [] for t in TASKS}
    pool_true: dict[str, list[np.ndarray]] = {t: [] for t in TASKS}
    for mode in range(N_MODES):
        entry: dict = {}
        pipe = model.pipelines[mode]
        for task in TASKS:
            rows = _task_rows(dataset, part, mode, task)
            if rows.size == 0:
                entry[task] = {"n": 0}
                continue
            y_true = _task_targets(dataset, rows, mode, task)
            pred, _ = ensemble_predict(pipe[task], dataset.features[rows])
            if task in ("excited", "stable"):
                y_hat = pred >= GATE_THRESHOLD
                y_bool = y_true >= 0.5
                entry[task] = {"n": int(rows.size),
                               "accuracy": accuracy(y_bool, y_hat),
                               "balanced_accuracy": balanced_accuracy(y_bool, y_hat)}
                pool[task].append(y_hat)
                pool_true[task].append(y_bool)
            else:
                entry[task] = {"n": int(rows.size),
                               "r2": r2_score(y_true, pred),
                               "mae": mean_absolute_error(y_true, pred)}
                pool[task].append(pred)
                pool_true[task].append(y_true)
        per_mode.append(entry)
    pooled: dict = {}
    for task in TASKS:
        if not pool[task]:
            pooled[task] = {"n": 0}
            continue
        y_hat = np.concatenate(pool[task])
        y_true = np.concatenate(pool_true[task])
        if task in ("excited", "stable"):
            pooled[task] = {"n": int(y_true.size),
                            "accuracy": accuracy(y_true, y_hat),
                            "balanced_accuracy": balanced_accuracy(y_true, y_hat)}
        else:
            pooled[task] = {"n": int(y_true.size),
                            "r2": r2_score(y_true, y_hat),
                            "mae": mean_absolute_error(y_true, y_hat)}
    return {"split": part, "pooled": pooled, "per_mode": per_mode}
