"""Ensemble blocks, mode pipelines and the assembled surrogate model.

Each excitation mode is served by a sequence of four blocks: an
excited-flag classifier gates a stability classifier and the whirl-ratio
and log-decrement regressors.  Every block averages six independently
initialised member networks; the member spread is reported as an
uncertainty measure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvariantError
from ..rotordyn import ModeStabilityResult
from .net import MLPSpec, forward
from .training import Hyperparams, train_network

TASKS = ("excited", "stable", "wsr", "logdec")
CLASSIFIER_TASKS = ("excited", "stable")
N_MEMBERS = 6
N_MODES = 4

#: Decision threshold of both classifier gates.
GATE_THRESHOLD = 0.5


@dataclass(frozen=True)
class Normalizer:
    """Per-feature standardisation fitted on the training split."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "Normalizer":
        X = np.asarray(X, dtype=float)
        std = X.std(axis=0)
        return cls(mean=X.mean(axis=0), std=np.where(std > 0, std, 1.0))

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.mean) / self.std


TARGET_TRANSFORMS = ("linear", "asinh")


@dataclass
class EnsembleBlock:
    """Six same-spec member networks plus input/target statistics.

    Regressor targets are standardised during training; heavy-tailed
    targets (the log decrement) additionally pass through asinh, undone
    at prediction time.
    """

    task: str
    spec: MLPSpec
    normalizer: Normalizer
    members: list[list[np.ndarray]]
    target_mean: float = 0.0
    target_std: float = 1.0
    target_transform: str = "linear"

    def __post_init__(self):
        if self.task not in TASKS:
            raise InvariantError(f"unknown task {self.task!r}", path="block.task")
        if len(self.members) != N_MEMBERS:
            raise InvariantError(f"block needs {N_MEMBERS} members, got {len(self.members)}",
                                 path="block.members")
        if self.target_transform not in TARGET_TRANSFORMS:
            raise InvariantError(f"unknown target transform {self.target_transform!r}",
                                 path="block.target_transform")

    @property
    def is_classifier(self) -> bool:
        return self.task in CLASSIFIER_TASKS

    def encode_target(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if self.target_transform == "asinh":
            y = np.arcsinh(y)
        return (y - self.target_mean) / self.target_std

    def member_outputs(self, X: np.ndarray) -> np.ndarray:
        """(n_members, N) member predictions in target units."""
        Xn = self.normalizer.transform(np.atleast_2d(X))
        out = np.stack([forward(self.spec, p, Xn) for p in self.members])
        if not self.is_classifier:
            out = out * self.target_std + self.target_mean
            if self.target_transform == "asinh":
                out = np.sinh(out)
        return out


def ensemble_predict(block: EnsembleBlock, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mean and population spread of the member predictions."""
    out = block.member_outputs(X)
    return out.mean(axis=0), out.std(axis=0)


def _class_weights(y: np.ndarray) -> np.ndarray:
    """Inverse-frequency weights with mean 1 (balanced classes)."""
    y = np.asarray(y, float)
    pos = float(y.mean())
    if pos in (0.0, 1.0):
        return np.ones(y.size)
    w = np.where(y >= 0.5, 0.5 / pos, 0.5 / (1.0 - pos))
    return w / w.mean()


def train_block(X_train: np.ndarray, y_train: np.ndarray, X_val: np.ndarray,
                y_val: np.ndarray, task: str, spec: MLPSpec, hp: Hyperparams,
                seed: int) -> EnsembleBlock:
    """Fit one ensemble block; members differ only in their seed offsets.

    Classifiers train on class-balanced sample weights; the log-decrement
    regressor trains in asinh space to tame its heavy tails.
    """
    if task not in TASKS:
        raise InvariantError(f"unknown task {task!r}", path="task")
    classifier = task in CLASSIFIER_TASKS
    expected_head = "logistic" if classifier else "identity"
    if spec.head != expected_head:
        raise InvariantError(f"task {task} needs a {expected_head} head", path="spec.head")
    normalizer = Normalizer.fit(X_train)
    Xtr = normalizer.transform(X_train)
    Xva = normalizer.transform(X_val)
    w_tr = w_va = None
    if classifier:
        t_mean, t_std, transform = 0.0, 1.0, "linear"
        ytr, yva = np.asarray(y_train, float), np.asarray(y_val, float)
        w_tr, w_va = _class_weights(ytr), _class_weights(yva)
        loss = "bce"
    else:
        transform = "asinh" if task == "logdec" else "linear"
        y = np.asarray(y_train, float)
        t = np.arcsinh(y) if transform == "asinh" else y
        t_mean = float(t.mean())
        t_std = float(t.std()) or 1.0
        ytr = (t - t_mean) / t_std
        tv = np.asarray(y_val, float)
        tv = np.arcsinh(tv) if transform == "asinh" else tv
        yva = (tv - t_mean) / t_std
        loss = "mse"
    member_seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(N_MEMBERS)]
    members = [train_network(spec, Xtr, ytr, Xva, yva, loss, hp, s,
                             w_train=w_tr, w_val=w_va)[0] for s in member_seeds]
    return EnsembleBlock(task=task, spec=spec, normalizer=normalizer, members=members,
                         target_mean=t_mean, target_std=t_std, target_transform=transform)


@dataclass
class SurrogateModel:
    """Four mode pipelines of four blocks each, with provenance metadata."""

    pipelines: list[dict[str, EnsembleBlock]]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.pipelines) != N_MODES:
            raise InvariantError(f"model needs {N_MODES} mode pipelines", path="pipelines")
        for i, pipe in enumerate(self.pipelines):
            missing = set(TASKS) - set(pipe)
            if missing:
                raise InvariantError(f"mode {i + 1} pipeline missing blocks {sorted(missing)}",
                                     path="pipelines")

    def feature_ranges(self) -> dict[str, tuple[float, float]] | None:
        raw = self.metadata.get("feature_ranges")
        if raw is None:
            return None
        return {k: (float(v[0]), float(v[1])) for k, v in raw.items()}


def predict_mode(pipeline: dict[str, EnsembleBlock], x: np.ndarray,
                 mode_id: int) -> ModeStabilityResult:
    """Gated single-point prediction for one mode pipeline."""
    x = np.atleast_2d(x)
    p_exc, _ = ensemble_predict(pipeline["excited"], x)
    if p_exc[0] < GATE_THRESHOLD:
        return ModeStabilityResult(mode_id=mode_id, excited=False, stable=None,
                                   whirl_speed_ratio=None, log_dec=None)
    p_st, _ = ensemble_predict(pipeline["stable"], x)
    wsr, _ = ensemble_predict(pipeline["wsr"], x)
    logdec, _ = ensemble_predict(pipeline["logdec"], x)
    return ModeStabilityResult(mode_id=mode_id, excited=True,
                               stable=bool(p_st[0] >= GATE_THRESHOLD),
                               whirl_speed_ratio=float(max(wsr[0], 1e-9)),
                               log_dec=float(logdec[0]))


def predict_batch(model: SurrogateModel, X: np.ndarray) -> dict[str, np.ndarray]:
    """Vectorised gated predictions for all 4 modes over (N, 11) inputs.

    Returns arrays of shape (N, 4): ``excited`` (bool), ``stable`` (bool,
    only meaningful where excited), ``wsr`` and ``logdec`` (NaN where not
    excited), plus the raw gate probabilities and ensemble spreads.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = X.shape[0]
    out = {
        "excited": np.zeros((n, N_MODES), dtype=bool),
        "stable": np.zeros((n, N_MODES), dtype=bool),
        "wsr": np.full((n, N_MODES), np.nan),
        "logdec": np.full((n, N_MODES), np.nan),
        "excited_prob": np.zeros((n, N_MODES)),
        "logdec_spread": np.full((n, N_MODES), np.nan),
    }
    for m, pipe in enumerate(model.pipelines):
        p_exc, _ = ensemble_predict(pipe["excited"], X)
        excited = p_exc >= GATE_THRESHOLD
        out["excited_prob"][:, m] = p_exc
        out["excited"][:, m] = excited
        if np.any(excited):
            Xe = X[excited]
            p_st, _ = ensemble_predict(pipe["stable"], Xe)
            wsr, _ = ensemble_predict(pipe["wsr"], Xe)
            logdec, spread = ensemble_predict(pipe["logdec"], Xe)
            out["stable"][excited, m] = p_st >= GATE_THRESHOLD
            out["wsr"][excited, m] = np.maximum(wsr, 1e-9)
            out["logdec"][excited, m] = logdec
            out["logdec_spread"][excited, m] = spread
    return out


def mode_results_from_batch(batch: dict[str, np.ndarray], row: int) -> list[ModeStabilityResult]:
    """Materialise the 4 ModeStabilityResult objects for one batch row."""
    results = []
    for m in range(N_MODES):
        if batch["excited"][row, m]:
            results.append(ModeStabilityResult(
                mode_id=m + 1, excited=True, stable=bool(batch["stable"][row, m]),
                whirl_speed_ratio=float(batch["wsr"][row, m]),
                log_dec=float(batch["logdec"][row, m])))
        else:
            results.append(ModeStabilityResult(mode_id=m + 1, excited=False, stable=None,
                                               whirl_speed_ratio=None, log_dec=None))
    return results
