"""Training data: Latin-hypercube sampling, physics labelling, CSV round trip.

One dataset row holds the 11 dimensionless features plus the four-mode
label sets (excited flag, stable flag, whirl speed ratio, log decrement).
Whirl ratio and log decrement are stored only for excited modes and kept
as NaN elsewhere; the CSV writes empty cells there.
"""

from __future__ import annotations

import hashlib
import io
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from ..errors import FormatError, GasrotorError, InvariantError
from ..features import FEATURE_NAMES, N_FEATURES, evaluate_feature_vector

#: Hypercube sampling windows for the ten free features; ``z2_bar`` is
#: derived as ``z1_bar + 1`` (the offsets are measured in bearing spans).
#: This broad window brackets small-scale turbocompressor practice.
DEFAULT_RANGES: dict[str, tuple[float, float]] = {
    "alpha": (0.1, 0.9),
    "beta_pi": (110.0 / 180.0, 170.0 / 180.0),
    "gamma": (0.3, 0.9),
    "hg_hr": (1.0, 4.0),
    "L_D": (0.5, 2.0),
    "Lambda": (0.5, 40.0),
    "m_bar": (1e-3, 1.0),
    "It_bar": (1e-3, 1.0),
    "Ip_It": (0.02, 1.5),
    "z1_bar": (-0.9, -0.1),
}

#: Narrower window around the example-design family.  Surrogates meant to
#: back interactive robustness maps should train on the neighbourhood the
#: designer actually explores; at a few thousand samples this window gives
#: dashboard-grade fidelity that the full DEFAULT_RANGES breadth cannot.
REFERENCE_NEIGHBORHOOD_RANGES: dict[str, tuple[float, float]] = {
    "alpha": (0.35, 0.65),
    "beta_pi": (125.0 / 180.0, 155.0 / 180.0),
    "gamma": (0.6, 0.9),
    "hg_hr": (1.2, 3.0),
    "L_D": (1.0, 2.0),
    "Lambda": (0.5, 3.0),
    "m_bar": (0.1, 0.8),
    "It_bar": (0.03, 0.4),
    "Ip_It": (0.02, 0.3),
    "z1_bar": (-0.75, -0.4),
}

RANGE_PRESETS = {"default": DEFAULT_RANGES,
                 "reference-neighborhood": REFERENCE_NEIGHBORHOOD_RANGES}

_FREE_FEATURES = tuple(DEFAULT_RANGES)
N_MODES = 4

_LABEL_COLUMNS = [f"{name}_{m}" for m in range(1, N_MODES + 1)
                  for name in ("excited", "stable", "wsr", "logdec")]
CSV_HEADER = ",".join(FEATURE_NAMES + tuple(_LABEL_COLUMNS) + ("split",))


@dataclass
class TrainingDataset:
    """Labelled samples with frozen train/val/test index splits."""

    features: np.ndarray          # (N, 11)
    excited: np.ndarray           # (N, 4) bool
    stable: np.ndarray            # (N, 4) bool, meaningful where excited
    wsr: np.ndarray               # (N, 4) float, NaN unless excited
    logdec: np.ndarray            # (N, 4) float, NaN unless excited
    split: dict[str, np.ndarray] = field(default_factory=dict)
    seed: int | None = None
    n_failed: int = 0
    ranges: dict[str, tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        n = self.features.shape[0]
        if self.features.shape != (n, N_FEATURES):
            raise InvariantError("features must be (N, 11)", path="dataset.features")
        for name in ("excited", "stable", "wsr", "logdec"):
            if getattr(self, name).shape != (n, N_MODES):
                raise InvariantError(f"{name} must be (N, 4)", path=f"dataset.{name}")
        present = ~np.isnan(self.wsr)
        if np.any(present != self.excited) or np.any(np.isnan(self.logdec) == self.excited):
            raise InvariantError("wsr/logdec must be present exactly for excited modes",
                                 path="dataset.labels")
        seen: set[int] = set()
        for part in self.split.values():
            part_set = set(int(i) for i in part)
            if seen & part_set:
                raise InvariantError("splits must be disjoint", path="dataset.split")
            seen |= part_set

    def __len__(self) -> int:
        return self.features.shape[0]

    def part(self, name: str) -> np.ndarray:
        return self.split[name]

    def digest(self) -> str:
        h = hashlib.sha256()
        for arr in (self.features, self.excited, self.stable, self.wsr, self.logdec):
            h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()


def make_split(n: int, seed: int, fractions=(0.6, 0.2, 0.2)) -> dict[str, np.ndarray]:
    rng = np.random.Generator(np.random.PCG64(seed))
    order = rng.permutation(n)
    n_train = int(round(fractions[0] * n))
    n_val = int(round(fractions[1] * n))
    return {
        "train": np.sort(order[:n_train]),
        "val": np.sort(order[n_train:n_train + n_val]),
        "test": np.sort(order[n_train + n_val:]),
    }


def sample_features(ranges: dict[str, tuple[float, float]], n_samples: int,
                    seed: int) -> np.ndarray:
    """Latin-hypercube sample of the 11-entry feature matrix."""
    lo = np.array([ranges[k][0] for k in _FREE_FEATURES])
    hi = np.array([ranges[k][1] for k in _FREE_FEATURES])
    sampler = qmc.LatinHypercube(d=len(_FREE_FEATURES), seed=seed)
    unit = sampler.random(n=n_samples)
    free = qmc.scale(unit, lo, hi)
    X = np.empty((n_samples, N_FEATURES))
    X[:, :10] = free
    X[:, 10] = free[:, 9] + 1.0  # z2_bar = z1_bar + 1
    return X


def generate_dataset(ranges: dict[str, tuple[float, float]] | None = None,
                     n_samples: int = 2000, seed: int = 0, oracle=None,
                     grid_n: int = 101, fractions=(0.6, 0.2, 0.2),
                     progress=None) -> TrainingDataset:
    """Sample designs and label them with the physics oracle.

    Rows on which the oracle fails (any :class:`GasrotorError`) are
    dropped; the count is reported on the returned dataset.  Fixed seeds
    give bit-identical datasets.
    """
    if n_samples < 100:
        raise InvariantError("need n_samples >= 100", path="n_samples")
    ranges = dict(ranges or DEFAULT_RANGES)
    missing = set(_FREE_FEATURES) - set(ranges)
    if missing:
        raise InvariantError(f"ranges missing {sorted(missing)}", path="ranges")
    if oracle is None:
        def oracle(x):
            return evaluate_feature_vector(x, grid_n=grid_n)
    X = sample_features(ranges, n_samples, seed)
    keep, excited, stable, wsr, logdec = [], [], [], [], []
    n_failed = 0
    for i in range(n_samples):
        try:
            modes = oracle(X[i])
        except GasrotorError:
            n_failed += 1
            continue
        keep.append(i)
        excited.append([m.excited for m in modes])
        stable.append([bool(m.stable) if m.excited else False for m in modes])
        wsr.append([m.whirl_speed_ratio if m.excited else np.nan for m in modes])
        logdec.append([m.log_dec if m.excited else np.nan for m in modes])
        if progress is not None:
            progress(i + 1, n_samples)
    features = X[keep]
    dataset = TrainingDataset(
        features=features,
        excited=np.array(excited, dtype=bool),
        stable=np.array(stable, dtype=bool),
        wsr=np.array(wsr, dtype=float),
        logdec=np.array(logdec, dtype=float),
        split=make_split(len(keep), seed + 1, fractions),
        seed=seed,
        n_failed=n_failed,
        ranges=ranges,
    )
    return dataset


# ---------------------------------------------------------------------------
# CSV round trip


def _fmt(x: float) -> str:
    return "" if np.isnan(x) else repr(float(x))


def dataset_to_csv(dataset: TrainingDataset) -> str:
    """Deterministic CSV text (fixed header, shortest-round-trip floats)."""
    membership = np.full(len(dataset), "test", dtype=object)
    for part, idx in dataset.split.items():
        membership[idx] = part
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for i in range(len(dataset)):
        cells = [repr(float(v)) for v in dataset.features[i]]
        for m in range(N_MODES):
            exc = bool(dataset.excited[i, m])
            cells.append("1" if exc else "0")
            cells.append(("1" if dataset.stable[i, m] else "0") if exc else "")
            cells.append(_fmt(dataset.wsr[i, m]) if exc else "")
            cells.append(_fmt(dataset.logdec[i, m]) if exc else "")
        cells.append(str(membership[i]))
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()


def save_dataset(dataset: TrainingDataset, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dataset_to_csv(dataset))


def load_dataset(path: str) -> TrainingDataset:
    """Read a dataset CSV, including the persisted split membership."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise FormatError("unexpected dataset header", line=1, column=1)
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    n = len(rows)
    features = np.empty((n, N_FEATURES))
    excited = np.zeros((n, N_MODES), dtype=bool)
    stable = np.zeros((n, N_MODES), dtype=bool)
    wsr = np.full((n, N_MODES), np.nan)
    logdec = np.full((n, N_MODES), np.nan)
    split_lists: dict[str, list[int]] = {"train": [], "val": [], "test": []}
    for i, cells in enumerate(rows):
        if len(cells) != N_FEATURES + 4 * N_MODES + 1:
            raise FormatError(f"row has {len(cells)} cells", line=i + 2, column=1)
        features[i] = [float(c) for c in cells[:N_FEATURES]]
        for m in range(N_MODES):
            base = N_FEATURES + 4 * m
            exc = cells[base] == "1"
            excited[i, m] = exc
            if exc:
                stable[i, m] = cells[base + 1] == "1"
                wsr[i, m] = float(cells[base + 2])
                logdec[i, m] = float(cells[base + 3])
        part = cells[-1]
        if part not in split_lists:
            raise FormatError(f"unknown split label {part!r}", line=i + 2, column=1)
        split_lists[part].append(i)
    return TrainingDataset(
        features=features, excited=excited, stable=stable, wsr=wsr, logdec=logdec,
        split={k: np.array(v, dtype=int) for k, v in split_lists.items()},
        seed=None, n_failed=0, ranges=dict(DEFAULT_RANGES),
    )
