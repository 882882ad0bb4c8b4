"""Runtime configuration for the service and CLI.

One JSON file supplies every tunable; each key can be overridden by an
environment variable named ``GASROTOR_<KEY>`` (upper-cased field name),
e.g. ``GASROTOR_MODEL_PATH`` or ``GASROTOR_TIMEOUT_S``.

Documented keys (all optional):

``model_path``          surrogate model file loaded at startup
``model_dir``           directory listed by the /models endpoint
``fluid_registry_path`` JSON fluid registry merged over the built-ins
``timeout_s``           server-side evaluation timeout (default 60)
``grid_n``              default film grid (default 101)
``accuracy_grids``      grid sizes selected by the UI accuracy slider
``nu_start/nu_stop/nu_step``  whirl-ratio sweep window
``speed_points``        speeds in the robustness sweep (default 11)
``speed_factors``       sweep span as factors of the nominal speed
``tolerance_grid_n``    deviation grid resolution (default 21)
``host`` / ``port``     bind address for ``serve``
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields, replace

import numpy as np

from .errors import FormatError

ENV_PREFIX = "GASROTOR_"


@dataclass(frozen=True)
class Config:
    model_path: str | None = None
    model_dir: str | None = None
    fluid_registry_path: str | None = None
    timeout_s: float = 60.0
    grid_n: int = 101
    accuracy_grids: tuple[int, ...] = (51, 101, 201, 401)
    nu_start: float = 0.05
    nu_stop: float = 2.0
    nu_step: float = 0.01
    speed_points: int = 11
    speed_factors: tuple[float, float] = (0.5, 1.2)
    tolerance_grid_n: int = 21
    host: str = "127.0.0.1"
    port: int = 8080

    def nu_grid(self) -> np.ndarray:
        return np.arange(self.nu_start, self.nu_stop + self.nu_step / 2.0, self.nu_step)

    def grid_for_accuracy(self, accuracy: int | None) -> int:
        if accuracy is None:
            return self.grid_n
        if not (1 <= accuracy <= len(self.accuracy_grids)):
            raise FormatError(
                f"accuracy must be in [1, {len(self.accuracy_grids)}], got {accuracy}")
        return self.accuracy_grids[accuracy - 1]


_TUPLE_FIELDS = {"accuracy_grids": int, "speed_factors": float}


def load_config(path: str | None = None, env: dict | None = None) -> Config:
    """Config from defaults, overlaid by the JSON file, then the environment."""
    env = os.environ if env is None else env
    values: dict = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise FormatError(f"invalid config: {exc.msg}",
                                  line=exc.lineno, column=exc.colno) from None
        unknown = set(raw) - {f.name for f in fields(Config)}
        if unknown:
            raise FormatError(f"unknown config keys: {sorted(unknown)}")
        values.update(raw)
    for f in fields(Config):
        env_key = ENV_PREFIX + f.name.upper()
        if env_key in env:
            values[f.name] = env[env_key]
    cfg = Config()
    coerced: dict = {}
    for f in fields(Config):
        if f.name not in values:
            continue
        raw_value = values[f.name]
        if f.name in _TUPLE_FIELDS:
            if isinstance(raw_value, str):
                raw_value = [v for v in raw_value.replace(",", " ").split() if v]
            coerced[f.name] = tuple(_TUPLE_FIELDS[f.name](v) for v in raw_value)
        elif f.name in ("model_path", "model_dir", "fluid_registry_path", "host"):
            coerced[f.name] = None if raw_value in (None, "") else str(raw_value)
        elif f.name in ("grid_n", "speed_points", "tolerance_grid_n", "port"):
            coerced[f.name] = int(raw_value)
        else:
            coerced[f.name] = float(raw_value)
    return replace(cfg, **coerced)
