"""Manufacturing-deviation sweeps: feasibility maps over (dh_r, dh_g) grids.

Every grid cell perturbs the nominal clearance and groove depth, runs the
selected evaluator over a speed sweep and aggregates worst-case metrics:
the minimum log decrement over all excited modes and speeds, the minimum
load-capacity proxy and the maximum power loss.  A cell is feasible when
every excited mode stays strictly stable at every speed.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .bearing import (BearingCoefficients, GroovedFilmSolver, HGJBGeometry,
                      OperatingPoint, compressibility_number, load_capacity_proxy,
                      power_loss)
from .errors import EvaluationTimeout, GasrotorError, InvariantError
from .features import features_from_properties
from .fluids import FluidRegistry, fluid_properties
from .rotor import MassProperties, Rotor, mass_properties, serialize_rotor
from .rotordyn import ModeStabilityResult, assemble, intersection_sweep
from .surrogate.dataset import DEFAULT_RANGES
from .surrogate.ensemble import SurrogateModel, mode_results_from_batch, predict_batch

DEFAULT_TOL_GRID_N = 21
DEFAULT_SPEED_FACTORS = (0.5, 1.2)
DEFAULT_SPEED_POINTS = 11


@dataclass(frozen=True)
class ToleranceSpec:
    """Symmetric manufacturing deviation window, metres."""

    delta_h_r: float
    delta_h_g: float
    grid_n: int = DEFAULT_TOL_GRID_N

    def __post_init__(self):
        if self.delta_h_r < 0 or self.delta_h_g < 0:
            raise InvariantError("deviations must be >= 0", path="tolerance")
        if self.grid_n < 1 or self.grid_n % 2 == 0:
            raise InvariantError("tolerance grid_n must be odd so 0 is a grid point",
                                 path="tolerance.grid_n")

    def axis(self, delta: float) -> np.ndarray:
        if delta == 0.0 or self.grid_n == 1:
            return np.array([0.0])
        return np.linspace(-delta, delta, self.grid_n)


@dataclass(frozen=True)
class SweepSpec:
    """Speed sweep plus tolerance grid and evaluator choice."""

    speeds: tuple[float, ...]
    tolerance: ToleranceSpec
    evaluator: str = "oracle"

    def __post_init__(self):
        if len(self.speeds) == 0:
            raise InvariantError("speed sweep needs at least one speed", path="sweep.speeds")
        if any(s <= 0 for s in self.speeds):
            raise InvariantError("speeds must be > 0", path="sweep.speeds")
        if any(b <= a for a, b in zip(self.speeds, self.speeds[1:])):
            raise InvariantError("speeds must be strictly increasing", path="sweep.speeds")
        if self.evaluator not in ("oracle", "surrogate"):
            raise InvariantError(f"unknown evaluator {self.evaluator!r}", path="sweep.evaluator")


def default_speeds(nominal_rpm: float, points: int = DEFAULT_SPEED_POINTS,
                   factors: tuple[float, float] = DEFAULT_SPEED_FACTORS) -> tuple[float, ...]:
    return tuple(np.linspace(factors[0] * nominal_rpm, factors[1] * nominal_rpm, points))


@dataclass(frozen=True)
class DesignPerformance:
    """Single-design outcome: stability quartet plus scalar metrics."""

    modes: tuple[ModeStabilityResult, ...]
    power_loss_w: float
    load_capacity_n: float
    warnings: tuple[str, ...] = ()

    def worst_log_dec(self) -> float:
        deltas = [m.log_dec for m in self.modes if m.excited]
        return min(deltas) if deltas else math.nan

    def all_stable(self) -> bool:
        return all(m.stable for m in self.modes if m.excited)


@dataclass
class FeasibilityMap:
    """Aggregated metrics over the deviation grid (axes in metres)."""

    dhr_axis: np.ndarray
    dhg_axis: np.ndarray
    worst_log_dec: np.ndarray      # min over speeds and excited modes, NaN if none
    min_load_capacity: np.ndarray
    max_power_loss: np.ndarray
    feasible: np.ndarray           # bool
    valid: np.ndarray              # bool, False where the evaluator failed
    speeds: tuple[float, ...]
    evaluator: str
    failures: list[dict] = field(default_factory=list)

    @property
    def shape(self) -> tuple[int, int]:
        return self.worst_log_dec.shape


def feasible_fraction(fmap: FeasibilityMap) -> float:
    """Share of valid cells that are feasible."""
    n_valid = int(fmap.valid.sum())
    if n_valid == 0:
        raise InvariantError("all sweep cells failed; no feasibility defined", path="map")
    return float((fmap.feasible & fmap.valid).sum() / n_valid)


# ---------------------------------------------------------------------------
# evaluators


def feature_warnings(x: np.ndarray,
                     ranges: dict[str, tuple[float, float]] | None) -> tuple[str, ...]:
    """Out-of-training-range flags; advisory only, never fatal."""
    if ranges is None:
        return ()
    from .features import FEATURE_NAMES
    out = []
    for i, name in enumerate(FEATURE_NAMES):
        if name not in ranges:
            continue
        lo, hi = ranges[name]
        if not (lo <= x[i] <= hi):
            out.append(f"feature {name}={x[i]:.4g} outside training range [{lo:.4g}, {hi:.4g}]")
    return tuple(out)


class OracleEvaluator:
    """Full physics path: film solver + whirl sweep per design and speed."""

    name = "oracle"

    def __init__(self, grid_n: int = 101, nu_grid: np.ndarray | None = None,
                 registry: FluidRegistry | None = None, mac_min: float = 0.9):
        self.grid_n = grid_n
        self.nu_grid = nu_grid
        self.registry = registry
        self.mac_min = mac_min

    def evaluate(self, mp: MassProperties, geom: HGJBGeometry,
                 op: OperatingPoint) -> DesignPerformance:
        props = fluid_properties(op.fluid, op.T, op.p_a, registry=self.registry)
        omega = op.omega
        lam = compressibility_number(props.mu, omega, geom.R, op.p_a, geom.h_r)
        solver = GroovedFilmSolver(geom.alpha, geom.beta, geom.gamma, geom.hg_hr,
                                   geom.L_D, lam, self.grid_n)
        scale = op.p_a * geom.R * geom.L / geom.h_r

        class _Provider:
            def __call__(_, nu):
                K, C = solver.coefficients(np.array([nu]))
                pair = (K[0] * scale, C[0] * scale / omega)
                return (pair, pair)

            def batch(_, nus):
                K, C = solver.coefficients(nus)
                return [(K * scale, C * scale / omega)] * 2

        model = assemble(mp, omega)
        modes = intersection_sweep(model, _Provider(), nu_grid=self.nu_grid,
                                   mac_min=self.mac_min)
        K1, C1 = solver.coefficients(np.array([1.0]))
        coeffs = BearingCoefficients(K=K1[0], C=C1[0], Lambda=lam, nu=1.0)
        return DesignPerformance(
            modes=tuple(modes),
            power_loss_w=power_loss(geom, props.mu, omega),
            load_capacity_n=load_capacity_proxy(coeffs, geom, op.p_a),
        )


class SurrogateEvaluator:
    """Surrogate stability path; losses and load proxy stay analytic/direct.

    The stability quartet comes from the trained model.  Power loss is the
    closed-form shear expression and the load-capacity proxy one direct
    synchronous film solve, both far cheaper than the whirl sweep the
    surrogate replaces.
    """

    name = "surrogate"

    def __init__(self, model: SurrogateModel, grid_n: int = 101,
                 registry: FluidRegistry | None = None):
        self.model = model
        self.grid_n = grid_n
        self.registry = registry
        self.ranges = model.feature_ranges() or dict(DEFAULT_RANGES)

    def _scalars(self, geom: HGJBGeometry, op: OperatingPoint,
                 mu: float) -> tuple[float, float]:
        omega = op.omega
        lam = compressibility_number(mu, omega, geom.R, op.p_a, geom.h_r)
        solver = GroovedFilmSolver(geom.alpha, geom.beta, geom.gamma, geom.hg_hr,
                                   geom.L_D, lam, self.grid_n)
        K1, C1 = solver.coefficients(np.array([1.0]))
        coeffs = BearingCoefficients(K=K1[0], C=C1[0], Lambda=lam, nu=1.0)
        return (power_loss(geom, mu, omega), load_capacity_proxy(coeffs, geom, op.p_a))

    def evaluate(self, mp: MassProperties, geom: HGJBGeometry,
                 op: OperatingPoint) -> DesignPerformance:
        return self.evaluate_batch(mp, [geom], [op])[0]

    def evaluate_batch(self, mp: MassProperties, geoms, ops) -> list[DesignPerformance]:
        X = np.empty((len(geoms), 11))
        mus = []
        for i, (geom, op) in enumerate(zip(geoms, ops)):
            mu = fluid_properties(op.fluid, op.T, op.p_a, registry=self.registry).mu
            mus.append(mu)
            X[i] = features_from_properties(mp, geom, op, mu)
        batch = predict_batch(self.model, X)
        out = []
        for i, (geom, op) in enumerate(zip(geoms, ops)):
            ploss, wcap = self._scalars(geom, op, mus[i])
            out.append(DesignPerformance(
                modes=tuple(mode_results_from_batch(batch, i)),
                power_loss_w=ploss,
                load_capacity_n=wcap,
                warnings=feature_warnings(X[i], self.ranges),
            ))
        return out


# ---------------------------------------------------------------------------
# the sweep


def run_sweep(rotor: Rotor, geom: HGJBGeometry, op: OperatingPoint,
              spec: SweepSpec, evaluator, progress=None,
              deadline: float | None = None) -> FeasibilityMap:
    """Evaluate the deviation grid; per-cell failures are recorded, not fatal.

    ``progress(done, total)`` is invoked after every completed cell.
    ``deadline`` (``time.monotonic()`` timestamp) aborts the sweep with
    :class:`EvaluationTimeout`.
    """
    tol = spec.tolerance
    dhr_axis = tol.axis(tol.delta_h_r)
    dhg_axis = tol.axis(tol.delta_h_g)
    if geom.h_r + dhr_axis.min() <= 0:
        raise InvariantError("h_r + delta_h_r must stay positive over the grid",
                             path="tolerance.delta_h_r")
    if geom.h_g + dhg_axis.min() < 0:
        raise InvariantError("h_g + delta_h_g must stay non-negative over the grid",
                             path="tolerance.delta_h_g")
    mp = mass_properties(rotor)
    shape = (dhr_axis.size, dhg_axis.size)
    worst = np.full(shape, np.nan)
    min_load = np.full(shape, np.nan)
    max_power = np.full(shape, np.nan)
    feasible = np.zeros(shape, dtype=bool)
    valid = np.zeros(shape, dtype=bool)
    failures: list[dict] = []
    total = shape[0] * shape[1]
    done = 0
    batched = hasattr(evaluator, "evaluate_batch")
    for i, dhr in enumerate(dhr_axis):
        for j, dhg in enumerate(dhg_axis):
            if deadline is not None and time.monotonic() > deadline:
                raise EvaluationTimeout(f"sweep timed out after {done}/{total} cells")
            geom_cell = replace(geom, h_r=geom.h_r + dhr, h_g=geom.h_g + dhg)
            ops = [replace(op, N=speed) for speed in spec.speeds]
            try:
                if batched:
                    results = evaluator.evaluate_batch(mp, [geom_cell] * len(ops), ops)
                else:
                    results = [evaluator.evaluate(mp, geom_cell, o) for o in ops]
            except GasrotorError as exc:
                failures.append({"i": int(i), "j": int(j),
                                 "delta_h_r": float(dhr), "delta_h_g": float(dhg),
                                 "code": exc.code, "message": exc.message})
                done += 1
                if progress is not None:
                    progress(done, total)
                continue
            deltas = [m.log_dec for r in results for m in r.modes if m.excited]
            worst[i, j] = min(deltas) if deltas else np.nan
            min_load[i, j] = min(r.load_capacity_n for r in results)
            max_power[i, j] = max(r.power_loss_w for r in results)
            feasible[i, j] = all(r.all_stable() for r in results)
            valid[i, j] = True
            done += 1
            if progress is not None:
                progress(done, total)
    return FeasibilityMap(dhr_axis=dhr_axis, dhg_axis=dhg_axis, worst_log_dec=worst,
                          min_load_capacity=min_load, max_power_loss=max_power,
                          feasible=feasible, valid=valid, speeds=tuple(spec.speeds),
                          evaluator=getattr(evaluator, "name", type(evaluator).__name__),
                          failures=failures)


# ---------------------------------------------------------------------------
# contour document


def design_digest(rotor: Rotor, geom: HGJBGeometry, op: OperatingPoint) -> str:
    payload = serialize_rotor(rotor) + json.dumps(
        {"hgjb": vars(geom).copy(), "operating": vars(op).copy()}, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()


def _grid_to_lists(arr: np.ndarray) -> list:
    return [[None if (isinstance(v, float) and math.isnan(v)) else v
             for v in map(float, row)] for row in arr]


def _lists_to_grid(rows: list) -> np.ndarray:
    return np.array([[math.nan if v is None else float(v) for v in row] for row in rows])


def export_contours(fmap: FeasibilityMap, design: str = "",
                    created: float | None = None) -> dict:
    """Structured contour document (axes in micrometres) for UI and CLI."""
    return {
        "format_version": 1,
        "axes": {
            "delta_h_r_um": [float(v) * 1e6 for v in fmap.dhr_axis],
            "delta_h_g_um": [float(v) * 1e6 for v in fmap.dhg_axis],
        },
        "metrics": {
            "worst_log_dec": _grid_to_lists(fmap.worst_log_dec),
            "min_load_capacity_n": _grid_to_lists(fmap.min_load_capacity),
            "max_power_loss_w": _grid_to_lists(fmap.max_power_loss),
        },
        "feasible": [[bool(v) for v in row] for row in fmap.feasible],
        "valid": [[bool(v) for v in row] for row in fmap.valid],
        "failures": list(fmap.failures),
        "metadata": {
            "design_digest": design,
            "evaluator": fmap.evaluator,
            "speeds_rpm": [float(s) for s in fmap.speeds],
            "created_unix": time.time() if created is None else created,
        },
    }


def parse_contours(doc: dict | str) -> FeasibilityMap:
    """Rebuild a :class:`FeasibilityMap` from an exported document."""
    if isinstance(doc, str):
        doc = json.loads(doc)
    if doc.get("format_version") != 1:
        raise InvariantError("unsupported contour document version", path="format_version")
    return FeasibilityMap(
        dhr_axis=np.array(doc["axes"]["delta_h_r_um"]) * 1e-6,
        dhg_axis=np.array(doc["axes"]["delta_h_g_um"]) * 1e-6,
        worst_log_dec=_lists_to_grid(doc["metrics"]["worst_log_dec"]),
        min_load_capacity=_lists_to_grid(doc["metrics"]["min_load_capacity_n"]),
        max_power_loss=_lists_to_grid(doc["metrics"]["max_power_loss_w"]),
        feasible=np.array(doc["feasible"], dtype=bool),
        valid=np.array(doc["valid"], dtype=bool),
        speeds=tuple(doc["metadata"].get("speeds_rpm", ())),
        evaluator=doc["metadata"].get("evaluator", ""),
        failures=list(doc.get("failures", [])),
    )
