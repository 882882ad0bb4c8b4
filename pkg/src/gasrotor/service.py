"""HTTP service exposing the evaluation engine under /api/v1.

All request and response bodies are JSON in SI units (the dashboard
converts its micrometre/rpm widgets before dispatch).  Errors use one
body shape ``{"code", "message", "path"}`` with the same codes the CLI
prints, so both frontends share a single validation path.

Endpoints:

* ``GET  /healthz`` - service version and loaded-model digest.
* ``GET  /api/v1/models`` - model files with integrity status.
* ``POST /api/v1/rotor/validate`` - rotor document -> mass properties.
* ``POST /api/v1/compute`` - single-design evaluation.
* ``POST /api/v1/sweep`` - robustness sweep; streams NDJSON progress
  events and terminates with the contour document.
"""

from __future__ import annotations

import json
import os
import queue
import threading
import time

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, StreamingResponse

from . import __version__
from .bearing import HGJBGeometry, OperatingPoint
from .config import Config
from .errors import (EvaluationTimeout, FormatError, GasrotorError,
                     InvariantError, ModelIntegrityError)
from .features import featureize, FEATURE_NAMES
from .fluids import FluidRegistry
from .rotor import Rotor, mass_properties, rotor_from_document
from .sweep import (OracleEvaluator, SurrogateEvaluator, SweepSpec, ToleranceSpec,
                    default_speeds, design_digest, export_contours, run_sweep)
from .surrogate.modelio import load_model, model_digest

#: HTTP status per error code; anything unlisted is a 500.
STATUS_BY_CODE = {
    "syntax_error": 400,
    "invariant_violation": 422,
    "unknown_material": 422,
    "unknown_fluid": 422,
    "model_not_loaded": 404,
    "model_integrity": 409,
    "timeout": 504,
}


class ModelNotLoaded(GasrotorError):
    code = "model_not_loaded"


def _error_response(exc: GasrotorError) -> JSONResponse:
    return JSONResponse(status_code=STATUS_BY_CODE.get(exc.code, 500),
                        content=exc.to_dict())


def _require(body: dict, key: str) -> dict:
    if key not in body:
        raise FormatError(f"missing required section {key!r}")
    section = body[key]
    if not isinstance(section, dict):
        raise FormatError(f"section {key!r} must be an object")
    return section


def _number(section: dict, key: str, path: str) -> float:
    if key not in section:
        raise FormatError(f"missing field {path}.{key}")
    value = section[key]
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise FormatError(f"field {path}.{key} must be a number")
    return float(value)


def parse_geometry(section: dict) -> HGJBGeometry:
    return HGJBGeometry(
        alpha=_number(section, "alpha", "hgjb"), beta=_number(section, "beta", "hgjb"),
        gamma=_number(section, "gamma", "hgjb"), h_g=_number(section, "h_g", "hgjb"),
        h_r=_number(section, "h_r", "hgjb"), L=_number(section, "L", "hgjb"),
        D=_number(section, "D", "hgjb"))


def parse_operating(section: dict) -> OperatingPoint:
    fluid = section.get("fluid")
    if not isinstance(fluid, str):
        raise FormatError("field operating.fluid must be a string")
    return OperatingPoint(fluid=fluid, p_a=_number(section, "p_a", "operating"),
                          T=_number(section, "T", "operating"),
                          N=_number(section, "N", "operating"))


def mass_properties_payload(rotor: Rotor) -> dict:
    mp = mass_properties(rotor)
    return {
        "mass_kg": mp.mass,
        "z_cg_m": mp.z_cg,
        "I_polar_kg_m2": mp.I_polar,
        "I_transverse_kg_m2": mp.I_transverse,
        "bearing_offsets_m": list(mp.bearing_offsets),
        "total_length_m": rotor.total_length,
        "n_elements": len(rotor.elements),
    }


def modes_payload(modes) -> list[dict]:
    return [{
        "mode_id": m.mode_id,
        "name": m.name,
        "excited": m.excited,
        "stable": m.stable,
        "whirl_speed_ratio": m.whirl_speed_ratio,
        "log_dec": m.log_dec,
    } for m in modes]


class EngineState:
    """Loaded model, registry and config shared by all requests (immutable)."""

    def __init__(self, config: Config):
        self.config = config
        self.registry = (FluidRegistry.from_file(config.fluid_registry_path)
                         if config.fluid_registry_path else FluidRegistry())
        self.model = None
        self.model_digest: str | None = None
        self.model_error: str | None = None
        if config.model_path:
            try:
                self.model = load_model(config.model_path)
                self.model_digest = model_digest(config.model_path)
            except (OSError, ModelIntegrityError) as exc:
                self.model_error = str(exc)

    def list_models(self) -> list[dict]:
        out = []
        seen = set()
        candidates: list[str] = []
        if self.config.model_path:
            candidates.append(self.config.model_path)
        if self.config.model_dir and os.path.isdir(self.config.model_dir):
            for name in sorted(os.listdir(self.config.model_dir)):
                if name.endswith(".grsm"):
                    candidates.append(os.path.join(self.config.model_dir, name))
        for path in candidates:
            if path in seen:
                continue
            seen.add(path)
            entry: dict = {"path": path, "name": os.path.basename(path)}
            try:
                model = load_model(path)
                entry["status"] = "loaded" if path == self.config.model_path \
                    and self.model is not None else "available"
                entry["metadata"] = {k: model.metadata.get(k) for k in
                                     ("created_unix", "seed", "dataset_digest",
                                      "package_version")}
            except (OSError, ModelIntegrityError) as exc:
                entry["status"] = "invalid"
                entry["error"] = str(exc)
            out.append(entry)
        return out

    def evaluator_for(self, name: str, grid_n: int):
        if name == "surrogate":
            if self.model is None:
                raise ModelNotLoaded("no surrogate model loaded"
                                     + (f" ({self.model_error})" if self.model_error else ""))
            return SurrogateEvaluator(self.model, grid_n=grid_n, registry=self.registry)
        return OracleEvaluator(grid_n=grid_n, nu_grid=self.config.nu_grid(),
                               registry=self.registry)


def parse_compute_request(body, state: EngineState):
    """Shared request validation; returns (rotor, geom, op, evaluator, grid_n, sweep)."""
    if not isinstance(body, dict):
        raise FormatError("request body must be a JSON object")
    if "rotor" not in body:
        raise FormatError("missing required section 'rotor'")
    rotor = rotor_from_document(body["rotor"])
    geom = parse_geometry(_require(body, "hgjb"))
    op = parse_operating(_require(body, "operating"))
    evaluator = body.get("evaluator", "oracle")
    if evaluator not in ("oracle", "surrogate"):
        raise InvariantError(f"unknown evaluator {evaluator!r}", path="evaluator")
    accuracy = body.get("accuracy")
    if accuracy is not None and not isinstance(accuracy, int):
        raise FormatError("field accuracy must be an integer")
    grid_n = state.config.grid_for_accuracy(accuracy)
    if op.N <= 0:
        raise InvariantError("operating.N must be positive for evaluation",
                             path="operating.N")
    sweep_spec = None
    if body.get("sweep") is not None:
        section = body["sweep"]
        if not isinstance(section, dict):
            raise FormatError("section 'sweep' must be an object")
        grid = section.get("grid_n", state.config.tolerance_grid_n)
        if not isinstance(grid, int):
            raise FormatError("field sweep.grid_n must be an integer")
        tol = ToleranceSpec(delta_h_r=_number(section, "delta_h_r", "sweep"),
                            delta_h_g=_number(section, "delta_h_g", "sweep"),
                            grid_n=grid)
        if "speeds_rpm" in section:
            speeds = section["speeds_rpm"]
            if not isinstance(speeds, list) or not all(
                    isinstance(s, (int, float)) and not isinstance(s, bool) for s in speeds):
                raise FormatError("field sweep.speeds_rpm must be a number array")
            speeds = tuple(float(s) for s in speeds)
        else:
            speeds = default_speeds(op.N, state.config.speed_points,
                                    state.config.speed_factors)
        sweep_spec = SweepSpec(speeds=speeds, tolerance=tol, evaluator=evaluator)
    return rotor, geom, op, evaluator, grid_n, sweep_spec


def create_app(config: Config | None = None) -> FastAPI:
    state = EngineState(config or Config())
    app = FastAPI(title="gasrotor", version=__version__)
    app.state.engine = state

    @app.exception_handler(GasrotorError)
    async def _handle_domain_error(_request, exc: GasrotorError):
        return _error_response(exc)

    async def _json_body(request: Request):
        raw = await request.body()
        if not raw:
            raise FormatError("empty request body")
        try:
            return json.loads(raw)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON body: {exc.msg}",
                              line=exc.lineno, column=exc.colno) from None

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok", "version": __version__,
                "model_loaded": state.model is not None,
                "model_digest": state.model_digest}

    @app.get("/api/v1/models")
    async def models():
        return {"models": state.list_models()}

    @app.post("/api/v1/rotor/validate")
    async def validate(request: Request):
        body = await _json_body(request)
        rotor = rotor_from_document(body)
        return mass_properties_payload(rotor)

    @app.post("/api/v1/compute")
    async def compute(request: Request):
        body = await _json_body(request)
        t_start = time.perf_counter()
        rotor, geom, op, evaluator_name, grid_n, _ = parse_compute_request(body, state)
        evaluator = state.evaluator_for(evaluator_name, grid_n)
        mp = mass_properties(rotor)
        t_eval = time.perf_counter()
        timeout = 1.0 if evaluator_name == "surrogate" else state.config.timeout_s
        perf = evaluator.evaluate(mp, geom, op)
        elapsed = time.perf_counter() - t_eval
        if elapsed > timeout:
            raise EvaluationTimeout(
                f"evaluation exceeded {timeout:.0f} s budget",
                timing_ms={"evaluate": elapsed * 1e3})
        x = featureize(rotor, geom, op, registry=state.registry)
        return {
            "evaluator": evaluator_name,
            "mass_properties": mass_properties_payload(rotor),
            "modes": modes_payload(perf.modes),
            "power_loss_w": perf.power_loss_w,
            "load_capacity_n": perf.load_capacity_n,
            "features": dict(zip(FEATURE_NAMES, map(float, x))),
            "warnings": list(perf.warnings),
            "timing_ms": {
                "evaluate": elapsed * 1e3,
                "total": (time.perf_counter() - t_start) * 1e3,
            },
        }

    @app.post("/api/v1/sweep")
    async def sweep(request: Request):
        body = await _json_body(request)
        rotor, geom, op, evaluator_name, grid_n, sweep_spec = \
            parse_compute_request(body, state)
        if sweep_spec is None:
            raise FormatError("missing required section 'sweep'")
        evaluator = state.evaluator_for(evaluator_name, grid_n)
        digest = design_digest(rotor, geom, op)
        deadline = time.monotonic() + state.config.timeout_s
        events: queue.Queue = queue.Queue()

        def worker():
            try:
                fmap = run_sweep(rotor, geom, op, sweep_spec, evaluator,
                                 progress=lambda done, total: events.put(
                                     {"event": "progress", "done": done, "total": total}),
                                 deadline=deadline)
                events.put({"event": "result",
                            "document": export_contours(fmap, design=digest)})
            except GasrotorError as exc:
                events.put({"event": "error", **exc.to_dict()})
            finally:
                events.put(None)

        threading.Thread(target=worker, daemon=True).start()

        def stream():
            while True:
                item = events.get()
                if item is None:
                    break
                yield json.dumps(item) + "\n"

        return StreamingResponse(stream(), media_type="application/x-ndjson")

    return app
