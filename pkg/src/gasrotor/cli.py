"""Batch command-line interface.

Subcommands: ``gen-data``, ``train``, ``ga-search``, ``eval``, ``compute``,
``sweep`` and ``serve``.  Stochastic commands take ``--seed`` and every
command accepts ``--config``.  Artifact-producing commands write a run
manifest (``<output>.manifest.json``) recording input digests, the seed
and tool versions.  Failures print one machine-readable JSON error line
to stderr (same codes as the HTTP service) and exit non-zero.
"""

from __future__ import annotations

import functools
import hashlib
import json
import platform
import sys
import time

import click
import numpy as np

from . import __version__
from .bearing import HGJBGeometry, OperatingPoint
from .config import Config, load_config
from .errors import GasrotorError
from .fluids import FluidRegistry
from .rotor import mass_properties, parse_rotor
from .sweep import (OracleEvaluator, SurrogateEvaluator, SweepSpec, ToleranceSpec,
                    default_speeds, design_digest, export_contours, feasible_fraction,
                    run_sweep)
from .surrogate import dataset as ds_mod
from .surrogate import fit as fit_mod
from .surrogate.ensemble import TASKS
from .surrogate.ga import ga_search
from .surrogate.modelio import load_model, save_model
from .surrogate.training import Hyperparams


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(command: str, inputs: list[str], outputs: list[str],
                    seed: int | None, extra: dict | None = None) -> None:
    manifest = {
        "command": command,
        "argv": sys.argv[1:],
        "seed": seed,
        "inputs": {p: _sha256(p) for p in inputs},
        "outputs": {p: _sha256(p) for p in outputs},
        "versions": {"gasrotor": __version__, "numpy": np.__version__,
                     "python": platform.python_version()},
        "created_unix": time.time(),
    }
    if extra:
        manifest.update(extra)
    path = outputs[0] + ".manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _fail_on_domain_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except GasrotorError as exc:
            click.echo(json.dumps(exc.to_dict()), err=True)
            sys.exit(1)
    return wrapper


def _load_cfg(path: str | None) -> Config:
    return load_config(path)


def _registry(cfg: Config) -> FluidRegistry:
    return FluidRegistry.from_file(cfg.fluid_registry_path) \
        if cfg.fluid_registry_path else FluidRegistry()


config_option = click.option("--config", "config_path", type=click.Path(exists=True),
                             default=None, help="Configuration file (JSON).")


@click.group()
@click.version_option(__version__)
def main():
    """Gas-bearing rotor evaluation toolkit."""


@main.command("gen-data")
@click.option("--n", "n_samples", type=int, default=2000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), required=True, help="Dataset CSV path.")
@click.option("--grid-n", type=int, default=None, help="Film grid for the oracle.")
@click.option("--preset", type=click.Choice(sorted(ds_mod.RANGE_PRESETS)),
              default="default", show_default=True,
              help="Built-in sampling window.")
@click.option("--ranges", "ranges_path", type=click.Path(exists=True), default=None,
              help="JSON file overriding sampling ranges.")
@config_option
@_fail_on_domain_errors
def gen_data(n_samples, seed, out, grid_n, preset, ranges_path, config_path):
    """Sample designs and label them with the physics oracle."""
    cfg = _load_cfg(config_path)
    ranges = dict(ds_mod.RANGE_PRESETS[preset])
    if ranges_path:
        with open(ranges_path, encoding="utf-8") as fh:
            ranges.update({k: tuple(v) for k, v in json.load(fh).items()})
    t0 = time.perf_counter()
    dataset = ds_mod.generate_dataset(ranges=ranges, n_samples=n_samples, seed=seed,
                                      grid_n=grid_n or cfg.grid_n)
    ds_mod.save_dataset(dataset, out)
    inputs = [ranges_path] if ranges_path else []
    _write_manifest("gen-data", inputs, [out], seed,
                    {"n_requested": n_samples, "n_rows": len(dataset),
                     "n_failed": dataset.n_failed,
                     "elapsed_s": time.perf_counter() - t0})
    click.echo(f"wrote {len(dataset)} rows to {out} "
               f"({dataset.n_failed} oracle failures excluded)")


@main.command()
@click.option("--dataset", "dataset_path", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), required=True, help="Model file path.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--hyperparams", "hyper_path", type=click.Path(exists=True), default=None,
              help="JSON hyperparameters (e.g. the ga-search output).")
@click.option("--width", type=int, default=64, show_default=True)
@click.option("--n-hidden", type=int, default=2, show_default=True)
@click.option("--epochs", type=int, default=1500, show_default=True)
@config_option
@_fail_on_domain_errors
def train(dataset_path, out, seed, hyper_path, width, n_hidden, epochs, config_path):
    """Train the 16-block surrogate on a labelled dataset."""
    dataset = ds_mod.load_dataset(dataset_path)
    hp_kwargs = {"epochs": epochs}
    if hyper_path:
        with open(hyper_path, encoding="utf-8") as fh:
            genes = json.load(fh)
        if "best_genes" in genes:
            genes = genes["best_genes"]
        width = int(genes.get("width", width))
        n_hidden = int(genes.get("n_hidden", n_hidden))
        if "log10_lr" in genes:
            hp_kwargs["learning_rate"] = 10.0 ** float(genes["log10_lr"])
        if "batch" in genes:
            hp_kwargs["batch_size"] = int(genes["batch"])
    hp = Hyperparams(learning_rate=hp_kwargs.get("learning_rate", 2e-3),
                     batch_size=hp_kwargs.get("batch_size", 32),
                     epochs=hp_kwargs.get("epochs", 1500),
                     patience=max(10, hp_kwargs.get("epochs", 1500) // 10))
    t0 = time.perf_counter()
    with click.progressbar(length=16, label="training blocks") as bar:
        model = fit_mod.train_surrogate(
            dataset, width=width, n_hidden=n_hidden, hp=hp, seed=seed,
            progress=lambda done, total: bar.update(done - bar.pos))
    save_model(model, out)
    inputs = [dataset_path] + ([hyper_path] if hyper_path else [])
    _write_manifest("train", inputs, [out], seed,
                    {"elapsed_s": time.perf_counter() - t0,
                     "width": width, "n_hidden": n_hidden})
    click.echo(f"wrote model to {out}")


@main.command("ga-search")
@click.option("--dataset", "dataset_path", type=click.Path(exists=True), required=True)
@click.option("--task", type=click.Choice(TASKS), default="wsr", show_default=True)
@click.option("--mode", type=click.IntRange(1, 4), default=1, show_default=True)
@click.option("--budget", type=int, default=40, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--fit-epochs", type=int, default=120, show_default=True,
              help="Short training budget per fitness evaluation.")
@click.option("--out", type=click.Path(), required=True)
@config_option
@_fail_on_domain_errors
def ga_search_cmd(dataset_path, task, mode, budget, seed, fit_epochs, out, config_path):
    """Search network hyperparameters with the genetic algorithm."""
    dataset = ds_mod.load_dataset(dataset_path)
    rows_tr = fit_mod._task_rows(dataset, "train", mode - 1, task)
    rows_va = fit_mod._task_rows(dataset, "val", mode - 1, task)
    X_tr, X_va = dataset.features[rows_tr], dataset.features[rows_va]
    y_tr = fit_mod._task_targets(dataset, rows_tr, mode - 1, task)
    y_va = fit_mod._task_targets(dataset, rows_va, mode - 1, task)

    def fitness(genes, eval_seed):
        hp = Hyperparams(learning_rate=10.0 ** genes["log10_lr"],
                         batch_size=int(genes["batch"]), epochs=fit_epochs,
                         patience=max(5, fit_epochs // 6))
        spec = fit_mod.default_spec(task, width=int(genes["width"]),
                                    n_hidden=int(genes["n_hidden"]))
        from .surrogate.ensemble import Normalizer, _class_weights
        from .surrogate.training import train_network
        normalizer = Normalizer.fit(X_tr)
        loss = "bce" if task in ("excited", "stable") else "mse"
        if loss == "bce":
            ytr, yva = y_tr.astype(float), y_va.astype(float)
            w_tr, w_va = _class_weights(ytr), _class_weights(yva)
        else:
            t = np.arcsinh(y_tr) if task == "logdec" else y_tr
            mu, sd = float(t.mean()), float(t.std()) or 1.0
            ytr = (t - mu) / sd
            tv = np.arcsinh(y_va) if task == "logdec" else y_va
            yva = (tv - mu) / sd
            w_tr = w_va = None
        params, hist = train_network(spec, normalizer.transform(X_tr), ytr,
                                     normalizer.transform(X_va), yva, loss,
                                     hp, eval_seed, w_train=w_tr, w_val=w_va)
        return min(hist.val_loss)

    result = ga_search(fitness, budget=budget, seed=seed)
    payload = {
        "best_genes": result.best_genes,
        "best_fitness": result.best_fitness,
        "truncated": result.truncated,
        "task": task,
        "mode": mode,
        "history": [{"generation": ev.generation, "slot": ev.slot,
                     "genes": ev.genes, "fitness": ev.fitness, "seed": ev.seed}
                    for ev in result.history],
    }
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    _write_manifest("ga-search", [dataset_path], [out], seed,
                    {"budget": budget, "task": task, "mode": mode})
    click.echo(f"best fitness {result.best_fitness:.5g} with {result.best_genes}")


@main.command("eval")
@click.option("--model", "model_path", type=click.Path(exists=True), required=True)
@click.option("--dataset", "dataset_path", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), default=None, help="Optional metrics JSON path.")
@config_option
@_fail_on_domain_errors
def eval_cmd(model_path, dataset_path, out, config_path):
    """Report accuracy, R2 and MAE of a model on the dataset's test split."""
    model = load_model(model_path)
    dataset = ds_mod.load_dataset(dataset_path)
    metrics = fit_mod.evaluate_model(model, dataset, part="test")
    text = json.dumps(metrics, indent=2)
    click.echo(text)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        _write_manifest("eval", [model_path, dataset_path], [out], None)


def _geometry_options(fn):
    options = [
        click.option("--alpha", type=float, default=0.5, show_default=True),
        click.option("--beta", type=float, default=2.44, show_default=True,
                     help="Groove angle, rad."),
        click.option("--gamma", type=float, default=0.8, show_default=True),
        click.option("--hg-um", type=float, default=16.0, show_default=True),
        click.option("--hr-um", type=float, default=8.0, show_default=True),
        click.option("--bearing-l-mm", type=float, default=12.0, show_default=True),
        click.option("--bearing-d-mm", type=float, default=8.0, show_default=True),
        click.option("--fluid", type=str, default="air", show_default=True),
        click.option("--pa", type=float, default=1e5, show_default=True,
                     help="Ambient pressure, Pa."),
        click.option("--temp", type=float, default=293.15, show_default=True,
                     help="Ambient temperature, K."),
        click.option("--speed-rpm", type=float, default=40000.0, show_default=True),
    ]
    for opt in reversed(options):
        fn = opt(fn)
    return fn


def _build_design(alpha, beta, gamma, hg_um, hr_um, bearing_l_mm, bearing_d_mm,
                  fluid, pa, temp, speed_rpm):
    geom = HGJBGeometry(alpha=alpha, beta=beta, gamma=gamma, h_g=hg_um * 1e-6,
                        h_r=hr_um * 1e-6, L=bearing_l_mm * 1e-3, D=bearing_d_mm * 1e-3)
    op = OperatingPoint(fluid=fluid, p_a=pa, T=temp, N=speed_rpm)
    return geom, op


def _make_evaluator(name: str, cfg: Config, model_path: str | None, grid_n: int):
    registry = _registry(cfg)
    if name == "surrogate":
        path = model_path or cfg.model_path
        if not path:
            raise GasrotorError("surrogate evaluator needs --model or config model_path")
        return SurrogateEvaluator(load_model(path), grid_n=grid_n, registry=registry)
    return OracleEvaluator(grid_n=grid_n, nu_grid=cfg.nu_grid(), registry=registry)


@main.command()
@click.option("--rotor", "rotor_path", type=click.Path(exists=True), required=True)
@click.option("--evaluator", type=click.Choice(["oracle", "surrogate"]),
              default="oracle", show_default=True)
@click.option("--model", "model_path", type=click.Path(exists=True), default=None)
@click.option("--grid-n", type=int, default=None)
@click.option("--dump-coeffs", type=click.Path(), default=None,
              help="Write the bearing coefficient sweep as CSV.")
@_geometry_options
@config_option
@_fail_on_domain_errors
def compute(rotor_path, evaluator, model_path, grid_n, dump_coeffs, config_path, **design):
    """Evaluate one design: per-mode stability, losses, load capacity."""
    cfg = _load_cfg(config_path)
    grid = grid_n or cfg.grid_n
    geom, op = _build_design(**design)
    with open(rotor_path, encoding="utf-8") as fh:
        rotor = parse_rotor(fh.read())
    mp = mass_properties(rotor)
    ev = _make_evaluator(evaluator, cfg, model_path, grid)
    t0 = time.perf_counter()
    perf = ev.evaluate(mp, geom, op)
    elapsed = time.perf_counter() - t0
    click.echo(f"rotor: {rotor_path}  mass {mp.mass * 1e3:.2f} g  "
               f"CG {mp.z_cg * 1e3:.2f} mm  evaluator {evaluator} ({elapsed * 1e3:.0f} ms)")
    click.echo(f"{'mode':<22}{'excited':<9}{'stable':<8}{'nu*':<10}{'log dec':<10}")
    for m in perf.modes:
        click.echo(f"{m.name:<22}{str(m.excited):<9}"
                   f"{('-' if m.stable is None else str(m.stable)):<8}"
                   f"{('-' if m.whirl_speed_ratio is None else f'{m.whirl_speed_ratio:.4f}'):<10}"
                   f"{('-' if m.log_dec is None else f'{m.log_dec:.4f}'):<10}")
    click.echo(f"power loss: {perf.power_loss_w:.3f} W   "
               f"load capacity: {perf.load_capacity_n:.3f} N")
    for w in perf.warnings:
        click.echo(f"warning: {w}")
    if dump_coeffs:
        _dump_coefficients(geom, op, cfg, grid, dump_coeffs)
        click.echo(f"wrote coefficient sweep to {dump_coeffs}")


def _dump_coefficients(geom: HGJBGeometry, op: OperatingPoint, cfg: Config,
                       grid_n: int, path: str) -> None:
    from .bearing import GroovedFilmSolver, compressibility_number
    from .fluids import fluid_properties
    props = fluid_properties(op.fluid, op.T, op.p_a, registry=_registry(cfg))
    lam = compressibility_number(props.mu, op.omega, geom.R, op.p_a, geom.h_r)
    solver = GroovedFilmSolver(geom.alpha, geom.beta, geom.gamma, geom.hg_hr,
                               geom.L_D, lam, grid_n)
    nus = cfg.nu_grid()
    K, C = solver.coefficients(nus)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("Lambda,nu,Kxx,Kxy,Kyx,Kyy,Cxx,Cxy,Cyx,Cyy\n")
        for i, nu in enumerate(nus):
            cells = [lam, nu, K[i, 0, 0], K[i, 0, 1], K[i, 1, 0], K[i, 1, 1],
                     C[i, 0, 0], C[i, 0, 1], C[i, 1, 0], C[i, 1, 1]]
            fh.write(",".join(repr(float(v)) for v in cells) + "\n")


@main.command()
@click.option("--rotor", "rotor_path", type=click.Path(exists=True), required=True)
@click.option("--evaluator", type=click.Choice(["oracle", "surrogate"]),
              default="surrogate", show_default=True)
@click.option("--model", "model_path", type=click.Path(exists=True), default=None)
@click.option("--grid-n", type=int, default=None)
@click.option("--delta-hr-um", type=float, default=2.0, show_default=True)
@click.option("--delta-hg-um", type=float, default=4.0, show_default=True)
@click.option("--tol-grid-n", type=int, default=None, help="Deviation grid resolution.")
@click.option("--speeds", "speeds_csv", type=str, default=None,
              help="Comma-separated rpm list (default 0.5-1.2 x nominal).")
@click.option("--out", type=click.Path(), required=True, help="Contour document path.")
@_geometry_options
@config_option
@_fail_on_domain_errors
def sweep(rotor_path, evaluator, model_path, grid_n, delta_hr_um, delta_hg_um,
          tol_grid_n, speeds_csv, out, config_path, **design):
    """Robustness sweep over manufacturing deviations; writes contours JSON."""
    cfg = _load_cfg(config_path)
    grid = grid_n or cfg.grid_n
    geom, op = _build_design(**design)
    with open(rotor_path, encoding="utf-8") as fh:
        rotor = parse_rotor(fh.read())
    tol = ToleranceSpec(delta_h_r=delta_hr_um * 1e-6, delta_h_g=delta_hg_um * 1e-6,
                        grid_n=tol_grid_n or cfg.tolerance_grid_n)
    if speeds_csv:
        speeds = tuple(float(s) for s in speeds_csv.split(","))
    else:
        speeds = default_speeds(op.N, cfg.speed_points, cfg.speed_factors)
    spec = SweepSpec(speeds=speeds, tolerance=tol, evaluator=evaluator)
    ev = _make_evaluator(evaluator, cfg, model_path, grid)
    t0 = time.perf_counter()
    with click.progressbar(length=tol.axis(tol.delta_h_r).size
                           * tol.axis(tol.delta_h_g).size, label="sweep") as bar:
        fmap = run_sweep(rotor, geom, op, spec, ev,
                         progress=lambda done, total: bar.update(done - bar.pos))
    doc = export_contours(fmap, design=design_digest(rotor, geom, op))
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    _write_manifest("sweep", [rotor_path], [out], None,
                    {"elapsed_s": time.perf_counter() - t0,
                     "evaluator": evaluator})
    click.echo(f"feasible fraction: {feasible_fraction(fmap):.3f}  "
               f"({time.perf_counter() - t0:.1f} s)")
    if fmap.failures:
        click.echo(f"{len(fmap.failures)} cells failed; see document for details")


@main.command()
@click.option("--host", type=str, default=None)
@click.option("--port", type=int, default=None)
@config_option
@_fail_on_domain_errors
def serve(host, port, config_path):
    """Run the HTTP service (configuration documented in the config module)."""
    import uvicorn

    from .service import create_app
    cfg = _load_cfg(config_path)
    app = create_app(cfg)
    uvicorn.run(app, host=host or cfg.host, port=port or cfg.port, log_level="info")


if __name__ == "__main__":
    main()
