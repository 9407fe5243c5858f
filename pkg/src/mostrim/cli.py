"""Command-line driver: build models, check, sample, trim, validate, render.

Subcommands
    check             one model, one exact min-safety check
    sweep             grid of (initial x grid width x trim mode) checks, CSV
    lss               scheduler-sampling runs with replayable seeds
    validate-mos      per-pair proportion of schedulers respecting the order
    counterexamples   closed-form golden values vs the model pipeline
    plot              render figures from a previously written CSV

Every command is deterministic given its flags (seeds included).  Output
defaults to JSON for single runs and CSV for tables; figures accompany the
delimited output when --plot is given.  Exit codes: 0 ok, 1 failed golden
check, 2 model error, 3 non-convergence, 4 scheduler cap exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

from . import modelio, plots
from .lss import LssConfig, lss_min
from .mos import negate, trim_lss, trim_pmc, validate_mos
from .pa import CapExceeded, ModelError, count_schedulers
from .pmc import NonConvergence, SafetyProperty, min_safety_prob
from .systems import (aebs_desk_model, aebs_orders, ce1_model, ce2_model,
                      ce3_model, counterexample_distance, counterexample_speed,
                      counterexample_tank, tank_desk_model, tank_order,
                      tank_sampling_model)

SCHEMA_VERSION = 1
ENV_OUT_DIR = "MOSTRIM_OUT"

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_MODEL = 2
EXIT_NONCONVERGENCE = 3
EXIT_CAP = 4

PRESETS = ("aebs-desk", "tank-desk", "tank-lss", "ce1", "ce2", "ce3")
TRIM_MODES = ("none", "pmc", "lss", "neg")

CHECK_FIELDS = ["schema", "preset", "model", "grid", "initial", "trim", "order",
                "bad_label", "horizon", "probability", "iterations", "residual",
                "wall_time_s", "states", "transitions", "scheduler_count",
                "transitions_removed", "status", "error"]
LSS_FIELDS = ["schema", "trial", "master_seed", "n", "epsilon", "delta", "exact",
              "exhaustive", "traces_per_scheduler", "minimum", "estimates"]
MOS_FIELDS = ["schema", "s1", "s2", "p", "p_min_schedulers", "scheduler_count",
              "s1_name", "s2_name"]


@dataclass
class RunConfig:
    command: str = "check"
    preset: str | None = None
    model: str | None = None
    params: str | None = None          # case-study parameter file (JSON)
    params_out: str | None = None      # write resolved parameters here
    trim_report: str | None = None     # write the trim report here (.csv/.json)
    grid: str | None = None            # per-dim widths "1:0.4"
    grid_list: str | None = None       # comma-separated widths specs
    initial: str | None = None         # per-dim point "9,1.2"
    initial_list: str | None = None    # semicolon-separated points
    horizon: int | None = None
    trim: str = "none"
    trim_modes: str | None = None
    order: str = "default"
    lss_n: int = 10
    epsilon: float = 0.05
    delta: float = 0.2
    seed: int = 0
    trials: int = 1
    exact_solve: bool = False
    out: str | None = None
    format: str | None = None          # csv | json; None = command default
    jobs: int = 1
    cap_schedulers: int = 10 ** 6
    plot: bool = False
    kind: str | None = None            # plot input kind
    input: str | None = None           # plot input csv

    def to_json_obj(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json_obj(cls, obj: dict) -> "RunConfig":
        return cls(**{k: v for k, v in obj.items() if k in cls.__dataclass_fields__})


def _parse_widths(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(":"))

def _parse_point(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(","))


def _params_file_model(cfg: RunConfig, widths, initial):
    from .systems import (AebsParams, TankParams, build_aebs_model,
                          build_tank_model)
    from .abstraction import IntervalGrid

    obj = json.loads(Path(cfg.params).read_text())
    system = obj.get("system")
    widths = widths or (tuple(obj["grid"]) if obj.get("grid") else None)
    initial = initial or (tuple(obj["initial"]) if obj.get("initial") else None)
    if initial is None:
        raise ModelError("parameter file needs an initial state (or pass --initial)")
    if system == "tank":
        params = TankParams.from_json_obj(obj["params"])
        order = {"default": tank_order(params)}
        build = build_tank_model
        default_bounds = tuple((0.0, params.capacity) for _ in range(params.tanks))
    elif system == "aebs":
        params = AebsParams.from_json_obj(obj["params"])
        order = aebs_orders()
        build = build_aebs_model
        default_bounds = ((params.min_gap, initial[0] + 4.0), (0.0, initial[1] + 1.0))
    else:
        raise ModelError(f"parameter file declares unknown system {system!r}")
    grid = None
    if widths is not None:
        lows = tuple(obj.get("grid_lows", [b[0] for b in default_bounds]))
        highs = tuple(obj.get("grid_highs", [b[1] for b in default_bounds]))
        grid = IntervalGrid(lows=lows, highs=highs, widths=tuple(widths))
    model, prop = build(params, grid, initial)
    meta = {"params_file": cfg.params, "system": system,
            "grid": ":".join(f"{x:g}" for x in widths) if widths else "",
            "initial": ",".join(f"{x:g}" for x in initial),
            "params": params.to_json_obj()}
    if grid is not None:
        meta["grid_lows"] = list(grid.lows)
        meta["grid_highs"] = list(grid.highs)
    return model, prop, order, meta


def build_model(cfg: RunConfig, widths: tuple[float, ...] | None = None,
                initial: tuple[float, ...] | None = None):
    """Resolve a model source into (pa, property, orders, meta)."""
    if widths is None and cfg.grid:
        widths = _parse_widths(cfg.grid)
    if initial is None and cfg.initial:
        initial = _parse_point(cfg.initial)

    if cfg.params:
        return _params_file_model(cfg, widths, initial)

    if cfg.model:
        text = Path(cfg.model).read_text()
        if cfg.model.endswith(".json"):
            doc = modelio.from_json_obj(json.loads(text))
        else:
            doc = modelio.parse(text)
        pa, prop, orders = modelio.lower(doc)
        if prop is None:
            raise ModelError("model file declares no property")
        meta = {"model": cfg.model, "grid": "", "initial": ""}
        return pa, prop, orders, meta

    def grid_meta(grid) -> dict:
        return {"grid_lows": list(grid.lows), "grid_highs": list(grid.highs)}

    preset = cfg.preset or "tank-desk"
    if preset == "aebs-desk":
        w = widths or (0.25, 0.4)
        init = initial or (9.0, 1.2)
        model, prop, grid, params = aebs_desk_model(tuple(w), tuple(init))
        return model, prop, aebs_orders(), {
            "preset": preset, "grid": ":".join(f"{x:g}" for x in w),
            "initial": ",".join(f"{x:g}" for x in init),
            "params": params.to_json_obj(), **grid_meta(grid)}
    if preset == "tank-desk":
        w = widths or (5.0,)
        init = initial or (12.5,)
        model, prop, grid, params = tank_desk_model(w[0], init[0])
        return model, prop, {"default": tank_order(params)}, {
            "preset": preset, "grid": f"{w[0]:g}", "initial": f"{init[0]:g}",
            "params": params.to_json_obj(), **grid_meta(grid)}
    if preset == "tank-lss":
        w = widths or (1.0,)
        init = initial or (16.5,)
        model, prop, grid, params = tank_sampling_model(w[0], init[0])
        return model, prop, {"default": tank_order(params)}, {
            "preset": preset, "grid": f"{w[0]:g}", "initial": f"{init[0]:g}",
            "params": params.to_json_obj(), **grid_meta(grid)}
    if preset in ("ce1", "ce2", "ce3"):
        builder = {"ce1": ce1_model, "ce2": ce2_model, "ce3": ce3_model}[preset]
        if initial is not None:
            model, prop = builder(*initial)
            init_text = ",".join(f"{x:g}" for x in initial)
        else:
            model, prop = builder()
            init_text = ""
        return model, prop, {}, {"preset": preset, "grid": "", "initial": init_text}
    raise ModelError(f"unknown preset '{preset}' (choose from {', '.join(PRESETS)})")


def apply_trim(model, trim: str, orders: dict, order_name: str):
    if trim == "none":
        return model, None
    if order_name not in orders:
        raise ModelError(
            f"trimming requires order '{order_name}' but the model declares "
            f"only: {', '.join(sorted(orders)) or 'none'}")
    order = orders[order_name]
    if trim == "pmc":
        return trim_pmc(model, order)
    if trim == "lss":
        return trim_lss(model, order)
    if trim == "neg":
        return trim_pmc(model, negate(order))
    raise ModelError(f"unknown trim mode '{trim}'")


def check_row(cfg: RunConfig, widths=None, initial=None, trim=None,
              swallow_errors: bool = False) -> dict:
    """One build-trim-check run reduced to a flat record."""
    trim = cfg.trim if trim is None else trim
    row = {"schema": SCHEMA_VERSION, "preset": cfg.preset or "", "model": cfg.model or "",
           "grid": "", "initial": "", "trim": trim, "order": cfg.order,
           "bad_label": "", "horizon": "", "probability": "", "iterations": "",
           "residual": "", "wall_time_s": "", "states": "", "transitions": "",
           "scheduler_count": "", "transitions_removed": "", "status": "ok",
           "error": ""}
    try:
        model, prop, orders, meta = build_model(cfg, widths, initial)
        row["grid"] = meta.get("grid", "")
        row["initial"] = meta.get("initial", "")
        if cfg.horizon is not None:
            prop = SafetyProperty(prop.bad_label, cfg.horizon)
        trimmed, report = apply_trim(model, trim, orders, cfg.order)
        started = time.perf_counter()
        result = min_safety_prob(trimmed, prop)
        elapsed = time.perf_counter() - started
        row.update({
            "bad_label": prop.bad_label,
            "horizon": "" if prop.horizon is None else prop.horizon,
            "probability": repr(result.probability),
            "iterations": result.iterations,
            "residual": repr(result.residual),
            "wall_time_s": f"{elapsed:.6f}",
            "states": trimmed.n_states,
            "transitions": len(trimmed.transitions),
            "scheduler_count": count_schedulers(trimmed),
            "transitions_removed": report.transitions_removed if report else 0,
        })
    except Exception as exc:
        if not swallow_errors:
            raise
        row["status"] = "error"
        row["error"] = str(exc)
    return row


def _resolve_out(cfg: RunConfig, default_name: str) -> Path | None:
    if cfg.out:
        return Path(cfg.out)
    env_dir = os.environ.get(ENV_OUT_DIR)
    if env_dir:
        return Path(env_dir) / default_name
    return None


def _emit_text(path: Path | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        print(f"wrote {path}")


def _rows_to_csv(fields: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: r.get(k, "") for k in fields})
    return buf.getvalue()


def _write_side_outputs(cfg: RunConfig, model, report, meta) -> None:
    if cfg.params_out and "params" in meta:
        payload = {"system": "tank" if meta.get("preset", "").startswith("tank")
                   or meta.get("system") == "tank" else "aebs",
                   "params": meta["params"]}
        if meta.get("grid"):
            payload["grid"] = [float(x) for x in meta["grid"].split(":")]
        if meta.get("initial"):
            payload["initial"] = [float(x) for x in meta["initial"].split(",")]
        for key in ("grid_lows", "grid_highs"):
            if key in meta:
                payload[key] = meta[key]
        Path(cfg.params_out).write_text(json.dumps(payload, indent=2) + "\n")
        print(f"wrote {cfg.params_out}")
    if cfg.trim_report and report is not None:
        path = Path(cfg.trim_report)
        if path.suffix == ".json":
            path.write_text(json.dumps(report.to_json_obj(model), indent=2) + "\n")
        else:
            header, rows = report.csv_rows(model)
            path.write_text(_rows_to_csv(header, [dict(zip(header, r)) for r in rows]))
        print(f"wrote {path}")


def cmd_check(cfg: RunConfig) -> int:
    row = check_row(cfg)
    fmt = cfg.format or "json"
    out = _resolve_out(cfg, "check." + fmt)
    if fmt == "csv":
        _emit_text(out, _rows_to_csv(CHECK_FIELDS, [row]))
    else:
        _emit_text(out, json.dumps(row, indent=2) + "\n")
    if cfg.params_out or cfg.trim_report:
        model, prop, orders, meta = build_model(cfg)
        trimmed, report = apply_trim(model, cfg.trim, orders, cfg.order)
        _write_side_outputs(cfg, trimmed, report, meta)
    return EXIT_OK


def _sweep_specs(cfg: RunConfig) -> list[tuple]:
    grids = [_parse_widths(g) for g in cfg.grid_list.split(",")] if cfg.grid_list \
        else [(_parse_widths(cfg.grid) if cfg.grid else None)]
    initials = [_parse_point(p) for p in cfg.initial_list.split(";")] if cfg.initial_list \
        else [(_parse_point(cfg.initial) if cfg.initial else None)]
    trims = cfg.trim_modes.split(",") if cfg.trim_modes else [cfg.trim]
    return [(g, i, t) for g in grids for i in initials for t in trims]


def _sweep_worker(args: tuple) -> dict:
    cfg_obj, widths, initial, trim = args
    cfg = RunConfig.from_json_obj(cfg_obj)
    return check_row(cfg, widths, initial, trim, swallow_errors=True)


def cmd_sweep(cfg: RunConfig) -> int:
    specs = _sweep_specs(cfg)
    jobs = [(cfg.to_json_obj(), g, i, t) for g, i, t in specs]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(_sweep_worker, jobs))
    else:
        rows = [_sweep_worker(j) for j in jobs]
    fmt = cfg.format or "csv"
    out = _resolve_out(cfg, "sweep." + fmt)
    if fmt == "json":
        _emit_text(out, json.dumps(rows, indent=2) + "\n")
    else:
        _emit_text(out, _rows_to_csv(CHECK_FIELDS, rows))
    if cfg.plot:
        base = out if out is not None else Path("sweep")
        for p in plots.sweep_figures(rows, base.with_suffix("")):
            print(f"wrote {p}")
    return EXIT_OK


def _lss_trial(args: tuple) -> dict:
    cfg_obj, trial = args
    cfg = RunConfig.from_json_obj(cfg_obj)
    model, prop, orders, meta = build_model(cfg)
    if cfg.horizon is not None:
        prop = SafetyProperty(prop.bad_label, cfg.horizon)
    trimmed, _ = apply_trim(model, cfg.trim, orders, cfg.order)
    run_cfg = LssConfig(n=cfg.lss_n, epsilon=cfg.epsilon, delta=cfg.delta,
                        master_seed=cfg.seed + trial)
    started = time.perf_counter()
    result = lss_min(trimmed, prop, run_cfg, exact=cfg.exact_solve)
    elapsed = time.perf_counter() - started
    print(f"trial {trial}: minimum {result.minimum:.6f} ({elapsed:.3f}s)",
          file=sys.stderr)
    return {
        "schema": SCHEMA_VERSION, "trial": trial, "master_seed": run_cfg.master_seed,
        "n": cfg.lss_n, "epsilon": cfg.epsilon, "delta": cfg.delta,
        "exact": result.exact, "exhaustive": result.exhaustive,
        "traces_per_scheduler": result.traces_per_scheduler,
        "minimum": repr(result.minimum),
        "estimates": "|".join(repr(e) for e in result.estimates),
    }


def cmd_lss(cfg: RunConfig) -> int:
    model, prop, orders, meta = build_model(cfg)
    if cfg.horizon is not None:
        prop = SafetyProperty(prop.bad_label, cfg.horizon)
    trimmed, report = apply_trim(model, cfg.trim, orders, cfg.order)

    # Output files stay byte-reproducible for a fixed seed, so wall times
    # are printed rather than recorded.  Trials are independent and can be
    # farmed out; row order follows trial indices either way.
    jobs = [(cfg.to_json_obj(), t) for t in range(cfg.trials)]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(_lss_trial, jobs))
    else:
        rows = [_lss_trial(j) for j in jobs]
    minima = [float(r["minimum"]) for r in rows]
    mean = sum(minima) / len(minima)
    summary = {"schema": SCHEMA_VERSION, "trial": "mean", "master_seed": cfg.seed,
               "n": cfg.lss_n, "epsilon": cfg.epsilon, "delta": cfg.delta,
               "exact": cfg.exact_solve, "exhaustive": "",
               "traces_per_scheduler": "", "minimum": repr(mean), "estimates": ""}

    fmt = cfg.format or "json"
    out = _resolve_out(cfg, "lss." + fmt)
    if fmt == "csv":
        _emit_text(out, _rows_to_csv(LSS_FIELDS, rows + [summary]))
    else:
        obj = {"trials": rows, "mean_minimum": mean, "trim": cfg.trim,
               "transitions_removed": report.transitions_removed if report else 0}
        _emit_text(out, json.dumps(obj, indent=2) + "\n")
    if cfg.plot:
        base = out if out is not None else Path("lss")
        for p in plots.lss_figures(rows, base.with_suffix("")):
            print(f"wrote {p}")
    _write_side_outputs(cfg, trimmed, report, meta)
    return EXIT_OK


def cmd_validate_mos(cfg: RunConfig) -> int:
    model, prop, orders, meta = build_model(cfg)
    if cfg.order not in orders:
        raise ModelError(
            f"validation requires order '{cfg.order}' but the model declares "
            f"only: {', '.join(sorted(orders)) or 'none'}")
    _, report = trim_pmc(model, orders[cfg.order])
    pairs = report.destination_pairs()

    rows = []
    if pairs:
        validation = validate_mos(model, prop, pairs, cap=cfg.cap_schedulers)
        for r in validation.rows:
            rows.append({
                "schema": SCHEMA_VERSION, "s1": r.s1, "s2": r.s2,
                "p": repr(r.p), "p_min_schedulers": repr(r.p_min_schedulers),
                "scheduler_count": r.scheduler_count,
                "s1_name": model.name_of(r.s1), "s2_name": model.name_of(r.s2)})

    fmt = cfg.format or "csv"
    out = _resolve_out(cfg, "validate_mos." + fmt)
    if fmt == "json":
        _emit_text(out, json.dumps(rows, indent=2) + "\n")
    else:
        _emit_text(out, _rows_to_csv(MOS_FIELDS, rows))
    if cfg.plot and rows:
        base = out if out is not None else Path("validate_mos")
        for p in plots.mos_figures(rows, base.with_suffix("")):
            print(f"wrote {p}")
    return EXIT_OK


def cmd_counterexamples(_cfg: RunConfig) -> int:
    """Golden closed forms, then the build-and-check pipeline against them."""
    golden = {
        "distance (safer-start, closer-start)": (counterexample_distance(), (0.2955, 0.315)),
        "speed p=0.5 (slower-start, faster-start)": (counterexample_speed(0.5), (0.34375, 0.5)),
        "tank (low-start, mid-start)": (counterexample_tank(), (0.6912, 0.4752)),
    }
    ok = True
    for name, (got, want) in golden.items():
        match = all(abs(g - w) <= 1e-9 for g, w in zip(got, want))
        ok &= match
        print(f"{'PASS' if match else 'FAIL'} closed-form {name}: "
              f"got ({got[0]:.10g}, {got[1]:.10g}) want {want}")

    pipeline = [
        ("distance", ce1_model(14.0, 11.0), counterexample_distance()[0]),
        ("distance", ce1_model(13.0, 11.0), counterexample_distance()[1]),
        ("speed", ce2_model(8.0), counterexample_speed(0.5)[0]),
        ("speed", ce2_model(9.0), counterexample_speed(0.5)[1]),
        ("tank", ce3_model(10.0), counterexample_tank()[0]),
        ("tank", ce3_model(40.0), counterexample_tank()[1]),
    ]
    for name, (model, prop), want in pipeline:
        got = min_safety_prob(model, prop).probability
        match = abs(got - want) <= 1e-8
        ok &= match
        print(f"{'PASS' if match else 'FAIL'} pipeline {name}: got {got:.10g} want {want:.10g}")

    return EXIT_OK if ok else EXIT_FAILED


def cmd_plot(cfg: RunConfig) -> int:
    if not cfg.input or not cfg.kind:
        raise ModelError("plot needs --kind {sweep|lss|mos} and --input <csv>")
    with open(cfg.input, newline="") as fh:
        rows = list(csv.DictReader(fh))
    base = Path(cfg.out) if cfg.out else Path(cfg.input)
    renderer = {"sweep": plots.sweep_figures, "lss": plots.lss_figures,
                "mos": plots.mos_figures}.get(cfg.kind)
    if renderer is None:
        raise ModelError(f"unknown plot kind '{cfg.kind}'")
    for p in renderer(rows, base.with_suffix("")):
        print(f"wrote {p}")
    return EXIT_OK


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with a RunConfig; flags override")
    p.add_argument("--preset", choices=PRESETS)
    p.add_argument("--model", help="path to a .pam (or JSON-mirror) model file")
    p.add_argument("--params", help="case-study parameter file (JSON)")
    p.add_argument("--params-out", dest="params_out",
                   help="write the resolved case-study parameters here")
    p.add_argument("--trim-report", dest="trim_report",
                   help="write the trim report here (.csv or .json)")
    p.add_argument("--grid", help="per-dimension cell widths, e.g. 1:0.4")
    p.add_argument("--initial", help="initial point, e.g. 9,1.2")
    p.add_argument("--horizon", type=int)
    p.add_argument("--trim", choices=TRIM_MODES)
    p.add_argument("--order", help="order name for trimming (default 'default')")
    p.add_argument("--lss-n", type=int, dest="lss_n")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--exact-solve", action="store_true", dest="exact_solve", default=None)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--jobs", type=int)
    p.add_argument("--cap-schedulers", type=int, dest="cap_schedulers")
    p.add_argument("--plot", action="store_true", default=None)


def _make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mostrim",
        description="Probabilistic safety checking with monotonic-safety trimming")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("check", "lss", "validate-mos", "counterexamples"):
        _add_common(sub.add_parser(name))
    sweep = sub.add_parser("sweep")
    _add_common(sweep)
    sweep.add_argument("--grid-list", dest="grid_list",
                       help="comma-separated width specs, e.g. 2:0.8,1:0.4")
    sweep.add_argument("--initial-list", dest="initial_list",
                       help="semicolon-separated points, e.g. 9,1.2;8,1.0")
    sweep.add_argument("--trim-modes", dest="trim_modes",
                       help="comma-separated trim modes, e.g. none,pmc,neg")
    plot = sub.add_parser("plot")
    _add_common(plot)
    plot.add_argument("--kind", choices=("sweep", "lss", "mos"))
    plot.add_argument("--input", help="CSV produced by sweep/lss/validate-mos")
    return parser


def config_from_args(argv: list[str]) -> RunConfig:
    ns = _make_parser().parse_args(argv)
    cfg = RunConfig()
    if getattr(ns, "config", None):
        cfg = RunConfig.from_json_obj(json.loads(Path(ns.config).read_text()))
    cfg.command = ns.command.replace("-", "_")
    for name in vars(ns):
        if name in ("config", "command"):
            continue
        value = getattr(ns, name)
        if value is not None:
            setattr(cfg, name, value)
    return cfg


def main(argv: list[str] | None = None) -> int:
    cfg = config_from_args(sys.argv[1:] if argv is None else argv)
    commands = {
        "check": cmd_check,
        "sweep": cmd_sweep,
        "lss": cmd_lss,
        "validate_mos": cmd_validate_mos,
        "counterexamples": cmd_counterexamples,
        "plot": cmd_plot,
    }
    try:
        return commands[cfg.command](cfg)
    except CapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except NonConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (ModelError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
