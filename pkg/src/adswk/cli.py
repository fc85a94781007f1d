"""Command-line entry point: ``adswk <subcommand> [--config PATH] [--out DIR] ...``.

Exit codes: 0 success, 1 verdict failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from .config import Config, ConfigError, load_config, parse_config

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

__all__ = ["main", "dispatch", "build_parser"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="configuration file")
    common.add_argument("--out", metavar="DIR", help="output root (ADSWK_OUT overrides)")
    common.add_argument("--threads", type=int, default=None, metavar="N",
                        help="worker processes for experiments")
    common.add_argument("--seed", type=int, default=None, metavar="N", help="RNG seed")
    common.add_argument("--format", dest="formats", action="append",
                        choices=("csv", "json", "svg"),
                        help="output format (repeatable; default from config)")

    p = _Parser(prog="adswk", description="Klein-Gordon on asymptotically AdS spaces: "
                "rays, modes, evolution, inequalities.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    t = sub.add_parser("trace", parents=[common], help="trace a broken bicharacteristic")
    t.add_argument("--start", required=True,
                   help="comma list x,y_1..y_{n-1},xi,zeta_1..zeta_{n-1} (y_1 = t)")
    t.add_argument("--no-validate", action="store_true", help="skip the liminf validation")
    sub.add_parser("modes", parents=[common], help="indicial data, eigenmodes, DtN table")
    sub.add_parser("evolve", parents=[common], help="run the forward problem")
    q = sub.add_parser("ineq", parents=[common], help="Hardy infimum on a graded grid")
    q.add_argument("--cells", type=int, default=None)
    e = sub.add_parser("experiment", parents=[common], help="run persisted experiments")
    e.add_argument("ids", nargs="*", help="experiment ids (default from [experiment] ids)")
    a = sub.add_parser("accept", parents=[common], help="run the acceptance suite")
    a.add_argument("--only", default=None, help="comma list of criterion ids")
    a.add_argument("--mutate", action="store_true",
                   help="negative control: corrupt the reflection sign")
    v = sub.add_parser("validate-config", parents=[common], help="check a configuration file")
    v.add_argument("path", nargs="?", help="configuration file (or --config)")
    return p


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _load(args) -> Config:
    if getattr(args, "config", None):
        return load_config(args.config)
    return parse_config("")


def _formats(args, cfg: Config) -> List[str]:
    return list(dict.fromkeys(args.formats)) if args.formats else list(cfg["output"]["formats"])


def _seed(args, cfg: Config) -> int:
    return int(args.seed) if args.seed is not None else int(cfg["experiment"]["seed"])


def _root(args, cfg: Config) -> Path:
    from .io import results_root
    return results_root(args.out or cfg["output"]["directory"])


def _model(cfg: Config):
    from .geometry import exact_ads_collar, flat_slab, perturbed_from_params
    m = cfg["model"]
    n = m["n"]
    if m["family"] == "FlatSlab":
        return flat_slab(n)
    if m["family"] == "ExactAdSCollar":
        return exact_ads_collar(n)
    return perturbed_from_params(n, {k: m[k] for k in ("a0", "a2", "ct0", "ct1", "b_curv")})


def _integrator(cfg: Config):
    from .gbbflow import IntegratorConfig
    i = cfg["integrator"]
    return IntegratorConfig(rel_tol=i["rel_tol"], abs_tol=i["abs_tol"], max_step=i["max_step"],
                            x_event_tol=i["x_event_tol"], glancing_tol=i["glancing_tol"],
                            max_events=i["max_events"], s_span=(0.0, i["s_max"]),
                            x_max=i["x_max"], t_max=i["t_max"], sample_step=i["sample_step"])


def _manifest(name: str, cfg: Config, args, extra: dict, root: Path):
    from .experiments import start_experiment
    return start_experiment(name, {"config": cfg.snapshot(), **extra}, root, _seed(args, cfg))


def _finish(m, root, t0, verdicts, outs):
    from .experiments import _finish as fin
    return fin(m, root, t0, verdicts, outs)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_trace(args, cfg: Config) -> int:
    from .gbbflow import _p, trace_gbb, validate_gbb
    from .geometry import CotangentPoint
    from .io import svg_line_plot, validate_json, write_csv, write_json, write_svg
    model = _model(cfg)
    n = model.n
    try:
        vals = [float(s) for s in args.start.split(",")]
    except ValueError:
        raise UsageError(f"--start: expected {2 * n} comma-separated numbers") from None
    if len(vals) != 2 * n:
        raise UsageError(f"--start: expected {2 * n} numbers for n = {n}, got {len(vals)}")
    start = CotangentPoint.from_state(np.array(vals))
    root = _root(args, cfg)
    m = _manifest("trace", cfg, args, {"start": vals}, root)
    t0 = time.perf_counter()
    path = trace_gbb(model, start, _integrator(cfg))
    report = validate_gbb(path) if not args.no_validate else None
    d = m.directory(root)
    s, z = path.samples()
    header = ["s", "x"] + [f"y{j}" for j in range(1, n)] + ["xi"] + [f"zeta{j}" for j in range(1, n)]
    header += ["xib", "p_drift"]
    p0 = _p(model, start.state())
    rows = [[float(si)] + [float(a) for a in zi] + [float(zi[0] * zi[n]), _p(model, zi) - p0]
            for si, zi in zip(s, z)]
    events = {"start": vals, "family": model.family_tag,
              "events": [e.to_dict() for e in path.events],
              "diagnostics": path.diagnostics(),
              "validation": None if report is None else {
                  "passed": report.passed, "worst_margin": report.worst_margin,
                  "worst_function": report.worst_function, "domain_ok": report.domain_ok}}
    validate_json(events, "trace_events")
    outs = []
    fm = _formats(args, cfg)
    if "csv" in fm:
        outs.append(write_csv(d / "trace.csv", header, rows))
    if "json" in fm:
        outs.append(write_json(d / "events.json", events))
    if "svg" in fm:
        outs.append(write_svg(d / "trace.svg", svg_line_plot(
            [(z[:, 1], z[:, 0], "x(t)")], title="broken bicharacteristic", xlabel="t",
            ylabel="x")))
    ok = report.passed if report is not None else True
    _finish(m, root, t0, {"validated": ok}, outs)
    print(f"trace: {len(path.events)} events "
          f"({', '.join(e.kind.value for e in path.events) or 'none'}); outputs in {d}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_modes(args, cfg: Config) -> int:
    from .geometry import SpectralParam, indicial_roots
    from .io import write_csv, write_json
    from .modes import (BFStatus, ModeSpec, ResonantMode, bf_diagnostic, eigenmodes_truncated,
                        scattering_coefficient)
    model = _model(cfg)
    n = model.n
    sp = cfg["spectral"]
    lam = complex(sp["lambda"], sp["lambda_im"])
    lam_v = lam.real if lam.imag == 0 else lam
    ind = indicial_roots(SpectralParam(lam_v, n))
    diag = bf_diagnostic(SpectralParam(lam_v, n))
    root = _root(args, cfg)
    m = _manifest("modes", cfg, args, {}, root)
    t0 = time.perf_counter()
    def _re(v):
        v = complex(v)
        return v.real if v.imag == 0 else v
    info = {"n": n, "lambda": _re(lam), "s_minus": _re(ind.s_minus), "s_plus": _re(ind.s_plus),
            "status": diag.status.value, "log_case": ind.log_case, "double_root": ind.double_root}
    rows = []
    if diag.status == BFStatus.BELOW and model.family_tag == "FlatSlab":
        info["sigma"] = eigenmodes_truncated(model, lam.real, m=sp["n_modes"],
                                             sigma_max=sp["sigma_max"])
        for om in sp["omegas"]:
            for k in sp["ks"]:
                kvec = (k,) + (0.0,) * (n - 3)
                try:
                    dtn = scattering_coefficient(model, ModeSpec(n, lam.real, om, kvec))
                    res = False
                except ResonantMode:
                    dtn, res = math.nan, True
                rows.append([om, k, om * om - k * k, float(np.real(dtn)), res])
    d = m.directory(root)
    fm = _formats(args, cfg)
    outs = []
    if "json" in fm:
        outs.append(write_json(d / "modes.json", info))
    if "csv" in fm:
        outs.append(write_csv(d / "dtn.csv", ["omega", "k", "sigma2", "dtn", "resonant"], rows))
    _finish(m, root, t0, {}, outs)
    print(f"modes: lambda={lam_v} status={diag.status.value} s-={info['s_minus']} "
          f"s+={info['s_plus']}; "
          f"outputs in {d}")
    return EXIT_OK


def cmd_evolve(args, cfg: Config) -> int:
    from .evolve import Closure, ForwardProblem, Grid, run_forward, smooth_switch
    from .io import svg_line_plot, write_csv, write_json, write_snapshot, write_svg
    g = cfg["grid"]
    n = cfg["model"]["n"]
    lam = cfg["spectral"]["lambda"]
    c, w, T = g["forcing_center"], g["forcing_width"], g["forcing_duration"]
    t0f = g["t0"]

    def forcing(t, x, *ys):
        return smooth_switch(t, t0f, T) * np.exp(-((x - c) / w) ** 2)
    forcing.__qualname__ = f"bump({c}, {w}, {T}, {t0f})"
    grid = Grid(nx=g["nx"], ny=g["ny"], n=n, m=g["m"], cfl=g["cfl"], ly=g["ly"])
    prob = ForwardProblem(lam, forcing, t0=t0f, t_end=g["t_end"], closure=Closure(g["closure"]),
                          closure_order=g["closure_order"])
    root = _root(args, cfg)
    m = _manifest("evolve", cfg, args, {}, root)
    t_start = time.perf_counter()
    run = run_forward(prob, grid, series_every=max(1, g["nx"] // 64),
                      window=(g["window_min"], g["window_max"]))
    d = m.directory(root)
    fm = _formats(args, cfg)
    rows = run.series_rows()
    outs = []
    if "csv" in fm:
        outs.append(write_csv(d / "series.csv", rows[0], rows[1:]))
    if "json" in fm:
        b, j = write_snapshot(d / "final", run.final, {"t": float(run.times[-1]) if run.times.size
                                                       else prob.t_end, **grid.to_dict()})
        outs += [b, j]
    if "svg" in fm:
        outs.append(write_svg(d / "series.svg", svg_line_plot(
            [(run.times, run.series["h1_K"], "H1_0(K)")], title="evolution norms", xlabel="t",
            ylabel="norm")))
    _finish(m, root, t_start, {}, outs)
    print(f"evolve: {run.times.size} samples, final max|u| = {np.max(np.abs(run.final)):.6g}; "
          f"outputs in {d}")
    return EXIT_OK


def cmd_ineq(args, cfg: Config) -> int:
    from .functional import graded_grid, hardy_infimum, sharp_hardy_constant
    from .io import write_csv, write_json
    n = cfg["model"]["n"]
    cells = args.cells or cfg["grid"]["hardy_cells"]
    root = _root(args, cfg)
    m = _manifest("ineq", cfg, args, {"cells": cells}, root)
    t0 = time.perf_counter()
    val = hardy_infimum(graded_grid(cells, n))
    c = sharp_hardy_constant(n)
    info = {"n": n, "cells": cells, "hardy_infimum": val, "sharp_constant": c,
            "relative_gap": (val - c) / c}
    d = m.directory(root)
    fm = _formats(args, cfg)
    outs = []
    if "json" in fm:
        outs.append(write_json(d / "hardy.json", info))
    if "csv" in fm:
        outs.append(write_csv(d / "hardy.csv", list(info), [list(info.values())]))
    _finish(m, root, t0, {}, outs)
    print(f"ineq: n={n} infimum={val!r} sharp={c!r} gap={(val - c) / c:.4%}; outputs in {d}")
    return EXIT_OK


def cmd_experiment(args, cfg: Config) -> int:
    from .experiments import EXPERIMENTS
    ids = args.ids or cfg["experiment"]["ids"]
    unknown = [i for i in ids if i not in EXPERIMENTS]
    if unknown:
        raise UsageError(f"unknown experiment(s): {', '.join(unknown)}; "
                         f"available: {', '.join(EXPERIMENTS)}")
    root = _root(args, cfg)
    seed = _seed(args, cfg)
    ok_all = True
    for name in ids:
        manifest, ok = EXPERIMENTS[name](root, dict(cfg.overrides.get(name, {})), seed)
        print(f"experiment {name}: {'PASS' if ok else 'FAIL'} -> "
              f"{manifest.directory(root)}")
        ok_all &= ok
    return EXIT_OK if ok_all else EXIT_FAIL


def cmd_accept(args, cfg: Config) -> int:
    from .acceptance import acceptance_suite, suite_report
    from .io import validate_json, write_json
    only = None
    if args.only:
        try:
            only = [int(a) for a in args.only.split(",") if a.strip()]
        except ValueError:
            raise UsageError("--only: expected comma-separated integers") from None
        bad = [a for a in only if not 1 <= a <= 10]
        if bad:
            raise UsageError(f"--only: unknown criteria {bad}")
    workers = args.threads or cfg["experiment"]["workers"]
    root = _root(args, cfg)
    m = _manifest("accept", cfg, args, {"only": only, "mutate": args.mutate}, root)
    t0 = time.perf_counter()
    overrides = {}
    if "wavepacket" in cfg.overrides:
        overrides[7] = dict(cfg.overrides["wavepacket"])
    verdicts = acceptance_suite(only, workers=workers, seed=_seed(args, cfg), mutate=args.mutate,
                                overrides=overrides)
    for v in verdicts:
        print(v.line(), flush=True)
        if v.error and not v.passed:
            print(f"    error: {v.error.strip().splitlines()[0]}", flush=True)
    rep = suite_report(verdicts)
    validate_json(rep, "acceptance")
    outs = [write_json(m.directory(root) / "verdicts.json", rep)]
    _finish(m, root, t0, {f"criterion_{v.id}": v.passed for v in verdicts}, outs)
    print(f"accept: {sum(v.passed for v in verdicts)}/{len(verdicts)} passed")
    return EXIT_OK if rep["all_passed"] else EXIT_FAIL


def cmd_validate_config(args, cfg_unused) -> int:
    path = args.path or args.config
    if not path:
        raise UsageError("validate-config: a configuration path is required")
    load_config(path)
    print(f"{path}: OK")
    return EXIT_OK


COMMANDS = {
    "trace": cmd_trace,
    "modes": cmd_modes,
    "evolve": cmd_evolve,
    "ineq": cmd_ineq,
    "experiment": cmd_experiment,
    "accept": cmd_accept,
    "validate-config": cmd_validate_config,
}


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
        if not args.command:
            raise UsageError("adswk: a subcommand is required "
                             f"({', '.join(COMMANDS)})")
        if args.threads is not None and args.threads < 1:
            raise UsageError("--threads must be >= 1")
        cfg = None if args.command == "validate-config" else _load(args)
        return COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
