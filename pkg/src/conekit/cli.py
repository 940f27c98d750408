"""Batch entry points: corrugation sweeps, the conformal search, rigidity
reports and modulus queries, with deterministic artifacts.

Config values come from an optional flat `key = value` file overridden by
command-line flags; the fully resolved configuration is echoed into every
report.  Any violated invariant exits nonzero and leaves a machine-
readable error report instead of partial artifacts.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass

import numpy as np

from .errors import ConekitError, ConfigError, SearchFailed
from .exports import (
    export_metric_csv,
    export_obj,
    export_scalar_csv,
    export_trace_csv,
    write_json_report,
)
from .fields import MetricField, PeriodicGrid, Sym2, plane_immersion, pullback
from .hull import OrbitHull
from .minkowski import MinkVector
from .moduli import SearchConfig, conformal_search, torus_modulus
from .presets import banded_eta, corrugation_sweep, sweep_slope
from .rigidity import make_genus2_group, orbit, rigidity_report, uniform_alpha_estimate

COMMANDS = ("corrugate", "search", "rigidity", "modulus")

_DEFAULTS = {
    "command": "corrugate",
    "grid_n": 256,
    "epsilon": 5e-4,
    "rho": 0.1,
    "w0": complex(0.05, 1.0),
    "n_policy": "auto",
    "word_len": 4,
    "output_dir": "out",
    "seed": 0,
    "metric": (1.0, 0.0, 4.0),
}


@dataclass(frozen=True)
class RunConfig:
    command: str
    grid_n: int
    epsilon: float
    rho: float
    w0: complex
    n_policy: object
    word_len: int
    output_dir: str
    seed: int
    metric: tuple

    def echo(self) -> dict:
        w = self.w0
        return {
            "command": self.command,
            "grid_n": self.grid_n,
            "epsilon": self.epsilon,
            "rho": self.rho,
            "w0": f"{w.real:+.17g}{w.imag:+.17g}i",
            "n_policy": self.n_policy if isinstance(self.n_policy, str) else list(self.n_policy),
            "word_len": self.word_len,
            "output_dir": self.output_dir,
            "seed": self.seed,
            "metric": list(self.metric),
        }


def _parse_complex(text: str) -> complex:
    cleaned = text.strip().replace("i", "j")
    if cleaned in ("j", "+j"):
        cleaned = "1j"
    try:
        return complex(cleaned)
    except ValueError as exc:
        raise ConfigError(f"cannot parse complex number {text!r}") from exc


def _parse_n_policy(text: str):
    if text.strip() == "auto":
        return "auto"
    try:
        values = tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise ConfigError(f"bad n_policy {text!r}") from exc
    if not values or any(v < 1 for v in values):
        raise ConfigError(f"n_policy values must be positive: {text!r}")
    return values


def _parse_metric(text: str) -> tuple:
    try:
        parts = tuple(float(tok) for tok in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad metric {text!r}") from exc
    if len(parts) != 3:
        raise ConfigError("metric needs exactly E,F,G")
    return parts


_PARSERS = {
    "command": str,
    "grid_n": int,
    "epsilon": float,
    "rho": float,
    "w0": _parse_complex,
    "n_policy": _parse_n_policy,
    "word_len": int,
    "output_dir": str,
    "seed": int,
    "metric": _parse_metric,
}


def _read_config_file(path) -> dict:
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, _, val = line.partition("=")
            key = key.strip().replace("-", "_")
            if key == "out":
                key = "output_dir"
            if key not in _PARSERS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                values[key] = _PARSERS[key](val.strip())
            except ConfigError:
                raise
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return values


def _validate(cfg: RunConfig) -> RunConfig:
    if cfg.command not in COMMANDS:
        raise ConfigError(f"unknown command {cfg.command!r}; choose from {COMMANDS}")
    if cfg.grid_n < 8:
        raise ConfigError(f"grid_n must be >= 8, got {cfg.grid_n}")
    if cfg.epsilon <= 0 or cfg.rho <= 0:
        raise ConfigError("epsilon and rho must be positive")
    if cfg.word_len < 1:
        raise ConfigError("word_len must be >= 1")
    if not cfg.w0.imag > 0:
        raise ConfigError("w0 must lie in the upper half plane")
    if cfg.seed < 0:
        raise ConfigError("seed must be nonnegative")
    return cfg


def parse_config(argv=None) -> RunConfig:
    """Resolve defaults < config file < command-line flags."""
    parser = argparse.ArgumentParser(prog="conekit")
    parser.add_argument("--command", choices=COMMANDS)
    parser.add_argument("--grid-n", type=int, dest="grid_n")
    parser.add_argument("--epsilon", type=float)
    parser.add_argument("--rho", type=float)
    parser.add_argument("--w0", type=str)
    parser.add_argument("--n-policy", type=str, dest="n_policy")
    parser.add_argument("--word-len", type=int, dest="word_len")
    parser.add_argument("--out", type=str, dest="output_dir")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--metric", type=str)
    parser.add_argument("--config", type=str)
    args = parser.parse_args(argv)

    values = dict(_DEFAULTS)
    if args.config:
        values.update(_read_config_file(args.config))
    for key in ("command", "grid_n", "epsilon", "rho", "word_len", "output_dir", "seed"):
        flag = getattr(args, key)
        if flag is not None:
            values[key] = flag
    if args.w0 is not None:
        values["w0"] = _parse_complex(args.w0)
    if args.n_policy is not None:
        values["n_policy"] = _parse_n_policy(args.n_policy)
    if args.metric is not None:
        values["metric"] = _parse_metric(args.metric)
    return _validate(RunConfig(**values))


def _run_corrugate(cfg: RunConfig, outdir: str) -> int:
    n_values = cfg.n_policy if isinstance(cfg.n_policy, tuple) else (50, 100, 200, 400)
    rows, meshes = corrugation_sweep(cfg.grid_n, n_values)
    slope = sweep_slope(rows)
    errs = [r[1] for r in rows]
    decreasing = all(b < a for a, b in zip(errs, errs[1:]))
    ok = decreasing and -1.15 <= slope <= -0.85
    for (n_corr, _), mesh in zip(rows, meshes):
        export_obj(mesh, os.path.join(outdir, f"corrugated_n{n_corr}.obj"))
    grid = meshes[-1].grid
    export_metric_csv(pullback(meshes[-1]), os.path.join(outdir, "pullback_final.csv"))
    export_scalar_csv(grid, banded_eta(grid), os.path.join(outdir, "eta.csv"), name="eta")
    with open(os.path.join(outdir, "errors.csv"), "w", newline="\n") as fh:
        fh.write("n_corr,c0_error\n")
        for n_corr, err in rows:
            fh.write(f"{n_corr},{format(err, '.17g')}\n")
    write_json_report(
        {
            "config": cfg.echo(),
            "rows": [[n, e] for n, e in rows],
            "slope": slope,
            "strictly_decreasing": decreasing,
            "passed": ok,
        },
        os.path.join(outdir, "report.json"),
    )
    return 0 if ok else 1


def _run_search(cfg: RunConfig, outdir: str) -> int:
    grid = PeriodicGrid(cfg.grid_n)
    f = plane_immersion(grid)
    search_cfg = SearchConfig(rho=cfg.rho, epsilon=cfg.epsilon)
    w_star, embedded, trace = conformal_search(f, cfg.w0, search_cfg)
    final_hyp = min(row["hyp_dist"] for row in trace)
    export_trace_csv(trace, os.path.join(outdir, "trace.csv"))
    export_obj(embedded, os.path.join(outdir, "final.obj"))
    write_json_report(
        {
            "config": cfg.echo(),
            "w_star": f"{w_star.real:+.17g}{w_star.imag:+.17g}i",
            "g_evaluations": len(trace),
            "final_hyp_dist": final_hyp,
            "passed": final_hyp <= search_cfg.tol,
        },
        os.path.join(outdir, "report.json"),
    )
    return 0


def _run_rigidity(cfg: RunConfig, outdir: str) -> int:
    group = make_genus2_group()
    report = rigidity_report(group, cfg.word_len)
    report["uniform_alpha"] = uniform_alpha_estimate(group, word_len=3)
    hull_len = min(cfg.word_len, 4)
    pts = orbit(group, np.array([0.0, 0.0, 1.0]), hull_len)
    hull = OrbitHull.from_points(MinkVector(0.0, 0.0, 1.0), pts, build_faces=True)
    ok = (
        report["alpha"] > 1.0
        and report["relator_defect"] <= 1e-8
        and abs(report["stabilization_ratio"]) < 0.02
    )
    export_obj(hull, os.path.join(outdir, "hull.obj"))
    report["config"] = cfg.echo()
    report["passed"] = ok
    write_json_report(report, os.path.join(outdir, "report.json"))
    return 0 if ok else 1


def format_modulus(w: complex) -> str:
    re, im = w.real, w.imag
    parts = []
    if abs(re) > 1e-12:
        parts.append(format(re, ".12g"))
    imtxt = format(im, ".12g")
    if imtxt == "1":
        imtxt = ""
    parts.append(("+" if parts and im >= 0 else "") + imtxt + "i")
    return "".join(parts)


def _run_modulus(cfg: RunConfig, outdir: str) -> int:
    grid = PeriodicGrid(cfg.grid_n)
    e, f, g = cfg.metric
    field = MetricField.constant(grid, Sym2(e, f, g))
    w = torus_modulus(field)
    print(format_modulus(w))
    return 0


def run_command(cfg: RunConfig) -> int:
    """Dispatch a validated config; returns the process exit status."""
    outdir = cfg.output_dir
    os.makedirs(outdir, exist_ok=True)
    runners = {
        "corrugate": _run_corrugate,
        "search": _run_search,
        "rigidity": _run_rigidity,
        "modulus": _run_modulus,
    }
    try:
        return runners[cfg.command](cfg, outdir)
    except SearchFailed as exc:
        write_json_report(
            {
                "error": type(exc).__name__,
                "message": str(exc),
                "trace_len": len(exc.trace),
            },
            os.path.join(outdir, "error.json"),
        )
        return 1
    except ConekitError as exc:
        write_json_report(
            {"error": type(exc).__name__, "message": str(exc)},
            os.path.join(outdir, "error.json"),
        )
        return 1


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return run_command(cfg)


if __name__ == "__main__":
    sys.exit(main())
