"""Command-line entry point.

Subcommands: simulate, indicators, bounds, projected, telemetry, verify.
Configuration precedence is flags over --config file over built-in
defaults; every run's fully resolved configuration (defaults included) is
recorded as a manifest, written to the output directory when one is given
and printed otherwise.  Exit codes: 0 success, 1 usage error, 2
runtime/model error (including failed verification).
"""

from __future__ import annotations

import argparse
import csv
import difflib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, bounds as bnd, fixtures, models, telemetry, verify
from .indicators import alpha_beta, check_sufficient_condition
from .lognorm import SamplingBudget
from .norms import WeightedNormSpec
from .projected import CONSTRAINT_REGISTRY, projected_alpha_beta
from .sde import simulate_coupled, trajectory_to_csv


class UsageError(Exception):
    pass


_ALL_OPTIONS: list = []


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        if "unrecognized arguments" in message:
            bad = message.split(":", 1)[1].strip().split()
            hints = []
            for b in bad:
                close = difflib.get_close_matches(b, _ALL_OPTIONS, n=1)
                if close:
                    hints.append(f"{b}: did you mean {close[0]}?")
            if hints:
                message += "  (" + "; ".join(hints) + ")"
        raise UsageError(message)


def _floats(text):
    return [float(v) for v in str(text).split(",") if v.strip() != ""]


# Per-subcommand option tables: name -> (type, default, help).
_COMMON = {
    "seed": (int, 0, "base RNG seed"),
    "out": (str, None, "output directory"),
    "config": (str, None, "JSON config file mirroring the flags"),
}

_MODEL_OPTS = {
    "model": (str, "gbm", "built-in model name (gbm, ou, lander3dof)"),
    "a": (float, None, "gbm drift rate"),
    "b": (float, None, "gbm diffusion rate"),
    "theta": (float, None, "ou mean-reversion rate"),
    "sigma": (float, None, "ou noise level / lander velocity-noise level"),
    "n": (int, None, "ou state dimension"),
    "kp": (float, None, "lander position gain"),
    "kd": (float, None, "lander velocity gain"),
}

_BUDGET_OPTS = {
    "p": (float, 2.0, "norm order"),
    "weights": (str, None, "comma-separated norm weights, or 'descent'"),
    "base_points": (int, 128, "sampling base points"),
    "directions": (int, 64, "sampling directions per base point"),
}

OPTION_TABLES = {
    "simulate": {
        **_MODEL_OPTS,
        "x0": (str, None, "comma-separated initial state"),
        "delta0": (str, None, "comma-separated initial perturbation"),
        "T": (float, 1.0, "horizon [s]"),
        "dt": (float, 1e-3, "step [s]"),
        **_COMMON,
    },
    "indicators": {
        **_MODEL_OPTS,
        **_BUDGET_OPTS,
        "format": (str, "text", "output format: text, csv or json"),
        **_COMMON,
    },
    "bounds": {
        "alpha": (float, -1.0, "mean log growth rate [1/s]"),
        "beta": (float, 0.25, "diffusion variability [1/s]"),
        "dt": (float, 0.01, "window length [s]"),
        "mc": (int, None, "Monte Carlo path count for an empirical frequency"),
        "substeps": (int, 8, "integrator substeps per window"),
        **_COMMON,
    },
    "projected": {
        **_MODEL_OPTS,
        **_BUDGET_OPTS,
        "constraint": (str, "range", "constraint fixture: " + ", ".join(sorted(CONSTRAINT_REGISTRY))),
        "noise": (float, 1.0, "observation noise scale"),
        "domain_lower": (str, None, "comma-separated analysis box lower corner"),
        "domain_upper": (str, None, "comma-separated analysis box upper corner"),
        **_COMMON,
    },
    "telemetry": {
        "inputs": (list, None, "input CSV files (--in, repeatable)"),
        "window": (int, 51, "beta estimation window (odd)"),
        "p": (float, 2.0, "norm order"),
        "weights": (str, None, "comma-separated norm weights, or 'descent'"),
        "schema": (str, "t,rx,ry,rz,vx,vy,vz", "column mapping: time,state..."),
        "threads": (int, 1, "max parallel input files"),
        **_COMMON,
    },
    "verify": {
        "module": (str, None, "restrict to one module's properties"),
        **_COMMON,
    },
}


def _build_parser() -> _Parser:
    parser = _Parser(prog="stochstab", description=__doc__)
    parser.add_argument("--version", action="version", version=f"stochstab {__version__}")
    subs = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")
    for name, table in OPTION_TABLES.items():
        sp = subs.add_parser(name, description=f"stochstab {name}")
        for opt, (typ, _default, help_text) in table.items():
            if opt == "inputs":
                sp.add_argument("--in", dest="inputs", action="append", help=help_text)
            elif opt == "module":
                sp.add_argument("module", nargs="?", default=None,
                                choices=verify.MODULE_NAMES, help=help_text)
            else:
                flag = "--" + opt.replace("_", "-")
                sp.add_argument(flag, dest=opt, type=typ, default=None, help=help_text)
        _ALL_OPTIONS.extend(
            o for a in sp._actions for o in a.option_strings if o not in _ALL_OPTIONS
        )
    return parser


def _resolve(args, table) -> dict:
    """flags > config file > defaults, with the merge recorded for the manifest."""
    file_values = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            file_values = json.load(fh)
    resolved = {}
    for opt, (_typ, default, _help) in table.items():
        value = getattr(args, opt, None)
        if value is None and opt in file_values:
            value = file_values[opt]
        if value is None:
            value = default
        resolved[opt] = value
    return resolved


def _manifest(subcommand, cfg, out) -> None:
    manifest = {"tool": f"stochstab {__version__}", "subcommand": subcommand,
                "config": cfg}
    text = json.dumps(manifest, indent=2, sort_keys=True, default=str)
    if out:
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, "manifest.json"), "w") as fh:
            fh.write(text + "\n")
    else:
        print("manifest: " + json.dumps(manifest, sort_keys=True, default=str))


def _model_from(cfg) -> tuple:
    params = {k: cfg.get(k) for k in ("a", "b", "theta", "sigma", "n", "kp", "kd")}
    name = cfg["model"]
    known = models.MODEL_REGISTRY[name][1] if name in models.MODEL_REGISTRY else {}
    model = models.build_model(name, **{k: v for k, v in params.items() if k in known})
    return model, name


def _norm_spec(cfg, n) -> WeightedNormSpec:
    raw = cfg.get("weights")
    p = float(cfg.get("p", 2.0))
    if raw is None:
        return WeightedNormSpec.ones(n, p)
    if raw == "descent":
        return fixtures.descent_norm_spec(p)
    if isinstance(raw, (list, tuple)):
        return WeightedNormSpec(np.asarray(raw, dtype=float), p)
    return WeightedNormSpec(np.asarray(_floats(raw)), p)


def _budget(cfg) -> SamplingBudget:
    return SamplingBudget(
        base_points=int(cfg["base_points"]),
        directions=int(cfg["directions"]),
        seed=int(cfg["seed"]),
    )


def _print_report(report, sufficiency=None, title=""):
    print(f"== {title or report.label} ==")
    print(f"  p            : {report.p:g}")
    print(f"  budget       : {report.budget.base_points} x {report.budget.directions} "
          f"samples, h = {list(report.budget.h_sequence)}, seed {report.budget.seed}")
    print("  note         : sampled values are lower bounds of suprema")
    print(f"  mu(f)        : {report.mu_drift: .6g}")
    for j, c in enumerate(report.channels):
        print(f"  channel {j}    : mu' = {c.mu_prime: .6g}  mu(b) = {c.mu_plus: .6g}"
              f"  mu(-b) = {c.mu_minus: .6g}")
    print(f"  alpha        : {report.alpha: .6g}")
    print(f"  beta         : {report.beta: .6g}")
    if sufficiency is not None:
        state = "satisfied" if sufficiency.satisfied else "NOT satisfied"
        print(f"  mean growth  : {state} (margin {sufficiency.margin: .6g})")


def _cmd_simulate(cfg) -> int:
    model, name = _model_from(cfg)
    x0_def, d0_def = models.default_initial_state(name)
    x0 = np.asarray(_floats(cfg["x0"])) if cfg["x0"] else x0_def
    d0 = np.asarray(_floats(cfg["delta0"])) if cfg["delta0"] else d0_def
    if x0.size == 1 and model.n > 1:
        x0 = np.full(model.n, x0[0])
    if d0.size == 1 and model.n > 1:
        d0 = np.full(model.n, d0[0])
    traj = simulate_coupled(model, x0, d0, T=float(cfg["T"]), dt=float(cfg["dt"]),
                            seed=int(cfg["seed"]))
    print(f"simulated {model.label}: {len(traj.times) - 1} steps, dt={traj.dt:g}")
    print(f"  terminal base     : {np.array2string(traj.base[-1], precision=6)}")
    print(f"  terminal perturbed: {np.array2string(traj.perturbed[-1], precision=6)}")
    if cfg["out"]:
        os.makedirs(cfg["out"], exist_ok=True)
        path = os.path.join(cfg["out"], "trajectory.csv")
        trajectory_to_csv(traj, path)
        print(f"  wrote {path}")
    return 0


def _cmd_indicators(cfg) -> int:
    model, _ = _model_from(cfg)
    spec = _norm_spec(cfg, model.n)
    report = alpha_beta(model, spec, _budget(cfg))
    suff = check_sufficient_condition(report)
    fmt = cfg.get("format") or "text"
    if fmt == "json":
        print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    elif fmt == "csv":
        writer = csv.writer(sys.stdout)
        writer.writerow(["label", "p", "alpha", "beta", "mu_drift", "satisfied"])
        writer.writerow([report.label, report.p, f"{report.alpha:.17g}",
                         f"{report.beta:.17g}", f"{report.mu_drift:.17g}",
                         suff.satisfied])
    else:
        _print_report(report, suff)
    return 0


def _cmd_bounds(cfg) -> int:
    alpha_v = float(cfg["alpha"])
    beta_v = float(cfg["beta"])
    dt = float(cfg["dt"])
    cher = bnd.chernoff_growth_bound(alpha_v, beta_v, dt)
    print(f"P(Y >= 0) bounds for alpha={alpha_v:g}, beta={beta_v:g}, dt={dt:g}")
    print(f"  chernoff  : {cher.value:.6g}  (zeta* = "
          f"{'n/a' if cher.zeta is None else f'{cher.zeta:.6g}'})")
    try:
        cheb = bnd.chebyshev_growth_bound(alpha_v, beta_v, dt)
        print(f"  chebyshev : {cheb.value:.6g}  (raw {cheb.raw:.6g})")
    except bnd.InvalidBoundError as exc:
        print(f"  chebyshev : n/a ({exc})")
    print(f"  gaussian  : {bnd.gaussian_growth_probability(alpha_v, beta_v, dt):.6g}"
          "  (small-dt limiting law, not a bound)")
    print(f"  note      : {cher.note}")
    if cfg["mc"]:
        from .sde import simulate_ensemble

        n_mc = int(cfg["mc"])
        substeps = int(cfg["substeps"])
        model = models.gbm(alpha_v + 0.5 * beta_v, beta_v**0.5)
        ens = simulate_ensemble(model, [1.0], [1e-4], T=dt, dt=dt / substeps,
                                n_paths=n_mc, seed=int(cfg["seed"]))
        est = bnd.window_growth_frequency(ens)
        print(f"  empirical : {est.frequency:.6g} +/- {est.se:.2g} "
              f"(N={est.n}, GBM realization)")
    return 0


def _cmd_projected(cfg) -> int:
    model, _ = _model_from(cfg)
    if cfg["constraint"] not in CONSTRAINT_REGISTRY:
        raise UsageError(f"unknown constraint '{cfg['constraint']}'")
    builder = CONSTRAINT_REGISTRY[cfg["constraint"]]
    proj = builder(n=model.n) if cfg["constraint"] != "parabola" else builder()
    spec = _norm_spec(cfg, model.n)
    budget = _budget(cfg)
    domain = None
    if cfg["domain_lower"] and cfg["domain_upper"]:
        domain = (np.asarray(_floats(cfg["domain_lower"])),
                  np.asarray(_floats(cfg["domain_upper"])))
    elif cfg["constraint"] == "range":
        domain = (np.full(model.n, 0.6), np.full(model.n, 1.8))
    base_report = alpha_beta(model, spec, budget, domain=domain)
    proj_report = projected_alpha_beta(
        model, proj, spec, budget, noise_scale=float(cfg["noise"]), domain=domain
    )
    _print_report(base_report, check_sufficient_condition(base_report),
                  title=f"base: {model.label}")
    print()
    _print_report(proj_report, check_sufficient_condition(proj_report),
                  title=f"projected: {cfg['constraint']} constraint")
    print()
    increase = proj_report.beta - base_report.beta
    print(f">> data injection changes beta by {increase:+.6g} "
          f"({base_report.beta:.6g} -> {proj_report.beta:.6g})")
    return 0


def _cmd_telemetry(cfg) -> int:
    if not cfg["inputs"]:
        raise UsageError("telemetry needs at least one --in file")
    if not cfg["out"]:
        raise UsageError("telemetry needs --out")
    schema = telemetry.TelemetrySchema.from_string(cfg["schema"])

    def analyze(path):
        series = telemetry.load_telemetry(path, schema)
        spec = _norm_spec(cfg, series.n)
        ind = telemetry.analyze_series(series, spec, window=int(cfg["window"]))
        stem = os.path.splitext(os.path.basename(path))[0]
        out_dir = os.path.join(cfg["out"], stem)
        telemetry.export_indicators(ind, out_dir)
        return path, series, ind, out_dir

    n_workers = max(1, int(cfg["threads"]))
    if n_workers > 1 and len(cfg["inputs"]) > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            outputs = list(pool.map(analyze, cfg["inputs"]))
    else:
        outputs = [analyze(p) for p in cfg["inputs"]]

    for path, series, ind, out_dir in outputs:
        print(f"{path}: {len(series)} samples ({series.n_dropped} dropped), "
              f"{ind.n_steps} steps analyzed")
        print(f"  frequency   : {ind.frequency:.6g}")
        print(f"  cumulative  : {ind.cumulative:.6g}")
        print(f"  window      : {ind.window}  zero-perturbations dropped: {ind.n_dropped}")
        print(f"  outputs     : {out_dir}/(indicators.csv, summary.csv, *.svg)")
    return 0


def _cmd_verify(cfg) -> int:
    module = cfg.get("module")
    results = verify.run_suite(seed=int(cfg["seed"]),
                               modules=[module] if module else None)
    width = max(len(r.name) for r in results)
    print(f"{'property':{width}s}  {'status':6s}  {'value':>13s}  {'threshold':>13s}")
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        line = f"{r.name:{width}s}  {status:6s}  {r.value:13.6g}  {r.threshold:13.6g}"
        if r.detail:
            line += f"  {r.detail}"
        print(line)
    n_pass = sum(r.passed for r in results)
    print(f"{n_pass}/{len(results)} properties passed")
    if cfg["out"]:
        os.makedirs(cfg["out"], exist_ok=True)
        path = os.path.join(cfg["out"], "violations.csv")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["property", "max_violation", "threshold", "passed"])
            for r in results:
                writer.writerow([r.name, f"{r.value:.17g}", f"{r.threshold:.17g}",
                                 r.passed])
        print(f"wrote {path}")
    return 0 if n_pass == len(results) else 2


_HANDLERS = {
    "simulate": _cmd_simulate,
    "indicators": _cmd_indicators,
    "bounds": _cmd_bounds,
    "projected": _cmd_projected,
    "telemetry": _cmd_telemetry,
    "verify": _cmd_verify,
}


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.subcommand:
            parser.print_help()
            return 1
        cfg = _resolve(args, OPTION_TABLES[args.subcommand])
        _manifest(args.subcommand, cfg, cfg.get("out"))
        return _HANDLERS[args.subcommand](cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
