"""Configuration ingestion, subcommand dispatch and result emission.

Configs are JSON documents with four sections::

    {
      "seed": 42,
      "workers": 2,
      "output": {"directory": "out", "format": "csv"},
      "system": { "n": 2, "N": 1, "alpha": [...], "A": [[...]], "I0": [...],
                  "f": "<polynomial text>", "Lambda": "<polynomial text>",
                  "kappa": 0.0, "M": 2.0, "C_Lambda": 1.0, "C0": 0.004 },
      "experiment": {"kind": "drift", ...},
      "numeric": {"dt": null, "horizon": 1e4, "degree_cap": null,
                  "nodes": 64, "T_max": 1e5}
    }

Unknown keys are rejected; validation reports every schema error at once.
Subcommands map one-to-one onto library operations: dirichlet, normal-form,
drift, constrained, small-kappa, variant, check-conditions.  Exit code 0
means every asserted bound passed, 1 a bound failure, 2 a configuration
error.  The environment variable NEKLAB_LOG in {error, info, debug} sets
the log level.  Artifacts are deterministic for identical configs; wall
clock timestamps are confined to the run_meta.json sidecar.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import experiments, normalform
from .diophantine import approximate_periodic_orbit, dirichlet_best, periodic_frequency
from .hamiltonian import SystemSpec, check_structural_hypotheses
from .normalform import (
    AveragingContext,
    check_conditions,
    iterate_normal_form,
    parameter_recipe,
    theta_threshold,
)
from .polyalg import PolynomialParseError, parse_polynomial

log = logging.getLogger("neklab")

EXIT_OK = 0
EXIT_BOUND_FAILURE = 1
EXIT_CONFIG_ERROR = 2

_EXPERIMENT_KINDS = (
    "dirichlet", "normalform", "drift", "constrained",
    "smallkappa", "variant", "check",
)

_SUBCOMMAND_KIND = {
    "dirichlet": "dirichlet",
    "normal-form": "normalform",
    "drift": "drift",
    "constrained": "constrained",
    "small-kappa": "smallkappa",
    "variant": "variant",
    "check-conditions": "check",
}


class ConfigError(ValueError):
    def __init__(self, errors: List[str]):
        self.errors = errors
        super().__init__("; ".join(errors))


@dataclass
class RunConfig:
    seed: int = 42
    workers: Optional[int] = None
    output_dir: str = "."
    output_format: str = "csv"
    system: Optional[SystemSpec] = None
    experiment: Dict[str, object] = field(default_factory=dict)
    numeric: Dict[str, object] = field(default_factory=dict)


# ----------------------------------------------------------------------
# config parsing / validation
# ----------------------------------------------------------------------

def _expect_keys(section: dict, allowed, path: str, errors: List[str]):
    for key in section:
        if key not in allowed:
            errors.append(f"{path}: unknown key {key!r}")


def _get_number(section, key, path, errors, required=False, default=None,
                minimum=None, integer=False):
    if key not in section:
        if required:
            errors.append(f"{path}.{key}: missing required field")
        return default
    val = section[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        errors.append(f"{path}.{key}: expected a number, got {type(val).__name__}")
        return default
    if integer and int(val) != val:
        errors.append(f"{path}.{key}: expected an integer")
        return default
    if minimum is not None and val < minimum:
        errors.append(f"{path}.{key}: {key} must be >= {minimum:g}")
        return default
    return int(val) if integer else float(val)


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate a JSON config; raises ConfigError carrying
    every schema problem found."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            [f"JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"]
        ) from None
    if not isinstance(doc, dict):
        raise ConfigError(["top level must be a JSON object"])

    errors: List[str] = []
    _expect_keys(doc, {"seed", "workers", "output", "system", "experiment",
                       "numeric"}, "config", errors)

    seed = _get_number(doc, "seed", "config", errors, default=42,
                       minimum=0, integer=True)
    workers = None
    if "workers" in doc and doc["workers"] is not None:
        workers = _get_number(doc, "workers", "config", errors,
                              minimum=1, integer=True)

    out_dir, out_format = ".", "csv"
    if "output" in doc:
        out = doc["output"]
        if not isinstance(out, dict):
            errors.append("config.output: expected an object")
        else:
            _expect_keys(out, {"directory", "format"}, "config.output", errors)
            out_dir = out.get("directory", ".")
            out_format = out.get("format", "csv")
            if not isinstance(out_dir, str):
                errors.append("config.output.directory: expected a string")
            if out_format not in ("csv", "json"):
                errors.append("config.output.format: must be 'csv' or 'json'")

    system = None
    if "system" in doc:
        system = _parse_system(doc["system"], errors)

    experiment: Dict[str, object] = {}
    if "experiment" in doc:
        exp = doc["experiment"]
        if not isinstance(exp, dict):
            errors.append("config.experiment: expected an object")
        else:
            experiment = dict(exp)
            kind = experiment.get("kind")
            if kind is not None and kind not in _EXPERIMENT_KINDS:
                errors.append(
                    f"config.experiment.kind: unknown kind {kind!r} "
                    f"(expected one of {', '.join(_EXPERIMENT_KINDS)})"
                )

    numeric: Dict[str, object] = {"dt": None, "horizon": 1e4, "degree_cap": None,
                                  "nodes": 64, "T_max": experiments.DEFAULT_T_MAX,
                                  "hypothesis_z_radius": 1.0,
                                  "hypothesis_zeta_radius": 1.0}
    if "numeric" in doc:
        num = doc["numeric"]
        if not isinstance(num, dict):
            errors.append("config.numeric: expected an object")
        else:
            _expect_keys(num, set(numeric), "config.numeric", errors)
            for key in ("dt", "horizon", "T_max", "hypothesis_z_radius",
                        "hypothesis_zeta_radius"):
                if key in num and num[key] is not None:
                    numeric[key] = _get_number(num, key, "config.numeric",
                                               errors, minimum=0.0)
            for key in ("degree_cap", "nodes"):
                if key in num and num[key] is not None:
                    numeric[key] = _get_number(num, key, "config.numeric",
                                               errors, minimum=1, integer=True)

    if errors:
        raise ConfigError(errors)
    return RunConfig(seed=seed, workers=workers, output_dir=out_dir,
                     output_format=out_format, system=system,
                     experiment=experiment, numeric=numeric)


def _parse_system(section, errors: List[str]) -> Optional[SystemSpec]:
    if not isinstance(section, dict):
        errors.append("config.system: expected an object")
        return None
    allowed = {"n", "N", "alpha", "A", "I0", "f", "Lambda", "kappa",
               "M", "C_Lambda", "C0"}
    _expect_keys(section, allowed, "config.system", errors)
    n = _get_number(section, "n", "config.system", errors, required=True,
                    minimum=1, integer=True)
    N = _get_number(section, "N", "config.system", errors, required=True,
                    minimum=0, integer=True)
    kappa = _get_number(section, "kappa", "config.system", errors,
                        required=True, minimum=0.0)
    M = _get_number(section, "M", "config.system", errors, default=1.0,
                    minimum=0.0)
    C_Lambda = _get_number(section, "C_Lambda", "config.system", errors,
                           default=1.0, minimum=0.0)
    C0 = _get_number(section, "C0", "config.system", errors, default=1.0,
                     minimum=0.0)
    if n is None or N is None:
        return None

    def vector(key, length):
        val = section.get(key)
        if val is None:
            if key == "I0":
                return np.zeros(length)
            errors.append(f"config.system.{key}: missing required field")
            return None
        arr = np.asarray(val, dtype=float)
        if arr.shape != (length,):
            errors.append(f"config.system.{key}: expected {length} numbers")
            return None
        return arr

    alpha = vector("alpha", n)
    I0 = vector("I0", n)
    A_raw = section.get("A")
    A = None
    if A_raw is None:
        errors.append("config.system.A: missing required field")
    else:
        A = np.asarray(A_raw, dtype=float)
        if A.shape != (n, n):
            errors.append(f"config.system.A: expected an {n}x{n} matrix")
            A = None

    f = Lam = None
    for key in ("f", "Lambda"):
        text = section.get(key)
        if text is None:
            errors.append(f"config.system.{key}: missing required field")
            continue
        if not isinstance(text, str):
            errors.append(f"config.system.{key}: expected a polynomial string")
            continue
        try:
            poly = parse_polynomial(text, n, N)
        except PolynomialParseError as exc:
            errors.append(f"config.system.{key}: {exc}")
            continue
        if key == "f":
            f = poly
        else:
            Lam = poly

    if errors or any(v is None for v in (alpha, I0, A, f, Lam, kappa)):
        return None
    try:
        return SystemSpec(n=n, N=N, alpha=alpha, A=A, I0=I0, f=f, Lambda=Lam,
                          kappa=kappa, M=M, C_Lambda=C_Lambda, C0=C0)
    except (ValueError, TypeError) as exc:
        errors.append(f"config.system: {exc}")
        return None


# ----------------------------------------------------------------------
# subcommand implementations
# ----------------------------------------------------------------------

def _require(experiment: dict, keys: List[str]) -> List[str]:
    return [f"config.experiment.{k}: missing required field"
            for k in keys if k not in experiment]


def _cmd_dirichlet(cfg: RunConfig, outdir: Path) -> int:
    exp = cfg.experiment
    missing = _require(exp, ["omega", "Q"])
    if missing:
        raise ConfigError(missing)
    omega = np.asarray(exp["omega"], dtype=float)
    Q = int(exp["Q"])
    q, p, err = dirichlet_best(omega, Q)
    result = {
        "omega": omega.tolist(), "Q": Q, "q": q,
        "p": [int(v) for v in p], "err": err,
        "dirichlet_bound": Q ** (-1.0 / omega.size),
    }
    if float(np.max(np.abs(omega))) > 1.0 and omega.size >= 1:
        omega0, T = periodic_frequency(omega, Q)
        result["omega0"] = omega0.tolist()
        result["T"] = T
        print(f"q = {q}, p = {result['p']}, err = {err:.17g}")
        print(f"T = {T:.17g}")
        print(f"omega0 = ({', '.join(format(v, '.17g') for v in omega0)})")
    else:
        print(f"q = {q}, p = {result['p']}, err = {err:.17g}")
    experiments.write_json_summary(result, outdir / "dirichlet.json")
    return EXIT_OK


def _build_averaging_context(cfg: RunConfig, theta: float, a: float):
    spec = cfg.system
    I_init = np.full(spec.n, theta ** 2 / spec.n)
    approx = approximate_periodic_orbit(spec.alpha, spec.A, I_init, a)
    rec = parameter_recipe(theta, a, spec.n, spec.norm_A(), spec.C0,
                           spec.M, spec.C_Lambda, approx.tau)
    cap = cfg.numeric.get("degree_cap")
    ctx = AveragingContext(
        omega0=approx.omega0, T=approx.T, I0=approx.I0, A=spec.A,
        kappa=spec.kappa, radii=(rec.r1, rec.r2, rec.r3), m=rec.m,
        degree_cap=int(cap) if cap else None,
    )
    return ctx, approx, rec


def _cmd_normal_form(cfg: RunConfig, outdir: Path) -> int:
    if cfg.system is None:
        raise ConfigError(["config.system: required for normal-form"])
    exp = cfg.experiment
    missing = _require(exp, ["theta", "a"])
    if missing:
        raise ConfigError(missing)
    theta, a = float(exp["theta"]), float(exp["a"])
    ctx, approx, rec = _build_averaging_context(cfg, theta, a)
    log.info("normal-form: omega0=%s T=%.6g m=%d", approx.omega0, approx.T,
             rec.m)
    result = iterate_normal_form(ctx, cfg.system.f, cfg.system.Lambda)
    doc = result.to_json_dict()
    doc["recipe"] = rec.as_dict()
    doc["periodic_approximation"] = {
        "I0": approx.I0.tolist(), "tau": approx.tau,
        "omega0": approx.omega0.tolist(), "T": approx.T, "Q": approx.Q,
    }
    # quadrature cross-check of the averaging projection at the configured
    # node count; an under-resolved node count is recorded, not fatal
    from .normalform import quadrature_average, resonant_average
    import warnings as _warnings

    nodes = int(cfg.numeric["nodes"])
    with _warnings.catch_warnings(record=True) as caught:
        _warnings.simplefilter("always")
        qa = quadrature_average(cfg.system.f, approx.omega0, approx.T, nodes)
    ra = resonant_average(cfg.system.f, approx.omega0, approx.T)
    doc["quadrature_cross_check"] = {
        "nodes": nodes,
        "max_coefficient_deviation": (qa - ra).max_abs_coeff(),
        "warnings": [str(w.message) for w in caught],
    }
    experiments.write_json_summary(doc, outdir / "normal_form.json")
    norms = result.norms
    for j in range(1, len(norms)):
        print(f"step {j}: |f_{j}| = {norms[j]:.6e} "
              f"(ratio {norms[j] / max(norms[j - 1], 1e-300):.3f})")
    halved = all(norms[j + 1] <= 0.5 * norms[j] for j in range(len(norms) - 1))
    print(f"residual halving: {'ok' if halved else 'FAILED'}")
    return EXIT_OK if halved else EXIT_BOUND_FAILURE


def _cmd_drift(cfg: RunConfig, outdir: Path) -> int:
    if cfg.system is None:
        raise ConfigError(["config.system: required for drift"])
    exp = cfg.experiment
    missing = _require(exp, ["theta", "a"])
    if missing:
        raise ConfigError(missing)
    theta, a = float(exp["theta"]), float(exp["a"])
    horizon = float(exp.get("horizon", cfg.numeric["horizon"]))
    phases = int(exp.get("phases", 8))
    spec = cfg.system
    kappa = theta ** (2.0 + 2.0 * a * (2 * spec.n - 1)) \
        if exp.get("kappa_rule", "theta") == "theta" else spec.kappa
    spec = dataclasses.replace(spec, kappa=kappa)
    hyp = check_structural_hypotheses(
        spec, z_radius=float(cfg.numeric["hypothesis_z_radius"]),
        zeta_radius=float(cfg.numeric["hypothesis_zeta_radius"]))
    if not hyp.all_passed:
        print("error: structural hypotheses violated:", file=sys.stderr)
        print(str(hyp), file=sys.stderr)
        return EXIT_CONFIG_ERROR
    log.info("drift: theta=%g kappa=%g horizon=%g phases=%d",
             theta, kappa, horizon, phases)
    consts = normalform.stability_constants(spec.n, spec.norm_A(), spec.M,
                                            spec.C_Lambda)
    klam0 = 0.5 * consts["C_E"] * theta ** (4.0 + 2.0 * a * spec.n)
    drift = klam = 0.0
    dt = cfg.numeric["dt"]
    reports = []
    for phase in range(phases):
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, phase]))
        init = experiments.sampled_initial_point(
            spec, theta, klam0 if spec.N else 0.0, rng)
        rep = experiments.measure_drift(spec, init, horizon, dt=dt, a=a,
                                        theta=theta, K=consts["K"])
        reports.append(rep)
        drift = max(drift, rep.max_action_drift)
        klam = max(klam, rep.max_kappa_Lambda)
    merged = dataclasses.replace(reports[0], max_action_drift=drift,
                                 max_kappa_Lambda=klam, n_phases=phases)
    merged.bound_passed = (drift <= merged.bound_K_theta
                           and klam <= merged.bound_K_theta_lambda)
    experiments.write_drift_csv([merged], outdir / "drift.csv")
    experiments.write_json_summary(
        {"report": merged, "K": consts["K"]}, outdir / "drift.json")
    print(f"max action drift = {drift:.6e} vs bound {merged.bound_K_theta:.6e}")
    print(f"max kappa*Lambda = {klam:.6e} vs bound {merged.bound_K_theta_lambda:.6e}")
    return EXIT_OK if merged.bound_passed else EXIT_BOUND_FAILURE


def _cmd_constrained(cfg: RunConfig, outdir: Path) -> int:
    if cfg.system is None:
        raise ConfigError(["config.system: required for constrained"])
    exp = cfg.experiment
    missing = _require(exp, ["kappa_grid"])
    if missing:
        raise ConfigError(missing)
    kappa_grid = [float(k) for k in exp["kappa_grid"]]
    horizon = float(exp.get("horizon", 10.0))
    zeta0_scale = float(exp.get("zeta0", 0.2))
    spec = cfg.system
    rng = np.random.default_rng(cfg.seed)
    z = experiments.sampled_initial_point(
        dataclasses.replace(spec, kappa=1.0), float(exp.get("theta", 0.4)),
        0.0, rng).z
    zeta = np.zeros(2 * spec.N)
    if spec.N:
        u = rng.normal(size=2 * spec.N)
        zeta = zeta0_scale * u / np.linalg.norm(u)
    from .hamiltonian import PhasePoint
    init = PhasePoint(z, zeta)
    report = experiments.constrained_limit_study(
        spec, init, kappa_grid, horizon, dt=cfg.numeric["dt"],
        workers=cfg.workers)
    experiments.write_convergence_csv(report, outdir / "constrained.csv")
    experiments.write_json_summary(
        {"fitted_zeta_slope": report.fitted_zeta_slope,
         "sup_distance": report.sup_distance,
         "sup_kappa_Lambda": report.sup_kappa_Lambda,
         "hypothesis_notes": report.hypothesis_notes},
        outdir / "constrained.json")
    decreasing = all(
        report.sup_distance[i + 1] <= 1.05 * report.sup_distance[i]
        for i in range(len(kappa_grid) - 1))
    print(f"sup distances: {[format(v, '.3e') for v in report.sup_distance]}")
    print(f"fitted |zeta| slope = {report.fitted_zeta_slope:.4f}")
    ok = decreasing and (spec.N == 0 or abs(report.fitted_zeta_slope + 0.5) <= 0.1)
    return EXIT_OK if ok else EXIT_BOUND_FAILURE


def _cmd_smallkappa(cfg: RunConfig, outdir: Path) -> int:
    if cfg.system is None:
        raise ConfigError(["config.system: required for small-kappa"])
    exp = cfg.experiment
    missing = _require(exp, ["theta_grid", "a"])
    if missing:
        raise ConfigError(missing)
    result = experiments.smallkappa_scaling_study(
        cfg.system,
        [float(t) for t in exp["theta_grid"]],
        float(exp["a"]),
        horizon_rule=exp.get("horizon_rule", "fixed"),
        horizon=float(exp.get("horizon", cfg.numeric["horizon"])),
        N_values=[cfg.system.N],
        n_phases=int(exp.get("phases", 8)),
        seed=cfg.seed,
        workers=cfg.workers,
        T_max=cfg.numeric["T_max"],
        dt=cfg.numeric["dt"],
    )
    experiments.write_drift_csv(result.reports, outdir / "smallkappa.csv")
    experiments.write_json_summary(
        {"fitted_drift_slope": result.fitted_drift_slope,
         "n_uniformity": {format(k, ".6g"): v for k, v in result.n_uniformity.items()},
         "all_bounds_passed": result.all_bounds_passed,
         "constants": result.constants},
        outdir / "smallkappa.json")
    print(f"fitted drift slope = {result.fitted_drift_slope:.3f}")
    print(f"all bounds passed: {result.all_bounds_passed}")
    return EXIT_OK if result.all_bounds_passed else EXIT_BOUND_FAILURE


def _cmd_variant(cfg: RunConfig, outdir: Path) -> int:
    if cfg.system is None:
        raise ConfigError(["config.system: required for variant"])
    exp = cfg.experiment
    missing = _require(exp, ["theta", "a", "kappa_grid"])
    if missing:
        raise ConfigError(missing)
    reports = experiments.variant_scaling_study(
        cfg.system, float(exp["theta"]), float(exp["a"]),
        [float(k) for k in exp["kappa_grid"]],
        horizon=float(exp.get("horizon", cfg.numeric["horizon"])),
        n_phases=int(exp.get("phases", 8)),
        seed=cfg.seed, workers=cfg.workers, dt=cfg.numeric["dt"],
    )
    experiments.write_drift_csv(reports, outdir / "variant.csv")
    ok = all(r.bound_passed for r in reports)
    print(f"all bounds passed: {ok}")
    return EXIT_OK if ok else EXIT_BOUND_FAILURE


def _cmd_check(cfg: RunConfig, outdir: Path) -> int:
    exp = cfg.experiment
    lemma = exp.get("lemma")
    if lemma is None:
        raise ConfigError(["config.experiment.lemma: missing required field"])
    if "from_recipe" in exp:
        spec_args = exp["from_recipe"]
        theta = float(spec_args["theta"])
        a = float(spec_args["a"])
        n = int(spec_args.get("n", 2))
        normA = float(spec_args.get("normA", 1.0))
        M = float(spec_args.get("M", 1.0))
        C_Lambda = float(spec_args.get("C_Lambda", 1.0))
        C0 = float(spec_args.get("C0", 1.0))
        tau = float(spec_args.get("tau", 4 * math.pi * theta ** (-a * (n - 1))))
        rec = parameter_recipe(theta, a, n, normA, C0, M, C_Lambda, tau)
        inputs = normalform.recipe_condition_inputs(rec, normA, M, C_Lambda)
        inputs.update(exp.get("inputs", {}))
        report = check_conditions(lemma, inputs)
        report.extras["theta0"] = theta_threshold(a, n, normA, C0, M, C_Lambda,
                                                  lemma=lemma)
    else:
        inputs = exp.get("inputs", {})
        report = check_conditions(lemma, inputs)
    print(report)
    experiments.write_json_summary(report.to_json_dict(),
                                   outdir / "conditions.json")
    return EXIT_OK if report.all_passed else EXIT_BOUND_FAILURE


_COMMANDS = {
    "dirichlet": _cmd_dirichlet,
    "normal-form": _cmd_normal_form,
    "drift": _cmd_drift,
    "constrained": _cmd_constrained,
    "small-kappa": _cmd_smallkappa,
    "variant": _cmd_variant,
    "check-conditions": _cmd_check,
}


# ----------------------------------------------------------------------
# entry point
# ----------------------------------------------------------------------

def _setup_logging():
    level = os.environ.get("NEKLAB_LOG", "error").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO,
              "debug": logging.DEBUG}
    logging.basicConfig(
        level=levels.get(level, logging.ERROR),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="neklab",
        description="Averaging normal forms and action-stability experiments "
                    "for polynomial Hamiltonians with a transverse component.",
    )
    parser.add_argument("--config", type=str, default=None,
                        help="path to the JSON run configuration")
    parser.add_argument("--output", type=str, default=None,
                        help="output directory (overrides config)")
    parser.add_argument("--workers", type=int, default=None,
                        help="worker pool size (overrides config)")
    parser.add_argument("--seed", type=int, default=None,
                        help="RNG seed (overrides config)")
    parser.add_argument("command", choices=sorted(_COMMANDS),
                        help="subcommand to run")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.config is not None:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return EXIT_CONFIG_ERROR
    else:
        text = "{}"
    if not text.strip():
        print("error: empty config file", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    try:
        cfg = parse_config(text)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG_ERROR

    if args.output is not None:
        cfg.output_dir = args.output
    if args.workers is not None:
        cfg.workers = args.workers
    if args.seed is not None:
        cfg.seed = args.seed

    kind = cfg.experiment.get("kind")
    expected = _SUBCOMMAND_KIND[args.command]
    if kind is not None and kind != expected:
        print(f"error: config.experiment.kind = {kind!r} does not match "
              f"subcommand {args.command!r}", file=sys.stderr)
        return EXIT_CONFIG_ERROR

    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    started = time.time()
    try:
        code = _COMMANDS[args.command](cfg, outdir)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except (ValueError, PolynomialParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    meta = {
        "command": args.command,
        "seed": cfg.seed,
        "elapsed_seconds": time.time() - started,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "exit_code": code,
    }
    with open(outdir / "run_meta.json", "w") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
