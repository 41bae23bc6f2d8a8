"""Command-line front end.

Subcommands
-----------
spectrum      eigenvalues of a named network family (JSON)
msd-analytic  exact finite-n or limiting MSD curve (CSV)
msd-simulate  Monte Carlo MSD via the exact sampler (CSV)
fit-exponent  log-log exponent fit of an MSD CSV (JSON)
run           config-driven experiment: curve + fit + summary line
report        built-in validation matrix of exponent regimes

Config files are strict JSON (unknown keys rejected); all outputs embed
the config digest and tool version, and reruns with the same seed are
byte-identical.  Errors print machine-readable JSON on stderr: exit code
2 marks a configuration problem, 3 a numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import (
    DiracMeasure,
    MSDCurve,
    msd_finite,
    msd_limit,
    msd_limit_product,
)
from .errors import NumericFailureError, ResourceLimitError
from .estimate import default_windows, fit_exponent, log_growth_comparison
from .graph import (
    WeightedGraph,
    cartesian_product,
    circulant_chain,
    complete_graph,
    hypercube,
    repulsive_circulant,
    repulsive_weights,
    rouse_cycle,
)
from .model import (
    distinguished_model,
    random_coefficient_model,
    random_string_model,
    sou_model,
)
from .simulate import ensemble_msd
from .spectrum import (
    circulant_eigenvalues,
    circulant_shape,
    estimate_rho,
    graph_spectrum,
    linear_shape,
    power_law_spectrum,
    power_shape,
    rouse_shape,
    shape_sup_distance,
)

GRAPH_FAMILIES = ("rouse", "circulant", "repulsive", "complete", "hypercube", "product")
MODEL_FAMILIES = GRAPH_FAMILIES + ("power", "random-coeff", "random-string")
METHODS = ("analytic-finite", "analytic-limit", "monte-carlo")

_MODEL_KEYS = {
    "family", "n", "kappa", "kappas", "order", "n_dims", "of",
    "rho", "tau1", "dist", "coeff_seed", "sigma", "d",
}
_GRID_KEYS = {"kind", "t_min", "t_max", "n_points"}
_CONFIG_KEYS = {"model", "grid", "method", "n_paths", "seed", "window", "label"}


def _reject_unknown(doc: dict, allowed: set, where: str) -> None:
    unknown = set(doc) - allowed
    if unknown:
        raise ValueError(f"unknown {where} keys: {sorted(unknown)}")


def build_graph(spec: dict) -> WeightedGraph:
    family = spec.get("family")
    n = int(spec.get("n", 0))
    kappa = float(spec.get("kappa", 1.0))
    if family == "rouse":
        return rouse_cycle(n, kappa)
    if family == "circulant":
        return circulant_chain(n, [float(k) for k in spec["kappas"]])
    if family == "repulsive":
        return repulsive_circulant(n, int(spec["order"]))
    if family == "complete":
        return complete_graph(n, kappa)
    if family == "hypercube":
        return hypercube(int(spec["n_dims"]), kappa)
    if family == "product":
        parts = [p.strip() for p in str(spec["of"]).split(",")]
        if len(parts) != 2:
            raise ValueError("product needs exactly two factors, e.g. rouse:4,rouse:4")
        factors = []
        for part in parts:
            fam, _, size = part.partition(":")
            factors.append(build_graph({"family": fam, "n": int(size), "kappa": kappa}))
        return cartesian_product(*factors)
    raise ValueError(f"unknown graph family {family!r} (one of {GRAPH_FAMILIES})")


def build_model(spec: dict):
    if "lambdas" in spec or "coefficients" in spec:
        # serialized model document, as emitted by SOUModel.to_json
        from .model import SOUModel

        return SOUModel.from_json(json.dumps(spec))
    _reject_unknown(spec, _MODEL_KEYS, "model")
    family = spec.get("family")
    sigma = float(spec.get("sigma", 1.0))
    d = int(spec.get("d", 1))
    if family in GRAPH_FAMILIES:
        return distinguished_model(build_graph(spec), sigma=sigma, d=d)
    if family == "power":
        n = int(spec["n"])
        grid = power_law_spectrum(float(spec["rho"]), float(spec.get("tau1", 1.0)), n)
        c = sigma / np.sqrt(n)
        return sou_model(grid, np.full(n - 1, c), c0=c, sigma=sigma, d=d)
    if family == "random-coeff":
        n = int(spec["n"])
        base = circulant_eigenvalues(n, [float(spec.get("kappa", 1.0))])
        from .spectrum import consolidate

        return random_coefficient_model(
            consolidate(base),
            seed=int(spec.get("coeff_seed", 0)),
            dist=str(spec.get("dist", "uniform")),
            sigma=sigma,
            d=d,
        )
    if family == "random-string":
        return random_string_model(int(spec["n"]), float(spec.get("kappa", 1.0)), sigma, d)
    raise ValueError(f"unknown model family {family!r} (one of {MODEL_FAMILIES})")


def build_limit_curve(spec: dict, times: np.ndarray) -> MSDCurve:
    """Limiting MSD for families with a known limit object."""
    family = spec.get("family")
    kappa = float(spec.get("kappa", 1.0))
    if family == "rouse":
        return msd_limit(rouse_shape(kappa), times)
    if family == "circulant":
        return msd_limit(circulant_shape([float(k) for k in spec["kappas"]]), times)
    if family == "repulsive":
        weights = [kappa * w for w in repulsive_weights(int(spec["order"]))]
        return msd_limit(circulant_shape(weights), times)
    if family == "power":
        shape = power_shape(float(spec["rho"]), 1.0 / float(spec.get("tau1", 1.0)))
        return msd_limit(shape, times)
    if family == "complete":
        rate = int(spec["n"]) * kappa
        return msd_limit(linear_shape(1.0), times, measure=DiracMeasure(rate, 1.0))
    if family == "hypercube":
        rate = int(spec["n_dims"]) * kappa
        return msd_limit(linear_shape(1.0), times, measure=DiracMeasure(rate, 1.0))
    if family == "product":
        parts = [p.strip() for p in str(spec["of"]).split(",")]
        fams = {p.partition(":")[0] for p in parts}
        if fams != {"rouse"}:
            raise ValueError("limit curves for products support rouse factors only")
        return msd_limit_product(rouse_shape(kappa), len(parts), times)
    raise ValueError(f"no limiting curve for family {family!r}")


def build_grid(spec: dict) -> np.ndarray:
    _reject_unknown(spec, _GRID_KEYS, "grid")
    kind = spec.get("kind", "geometric")
    t_min = float(spec["t_min"])
    t_max = float(spec["t_max"])
    n_points = int(spec.get("n_points", 40))
    if not (0.0 < t_min < t_max) or n_points < 2:
        raise ValueError("grid needs 0 < t_min < t_max and n_points >= 2")
    if kind == "geometric":
        return np.geomspace(t_min, t_max, n_points)
    if kind == "linear":
        return np.linspace(t_min, t_max, n_points)
    raise ValueError(f"unknown grid kind {kind!r}")


def config_digest(config: dict) -> str:
    return hashlib.sha256(json.dumps(config, sort_keys=True).encode()).hexdigest()[:16]


def _provenance(config: dict) -> tuple[str, ...]:
    return (f"config_digest={config_digest(config)}", f"version={__version__}")


def run_experiment(config: dict) -> dict:
    """Execute a config: build the curve, fit the window, return artifacts."""
    _reject_unknown(config, _CONFIG_KEYS, "config")
    for key in ("model", "grid", "method"):
        if key not in config:
            raise ValueError(f"config is missing required key {key!r}")
    method = config["method"]
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    times = build_grid(config["grid"])
    model = None
    if method == "analytic-limit":
        curve = build_limit_curve(config["model"], times)
    else:
        model = build_model(config["model"])
        if method == "analytic-finite":
            curve = msd_finite(model, times)
        else:
            if "seed" not in config:
                raise ValueError("monte-carlo requires an explicit seed")
            n_paths = int(config.get("n_paths", 1000))
            curve = ensemble_msd(model, times, n_paths, int(config["seed"]))
    window_spec = config.get("window", "auto")
    if window_spec == "auto":
        if model is None:
            raise ValueError("window must be explicit [t_lo, t_hi] for analytic-limit")
        windows = default_windows(model)
        if windows.intermediate is None:
            raise ValueError("no intermediate window: " + "; ".join(windows.warnings))
        window = windows.intermediate
    else:
        lo, hi = window_spec
        window = (float(lo), float(hi))
    fit = fit_exponent(curve, window)
    return {"curve": curve, "fit": fit, "config": config}


def _write_run_outputs(result: dict, outdir: Path) -> str:
    outdir.mkdir(parents=True, exist_ok=True)
    config = result["config"]
    curve, fit = result["curve"], result["fit"]
    (outdir / "msd.csv").write_text(curve.to_csv(comments=_provenance(config)))
    fit_doc = json.loads(fit.to_json())
    fit_doc["config_digest"] = config_digest(config)
    fit_doc["version"] = __version__
    (outdir / "fit.json").write_text(json.dumps(fit_doc, sort_keys=True, indent=2) + "\n")
    family = config["model"].get("family", "?")
    return (
        f"family={family} method={config['method']} "
        f"nu={fit.nu:.4f}±{fit.stderr_nu:.4f}"
    )


# --- report: the built-in exponent validation matrix ---------------------


def _fit_limit(curve_times, curve, window, target, tol, name, predicted):
    fit = fit_exponent(curve, window)
    passed = abs(fit.nu - target) <= tol
    return {
        "name": name,
        "predicted": predicted,
        "measured": f"nu={fit.nu:.4f}",
        "tolerance": f"±{tol}",
        "passed": bool(passed),
    }


def report_rows(only: str | None = None) -> list[dict]:
    rows = []

    def want(name):
        return only is None or only in name

    if want("rouse"):
        t = np.geomspace(50.0, 2e4, 48)
        curve = msd_limit(rouse_shape(1.0), t)
        rows.append(_fit_limit(t, curve, (1e2, 1e4), 0.5, 0.02, "rouse", "nu=0.5"))
    for rho in (1.5, 2.0, 4.0):
        name = f"power-rho-{rho:g}"
        if not want(name):
            continue
        window = (1e4, 1e6)
        t = np.geomspace(window[0] / 2, window[1] * 2, 48)
        curve = msd_limit(power_shape(rho), t)
        nu = 1.0 - 1.0 / rho
        rows.append(_fit_limit(t, curve, window, nu, 0.02, name, f"nu={nu:.4g}"))
    if want("power-rho-0.5-bounded"):
        vals = msd_limit(power_shape(0.5), [1e4, 1e6]).values
        ratio = vals[1] / vals[0]
        rows.append(
            {
                "name": "power-rho-0.5-bounded",
                "predicted": "bounded (plateau)",
                "measured": f"msd(1e6)/msd(1e4)={ratio:.6f}",
                "tolerance": "< 1.05",
                "passed": bool(ratio < 1.05),
            }
        )
    for order, window in ((2, (1e4, 1e6)), (3, (1e4, 1e6))):
        name = f"repulsive-order-{order}"
        if not want(name):
            continue
        shape = circulant_shape(repulsive_weights(order))
        rho_hat, _ = estimate_rho(shape, (1e-4, 1e-2))
        t = np.geomspace(window[0] / 2, window[1] * 2, 48)
        curve = msd_limit(shape, t)
        fit = fit_exponent(curve, window)
        nu = 1.0 - 1.0 / (2 * order)
        passed = abs(fit.nu - nu) <= 0.02 and abs(rho_hat - 2 * order) <= 0.1
        rows.append(
            {
                "name": name,
                "predicted": f"rho={2 * order}, nu={nu:.4g}",
                "measured": f"rho={rho_hat:.3f}, nu={fit.nu:.4f}",
                "tolerance": "rho ±0.1, nu ±0.02",
                "passed": bool(passed),
            }
        )
    if want("torus-2d-log"):
        t = np.geomspace(1e3, 1e5, 12)
        curve = msd_limit_product(rouse_shape(1.0), 2, t)
        a_hat, b_hat = np.polyfit(np.log(t), curve.values, 1)
        resid = np.max(np.abs(curve.values / (a_hat * np.log(t) + b_hat) - 1.0))
        cmp = log_growth_comparison(curve)
        a_target = 1.0 / (8.0 * np.pi)
        passed = (
            abs(a_hat / a_target - 1.0) < 0.05
            and resid < 0.05
            and cmp["r2_log"] > cmp["r2_power_best"]
        )
        rows.append(
            {
                "name": "torus-2d-log",
                "predicted": f"msd ~ ln t / (8 pi) (coef {a_target:.5f})",
                "measured": f"coef={a_hat:.5f}, max fit dev={resid:.2e}",
                "tolerance": "coef ±5%, log beats all power laws",
                "passed": bool(passed),
            }
        )
    if want("torus-3d-bounded"):
        tau1 = 1.0 / 12.0
        vals = msd_limit_product(rouse_shape(1.0), 3, [1e4 * tau1, 1e6 * tau1]).values
        ratio = vals[1] / vals[0]
        rows.append(
            {
                "name": "torus-3d-bounded",
                "predicted": "bounded (plateau)",
                "measured": f"msd(1e6 tau1)/msd(1e4 tau1)={ratio:.6f}",
                "tolerance": "< 1.05",
                "passed": bool(ratio < 1.05),
            }
        )
    return rows


def _write_report(rows: list[dict], outdir: Path) -> int:
    outdir.mkdir(parents=True, exist_ok=True)
    lines = ["| family | predicted | measured | tolerance | pass |", "|---|---|---|---|---|"]
    csv_lines = ["family,predicted,measured,tolerance,pass"]
    failures = 0
    for row in rows:
        mark = "pass" if row["passed"] else "FAIL"
        failures += 0 if row["passed"] else 1
        lines.append(
            f"| {row['name']} | {row['predicted']} | {row['measured']} "
            f"| {row['tolerance']} | {mark} |"
        )
        csv_lines.append(
            ",".join(
                '"' + str(row[k]).replace('"', "'") + '"'
                for k in ("name", "predicted", "measured", "tolerance", "passed")
            )
        )
    (outdir / "report.md").write_text("\n".join(lines) + "\n")
    (outdir / "report.csv").write_text("\n".join(csv_lines) + "\n")
    for row in rows:
        status = "pass" if row["passed"] else "FAIL"
        print(f"{status}  {row['name']}: {row['measured']} (want {row['predicted']})")
    return failures


# --- argument parsing -----------------------------------------------------


def _add_graph_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", required=True, choices=MODEL_FAMILIES)
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--kappas", type=str, default=None, help="comma list, e.g. 1,0.5")
    p.add_argument("--order", type=int, default=None)
    p.add_argument("--n-dims", type=int, default=None)
    p.add_argument("--of", type=str, default=None, help="product factors, e.g. rouse:4,rouse:4")
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--tau1", type=float, default=1.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--dist", type=str, default="uniform")
    p.add_argument("--coeff-seed", type=int, default=0)


def _model_spec_from_args(args) -> dict:
    spec = {"family": args.family}
    if args.n:
        spec["n"] = args.n
    if args.kappa != 1.0:
        spec["kappa"] = args.kappa
    if args.kappas is not None:
        spec["kappas"] = [float(tok) for tok in args.kappas.split(",")]
    for key in ("order", "of", "rho"):
        val = getattr(args, key)
        if val is not None:
            spec[key] = val
    if args.n_dims is not None:
        spec["n_dims"] = args.n_dims
    if args.tau1 != 1.0:
        spec["tau1"] = args.tau1
    if args.sigma != 1.0:
        spec["sigma"] = args.sigma
    if args.d != 1:
        spec["d"] = args.d
    if args.family == "random-coeff":
        spec["dist"] = args.dist
        spec["coeff_seed"] = args.coeff_seed
    return spec


def _add_grid_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--t-min", type=float, required=True)
    p.add_argument("--t-max", type=float, required=True)
    p.add_argument("--n-points", type=int, default=40)
    p.add_argument("--grid", choices=("geometric", "linear"), default="geometric")


def _grid_spec_from_args(args) -> dict:
    return {
        "kind": args.grid,
        "t_min": args.t_min,
        "t_max": args.t_max,
        "n_points": args.n_points,
    }


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sumou", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_spec = sub.add_parser("spectrum", help="network eigenvalues as JSON")
    _add_graph_flags(p_spec)
    p_spec.add_argument("--shape-check", action="store_true",
                        help="report sup distance to the family's shape function")
    p_spec.add_argument("--out", type=Path, default=None)

    p_ana = sub.add_parser("msd-analytic", help="exact or limiting MSD curve as CSV")
    _add_graph_flags(p_ana)
    _add_grid_flags(p_ana)
    p_ana.add_argument("--method", choices=("analytic-finite", "analytic-limit"),
                       default="analytic-finite")
    p_ana.add_argument("--out", type=Path, default=None)

    p_sim = sub.add_parser("msd-simulate", help="Monte Carlo MSD curve as CSV")
    _add_graph_flags(p_sim)
    _add_grid_flags(p_sim)
    p_sim.add_argument("--n-paths", type=int, default=1000)
    p_sim.add_argument("--seed", type=int, required=True)
    p_sim.add_argument("--chunk-size", type=int, default=None)
    p_sim.add_argument("--out", type=Path, default=None)
    p_sim.add_argument("--paths-out", type=Path, default=None,
                       help="also dump raw paths as path_id,t,x CSV")

    p_fit = sub.add_parser("fit-exponent", help="fit an exponent to an MSD CSV")
    p_fit.add_argument("--csv", type=Path, required=True)
    p_fit.add_argument("--window", type=str, required=True, help="t_lo:t_hi")

    p_run = sub.add_parser("run", help="config-driven experiment")
    p_run.add_argument("--config", type=Path, required=True)
    p_run.add_argument("--outdir", type=Path, default=Path("."))

    p_rep = sub.add_parser("report", help="validation matrix of exponent regimes")
    p_rep.add_argument("--outdir", type=Path, default=Path("."))
    p_rep.add_argument("--only", type=str, default=None)
    p_rep.add_argument("--seed", type=int, default=0,
                       help="accepted for rerun determinism; the matrix is analytic")
    return parser


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        out.write_text(text if text.endswith("\n") else text + "\n")


def _cmd_spectrum(args) -> int:
    spec = _model_spec_from_args(args)
    family = spec["family"]
    if family == "power":
        spectrum = power_law_spectrum(spec["rho"], spec.get("tau1", 1.0), spec["n"])
    elif family in GRAPH_FAMILIES:
        spectrum = graph_spectrum(build_graph(spec))
    else:
        raise ValueError(f"spectrum works on graph families or power, not {family!r}")
    doc = json.loads(spectrum.to_json())
    if args.shape_check:
        if family == "rouse":
            lam = circulant_eigenvalues(spec["n"], [spec.get("kappa", 1.0)])
            shape = rouse_shape(spec.get("kappa", 1.0))
        elif family == "circulant":
            lam = circulant_eigenvalues(spec["n"], spec["kappas"])
            shape = circulant_shape(spec["kappas"])
        elif family == "repulsive":
            weights = repulsive_weights(spec["order"])
            lam = circulant_eigenvalues(spec["n"], weights)
            shape = circulant_shape(weights)
        elif family == "power":
            from .spectrum import power_law_eigenvalues

            lam = power_law_eigenvalues(spec["rho"], spec.get("tau1", 1.0), spec["n"])
            shape = power_shape(spec["rho"], 1.0 / spec.get("tau1", 1.0))
        else:
            raise ValueError(f"no reference shape for family {family!r}")
        doc["shape_sup_distance"] = shape_sup_distance(lam, shape)
    _emit(json.dumps(doc, sort_keys=True, indent=2), args.out)
    return 0


def _cmd_msd_analytic(args) -> int:
    spec = _model_spec_from_args(args)
    times = build_grid(_grid_spec_from_args(args))
    if args.method == "analytic-limit":
        curve = build_limit_curve(spec, times)
    else:
        curve = msd_finite(build_model(spec), times)
    config = {"model": spec, "grid": _grid_spec_from_args(args), "method": args.method}
    _emit(curve.to_csv(comments=_provenance(config)), args.out)
    return 0


def _cmd_msd_simulate(args) -> int:
    spec = _model_spec_from_args(args)
    times = build_grid(_grid_spec_from_args(args))
    model = build_model(spec)
    config = {
        "model": spec,
        "grid": _grid_spec_from_args(args),
        "method": "monte-carlo",
        "n_paths": args.n_paths,
        "seed": args.seed,
    }
    if args.paths_out is not None:
        from .simulate import sample_paths

        ensemble = sample_paths(model, times, args.n_paths, args.seed, args.chunk_size)
        args.paths_out.write_text(ensemble.to_csv(comments=_provenance(config)))
        from .estimate import msd_from_ensemble

        curve = msd_from_ensemble(ensemble)
    else:
        curve = ensemble_msd(model, times, args.n_paths, args.seed, args.chunk_size)
    _emit(curve.to_csv(comments=_provenance(config)), args.out)
    return 0


def _cmd_fit(args) -> int:
    curve = MSDCurve.from_csv(args.csv.read_text())
    lo, _, hi = args.window.partition(":")
    fit = fit_exponent(curve, (float(lo), float(hi)))
    _emit(fit.to_json(), None)
    return 0


def _cmd_run(args) -> int:
    config = json.loads(args.config.read_text())
    result = run_experiment(config)
    print(_write_run_outputs(result, args.outdir))
    return 0


def _cmd_report(args) -> int:
    rows = report_rows(args.only)
    if not rows:
        raise ValueError(f"--only {args.only!r} matched no report rows")
    failures = _write_report(rows, args.outdir)
    return 1 if failures else 0


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    handlers = {
        "spectrum": _cmd_spectrum,
        "msd-analytic": _cmd_msd_analytic,
        "msd-simulate": _cmd_msd_simulate,
        "fit-exponent": _cmd_fit,
        "run": _cmd_run,
        "report": _cmd_report,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, KeyError, OSError, ResourceLimitError) as exc:
        sys.stderr.write(json.dumps({"error": "invalid-argument", "message": str(exc)}) + "\n")
        return 2
    except NumericFailureError as exc:
        sys.stderr.write(json.dumps({"error": "numeric-failure", "message": str(exc)}) + "\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
