"""Command-line interface: ``armastat {analyze,laurent,simulate,coprime,causal} MODEL``.

Exit codes: 0 = solution exists (or pair coprime / causal solution exists),
2 = it does not (or not applicable), 3 = boundary-uncertain verdict,
1 = input or numerical error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from importlib import resources

import jsonschema
import numpy as np

from .arma1q import Arma1qModel, check_existence_1q
from .armapq import ArmapqModel, build_Qtilde, check_causal, check_existence_pq, check_weak, gcld_summary
from .jordan import JordanError
from .noise import Component, NoiseModel, NoiseModelError
from .rational import AliasingError, NotRemovableError, laurent_coeffs
from .report import NOT_APPLICABLE, StationarityReport, Tolerances
from .sim import SimConfig, residual_check, simulate_path

EXIT_OK, EXIT_ERROR, EXIT_NO, EXIT_UNCERTAIN = 0, 1, 2, 3


class ModelFileError(ValueError):
    pass


def _schema() -> dict:
    return json.loads(resources.files("armastat").joinpath("model.schema.json").read_text())


def _scalar(x) -> complex:
    return complex(x[0], x[1]) if isinstance(x, list) else complex(x)


def _matrix(rows, shape, what) -> np.ndarray:
    A = np.array([[_scalar(x) for x in row] for row in rows], dtype=complex)
    if A.shape != shape:
        raise ModelFileError(f"{what} has shape {A.shape}, expected {shape}")
    return A


def load_model(path: str):
    """Parse and validate a model file; returns (ArmapqModel, Tolerances)."""
    with open(path) as fh:
        doc = json.load(fh)
    try:
        jsonschema.validate(doc, _schema())
    except jsonschema.ValidationError as exc:
        raise ModelFileError(f"schema violation at {list(exc.absolute_path)}: {exc.message}") from None
    m, d, p, q = doc["m"], doc["d"], doc["p"], doc["q"]
    if len(doc["psi"]) != p:
        raise ModelFileError(f"psi holds {len(doc['psi'])} matrices, expected p={p}")
    if len(doc["theta"]) != q + 1:
        raise ModelFileError(f"theta holds {len(doc['theta'])} matrices, expected q+1={q + 1}")
    psis = [_matrix(X, (m, m), f"psi[{k}]") for k, X in enumerate(doc["psi"])]
    thetas = [_matrix(X, (m, d), f"theta[{k}]") for k, X in enumerate(doc["theta"])]
    spec = doc.get("noise", {})
    L = _matrix(spec["L"], (d, len(spec["L"][0])), "noise.L") if "L" in spec else np.eye(d, dtype=complex)
    if L.shape[0] != d:
        raise ModelFileError(f"noise.L must have {d} rows")
    c = np.array([_scalar(x) for x in spec.get("c", [0.0] * d)], dtype=complex)
    comps = spec.get("components")
    if comps is not None:
        comps = [Component(x["family"], dict(x.get("params", {})), x.get("finite_log_moment"), x.get("finite_variance"))
                 for x in comps]
    noise = NoiseModel(L, c, comps)
    tol = Tolerances(**doc.get("tolerances", {}))
    return ArmapqModel(psis, thetas, noise), tol


def _atomic_write(path: str, text: str) -> None:
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".armastat-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _tolerances(args, base: Tolerances) -> Tolerances:
    return base.with_(circle=args.tol_circle, rank=args.tol_rank, poly_zero=args.tol_poly_zero)


def analyze(model: ArmapqModel, tol: Tolerances, order: str = "auto", window: int = 200) -> StationarityReport:
    """Run the selected analyzer and complete the weak and causal verdicts."""
    if order == "auto":
        order = "1q" if model.p == 1 else "pq"
    if order == "1q":
        if model.p != 1:
            raise ModelFileError("--order 1q requires p = 1")
        report = check_existence_1q(Arma1qModel(model.Psis[0], model.Thetas, model.noise), tol, window)
    else:
        report = check_existence_pq(model, tol, window)
    if model.noise.finite_variance:
        weak = check_weak(model, model.noise.mean(), model.noise.covariance(), tol, window)
        report.exists_weak = weak.exists
        if weak.exists != report.exists_strict and not report.boundary_uncertain:
            report.warnings.append("strict and weak verdicts disagree for finite-variance noise")
    else:
        report.exists_weak = NOT_APPLICABLE
    report.exists_causal = check_causal(model, tol)
    if report.exists_strict and report.solution is not None and model.noise.finite_variance:
        cfg = SimConfig(T=200, J=window, burn_guard=max(model.p + model.q, 1), seed=0)
        Y, Z = simulate_path(model, report.solution, cfg)
        report.diagnostics["simulation_residual"] = residual_check(model, Y, Z, cfg)
        report.diagnostics["simulation_config"] = {"T": cfg.T, "J": cfg.J, "burn_guard": cfg.burn_guard, "seed": cfg.seed}
    return report


def _summary(report: StationarityReport) -> str:
    v = report.to_dict()["verdicts"]
    lines = [
        f"order: {report.order}",
        f"exists_strict: {v['exists_strict']}",
        f"unique: {v['unique']}",
        f"exists_weak: {v['exists_weak']}",
        f"exists_causal: {v['exists_causal']}",
        f"boundary_uncertain: {v['boundary_uncertain']}",
        f"failing_condition: {report.failing_condition}",
        f"reason: {report.reason}",
    ]
    if report.alternative is not None:
        lines.append(f"alternative branch: {json.dumps(report.alternative)}")
    lines.extend(f"warning: {w}" for w in report.warnings)
    return "\n".join(lines)


def cmd_analyze(args) -> int:
    model, base = load_model(args.model)
    tol = _tolerances(args, base)
    report = analyze(model, tol, args.order, args.window)
    print(_summary(report))
    if args.json:
        _atomic_write(args.json, json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    return report.exit_code


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def cmd_laurent(args) -> int:
    model, base = load_model(args.model)
    tol = _tolerances(args, base)
    try:
        series = laurent_coeffs(model.P(), build_Qtilde(model, None, tol), args.jmin, args.jmax, tol.laurent, tol.circle)
    except NotRemovableError as exc:
        print(f"not removable: {exc}", file=sys.stderr)
        return EXIT_NO
    m, d = series.shape
    header = ["j", "norm"] + [f"{part}(M_{i + 1}{k + 1})" for i in range(m) for k in range(d) for part in ("re", "im")]
    rows = []
    for j, norm in zip(series.js, series.norms()):
        row = [str(int(j)), repr(float(norm))]
        for x in series[int(j)].ravel():
            row += [repr(float(x.real)), repr(float(x.imag))]
        rows.append(row)
    text = _csv_text(header, rows)
    if args.csv:
        _atomic_write(args.csv, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_simulate(args) -> int:
    model, base = load_model(args.model)
    tol = _tolerances(args, base)
    report = analyze(model, tol, "auto", args.J)
    if not report.exists_strict:
        print(f"no strictly stationary solution: {report.reason}", file=sys.stderr)
        return EXIT_NO
    burn = args.burn_guard if args.burn_guard is not None else max(model.p + model.q, 1)
    cfg = SimConfig(T=args.T, J=args.J, burn_guard=burn, seed=args.seed)
    Y, Z = simulate_path(model, report.solution, cfg)
    res = residual_check(model, Y, Z, cfg, relative=not model.noise.finite_variance)
    kind = "relative" if not model.noise.finite_variance else "absolute"
    print(f"max {kind} residual over t >= {burn}: {res:.3e}; truncation J={cfg.J}, "
          f"estimated tail mass {report.solution.tail:.3e}", file=sys.stderr)
    header = ["t"] + [f"{part}(Y_{i + 1})" for i in range(Y.shape[1]) for part in ("re", "im")]
    rows = [[str(t)] + [repr(float(getattr(y, part))) for y in Y[t] for part in ("real", "imag")] for t in range(Y.shape[0])]
    text = _csv_text(header, rows)
    if args.csv:
        _atomic_write(args.csv, text)
    else:
        sys.stdout.write(text)
    return EXIT_UNCERTAIN if report.boundary_uncertain else EXIT_OK


def cmd_coprime(args) -> int:
    model, base = load_model(args.model)
    info = gcld_summary(model, _tolerances(args, base))
    print(f"gcld determinant degree: {info['det_R_degree']}")
    print(f"left-coprime: {info['coprime']}")
    return EXIT_OK if info["coprime"] else EXIT_NO


def cmd_causal(args) -> int:
    model, base = load_model(args.model)
    verdict = check_causal(model, _tolerances(args, base))
    print(f"exists_causal: {verdict}")
    if verdict == NOT_APPLICABLE:
        print("P and Q~ are not left-coprime; the causal criterion does not apply", file=sys.stderr)
        return EXIT_NO
    return EXIT_OK if verdict else EXIT_NO


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("model", help="model JSON file")
    common.add_argument("--tol-circle", type=float, default=None, help="unit-circle band (default 1e-7)")
    common.add_argument("--tol-rank", type=float, default=None, help="relative rank cut for L")
    common.add_argument("--tol-poly-zero", type=float, default=None, help="relative zero test (default 1e-9)")

    parser = argparse.ArgumentParser(prog="armastat", description="Stationary solutions of multivariate ARMA equations.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="decide existence and uniqueness")
    p.add_argument("--order", choices=("auto", "1q", "pq"), default="auto")
    p.add_argument("--window", type=int, default=200, help="solution coefficient window |j| <= window")
    p.add_argument("--json", help="write the report here")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("laurent", parents=[common], help="export Laurent coefficients of M(z)")
    p.add_argument("--jmin", type=int, default=-10)
    p.add_argument("--jmax", type=int, default=10)
    p.add_argument("--csv", help="write CSV here instead of stdout")
    p.set_defaults(func=cmd_laurent)

    p = sub.add_parser("simulate", parents=[common], help="simulate the constructed solution")
    p.add_argument("--T", type=int, default=1000)
    p.add_argument("--J", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--burn-guard", type=int, default=None)
    p.add_argument("--csv", help="write CSV here instead of stdout")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("coprime", parents=[common], help="left-coprimeness of P and Q~")
    p.set_defaults(func=cmd_coprime)

    p = sub.add_parser("causal", parents=[common], help="causal solution verdict")
    p.set_defaults(func=cmd_causal)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, json.JSONDecodeError, ModelFileError, NoiseModelError, ValueError,
            np.linalg.LinAlgError, JordanError, AliasingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
