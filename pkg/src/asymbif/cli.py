"""Scenario-driven front end: run the full pipeline and emit reports.

``asymbif run scenario.json`` executes operator construction, hypothesis
checks, the certified reduction, the degree/Morse witnesses and branch
tracing, and writes ``<name>.report.json`` plus CSV files for the spectrum
and every branch.  Exit codes: 0 success, 2 when the Lipschitz-vs-gap
hypothesis fails (only the zero-exclusion scan runs in that case), 1 on
internal errors.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .continuation import Branch, ScanReport, trace_branch, zero_exclusion_scan
from .detection import landesman_lazer_f5, parity_and_morse, sign_condition_f6
from .errors import AsymbifError, ScenarioError
from .nonlinearity import HypothesisReport, hypothesis_report
from .operator import (
    Operator,
    build_schrodinger_1d,
    build_synthetic,
    EssentialSpectrum,
    gamma_value,
    spectral_split,
)
from .reduction import configure
from .scenario import Scenario, load_scenario
from .spaces import Grid

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_HYPOTHESIS = 2


@dataclass(frozen=True)
class RunReport:
    """Full pipeline outcome for one scenario."""

    scenario: dict[str, Any]
    hypotheses: dict[str, Any]
    reduction: dict[str, Any]
    witnesses: dict[str, Any] | None
    branches: list[dict[str, Any]]
    scan: dict[str, Any] | None
    verdict: str
    exit_code: int
    expectations_ok: bool | None
    expectation_mismatches: list[str]
    grid_doubling: dict[str, Any] | None
    wall_time_s: float

    def __post_init__(self) -> None:
        if self.verdict == "bifurcation-certified":
            assert self.witnesses is not None
            assert self.witnesses["verdict"] == "bifurcation-certified"
            assert any(b["verdict"]["status"] == "converged" for b in self.branches)

    def to_dict(self) -> dict[str, Any]:
        return {
            "scenario": self.scenario,
            "hypotheses": self.hypotheses,
            "reduction": self.reduction,
            "witnesses": self.witnesses,
            "branches": self.branches,
            "scan": self.scan,
            "verdict": self.verdict,
            "exit_code": self.exit_code,
            "expectations_ok": self.expectations_ok,
            "expectation_mismatches": self.expectation_mismatches,
            "grid_doubling": self.grid_doubling,
            "wall_time_s": self.wall_time_s,
        }


def _jsonable(obj):
    """Make numpy scalars/arrays and non-finite floats JSON safe."""
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if np.isfinite(x) else repr(x)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    return obj


def _build_operator(sc: Scenario) -> tuple[Operator, float]:
    """Construct the shifted operator; returns (operator, applied shift)."""
    if sc.operator_kind == "schrodinger1d":
        grid = Grid(sc.grid_spec["half_width"], sc.grid_spec["n_points"])
        if sc.lambda0 is None:
            probe_op = build_schrodinger_1d(grid, sc.potential, 0.0)
            idx = int(np.argmin(np.abs(probe_op.eigenvalues - sc.lambda0_probe)))
            shift = float(probe_op.eigenvalues[idx])
        else:
            shift = sc.lambda0
        return build_schrodinger_1d(grid, sc.potential, shift), shift
    vals = np.asarray(sc.eigenvalues, dtype=float)
    if sc.lambda0 is None:
        shift = float(vals[np.argmin(np.abs(vals - sc.lambda0_probe))])
    else:
        shift = sc.lambda0
    sigma = sc.essential_spectrum
    if sigma.kind == "interval":
        sigma = EssentialSpectrum.interval(sigma.edge - shift)
    elif sigma.kind == "finite":
        sigma = EssentialSpectrum.finite([v - shift for v in sigma.values])
    return build_synthetic(vals - shift, sigma), shift


def _hypotheses_dict(rep: HypothesisReport) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for key, flag in rep.flags().items():
        out[key] = {"status": flag.status, "witness": flag.witness}
    out["lip_estimate"] = rep.lip_estimate
    out["lip_is_declared"] = rep.lip_is_declared
    out["dist_condition"] = {
        "passed": rep.dist_condition.passed,
        "lip": rep.dist_condition.lip,
        "dist": rep.dist_condition.dist,
        "margin": rep.dist_condition.margin,
    }
    return out


def _branch_dict(branch: Branch, shift: float, direction_spec, csv_name: str | None) -> dict[str, Any]:
    return {
        "direction": direction_spec,
        "verdict": {
            "status": branch.verdict.status,
            "lambda_limit": None if branch.verdict.lambda_limit is None
            else branch.verdict.lambda_limit + shift,
            "rate_estimate": branch.verdict.rate_estimate,
            "detail": branch.verdict.detail,
        },
        "diagnostics": branch.diagnostics,
        "n_points": len(branch.points),
        "csv": csv_name,
        "points": [
            {
                "norm": p.norm,
                "lambda": p.lam + shift,
                "residual": p.residual,
                "newton_iterations": p.newton_iterations,
                "w_sup_norm": p.w_sup_norm,
            }
            for p in branch.points
        ],
        }


def _scan_dict(scan: ScanReport, shift: float) -> dict[str, Any]:
    return {
        "min_residual": scan.min_residual,
        "min_scaled_residual": scan.min_scaled_residual,
        "argmin_lambda": scan.argmin_lambda + shift,
        "argmin_norm": scan.argmin_norm,
        "lambda_window": [scan.lambda_window[0] + shift, scan.lambda_window[1] + shift],
        "norm_range": list(scan.norm_range),
        "n_lambda": scan.n_lambda,
        "n_norm": scan.n_norm,
        "method": scan.method,
        "floor": scan.floor,
        "passed": scan.passed,
        "note": scan.note,
    }


def run_scenario(
    path: str | Path,
    out_dir: str | Path | None = None,
    mode: str = "full",          # 'full' | 'check' | 'scan'
    grid_doubling: bool = False,
    seed: int = 0,
    json_only: bool = False,
) -> RunReport:
    """Execute one scenario file and write its report artifacts."""
    t_start = time.perf_counter()
    path = Path(path)
    sc = load_scenario(path)
    out = Path(out_dir) if out_dir is not None else path.parent
    out.mkdir(parents=True, exist_ok=True)

    op, shift = _build_operator(sc)
    hyp = hypothesis_report(sc.nonlinearity, op, 0.0)
    hyp_dict = _hypotheses_dict(hyp)
    lip = hyp.lip_estimate
    gamma = gamma_value(op, 0.0) if not op.essential_spectrum.is_empty else 0.0
    split = spectral_split(op, sc.band_halfwidth)
    ctx = configure(split, lip, sc.safety, allow_infeasible=True)
    reduction_dict = {
        "band_halfwidth": sc.band_halfwidth,
        "delta": ctx.lambda_halfwidth,
        "k": ctx.contraction_factor,
        "beta": ctx.lipschitz,
        "gamma": gamma,
        "w_inverse_bound": split.w_inverse_bound,
        "gap": split.gap,
        "dim_z": split.dim_z,
        "contraction_feasible": ctx.feasible,
        "min_z_norm": ctx.min_z_norm,
    }

    if not json_only:
        _write_spectrum_csv(out / f"{sc.name}.spectrum.csv", op, shift)

    hypothesis_failed = not hyp.dist_condition.passed
    witnesses_dict: dict[str, Any] | None = None
    branch_dicts: list[dict[str, Any]] = []
    scan_dict: dict[str, Any] | None = None

    if mode == "check":
        verdict = "hypothesis-failed" if hypothesis_failed else "hypotheses-pass"
    elif hypothesis_failed or mode == "scan":
        scan_report = _run_scan(sc, ctx, op)
        scan_dict = _scan_dict(scan_report, shift)
        if hypothesis_failed:
            verdict = "no-bifurcation-in-window" if scan_report.passed else "inconclusive"
        else:
            verdict = "scan-only"
    else:
        ll5 = landesman_lazer_f5(sc.nonlinearity, op.space, split.z_basis,
                                 sc.sphere_samples, seed)
        ll6 = sign_condition_f6(sc.nonlinearity, op.space, split.z_basis,
                                sc.sphere_samples, seed)
        witness = parity_and_morse(split, ctx.lambda_halfwidth, ll5, ll6)
        witnesses_dict = {
            "kernel_dim": witness.kernel_dim,
            "parity_jump": witness.parity_jump,
            "morse_plus": witness.morse_plus,
            "morse_minus": witness.morse_minus,
            "critical_groups_differ": witness.critical_groups_differ,
            "ll_f5": _ll_dict(witness.ll_f5),
            "ll_f6": _ll_dict(witness.ll_f6),
            "verdict": witness.verdict,
        }
        for i, dspec in enumerate(sc.directions):
            direction = _resolve_direction(split, dspec)
            branch = trace_branch(
                ctx, op, sc.nonlinearity, direction, sc.norm_schedule,
                lambda0=0.0, window=sc.window, slack=sc.slack, min_points=sc.min_points,
            )
            csv_name = None
            if not json_only:
                csv_name = f"{sc.name}.branch-{i}.csv"
                _write_branch_csv(out / csv_name, branch, shift)
            branch_dicts.append(_branch_dict(branch, shift, dspec, csv_name))
        any_converged = any(b["verdict"]["status"] == "converged" for b in branch_dicts)
        if witness.verdict == "bifurcation-certified" and any_converged:
            verdict = "bifurcation-certified"
        elif witness.verdict == "even-multiplicity-certified" and any_converged:
            verdict = "even-multiplicity-certified"
        elif witness.verdict == "no-witness":
            verdict = "no-witness"
        else:
            verdict = "inconclusive"

    doubling = None
    if grid_doubling and sc.operator_kind == "schrodinger1d":
        doubling = _grid_doubling(sc, shift, op)

    exit_code = EXIT_HYPOTHESIS if hypothesis_failed else EXIT_OK
    expectations_ok, mismatches = _check_expectations(sc, verdict, hyp, branch_dicts, scan_dict, mode)
    report = RunReport(
        scenario=sc.raw,
        hypotheses=hyp_dict,
        reduction=reduction_dict,
        witnesses=witnesses_dict,
        branches=branch_dicts,
        scan=scan_dict,
        verdict=verdict,
        exit_code=exit_code,
        expectations_ok=expectations_ok,
        expectation_mismatches=mismatches,
        grid_doubling=doubling,
        wall_time_s=time.perf_counter() - t_start,
    )
    (out / f"{sc.name}.report.json").write_text(report_json(report))
    return report


def report_json(report: RunReport) -> str:
    return json.dumps(_jsonable(report.to_dict()), indent=2, sort_keys=True) + "\n"


def _ll_dict(res) -> dict[str, Any]:
    return {
        "status": res.status,
        "extremal_integral": res.extremal_integral,
        "mode": res.mode,
        "n_samples": res.n_samples,
        "detail": res.detail,
    }


def _resolve_direction(split, dspec) -> np.ndarray:
    if isinstance(dspec, int):
        if dspec >= split.dim_z:
            raise ScenarioError(
                f"direction index {dspec} out of range for kernel band of dim {split.dim_z}"
            )
        return split.z_basis[:, dspec].copy()
    coeffs = np.asarray(dspec, dtype=float)
    if coeffs.size != split.dim_z:
        raise ScenarioError(
            f"direction coefficients need length {split.dim_z}, got {coeffs.size}"
        )
    vec = split.from_z_coords(coeffs)
    scale = np.sqrt(split.space.weight) * np.linalg.norm(vec)
    if scale == 0.0:
        raise ScenarioError("direction coefficients are all zero")
    return vec / scale


def _run_scan(sc: Scenario, ctx, op) -> ScanReport:
    cfg = sc.scan or {}
    half = float(cfg.get("lambda_halfwidth", min(0.25, ctx.lambda_halfwidth)))
    norm_range = tuple(cfg.get("norm_range", [10.0, 200.0]))
    density = (int(cfg.get("n_lambda", 17)), int(cfg.get("n_norm", 17)))
    floor = cfg.get("floor")
    return zero_exclusion_scan(
        ctx, op, sc.nonlinearity,
        lambda_window=(-half, half),
        norm_range=norm_range,
        grid_density=density,
        floor=floor,
    )


def _grid_doubling(sc: Scenario, shift: float, op) -> dict[str, Any]:
    grid2 = Grid(sc.grid_spec["half_width"], 2 * sc.grid_spec["n_points"])
    op2 = build_schrodinger_1d(grid2, sc.potential, shift)
    e1 = float(op.eigenvalues[np.argmin(np.abs(op.eigenvalues))])
    e2 = float(op2.eigenvalues[np.argmin(np.abs(op2.eigenvalues))])
    return {
        "n_points": [sc.grid_spec["n_points"], 2 * sc.grid_spec["n_points"]],
        "eigenvalue_coarse": e1 + shift,
        "eigenvalue_fine": e2 + shift,
        "eigenvalue_drift": abs(e2 - e1),
    }


def _check_expectations(
    sc: Scenario, verdict: str, hyp, branch_dicts, scan_dict, mode: str
) -> tuple[bool | None, list[str]]:
    exp = sc.expectations
    if not exp or mode == "check":
        return None, []
    mismatches = []
    if "verdict" in exp and exp["verdict"] != verdict:
        mismatches.append(f"verdict: expected {exp['verdict']!r}, got {verdict!r}")
    if "dist_condition" in exp and exp["dist_condition"] != hyp.dist_condition.passed:
        mismatches.append(
            f"dist_condition: expected {exp['dist_condition']}, got {hyp.dist_condition.passed}"
        )
    if "lambda_final" in exp:
        tol = exp.get("lambda_final_tol", 1e-6)
        finals = [
            b["points"][-1]["lambda"] for b in branch_dicts if b["points"]
        ]
        if not finals or all(abs(f - exp["lambda_final"]) > tol for f in finals):
            mismatches.append(
                f"lambda_final: expected {exp['lambda_final']} within {tol}, got {finals}"
            )
    if "scan_min_exceeds" in exp:
        if scan_dict is None or not scan_dict["min_residual"] > exp["scan_min_exceeds"]:
            got = None if scan_dict is None else scan_dict["min_residual"]
            mismatches.append(
                f"scan_min_exceeds: expected > {exp['scan_min_exceeds']}, got {got}"
            )
    return not mismatches, mismatches


def _write_spectrum_csv(path: Path, op, shift: float) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "eigenvalue", "eigenvalue_shifted"])
        for i, v in enumerate(op.eigenvalues):
            writer.writerow([i, repr(float(v) + shift), repr(float(v))])


def _write_branch_csv(path: Path, branch: Branch, shift: float) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["norm", "lambda", "residual", "newton_iterations", "w_sup_norm"])
        for p in branch.points:
            writer.writerow(
                [repr(float(p.norm)), repr(float(p.lam) + shift), repr(float(p.residual)),
                 p.newton_iterations, repr(float(p.w_sup_norm))]
            )


def _run_one(args_tuple) -> int:
    path, ns = args_tuple
    try:
        report = run_scenario(
            path,
            out_dir=ns.out,
            mode="check" if ns.check else ("scan" if ns.scan else "full"),
            grid_doubling=ns.grid_doubling,
            seed=ns.seed,
            json_only=ns.json_only,
        )
    except ScenarioError as exc:
        print(f"{path}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except AsymbifError as exc:
        print(f"{path}: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    print(f"{path}: verdict={report.verdict} exit={report.exit_code} "
          f"wall={report.wall_time_s:.2f}s")
    return report.exit_code


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="asymbif",
        description="Certify and trace bifurcation from infinity for "
                    "Schrodinger-type eigenvalue problems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run scenario files")
    run_p.add_argument("paths", nargs="+", help="scenario JSON files")
    group = run_p.add_mutually_exclusive_group()
    group.add_argument("--check", action="store_true", help="hypothesis checks only")
    group.add_argument("--scan", action="store_true", help="zero-exclusion scan only")
    run_p.add_argument("--grid-doubling", action="store_true",
                       help="rerun with doubled point count and report eigenvalue drift")
    run_p.add_argument("--jobs", type=int, default=1, help="scenario files run in parallel")
    run_p.add_argument("--seed", type=int, default=0, help="sampling seed")
    run_p.add_argument("--out", default=None, help="output directory")
    run_p.add_argument("--json-only", action="store_true", help="suppress CSV outputs")
    ns = parser.parse_args(argv)

    jobs = max(1, ns.jobs)
    tasks = [(p, ns) for p in ns.paths]
    if jobs == 1 or len(tasks) == 1:
        codes = [_run_one(t) for t in tasks]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            codes = list(pool.map(_run_one, tasks))
    return max(codes)


if __name__ == "__main__":
    sys.exit(main())
