"""Numerical toolkit for bifurcation from infinity in asymptotically linear
Schrodinger-type eigenvalue problems L u = lam u + N(u).

The pipeline: build a selfadjoint surrogate operator with a declared
essential-spectrum surrogate, check the nonlinearity hypotheses, split off
the kernel band and certify the contraction of the reduction near infinity,
compute degree/Morse witnesses, then trace solution branches of increasing
norm and test whether their spectral parameters settle at the target.
"""

from importlib import resources as _resources

from .spaces import Grid, IndexSpace, inner, norm, one_norm, sup_norm
from .operator import (
    EssentialSpectrum,
    Operator,
    PotentialSpec,
    SpectralSplit,
    build_schrodinger_1d,
    build_synthetic,
    gamma_value,
    inverse_on_w,
    potential_catalog,
    sampled_potential,
    spectral_split,
)
from .nonlinearity import (
    HypothesisReport,
    Nonlinearity,
    catalog,
    eval_nemytskii,
    eval_psi,
    hadamard_ratio_diagnostic,
    hypothesis_report,
    lipschitz_constant,
)
from .reduction import (
    ReducedPoint,
    ReductionContext,
    configure,
    lipschitz_probe,
    reduced_map,
    reduced_value,
    solve_w,
    solve_w_newton,
)
from .detection import (
    DegreeReport,
    LandesmanLazerResult,
    WitnessReport,
    degree_at,
    landesman_lazer_f5,
    parity_and_morse,
    sample_kernel_sphere,
    sign_condition_f6,
)
from .continuation import (
    Branch,
    BranchPoint,
    ScanReport,
    Verdict,
    newton_constrained,
    trace_branch,
    verdict_of,
    zero_exclusion_scan,
)
from .scenario import Scenario, load_scenario, scenario_from_dict, SCENARIO_SCHEMA
from .cli import RunReport, run_scenario
from . import errors

__version__ = "0.1.0"


def shipped_scenario_path(name: str):
    """Filesystem path of a scenario JSON bundled with the package."""
    return _resources.files("asymbif").joinpath("scenarios", f"{name}.json")


def shipped_scenario_names() -> list[str]:
    base = _resources.files("asymbif").joinpath("scenarios")
    return sorted(p.name[:-5] for p in base.iterdir() if p.name.endswith(".json"))


__all__ = [
    "Grid", "IndexSpace", "inner", "norm", "one_norm", "sup_norm",
    "EssentialSpectrum", "Operator", "PotentialSpec", "SpectralSplit",
    "build_schrodinger_1d", "build_synthetic", "gamma_value", "inverse_on_w",
    "potential_catalog", "sampled_potential", "spectral_split",
    "HypothesisReport", "Nonlinearity", "catalog", "eval_nemytskii",
    "eval_psi", "hadamard_ratio_diagnostic", "hypothesis_report",
    "lipschitz_constant",
    "ReducedPoint", "ReductionContext", "configure", "lipschitz_probe",
    "reduced_map", "reduced_value", "solve_w", "solve_w_newton",
    "DegreeReport", "LandesmanLazerResult", "WitnessReport", "degree_at",
    "landesman_lazer_f5", "parity_and_morse", "sample_kernel_sphere",
    "sign_condition_f6",
    "Branch", "BranchPoint", "ScanReport", "Verdict", "newton_constrained",
    "trace_branch", "verdict_of", "zero_exclusion_scan",
    "Scenario", "load_scenario", "scenario_from_dict", "SCENARIO_SCHEMA",
    "RunReport", "run_scenario",
    "errors",
    "shipped_scenario_path", "shipped_scenario_names",
]
