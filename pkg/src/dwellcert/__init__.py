"""Certified lower bounds on the average dwell-time of switched linear
systems, computed by fitting one continuous piecewise-affine Lyapunov
function per mode on a fan triangulation and solving a linear program."""

from dwellcert.triangulation import FanTriangulation, build_fan, radial_map
from dwellcert.systems import SwitchedLinearSystem, DwellParams, load_system, bundled_system
from dwellcert.lp_model import LinearProgram, VariableMap, assemble, row_count
from dwellcert.solver import SolverConfig, Solution, solve, check_solution
from dwellcert.certificate import (
    CpaCertificate,
    NoCertificateError,
    VerificationReport,
    extract,
    evaluate,
    gradient,
    verify,
)
from dwellcert.sweep import SweepPoint, SweepResult, sweep, refine
from dwellcert.simulation import (
    SwitchingSignal,
    Trajectory,
    generate_adt_signal,
    integrate,
    check_certificate_empirically,
)

__version__ = "0.1.0"

__all__ = [
    "FanTriangulation", "build_fan", "radial_map",
    "SwitchedLinearSystem", "DwellParams", "load_system", "bundled_system",
    "LinearProgram", "VariableMap", "assemble", "row_count",
    "SolverConfig", "Solution", "solve", "check_solution",
    "CpaCertificate", "NoCertificateError", "VerificationReport",
    "extract", "evaluate", "gradient", "verify",
    "SweepPoint", "SweepResult", "sweep", "refine",
    "SwitchingSignal", "Trajectory", "generate_adt_signal", "integrate",
    "check_certificate_empirically",
]
