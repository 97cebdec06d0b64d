"""Stability certificates: per-mode piecewise-affine value functions on
the fan, the decay rate alpha, and the dwell-time bound they imply.

A certificate stores the vertex values V[x, i], the jump factor mu, the
scale bounds, and tau_a = a_upper * ln(mu) / alpha.  The bound is
infimal: exponential stability is guaranteed for every average
dwell-time strictly greater than tau_a (and for arbitrary switching when
mu = 1, where tau_a = 0).  verify() rechecks every condition with
arithmetic independent of the LP assembly and solver paths.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from dwellcert.lp_model import VariableMap
from dwellcert.solver import OPTIMAL, Solution
from dwellcert.systems import DwellParams, SwitchedLinearSystem
from dwellcert.triangulation import FanTriangulation, build_fan

__all__ = [
    "CpaCertificate", "NoCertificateError", "VerificationReport",
    "extract", "evaluate", "evaluate_many", "gradient", "verify",
    "save_certificate", "load_certificate",
]

FORMAT_VERSION = 1


class NoCertificateError(RuntimeError):
    """The LP solved but its decay rate is not positive: no certificate
    at this (mu, K)."""


@dataclass
class CpaCertificate:
    n: int
    K: int
    params: DwellParams
    system: SwitchedLinearSystem
    values: np.ndarray          # (S, N), vertex-id order, modes across
    alpha: float
    a_upper_prime: float
    tau_a: float

    def rebuild_triangulation(self) -> FanTriangulation:
        return build_fan(self.n, self.K)


@dataclass
class VerificationReport:
    passed: bool
    residuals: dict[str, float]
    offenders: list[tuple] = field(default_factory=list)
    verify_tol: float = 1e-8

    def summary(self) -> str:
        worst = ", ".join(f"{k}={v:.3e}" for k, v in self.residuals.items())
        state = "passed" if self.passed else "FAILED"
        return f"verification {state} (tol {self.verify_tol:g}): {worst}"


def extract(solution: Solution, tri: FanTriangulation,
            system: SwitchedLinearSystem, params: DwellParams) -> CpaCertificate:
    """Turn an optimal LP solution into a certificate.

    Raises NoCertificateError when the optimal decay rate is not
    positive (the LP is always feasible, so this is the no-certificate
    outcome, not an error of the pipeline).
    """
    if solution.status != OPTIMAL:
        raise ValueError(f"solution status is {solution.status}, not {OPTIMAL}")
    S = tri.num_boundary_vertices
    N = system.num_modes
    vmap = VariableMap(num_vertices=S, num_modes=N)
    alpha = float(solution.values[vmap.alpha_col])
    if alpha <= 0.0:
        raise NoCertificateError(
            f"optimal decay rate alpha = {alpha:.6g} is not positive "
            f"at mu = {params.mu:g}, K = {tri.K}")
    values = np.asarray(solution.values[1:], dtype=float).reshape(S, N).copy()

    radii = np.linalg.norm(tri.points[1:], axis=1)
    a_upper_prime = float((values / radii[:, None]).max())
    if params.mu == 1.0:
        tau_a = 0.0
    else:
        tau_a = params.a_upper * math.log(params.mu) / alpha
    return CpaCertificate(n=tri.n, K=tri.K, params=params, system=system,
                          values=values, alpha=alpha,
                          a_upper_prime=a_upper_prime, tau_a=tau_a)


def evaluate(cert: CpaCertificate, tri: FanTriangulation, x, mode: int) -> float:
    """Value of the mode's piecewise-affine function at x (0 at the
    origin; positively homogeneous of degree 1 elsewhere)."""
    x = np.asarray(x, dtype=float)
    if not np.any(x):
        return 0.0
    return float(evaluate_many(cert, tri, x[None, :], mode)[0])


def evaluate_many(cert: CpaCertificate, tri: FanTriangulation,
                  X: np.ndarray, mode: int) -> np.ndarray:
    """Vectorized evaluate for an array of nonzero points."""
    if not (0 <= mode < cert.system.num_modes):
        raise IndexError(f"mode index {mode} out of range")
    sid, lam = tri.locate_many(np.asarray(X, dtype=float))
    vid = tri.simplex_vertex_ids[sid]                   # (B, n)
    vals = cert.values[vid - 1, mode]                   # (B, n)
    return np.einsum("bi,bi->b", lam, vals)


def gradient(cert: CpaCertificate, tri: FanTriangulation,
             simplex: int, mode: int) -> np.ndarray:
    """Constant gradient row of the mode's function on one cone:
    v[cone, mode]^T X^-1."""
    s = tri.simplices[simplex]
    v = cert.values[np.array(s.vertex_ids) - 1, mode]
    return v @ s.X_inv


def verify(cert: CpaCertificate, tri: FanTriangulation,
           system: SwitchedLinearSystem,
           verify_tol: float = 1e-8) -> VerificationReport:
    """Independently recheck every certificate condition.

    Recomputes, with arithmetic separate from the LP path (fresh linear
    solves instead of the cached cone inverses):
      bounds   a_lower * r <= V[x, i] <= a_upper * r at every vertex;
      decay    v^T X^-1 A_i x_j <= -alpha ||x_j|| on every cone/vertex/mode;
      jumps    V[x, j] <= mu V[x, i] at every vertex, ordered pairs;
      rate     grad . A_i x_j <= -(alpha/a_upper) V_i(x_j) everywhere;
      scale    a_lower <= a_upper_prime <= a_upper.
    """
    if tri.n != cert.n or tri.K != cert.K:
        raise ValueError("triangulation does not match the certificate")
    if system.num_modes != cert.system.num_modes or system.n != cert.n:
        raise ValueError("system does not match the certificate")
    p = cert.params
    V = cert.values
    S, N = V.shape
    offenders: list[tuple] = []

    radii = np.linalg.norm(tri.points[1:], axis=1)
    lo_viol = (p.a_lower * radii[:, None] - V)
    hi_viol = (V - p.a_upper * radii[:, None])
    r_bounds = float(max(lo_viol.max(), hi_viol.max())
                     / max(1.0, p.a_upper * tri.K))
    for vtx, mode in zip(*np.nonzero((lo_viol > verify_tol)
                                     | (hi_viol > verify_tol))):
        offenders.append(("bounds", int(vtx) + 1, int(mode)))

    r_decay = -np.inf
    r_rate = -np.inf
    for s in tri.simplices:
        ids = np.array(s.vertex_ids)
        Vs = V[ids - 1]                                  # (n, N)
        rs = radii[ids - 1]
        for i, A in enumerate(system.matrices):
            AX = A @ s.X
            # grad row via a fresh solve, not the cached inverse
            g = np.linalg.solve(s.X.T, Vs[:, i])
            lhs = g @ AX                                 # (n,)
            dec = (lhs + cert.alpha * rs) / max(1.0, np.abs(AX).max())
            worst = float(dec.max())
            if worst > r_decay:
                r_decay = worst
            if np.any(dec > verify_tol):
                for j in np.nonzero(dec > verify_tol)[0]:
                    offenders.append(("decay", s.id, int(j), i))
            rate = (lhs + (cert.alpha / p.a_upper) * Vs[:, i]) \
                / max(1.0, np.abs(AX).max())
            worst = float(rate.max())
            if worst > r_rate:
                r_rate = worst
            if np.any(rate > verify_tol):
                for j in np.nonzero(rate > verify_tol)[0]:
                    offenders.append(("rate", s.id, int(j), i))

    if N > 1:
        jump = V[:, None, :] - p.mu * V[:, :, None]      # [x, i, j]
        jump[:, np.arange(N), np.arange(N)] = -np.inf
        r_jump = float(jump.max() / max(1.0, p.mu * p.a_upper * tri.K))
        for vtx, i, j in zip(*np.nonzero(jump > verify_tol)):
            offenders.append(("jump", int(vtx) + 1, int(i), int(j)))
    else:
        r_jump = 0.0

    aup = float((V / radii[:, None]).max())
    r_scale = max(p.a_lower - aup, aup - p.a_upper,
                  abs(aup - cert.a_upper_prime)) / max(1.0, p.a_upper)
    if r_scale > verify_tol:
        offenders.append(("scale", aup))

    residuals = {"bounds": r_bounds, "decay": r_decay, "jump": r_jump,
                 "rate": r_rate, "scale": r_scale}
    passed = all(v <= verify_tol for v in residuals.values())
    return VerificationReport(passed=passed, residuals=residuals,
                              offenders=offenders[:50], verify_tol=verify_tol)


def save_certificate(cert: CpaCertificate, path) -> None:
    """Write the certificate as JSON; floats are rendered in shortest
    round-trip form, so load_certificate restores them bit-exactly."""
    doc = {
        "format_version": FORMAT_VERSION,
        "n": cert.n,
        "K": cert.K,
        "a_lower": cert.params.a_lower,
        "a_upper": cert.params.a_upper,
        "mu": cert.params.mu,
        "d": cert.params.d,
        "modes": [{"name": name, "matrix": A.tolist()}
                  for name, A in cert.system.modes],
        "alpha": cert.alpha,
        "a_upper_prime": cert.a_upper_prime,
        "tau_a": cert.tau_a,
        "values": cert.values.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


class CertificateFormatError(ValueError):
    pass


def load_certificate(path) -> CpaCertificate:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CertificateFormatError(
            f"{path}: parse error at byte offset {exc.pos}: {exc.msg}") from None
    try:
        version = doc["format_version"]
        if version != FORMAT_VERSION:
            raise CertificateFormatError(
                f"{path}: unsupported format version {version}")
        n = int(doc["n"])
        K = int(doc["K"])
        params = DwellParams(a_lower=doc["a_lower"], a_upper=doc["a_upper"],
                             mu=doc["mu"], d=doc["d"])
        system = SwitchedLinearSystem(
            n=n, modes=tuple((m["name"], np.array(m["matrix"], dtype=float))
                             for m in doc["modes"]))
        values = np.array(doc["values"], dtype=float)
        cert = CpaCertificate(
            n=n, K=K, params=params, system=system, values=values,
            alpha=float(doc["alpha"]),
            a_upper_prime=float(doc["a_upper_prime"]),
            tau_a=float(doc["tau_a"]),
        )
    except KeyError as exc:
        raise CertificateFormatError(f"{path}: missing field {exc}") from None
    if values.ndim != 2 or values.shape[1] != system.num_modes:
        raise CertificateFormatError(f"{path}: values shape {values.shape} "
                                     f"does not match the mode count")
    return cert
