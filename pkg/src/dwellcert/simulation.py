"""Empirical validation of certificates.

Switching signals with a prescribed average dwell-time come from a token
bucket: a switch spends one token, tokens refill at rate 1/tau_a up to a
burst capacity of N0, so every window (s, t) sees at most
N0 + (t - s)/tau_a switches by construction.  Trajectories are advanced
exactly, one matrix exponential per inter-switch segment, which keeps
integrator error out of the decay checks.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from dwellcert.certificate import CpaCertificate, evaluate_many
from dwellcert.systems import SwitchedLinearSystem
from dwellcert.triangulation import FanTriangulation

__all__ = [
    "SwitchingSignal", "Trajectory", "EmpiricalReport",
    "generate_adt_signal", "adt_inequality_holds", "integrate",
    "check_certificate_empirically", "suggest_horizon",
    "write_trajectory_csv",
]


@dataclass(frozen=True)
class SwitchingSignal:
    """Piecewise-constant, right-continuous mode selection: mode_seq[k] is
    active on [switch_times[k-1], switch_times[k])."""

    switch_times: np.ndarray    # ascending, inside (0, horizon)
    mode_seq: np.ndarray        # len(switch_times) + 1 entries
    N0: float
    tau_a: float
    horizon: float

    def __post_init__(self):
        st = self.switch_times
        if len(self.mode_seq) != len(st) + 1:
            raise ValueError("mode_seq must have one more entry than switches")
        if len(st) and (np.any(np.diff(st) <= 0) or st[0] <= 0
                        or st[-1] >= self.horizon):
            raise ValueError("switch times must ascend strictly inside "
                             "(0, horizon)")

    def mode_at(self, t: float) -> int:
        return int(self.mode_seq[np.searchsorted(self.switch_times, t,
                                                 side="right")])

    @property
    def num_switches(self) -> int:
        return len(self.switch_times)


def generate_adt_signal(seed: int, num_modes: int, tau_a: float,
                        N0: float, horizon: float,
                        proposal_rate: float | None = None) -> SwitchingSignal:
    """Pseudorandom signal satisfying the dwell-time budget by
    construction; deterministic per seed."""
    if not (tau_a > 0.0):
        raise ValueError("tau_a must be positive")
    if N0 < 1.0:
        raise ValueError("N0 must be at least 1")
    if horizon <= 0.0:
        raise ValueError("horizon must be positive")
    if num_modes < 1:
        raise ValueError("num_modes must be positive")
    rng = np.random.default_rng(seed)
    refill = 0.0 if math.isinf(tau_a) else 1.0 / tau_a
    if proposal_rate is None:
        proposal_rate = 3.0 * refill if refill > 0.0 else 2.0 / horizon

    tokens = float(N0)
    t = 0.0
    last = 0.0
    times: list[float] = []
    modes = [int(rng.integers(num_modes))]
    while True:
        t += rng.exponential(1.0 / proposal_rate)
        if t >= horizon:
            break
        tokens = min(float(N0), tokens + refill * (t - last))
        last = t
        if tokens >= 1.0:
            tokens -= 1.0
            times.append(t)
            if num_modes == 1:
                modes.append(modes[-1])
            else:
                step = int(rng.integers(1, num_modes))
                modes.append((modes[-1] + step) % num_modes)
    return SwitchingSignal(switch_times=np.array(times),
                           mode_seq=np.array(modes, dtype=np.int64),
                           N0=float(N0), tau_a=float(tau_a),
                           horizon=float(horizon))


def adt_inequality_holds(signal: SwitchingSignal, samples: int = 200,
                         seed: int = 0) -> bool:
    """Independent check of N(t,s) <= N0 + (t-s)/tau_a: counts switches
    with searchsorted over all switch-time pairs plus a random (s, t)
    sample.  Separate from the generator's token arithmetic."""
    st = signal.switch_times
    refill = 0.0 if math.isinf(signal.tau_a) else 1.0 / signal.tau_a

    # all ordered pairs of switch times, with the window nudged open so
    # the endpoint switches count
    eps = 1e-9
    if len(st):
        starts = np.concatenate([[0.0], st]) - eps
        ends = st + eps
        c_end = np.searchsorted(st, ends, side="left")
        c_start = np.searchsorted(st, starts, side="right")
        counts = c_end[:, None] - c_start[None, :]
        bound = signal.N0 + (ends[:, None] - starts[None, :]) * refill + 1e-12
        mask = ends[:, None] > starts[None, :]
        if np.any(counts[mask] > bound[mask]):
            return False
    rng = np.random.default_rng(seed)
    ss = rng.uniform(0.0, signal.horizon, samples)
    tt = rng.uniform(0.0, signal.horizon, samples)
    lo, hi_ = np.minimum(ss, tt), np.maximum(ss, tt)
    counts = (np.searchsorted(st, hi_, side="left")
              - np.searchsorted(st, lo, side="right"))
    return bool(np.all(counts <= signal.N0 + (hi_ - lo) * refill + 1e-12))


@dataclass
class Trajectory:
    sample_times: np.ndarray
    states: np.ndarray          # (T, n)
    modes: np.ndarray           # (T,) mode active at each sample
    signal: SwitchingSignal

    def final_state(self) -> np.ndarray:
        return self.states[-1]


def integrate(system: SwitchedLinearSystem, signal: SwitchingSignal,
              x0, sample_dt: float) -> Trajectory:
    """Exact piecewise propagation: within every inter-switch segment the
    state advances by matrix exponentials of A_i * dt; samples fall on
    multiples of sample_dt plus every switch time."""
    if sample_dt <= 0.0:
        raise ValueError("sample_dt must be positive")
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (system.n,):
        raise ValueError(f"x0 must have length {system.n}")
    if not np.all(np.isfinite(x0)):
        raise ValueError("x0 must be finite")

    grid = np.arange(0.0, signal.horizon + 0.5 * sample_dt, sample_dt)
    grid = grid[grid <= signal.horizon]
    times = np.unique(np.concatenate([grid, signal.switch_times,
                                      [signal.horizon]]))
    seg_of = np.searchsorted(signal.switch_times, times, side="right")

    mats = system.matrices
    step_cache: dict[tuple[int, float], np.ndarray] = {}

    def stepper(mode: int, dt: float) -> np.ndarray:
        key = (mode, round(dt, 15))
        if key not in step_cache:
            step_cache[key] = expm(mats[mode] * dt)
        return step_cache[key]

    states = np.empty((len(times), system.n))
    states[0] = x0
    x = x0
    for k in range(1, len(times)):
        dt = times[k] - times[k - 1]
        # mode active on [times[k-1], times[k]): the signal is
        # right-continuous, so it is the segment starting at times[k-1]
        mode = int(signal.mode_seq[seg_of[k - 1]])
        x = stepper(mode, dt) @ x
        if not np.all(np.isfinite(x)):
            raise FloatingPointError(
                f"state became non-finite at t = {times[k]:.6g}")
        states[k] = x
    modes = signal.mode_seq[seg_of]
    return Trajectory(sample_times=times, states=states,
                      modes=modes.astype(np.int64), signal=signal)


@dataclass
class EmpiricalReport:
    decay_ok: bool
    jumps_ok: bool
    converged: bool
    worst_decay_excess: float
    worst_jump_excess: float
    final_ratio: float

    @property
    def passed(self) -> bool:
        return self.decay_ok and self.jumps_ok and self.converged


def suggest_horizon(cert: CpaCertificate, signal_tau: float,
                    shrink: float = 1e-3, margin: float = 1.5) -> float:
    """Horizon long enough for the certified envelope to shrink the state
    norm by the requested factor (heuristic; the envelope includes the
    N0-burst and the a_upper'/a_lower sandwich overhead)."""
    p = cert.params
    rate = cert.alpha / p.a_upper
    if math.isfinite(signal_tau) and signal_tau > 0.0 and p.mu > 1.0:
        rate -= math.log(p.mu) / signal_tau
    if rate <= 0.0:
        raise ValueError("signal dwell-time is not above the certified bound")
    budget = (math.log(1.0 / shrink) + 2.0 * math.log(p.mu)
              + math.log(cert.a_upper_prime / p.a_lower))
    return margin * budget / rate


def check_certificate_empirically(cert: CpaCertificate,
                                  tri: FanTriangulation,
                                  system: SwitchedLinearSystem,
                                  signal: SwitchingSignal,
                                  x0,
                                  sample_dt: float = 0.5,
                                  require_faster_signal: bool = True
                                  ) -> EmpiricalReport:
    """Check what the certificate promises along one trajectory:

    (a) inside every segment with active mode i,
        V_i(x(t)) <= V_i(x(s)) * exp(-(alpha/a_upper)(t-s)) * (1 + 1e-6);
    (b) at every switch, V_next <= mu * V_prev * (1 + 1e-9);
    (c) the final norm is at most 1e-3 of the initial norm.
    """
    if require_faster_signal and not (signal.tau_a > cert.tau_a):
        raise ValueError("signal.tau_a must exceed the certified bound")
    traj = integrate(system, signal, x0, sample_dt)
    t = traj.sample_times
    X = traj.states
    modes = traj.modes
    rate = cert.alpha / cert.params.a_upper

    nz = np.linalg.norm(X, axis=1) > 0.0
    V = np.zeros((len(t), system.num_modes))
    for i in range(system.num_modes):
        V[nz, i] = evaluate_many(cert, tri, X[nz], i)

    # (a) within segments: consecutive samples share the mode
    same = modes[1:] == modes[:-1]
    act = modes[:-1]
    v_from = V[np.arange(len(t) - 1), act]
    v_to = V[1 + np.arange(len(t) - 1), act]
    envelope = v_from * np.exp(-rate * np.diff(t)) * (1.0 + 1e-6)
    excess = np.where(same & (v_from > 0),
                      v_to - envelope, -np.inf)
    worst_decay = float(excess.max(initial=-math.inf))
    decay_ok = worst_decay <= 0.0

    # (b) jumps: at a switch sample the mode changes between rows
    sw = np.nonzero(~same)[0]
    if len(sw):
        prev_m = modes[sw]
        next_m = modes[sw + 1]
        xs = X[sw + 1]
        v_prev = np.array([evaluate_many(cert, tri, xs[k][None, :],
                                         int(prev_m[k]))[0]
                           if np.any(xs[k]) else 0.0 for k in range(len(sw))])
        v_next = np.array([evaluate_many(cert, tri, xs[k][None, :],
                                         int(next_m[k]))[0]
                           if np.any(xs[k]) else 0.0 for k in range(len(sw))])
        jump_excess = v_next - cert.params.mu * v_prev * (1.0 + 1e-9)
        worst_jump = float(jump_excess.max())
        jumps_ok = worst_jump <= 0.0
    else:
        worst_jump = -math.inf
        jumps_ok = True

    x0n = float(np.linalg.norm(X[0]))
    final_ratio = float(np.linalg.norm(X[-1]) / x0n) if x0n else 0.0
    converged = final_ratio <= 1e-3

    return EmpiricalReport(decay_ok=decay_ok, jumps_ok=jumps_ok,
                           converged=converged,
                           worst_decay_excess=worst_decay,
                           worst_jump_excess=worst_jump,
                           final_ratio=final_ratio)


def write_trajectory_csv(traj: Trajectory, cert: CpaCertificate,
                         tri: FanTriangulation, path) -> None:
    """CSV export: t, mode, x1..xn, V_active."""
    n = traj.states.shape[1]
    nz = np.linalg.norm(traj.states, axis=1) > 0.0
    v = np.zeros(len(traj.sample_times))
    for i in np.unique(traj.modes):
        pick = nz & (traj.modes == i)
        if np.any(pick):
            v[pick] = evaluate_many(cert, tri, traj.states[pick], int(i))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "mode"] + [f"x{i+1}" for i in range(n)] + ["V_active"])
        for k in range(len(traj.sample_times)):
            w.writerow([repr(float(traj.sample_times[k])), int(traj.modes[k])]
                       + [repr(float(c)) for c in traj.states[k]]
                       + [repr(float(v[k]))])
