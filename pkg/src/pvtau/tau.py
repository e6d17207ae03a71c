"""ln tau along trajectories: path independence, simple zeros, and the
relation between the tau-functions of the z and xi charts."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SystemState, miwa_residue, transform_xi, xi_half_residue, tr_B1_squared
from .deformation import BLOWUP, IntegratorConfig, PathSpec, Trajectory, integrate_path
from .errors import BlowUpOnPath, ChartSingular, FitFailed, InvalidPath, PreconditionError, WindingMismatch


@dataclass(frozen=True)
class TauSample:
    t: complex
    ln_tau: complex


@dataclass(frozen=True)
class ZeroCertificate:
    t_star: complex
    c: complex
    slope: complex
    residual: float
    n_samples: int

    def to_dict(self):
        return {
            "t_star": [self.t_star.real, self.t_star.imag],
            "c": [self.c.real, self.c.imag],
            "slope": [self.slope.real, self.slope.imag],
            "residual": self.residual,
            "n_samples": self.n_samples,
        }


def tau_samples(traj: Trajectory) -> list[TauSample]:
    return [TauSample(complex(t), complex(l)) for t, l in zip(traj.t, traj.ln_tau)]


def continuous_log(z) -> np.ndarray:
    """log of a sequence of nonzero complex numbers with the imaginary part
    unwrapped along the sequence (principal branch at the first element)."""
    z = np.asarray(z, dtype=complex)
    return np.log(np.abs(z)) + 1j * np.unwrap(np.angle(z))


def path_independence_check(
    state0: SystemState, pathA: PathSpec, pathB: PathSpec, cfg: IntegratorConfig = IntegratorConfig()
) -> float:
    """|ln tau_A - ln tau_B| at the common endpoint of two homotopic paths."""
    if pathA.start != pathB.start or pathA.end != pathB.end:
        raise InvalidPath("paths must share both endpoints")
    # same endpoints: arg changes differ by a multiple of 2 pi
    if abs(pathA.arg_change() - pathB.arg_change()) > np.pi:
        raise WindingMismatch(
            f"winding {pathA.winding():.3f} vs {pathB.winding():.3f}: the paths end on different sheets"
        )
    if pathA == pathB:
        return 0.0
    ends = []
    for p in (pathA, pathB):
        tr = integrate_path(state0, p, cfg)
        if tr.status == BLOWUP:
            raise BlowUpOnPath(f"blow-up near t={tr.event.t_star} on path {p.waypoints}")
        ends.append(tr.ln_tau[-1])
    return float(abs(ends[0] - ends[1]))


def simple_zero_fit(traj: Trajectory, t_star, span: float = 20.0, min_samples: int = 5, tol: float = 0.05) -> ZeroCertificate:
    """Fit ``ln tau = ln c + k ln(t - t*)`` near the end of a blown-up run.

    Uses the samples within ``span`` times the final distance to ``t*``.  A
    simple zero has k = 1; ``|k - 1| > tol`` raises :class:`FitFailed`.
    """
    if traj.status != BLOWUP:
        raise PreconditionError("trajectory did not end in a blow-up")
    t_star = complex(t_star)
    dist = np.abs(traj.t - t_star)
    start = len(traj) - 1
    while start > 0 and dist[start - 1] <= span * dist[-1]:
        start -= 1
    idx = np.arange(min(start, len(traj) - min_samples), len(traj))
    if len(idx) < 2:
        raise FitFailed("not enough samples near the zero")
    L = continuous_log(traj.t[idx] - t_star)
    M = np.stack([np.ones_like(L), L], axis=1)
    coef, *_ = np.linalg.lstsq(M, traj.ln_tau[idx], rcond=None)
    ln_c, k = coef
    resid = float(np.sqrt(np.mean(np.abs(M @ coef - traj.ln_tau[idx]) ** 2)))
    cert = ZeroCertificate(t_star, complex(np.exp(ln_c)), complex(k), resid, len(idx))
    if abs(k - 1) > tol:
        raise FitFailed(f"log-slope {complex(k):.4g} is not 1: the zero is not simple (or t* is off)")
    return cert


def coordinate_relation_check(state: SystemState) -> float:
    """Pointwise form of the chart relation between d ln tau~ and d ln tau.

    Returns ``|(-s**2 * h_xi - tr(B1**2)/(t + 1)) - miwa_residue|`` where
    ``h_xi`` is half the residue of tr B~**2 at xi = s.
    """
    t = state.t
    if t == -1:
        raise ChartSingular("t = -1")
    ts = transform_xi(state)
    lhs = -ts.s * ts.s * xi_half_residue(ts) - tr_B1_squared(state) / (t + 1)
    return abs(complex(lhs - miwa_residue(state)))


def xi_chart_ln_tau(traj: Trajectory) -> np.ndarray:
    """ln tau~(s(t)) = ln tau(t) + (theta1**2/2) ln(t + 1), with ln(t + 1)
    continued along the trajectory from its principal value at the start.

    Normalised so that the value at the start is the principal
    ``(theta1**2/2) Log(t0 + 1)``.
    """
    w = traj.t + 1
    if np.any(w == 0):
        raise ChartSingular("trajectory passes through t = -1")
    th1 = traj.theta.theta1
    return traj.ln_tau + th1 * th1 / 2 * continuous_log(w)


def drive_to_theta_point(
    state0: SystemState,
    path: PathSpec,
    cfg: IntegratorConfig = IntegratorConfig(),
    iterations: int = 3,
    overshoot: float = 0.2,
) -> Trajectory:
    """Integrate along ``path``; while the run completes, re-aim its last
    segment at the Theta point estimated from the largest d ln tau seen.

    Returns the last trajectory, blown up or not.  Re-aiming stops when
    |d ln tau| has no interior maximum or the pole fit fails.  The last leg is extended
    ``overshoot`` beyond the estimate so the run cannot stop short of it.
    """
    from .deformation import estimate_nearby_pole

    traj = integrate_path(state0, path, cfg)
    for _ in range(iterations):
        if traj.status == BLOWUP:
            break
        peak = int(np.argmax(np.abs(traj.dlntau())))
        if peak in (0, len(traj) - 1):
            break  # no local maximum of |d ln tau|: nothing to aim at
        try:
            t_star = estimate_nearby_pole(traj).t_star
        except FitFailed:
            break
        origin = path.waypoints[-2] if len(path.waypoints) > 1 else path.start
        d = (t_star - origin) / abs(t_star - origin)
        path = PathSpec(list(path.waypoints[:-1]) + [t_star + overshoot * d])
        traj = integrate_path(state0, path, cfg)
    return traj
