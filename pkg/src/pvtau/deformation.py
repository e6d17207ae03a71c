"""Deformation equations for (B0, B1) and their integration along paths.

Compatibility of dY/dz = A Y, A = B0/z + B1/(z - t) + E with
dY/dt = C Y, C = -B1/(z - t) gives

    dB0/dt = [B1, B0]/t,    dB1/dt = [E, B1] + [B0, B1]/t.

:func:`verify_zero_curvature` checks this identity pointwise in z.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import rk
from .core import SystemState, ThetaTriple, _E_like, eval_B, miwa_residue
from .errors import (
    FitFailed,
    InvalidPath,
    PathThroughOrigin,
    PoleEvaluation,
    PreconditionError,
    StepCollapse,
    ZeroBasePoint,
)

log = logging.getLogger(__name__)

COMPLETED = "completed"
BLOWUP = "blowup"


def _comm(a, b):
    return a @ b - b @ a


def deformation_rhs(state: SystemState):
    """Return ``(dB0/dt, dB1/dt)`` at ``state``."""
    t = state.t
    if t == 0:
        raise ZeroBasePoint("t must be nonzero")
    B0, B1 = state.B0, state.B1
    dB0 = _comm(B1, B0) / t
    dB1 = _comm(_E_like(B1), B1) + _comm(B0, B1) / t
    return dB0, dB1


def verify_zero_curvature(state: SystemState, zsamples, rhs=deformation_rhs) -> float:
    """Max Frobenius norm of ``dC/dz - dA/dt - [A, C]`` over ``zsamples``.

    ``dA/dt`` uses the entry derivatives supplied by ``rhs``.
    """
    t = state.t
    dB0, dB1 = rhs(state)
    worst = 0.0
    for z in zsamples:
        if z == 0 or z == t:
            raise PoleEvaluation(f"z={z!r} is a singular point")
        A = eval_B(state, z)
        Cm = -state.B1 / (z - t)
        dC_dz = state.B1 / (z - t) ** 2
        dA_dt = dB0 / z + dB1 / (z - t) + state.B1 / (z - t) ** 2
        R = dC_dz - dA_dt - _comm(A, Cm)
        worst = max(worst, float(np.linalg.norm(R.astype(complex))))
    return worst


@dataclass(frozen=True)
class PathSpec:
    """Piecewise-linear path in the punctured t-plane.

    The path itself selects the point of the universal cover: paths with the
    same endpoints but different total change of ``arg t`` end on different
    sheets.
    """

    waypoints: tuple

    def __init__(self, waypoints):
        wps = tuple(complex(w) for w in waypoints)
        object.__setattr__(self, "waypoints", wps)
        if not wps:
            raise InvalidPath("path needs at least one waypoint")
        for w in wps:
            if w == 0:
                raise PathThroughOrigin("waypoint at t = 0")
        for a, b in zip(wps, wps[1:]):
            if a == b:
                raise InvalidPath(f"repeated consecutive waypoint {a}")
            if _segment_distance_to_origin(a, b) <= 1e-12 * max(abs(a), abs(b)):
                raise PathThroughOrigin(f"segment {a} -> {b} passes through t = 0")

    @property
    def segments(self):
        return list(zip(self.waypoints, self.waypoints[1:]))

    @property
    def lengths(self) -> np.ndarray:
        return np.array([abs(b - a) for a, b in self.segments])

    @property
    def length(self) -> float:
        return float(self.lengths.sum())

    @property
    def start(self) -> complex:
        return self.waypoints[0]

    @property
    def end(self) -> complex:
        return self.waypoints[-1]

    def arg_change(self) -> float:
        """Total continuous change of arg t along the path."""
        return float(sum(np.angle(b / a) for a, b in self.segments))

    def winding(self) -> float:
        return self.arg_change() / (2 * np.pi)


def _segment_distance_to_origin(a: complex, b: complex) -> float:
    d = b - a
    lam = np.clip(-(a.conjugate() * d).real / abs(d) ** 2, 0.0, 1.0)
    return abs(a + lam * d)


@dataclass(frozen=True)
class IntegratorConfig:
    rtol: float = 1e-10
    atol: float = 1e-12
    max_step: float = 0.05
    min_step: float = 1e-13
    dense_spacing: Optional[float] = 1e-2
    blowup_threshold: float = 1e8

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("rtol and atol must be positive")
        if not self.min_step < self.max_step:
            raise ValueError("min_step must be smaller than max_step")


@dataclass(frozen=True)
class BlowUpEvent:
    t_star: complex
    indicator: float
    min_step: float
    t_stop: complex


@dataclass(eq=False)
class Trajectory:
    """Samples of ``(t, B0, B1, ln tau)`` at every accepted step.

    ``arclen`` is measured along the path from its start; ``ln_tau`` is zero
    at the start and continuous along the path.
    """

    path: PathSpec
    theta: ThetaTriple
    arclen: np.ndarray
    t: np.ndarray
    B0: np.ndarray
    B1: np.ndarray
    ln_tau: np.ndarray
    status: str = COMPLETED
    event: Optional[BlowUpEvent] = None
    steps: list = field(default_factory=list)

    def __len__(self):
        return len(self.t)

    def state(self, i: int) -> SystemState:
        return SystemState(t=complex(self.t[i]), B0=self.B0[i], B1=self.B1[i], theta=self.theta)

    def states(self):
        return [self.state(i) for i in range(len(self))]

    @property
    def final(self) -> SystemState:
        return self.state(-1)

    def entries(self) -> np.ndarray:
        """All eight matrix entries per sample, shape ``(n, 8)``."""
        return np.concatenate([self.B0.reshape(-1, 4), self.B1.reshape(-1, 4)], axis=1)

    def dlntau(self) -> np.ndarray:
        return np.array([miwa_residue(s) for s in self.states()])


def _pack(state: SystemState, ln_tau=0.0) -> np.ndarray:
    return np.concatenate([state.B0.astype(complex).ravel(), state.B1.astype(complex).ravel(), [ln_tau]])


def _dominant_reciprocal_extrapolation(ts, xs):
    """Zero of the line through the last two points of ``1/x`` against t."""
    r0, r1 = 1 / xs[-2], 1 / xs[-1]
    if r1 == r0:
        return ts[-1]
    return ts[-1] - r1 * (ts[-1] - ts[-2]) / (r1 - r0)


def integrate_path(
    state0: SystemState,
    path: PathSpec,
    cfg: IntegratorConfig = IntegratorConfig(),
    rhs: Callable = deformation_rhs,
) -> Trajectory:
    """Integrate the deformation equations and ln tau along ``path``.

    ``d ln tau = miwa_residue dt`` is carried as a ninth component, so the
    quadrature has the integrator's order and step sequence.  The run stops
    with status ``"blowup"`` when an entry exceeds ``cfg.blowup_threshold``,
    or when the step size underflows while the entries are still growing.
    """
    if abs(complex(state0.t) - path.start) > 1e-14 * max(1.0, abs(path.start)):
        raise InvalidPath(f"state0.t={state0.t} differs from path start {path.start}")
    theta = state0.theta
    y = _pack(state0)
    arclen, ts, ys, steps = [0.0], [path.start], [y], []
    s_offset = 0.0

    def make_fun(a, d):
        def fun(p, yv):
            t = a + p * d
            st = SystemState(t=t, B0=yv[:4].reshape(2, 2), B1=yv[4:8].reshape(2, 2), theta=theta)
            dB0, dB1 = rhs(st)
            dl = miwa_residue(st)
            return d * np.concatenate([dB0.ravel(), dB1.ravel(), [dl]])

        return fun

    def stop(p, yv):
        return float(np.max(np.abs(yv[:8]))) > cfg.blowup_threshold

    status, event = COMPLETED, None
    for (a, b), L in zip(path.segments, path.lengths):
        d = (b - a) / L
        try:
            sol = rk.solve(
                make_fun(a, d), 0.0, float(L), y,
                rtol=cfg.rtol, atol=cfg.atol, max_step=cfg.max_step, min_step=cfg.min_step,
                grid_spacing=cfg.dense_spacing, stop=stop,
            )
            stopped = sol.stopped
        except rk.StepSizeUnderflow as exc:
            sol = exc.partial
            norms = np.max(np.abs(np.concatenate([np.array(ys)[:, :8], sol.y[:, :8]])), axis=1)
            if not _genuine_growth(norms):
                raise StepCollapse(
                    f"step size fell below {cfg.min_step:g} near t={a + exc.p * d} without growth "
                    f"of the coefficients (max entry {norms[-1]:.3g})"
                ) from exc
            stopped = True
        seg_t = a + sol.p[1:] * d
        arclen.extend(s_offset + sol.p[1:])
        ts.extend(seg_t)
        ys.extend(sol.y[1:])
        steps.extend(sol.steps)
        y = sol.y[-1]
        s_offset += L
        if stopped:
            status = BLOWUP
            break

    Y = np.array(ys)
    traj = Trajectory(
        path=path, theta=theta, arclen=np.array(arclen), t=np.array(ts, dtype=complex),
        B0=Y[:, :4].reshape(-1, 2, 2), B1=Y[:, 4:8].reshape(-1, 2, 2), ln_tau=Y[:, 8],
        status=status, steps=steps,
    )
    if status == BLOWUP:
        traj.event = _blowup_event(traj)
        log.info("blow-up near t=%s", traj.event.t_star)
    return traj


def _genuine_growth(norms, lookback: int = 20, factor: float = 10.0) -> bool:
    """Whether the entries grew by ``factor`` over the last ``lookback`` steps."""
    if len(norms) < 2:
        return False
    ref = norms[max(0, len(norms) - 1 - lookback)]
    return norms[-1] > factor * ref


def _blowup_event(traj: Trajectory) -> BlowUpEvent:
    # entries have higher-order poles at Theta points; d ln tau has a simple one
    dl = traj.dlntau()
    t_star = _dominant_reciprocal_extrapolation(traj.t, dl)
    return BlowUpEvent(
        t_star=complex(t_star),
        indicator=float(np.max(np.abs(traj.entries()[-1]))),
        min_step=float(min(traj.steps)) if traj.steps else 0.0,
        t_stop=complex(traj.t[-1]),
    )


@dataclass(frozen=True)
class PoleFit:
    t_star: complex
    c: complex
    error: float
    residual: float
    entry: int


def fit_simple_pole(t, x, tol: float = 1e-4) -> PoleFit:
    """Least-squares fit of ``x ~ c/(t - t*)`` through the reciprocals.

    ``1/x = (t - t*)/c`` is linear in t for a simple pole; the relative RMS
    misfit of that line is the acceptance statistic.
    """
    t = np.asarray(t, dtype=complex)
    r = 1 / np.asarray(x, dtype=complex)

    def line(tt, rr):
        M = np.stack([np.ones_like(tt), tt], axis=1)
        coef, *_ = np.linalg.lstsq(M, rr, rcond=None)
        return coef, M @ coef

    (alpha, beta), rfit = line(t, r)
    if abs(beta) * np.ptp(np.abs(t - t[0])) <= 1e-12 * np.max(np.abs(r)):
        raise FitFailed("reciprocals do not vary; no pole")
    resid = float(np.sqrt(np.mean(np.abs(rfit - r) ** 2)) / np.sqrt(np.mean(np.abs(r) ** 2)))
    t_star = -alpha / beta
    half = max(2, len(t) // 2)
    (a2, b2), _ = line(t[-half:], r[-half:])
    err = abs(-a2 / b2 - t_star) if b2 != 0 else np.inf
    fit = PoleFit(t_star=complex(t_star), c=complex(1 / beta), error=float(err), residual=resid, entry=-1)
    if resid > tol:
        raise FitFailed(f"growth is not that of a simple pole (relative misfit {resid:.2e})")
    return fit


def _fit_quantity(traj: Trajectory, quantity: str, rows=slice(None)):
    if quantity == "dlntau":
        return np.array([miwa_residue(traj.state(i)) for i in range(len(traj))[rows]]), -1
    if quantity == "entry":
        ent = traj.entries()[rows]
        j = int(np.argmax(np.abs(ent[-1])))
        return ent[:, j], j
    raise ValueError(f"unknown quantity {quantity!r}")


def locate_theta_point(traj: Trajectory, k: int = 8, tol: float = 1e-4, quantity: str = "dlntau") -> PoleFit:
    """Refine the blow-up location from the last ``k`` samples of a run.

    ``quantity="dlntau"`` (default) fits the Miwa density, which has a simple
    pole at a simple zero of tau.  ``quantity="entry"`` fits the largest
    matrix entry instead; at the Theta points met in practice the entries
    carry double poles with nilpotent leading coefficient, so that mode
    reports :class:`FitFailed` there.
    """
    if traj.status != BLOWUP:
        raise PreconditionError("trajectory did not end in a blow-up")
    rows = slice(len(traj) - k, len(traj))
    x, j = _fit_quantity(traj, quantity, rows)
    fit = fit_simple_pole(traj.t[rows], x, tol=tol)
    return PoleFit(fit.t_star, fit.c, fit.error, fit.residual, entry=j)


def estimate_nearby_pole(traj: Trajectory, k: int = 9, tol: float = 1e-2) -> PoleFit:
    """Theta-point estimate from the samples where d ln tau peaks.

    Works on any run, including one that passes near a Theta point without
    hitting it; used to aim a follow-up path.
    """
    dl, _ = _fit_quantity(traj, "dlntau")
    i = int(np.argmax(np.abs(dl)))
    hi = min(len(traj), max(0, i - k // 2) + k)
    lo = max(0, hi - k)
    fit = fit_simple_pole(traj.t[lo:hi], dl[lo:hi], tol=tol)
    return PoleFit(fit.t_star, fit.c, fit.error, fit.residual, entry=-1)
