"""The Painleve V transcendent carried by the deformation."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import SystemState, ThetaTriple
from .deformation import Trajectory, deformation_rhs
from .errors import EquationSingular, StencilOutOfRange, UndefinedU, ZeroBasePoint

log = logging.getLogger(__name__)

_DENOM_EPS = 1e-14


@dataclass(frozen=True)
class PVParams:
    alpha: complex
    beta: complex
    gamma: complex
    delta: complex


@dataclass(frozen=True)
class PVSample:
    t: complex
    u: complex
    du_dt: complex


@dataclass(frozen=True)
class PVCheck:
    """Residual of the PV equation at one sample.

    ``scale`` is the largest modulus among u'' and the right-hand side terms,
    so ``residual/scale`` is a relative measure.
    """

    t: complex
    u: complex
    du: complex
    d2u: complex
    residual: complex
    scale: float

    @property
    def relative(self) -> float:
        return abs(self.residual) / self.scale if self.scale else abs(self.residual)


def pv_params(theta: ThetaTriple) -> PVParams:
    th0, th1, thinf = theta.as_tuple()
    return PVParams(
        alpha=(th0 - th1 + thinf) ** 2 / 8,
        beta=-((th0 - th1 - thinf) ** 2) / 8,
        gamma=1 - th0 - th1,
        delta=Fraction(-1, 2) if all(isinstance(x, (Fraction, int)) for x in (th0, th1, thinf)) else -0.5,
    )


def _u_parts(state: SystemState):
    th0, th1 = state.theta.theta0, state.theta.theta1
    B0, B1 = state.B0, state.B1
    num = B1[0, 1] * (B0[0, 0] + th0 / 2)
    f0, f1 = B0[0, 1], B1[0, 0] + th1 / 2
    scale = max(1.0, float(np.max(np.abs(B0.astype(complex)))), float(np.max(np.abs(B1.astype(complex)))))
    if abs(f0) <= _DENOM_EPS * scale:
        raise UndefinedU(f"b0_12 vanishes at t={state.t}", factor="b0_12")
    if abs(f1) <= _DENOM_EPS * scale:
        raise UndefinedU(f"b1_11 + theta1/2 vanishes at t={state.t}", factor="b1_11+theta1/2")
    return num, f0, f1


def u_of_state(state: SystemState):
    """u = b1_12 (b0_11 + theta0/2) / (b0_12 (b1_11 + theta1/2))."""
    num, f0, f1 = _u_parts(state)
    return num / (f0 * f1)


def du_dt(state: SystemState, rhs=deformation_rhs):
    """Derivative of u along the deformation flow (quotient rule)."""
    if state.t == 0:
        raise ZeroBasePoint("t must be nonzero")
    th0 = state.theta.theta0
    num, f0, f1 = _u_parts(state)
    B0, B1 = state.B0, state.B1
    dB0, dB1 = rhs(state)
    dnum = dB1[0, 1] * (B0[0, 0] + th0 / 2) + B1[0, 1] * dB0[0, 0]
    dden = dB0[0, 1] * f1 + f0 * dB1[0, 0]
    den = f0 * f1
    return (dnum * den - num * dden) / (den * den)


def pv_sample(state: SystemState) -> PVSample:
    return PVSample(complex(state.t), complex(u_of_state(state)), complex(du_dt(state)))


def fd_weights(z, x, m: int) -> np.ndarray:
    """Finite-difference weights for derivatives 0..m at ``z`` from nodes ``x``
    (Fornberg's recursion; nodes may be complex and unevenly spaced).

    Returns an array of shape ``(m + 1, len(x))``.
    """
    x = np.asarray(x, dtype=complex)
    n = len(x)
    c = np.zeros((n, m + 1), dtype=complex)
    c1, c4 = 1.0, x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2, c5, c4 = 1.0, c4, x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c.T


def pv_rhs_terms(t, u, du, params: PVParams):
    """The five terms of the right-hand side of PV, in printed order."""
    return (
        (1 / (2 * u) + 1 / (u - 1)) * du * du,
        -du / t,
        (u - 1) ** 2 / t**2 * (params.alpha * u + params.beta / u),
        params.gamma * u / t,
        params.delta * u * (u + 1) / (u - 1),
    )


def pv_check(traj: Trajectory, index: int, stencil: int = 5, analytic_first: bool = False) -> PVCheck:
    """PV residual at sample ``index`` from a centred window of samples.

    Derivatives come from finite-difference weights on the sample positions
    ``t`` themselves, so windows that straddle a corner of the path or an
    uneven step are handled.  With ``analytic_first`` the first derivative is
    taken from :func:`du_dt` instead.
    """
    if stencil < 5 or stencil % 2 == 0:
        raise ValueError("stencil must be an odd integer >= 5")
    n = len(traj)
    if index < 0:
        index += n
    half = stencil // 2
    if index - half < 0 or index + half >= n:
        raise StencilOutOfRange(f"window of {stencil} around {index} leaves [0, {n})")
    window = range(index - half, index + half + 1)
    u = np.array([u_of_state(traj.state(i)) for i in window], dtype=complex)
    if np.any(np.abs(u) < 1e-12) or np.any(np.abs(u - 1) < 1e-12):
        raise EquationSingular(f"u hits 0 or 1 near t={traj.t[index]}")
    t = complex(traj.t[index])
    W = fd_weights(t, traj.t[index - half:index + half + 1], 2)
    u0 = u[half]
    du = complex(du_dt(traj.state(index))) if analytic_first else complex(W[1] @ u)
    d2u = complex(W[2] @ u)
    terms = pv_rhs_terms(t, u0, du, pv_params(traj.theta))
    res = d2u - sum(terms)
    scale = max([abs(d2u)] + [abs(x) for x in terms])
    return PVCheck(t=t, u=complex(u0), du=du, d2u=d2u, residual=complex(res), scale=float(scale))


def pv_residual(traj: Trajectory, index: int, stencil: int = 5, analytic_first: bool = False) -> complex:
    return pv_check(traj, index, stencil, analytic_first).residual


def pv_residual_table(traj: Trajectory, stencil: int = 5) -> list[dict]:
    """One row per interior sample; failures are classified, not dropped."""
    rows = []
    half = stencil // 2
    for i in range(half, len(traj) - half):
        row = {"index": i, "t": complex(traj.t[i])}
        try:
            chk = pv_check(traj, i, stencil)
            row.update(abs_residual=abs(chk.residual), rel_residual=chk.relative, status="ok")
        except UndefinedU as exc:
            log.info("u undefined at t=%s (%s)", traj.t[i], exc.factor)
            row.update(abs_residual=float("nan"), rel_residual=float("nan"), status=f"undefined:{exc.factor}")
        except EquationSingular:
            row.update(abs_residual=float("nan"), rel_residual=float("nan"), status="equation_singular")
        rows.append(row)
    return rows
