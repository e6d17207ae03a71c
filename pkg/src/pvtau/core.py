"""The linear family dY/dz = B(z, t) Y with B = B0/z + B1/(z - t) + E.

Matrices are plain ``(2, 2)`` numpy arrays.  Complex floating point is the
default; object arrays holding :class:`fractions.Fraction` entries are
accepted everywhere in this module and give exact rational results, which the
tests use for the closed-form examples.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Number

import numpy as np

from .errors import (
    ChartSingular,
    ConstraintViolation,
    InvalidTheta,
    PoleEvaluation,
    SingularGauge,
    ZeroBasePoint,
    ZeroGaugeParameter,
)

#: Leading term of B at z = infinity.
E = np.array([[1, 0], [0, 0]], dtype=complex)

DEFAULT_CONSTRAINT_TOL = 1e-10


def _is_exact(*xs) -> bool:
    return all(isinstance(x, (Fraction, int)) and not isinstance(x, bool) for x in xs)


def matrix(a11, a12, a21, a22) -> np.ndarray:
    """Build a 2x2 matrix; exact (object dtype) if every entry is rational."""
    if _is_exact(a11, a12, a21, a22):
        return np.array([[Fraction(a11), Fraction(a12)], [Fraction(a21), Fraction(a22)]], dtype=object)
    return np.array([[a11, a12], [a21, a22]], dtype=complex)


def _as_matrix(m) -> np.ndarray:
    m = np.asarray(m)
    if m.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
    if m.dtype == object:
        return m.copy()
    return m.astype(complex)


def _E_like(m: np.ndarray) -> np.ndarray:
    if m.dtype == object:
        return matrix(1, 0, 0, 0)
    return E


def det2(m: np.ndarray):
    return m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]


def tr2(m: np.ndarray):
    return m[0, 0] + m[1, 1]


def _is_integer(x, tol=1e-12) -> bool:
    if isinstance(x, Fraction) or isinstance(x, int):
        return Fraction(x).denominator == 1
    x = complex(x)
    return abs(x.imag) <= tol and abs(x.real - round(x.real)) <= tol


@dataclass(frozen=True)
class ThetaTriple:
    """Formal exponents: B0 ~ diag(±theta0/2), B1 ~ diag(±theta1/2) and
    diag(B0 + B1) = (-thetaInf/2, thetaInf/2)."""

    theta0: Number
    theta1: Number
    thetaInf: Number

    def __post_init__(self):
        for name in ("theta0", "theta1"):
            if _is_integer(getattr(self, name)):
                raise InvalidTheta(f"{name}={getattr(self, name)!r} is an integer")

    def as_tuple(self):
        return (self.theta0, self.theta1, self.thetaInf)


@dataclass(frozen=True, eq=False)
class SystemState:
    """A point ``(t, B0, B1)`` of the isomonodromic family.

    Construction does not enforce the spectral constraints (the deformation
    right-hand side is meaningful for any matrices); call :meth:`check`.
    """

    t: Number
    B0: np.ndarray
    B1: np.ndarray
    theta: ThetaTriple

    def __post_init__(self):
        if self.t == 0:
            raise ZeroBasePoint("t must be nonzero")
        for name in ("B0", "B1"):
            m = _as_matrix(getattr(self, name))
            m.flags.writeable = False
            object.__setattr__(self, name, m)

    @property
    def exact(self) -> bool:
        return self.B0.dtype == object and self.B1.dtype == object

    def constraint_defects(self) -> dict:
        """Deviations of each invariant from its required value."""
        th0, th1, thinf = self.theta.as_tuple()
        S = self.B0 + self.B1
        return {
            "tr_B0": tr2(self.B0),
            "det_B0": det2(self.B0) + th0 * th0 / 4,
            "tr_B1": tr2(self.B1),
            "det_B1": det2(self.B1) + th1 * th1 / 4,
            "diag_sum_11": S[0, 0] + thinf / 2,
            "diag_sum_22": S[1, 1] - thinf / 2,
        }

    def check(self, tol: float = DEFAULT_CONSTRAINT_TOL) -> "SystemState":
        scale = max(1.0, float(np.max(np.abs(self.B0.astype(complex)))), float(np.max(np.abs(self.B1.astype(complex)))))
        bad = {k: v for k, v in self.constraint_defects().items() if abs(complex(v)) > tol * scale**2}
        if bad:
            raise ConstraintViolation(f"state violates constraints: {bad}")
        return self

    def replace(self, **kw) -> "SystemState":
        fields = dict(t=self.t, B0=self.B0, B1=self.B1, theta=self.theta)
        fields.update(kw)
        return SystemState(**fields)


@dataclass(frozen=True, eq=False)
class TransformedState:
    """Coefficients of the family in xi = 1/(z + 1):

    B~(xi, s) = res_1/(xi - 1) + res_s/(xi - s) + c2/xi**2 + c1/xi
    """

    s: Number
    res_1: np.ndarray
    res_s: np.ndarray
    c2: np.ndarray
    c1: np.ndarray

    def regular_part_at_s(self, xi):
        """B~ with the xi = s pole removed."""
        return self.res_1 / (xi - 1) + self.c2 / (xi * xi) + self.c1 / xi

    def eval(self, xi):
        if xi == 0 or xi == 1 or xi == self.s:
            raise PoleEvaluation(f"xi={xi!r} is a singular point")
        return self.regular_part_at_s(xi) + self.res_s / (xi - self.s)


def build_state(theta: ThetaTriple, a0, b, e, t0) -> SystemState:
    """Minimal chart of the constrained family.

    ``B0 = [[a0, b], [c0, -a0]]`` and ``B1 = [[m, e], [c1, -m]]`` with
    ``m = -thetaInf/2 - a0`` and ``c0, c1`` fixed by the determinants.
    """
    if b == 0 or e == 0:
        raise ZeroGaugeParameter("b and e must be nonzero")
    if t0 == 0:
        raise ZeroBasePoint("t0 must be nonzero")
    th0, th1, thinf = theta.as_tuple()
    exact = _is_exact(a0, b, e, th0, th1, thinf)
    if exact:
        a0, b, e, th0, th1, thinf = map(Fraction, (a0, b, e, th0, th1, thinf))
    c0 = (th0 * th0 / 4 - a0 * a0) / b
    m = -thinf / 2 - a0
    c1 = (th1 * th1 / 4 - m * m) / e
    return SystemState(t=t0, B0=matrix(a0, b, c0, -a0), B1=matrix(m, e, c1, -m), theta=theta)


def random_state(rng: np.random.Generator, t=None) -> SystemState:
    """A random valid state with entries of order one.

    Keeps ``|t| >= 0.5`` and ``|t + 1| >= 0.5`` so that both charts are well
    conditioned.
    """

    def cplx(lo, hi, spread=0.3):
        return complex(rng.uniform(lo, hi), rng.uniform(-spread, spread))

    def unit(lo=0.5, hi=1.5):
        return rng.uniform(lo, hi) * np.exp(2j * np.pi * rng.uniform())

    theta = ThetaTriple(cplx(0.05, 0.95), cplx(0.05, 0.95), cplx(-1.0, 1.0))
    if t is None:
        while True:
            t = unit(0.5, 3.0)
            if abs(t + 1) >= 0.5:
                break
    return build_state(theta, a0=cplx(-0.5, 0.5), b=unit(), e=unit(), t0=t)


def eval_B(state: SystemState, z) -> np.ndarray:
    """B(z, t) = B0/z + B1/(z - t) + E."""
    if z == 0 or z == state.t:
        raise PoleEvaluation(f"z={z!r} is a singular point")
    return state.B0 / z + state.B1 / (z - state.t) + _E_like(state.B0)


def miwa_residue(state: SystemState):
    """Half the residue of tr B(z, t)**2 at z = t, in closed form."""
    return tr2(state.B0 @ state.B1) / state.t + state.B1[0, 0]


def contour_residue(fun, center, radius, n: int = 128) -> complex:
    """Residue of a scalar function at ``center`` by the trapezoidal rule on
    the circle ``|z - center| = radius``.

    Exact for Laurent terms of degree below ``n`` in magnitude; the circle must
    not enclose any other singularity.
    """
    w = radius * np.exp(2j * np.pi * np.arange(n) / n)
    return complex(np.mean([fun(center + wk) * wk for wk in w]))


def half_tr_B_squared(state: SystemState, z) -> complex:
    B = eval_B(state, z)
    return 0.5 * tr2(B @ B)


def transform_xi(state: SystemState) -> TransformedState:
    """Rewrite the family in xi = 1/(z + 1), s = 1/(t + 1)."""
    t = state.t
    if t == -1:
        raise ChartSingular("t = -1 is the image of xi = infinity; this chart is unusable")
    one = Fraction(1) if state.exact and isinstance(t, (Fraction, int)) else 1.0
    s = one / (t + 1)
    return TransformedState(
        s=s,
        res_1=state.B0,
        res_s=state.B1,
        c2=-_E_like(state.B0),
        c1=-(state.B0 + state.B1),
    )


def xi_half_residue(ts: TransformedState):
    """Half the residue of tr B~(xi, s)**2 at xi = s.

    B~ has a simple pole at s, so the residue of tr B~**2 there is
    ``2 tr(res_s @ R(s))`` with R the regular part.
    """
    R = ts.regular_part_at_s(ts.s)
    return tr2(ts.res_s @ R)


def xi_residue_identity(state: SystemState):
    """Both sides of the chart-change identity.

    ``lhs = -s**2 * (1/2) res_{xi=s} tr B~**2`` from the transformed
    coefficients, ``rhs = tr(B0 B1)/t + (B1)_11 + tr(B1**2)/(t + 1)``.
    """
    ts = transform_xi(state)
    lhs = -ts.s * ts.s * xi_half_residue(ts)
    t = state.t
    rhs = tr2(state.B0 @ state.B1) / t + state.B1[0, 0] + tr2(state.B1 @ state.B1) / (t + 1)
    return lhs, rhs


def tr_B1_squared(state: SystemState):
    return tr2(state.B1 @ state.B1)


def gauge_conjugate(state: SystemState, d1, d2) -> SystemState:
    """Conjugate both residues by diag(d1, d2); E and the spectra are fixed."""
    if d1 * d2 == 0:
        raise SingularGauge("d1 * d2 must be nonzero")
    if state.exact and _is_exact(d1, d2):
        D, Dinv = matrix(d1, 0, 0, d2), matrix(Fraction(1, 1) / d1, 0, 0, Fraction(1, 1) / d2)
    else:
        D, Dinv = np.diag([d1, d2]).astype(complex), np.diag([1 / d1, 1 / d2]).astype(complex)
    return state.replace(B0=D @ state.B0 @ Dinv, B1=D @ state.B1 @ Dinv)
