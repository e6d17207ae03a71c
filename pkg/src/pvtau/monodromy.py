"""Monodromy of dY/dz = B(z, t) Y around the Fuchsian points z = 0, z = t.

Only the conjugation invariants of the Fuchsian loops are computed; Stokes
and connection data at z = infinity are not.  Constancy of these invariants
along a deformation is therefore necessary, not sufficient, for
isomonodromy.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence, Union

import numpy as np

from . import rk
from .core import SystemState, eval_B
from .deformation import IntegratorConfig, Trajectory, _segment_distance_to_origin
from .errors import LoopThroughSingularity, StepCollapse

CAVEAT = (
    "Fuchsian conjugation invariants only; Stokes matrices and the connection "
    "matrix at z = infinity are not checked."
)

#: Tolerances used for loop integration unless a config is passed.
LOOP_CONFIG = IntegratorConfig(rtol=1e-12, atol=1e-14, max_step=0.25, min_step=1e-12, dense_spacing=None)


@dataclass(frozen=True)
class LoopSpec:
    """Loop based at ``base`` that runs out to each circle in turn, once
    around it, and back.

    ``circles`` holds ``(center, radius)`` pairs; ``center`` is ``"0"``,
    ``"t"`` or an explicit complex number.  Circles run counterclockwise
    unless ``clockwise`` is set.
    """

    base: complex
    circles: tuple
    clockwise: bool = False

    def centers(self, t) -> list[complex]:
        out = []
        for c, _ in self.circles:
            out.append(0j if c == "0" else complex(t) if c == "t" else complex(c))
        return out


@dataclass(frozen=True)
class MonodromyReport:
    t: complex
    M0: np.ndarray
    Mt: np.ndarray
    tr_M0: complex
    tr_Mt: complex
    tr_M0Mt: complex
    accuracy: float
    det_defect: float
    caveat: str = CAVEAT

    @property
    def invariants(self) -> np.ndarray:
        return np.array([self.tr_M0, self.tr_Mt, self.tr_M0Mt])

    def to_dict(self):
        def c(z):
            return [float(np.real(z)), float(np.imag(z))]

        return {
            "t": c(self.t),
            "M0": [[c(x) for x in row] for row in self.M0],
            "Mt": [[c(x) for x in row] for row in self.Mt],
            "tr_M0": c(self.tr_M0),
            "tr_Mt": c(self.tr_Mt),
            "tr_M0Mt": c(self.tr_M0Mt),
            "accuracy": self.accuracy,
            "det_defect": self.det_defect,
            "caveat": self.caveat,
        }


def _check_loop(state: SystemState, loop: LoopSpec):
    sing = [0j, complex(state.t)]
    base = complex(loop.base)
    for center, (_, r) in zip(loop.centers(state.t), loop.circles):
        if r <= 0:
            raise LoopThroughSingularity("radius must be positive")
        inside = [s for s in sing if abs(s - center) < r]
        on = [s for s in sing if abs(abs(s - center) - r) <= 1e-12 * max(1.0, r)]
        if on:
            raise LoopThroughSingularity(f"circle about {center} passes through a singular point")
        if len(inside) > 1:
            raise LoopThroughSingularity(f"circle about {center} encloses both singular points")
        if abs(base - center) <= r:
            raise LoopThroughSingularity("base point lies inside a circle")
        entry = center + r * (base - center) / abs(base - center)
        for s in sing:
            if _segment_distance_to_origin(base - s, entry - s) <= 1e-12 * max(1.0, abs(base)):
                raise LoopThroughSingularity(f"connecting segment hits z = {s}")


def _pieces(loop: LoopSpec, t):
    """(z(p), dz/dp, p_end) for each smooth piece of the loop."""
    base = complex(loop.base)
    out = []
    sgn = -1.0 if loop.clockwise else 1.0
    for center, (_, r) in zip(loop.centers(t), loop.circles):
        u = (base - center) / abs(base - center)
        entry = center + r * u
        L = abs(entry - base)
        d = (entry - base) / L
        phi0 = np.angle(u)
        out.append((lambda p, a=base, d=d: a + p * d, lambda p, d=d: d, L))
        out.append((
            lambda p, c=center, r=r, f=phi0: c + r * np.exp(1j * (f + sgn * p)),
            lambda p, r=r, f=phi0: sgn * 1j * r * np.exp(1j * (f + sgn * p)),
            2 * np.pi,
        ))
        out.append((lambda p, a=entry, d=-d: a + p * d, lambda p, d=-d: d, L))
    return out


def monodromy_matrix(state: SystemState, loop: LoopSpec, cfg: IntegratorConfig = LOOP_CONFIG) -> np.ndarray:
    """Continue the solution with Y(base) = I around ``loop``; return Y at the end."""
    _check_loop(state, loop)
    y = np.eye(2, dtype=complex).ravel()
    for z, dz, L in _pieces(loop, state.t):
        def fun(p, yv, z=z, dz=dz):
            return ((eval_B(state, z(p)).astype(complex) @ yv.reshape(2, 2)) * dz(p)).ravel()

        try:
            sol = rk.solve(fun, 0.0, float(L), y, rtol=cfg.rtol, atol=cfg.atol,
                           max_step=cfg.max_step, min_step=cfg.min_step)
        except rk.StepSizeUnderflow as exc:
            raise StepCollapse(f"loop integration stalled: {exc}") from exc
        y = sol.y[-1]
    return y.reshape(2, 2)


def default_loops(t) -> tuple[LoopSpec, LoopSpec]:
    """Loops about z = 0 and z = t from the base point t(1/2 + i).

    The base sits on the perpendicular bisector of [0, t] at distance |t|
    from the midpoint; both radii are |t|/4.
    """
    t = complex(t)
    base = t * (0.5 + 1j)
    r = abs(t) / 4
    return LoopSpec(base, (("0", r),)), LoopSpec(base, (("t", r),))


def _invariants(state, loops, cfg):
    M0 = monodromy_matrix(state, loops[0], cfg)
    Mt = monodromy_matrix(state, loops[1], cfg)
    return M0, Mt, np.array([np.trace(M0), np.trace(Mt), np.trace(M0 @ Mt)])


def monodromy_invariants(state: SystemState, cfg: IntegratorConfig = LOOP_CONFIG, loops=None) -> MonodromyReport:
    """M0, Mt and the frame-independent traces.

    ``accuracy`` is the change of the invariants when the tolerances are
    tightened tenfold, an estimate of the error at ``cfg``.
    """
    if loops is None:
        loops = default_loops(state.t)
    M0, Mt, inv = _invariants(state, loops, cfg)
    fine = replace(cfg, rtol=cfg.rtol / 10, atol=cfg.atol / 10)
    _, _, inv_fine = _invariants(state, loops, fine)
    det_defect = max(abs(np.linalg.det(M0) - 1), abs(np.linalg.det(Mt) - 1))
    return MonodromyReport(
        t=complex(state.t), M0=M0, Mt=Mt, tr_M0=inv[0], tr_Mt=inv[1], tr_M0Mt=inv[2],
        accuracy=float(np.max(np.abs(inv - inv_fine))), det_defect=float(det_defect),
    )


def isomonodromy_drift(traj: Trajectory, sample_indices: Sequence[int], cfg: IntegratorConfig = LOOP_CONFIG) -> float:
    """Largest deviation of (tr M0, tr Mt, tr M0 Mt) from the first sample."""
    if len(sample_indices) <= 1:
        return 0.0
    invs = []
    for i in sample_indices:
        st = traj.state(i)
        invs.append(_invariants(st, default_loops(st.t), cfg)[2])
    invs = np.array(invs)
    return float(np.max(np.abs(invs - invs[0])))
