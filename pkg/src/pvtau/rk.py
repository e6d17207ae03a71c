"""Dormand-Prince 5(4) with PI step-size control, for complex states.

The independent variable is real (an arc-length or angle parameter); complex
paths are handled by the caller through the chain rule.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
# difference between the 5th- and the embedded 4th-order weights
DB = B5 - np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])

ORDER = 5
SAFETY = 0.9
FAC_MIN, FAC_MAX = 0.2, 10.0
BETA = 0.04  # PI stabilisation (Hairer's DOPRI5 default)


class StepSizeUnderflow(Exception):
    """Raised when the controller asks for a step below ``min_step``."""

    def __init__(self, p, y, h, partial=None):
        super().__init__(f"step {h:.3e} below minimum at p={p:.17g}")
        self.p, self.y, self.h = p, y, h
        self.partial = partial


@dataclass
class Solution:
    p: np.ndarray
    y: np.ndarray
    stopped: bool = False
    nfev: int = 0
    rejected: int = 0
    steps: list = field(default_factory=list)


def _error_norm(err, y, ynew, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y), np.abs(ynew))
    return float(np.sqrt(np.mean(np.abs(err / scale) ** 2)))


def _initial_step(fun, p0, y0, f0, rtol, atol):
    scale = atol + rtol * np.abs(y0)
    d0 = np.sqrt(np.mean(np.abs(y0 / scale) ** 2))
    d1 = np.sqrt(np.mean(np.abs(f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    f1 = fun(p0 + h0, y0 + h0 * f0)
    d2 = np.sqrt(np.mean(np.abs((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / (ORDER + 1))
    return min(100 * h0, h1)


def solve(
    fun,
    p0: float,
    p1: float,
    y0,
    *,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    max_step: float = np.inf,
    min_step: float = 0.0,
    grid_spacing: float | None = None,
    stop=None,
) -> Solution:
    """Integrate ``y' = fun(p, y)`` from ``p0`` to ``p1 > p0``.

    Every accepted step is recorded.  If ``grid_spacing`` is given, steps are
    shortened so that each multiple of it (measured from ``p0``) is hit
    exactly.  ``stop(p, y)`` is called after each accepted step; a true return
    value ends the integration with ``Solution.stopped`` set.
    """
    y = np.array(y0, dtype=complex)
    p = float(p0)
    if p1 < p0:
        raise ValueError("p1 must not precede p0")
    ps, ys, steps = [p], [y.copy()], []
    if p1 == p0:
        return Solution(np.array(ps), np.array(ys))

    f = fun(p, y)
    nfev, rejected = 1, 0
    h = min(_initial_step(fun, p, y, f, rtol, atol), max_step, p1 - p0)
    nfev += 1
    err_old = 1e-4
    next_grid = None
    if grid_spacing:
        k_grid = 1
        next_grid = p0 + grid_spacing

    K = np.empty((7,) + y.shape, dtype=complex)
    while p < p1:
        target = p1
        if next_grid is not None and next_grid < p1:
            target = next_grid
        h = min(h, max_step)
        landing = p + h >= target - 1e-12 * max(1.0, abs(target))
        if landing:
            h = target - p
        if h < min_step and not landing:
            raise StepSizeUnderflow(p, y, h, Solution(np.array(ps), np.array(ys), True, nfev, rejected, steps))

        K[0] = f
        for i in range(1, 7):
            dy = sum(a * K[j] for j, a in enumerate(A[i]) if a != 0)
            K[i] = fun(p + C[i] * h, y + h * dy)
        nfev += 6
        ynew = y + h * np.tensordot(B5[:6], K[:6], axes=1)
        err = _error_norm(h * np.tensordot(DB, K, axes=1), y, ynew, rtol, atol)

        if not np.isfinite(err):
            h *= FAC_MIN
            rejected += 1
            continue
        if err <= 1.0:
            err = max(err, 1e-10)
            fac = err ** (1 / ORDER - 0.75 * BETA) / err_old**BETA
            fac = min(FAC_MAX, max(FAC_MIN, SAFETY / fac)) if fac > 0 else FAC_MAX
            err_old = err
            p = target if landing else p + h
            y = ynew
            f = K[6]
            steps.append(h)
            ps.append(p)
            ys.append(y.copy())
            if landing and next_grid is not None and target == next_grid:
                k_grid += 1
                next_grid = p0 + k_grid * grid_spacing
            if stop is not None and stop(p, y):
                return Solution(np.array(ps), np.array(ys), True, nfev, rejected, steps)
            h_new = h * fac
            if landing:
                # a shortened landing step says nothing about the next one
                h_new = max(h_new, steps[-2] if len(steps) > 1 else h_new)
            h = h_new
        else:
            fac = max(FAC_MIN, SAFETY / err ** (1 / ORDER))
            h *= fac
            rejected += 1
            if h < min_step:
                raise StepSizeUnderflow(p, y, h, Solution(np.array(ps), np.array(ys), True, nfev, rejected, steps))
    return Solution(np.array(ps), np.array(ys), False, nfev, rejected, steps)
