"""
Monodromy stays put
===================

Integrate the linear system in z around z = 0 and z = t at a handful of
points of a deformation and compare the traces.
"""

import numpy as np

from pvtau import IntegratorConfig, PathSpec, ThetaTriple, build_state, integrate_path
from pvtau.deformation import deformation_rhs
from pvtau.monodromy import isomonodromy_drift, monodromy_invariants

state = build_state(ThetaTriple(1 / 3, 1 / 5, 1 / 7), 0.25, 1.0, 2.0, 1.0)
rep = monodromy_invariants(state)
print("tr M0 =", rep.tr_M0, " expected", 2 * np.cos(np.pi / 3))
print("tr Mt =", rep.tr_Mt, " expected", 2 * np.cos(np.pi / 5))
print("tr M0 Mt =", rep.tr_M0Mt, " accuracy ~", f"{rep.accuracy:.1e}")
print(rep.caveat)

traj = integrate_path(state, PathSpec([1, 2]), IntegratorConfig())
idx = np.linspace(0, len(traj) - 1, 5).astype(int)
print("drift along the flow:", isomonodromy_drift(traj, idx))


def wrong(s):
    dB0, dB1 = deformation_rhs(s)
    return -dB0, dB1


bad = integrate_path(state, PathSpec([1, 2]), IntegratorConfig(), rhs=wrong)
print("drift with a sign error in dB0/dt:", isomonodromy_drift(bad, np.linspace(0, len(bad) - 1, 5).astype(int)))
