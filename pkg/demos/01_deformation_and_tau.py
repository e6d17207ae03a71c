"""
Deforming a 2x2 system and accumulating ln tau
==============================================

Start from a state built from (theta0, theta1, thetaInf) and a few gauge
parameters, push it along t from 1 to 2, and watch the conserved quantities.
"""

import numpy as np

from pvtau import IntegratorConfig, PathSpec, ThetaTriple, build_state, integrate_path

theta = ThetaTriple(1 / 3, 1 / 5, 1 / 7)
state = build_state(theta, a0=0.25, b=1.0, e=2.0, t0=1.0)
print("B0 =\n", state.B0.real)
print("B1 =\n", state.B1.real)

cfg = IntegratorConfig(rtol=1e-10, atol=1e-12, max_step=1e-2, dense_spacing=1e-2)
traj = integrate_path(state, PathSpec([1, 2]), cfg)
print(traj.status, len(traj), "samples")

# eigenvalues of B0 and B1 never move
det0 = np.linalg.det(traj.B0) + theta.theta0**2 / 4
det1 = np.linalg.det(traj.B1) + theta.theta1**2 / 4
print("spectral drift:", np.abs(det0).max(), np.abs(det1).max())

# ln tau is zero at the start and is integrated with the flow
for i in range(0, len(traj), 25):
    print(f"t = {traj.t[i].real:.2f}   ln tau = {traj.ln_tau[i]:.10f}")

# a detour through the upper half plane lands on the same value
detour = integrate_path(state, PathSpec([1, 1.5 + 0.5j, 2]), cfg)
print("detour difference:", abs(detour.ln_tau[-1] - traj.ln_tau[-1]))
