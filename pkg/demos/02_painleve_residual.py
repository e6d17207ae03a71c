"""
The Painleve V transcendent along the flow
==========================================

u(t) is a rational function of the matrix entries.  Plug finite differences
of u into PV and look at what is left over.
"""

import numpy as np

from pvtau import IntegratorConfig, PathSpec, ThetaTriple, build_state, integrate_path
from pvtau.painleve import pv_check, pv_params, pv_residual_table, u_of_state

theta = ThetaTriple(1 / 3, 1 / 5, 1 / 7)
state = build_state(theta, 0.25, 1.0, 2.0, 1.0)
print(pv_params(theta))
print("u(1) =", u_of_state(state))

for h in (4e-3, 2e-3, 1e-3):
    traj = integrate_path(state, PathSpec([1, 2]), IntegratorConfig(max_step=h, dense_spacing=h))
    chk = pv_check(traj, int(round(0.5 / h)))
    print(f"h = {h:.0e}  |residual| at t=1.5: {abs(chk.residual):.3e}  relative {chk.relative:.1e}")

# u has a pole near t = 1.737 (b0_12 vanishes); the stencil feels it
rows = pv_residual_table(traj)
t = np.array([r["t"].real for r in rows])
res = np.array([r["abs_residual"] for r in rows])
for lo, hi in [(1.0, 1.3), (1.3, 1.6), (1.6, 1.8), (1.8, 2.0)]:
    m = (t >= lo) & (t < hi)
    print(f"t in [{lo}, {hi}): max |residual| {res[m].max():.2e}")
