"""
Finding a zero of tau
=====================

Off the real axis the reference state runs into a pole of the coefficients.
The probe path below passes close to one; its d ln tau peak is used to aim a
second run straight at it.
"""

from pvtau import IntegratorConfig, PathSpec, ThetaTriple, build_state
from pvtau.deformation import locate_theta_point
from pvtau.tau import drive_to_theta_point, simple_zero_fit

state = build_state(ThetaTriple(1 / 3, 1 / 5, 1 / 7), 0.25, 1.0, 2.0, 1.0)
traj = drive_to_theta_point(state, PathSpec([1, 4.6874 + 3.6874j]), IntegratorConfig(dense_spacing=None))
print("status:", traj.status, "path:", traj.path.waypoints)
print("stopped at", traj.event.t_stop, "largest entry", f"{traj.event.indicator:.2e}")

fit = locate_theta_point(traj)
print("t* =", fit.t_star, " residue of d ln tau:", fit.c)

cert = simple_zero_fit(traj, fit.t_star)
print("ln tau ~ ln c + k ln(t - t*):  k =", cert.slope, "from", cert.n_samples, "samples")

# the matrix entries themselves blow up faster than 1/(t - t*)
try:
    locate_theta_point(traj, quantity="entry")
except Exception as exc:
    print(type(exc).__name__, exc)
