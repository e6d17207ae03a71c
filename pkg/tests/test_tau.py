from fractions import Fraction as F

import numpy as np
import pytest

from conftest import T_STAR, diag_state
from oracles import five_point_first
from pvtau.core import ThetaTriple, build_state, matrix, miwa_residue, random_state, transform_xi, xi_half_residue
from pvtau.deformation import BLOWUP, IntegratorConfig, PathSpec, Trajectory, integrate_path
from pvtau.errors import (
    BlowUpOnPath,
    ChartSingular,
    FitFailed,
    InvalidPath,
    PreconditionError,
    WindingMismatch,
)
from pvtau.painleve import fd_weights
from pvtau.tau import (
    continuous_log,
    coordinate_relation_check,
    path_independence_check,
    simple_zero_fit,
    tau_samples,
    xi_chart_ln_tau,
)

CFG = IntegratorConfig(rtol=1e-10, atol=1e-12, dense_spacing=None)


def test_identical_paths_give_zero(ref_state):
    p = PathSpec([1, 2])
    assert path_independence_check(ref_state, p, p, CFG) == 0.0


def test_stationary_detour():
    d = path_independence_check(diag_state(1), PathSpec([1, 2]), PathSpec([1, 1.5 + 0.6j, 2]), CFG)
    assert d < 1e-10


def test_generic_homotopic_paths(ref_state):
    d = path_independence_check(ref_state, PathSpec([1, 2]), PathSpec([1, 1.2 - 0.5j, 2]), CFG)
    assert d < 100 * CFG.rtol


def test_winding_and_endpoint_errors(ref_state):
    with pytest.raises(WindingMismatch):
        path_independence_check(ref_state, PathSpec([1, 2]), PathSpec([1, 2j, -2, -2j, 2]), CFG)
    with pytest.raises(InvalidPath):
        path_independence_check(ref_state, PathSpec([1, 2]), PathSpec([1, 3]), CFG)


def test_blowup_on_path(ref_state):
    d = (T_STAR - 1) / abs(T_STAR - 1)
    end = T_STAR + 0.2 * d
    other = PathSpec([1, 6, end])
    with pytest.raises(BlowUpOnPath):
        path_independence_check(ref_state, PathSpec([1, end]), other, CFG)


def test_tau_samples_continuous(ref_traj):
    s = tau_samples(ref_traj)
    assert s[0].ln_tau == 0
    assert np.max(np.abs(np.diff([x.ln_tau for x in s]))) < 1e-2


def test_finite_difference_of_ln_tau_matches_miwa(ref_traj):
    h = 1e-3
    lt = ref_traj.ln_tau
    for i in (2, 250, 500, 998):
        fd = five_point_first(lt[i - 2 : i + 3], h)
        assert abs(fd - miwa_residue(ref_traj.state(i))) < 1e-8


def test_ln_tau_converges_at_fifth_order(ref_state):
    ref = integrate_path(ref_state, PathSpec([1, 2]), IntegratorConfig(rtol=1e-13, atol=1e-15, dense_spacing=None))
    errs = []
    for h in (0.1, 0.05):
        cfg = IntegratorConfig(rtol=1.0, atol=1.0, max_step=h, min_step=1e-3, dense_spacing=None)
        errs.append(abs(integrate_path(ref_state, PathSpec([1, 2]), cfg).ln_tau[-1] - ref.ln_tau[-1]))
    assert 2**4.5 < errs[0] / errs[1] < 2**5.5


def synthetic(ln_tau, t, status=BLOWUP):
    n = len(t)
    return Trajectory(
        path=PathSpec([t[0], t[-1]]), theta=ThetaTriple(1 / 3, 1 / 5, 1 / 7), arclen=np.abs(t - t[0]), t=t,
        B0=np.zeros((n, 2, 2), complex), B1=np.zeros((n, 2, 2), complex), ln_tau=ln_tau, status=status,
    )


T_SYN = 2 - np.logspace(0, -6, 40) + 0j


def test_synthetic_simple_zero():
    cert = simple_zero_fit(synthetic(np.log(3) + np.log(T_SYN - 2), T_SYN), 2)
    assert abs(cert.slope - 1) < 1e-8
    assert abs(cert.c - 3) < 1e-8
    assert cert.residual < 1e-10


def test_synthetic_double_zero_rejected():
    with pytest.raises(FitFailed):
        simple_zero_fit(synthetic(2 * np.log(T_SYN - 2), T_SYN), 2)


def test_simple_zero_requires_blowup():
    with pytest.raises(PreconditionError):
        simple_zero_fit(synthetic(np.log(T_SYN - 2), T_SYN, status="completed"), 2)


def test_simple_zero_on_real_blowup(blowup_traj):
    from pvtau.deformation import locate_theta_point

    cert = simple_zero_fit(blowup_traj, locate_theta_point(blowup_traj).t_star)
    assert abs(cert.slope - 1) < 0.05


def test_coordinate_relation_exact():
    assert coordinate_relation_check(diag_state(2, exact=True)) == 0
    st = diag_state(2, exact=True).replace(B1=matrix(0, 0, 0, 0))
    assert coordinate_relation_check(st) == 0
    st = build_state(ThetaTriple(F(1, 3), F(1, 5), F(1, 7)), F(1, 4), 1, 2, 3)
    assert coordinate_relation_check(st) == 0


def test_coordinate_relation_random(rng):
    for _ in range(200):
        assert coordinate_relation_check(random_state(rng)) < 1e-12


def test_coordinate_relation_chart_singular():
    with pytest.raises(ChartSingular):
        coordinate_relation_check(diag_state(-1))


def test_xi_chart_derivative_matches_xi_residue(ref_traj):
    """d ln tau~/ds from samples against the residue computed in the xi chart."""
    lt = xi_chart_ln_tau(ref_traj)
    s = 1 / (ref_traj.t + 1)
    for i in (3, 400, 996):
        w = fd_weights(s[i], s[i - 3 : i + 4], 1)[1]
        fd = w @ lt[i - 3 : i + 4]
        ref = xi_half_residue(transform_xi(ref_traj.state(i)))
        assert abs(fd - ref) < 1e-8 * max(1, abs(ref))


def test_xi_chart_start_value(ref_traj):
    lt = xi_chart_ln_tau(ref_traj)
    assert abs(lt[0] - 0.2**2 / 2 * np.log(2)) < 1e-15


def test_continuous_log_unwraps():
    z = np.exp(1j * np.linspace(0, 4 * np.pi, 50))
    L = continuous_log(z)
    assert abs(L[-1].imag - 4 * np.pi) < 1e-12
