import dataclasses

import numpy as np
import pytest

from conftest import diag_state
from pvtau.core import ThetaTriple, build_state, matrix, random_state
from pvtau.deformation import IntegratorConfig, PathSpec, deformation_rhs, integrate_path
from pvtau.errors import LoopThroughSingularity
from pvtau.monodromy import (
    CAVEAT,
    LOOP_CONFIG,
    LoopSpec,
    default_loops,
    isomonodromy_drift,
    monodromy_invariants,
    monodromy_matrix,
)


def test_loop_around_nothing_is_identity(ref_state):
    M = monodromy_matrix(ref_state, LoopSpec(3j, ((-2 + 3j, 0.5),)))
    assert np.max(np.abs(M - np.eye(2))) < 1e-10


def test_local_exponents(ref_state):
    rep = monodromy_invariants(ref_state)
    assert abs(rep.tr_M0 - 2 * np.cos(np.pi / 3)) < 1e-6
    assert abs(rep.tr_Mt - 2 * np.cos(np.pi / 5)) < 1e-6
    assert abs(np.linalg.det(rep.M0) - 1) < 1e-8
    assert rep.det_defect < 1e-8
    assert rep.caveat == CAVEAT


def test_complex_thetas(rng):
    st = random_state(rng)
    rep = monodromy_invariants(st)
    assert abs(rep.tr_M0 - 2 * np.cos(np.pi * st.theta.theta0)) < 1e-8
    assert abs(rep.tr_Mt - 2 * np.cos(np.pi * st.theta.theta1)) < 1e-8


def test_zero_B1_gives_trivial_Mt(ref_state):
    st = ref_state.replace(B1=np.zeros((2, 2)))
    rep = monodromy_invariants(st)
    assert np.max(np.abs(rep.Mt - np.eye(2))) < 1e-10
    assert abs(rep.tr_Mt - 2) < 1e-10


def test_accuracy_estimate_tracks_tolerance(ref_state):
    acc = [
        monodromy_invariants(ref_state, dataclasses.replace(LOOP_CONFIG, rtol=r, atol=r / 100)).accuracy
        for r in (1e-10, 1e-11, 1e-12)
    ]
    for a, b in zip(acc, acc[1:]):
        assert 5 < a / b < 20


def test_frame_independence(ref_state):
    t = ref_state.t
    r = abs(t) / 4
    a = monodromy_invariants(ref_state).invariants
    for base in (t * (0.5 - 1j), t * (0.5 + 2j)):
        loops = (LoopSpec(base, (("0", r),)), LoopSpec(base, (("t", r),)))
        b = monodromy_invariants(ref_state, loops=loops).invariants
        # tr(M0 Mt) depends on the homotopy class of the pair; compare traces of
        # single loops everywhere and the product only on the same side
        assert np.max(np.abs(a[:2] - b[:2])) < 1e-10
    loops = (LoopSpec(t * (0.5 + 2j), (("0", r),)), LoopSpec(t * (0.5 + 2j), (("t", r),)))
    assert abs(monodromy_invariants(ref_state, loops=loops).tr_M0Mt - a[2]) < 1e-10


def test_reverse_loop_inverts(ref_state):
    loop, _ = default_loops(ref_state.t)
    M = monodromy_matrix(ref_state, loop)
    Mr = monodromy_matrix(ref_state, dataclasses.replace(loop, clockwise=True))
    assert np.max(np.abs(M @ Mr - np.eye(2))) < 1e-10
    assert abs(np.trace(M) - np.trace(Mr)) < 1e-10


def test_invalid_loops(ref_state):
    with pytest.raises(LoopThroughSingularity):
        monodromy_matrix(ref_state, LoopSpec(3j, (("0", 1.0),)))  # passes through t = 1
    with pytest.raises(LoopThroughSingularity):
        monodromy_matrix(ref_state, LoopSpec(3j, (("0", 2.0),)))  # encloses both
    with pytest.raises(LoopThroughSingularity):
        monodromy_matrix(ref_state, LoopSpec(0.1j, (("0", 0.25),)))  # base inside
    with pytest.raises(LoopThroughSingularity):
        monodromy_matrix(ref_state, LoopSpec(-1.0, (("t", 0.25),)))  # segment hits 0


def test_drift_along_reference(ref_traj):
    idx = np.linspace(0, len(ref_traj) - 1, 5).astype(int)
    assert isomonodromy_drift(ref_traj, idx) < 1e-6
    assert isomonodromy_drift(ref_traj, [500]) == 0.0


def test_drift_negative_control(ref_state):
    def wrong(state):
        dB0, dB1 = deformation_rhs(state)
        return -dB0, dB1

    tr = integrate_path(ref_state, PathSpec([1, 2]), IntegratorConfig(dense_spacing=None), rhs=wrong)
    idx = np.linspace(0, len(tr) - 1, 5).astype(int)
    assert isomonodromy_drift(tr, idx) > 1e-2
