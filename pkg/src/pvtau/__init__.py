"""Numerical isomonodromic deformation of the 2x2 system behind Painleve V:
deformation flow, tau-function via Miwa's formula, the PV transcendent and
monodromy invariants."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    E,
    SystemState,
    ThetaTriple,
    TransformedState,
    build_state,
    contour_residue,
    eval_B,
    gauge_conjugate,
    miwa_residue,
    random_state,
    tr_B1_squared,
    transform_xi,
    xi_residue_identity,
)
from .deformation import (  # noqa: E402
    BlowUpEvent,
    IntegratorConfig,
    PathSpec,
    Trajectory,
    deformation_rhs,
    integrate_path,
    locate_theta_point,
    verify_zero_curvature,
)
from .monodromy import LoopSpec, MonodromyReport, isomonodromy_drift, monodromy_invariants, monodromy_matrix  # noqa: E402
from .painleve import PVParams, du_dt, pv_params, pv_residual, u_of_state  # noqa: E402
from .tau import ZeroCertificate, coordinate_relation_check, path_independence_check, simple_zero_fit  # noqa: E402
