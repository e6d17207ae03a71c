"""Config loading and deterministic CSV/JSON writers.

Complex numbers travel as ``[re, im]`` pairs.  Floats are written with
``repr`` so output is byte-stable for a given run.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .core import SystemState, ThetaTriple, build_state
from .deformation import IntegratorConfig, PathSpec, Trajectory
from .errors import ConfigError, PVTauError, ZeroBasePoint

REPORT_SCHEMA = "pvtau.report/1"


def to_pair(z) -> list:
    z = complex(z)
    return [_clean(z.real), _clean(z.imag)]


def _clean(x: float):
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return None
    return x + 0.0  # drop negative zero


def from_pair(v, what="value") -> complex:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
        return complex(v[0], v[1])
    raise ConfigError(f"{what}: expected [re, im], got {v!r}")


def _matrix(v, what):
    try:
        return np.array([[from_pair(x, what) for x in row] for row in v], dtype=complex).reshape(2, 2)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{what}: expected a 2x2 matrix of [re, im] pairs") from exc


@dataclass
class RunConfig:
    theta: ThetaTriple
    state0: SystemState
    path: PathSpec
    integrator: IntegratorConfig
    verify: dict = field(default_factory=dict)
    monodromy: dict = field(default_factory=dict)
    tau_zeros: dict = field(default_factory=dict)
    pv: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)


_INTEGRATOR_KEYS = {"rtol", "atol", "max_step", "min_step", "dense_spacing", "blowup_threshold"}


def parse_config(raw: dict, overrides: dict | None = None) -> RunConfig:
    """Validate a config mapping; raises a :class:`PVTauError` subclass."""
    overrides = overrides or {}
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    try:
        th = raw["theta"]
        init = raw["initial"]
        t0 = from_pair(raw["t0"], "t0")
    except KeyError as exc:
        raise ConfigError(f"missing key {exc.args[0]!r}") from exc
    if not isinstance(th, list) or len(th) != 3:
        raise ConfigError("theta must be three [re, im] pairs")
    theta = ThetaTriple(*(from_pair(x, "theta") for x in th))
    if t0 == 0:
        raise ZeroBasePoint("t0 must be nonzero")

    builder = {"a0", "b", "e"}
    explicit = {"B0", "B1"}
    keys = set(init)
    if keys == builder:
        state0 = build_state(theta, *(from_pair(init[k], k) for k in ("a0", "b", "e")), t0)
    elif keys == explicit:
        state0 = SystemState(t=t0, B0=_matrix(init["B0"], "B0"), B1=_matrix(init["B1"], "B1"), theta=theta)
        state0.check()
    else:
        raise ConfigError("initial must hold exactly {a0, b, e} or exactly {B0, B1}")

    path = PathSpec([from_pair(w, "path") for w in raw.get("path", [raw["t0"]])])
    if path.start != t0:
        raise ConfigError("first path waypoint must equal t0")

    icfg = dict(raw.get("integrator", {}))
    unknown = set(icfg) - _INTEGRATOR_KEYS
    if unknown:
        raise ConfigError(f"unknown integrator settings {sorted(unknown)}")
    icfg.update({k: v for k, v in overrides.items() if k in ("rtol", "atol") and v is not None})
    try:
        integrator = IntegratorConfig(**icfg)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return RunConfig(
        theta=theta, state0=state0, path=path, integrator=integrator,
        verify=dict(raw.get("verify", {})), monodromy=dict(raw.get("monodromy", {})),
        tau_zeros=dict(raw.get("tau_zeros", {})), pv=dict(raw.get("pv", {})), raw=raw,
    )


def load_config(path, overrides=None) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(raw, overrides)


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n")


def header_line(kind: str) -> str:
    return f"# pvtau {__version__} {kind}\n"


def _fmt(x) -> str:
    return repr(float(x) + 0.0)


TRAJECTORY_COLUMNS = (
    ["arclen", "t_re", "t_im"]
    + [f"b0_{ij}_{p}" for ij in ("11", "12", "21", "22") for p in ("re", "im")]
    + [f"b1_{ij}_{p}" for ij in ("11", "12", "21", "22") for p in ("re", "im")]
    + ["u_re", "u_im", "lntau_re", "lntau_im", "dlntau_re", "dlntau_im"]
)


def trajectory_rows(traj: Trajectory):
    from .core import miwa_residue
    from .painleve import u_of_state

    for i in range(len(traj)):
        st = traj.state(i)
        try:
            u = complex(u_of_state(st))
        except PVTauError:
            u = complex(float("nan"), float("nan"))
        vals = [traj.arclen[i], traj.t[i].real, traj.t[i].imag]
        for z in list(traj.B0[i].ravel()) + list(traj.B1[i].ravel()):
            vals += [z.real, z.imag]
        dl = complex(miwa_residue(st))
        vals += [u.real, u.imag, traj.ln_tau[i].real, traj.ln_tau[i].imag, dl.real, dl.imag]
        yield vals


def write_trajectory_csv(path, traj: Trajectory):
    with open(path, "w", newline="\n") as fh:
        fh.write(header_line("trajectory"))
        fh.write(",".join(TRAJECTORY_COLUMNS) + "\n")
        for vals in trajectory_rows(traj):
            fh.write(",".join(_fmt(v) for v in vals) + "\n")


def write_pv_csv(path, rows):
    with open(path, "w", newline="\n") as fh:
        fh.write(header_line("pv_residual"))
        fh.write("index,t_re,t_im,abs_residual,rel_residual,status\n")
        for r in rows:
            fh.write(",".join([
                str(r["index"]), _fmt(r["t"].real), _fmt(r["t"].imag),
                _fmt(r["abs_residual"]), _fmt(r["rel_residual"]), r["status"],
            ]) + "\n")


def read_trajectory_csv(path):
    """Parse a trajectory CSV back into a dict of column arrays."""
    lines = Path(path).read_text().splitlines()
    cols = lines[1].split(",")
    data = np.array([[float(x) for x in ln.split(",")] for ln in lines[2:]])
    return {c: data[:, k] for k, c in enumerate(cols)}
