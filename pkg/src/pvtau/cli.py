"""Batch front end.

    pvtau simulate   --config run.json --out outdir
    pvtau verify     --config run.json --out outdir [--seed N]
    pvtau monodromy  --config run.json --out outdir
    pvtau tau-zeros  --config run.json --out outdir
    pvtau identities --config run.json --out outdir

Every flag can also be set through ``PVTAU_<FLAG>`` (e.g. ``PVTAU_RTOL``).
Exit codes: 0 ok, 1 config error, 2 blow-up, 3 verification failure.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core import (
    contour_residue,
    gauge_conjugate,
    half_tr_B_squared,
    miwa_residue,
    random_state,
    tr_B1_squared,
    xi_residue_identity,
)
from .deformation import BLOWUP, deformation_rhs, integrate_path, locate_theta_point, verify_zero_curvature
from .errors import PVTauError
from .io import REPORT_SCHEMA, RunConfig, load_config, to_pair, write_json, write_pv_csv, write_trajectory_csv
from .monodromy import CAVEAT, LOOP_CONFIG, monodromy_invariants
from .painleve import pv_params, pv_residual_table, u_of_state
from .tau import coordinate_relation_check, drive_to_theta_point, simple_zero_fit

log = logging.getLogger("pvtau")

EXIT_OK, EXIT_CONFIG, EXIT_BLOWUP, EXIT_VERIFY = 0, 1, 2, 3
ENV_PREFIX = "PVTAU_"

THRESHOLDS = {
    "ZERO_CURVATURE": 1e-12,
    "MIWA_RESIDUE": 1e-10,
    "XI_RESIDUE": 1e-12,
    "COORDINATE_RELATION": 1e-12,
    "TR_B1_SQUARED": 1e-13,
    "GAUGE_U": 1e-14,
}


def _base_report(kind):
    return {"schema": REPORT_SCHEMA, "version": __version__, "kind": kind}


def _error_report(out: Path, kind: str, exc: PVTauError, fname: str):
    rep = _base_report(kind)
    rep.update(status="error", error={"code": exc.code, "message": str(exc)})
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / fname, rep)


def _drifts(traj):
    d = {}
    for st in traj.states():
        for k, v in st.constraint_defects().items():
            d[k] = max(d.get(k, 0.0), abs(complex(v)))
    return d


def _pv_summary(rows):
    ok = [r for r in rows if r["status"] == "ok"]
    counts = {}
    for r in rows:
        counts[r["status"]] = counts.get(r["status"], 0) + 1
    summary = {"counts": dict(sorted(counts.items()))}
    if ok:
        ab = np.array([r["abs_residual"] for r in ok])
        rel = np.array([r["rel_residual"] for r in ok])
        mid = ok[len(ok) // 2]
        summary.update(
            max_abs=float(ab.max()), median_abs=float(np.median(ab)),
            max_rel=float(rel.max()), median_rel=float(np.median(rel)),
            mid={"t": to_pair(mid["t"]), "abs": mid["abs_residual"], "rel": mid["rel_residual"]},
        )
    return summary


def _zero_certificate(traj):
    try:
        fit = locate_theta_point(traj)
        cert = simple_zero_fit(traj, fit.t_star)
        d = cert.to_dict()
        d["t_star_error"] = fit.error
        d["status"] = "certified"
        return d
    except PVTauError as exc:
        return {"status": "failed", "error": {"code": exc.code, "message": str(exc)}}


def run_simulate(cfg: RunConfig, out: Path) -> int:
    traj = integrate_path(cfg.state0, cfg.path, cfg.integrator)
    stencil = int(cfg.pv.get("stencil", 5))
    rows = pv_residual_table(traj, stencil)
    write_trajectory_csv(out / "trajectory.csv", traj)
    write_pv_csv(out / "pv_residual.csv", rows)
    rep = _base_report("simulate")
    rep.update(
        status=traj.status,
        n_samples=len(traj),
        final_t=to_pair(traj.t[-1]),
        final_lntau=to_pair(traj.ln_tau[-1]),
        invariant_drift=_drifts(traj),
        pv_params={k: to_pair(v) for k, v in vars(pv_params(cfg.theta)).items()},
        pv_residual=_pv_summary(rows),
        blowup_events=[],
        zero_certificates=[],
    )
    if traj.status == BLOWUP:
        ev = traj.event
        rep["blowup_events"].append({
            "t_star": to_pair(ev.t_star), "t_stop": to_pair(ev.t_stop),
            "indicator": ev.indicator, "min_step": ev.min_step,
        })
        rep["zero_certificates"].append(_zero_certificate(traj))
    write_json(out / "report.json", rep)
    return EXIT_BLOWUP if traj.status == BLOWUP else EXIT_OK


def verify_identities(n_states: int, n_z: int = 20, seed: int = 0, rhs=deformation_rhs) -> dict:
    """Max deviation of each algebraic identity over random valid states."""
    rng = np.random.default_rng(seed)
    worst = dict.fromkeys(THRESHOLDS, 0.0)
    for _ in range(n_states):
        st = random_state(rng)
        zs = 10 * np.exp(2j * np.pi * rng.uniform(size=n_z))
        worst["ZERO_CURVATURE"] = max(worst["ZERO_CURVATURE"], verify_zero_curvature(st, zs, rhs=rhs))

        closed = complex(miwa_residue(st))
        contour = contour_residue(lambda z: half_tr_B_squared(st, z), st.t, abs(st.t) / 2)
        scale = abs(np.trace(st.B0 @ st.B1) / st.t) + abs(st.B1[0, 0])
        worst["MIWA_RESIDUE"] = max(worst["MIWA_RESIDUE"], abs(closed - contour) / scale)

        lhs, rhs_ = xi_residue_identity(st)
        worst["XI_RESIDUE"] = max(worst["XI_RESIDUE"], abs(lhs - rhs_) / max(1.0, abs(rhs_)))
        worst["COORDINATE_RELATION"] = max(worst["COORDINATE_RELATION"], coordinate_relation_check(st))

        th1 = st.theta.theta1
        worst["TR_B1_SQUARED"] = max(worst["TR_B1_SQUARED"], abs(tr_B1_squared(st) - th1 * th1 / 2))

        u = u_of_state(st)
        ug = u_of_state(gauge_conjugate(st, 2, 3))
        worst["GAUGE_U"] = max(worst["GAUGE_U"], abs(ug - u) / max(1.0, abs(u)))
    return worst


def _broken_rhs(state):
    dB0, dB1 = deformation_rhs(state)
    return -dB0, dB1


def run_verify(cfg: RunConfig, out: Path, seed=None, broken_rhs: bool = False) -> int:
    n = int(cfg.verify.get("n_states", 1000))
    n_z = int(cfg.verify.get("n_z", 20))
    seed = int(cfg.verify.get("seed", 0) if seed is None else seed)
    rep = _base_report("verify")
    if n <= 0:
        rep.update(status="error", error={"code": "CONFIG_ERROR", "message": "n_states must be positive"})
        write_json(out / "verify.json", rep)
        return EXIT_CONFIG
    worst = verify_identities(n, n_z, seed, rhs=_broken_rhs if broken_rhs else deformation_rhs)
    failed = [k for k, v in worst.items() if not v < THRESHOLDS[k]]
    rep.update(
        status="ok" if not failed else "failed",
        n_states=n, n_z=n_z, seed=seed,
        max_deviation=worst, thresholds=THRESHOLDS, failed=failed,
    )
    write_json(out / "verify.json", rep)
    return EXIT_OK if not failed else EXIT_VERIFY


def run_monodromy(cfg: RunConfig, out: Path) -> int:
    n = int(cfg.monodromy.get("samples", 5))
    threshold = float(cfg.monodromy.get("drift_threshold", 1e-6))
    loop_cfg = LOOP_CONFIG
    if "rtol" in cfg.monodromy or "atol" in cfg.monodromy:
        from dataclasses import replace

        loop_cfg = replace(LOOP_CONFIG, rtol=cfg.monodromy.get("rtol", LOOP_CONFIG.rtol),
                           atol=cfg.monodromy.get("atol", LOOP_CONFIG.atol))
    traj = integrate_path(cfg.state0, cfg.path, cfg.integrator)
    idx = sorted(set(np.linspace(0, len(traj) - 1, max(1, n)).astype(int).tolist()))
    if traj.status == BLOWUP:
        idx = [i for i in idx if i < len(traj) - 1]
    reports = [monodromy_invariants(traj.state(i), loop_cfg) for i in idx]
    inv = np.array([r.invariants for r in reports])
    drift = float(np.max(np.abs(inv - inv[0]))) if len(inv) > 1 else 0.0
    rep = _base_report("monodromy")
    rep.update(
        status=traj.status, samples=[r.to_dict() for r in reports],
        isomonodromy_drift=drift, drift_threshold=threshold,
        certified=drift < threshold, caveat=CAVEAT,
    )
    write_json(out / "monodromy.json", rep)
    if traj.status == BLOWUP:
        return EXIT_BLOWUP
    return EXIT_OK if drift < threshold else EXIT_VERIFY


def run_tau_zeros(cfg: RunConfig, out: Path) -> int:
    iterations = int(cfg.tau_zeros.get("aim_iterations", 3))
    overshoot = float(cfg.tau_zeros.get("overshoot", 0.2))
    traj = drive_to_theta_point(cfg.state0, cfg.path, cfg.integrator, iterations, overshoot)
    rep = _base_report("tau-zeros")
    rep["final_path"] = [to_pair(w) for w in traj.path.waypoints]
    rep["zeros"] = []
    code = EXIT_OK
    if traj.status == BLOWUP:
        cert = _zero_certificate(traj)
        rep["zeros"].append(cert)
        if cert["status"] != "certified":
            code = EXIT_VERIFY
    rep["status"] = traj.status
    write_json(out / "tau_zeros.json", rep)
    return code


def run_identities(cfg: RunConfig, out: Path) -> int:
    st = cfg.state0
    lhs, rhs = xi_residue_identity(st)
    contour = contour_residue(lambda z: half_tr_B_squared(st, z), st.t, abs(st.t) / 2)
    th1 = st.theta.theta1
    zs = 10 * np.exp(2j * np.pi * np.arange(20) / 20)
    vals = {
        "miwa_residue": to_pair(miwa_residue(st)),
        "miwa_residue_contour": to_pair(contour),
        "xi_residue_lhs": to_pair(lhs),
        "xi_residue_rhs": to_pair(rhs),
        "coordinate_relation": coordinate_relation_check(st),
        "tr_B1_squared": to_pair(tr_B1_squared(st)),
        "theta1_squared_half": to_pair(th1 * th1 / 2),
        "zero_curvature": verify_zero_curvature(st, zs),
    }
    checks = {
        "ZERO_CURVATURE": vals["zero_curvature"],
        "MIWA_RESIDUE": abs(complex(miwa_residue(st)) - contour) / max(1e-300, abs(contour)),
        "XI_RESIDUE": abs(lhs - rhs) / max(1.0, abs(rhs)),
        "COORDINATE_RELATION": vals["coordinate_relation"],
        "TR_B1_SQUARED": abs(tr_B1_squared(st) - th1 * th1 / 2),
    }
    try:
        u = u_of_state(st)
        vals["u"] = to_pair(u)
        checks["GAUGE_U"] = abs(u_of_state(gauge_conjugate(st, 2, 3)) - u) / max(1.0, abs(u))
    except PVTauError as exc:
        vals["u"] = {"error": exc.code}
    failed = [k for k, v in checks.items() if not v < THRESHOLDS[k]]
    rep = _base_report("identities")
    rep.update(values=vals, deviations=checks, thresholds=THRESHOLDS, failed=failed,
               status="ok" if not failed else "failed")
    write_json(out / "identities.json", rep)
    return EXIT_OK if not failed else EXIT_VERIFY


COMMANDS = {
    "simulate": (run_simulate, "report.json"),
    "verify": (run_verify, "verify.json"),
    "monodromy": (run_monodromy, "monodromy.json"),
    "tau-zeros": (run_tau_zeros, "tau_zeros.json"),
    "identities": (run_identities, "identities.json"),
}


def _env(name, cast=str):
    v = os.environ.get(ENV_PREFIX + name.upper())
    return None if v is None else cast(v)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pvtau", description="Painleve V isomonodromic deformation engine")
    p.add_argument("--version", action="version", version=f"pvtau {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=_env("config"), help="JSON run configuration")
        sp.add_argument("--out", default=_env("out") or "pvtau-out", help="output directory")
        sp.add_argument("--seed", type=int, default=_env("seed", int))
        sp.add_argument("--rtol", type=float, default=_env("rtol", float))
        sp.add_argument("--atol", type=float, default=_env("atol", float))
        sp.add_argument("-v", "--verbose", action="store_true")
        if name == "verify":
            # negative control for the exit-code contract
            sp.add_argument("--break-rhs", action="store_true", default=bool(_env("break_rhs")),
                            help=argparse.SUPPRESS)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out = Path(args.out)
    fn, fname = COMMANDS[args.command]
    if not args.config:
        print("error: --config is required", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config, {"rtol": args.rtol, "atol": args.atol})
    except PVTauError as exc:
        _error_report(out, args.command, exc, fname)
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out.mkdir(parents=True, exist_ok=True)
    kwargs = {}
    if args.command == "verify":
        kwargs = {"seed": args.seed, "broken_rhs": args.break_rhs}
    try:
        return fn(cfg, out, **kwargs)
    except PVTauError as exc:
        _error_report(out, args.command, exc, fname)
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
