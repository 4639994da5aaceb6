"""Command-line driver: run schemes, sweep parameters, check invariants.

Artifact layout per run directory:
    trajectory.csv   slot,uav,x_m,y_m           (includes the slot-0 start)
    rates.csv        slot,phase,sinr_bob,sinr_eve,secrecy_rate
    sensing.csv      slot,target,beampattern_gain,threshold,feasible
    summary.json     scenario echo, per-scheme metrics + solver statistics
    plan.npz         the persisted plan (waypoints, covariances, labels)

CSV floats are written with ``repr(float(x))`` so identical (scenario, seed)
inputs give byte-identical bodies; wall-clock columns live only in the sweep
CSV and in summary.json.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import checks, metrics
from .baselines import SCHEMES, evaluate_scheme
from .scenario import (ScenarioConfig, _from_plain_dict, _to_plain_dict,
                       default_scenario, load_scenario, validate_scenario)
from .sensing import SensingInfeasibleError
from .trajectory import Trajectory

SWEEP_PARAMETERS = ("task_duration", "phi", "beampattern_threshold",
                    "p_max_alice", "p_max_jack", "n_antennas")

SWEEP_COLUMNS = ("scheme", "parameter", "value", "asr", "sum_secrecy",
                 "min_beampattern_gain", "outer_iters", "wall_seconds",
                 "status")


def _fmt(x) -> str:
    """Deterministic cell formatting: repr for floats, '' for missing."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if np.isnan(x):
        return ""
    return repr(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if np.isfinite(x) else None
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


# ---------------------------------------------------------------------------
# sweep parameters


@dataclass(frozen=True)
class SweepSpec:
    """One swept scenario knob, the values to try, and the schemes to run."""

    parameter: str
    values: tuple[float, ...]
    schemes: tuple[str, ...]
    seed: int = 0

    def __post_init__(self):
        if self.parameter not in SWEEP_PARAMETERS:
            raise ValueError(f"unknown sweep parameter {self.parameter!r}; "
                             f"choose from {SWEEP_PARAMETERS}")
        for s in self.schemes:
            if s not in SCHEMES:
                raise ValueError(f"unknown scheme {s!r}; choose from {SCHEMES}")
        for v in self.values:
            if not np.isfinite(v):
                raise ValueError(f"sweep value {v!r} is not finite")


def apply_sweep_value(cfg: ScenarioConfig, parameter: str, value: float):
    """New config with one knob changed; validated before use."""
    if parameter == "task_duration":
        n = int(round(value / cfg.slot_duration))
        out = replace(cfg, task_duration=float(value), n_slots=n)
    elif parameter == "phi":
        out = replace(cfg, residual_jam_bob=float(value),
                      residual_sense_bob=float(value))
    elif parameter == "beampattern_threshold":
        out = replace(cfg, beampattern_threshold=float(value))
    elif parameter == "p_max_alice":
        out = replace(cfg, p_max={**cfg.p_max, "alice": float(value)})
    elif parameter == "p_max_jack":
        out = replace(cfg, p_max={**cfg.p_max, "jack": float(value)})
    elif parameter == "n_antennas":
        out = replace(cfg, n_antennas=int(round(value)))
    else:
        raise ValueError(f"unknown sweep parameter {parameter!r}")
    validate_scenario(out)
    return out


# ---------------------------------------------------------------------------
# plan persistence and round-trip


def save_plan(path, sol) -> None:
    np.savez_compressed(
        path,
        waypoints_alice=sol.traj_alice.waypoints,
        altitude_alice=np.float64(sol.traj_alice.altitude),
        waypoints_jack=sol.traj_jack.waypoints,
        altitude_jack=np.float64(sol.traj_jack.altitude),
        w_a=sol.plan.w_a, w_j=sol.plan.w_j, r_r=sol.plan.r_r,
        slot_labels=np.asarray(sol.slot_labels, dtype="U3"),
        assignment=np.asarray(sol.assignment, dtype=np.int64),
    )


def load_plan(path) -> dict:
    with np.load(path) as z:
        return {
            "traj_alice": Trajectory(z["waypoints_alice"],
                                     float(z["altitude_alice"])),
            "traj_jack": Trajectory(z["waypoints_jack"],
                                    float(z["altitude_jack"])),
            "w_a": z["w_a"], "w_j": z["w_j"], "r_r": z["r_r"],
            "slot_labels": [str(s) for s in z["slot_labels"]],
            "assignment": z["assignment"],
        }


def rederive_report(cfg: ScenarioConfig, plan: dict) -> metrics.MetricsReport:
    """Recompute every emitted metric from the persisted plan alone."""
    return metrics.evaluate(cfg, plan["traj_alice"], plan["traj_jack"],
                            plan["w_a"], plan["w_j"], plan["r_r"],
                            slot_labels=plan["slot_labels"],
                            assignment=plan["assignment"])


# ---------------------------------------------------------------------------
# artifact writers


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_trajectory_csv(path, sol) -> None:
    rows = []
    for uav, traj in (("alice", sol.traj_alice), ("jack", sol.traj_jack)):
        for slot, (x, y) in enumerate(traj.waypoints):
            rows.append([slot, uav, _fmt(x), _fmt(y)])
    _write_csv(path, ["slot", "uav", "x_m", "y_m"], rows)


def write_rates_csv(path, sol) -> None:
    rep = sol.report
    rows = [[s + 1, rep.slot_labels[s], _fmt(rep.sinr_bob[s]),
             _fmt(rep.sinr_eve[s]), _fmt(rep.secrecy[s])]
            for s in range(len(rep.slot_labels))]
    _write_csv(path, ["slot", "phase", "sinr_bob", "sinr_eve",
                      "secrecy_rate"], rows)


def write_sensing_csv(path, sol, cfg: ScenarioConfig) -> None:
    rep = sol.report
    tol = cfg.algo.solver_tol
    rows = []
    for s, label in enumerate(rep.slot_labels):
        if label != metrics.SCS:
            continue
        for t in range(len(cfg.targets)):
            gain = float(rep.beampattern[s, t])
            rows.append([s + 1, t + 1, _fmt(gain),
                         _fmt(cfg.beampattern_threshold),
                         _fmt(gain >= cfg.beampattern_threshold - tol)])
    _write_csv(path, ["slot", "target", "beampattern_gain", "threshold",
                      "feasible"], rows)


def scheme_summary(sol) -> dict:
    rep = sol.report
    out = rep.summary_dict()
    out["bcd_history"] = list(sol.asr_history)
    assignment = None
    if sol.sensing is not None:
        assignment = {str(t + 1): list(slots)
                      for t, slots in enumerate(sol.sensing.slots_by_target)}
    out["sensing_assignment"] = assignment
    out["solver"] = {k: v for k, v in sol.extras.items() if k != "scheme"}
    out["outer_iters"] = sol.extras.get("outer_iters")
    out["wall_seconds"] = sol.extras.get("wall_seconds")
    return out


def write_run_artifacts(out_dir, sol, cfg: ScenarioConfig, seed: int) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(out_dir / "trajectory.csv", sol)
    write_rates_csv(out_dir / "rates.csv", sol)
    write_sensing_csv(out_dir / "sensing.csv", sol, cfg)
    save_plan(out_dir / "plan.npz", sol)
    summary = {
        "scenario": _to_plain_dict(cfg),
        "seed": seed,
        "status": "ok",
        "schemes": {sol.extras.get("scheme", "scs_proposed"):
                    scheme_summary(sol)},
    }
    _write_json(out_dir / "summary.json", summary)


def _write_json(path, payload) -> None:
    Path(path).write_text(json.dumps(_jsonable(payload), indent=2,
                                     sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# subcommands


def cmd_run(args) -> int:
    cfg = (load_scenario(args.scenario) if args.scenario
           else default_scenario())
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    schemes = list(SCHEMES) if args.all_schemes else [args.scheme]
    aggregate = {"scenario": _to_plain_dict(cfg), "seed": args.seed,
                 "status": "ok", "schemes": {}}
    try:
        for scheme in schemes:
            sol = evaluate_scheme(scheme, cfg)
            sub = out / scheme if args.all_schemes else out
            write_run_artifacts(sub, sol, cfg, args.seed)
            aggregate["schemes"][scheme] = scheme_summary(sol)
    except SensingInfeasibleError as exc:
        aggregate["status"] = "infeasible"
        aggregate["error"] = str(exc)
        aggregate["max_attainable_gain"] = exc.max_gain
        aggregate["beampattern_threshold"] = exc.threshold
        _write_json(out / "summary.json", aggregate)
        print(f"infeasible: {exc}", file=sys.stderr)
        return 2
    if args.all_schemes:
        _write_json(out / "summary.json", aggregate)
    for scheme, block in aggregate["schemes"].items():
        print(f"{scheme}: asr={block['asr']:.6f} feasible={block['feasible']}")
    return 0


def _sweep_point(payload) -> dict:
    cfg_dict, scheme, parameter, value, int_value = payload
    row = {"scheme": scheme, "parameter": parameter,
           "value": _fmt(int(value)) if int_value else _fmt(value)}
    try:
        cfg = apply_sweep_value(_from_plain_dict(cfg_dict), parameter, value)
        sol = evaluate_scheme(scheme, cfg)
        summ = sol.report.summary_dict()
        row.update(
            asr=_fmt(summ["asr"]), sum_secrecy=_fmt(summ["sum_secrecy"]),
            min_beampattern_gain=_fmt(summ["min_assigned_gain"]),
            outer_iters=_fmt(sol.extras.get("outer_iters")),
            wall_seconds=_fmt(sol.extras.get("wall_seconds")),
            status="ok" if summ["feasible"] else "evaluated-infeasible")
    except Exception as exc:  # recorded per-row; the sweep continues
        row.update(asr="", sum_secrecy="", min_beampattern_gain="",
                   outer_iters="", wall_seconds="",
                   status=f"{type(exc).__name__}: {exc}")
    return row


def run_sweep(cfg: ScenarioConfig, spec: SweepSpec, jobs: int = 1):
    """Rows (dicts keyed by SWEEP_COLUMNS) in (scheme, value) input order."""
    cfg_dict = _to_plain_dict(cfg)
    payloads = [(cfg_dict, scheme, spec.parameter, float(v),
                 spec.parameter == "n_antennas")
                for scheme in spec.schemes for v in spec.values]
    if jobs > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_point, payloads))
    else:
        rows = [_sweep_point(p) for p in payloads]
    return rows


def cmd_sweep(args) -> int:
    cfg = (load_scenario(args.scenario) if args.scenario
           else default_scenario())
    schemes = tuple(SCHEMES) if args.all_schemes else (args.scheme,)
    values = tuple(float(v) for v in args.sweep_values.split(",") if v)
    spec = SweepSpec(parameter=args.sweep_param, values=values,
                     schemes=schemes, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = run_sweep(cfg, spec, jobs=args.jobs)
    _write_csv(out / "sweep.csv", list(SWEEP_COLUMNS),
               [[row[c] for c in SWEEP_COLUMNS] for row in rows])
    bad = [r for r in rows if not r["status"].startswith(("ok", "evaluated"))]
    for row in bad:
        print(f"{row['scheme']} {row['parameter']}={row['value']}: "
              f"{row['status']}", file=sys.stderr)
    print(f"wrote {len(rows)} rows to {out / 'sweep.csv'}"
          + (f" ({len(bad)} failed)" if bad else ""))
    return 0


def cmd_validate(args) -> int:
    try:
        cfg = (load_scenario(args.scenario) if args.scenario
               else default_scenario())
    except (ValueError, KeyError) as exc:
        print(f"[FAIL] scenario-valid: {exc}")
        return 1
    results = checks.run_all(cfg, seed=args.seed)
    failed = 0
    for name, ok, detail in results:
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        failed += 0 if ok else 1
    if failed:
        print(f"{failed} of {len(results)} checks failed")
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="duosec",
        description="Dual-UAV secure-ISAC planner: run schemes, sweep "
                    "scenario knobs, and validate numerical invariants.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_required):
        p.add_argument("--scenario", default=None,
                       help="scenario JSON (default: built-in reference "
                            "configuration)")
        p.add_argument("--seed", type=int, default=0)
        if out_required:
            p.add_argument("--out", required=True, help="output directory")

    run = sub.add_parser("run", help="run one scheme, write artifacts")
    common(run, out_required=True)
    run.add_argument("--scheme", default="scs_proposed", choices=SCHEMES)
    run.add_argument("--all-schemes", action="store_true",
                     help="run every scheme into per-scheme subdirectories")
    run.set_defaults(fn=cmd_run)

    sweep = sub.add_parser("sweep", help="sweep one scenario knob")
    common(sweep, out_required=True)
    sweep.add_argument("--scheme", default="scs_proposed", choices=SCHEMES)
    sweep.add_argument("--all-schemes", action="store_true")
    sweep.add_argument("--sweep-param", required=True,
                       choices=SWEEP_PARAMETERS)
    sweep.add_argument("--sweep-values", required=True,
                       help="comma-separated numeric values")
    sweep.add_argument("--jobs", type=int, default=1,
                       help="concurrent sweep points")
    sweep.set_defaults(fn=cmd_sweep)

    val = sub.add_parser("validate", help="run the invariant checks")
    common(val, out_required=False)
    val.set_defaults(fn=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except SystemExit:
        raise
    except Exception as exc:
        traceback.print_exc()
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
