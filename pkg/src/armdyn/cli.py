"""Command-line interface.

Exit codes: 0 success, 1 verification failure, 2 input/usage error,
3 data-alignment error.  ``-`` stands for stdin/stdout wherever a path is
expected.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import math
import sys

import numpy as np

from . import bearing, oracles
from .batch import bearing_torque_batch
from .dynamics import METHODS, inverse_dynamics_batch
from .errors import ArmDynError, ModelError, OutOfSpan, TimestampMismatch, TrajectoryError
from .kinematics import JointState, fk_poe
from .model import PlatformModel, as_robot, load_model, parse_model
from .trajectory import (
    Trajectory,
    error_profile,
    fmt,
    load_csv,
    resample_linear,
    save_csv,
    table1_series,
    table1_trajectory,
    time_grid,
)

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_ALIGN = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _read_model(path: str, lenient: bool):
    if path == "-":
        return parse_model(sys.stdin.buffer, strict=not lenient)
    return load_model(path, strict=not lenient)


@contextlib.contextmanager
def _text_in(path: str):
    if path == "-":
        yield sys.stdin
    else:
        with open(path, newline="", encoding="utf-8") as fh:
            yield fh


@contextlib.contextmanager
def _text_out(path: str):
    if path == "-":
        yield sys.stdout
        sys.stdout.flush()
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh


def _read_traj(path: str) -> Trajectory:
    with _text_in(path) as fh:
        return load_csv(fh)


def _trajectory(args, n: int) -> Trajectory:
    if args.traj == "table1":
        if not args.dt > 0:
            raise UsageError("--dt must be positive")
        if args.t1 < args.t0:
            raise UsageError("--t1 must not precede --t0")
        return table1_series(n, time_grid(args.t0, args.t1, args.dt))
    traj = _read_traj(args.traj)
    if traj.n != n:
        raise UsageError(f"trajectory has {traj.n} joints, model has {n}")
    return traj


def _need_platform(model) -> PlatformModel:
    if not isinstance(model, PlatformModel):
        raise UsageError("model has no 'platform' block")
    return model


# --- commands -----------------------------------------------------------------


def cmd_fk(args) -> int:
    robot = as_robot(_read_model(args.model, args.lenient))
    rows = []
    times = None
    if args.csv is not None:
        with _text_in(args.csv) as fh:
            reader = csv.DictReader(fh)
            cols = [f"q{i}" for i in range(1, robot.n + 1)]
            if reader.fieldnames is None or not set(cols) <= set(reader.fieldnames):
                raise UsageError(f"--csv input needs columns {', '.join(cols)}")
            has_t = "t" in reader.fieldnames
            times = [] if has_t else None
            qs = []
            for row in reader:
                try:
                    qs.append([float(row[c]) for c in cols])
                    if has_t:
                        times.append(float(row["t"]))
                except (TypeError, ValueError):
                    raise UsageError(f"bad numeric value on data row {len(qs) + 1}") from None
    else:
        q = args.q if args.q is not None else [0.0] * robot.n
        if len(q) != robot.n:
            raise UsageError(f"--q needs {robot.n} values, got {len(q)}")
        qs = [q]
    for q in qs:
        T = fk_poe(robot, np.array(q), args.frame)
        rows.append(list(T.translation) + list(T.rotation.ravel()))
    header = ["x", "y", "z"] + [f"r{i}{j}" for i in range(1, 4) for j in range(1, 4)]
    with _text_out(args.out) as out:
        w = csv.writer(out, lineterminator="\n")
        w.writerow((["t"] if times is not None else []) + header)
        for k, row in enumerate(rows):
            w.writerow(([fmt(times[k])] if times is not None else []) + [fmt(x) for x in row])
    return EXIT_OK


def cmd_idyn(args) -> int:
    robot = as_robot(_read_model(args.model, args.lenient))
    robot.require_inertia()
    traj = _trajectory(args, robot.n)
    tau = inverse_dynamics_batch(robot, traj.q, traj.qd, traj.qdd, args.method)
    with _text_out(args.out) as out:
        save_csv(traj.with_tau(tau), out)
    return EXIT_OK


PLATFORM_HEADER = ["t", "Tx", "Ty", "Tz", "Tx_dyn", "Ty_dyn", "Tz_dyn", "Tx_grav", "Ty_grav", "Tz_grav"]


def cmd_platform(args) -> int:
    platform = _need_platform(_read_model(args.model, args.lenient))
    traj = _trajectory(args, platform.arm.n)
    dyn, grav = bearing_torque_batch(platform, traj.q, traj.qd, traj.qdd, args.translational_momentum)
    table = np.hstack([traj.t[:, None], dyn + grav, dyn, grav])
    with _text_out(args.out) as out:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(PLATFORM_HEADER)
        for row in table:
            w.writerow([fmt(x) for x in row])
    return EXIT_OK


def cmd_compare(args) -> int:
    a, b = _read_traj(args.a), _read_traj(args.b)
    if args.resample:
        b = resample_linear(b, a.t)
    prof = error_profile(a, b)
    with _text_out(args.out) as out:
        save_csv(prof.trajectory, out)
    summary = json.dumps(prof.summary(), sort_keys=True)
    if args.summary:
        with _text_out(args.summary) as fh:
            fh.write(summary + "\n")
    else:
        print(summary, file=sys.stderr)
    return EXIT_OK


def _platform_csv_report(platform, path, include_tm, tol) -> oracles.OracleReport:
    with _text_in(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != PLATFORM_HEADER:
            raise UsageError(f"{path}: not a platform torque CSV")
        try:
            rows = np.array([[float(x) for x in r] for r in reader if r], dtype=float).reshape(-1, len(PLATFORM_HEADER))
        except ValueError:
            raise UsageError(f"{path}: bad numeric value") from None
    n = platform.arm.n
    rep = oracles.fd_momentum_check(
        platform, lambda t: table1_trajectory(n, t), rows[:, 0], tol=tol,
        include_translational_momentum=include_tm, dynamic_fn=lambda *_: rows[:, 4:7],
    )
    return oracles.OracleReport("platform_csv_fd_momentum", rep.max_abs_error, rep.rel_error, tol, rep.passed,
                                {"samples": len(rows), "source": path})


def _torques_with_fault(model, q, qd, qdd):
    # deliberate +1 N m on joint 3, used to show that the power-balance check bites
    tau = inverse_dynamics_batch(model, q, qd, qdd)
    tau[:, min(2, tau.shape[1] - 1)] += 1.0
    return tau


def cmd_verify(args) -> int:
    model = _read_model(args.model, args.lenient)
    robot = as_robot(model)
    robot.require_inertia()
    if not args.dt > 0:
        raise UsageError("--dt must be positive")
    suites = ("arm", "platform") if args.suite == "all" else (args.suite,)
    platform = _need_platform(model) if "platform" in suites else None
    times = time_grid(0.0, args.t1, args.dt)
    n = robot.n

    def traj(t):
        return table1_trajectory(n, t)

    reports = []
    if "arm" in suites:
        reports.append(oracles.equivalence_check(robot, count=args.states, seed=0, tol=1e-8))
        reports.append(oracles.mass_matrix_check(robot, count=max(1, args.states // 4), seed=1, tol=1e-10))
        torque_fn = _torques_with_fault if args.inject_fault else None
        reports.append(oracles.power_balance_check(robot, traj, times, tol=1e-5, torque_fn=torque_fn))
    if "platform" in suites:
        tm = args.translational_momentum
        dyn_fn = None
        if args.inject_fault:
            dyn_fn = lambda q, qd, qdd: -bearing_torque_batch(platform, q, qd, qdd, tm)[0]  # noqa: E731
        reports.append(oracles.fd_momentum_check(platform, traj, times, tol=1e-5,
                                                 include_translational_momentum=tm, dynamic_fn=dyn_fn))
        static = bearing.total_bearing_torque(platform, JointState.zeros(n), tm)
        zero = float(np.max(np.abs(static.dynamic)))
        reports.append(oracles.OracleReport("static_arm_zero_dynamic", zero, zero, 0.0, zero == 0.0,
                                            {"gravitational": static.gravitational.tolist()}))
        if args.against_csv:
            reports.append(_platform_csv_report(platform, args.against_csv, tm, 1e-5))
    with _text_out(args.out) as out:
        for rep in reports:
            out.write(rep.to_json() + "\n")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_VERIFY


# --- parser --------------------------------------------------------------------


def _add_traj_args(p):
    p.add_argument("--traj", default="table1", help="'table1' or a trajectory CSV path ('-' for stdin)")
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--t1", type=float, default=10.0)
    p.add_argument("--dt", type=float, default=1e-3)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="armdyn", description=__doc__.splitlines()[0])
    parser.add_argument("--lenient", action="store_true", help="warn instead of failing on unknown model fields")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fk", help="forward kinematics by product of exponentials")
    p.add_argument("model")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--q", type=float, nargs="+", help="joint angles (rad); default all zero")
    src.add_argument("--csv", help="CSV with columns q1..qn (and optionally t)")
    p.add_argument("--frame", type=int, default=None, help="1-based frame index (default: last)")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_fk)

    p = sub.add_parser("idyn", help="joint torques along a trajectory")
    p.add_argument("model")
    p.add_argument("--method", choices=METHODS, default="dh-recursive")
    _add_traj_args(p)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_idyn)

    p = sub.add_parser("platform", help="torque at the air bearing along a trajectory")
    p.add_argument("model")
    _add_traj_args(p)
    p.add_argument("--translational-momentum", action="store_true",
                   help="include the m r x r' term in the link angular momentum")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_platform)

    p = sub.add_parser("compare", help="torque error profile a - b")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--resample", action="store_true", help="interpolate b onto a's timestamps")
    p.add_argument("--out", default="-")
    p.add_argument("--summary", help="write the JSON summary here instead of stderr")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("verify", help="run the numerical oracles")
    p.add_argument("model")
    p.add_argument("--suite", choices=("arm", "platform", "all"), default="all")
    p.add_argument("--states", type=int, default=200, help="random states for the equivalence check")
    p.add_argument("--t1", type=float, default=2 * math.pi, help="length of the sinusoidal test trajectory")
    p.add_argument("--dt", type=float, default=0.05)
    p.add_argument("--translational-momentum", action="store_true")
    p.add_argument("--against-csv", help="also check the dynamic columns of a 'platform --traj table1' CSV")
    p.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (TimestampMismatch, OutOfSpan) as exc:
        print(f"armdyn: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ALIGN
    except (ModelError, TrajectoryError, UsageError, ArmDynError, OSError, ValueError) as exc:
        print(f"armdyn: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
