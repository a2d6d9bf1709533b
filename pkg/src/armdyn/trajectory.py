"""Joint trajectories: the sinusoidal test trajectory, CSV I/O and torque-profile errors.

CSV layout::

    t,q1..qn,qd1..qdn,qdd1..qddn[,tau1..taun]

UTF-8, LF line endings, values written with 17 significant digits.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import CsvFormatError, NonMonotoneTime, OutOfSpan, TimestampMismatch
from .kinematics import JointState


@dataclass(frozen=True, eq=False)
class TrajectorySample:
    t: float
    q: np.ndarray
    qd: np.ndarray
    qdd: np.ndarray
    tau: np.ndarray | None = None

    @property
    def state(self) -> JointState:
        return JointState(self.q, self.qd, self.qdd)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Samples stored column-wise: ``t`` has shape (N,), the rest (N, n)."""

    t: np.ndarray
    q: np.ndarray
    qd: np.ndarray
    qdd: np.ndarray
    tau: np.ndarray | None = None

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float).reshape(-1)
        arrays = [np.asarray(a, dtype=float) for a in (self.q, self.qd, self.qdd)]
        N = t.size
        n = arrays[0].shape[1] if arrays[0].ndim == 2 else 0
        for a in arrays:
            if a.shape != (N, n):
                raise ValueError(f"expected shape {(N, n)}, got {a.shape}")
        tau = None if self.tau is None else np.asarray(self.tau, dtype=float)
        if tau is not None and tau.shape != (N, n):
            raise ValueError(f"tau has shape {tau.shape}, expected {(N, n)}")
        if N > 1 and np.any(np.diff(t) <= 0):
            k = int(np.argmax(np.diff(t) <= 0)) + 1
            raise NonMonotoneTime("timestamps must be strictly increasing", row=k + 1)
        object.__setattr__(self, "t", t)
        for name, a in zip(("q", "qd", "qdd"), arrays):
            object.__setattr__(self, name, a)
        object.__setattr__(self, "tau", tau)

    @property
    def n(self) -> int:
        return self.q.shape[1]

    def __len__(self):
        return self.t.size

    def __getitem__(self, k) -> TrajectorySample:
        tau = None if self.tau is None else self.tau[k]
        return TrajectorySample(float(self.t[k]), self.q[k], self.qd[k], self.qdd[k], tau)

    def __iter__(self):
        return (self[k] for k in range(len(self)))

    @property
    def samples(self) -> list[TrajectorySample]:
        return list(self)

    def with_tau(self, tau) -> Trajectory:
        return Trajectory(self.t, self.q, self.qd, self.qdd, tau)

    @classmethod
    def from_samples(cls, samples) -> Trajectory:
        samples = list(samples)
        if not samples:
            raise ValueError("cannot infer joint count from an empty sample list")
        tau = None
        if samples[0].tau is not None:
            tau = np.array([s.tau for s in samples])
        return cls(
            np.array([s.t for s in samples]),
            np.array([s.q for s in samples]),
            np.array([s.qd for s in samples]),
            np.array([s.qdd for s in samples]),
            tau,
        )


def table1_trajectory(n: int, t: float) -> TrajectorySample:
    """Odd joints follow sin t, even joints cos t (1-based joint numbering)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    s, c = math.sin(t), math.cos(t)
    odd = np.arange(n) % 2 == 0  # joint 1, 3, 5, ...
    q = np.where(odd, s, c)
    qd = np.where(odd, c, -s)
    qdd = np.where(odd, -s, -c)
    return TrajectorySample(float(t), q, qd, qdd)


def table1_series(n: int, times) -> Trajectory:
    times = np.asarray(times, dtype=float)
    s, c = np.sin(times)[:, None], np.cos(times)[:, None]
    odd = (np.arange(n) % 2 == 0)[None, :]
    return Trajectory(
        times,
        np.where(odd, s, c),
        np.where(odd, c, -s),
        np.where(odd, -s, -c),
    )


def time_grid(t0: float, t1: float, dt: float) -> np.ndarray:
    """``t0 + k dt`` for every k with the result not past ``t1`` (allowing rounding)."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    if t1 < t0:
        raise ValueError("t1 must not precede t0")
    count = int(math.floor((t1 - t0) / dt + 1e-9)) + 1
    return t0 + dt * np.arange(count)


# --- CSV ------------------------------------------------------------------------


def csv_header(n: int, with_tau: bool) -> list[str]:
    cols = ["t"]
    for prefix in ("q", "qd", "qdd") + (("tau",) if with_tau else ()):
        cols += [f"{prefix}{i}" for i in range(1, n + 1)]
    return cols


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _parse_header(header) -> tuple[int, bool]:
    if not header or header[0] != "t":
        raise CsvFormatError("header must start with 't'", row=1)
    rest = len(header) - 1
    for with_tau, groups in ((False, 3), (True, 4)):
        if rest % groups == 0 and rest > 0:
            n = rest // groups
            if header == csv_header(n, with_tau):
                return n, with_tau
    raise CsvFormatError("header does not match t,q1..qn,qd1..qdn,qdd1..qddn[,tau1..taun]", row=1)


def load_csv(stream) -> Trajectory:
    """Read a trajectory CSV from a text stream, a path or a string of CSV data."""
    if isinstance(stream, str) and "\n" in stream:
        stream = io.StringIO(stream)
    if isinstance(stream, (str, bytes)) or hasattr(stream, "__fspath__"):
        with open(stream, newline="", encoding="utf-8") as fh:
            return load_csv(fh)
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise CsvFormatError("empty file: missing header", row=1) from None
    header = [h.strip() for h in header]
    n, with_tau = _parse_header(header)
    rows = []
    for rownum, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise CsvFormatError(f"expected {len(header)} columns, got {len(row)}", row=rownum)
        values = []
        for name, cell in zip(header, row):
            try:
                x = float(cell)
            except ValueError:
                raise CsvFormatError(f"not a number: {cell!r}", row=rownum, column=name) from None
            if not math.isfinite(x):
                raise CsvFormatError(f"non-finite value {cell!r}", row=rownum, column=name)
            values.append(x)
        if rows and values[0] <= rows[-1][0]:
            raise NonMonotoneTime("timestamps must be strictly increasing", row=rownum, column="t")
        rows.append(values)
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    blocks = [data[:, 1 + k * n: 1 + (k + 1) * n] for k in range(4 if with_tau else 3)]
    return Trajectory(data[:, 0], *blocks[:3], blocks[3] if with_tau else None)


def save_csv(traj: Trajectory, stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    with_tau = traj.tau is not None
    writer.writerow(csv_header(traj.n, with_tau))
    parts = [traj.t[:, None], traj.q, traj.qd, traj.qdd] + ([traj.tau] if with_tau else [])
    for row in np.hstack(parts):
        writer.writerow([fmt(x) for x in row])


# --- comparison -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ErrorProfile:
    """Per-sample torque difference plus per-joint max |error| and RMS."""

    trajectory: Trajectory
    max_abs: np.ndarray
    rms: np.ndarray

    def summary(self) -> dict:
        return {
            "samples": len(self.trajectory),
            "max_abs": [float(x) for x in self.max_abs],
            "rms": [float(x) for x in self.rms],
            "overall_max_abs": float(self.max_abs.max()) if self.max_abs.size else 0.0,
        }


def error_profile(a: Trajectory, b: Trajectory) -> ErrorProfile:
    """``tau_a - tau_b`` sample by sample; timestamps must match exactly."""
    if a.tau is None or b.tau is None:
        raise ValueError("both trajectories need torque columns")
    if a.n != b.n:
        raise TimestampMismatch(f"joint counts differ: {a.n} vs {b.n}")
    if len(a) != len(b) or not np.array_equal(a.t, b.t):
        raise TimestampMismatch("timestamps differ; resample one trajectory first")
    err = a.tau - b.tau
    if len(a):
        max_abs = np.max(np.abs(err), axis=0)
        rms = np.sqrt(np.mean(err * err, axis=0))
    else:
        max_abs = rms = np.zeros(a.n)
    return ErrorProfile(a.with_tau(err), max_abs, rms)


def resample_linear(traj: Trajectory, timestamps) -> Trajectory:
    """Componentwise linear interpolation onto ``timestamps``."""
    ts = np.asarray(timestamps, dtype=float).reshape(-1)
    if len(traj) == 0:
        raise OutOfSpan("cannot resample an empty trajectory")
    if ts.size and (ts.min() < traj.t[0] or ts.max() > traj.t[-1]):
        raise OutOfSpan(f"timestamps must lie within [{traj.t[0]}, {traj.t[-1]}]")

    def interp(block):
        if block is None:
            return None
        return np.column_stack([np.interp(ts, traj.t, block[:, j]) for j in range(block.shape[1])]) \
            if block.shape[1] else np.zeros((ts.size, 0))

    return Trajectory(ts, interp(traj.q), interp(traj.qd), interp(traj.qdd), interp(traj.tau))
