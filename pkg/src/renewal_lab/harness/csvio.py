"""CSV emission.

Fixed column orders, UTF-8, ``\\n`` line endings and ``repr`` floats so that
values round-trip exactly and identical runs produce identical bytes.
"""

from __future__ import annotations

import csv
import os
from pathlib import Path

import numpy as np

from .experiment import PathData, RunSummary

TRAJECTORY_COLUMNS = ("frame", "theta", "t", "r", "cum_ratio")
SUMMARY_COLUMNS = ("checkpoint", "mean_ratio", "gap", "mse", "stderr_ratio", "stderr_mse", "n_paths")
SUMS_COLUMNS = ("checkpoint", "sum_ratio", "sum_gap", "stderr_sum_ratio", "n_paths")
BOUND_COLUMNS = ("checkpoint", "bound_name", "empirical", "bound", "slack")
PATH_COLUMNS = ("path", "checkpoint", "theta", "sum_r", "sum_t", "cum_ratio")
PROBE_COLUMNS = ("p", "delta", "checkpoint", "theta_star", "mean_ratio", "gap", "stderr_gap", "sum_gap")
FINAL_COLUMNS = ("policy", "n_paths", "theta_star", "mean_final_ratio", "stderr_final_ratio", "final_gap",
                 "rejection_rate")


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    if x is None:
        return ""
    return repr(float(x))


def write_rows(path: str | os.PathLike, columns, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_rows(path: str | os.PathLike) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def write_summary(path, s: RunSummary) -> Path:
    rows = zip(s.checkpoints, s.mean_ratio, s.gap, s.mse, s.stderr_ratio, s.stderr_mse,
               [s.n_paths] * len(s.checkpoints))
    return write_rows(path, SUMMARY_COLUMNS, rows)


def write_sums(path, s: RunSummary) -> Path:
    rows = zip(s.checkpoints, s.sum_ratio, s.sum_gap, s.stderr_sum_ratio, [s.n_paths] * len(s.checkpoints))
    return write_rows(path, SUMS_COLUMNS, rows)


def write_bounds(path, reports) -> Path:
    rows = []
    for rep in reports:
        for k, e, b, sl in zip(rep.checkpoints, rep.empirical, rep.bound, rep.slack):
            rows.append((k, rep.name, e, b, sl))
    rows.sort(key=lambda r: (int(r[0]), r[1]))
    return write_rows(path, BOUND_COLUMNS, rows)


def write_path_checkpoints(path, data: PathData) -> Path:
    def rows():
        for i in range(data.theta.shape[0]):
            for j, k in enumerate(data.checkpoints):
                yield (i, k, data.theta[i, j], data.sum_r[i, j], data.sum_t[i, j], data.sum_r[i, j] / data.sum_t[i, j])

    return write_rows(path, PATH_COLUMNS, rows())


def read_path_checkpoints(path) -> PathData:
    rows = read_rows(path)
    paths = sorted({int(r["path"]) for r in rows})
    cps = sorted({int(r["checkpoint"]) for r in rows})
    pi = {p: i for i, p in enumerate(paths)}
    ci = {c: j for j, c in enumerate(cps)}
    shape = (len(paths), len(cps))
    theta, sum_r, sum_t = np.empty(shape), np.empty(shape), np.empty(shape)
    for r in rows:
        i, j = pi[int(r["path"])], ci[int(r["checkpoint"])]
        theta[i, j] = float(r["theta"])
        sum_r[i, j] = float(r["sum_r"])
        sum_t[i, j] = float(r["sum_t"])
    z = np.zeros(len(paths), dtype=np.int64)
    return PathData(np.array(cps, dtype=np.int64), theta, sum_r, sum_t, z, z.copy())


def write_trajectories(directory, data: PathData, prefix: str = "path") -> list[Path]:
    if data.traj_theta is None:
        return []
    out = []
    n = data.traj_theta.shape[0]
    width = max(4, len(str(n - 1)))
    for i in range(n):
        rows = zip(data.trajectory_frames, data.traj_theta[i], data.traj_t[i], data.traj_r[i], data.traj_ratio[i])
        out.append(write_rows(Path(directory) / f"{prefix}_{i:0{width}d}.csv", TRAJECTORY_COLUMNS, rows))
    return out


def write_probe(path, rows) -> Path:
    return write_rows(path, PROBE_COLUMNS, [
        (r.p, r.delta, r.checkpoint, r.theta_star, r.mean_ratio, r.gap, r.stderr_gap, r.sum_gap) for r in rows
    ])


def write_final(path, summaries: dict[str, RunSummary]) -> Path:
    rows = []
    for name, s in summaries.items():
        rows.append((name, s.n_paths, s.theta_star, s.mean_ratio[-1], s.stderr_ratio[-1], s.gap[-1],
                     s.rejection_rate))
    return write_rows(path, FINAL_COLUMNS, rows)
