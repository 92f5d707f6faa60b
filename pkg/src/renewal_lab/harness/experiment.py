"""Multi-path experiments.

Paths are simulated in vectorized batches; each path draws from its own
substream keyed by ``(seed, path)`` so results are independent of batching
and of the number of workers.  Aggregates are always computed from the
per-path arrays laid out in path order.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..controller import ThetaBracket
from ..decisions import FrameBatch
from ..environments import EnvSpec, System, UniformBlocks, frames_from_uniforms, moments
from ..oracle import OracleError, OracleResult, oracle_bracket, resolve_theta_star
from ..policies import POLICY_NAMES, make_batch_policy

BLOCK_FRAMES = 512
MAX_BATCH_PATHS = 5000
# statistical slack used by every empirical-vs-bound comparison
SLACK_SE = 4.0


def geometric_checkpoints(K: int) -> tuple[int, ...]:
    pts = []
    k = 1
    while k <= K:
        pts.append(k)
        k *= 2
    if pts[-1] != K:
        pts.append(K)
    return tuple(pts)


@dataclass(frozen=True)
class ExperimentConfig:
    env: EnvSpec
    policies: tuple[str, ...] = ("proposed",)
    frames: int = 1000
    paths: int = 1
    bracket: ThetaBracket | None = None
    record_stride: int = 1
    checkpoints: tuple[int, ...] | None = None
    workers: int = 1
    trajectories: bool = False
    mc_samples: int = 1_000_000

    def __post_init__(self):
        if self.frames < 1:
            raise ValueError("frames must be >= 1")
        if self.paths < 1:
            raise ValueError("paths must be >= 1")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        for name in self.policies:
            if name not in POLICY_NAMES:
                raise ValueError(f"unknown policy {name!r}; expected one of {POLICY_NAMES}")
        cps = self.checkpoints
        if cps is None:
            object.__setattr__(self, "checkpoints", geometric_checkpoints(self.frames))
        else:
            # the final frame is always aggregated
            cps = tuple(sorted(set(int(k) for k in cps) | {self.frames}))
            if not cps or cps[0] < 1 or cps[-1] > self.frames:
                raise ValueError(f"checkpoints must lie in [1, {self.frames}]")
            object.__setattr__(self, "checkpoints", cps)

    @property
    def theta_bracket(self) -> ThetaBracket:
        return oracle_bracket(self.env, self.bracket)

    @property
    def t_min(self) -> float:
        return moments(self.env).t_min


@dataclass
class PathData:
    """Raw per-path values at each checkpoint (rows are paths, in order)."""

    checkpoints: np.ndarray
    theta: np.ndarray
    sum_r: np.ndarray
    sum_t: np.ndarray
    rejected: np.ndarray
    offered: np.ndarray
    trajectory_frames: np.ndarray | None = None
    traj_theta: np.ndarray | None = None
    traj_t: np.ndarray | None = None
    traj_r: np.ndarray | None = None
    traj_ratio: np.ndarray | None = None

    @property
    def ratio(self) -> np.ndarray:
        return self.sum_r / self.sum_t

    @staticmethod
    def concat(parts: list["PathData"]) -> "PathData":
        def cat(attr):
            vals = [getattr(p, attr) for p in parts]
            return None if vals[0] is None else np.concatenate(vals, axis=0)

        return PathData(
            parts[0].checkpoints,
            cat("theta"), cat("sum_r"), cat("sum_t"), cat("rejected"), cat("offered"),
            parts[0].trajectory_frames,
            cat("traj_theta"), cat("traj_t"), cat("traj_r"), cat("traj_ratio"),
        )


def simulate_paths(spec: EnvSpec, policy: str, start: int, stop: int, frames: int,
                   bracket: ThetaBracket, t_min: float, checkpoints, theta_star: float | None = None,
                   trajectories: bool = False, record_stride: int = 1) -> PathData:
    """Run paths ``start..stop-1`` of one policy and collect checkpoint data."""
    n = stop - start
    streams = [UniformBlocks(spec, i) for i in range(start, stop)]
    pol = make_batch_policy(policy, n, bracket, t_min, theta_star)
    cps = np.asarray(checkpoints, dtype=np.int64)
    cp_slot = {int(k): i for i, k in enumerate(cps)}
    theta_cp = np.empty((n, len(cps)))
    sum_r_cp = np.empty((n, len(cps)))
    sum_t_cp = np.empty((n, len(cps)))
    rejected = np.zeros(n, dtype=np.int64)
    offered = np.zeros(n, dtype=np.int64)
    cum_r = np.zeros(n)
    cum_t = np.zeros(n)
    track_reject = spec.system is System.C

    traj_frames = np.arange(0, frames, record_stride) if trajectories else None
    if trajectories:
        L = len(traj_frames)
        tr_theta, tr_t, tr_r, tr_ratio = (np.empty((n, L)) for _ in range(4))

    j = 0
    while j < frames:
        b = min(BLOCK_FRAMES, frames - j)
        block = np.stack([s.take(b) for s in streams], axis=0)
        for i in range(b):
            fb: FrameBatch = frames_from_uniforms(spec, block[:, i, :])
            theta_before = pol.theta if trajectories and j % record_stride == 0 else None
            ch = pol.act(fb)
            cum_r = cum_r + ch.r
            cum_t = cum_t + ch.t
            if track_reject:
                has = fb.task_type >= 1
                offered += has
                rejected += has & (ch.index == 0)
            if theta_before is not None:
                slot = j // record_stride
                tr_theta[:, slot] = theta_before
                tr_t[:, slot] = ch.t
                tr_r[:, slot] = ch.r
                tr_ratio[:, slot] = cum_r / cum_t
            j += 1
            slot = cp_slot.get(j)
            if slot is not None:
                theta_cp[:, slot] = pol.theta
                sum_r_cp[:, slot] = cum_r
                sum_t_cp[:, slot] = cum_t
    data = PathData(cps, theta_cp, sum_r_cp, sum_t_cp, rejected, offered)
    if trajectories:
        data.trajectory_frames = traj_frames
        data.traj_theta, data.traj_t, data.traj_r, data.traj_ratio = tr_theta, tr_t, tr_r, tr_ratio
    return data


def _simulate_job(args):
    return simulate_paths(*args)


def _stderr(x: np.ndarray) -> np.ndarray:
    n = x.shape[0]
    if n < 2:
        return np.full(x.shape[1:], np.nan)
    return x.std(axis=0, ddof=1) / math.sqrt(n)


@dataclass
class RunSummary:
    system: str
    policy: str
    theta_star: float
    n_paths: int
    checkpoints: np.ndarray
    mean_ratio: np.ndarray
    stderr_ratio: np.ndarray
    gap: np.ndarray
    stderr_gap: np.ndarray
    mse: np.ndarray
    stderr_mse: np.ndarray
    sum_ratio: np.ndarray
    stderr_sum_ratio: np.ndarray
    final_ratios: np.ndarray
    rejection_rate: float | None
    paths: PathData = field(repr=False)
    oracle: OracleResult | None = field(default=None, repr=False)

    @property
    def sum_gap(self) -> np.ndarray:
        """|theta* - sum_k E[R] / sum_k E[T]|, the quantity the theorems bound."""
        return np.abs(self.theta_star - self.sum_ratio)

    def at(self, k: int) -> int:
        hits = np.flatnonzero(self.checkpoints == k)
        if not len(hits):
            raise KeyError(f"{k} is not a checkpoint")
        return int(hits[0])


def summarize(data: PathData, theta_star: float, system: str, policy: str,
              oracle: OracleResult | None = None) -> RunSummary:
    ratio = data.ratio
    n = ratio.shape[0]
    gap = np.abs(theta_star - ratio)
    sq = (data.theta - theta_star) ** 2
    mean_r = data.sum_r.mean(axis=0)
    mean_t = data.sum_t.mean(axis=0)
    sum_ratio = mean_r / mean_t
    # delta method for a ratio of means
    resid = data.sum_r - sum_ratio * data.sum_t
    se_sum = _stderr(resid) / mean_t
    offered = int(data.offered.sum())
    rej = int(data.rejected.sum()) / offered if offered else None
    return RunSummary(
        system=system, policy=policy, theta_star=theta_star, n_paths=n,
        checkpoints=data.checkpoints,
        mean_ratio=ratio.mean(axis=0), stderr_ratio=_stderr(ratio),
        gap=gap.mean(axis=0), stderr_gap=_stderr(gap),
        mse=sq.mean(axis=0), stderr_mse=_stderr(sq),
        sum_ratio=sum_ratio, stderr_sum_ratio=se_sum,
        final_ratios=ratio[:, -1].copy(),
        rejection_rate=rej, paths=data, oracle=oracle,
    )


def _batches(paths: int, workers: int) -> list[tuple[int, int]]:
    size = min(MAX_BATCH_PATHS, max(1, math.ceil(paths / workers)))
    return [(s, min(s + size, paths)) for s in range(0, paths, size)]


def theta_star_for(cfg: ExperimentConfig) -> OracleResult:
    try:
        return resolve_theta_star(cfg.env, bracket=cfg.theta_bracket, mc_samples=cfg.mc_samples)
    except OracleError as exc:
        raise OracleError(f"cannot resolve theta* for {cfg.env.label()}: {exc}") from exc


def simulate(cfg: ExperimentConfig, policy: str, oracle: OracleResult | None = None) -> RunSummary:
    """All paths of one policy, aggregated at the configured checkpoints."""
    oracle = oracle or theta_star_for(cfg)
    jobs = [
        (cfg.env, policy, s, e, cfg.frames, cfg.theta_bracket, cfg.t_min, cfg.checkpoints,
         oracle.theta_star, cfg.trajectories, cfg.record_stride)
        for s, e in _batches(cfg.paths, cfg.workers)
    ]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(_simulate_job, jobs))
    else:
        parts = [simulate_paths(*job) for job in jobs]
    data = PathData.concat(parts)
    return summarize(data, oracle.theta_star, cfg.env.label(), policy, oracle)


def run_experiment(cfg: ExperimentConfig) -> dict[str, RunSummary]:
    """Every configured policy on the same path streams (common random numbers)."""
    oracle = theta_star_for(cfg)
    return {name: simulate(cfg, name, oracle) for name in cfg.policies}
