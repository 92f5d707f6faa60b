"""Projected Robbins-Monro controller for the reward-per-unit-time ratio.

Each frame the controller best-responds to its current ratio estimate
``theta`` and then moves ``theta`` along the observed innovation
``r - theta * t`` with stepsize ``1 / ((k + 2) * t_min)``, projecting back
onto the bracket ``[theta_min, theta_max]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np

from .decisions import Decision, DecisionSet, best_response


@dataclass(frozen=True)
class ThetaBracket:
    theta_min: float
    theta_max: float

    def __post_init__(self):
        if not (math.isfinite(self.theta_min) and math.isfinite(self.theta_max)):
            raise ValueError("bracket endpoints must be finite")
        if self.theta_min > self.theta_max:
            raise ValueError(f"empty bracket [{self.theta_min}, {self.theta_max}]")

    def clamp(self, x):
        """Projection onto the bracket.  Works elementwise on arrays."""
        if isinstance(x, np.ndarray):
            return np.minimum(np.maximum(x, self.theta_min), self.theta_max)
        return min(max(x, self.theta_min), self.theta_max)

    def __contains__(self, x) -> bool:
        return self.theta_min <= x <= self.theta_max


def default_bracket(t_min: float, t_max: float, r_min: float, r_max: float) -> ThetaBracket:
    """Bracket guaranteed to contain the optimal ratio given the moment bounds."""
    if not t_min > 0:
        raise ValueError(f"t_min must be positive, got {t_min!r}")
    if t_min > t_max:
        raise ValueError("need t_min <= t_max")
    if r_min > r_max:
        raise ValueError("need r_min <= r_max")
    return ThetaBracket(
        min(r_min / t_min, r_min / t_max),
        max(r_max / t_min, r_max / t_max),
    )


def stepsize(k: int, t_min: float) -> float:
    return 1.0 / ((k + 2) * t_min)


@dataclass(frozen=True)
class ControllerState:
    theta: float
    frame: int
    bracket: ThetaBracket
    t_min: float

    def __post_init__(self):
        if not self.t_min > 0:
            raise ValueError(f"t_min must be positive, got {self.t_min!r}")
        if self.frame < 0:
            raise ValueError("frame index must be nonnegative")
        if self.theta not in self.bracket:
            raise ValueError(f"theta={self.theta!r} outside bracket {self.bracket}")

    @classmethod
    def initial(cls, bracket: ThetaBracket, t_min: float, theta0: float | None = None) -> "ControllerState":
        """Fresh state at frame 0; ``theta0`` defaults to the bracket's lower end."""
        return cls(bracket.theta_min if theta0 is None else theta0, 0, bracket, t_min)


def update_theta(theta, t, r, k: int, t_min: float, bracket: ThetaBracket):
    """One projected Robbins-Monro update; scalar or elementwise on arrays."""
    return bracket.clamp(theta + stepsize(k, t_min) * (r - theta * t))


def step(state: ControllerState, dset: DecisionSet) -> tuple[Decision, ControllerState]:
    decision = best_response(dset, state.theta).decision
    theta = update_theta(state.theta, decision.t, decision.r, state.frame, state.t_min, state.bracket)
    return decision, replace(state, theta=theta, frame=state.frame + 1)


@dataclass(frozen=True)
class RunRecord:
    """Per-frame trajectory.  Row ``k`` holds theta[k] (the value used on frame k),
    the chosen (T[k], R[k]) and the running ratio over frames 0..k."""

    frame: np.ndarray
    theta: np.ndarray
    t: np.ndarray
    r: np.ndarray
    cum_ratio: np.ndarray
    final: ControllerState

    def __len__(self):
        return len(self.frame)


def run(state: ControllerState, env_stream: Iterable[DecisionSet], K: int) -> RunRecord:
    if K < 1:
        raise ValueError("need at least one frame")
    frames, thetas, ts, rs, ratios = [], [], [], [], []
    sum_r = sum_t = 0.0
    stream = iter(env_stream)
    for _ in range(K):
        try:
            dset = next(stream)
        except StopIteration:
            raise ValueError(f"environment stream ended after {len(frames)} of {K} frames") from None
        frames.append(state.frame)
        thetas.append(state.theta)
        d, state = step(state, dset)
        sum_r += d.r
        sum_t += d.t
        ts.append(d.t)
        rs.append(d.r)
        ratios.append(sum_r / sum_t)
    return RunRecord(
        np.array(frames, dtype=np.int64),
        np.array(thetas),
        np.array(ts),
        np.array(rs),
        np.array(ratios),
        state,
    )
