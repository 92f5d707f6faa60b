"""Decision policies: the proposed controller and the comparison baselines.

Scalar policies are immutable values; ``act`` returns the decision and the
successor policy.  Each has a batch twin in :data:`BATCH_POLICIES` that runs
many independent paths at once with identical arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import controller
from .controller import ControllerState, ThetaBracket, update_theta
from .decisions import (
    BatchChoice,
    CurveSet,
    Decision,
    DecisionSet,
    FrameBatch,
    _quadratic_reward,
    best_response,
    best_response_batch,
    select_finite,
)

GREEDY_CURVE_POINTS = 10_000

POLICY_NAMES = ("proposed", "greedy", "theta-empirical", "fixed-theta")


@dataclass(frozen=True)
class Proposed:
    state: ControllerState

    def act(self, dset: DecisionSet):
        d, state = controller.step(self.state, dset)
        return d, replace(self, state=state)


@dataclass(frozen=True)
class Greedy:
    """Best reward-to-duration ratio on every frame, ignoring the future."""

    def act(self, dset: DecisionSet):
        if isinstance(dset, CurveSet):
            # grid approximation of argmax r(x)/x
            options = [dset.point(x) for x in _greedy_grid(dset.x_lo, dset.x_hi)]
        else:
            options = dset.options
        best = None
        best_ratio = -np.inf
        for d in options:
            ratio = d.r / d.t
            if ratio > best_ratio or (ratio == best_ratio and d.t < best.t):
                best, best_ratio = d, ratio
        return best, self


@dataclass(frozen=True)
class ThetaEmpirical:
    """Best-responds to the clamped running ratio of everything seen so far."""

    bracket: ThetaBracket
    sum_r: float = 0.0
    sum_t: float = 0.0

    def __post_init__(self):
        if self.sum_t < 0:
            raise ValueError("accumulated time cannot be negative")

    @property
    def theta(self) -> float:
        if self.sum_t > 0:
            return self.bracket.clamp(self.sum_r / self.sum_t)
        return self.bracket.theta_min

    def act(self, dset: DecisionSet):
        d = best_response(dset, self.theta).decision
        return d, replace(self, sum_r=self.sum_r + d.r, sum_t=self.sum_t + d.t)


@dataclass(frozen=True)
class FixedTheta:
    theta: float

    def act(self, dset: DecisionSet):
        return best_response(dset, self.theta).decision, self


Policy = Proposed | Greedy | ThetaEmpirical | FixedTheta

_NAMES = {Proposed: "proposed", Greedy: "greedy", ThetaEmpirical: "theta-empirical", FixedTheta: "fixed-theta"}


def act(policy: Policy, dset: DecisionSet) -> tuple[Decision, Policy]:
    return policy.act(dset)


def describe(policy) -> str:
    if isinstance(policy, BatchPolicy):
        return policy.name
    return _NAMES[type(policy)]


def _greedy_grid(lo: float, hi: float) -> np.ndarray:
    return np.linspace(lo, hi, GREEDY_CURVE_POINTS)


def make_policy(name: str, bracket: ThetaBracket, t_min: float, theta_star: float | None = None) -> Policy:
    if name == "proposed":
        return Proposed(ControllerState.initial(bracket, t_min))
    if name == "greedy":
        return Greedy()
    if name == "theta-empirical":
        return ThetaEmpirical(bracket)
    if name == "fixed-theta":
        if theta_star is None:
            raise ValueError("fixed-theta needs the oracle theta*")
        return FixedTheta(theta_star)
    raise ValueError(f"unknown policy {name!r}; expected one of {POLICY_NAMES}")


# ---------------------------------------------------------------------------
# batch twins


class BatchPolicy:
    name = ""

    def __init__(self, n: int):
        self.n = n

    @property
    def theta(self) -> np.ndarray:
        return np.full(self.n, np.nan)

    def act(self, frames: FrameBatch) -> BatchChoice:
        raise NotImplementedError


class ProposedBatch(BatchPolicy):
    name = "proposed"

    def __init__(self, n, bracket: ThetaBracket, t_min: float, theta0: float | None = None):
        super().__init__(n)
        self.bracket = bracket
        self.t_min = t_min
        self.k = 0
        self._theta = np.full(n, bracket.theta_min if theta0 is None else theta0, dtype=float)

    @property
    def theta(self):
        return self._theta

    def act(self, frames):
        ch = best_response_batch(frames, self._theta)
        self._theta = update_theta(self._theta, ch.t, ch.r, self.k, self.t_min, self.bracket)
        self.k += 1
        return ch


class GreedyBatch(BatchPolicy):
    name = "greedy"

    def act(self, frames):
        rows = frames._rows
        idx = select_finite(frames, frames.r / frames.t)
        t = frames.t[rows, idx]
        r = frames.r[rows, idx]
        if frames.curve is not None and frames.curve.any():
            grid = _greedy_grid(frames.curve_lo, frames.curve_hi)
            gr = _quadratic_reward(grid)
            ratio = gr / grid
            top = ratio.max()
            j = np.flatnonzero(ratio == top)[0]
            c = frames.curve
            t, r, idx = t.copy(), r.copy(), idx.copy()
            t[c] = grid[j]
            r[c] = gr[j]
            idx[c] = -1
        return BatchChoice(t, r, np.full(self.n, np.nan), idx)


class ThetaEmpiricalBatch(BatchPolicy):
    name = "theta-empirical"

    def __init__(self, n, bracket: ThetaBracket):
        super().__init__(n)
        self.bracket = bracket
        self.sum_r = np.zeros(n)
        self.sum_t = np.zeros(n)

    @property
    def theta(self):
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = self.sum_r / self.sum_t
        return np.where(self.sum_t > 0, self.bracket.clamp(ratio), self.bracket.theta_min)

    def act(self, frames):
        ch = best_response_batch(frames, self.theta)
        self.sum_r = self.sum_r + ch.r
        self.sum_t = self.sum_t + ch.t
        return ch


class FixedThetaBatch(BatchPolicy):
    name = "fixed-theta"

    def __init__(self, n, theta: float):
        super().__init__(n)
        self._theta = np.full(n, float(theta))

    @property
    def theta(self):
        return self._theta

    def act(self, frames):
        return best_response_batch(frames, self._theta)


def make_batch_policy(name: str, n: int, bracket: ThetaBracket, t_min: float,
                      theta_star: float | None = None) -> BatchPolicy:
    if name == "proposed":
        return ProposedBatch(n, bracket, t_min)
    if name == "greedy":
        return GreedyBatch(n)
    if name == "theta-empirical":
        return ThetaEmpiricalBatch(n, bracket)
    if name == "fixed-theta":
        if theta_star is None:
            raise ValueError("fixed-theta needs the oracle theta*")
        return FixedThetaBatch(n, theta_star)
    raise ValueError(f"unknown policy {name!r}; expected one of {POLICY_NAMES}")
