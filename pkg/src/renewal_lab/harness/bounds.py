"""Finite-K performance bounds and empirical rate fits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..controller import ThetaBracket
from ..decisions import CurveSet
from ..environments import EnvSpec, System, moments
from .experiment import SLACK_SE, ExperimentConfig, RunSummary

THEOREM1 = "theorem1"
THEOREM2 = "theorem2"
MSE_LEMMA = "mse-lemma"


@dataclass(frozen=True)
class BoundConstants:
    b: float  # bounds (1/2) E[(R - theta T)^2] for theta in the bracket
    c1: float  # bounds E[T^2]


def _curve_abs_max(theta: float, curve: CurveSet) -> float:
    # r(x) - theta x is a concave quadratic; |.| peaks at an endpoint or the vertex
    xs = {curve.x_lo, curve.x_hi, curve.argmax_x(theta)}
    return max(abs(curve.point(x).r - theta * x) for x in xs)


def derive_constants(spec: EnvSpec, bracket: ThetaBracket) -> BoundConstants:
    """Valid (not necessarily tight) b and C1.

    A and B use the pointwise worst case of ``|r - theta t|`` over every
    decision and both bracket endpoints (the expression is linear in theta).
    C falls back to ``(1/2) (R_max + theta_max T_max)^2``.
    """
    ends = (bracket.theta_min, bracket.theta_max)
    if spec.system is System.A:
        options = [(1.0, 3.0), (2.0, 3.0), (1.0, 1.0)]
        worst = max(abs(r - th * t) for t, r in options for th in ends)
        return BoundConstants(0.5 * worst**2, max(t * t for t, _ in options))
    if spec.system is System.B:
        curve = CurveSet(1.0, 2.0)
        worst = max(max(abs(1.0 - th), _curve_abs_max(th, curve)) for th in ends)
        return BoundConstants(0.5 * worst**2, curve.x_hi**2)
    m = moments(spec)
    return BoundConstants(0.5 * (m.r_max + abs(bracket.theta_max) * m.t_max) ** 2, m.c1)


def theorem1_bound(K, theta0, theta_star, b, c1, t_min):
    K = np.asarray(K, dtype=float)
    inner = abs(theta0 - theta_star) + (-math.sqrt(2 * b) + np.sqrt(8 * b * (K - 1))) / t_min
    return math.sqrt(2 * c1) / (K * t_min) * inner


def theorem2_bound(K, theta0, theta_star, b, t_min, c):
    K = np.asarray(K, dtype=float)
    num = 2 * (theta0 - theta_star) ** 2 + (4 * b / t_min**2) * (1 + np.log(K - 1))
    return num / (K * c * t_min)


def mse_bound(k, b, t_min):
    return 2 * b / (np.asarray(k, dtype=float) * t_min**2)


@dataclass
class BoundReport:
    """One bound evaluated at each applicable checkpoint.

    ``slack = bound - (empirical - 4 * stderr)``; the bound holds within the
    statistical slack iff every slack is nonnegative.
    """

    name: str
    checkpoints: np.ndarray
    empirical: np.ndarray
    stderr: np.ndarray
    bound: np.ndarray
    constants: dict = field(default_factory=dict)

    @property
    def slack(self) -> np.ndarray:
        return self.bound - (self.empirical - SLACK_SE * np.nan_to_num(self.stderr))

    @property
    def holds(self) -> bool:
        return bool(np.all(self.slack >= 0))


def curvature_constant(spec: EnvSpec) -> float | None:
    """Strong-concavity constant used for the log(K)/K bound (System B only)."""
    if spec.system is System.B and spec.param > 0:
        return 1.0 / spec.param
    return None


def check_bounds(cfg: ExperimentConfig, summary: RunSummary, constants: BoundConstants,
                 theta0: float | None = None, curvature: float | None = None) -> list[BoundReport]:
    """Compare a proposed-policy summary against the three finite-K bounds.

    The theorem bounds concern ``|theta* - sum E[R] / sum E[T]|`` and need
    K >= 2; the mean-squared-error bound applies to theta[k] for k >= 1.
    """
    t_min = cfg.t_min
    th0 = cfg.theta_bracket.theta_min if theta0 is None else theta0
    ts = summary.theta_star
    cps = summary.checkpoints
    consts = {"b": constants.b, "c1": constants.c1, "t_min": t_min, "theta0": th0, "theta_star": ts}
    reports = [
        BoundReport(MSE_LEMMA, cps, summary.mse, summary.stderr_mse, mse_bound(cps, constants.b, t_min), consts)
    ]
    sel = cps >= 2
    if sel.any():
        k = cps[sel]
        reports.insert(0, BoundReport(
            THEOREM1, k, summary.sum_gap[sel], summary.stderr_sum_ratio[sel],
            theorem1_bound(k, th0, ts, constants.b, constants.c1, t_min), consts,
        ))
        c = curvature if curvature is not None else curvature_constant(cfg.env)
        if c is not None:
            reports.insert(1, BoundReport(
                THEOREM2, k, summary.sum_gap[sel], summary.stderr_sum_ratio[sel],
                theorem2_bound(k, th0, ts, constants.b, t_min, c), dict(consts, c=c),
            ))
    return reports


class InsufficientDataError(ValueError):
    pass


METRICS = ("gap", "mse", "sum-gap")


def fit_rate(summary: RunSummary, metric: str = "mse", k_range: tuple[float, float] | None = None):
    """Least-squares slope of log(metric) against log(k).

    Returns ``(slope, intercept, r_squared)``.  Checkpoints where the metric
    is exactly zero are dropped; at least five must remain.
    """
    values = {"gap": summary.gap, "mse": summary.mse, "sum-gap": summary.sum_gap}
    if metric not in values:
        raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")
    return fit_power_law(summary.checkpoints, values[metric], k_range)


def fit_power_law(k, y, k_range=None):
    k = np.asarray(k, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = y > 0
    if k_range is not None:
        keep &= (k >= k_range[0]) & (k <= k_range[1])
    if keep.sum() < 5:
        raise InsufficientDataError(f"need >= 5 positive points in range, have {int(keep.sum())}")
    lx, ly = np.log(k[keep]), np.log(y[keep])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = ((ly - ly.mean()) ** 2).sum()
    r2 = 1.0 - (resid**2).sum() / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), float(r2)
