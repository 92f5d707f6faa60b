"""Decision sets and per-frame best responses.

A frame offers a set of ``(duration, reward)`` options.  The controller picks
the option maximizing ``r - theta * t``; exact ties go to the smallest duration.

Two representations live here:

* scalar values (:class:`FiniteSet`, :class:`CurveSet`) used by the reference
  controller and the policies, and
* :class:`FrameBatch`, a padded array form holding one frame per sample path,
  used by the vectorized simulation engine and the Monte-Carlo oracle.

Both go through the same arithmetic so a batch run reproduces scalar runs
bit for bit.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

# Finite sets compare computed values exactly; see tie rule in best_response.
TIE_EPS = 0.0


class DecisionError(ValueError):
    """A decision set violates its structural invariants."""


class UnsupportedCurveError(DecisionError):
    """A curve descriptor has no registered closed-form best response."""


@dataclass(frozen=True)
class Decision:
    t: float
    r: float

    def __post_init__(self):
        if not (self.t > 0 and math.isfinite(self.t)):
            raise DecisionError(f"duration must be positive and finite, got {self.t!r}")
        if not math.isfinite(self.r):
            raise DecisionError(f"reward must be finite, got {self.r!r}")


@dataclass(frozen=True)
class BestResponse:
    decision: Decision
    value: float


@dataclass(frozen=True)
class FiniteSet:
    options: tuple[Decision, ...]

    def __post_init__(self):
        opts = tuple(o if isinstance(o, Decision) else Decision(*o) for o in self.options)
        if not opts:
            raise DecisionError("finite decision set must be nonempty")
        object.__setattr__(self, "options", opts)

    @classmethod
    def of(cls, *pairs) -> "FiniteSet":
        return cls(tuple(Decision(float(t), float(r)) for t, r in pairs))


class CurveKind(enum.Enum):
    """Named curve descriptors; each has a closed-form best response."""

    # (x, 2 - (2 - x)^2): flexible task with diminishing returns
    CONCAVE_QUADRATIC = "concave-quadratic"


def _quadratic_reward(x):
    d = 2.0 - x
    return 2.0 - d * d


@dataclass(frozen=True)
class CurveSet:
    x_lo: float
    x_hi: float
    kind: CurveKind = CurveKind.CONCAVE_QUADRATIC

    def __post_init__(self):
        if not isinstance(self.kind, CurveKind):
            raise UnsupportedCurveError(f"no closed-form best response for {self.kind!r}")
        if not self.x_lo <= self.x_hi:
            raise DecisionError(f"empty curve domain [{self.x_lo}, {self.x_hi}]")
        if self.x_lo <= 0:
            # t(x) = x must stay positive on the whole domain
            raise DecisionError("curve durations must be positive")

    def point(self, x: float) -> Decision:
        return Decision(float(x), float(_quadratic_reward(x)))

    def argmax_x(self, theta: float) -> float:
        if self.kind is not CurveKind.CONCAVE_QUADRATIC:
            raise UnsupportedCurveError(f"no closed-form best response for {self.kind!r}")
        # d/dx [2 - (2-x)^2 - theta x] = 2(2-x) - theta = 0
        return min(max(2.0 - theta / 2.0, self.x_lo), self.x_hi)


DecisionSet = Union[FiniteSet, CurveSet]


def best_response(dset: DecisionSet, theta: float) -> BestResponse:
    """Maximize ``r - theta * t`` over ``dset``.

    Among exact maximizers of a finite set the option with the smallest
    duration wins.  Curve sets use the descriptor's closed form; the objective
    is strictly concave there so the maximizer is unique.
    """
    if not math.isfinite(theta):
        raise DecisionError(f"theta must be finite, got {theta!r}")
    if isinstance(dset, CurveSet):
        x = dset.argmax_x(theta)
        d = dset.point(x)
        return BestResponse(d, d.r - theta * d.t)
    if isinstance(dset, FiniteSet):
        if not dset.options:
            raise DecisionError("finite decision set must be nonempty")
        best = None
        best_val = -math.inf
        for d in dset.options:
            v = d.r - theta * d.t
            if v > best_val + TIE_EPS or (v >= best_val - TIE_EPS and best is not None and d.t < best.t):
                best, best_val = d, v
        return BestResponse(best, best_val)
    raise DecisionError(f"not a decision set: {dset!r}")


def enumerate_grid(dset: DecisionSet, n: int) -> list[Decision]:
    """Finite sets pass through; curves are sampled at ``n`` evenly spaced x (endpoints included)."""
    if isinstance(dset, FiniteSet):
        return list(dset.options)
    if n < 2:
        raise ValueError("curve grids need at least two points")
    return [dset.point(x) for x in np.linspace(dset.x_lo, dset.x_hi, n)]


# ---------------------------------------------------------------------------
# batch form


@dataclass
class FrameBatch:
    """One frame per row.

    ``t``, ``r`` and ``valid`` have shape ``(n, m)`` and hold finite options
    padded to a common width.  Rows flagged in ``curve`` instead offer the
    concave-quadratic curve over ``[curve_lo, curve_hi]`` and ignore the
    finite columns.  ``task_type`` is an opaque per-row label.
    """

    t: np.ndarray
    r: np.ndarray
    valid: np.ndarray
    task_type: np.ndarray
    curve: np.ndarray | None = None
    curve_lo: float = 1.0
    curve_hi: float = 2.0
    _rows: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self._rows = np.arange(self.t.shape[0])

    def __len__(self):
        return self.t.shape[0]

    def row(self, i: int) -> DecisionSet:
        if self.curve is not None and self.curve[i]:
            return CurveSet(self.curve_lo, self.curve_hi)
        mask = self.valid[i]
        return FiniteSet(tuple(Decision(float(a), float(b)) for a, b in zip(self.t[i][mask], self.r[i][mask])))


@dataclass
class BatchChoice:
    """Chosen decisions per row; ``index`` is the finite column or -1 for curve rows."""

    t: np.ndarray
    r: np.ndarray
    value: np.ndarray
    index: np.ndarray


def select_finite(frames: FrameBatch, score: np.ndarray) -> np.ndarray:
    """Column maximizing ``score`` per row, ties to smallest duration."""
    score = np.where(frames.valid, score, -np.inf)
    top = score.max(axis=1, keepdims=True)
    tied_t = np.where(score == top, frames.t, np.inf)
    return tied_t.argmin(axis=1)


def best_response_batch(frames: FrameBatch, theta) -> BatchChoice:
    """Row-wise :func:`best_response`; ``theta`` is a scalar or one value per row."""
    theta = np.broadcast_to(np.asarray(theta, dtype=float), (len(frames),))
    values = frames.r - theta[:, None] * frames.t
    idx = select_finite(frames, values)
    rows = frames._rows
    t = frames.t[rows, idx]
    r = frames.r[rows, idx]
    val = values[rows, idx]
    if frames.curve is not None and frames.curve.any():
        c = frames.curve
        x = np.minimum(np.maximum(2.0 - theta[c] / 2.0, frames.curve_lo), frames.curve_hi)
        rc = _quadratic_reward(x)
        t = t.copy()
        r = r.copy()
        val = val.copy()
        idx = idx.copy()
        t[c] = x
        r[c] = rc
        val[c] = rc - theta[c] * x
        idx[c] = -1
    return BatchChoice(t, r, val, idx)
