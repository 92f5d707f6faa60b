"""Seeded generators for the three example renewal systems.

System A  two task types; red tasks offer (1, 3), green tasks offer a choice
          between high quality (2, 3) and low quality (1, 1).  P[green] = p.
System B  inflexible tasks offer (1, 1); flexible tasks offer the curve
          (x, 2 - (2 - x)^2), x in [1, 2].  P[flexible] = q.
System C  project selection.  N in {0, 1, 2, 3} new projects arrive with
          probabilities {0.1, 0.9 - p, p/2, p/2}; each has T ~ U[1, 10] and
          R = A * T with A ~ U[0, 50].  Idling (1, 0) is always available.

Each frame consumes a fixed-width row of uniforms from the path's substream
(1 for A and B, 7 for C), so per-frame and block draws yield the same frames.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .decisions import DecisionSet, FrameBatch
from .rng import path_stream


class System(enum.Enum):
    A = "systemA"
    B = "systemB"
    C = "systemC"


class UnsupportedSystemError(ValueError):
    pass


@dataclass(frozen=True)
class EnvSpec:
    system: System
    param: float
    seed: int = 0

    def __post_init__(self):
        p = self.param
        if not math.isfinite(p):
            raise ValueError("system parameter must be finite")
        if self.system is System.C:
            if not 0.0 <= p <= 0.9:
                raise ValueError(f"System C needs p in [0, 0.9], got {p}")
        elif not 0.0 <= p <= 1.0:
            raise ValueError(f"probability must be in [0, 1], got {p}")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")

    @classmethod
    def system_a(cls, p: float, seed: int = 0) -> "EnvSpec":
        return cls(System.A, float(p), seed)

    @classmethod
    def system_b(cls, q: float, seed: int = 0) -> "EnvSpec":
        return cls(System.B, float(q), seed)

    @classmethod
    def system_c(cls, p: float, seed: int = 0) -> "EnvSpec":
        return cls(System.C, float(p), seed)

    @property
    def width(self) -> int:
        return UNIFORM_WIDTH[self.system]

    def label(self) -> str:
        name = "q" if self.system is System.B else "p"
        return f"{self.system.value}({name}={self.param:g})"


UNIFORM_WIDTH = {System.A: 1, System.B: 1, System.C: 7}


@dataclass(frozen=True)
class MomentConstants:
    t_min: float
    t_max: float
    r_min: float
    r_max: float
    c1: float
    c2: float

    def __post_init__(self):
        if not 0 < self.t_min <= self.t_max:
            raise ValueError("need 0 < t_min <= t_max")
        if self.r_min > self.r_max:
            raise ValueError("need r_min <= r_max")


_MOMENTS = {
    System.A: MomentConstants(1.0, 2.0, 1.0, 3.0, 4.0, 9.0),
    System.B: MomentConstants(1.0, 2.0, 1.0, 2.0, 4.0, 4.0),
    System.C: MomentConstants(1.0, 10.0, 0.0, 500.0, 100.0, 250000.0),
}


def moments(spec: EnvSpec) -> MomentConstants:
    return _MOMENTS[spec.system]


def frames_from_uniforms(spec: EnvSpec, u: np.ndarray) -> FrameBatch:
    """Map a ``(n, width)`` block of U[0,1) draws to one frame per row."""
    u = np.asarray(u, dtype=float)
    n = u.shape[0]
    if spec.system is System.A:
        green = u[:, 0] < spec.param
        t = np.where(green[:, None], [2.0, 1.0], [1.0, 1.0])
        r = np.where(green[:, None], [3.0, 1.0], [3.0, 3.0])
        valid = np.ones((n, 2), dtype=bool)
        valid[:, 1] = green
        return FrameBatch(t, r, valid, green.astype(np.int64))
    if spec.system is System.B:
        flexible = u[:, 0] < spec.param
        t = np.ones((n, 1))
        r = np.ones((n, 1))
        valid = ~flexible[:, None]
        return FrameBatch(t, r, valid, flexible.astype(np.int64), curve=flexible, curve_lo=1.0, curve_hi=2.0)
    p = spec.param
    cdf = np.cumsum([0.1, 0.9 - p, p / 2.0])
    count = np.searchsorted(cdf, u[:, 0], side="right")
    t = np.ones((n, 4))
    r = np.zeros((n, 4))
    t[:, 1:] = 1.0 + 9.0 * u[:, 1:4]
    r[:, 1:] = (50.0 * u[:, 4:7]) * t[:, 1:]
    valid = np.arange(4)[None, :] <= count[:, None]
    return FrameBatch(t, r, valid, count.astype(np.int64))


class Environment:
    """One sample path of a system.  Not thread-safe; use one per path."""

    def __init__(self, spec: EnvSpec, path: int = 0):
        self.spec = spec
        self.path = path
        self._rng = path_stream(spec.seed, path)

    def next_frame(self) -> tuple[int, DecisionSet]:
        u = self._rng.random(self.spec.width)
        frames = frames_from_uniforms(self.spec, u[None, :])
        return int(frames.task_type[0]), frames.row(0)

    def moments(self) -> MomentConstants:
        return moments(self.spec)

    def sets(self):
        """Endless stream of decision sets (task types dropped)."""
        while True:
            yield self.next_frame()[1]


class UniformBlocks:
    """Pulls consecutive frame rows of a path's uniform stream in blocks."""

    def __init__(self, spec: EnvSpec, path: int):
        self.width = spec.width
        self._rng = path_stream(spec.seed, path)

    def take(self, frames: int) -> np.ndarray:
        return self._rng.random((frames, self.width))


def stationary_expectation(spec: EnvSpec, policy) -> tuple[float, float]:
    """One-shot (E[T], E[R]) under a stationary per-type choice.

    System A: ``policy`` is the probability of high quality on green tasks
    (a bool works).  System B: a fixed curve point ``x`` or a mixture given as
    ``[(weight, x), ...]``.
    """
    if spec.system is System.A:
        beta = float(policy)
        if not 0.0 <= beta <= 1.0:
            raise ValueError("high-quality probability must be in [0, 1]")
        p = spec.param
        return 1.0 + p * beta, 3.0 - 2.0 * p + 2.0 * p * beta
    if spec.system is System.B:
        mix = [(1.0, float(policy))] if np.isscalar(policy) else [(float(w), float(x)) for w, x in policy]
        total = sum(w for w, _ in mix)
        if not mix or abs(total - 1.0) > 1e-12 or any(w < 0 for w, _ in mix):
            raise ValueError("mixture weights must be nonnegative and sum to 1")
        if any(not 1.0 <= x <= 2.0 for _, x in mix):
            raise ValueError("curve points must lie in [1, 2]")
        q = spec.param
        mean_x = sum(w * x for w, x in mix)
        mean_sq = sum(w * (2.0 - x) ** 2 for w, x in mix)
        return 1.0 - q + q * mean_x, 1.0 + q - q * mean_sq
    raise UnsupportedSystemError("System C has no exact stationary expectation; use Monte Carlo")


def parse_system(name: str) -> System:
    for s in System:
        if name.lower() in (s.value.lower(), s.name.lower()):
            return s
    raise ValueError(f"unknown system {name!r}; expected one of {[s.value for s in System]}")
