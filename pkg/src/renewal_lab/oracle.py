"""Independent computation of the optimal ratio theta*.

theta* is the unique root of the strictly decreasing function
``M(theta) = E[max over the frame's options of (r - theta * t)]``.  Systems A
and B have exact M and closed-form optima; System C is handled by bisection
on a Monte-Carlo estimate of M with common random numbers across theta.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from importlib import resources
from typing import Callable

from .controller import ThetaBracket, default_bracket
from .decisions import CurveSet, best_response, best_response_batch
from .environments import EnvSpec, System, UnsupportedSystemError, frames_from_uniforms, moments
from .rng import MC_CHUNKS, substream

DEFAULT_TOL = 1e-9
MC_CHUNK = 1 << 20
# Monte-Carlo frames are cached in memory up to this many samples.
MC_CACHE_LIMIT = 2_000_000

_B_CURVE = CurveSet(1.0, 2.0)


class Method(enum.Enum):
    CLOSED_FORM = "closed-form"
    BISECTION = "bisection"
    MONTE_CARLO_BISECTION = "monte-carlo-bisection"


class OracleError(RuntimeError):
    pass


class BracketError(OracleError):
    """The root function does not change sign over the bracket."""


@dataclass(frozen=True)
class OracleResult:
    theta_star: float
    t_star: float | None
    r_star: float | None
    method: Method
    tolerance: float
    std_error: float | None = None
    note: str = ""


def m_function(spec: EnvSpec, theta: float) -> float:
    if spec.system is System.A:
        p = spec.param
        return (1.0 - p) * (3.0 - theta) + p * max(3.0 - 2.0 * theta, 1.0 - theta)
    if spec.system is System.B:
        q = spec.param
        return (1.0 - q) * (1.0 - theta) + q * best_response(_B_CURVE, theta).value
    raise UnsupportedSystemError("M has no exact form for System C; use m_function_mc")


class MonteCarloM:
    """Sample-mean estimator of M on a fixed set of ``n_samples`` frames.

    The same frames are reused for every theta, so the estimate is itself a
    decreasing piecewise-linear function of theta and bisection on it is
    well defined.
    """

    def __init__(self, spec: EnvSpec, n_samples: int, seed: int):
        if n_samples < 100:
            raise ValueError("need at least 100 Monte-Carlo samples")
        self.spec = spec
        self.n_samples = int(n_samples)
        self.seed = seed
        self._cache = list(self._chunks()) if n_samples <= MC_CACHE_LIMIT else None

    def _chunks(self):
        left, c = self.n_samples, 0
        while left > 0:
            size = min(MC_CHUNK, left)
            u = substream(self.seed, MC_CHUNKS, c).random((size, self.spec.width))
            yield frames_from_uniforms(self.spec, u)
            left -= size
            c += 1

    def frames(self):
        return self._cache if self._cache is not None else self._chunks()

    def stats(self, theta: float) -> dict:
        s = ss = st = sr = 0.0
        for fb in self.frames():
            ch = best_response_batch(fb, theta)
            s += ch.value.sum()
            ss += (ch.value * ch.value).sum()
            st += ch.t.sum()
            sr += ch.r.sum()
        n = self.n_samples
        mean = s / n
        var = max(ss / n - mean * mean, 0.0) * n / (n - 1)
        return {"mean": mean, "std_error": math.sqrt(var / n), "mean_t": st / n, "mean_r": sr / n}

    def __call__(self, theta: float) -> tuple[float, float]:
        st = self.stats(theta)
        return st["mean"], st["std_error"]


def m_function_mc(spec: EnvSpec, theta: float, n_samples: int, seed: int) -> tuple[float, float]:
    return MonteCarloM(spec, n_samples, seed)(theta)


def bisect(f: Callable[[float], float], lo: float, hi: float, tol: float) -> float:
    """Root of a decreasing function; requires ``f(lo) >= 0 >= f(hi)``."""
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    f_lo, f_hi = f(lo), f(hi)
    if f_lo < 0 or f_hi > 0:
        raise BracketError(f"M({lo})={f_lo:.6g}, M({hi})={f_hi:.6g}: no sign change over the bracket")
    if f_lo == 0:
        return lo
    if f_hi == 0:
        return hi
    while hi - lo > tol / 4:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        v = f(mid)
        if v == 0:
            return mid
        if v > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def closed_form(spec: EnvSpec) -> OracleResult:
    if spec.system is System.A:
        p = spec.param
        # always-low gives (1, 3 - 2p); always-high gives (1 + p, 3)
        theta = max(3.0 - 2.0 * p, 3.0 / (1.0 + p))
        t, r = (1.0 + p, 3.0) if p >= 0.5 else (1.0, 3.0 - 2.0 * p)
        return OracleResult(theta, t, r, Method.CLOSED_FORM, 0.0)
    if spec.system is System.B:
        q = spec.param
        if q == 0:
            return OracleResult(1.0, 1.0, 1.0, Method.CLOSED_FORM, 0.0)
        root = math.sqrt(1.0 + q)
        theta = 2.0 - (2.0 / q) * (root - 1.0)
        r = 2.0 * (q + 1.0) * (root - 1.0) / q
        return OracleResult(theta, root, r, Method.CLOSED_FORM, 0.0)
    raise UnsupportedSystemError("System C has no closed form")


def oracle_bracket(spec: EnvSpec, bracket: ThetaBracket | None = None) -> ThetaBracket:
    if bracket is not None:
        return bracket
    m = moments(spec)
    return default_bracket(m.t_min, m.t_max, m.r_min, m.r_max)


def solve_theta_star(
    spec: EnvSpec,
    tol: float = DEFAULT_TOL,
    bracket: ThetaBracket | None = None,
    mc_samples: int = 1_000_000,
    seed: int | None = None,
) -> OracleResult:
    """theta* for ``spec``.

    A and B: the closed form, cross-checked against bisection of the exact M
    (an OracleError is raised if they disagree by more than ``tol``).
    C: bisection on the Monte-Carlo M drawn from ``seed`` (defaults to the
    spec's seed); ``tolerance`` then reports ``max(tol, 4 * se / t_min)``.
    """
    br = oracle_bracket(spec, bracket)
    if spec.system in (System.A, System.B):
        cf = closed_form(spec)
        root = bisect(lambda th: m_function(spec, th), br.theta_min, br.theta_max, tol)
        if abs(root - cf.theta_star) > tol:
            raise OracleError(f"closed form {cf.theta_star!r} and bisection {root!r} disagree for {spec.label()}")
        return OracleResult(cf.theta_star, cf.t_star, cf.r_star, Method.CLOSED_FORM, tol,
                            note=f"bisection cross-check {root!r}")
    mc = MonteCarloM(spec, mc_samples, spec.seed if seed is None else seed)
    root = bisect(lambda th: mc(th)[0], br.theta_min, br.theta_max, tol)
    st = mc.stats(root)
    t_min = moments(spec).t_min
    return OracleResult(
        root,
        st["mean_t"],
        st["mean_r"],
        Method.MONTE_CARLO_BISECTION,
        max(tol, 4.0 * st["std_error"] / t_min),
        std_error=st["std_error"] / t_min,
        note=f"statistical: {mc.n_samples} samples, seed {mc.seed}",
    )


# ---------------------------------------------------------------------------
# committed System C values

GOLDEN_FILE = "system_c_theta_star.json"


def load_goldens() -> list[dict]:
    try:
        text = resources.files("renewal_lab").joinpath("data", GOLDEN_FILE).read_text()
    except FileNotFoundError:
        return []
    return json.loads(text)["entries"]


def golden_theta_star(spec: EnvSpec) -> OracleResult | None:
    if spec.system is not System.C:
        return None
    for e in load_goldens():
        if e["p"] == spec.param:
            return OracleResult(
                e["theta_star"], e["t_star"], e["r_star"], Method.MONTE_CARLO_BISECTION,
                e["tolerance"], std_error=e["std_error"],
                note=f"golden: {e['mc_samples']} samples, seed {e['seed']}",
            )
    return None


def resolve_theta_star(spec: EnvSpec, bracket: ThetaBracket | None = None, tol: float = DEFAULT_TOL,
                       mc_samples: int = 1_000_000) -> OracleResult:
    """theta* for experiments: goldens for System C when committed, else solve."""
    g = golden_theta_star(spec)
    if g is not None:
        return g
    return solve_theta_star(spec, tol=tol, bracket=bracket, mc_samples=mc_samples)
