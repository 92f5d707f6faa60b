"""Convergence of System A on both sides of the p = 1/2 switching point."""

from __future__ import annotations

from dataclasses import dataclass

from ..controller import ThetaBracket
from ..environments import EnvSpec
from .experiment import ExperimentConfig, simulate


@dataclass(frozen=True)
class ProbeRow:
    p: float
    delta: float
    checkpoint: int
    theta_star: float
    mean_ratio: float
    gap: float
    stderr_gap: float
    sum_gap: float


def probe_probabilities(delta_list) -> list[tuple[float, float]]:
    out = []
    for d in delta_list:
        for p in (0.5 - d, 0.5 + d):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"delta {d} puts p={p} outside [0, 1]")
            if (p, d) not in out:
                out.append((p, d))
    return sorted(out)


def near_threshold_probe(delta_list, K: int, paths: int, seed: int = 0,
                         bracket: ThetaBracket | None = None, checkpoints=None,
                         workers: int = 1) -> list[ProbeRow]:
    """Mean optimality gap of the proposed policy for p = 1/2 -/+ delta."""
    rows = []
    for p, d in probe_probabilities(delta_list):
        cfg = ExperimentConfig(EnvSpec.system_a(p, seed), ("proposed",), K, paths, bracket,
                               checkpoints=checkpoints, workers=workers)
        s = simulate(cfg, "proposed")
        for i, k in enumerate(s.checkpoints):
            rows.append(ProbeRow(p, d, int(k), s.theta_star, float(s.mean_ratio[i]), float(s.gap[i]),
                                 float(s.stderr_gap[i]), float(s.sum_gap[i])))
    return rows
