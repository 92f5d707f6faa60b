"""Regenerate the committed System C theta* values.

    python -m renewal_lab.goldens [--samples N] [--seed S]

Each entry is a Monte-Carlo bisection on ``samples`` frames drawn from
``seed``; the result is written next to the package's other data files.
"""

import argparse
import json
from importlib import resources

from .environments import EnvSpec
from .oracle import GOLDEN_FILE, solve_theta_star

GOLDEN_PS = (0.0, 0.3, 0.6, 0.9)
GOLDEN_SAMPLES = 10_000_000
GOLDEN_SEED = 2021
GOLDEN_TOL = 1e-6


def compute(ps=GOLDEN_PS, samples=GOLDEN_SAMPLES, seed=GOLDEN_SEED) -> dict:
    entries = []
    for p in ps:
        res = solve_theta_star(EnvSpec.system_c(p, seed), tol=GOLDEN_TOL, mc_samples=samples)
        entries.append({
            "p": p, "theta_star": res.theta_star, "t_star": res.t_star, "r_star": res.r_star,
            "std_error": res.std_error, "tolerance": res.tolerance, "mc_samples": samples, "seed": seed,
        })
        print(f"p={p}: theta_star={res.theta_star:.9g} +/- {res.tolerance:.3g}", flush=True)
    return {"entries": entries}


def main(argv=None):
    ap = argparse.ArgumentParser(prog="python -m renewal_lab.goldens")
    ap.add_argument("--samples", type=int, default=GOLDEN_SAMPLES)
    ap.add_argument("--seed", type=int, default=GOLDEN_SEED)
    args = ap.parse_args(argv)
    data = compute(samples=args.samples, seed=args.seed)
    target = resources.files("renewal_lab").joinpath("data", GOLDEN_FILE)
    with open(str(target), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")
    print(f"wrote {target}")


if __name__ == "__main__":
    main()
