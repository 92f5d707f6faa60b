"""Command-line front end.

Subcommands: ``solve`` (theta* for a system), ``run`` (trajectories plus
summaries for one or more policies), ``compare`` (policy comparison),
``rate`` (log-log rate fit) and ``probe`` (System A near p = 1/2).

Exit status: 0 on success, 2 on usage errors, 1 on runtime errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .controller import ThetaBracket
from .environments import EnvSpec, System, parse_system
from .harness import ExperimentConfig, check_bounds, derive_constants, fit_rate, near_threshold_probe, run_experiment
from .harness import csvio
from .harness.bounds import METRICS
from .oracle import DEFAULT_TOL, solve_theta_star
from .policies import POLICY_NAMES


def _comma_floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _policies(text: str) -> tuple[str, ...]:
    names = tuple(x.strip() for x in text.split(",") if x.strip())
    bad = [n for n in names if n not in POLICY_NAMES]
    if bad or not names:
        raise argparse.ArgumentTypeError(f"unknown policies {bad}; choose from {','.join(POLICY_NAMES)}")
    return names


def _checkpoints(text: str):
    if text in ("geometric", "all"):
        return None if text == "geometric" else text
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError("checkpoints must be 'geometric', 'all' or comma-separated integers") from None


def _resolve_checkpoints(cps, frames: int):
    return tuple(range(1, frames + 1)) if cps == "all" else cps


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="renewal-lab", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def env_flags(p, seed_required=True):
        p.add_argument("--env", required=True, choices=[s.value for s in System])
        p.add_argument("--p", type=float, help="task-type probability (systemA) or project parameter (systemC)")
        p.add_argument("--q", type=float, help="flexible-task probability (systemB)")
        p.add_argument("--seed", type=int, required=seed_required, help="base seed; all randomness derives from it")
        p.add_argument("--theta-min", type=float, help="bracket override (lower end)")
        p.add_argument("--theta-max", type=float, help="bracket override (upper end)")
        p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="oracle tolerance")
        p.add_argument("--mc-samples", type=_positive_int, default=1_000_000, help="System C oracle sample budget")

    def sim_flags(p, default_policies="proposed"):
        p.add_argument("--frames", type=_positive_int, required=True)
        p.add_argument("--paths", type=_positive_int, default=1)
        p.add_argument("--policies", type=_policies, default=_policies(default_policies))
        p.add_argument("--checkpoints", type=_checkpoints, default=None)
        p.add_argument("--record-stride", type=_positive_int, default=1)
        p.add_argument("--workers", type=_positive_int, default=1)
        p.add_argument("--out", default="results")

    p = sub.add_parser("solve", help="compute theta* for a system")
    env_flags(p, seed_required=False)

    p = sub.add_parser("run", help="simulate and write per-path trajectories and summaries")
    env_flags(p)
    sim_flags(p)

    p = sub.add_parser("compare", help="compare policies on common random numbers")
    env_flags(p)
    sim_flags(p, "proposed,greedy")

    p = sub.add_parser("rate", help="fit the log-log decay rate of a metric")
    env_flags(p)
    sim_flags(p)
    p.add_argument("--metric", choices=METRICS, default="mse")
    p.add_argument("--k-min", type=float, default=1.0)
    p.add_argument("--k-max", type=float, default=float("inf"))

    p = sub.add_parser("probe", help="System A convergence for p = 1/2 -/+ delta")
    p.add_argument("--deltas", type=_comma_floats, required=True)
    p.add_argument("--frames", type=_positive_int, required=True)
    p.add_argument("--paths", type=_positive_int, default=1000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--theta-min", type=float)
    p.add_argument("--theta-max", type=float)
    p.add_argument("--checkpoints", type=_checkpoints, default=None)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--out", default="results")
    return ap


def _spec(args, ap) -> EnvSpec:
    system = parse_system(args.env)
    value = args.q if system is System.B else args.p
    flag = "--q" if system is System.B else "--p"
    if value is None:
        ap.error(f"{args.env} needs {flag}")
    seed = args.seed if args.seed is not None else 0
    try:
        return EnvSpec(system, value, seed)
    except ValueError as exc:
        ap.error(str(exc))


def _bracket(args, ap) -> ThetaBracket | None:
    lo, hi = args.theta_min, args.theta_max
    if lo is None and hi is None:
        return None
    if lo is None or hi is None:
        ap.error("--theta-min and --theta-max must be given together")
    try:
        return ThetaBracket(lo, hi)
    except ValueError as exc:
        ap.error(str(exc))


def _config(args, ap, spec, bracket, trajectories=False) -> ExperimentConfig:
    try:
        return ExperimentConfig(spec, args.policies, args.frames, args.paths, bracket, args.record_stride,
                                _resolve_checkpoints(args.checkpoints, args.frames), args.workers, trajectories,
                                args.mc_samples)
    except ValueError as exc:
        ap.error(str(exc))


def _write_policy_outputs(out: Path, cfg, summaries) -> None:
    for name, s in summaries.items():
        csvio.write_summary(out / f"summary_{name}.csv", s)
        csvio.write_sums(out / f"sums_{name}.csv", s)
    csvio.write_final(out / "final.csv", summaries)
    if "proposed" in summaries:
        consts = derive_constants(cfg.env, cfg.theta_bracket)
        csvio.write_bounds(out / "bounds.csv", check_bounds(cfg, summaries["proposed"], consts))


def cmd_solve(args, ap) -> int:
    spec = _spec(args, ap)
    if spec.system is System.C and args.seed is None:
        ap.error("systemC is solved by Monte Carlo and needs --seed")
    res = solve_theta_star(spec, tol=args.tol, bracket=_bracket(args, ap), mc_samples=args.mc_samples)
    print(f"theta_star={res.theta_star:.9g}")
    if res.t_star is not None:
        print(f"t_star={res.t_star:.9g}")
        print(f"r_star={res.r_star:.9g}")
    print(f"method={res.method.value}")
    print(f"tolerance={res.tolerance:.3g}")
    if res.std_error is not None:
        print(f"std_error={res.std_error:.3g}")
    return 0


def cmd_run(args, ap) -> int:
    cfg = _config(args, ap, _spec(args, ap), _bracket(args, ap), trajectories=True)
    summaries = run_experiment(cfg)
    out = Path(args.out)
    for name, s in summaries.items():
        csvio.write_trajectories(out / "trajectories" / name, s.paths)
        csvio.write_path_checkpoints(out / f"paths_{name}.csv", s.paths)
    _write_policy_outputs(out, cfg, summaries)
    for name, s in summaries.items():
        print(f"{name}: theta_star={s.theta_star:.9g} final_ratio={s.mean_ratio[-1]:.9g} gap={s.gap[-1]:.3g}")
    return 0


def cmd_compare(args, ap) -> int:
    cfg = _config(args, ap, _spec(args, ap), _bracket(args, ap))
    summaries = run_experiment(cfg)
    out = Path(args.out)
    _write_policy_outputs(out, cfg, summaries)
    for name, s in summaries.items():
        rej = "" if s.rejection_rate is None else f" rejection_rate={s.rejection_rate:.4f}"
        print(f"{name}: final_ratio={s.mean_ratio[-1]:.9g} stderr={s.stderr_ratio[-1]:.3g}{rej}")
    return 0


def cmd_rate(args, ap) -> int:
    cfg = _config(args, ap, _spec(args, ap), _bracket(args, ap))
    summaries = run_experiment(cfg)
    out = Path(args.out)
    _write_policy_outputs(out, cfg, summaries)
    rows = []
    for name, s in summaries.items():
        slope, intercept, r2 = fit_rate(s, args.metric, (args.k_min, args.k_max))
        rows.append((name, args.metric, slope, intercept, r2))
        print(f"{name}: metric={args.metric} slope={slope:.6g} intercept={intercept:.6g} r2={r2:.6g}")
    csvio.write_rows(out / "rate.csv", ("policy", "metric", "slope", "intercept", "r2"), rows)
    return 0


def cmd_probe(args, ap) -> int:
    bracket = _bracket(args, ap)
    try:
        rows = near_threshold_probe(args.deltas, args.frames, args.paths, args.seed, bracket,
                                    _resolve_checkpoints(args.checkpoints, args.frames), args.workers)
    except ValueError as exc:
        ap.error(str(exc))
    path = csvio.write_probe(Path(args.out) / "probe.csv", rows)
    final = [r for r in rows if r.checkpoint == args.frames]
    for r in final:
        print(f"p={r.p:g}: gap={r.gap:.6g} stderr={r.stderr_gap:.3g}")
    print(f"wrote {path}")
    return 0


COMMANDS = {"solve": cmd_solve, "run": cmd_run, "compare": cmd_compare, "rate": cmd_rate, "probe": cmd_probe}


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        return COMMANDS[args.command](args, ap)
    except SystemExit as exc:
        return int(exc.code or 0)
    except Exception as exc:  # runtime failure, not a usage error
        print(f"renewal-lab: error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
