"""Command-line entry point: ``gcblotto {solve,sweep,verify,gen}``.

Exit codes: 0 ok, 1 bad config, 2 threshold not met, 3 solver did not
converge, 4 verification grid unusable, 5 verification checks failed.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from typing import Callable, Optional

from . import config as cfg
from .csvio import SweepRow, report_csv, solve_csv, sweep_csv
from .equilibrium import build_equilibrium, check_thresholds
from .errors import (
    BlottoError,
    ConvergenceError,
    GridError,
    NoSolutionError,
    ThresholdError,
    ValidationError,
)
from .game import GameInstance, GapVector
from .oracle import (
    MAX_GRID_BATTLEFIELDS,
    MAX_GRID_SIZE,
    grid_size,
    verify_equilibrium,
)

log = logging.getLogger("gcblotto")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_THRESHOLD = 2
EXIT_CONVERGENCE = 3
EXIT_GRID = 4
EXIT_VERIFY_FAILED = 5


def _emit(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _threshold_message(inst: GameInstance) -> str:
    report = check_thresholds(inst)
    return (f"threshold not met: D*k = {report.actual_Dk:.6g} "
            f"< required {report.required_Dk:.6g}")


def run_solve(config: cfg.RunConfig, out: Optional[str] = None) -> int:
    if config.sweep is not None:
        log.error("config defines a sweep; use the sweep command")
        return EXIT_CONFIG
    try:
        inst = config.instance()
        eq = build_equilibrium(inst)
    except ValidationError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except (ThresholdError, NoSolutionError):
        log.error("%s", _threshold_message(inst))
        return EXIT_THRESHOLD
    except ConvergenceError as exc:
        log.error("%s", exc)
        return EXIT_CONVERGENCE
    if inst.swapped:
        log.warning("players were relabeled: 'a' is the side with %g units",
                    inst.resource_a)
    _emit(solve_csv(inst, eq), out or config.output_path)
    return EXIT_OK


def sweep_point(config: cfg.RunConfig, swept: float) -> SweepRow:
    inst = config.instance_at(swept)
    try:
        eq = build_equilibrium(inst)
    except (ThresholdError, NoSolutionError):
        return SweepRow(swept, None, None, None, None, False)
    return SweepRow(swept, eq.gap.gaps, eq.value_a, eq.value_b,
                    eq.root_residual, True)


def sweep_rows(config: cfg.RunConfig, workers: int = 1) -> list[SweepRow]:
    points = config.sweep.points()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(sweep_point, [config] * len(points), points))
    else:
        rows = [sweep_point(config, x) for x in points]
    return sorted(rows, key=lambda r: r.swept_value)


def run_sweep(config: cfg.RunConfig, workers: int = 1,
              out: Optional[str] = None) -> int:
    if config.sweep is None:
        log.error("config has no sweep_* keys")
        return EXIT_CONFIG
    try:
        rows = sweep_rows(config, workers)
    except ValidationError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        log.error("%s", exc)
        return EXIT_CONVERGENCE
    _emit(sweep_csv(config.sweep.parameter, config.n, rows),
          out or config.output_path)
    return EXIT_OK


def _suggest_step(inst: GameInstance) -> float:
    m = 1
    while grid_size(m * 2, inst.n) <= MAX_GRID_SIZE:
        m *= 2
    return inst.resource_a / m


def run_verify(config: cfg.RunConfig, step: Optional[float] = None,
               out: Optional[str] = None,
               gap_hook: Optional[Callable[[GapVector, GameInstance], GapVector]] = None,
               ) -> int:
    """Certify the solved equilibrium with the oracle checks.

    ``gap_hook`` may replace the equilibrium gap before the stationarity and
    Hessian checks run.
    """
    try:
        inst = config.instance()
    except ValidationError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    if inst.n > MAX_GRID_BATTLEFIELDS:
        log.error("grid verification supports n <= %d, got n = %d",
                  MAX_GRID_BATTLEFIELDS, inst.n)
        return EXIT_GRID
    step = inst.resource_a / 100 if step is None else step
    try:
        eq = build_equilibrium(inst)
    except (ThresholdError, NoSolutionError):
        log.error("%s", _threshold_message(inst))
        return EXIT_THRESHOLD
    except ConvergenceError as exc:
        log.error("%s", exc)
        return EXIT_CONVERGENCE

    gap = gap_hook(eq.gap, inst) if gap_hook else eq.gap
    try:
        report = verify_equilibrium(inst, eq, step, gap=gap)
    except GridError as exc:
        log.error("%s; try --step %.17g", exc, _suggest_step(inst))
        return EXIT_GRID
    _emit(report_csv(report), out or config.output_path)
    return EXIT_OK if report.passed else EXIT_VERIFY_FAILED


def run_gen(config: cfg.RunConfig, out: Optional[str] = None) -> int:
    _emit(cfg.format_config(config), out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gcblotto",
        description="Pure-strategy equilibria of the generalized Colonel Blotto game.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required,
                       help="key = value configuration file")
        p.add_argument("--out", help="output path (default: stdout or output_path)")

    common(sub.add_parser("solve", help="solve one instance"))
    p = sub.add_parser("sweep", help="sweep D or k and tabulate equilibria")
    common(p)
    p.add_argument("--workers", type=int, default=1)
    p = sub.add_parser("verify", help="check the solution with the brute-force oracle")
    common(p)
    p.add_argument("--step", type=float, help="grid spacing (default R^a/100)")
    p = sub.add_parser("gen", help="write a config with seeded random valuations")
    common(p, config_required=False)
    p.add_argument("--n", type=int)
    p.add_argument("--v-n-target", type=float)
    p.add_argument("--seed", type=int)
    return parser


def _load(path: str) -> cfg.RunConfig:
    with open(path) as fh:
        return cfg.parse_config(fh.read())


def _gen_config(args) -> cfg.RunConfig:
    base = _load(args.config) if args.config else cfg.golden_config()
    n = args.n if args.n is not None else base.n
    v_n = args.v_n_target if args.v_n_target is not None else (
        base.v_n_target if base.v_n_target is not None else cfg.GOLDEN_V_N)
    seed = args.seed if args.seed is not None else (
        base.seed if base.seed is not None else cfg.GOLDEN_SEED)
    values = tuple(cfg.generate_random_values(n, v_n, seed))
    return replace(base, n=n, values=values, seed=seed, v_n_target=v_n)


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="gcblotto: %(message)s",
                        stream=sys.stderr)
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gen":
            return run_gen(_gen_config(args), args.out)
        config = _load(args.config)
    except (OSError, BlottoError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    if args.command == "solve":
        return run_solve(config, args.out)
    if args.command == "sweep":
        return run_sweep(config, max(1, args.workers), args.out)
    return run_verify(config, args.step, args.out)


if __name__ == "__main__":
    sys.exit(main())
