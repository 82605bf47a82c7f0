"""Command-line interface: synthetic sweeps, summaries, file estimation.

Subcommands::

    rspose synth-sweep --sweep linvel --motion forward \
        --algos uniform9,uniform11,gs5 --trials 100 --seed 0 --out FILE
    rspose summarize --in FILE [--metric rot_err_deg]
    rspose estimate --in FILE --algo uniform9 [--ransac-px 1.0] \
        [--no-refine] --seed 0

Exit codes: 0 success, 1 estimation failure (degenerate configuration or
no model found), 2 usage error, 3 input-file parse error, 4 insufficient
correspondences. All numeric output uses repr formatting, so a fixed seed
produces byte-identical output across runs.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .bench import (
    GS5,
    SWEEP_VARIABLES,
    SweepSpec,
    format_summary,
    run_sweep,
    summarize,
)
from .coeffs import AlgorithmKind, InsufficientPointsError
from .corrfile import CorrespondenceFileError, load_problem
from .geometry import InertialMeasurement
from .refine import RefineConfig, RefinementError, refine
from .robust import RansacConfig, ransac_estimate
from .solvers import DegenerateConfigurationError, SolverConfig

EXIT_ESTIMATION = 1
EXIT_PARSE = 3
EXIT_POINTS = 4

# default sweep ranges per variable, matching the benchmark protocol:
# linear velocity in m/s, angular velocity in rad/s, pixel noise in px,
# gravity / angular-velocity direction noise in degrees
_DEFAULT_RANGES = {
    "linvel": (0.0, 10.0, 6),
    "angvel": (0.0, 3.0, 6),
    "pixnoise": (0.0, 1.0, 6),
    "gravnoise": (0.0, 1.0, 6),
    "wnoise": (0.0, 3.0, 6),
}

_ESTIMATE_ALGOS = tuple(a.value for a in AlgorithmKind) + (GS5,)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rspose",
        description="Rolling-shutter relative pose benchmarks and "
                    "estimation")
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("synth-sweep",
                           help="run a synthetic sweep and write CSV")
    sweep.add_argument("--sweep", required=True, choices=SWEEP_VARIABLES)
    sweep.add_argument("--motion", default="forward",
                       choices=("forward", "sideways"))
    sweep.add_argument("--algos", default="uniform9,uniform11,gs5",
                       help="comma-separated algorithm names")
    sweep.add_argument("--trials", type=int, default=100)
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument("--out", required=True, help="output CSV path")
    sweep.add_argument("--range", nargs=3, type=float, default=None,
                       metavar=("MIN", "MAX", "STEPS"),
                       help="override the default sweep range")
    sweep.add_argument("--outliers", type=float, default=0.0,
                       help="outlier fraction in [0, 1); enables RANSAC")
    sweep.add_argument("--runtime", action="store_true",
                       help="record wall-clock runtime per trial "
                            "(breaks byte-determinism)")

    summ = sub.add_parser("summarize",
                          help="summarize a sweep CSV per algorithm/value")
    summ.add_argument("--in", dest="in_path", required=True)
    summ.add_argument("--metric", default="rot_err_deg",
                      choices=("rot_err_deg", "trans_err_deg",
                               "runtime_ms"))

    est = sub.add_parser("estimate",
                         help="estimate relative pose from a "
                              "correspondence file")
    est.add_argument("--in", dest="in_path", required=True)
    est.add_argument("--algo", required=True, choices=_ESTIMATE_ALGOS)
    est.add_argument("--ransac-px", type=float, default=1.0,
                     help="RANSAC inlier threshold in pixels")
    est.add_argument("--no-refine", action="store_true",
                     help="skip nonlinear refinement on the inliers")
    est.add_argument("--seed", type=int, default=0)
    return parser


def _cmd_synth_sweep(args) -> int:
    rng = args.range if args.range is not None \
        else _DEFAULT_RANGES[args.sweep]
    try:
        spec = SweepSpec(
            variable=args.sweep,
            sweep_range=(float(rng[0]), float(rng[1]), int(rng[2])),
            motion=args.motion,
            algorithms=tuple(a.strip() for a in args.algos.split(",")),
            trials=args.trials, seed=args.seed,
            outlier_fraction=args.outliers)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    run_sweep(spec, out_path=args.out, record_runtime=args.runtime)
    return 0


def _cmd_summarize(args) -> int:
    try:
        with open(args.in_path, encoding="utf-8") as fh:
            text = fh.read()
        summaries = summarize(text, metric=args.metric)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    print(format_summary(summaries))
    return 0


def _nums(vals) -> str:
    return " ".join(repr(float(v)) for v in vals)


def _cmd_estimate(args) -> int:
    try:
        problem = load_problem(args.in_path)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except CorrespondenceFileError as exc:
        print(f"error: {args.in_path}: {exc}", file=sys.stderr)
        return EXIT_PARSE

    imu1, imu2 = problem.imu1, problem.imu2
    if args.algo == GS5:
        algorithm = AlgorithmKind.ANGULAR5
        z = np.zeros(3)
        imu1 = InertialMeasurement(gravity=imu1.gravity, angular_velocity=z)
        imu2 = InertialMeasurement(gravity=imu2.gravity, angular_velocity=z)
    else:
        algorithm = AlgorithmKind(args.algo)

    rcfg = RansacConfig(threshold_px=args.ransac_px,
                        focal=problem.intrinsics.focal, seed=args.seed)
    readout = problem.intrinsics.readout
    try:
        result = ransac_estimate(algorithm, problem.correspondences,
                                 imu1, imu2, readout, rcfg, SolverConfig())
    except InsufficientPointsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_POINTS
    except DegenerateConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION

    est = result.best.estimate
    inliers = [c for c, keep in zip(problem.correspondences,
                                    result.inlier_mask) if keep]
    if not args.no_refine and inliers:
        try:
            est = refine(est, inliers, imu1, imu2, readout, RefineConfig())
        except RefinementError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_ESTIMATION

    print(f"algorithm: {args.algo}")
    print(f"inliers: {len(inliers)} / {len(problem.correspondences)}")
    print(f"rotation quaternion (w x y z): {_nums(est.rotation.q)}")
    print("rotation matrix:")
    for row in est.rotation.matrix:
        print(f"  {_nums(row)}")
    print(f"translation: {_nums(est.translation)}")
    for name in ("d1", "d2", "w1", "w2"):
        print(f"{name}: {_nums(getattr(est, name))}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "synth-sweep":
        return _cmd_synth_sweep(args)
    if args.command == "summarize":
        return _cmd_summarize(args)
    return _cmd_estimate(args)


if __name__ == "__main__":
    sys.exit(main())
