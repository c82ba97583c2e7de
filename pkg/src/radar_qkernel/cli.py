"""Command-line front end: ``radar-qkernel <command> [options]``.

Commands
--------
generate      write dataset containers for one or both tracks
bench         run the clean protocol plus the test-time noise cells and emit reports
noise-sweep   run only the noise cells (sigma > 0 at the noise dimensions)
report        re-render tables and plots from an existing raw CSV
selftest      run the oracle-equivalence and invariant checks
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import bench as bench_mod
from .datasets import TASKS, ManifestError, build_fall_dataset, build_uav_dataset, load_dataset, save_dataset
from .report import FORMATS, emit_report, read_raw_csv

log = logging.getLogger("radar_qkernel")

EXIT_USAGE = 2
EXIT_MISSING = 3
EXIT_MANIFEST = 4
EXIT_RUN = 5
EXIT_SELFTEST = 6


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _tracks(track: str) -> tuple[str, ...]:
    return TASKS if track == "both" else (track,)


def _kernels(kind: str) -> tuple[str, ...]:
    return bench_mod.KERNELS if kind == "both" else (kind,)


def _add_track(p, default="both"):
    p.add_argument("--track", choices=("uav", "fall", "both"), default=default)


def _add_generation(p):
    p.add_argument("--seed", type=int, default=7, help="generator seed (default 7)")
    p.add_argument("--per-class", type=int, default=200, help="UAV samples per class (default 200)")
    p.add_argument("--clips", type=int, default=16, help="fall clips (default 16)")
    p.add_argument("--frames", type=int, default=None, help="frames per fall clip (default: random in 480..640)")


def _add_protocol(p, sigmas_default):
    p.add_argument("--data", type=Path, help="directory holding uav/ and fall/ containers; generated in memory if omitted")
    _add_generation(p)
    p.add_argument("--seeds", type=_int_list, default=bench_mod.PROTOCOL_SEEDS)
    p.add_argument("--dims", type=_int_list, default=bench_mod.PROTOCOL_DIMS)
    p.add_argument("--noise-dims", type=_int_list, default=bench_mod.NOISE_DIMS)
    p.add_argument("--sigmas", type=_float_list, default=sigmas_default)
    p.add_argument("--kernels", choices=("rbf", "quantum", "both"), default="both")
    p.add_argument("--C", type=float, default=1.0, help="SVM box constraint (default 1.0)")
    p.add_argument("--tol", type=float, default=1e-3, help="SMO stopping tolerance (default 1e-3)")
    p.add_argument("--test-fraction", type=float, default=bench_mod.TEST_FRACTION)
    p.add_argument("--threads", type=int, default=1, help="parallel (task, seed) cells")
    p.add_argument("--format", type=lambda s: tuple(s.split(",")), default=FORMATS, help="csv,markdown,svg")
    p.add_argument("--out", type=Path, required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="radar-qkernel", description="Radar RBF vs quantum-kernel SVM benchmark")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write dataset containers")
    _add_track(g)
    _add_generation(g)
    g.add_argument("--out", type=Path, required=True, help="container directory (one track) or parent directory (both)")

    b = sub.add_parser("bench", help="clean protocol plus noise cells")
    _add_track(b)
    _add_protocol(b, bench_mod.PROTOCOL_SIGMAS)

    n = sub.add_parser("noise-sweep", help="noise cells only")
    _add_track(n)
    _add_protocol(n, tuple(s for s in bench_mod.PROTOCOL_SIGMAS if s > 0))

    r = sub.add_parser("report", help="re-render reports from a raw CSV")
    r.add_argument("--raw", type=Path, required=True)
    r.add_argument("--format", type=lambda s: tuple(s.split(",")), default=FORMATS)
    r.add_argument("--out", type=Path, help="output directory (default: next to the raw CSV)")

    sub.add_parser("selftest", help="oracle-equivalence and invariant checks")
    return parser


def _build(task: str, args):
    if task == "uav":
        return build_uav_dataset(args.per_class, args.seed)
    kwargs = {} if args.frames is None else {"n_frames": args.frames}
    return build_fall_dataset(args.clips, args.seed, **kwargs)


def cmd_generate(args) -> int:
    tracks = _tracks(args.track)
    for task in tracks:
        dest = args.out / task if len(tracks) > 1 else args.out
        ds = _build(task, args)
        save_dataset(ds, dest)
        print(f"wrote {len(ds)} {task} samples to {dest}")
    return 0


def _load_or_build(args, tracks):
    datasets = {}
    for task in tracks:
        if args.data is None:
            log.info("generating %s dataset in memory", task)
            datasets[task] = _build(task, args)
            continue
        path = args.data / task
        if not path.is_dir():
            raise CliError(f"dataset directory not found: {path}", EXIT_MISSING)
        try:
            ds = load_dataset(path)
        except FileNotFoundError as exc:
            raise CliError(f"missing dataset file: {exc}", EXIT_MISSING) from exc
        except ManifestError as exc:
            raise CliError(f"malformed manifest: {exc}", EXIT_MANIFEST) from exc
        if ds.task != task:
            raise CliError(f"{path} holds a {ds.task!r} dataset, expected {task!r}", EXIT_MANIFEST)
        datasets[task] = ds
    return datasets


def _protocol(args, noise_only: bool) -> int:
    tracks = _tracks(args.track)
    if any(s < 0 for s in args.sigmas):
        raise CliError("sigmas must be non-negative", EXIT_USAGE)
    if args.threads < 1:
        raise CliError("--threads must be at least 1", EXIT_USAGE)
    unknown = set(args.format) - set(FORMATS)
    if unknown:
        raise CliError(f"unknown report format(s): {', '.join(sorted(unknown))}", EXIT_USAGE)
    dims = args.noise_dims if noise_only else args.dims
    sigmas = tuple(s for s in args.sigmas if s > 0) if noise_only else args.sigmas
    cfg = bench_mod.BenchConfig(
        tasks=tracks,
        seeds=args.seeds,
        dims=dims,
        kernels=_kernels(args.kernels),
        sigmas=sigmas,
        noise_dims=args.noise_dims,
        C=args.C,
        tol=args.tol,
        test_fraction=args.test_fraction,
        threads=args.threads,
    )
    datasets = _load_or_build(args, tracks)
    try:
        report = bench_mod.run_benchmark(cfg, datasets)
    except (bench_mod.BenchmarkError, ValueError) as exc:
        raise CliError(f"benchmark failed: {exc}", EXIT_RUN) from exc
    records = report.records
    if noise_only:
        records = [r for r in records if r.sigma > 0]
    for path in emit_report(args.out, records, formats=args.format):
        print(f"wrote {path}")
    return 0


def cmd_report(args) -> int:
    if not args.raw.is_file():
        raise CliError(f"raw CSV not found: {args.raw}", EXIT_MISSING)
    try:
        records = read_raw_csv(args.raw)
    except ValueError as exc:
        raise CliError(f"malformed raw CSV: {exc}", EXIT_MANIFEST) from exc
    unknown = set(args.format) - set(FORMATS)
    if unknown:
        raise CliError(f"unknown report format(s): {', '.join(sorted(unknown))}", EXIT_USAGE)
    out = args.out or args.raw.parent
    # The raw CSV is the input here; rewriting it would be pointless at best.
    for path in emit_report(out, records, formats=args.format, write_raw=False):
        print(f"wrote {path}")
    return 0


def cmd_selftest(args) -> int:
    from .selftest import run_all

    results = run_all()
    for r in results:
        print(r.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else EXIT_SELFTEST


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # argparse exits with status 2 on unknown flags
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    handlers = {
        "generate": cmd_generate,
        "bench": lambda a: _protocol(a, noise_only=False),
        "noise-sweep": lambda a: _protocol(a, noise_only=True),
        "report": cmd_report,
        "selftest": cmd_selftest,
    }
    try:
        return handlers[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING


if __name__ == "__main__":
    sys.exit(main())
