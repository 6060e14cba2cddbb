"""
Guide-slide Photocell Engine - Command Line Entry Point
Runs the photocell studies from a JSON config and writes CSV/JSON results,
a manifest per run and optional SVG figures.
"""

import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from dotenv import load_dotenv

load_dotenv()

from config import settings  # noqa: E402
from errors import ConfigurationError, EngineError, SchemaMismatchError  # noqa: E402
from photocell import solve_config  # noqa: E402
from schemas import RESULT_COLUMNS, RunConfig  # noqa: E402
from studies.ensemble import ensemble  # noqa: E402
from studies.phasemap import angle_scan, phase_map  # noqa: E402
from studies.pool import resolve_workers  # noqa: E402
from studies.spectrum import process_map, spectrum_histogram  # noqa: E402
from studies.sweeps import grid_power, scaling_study  # noqa: E402
from utils.io_utils import load_config, write_json, write_manifest, write_table  # noqa: E402
from utils.plotting import PLOT_KINDS, emit_plot  # noqa: E402

# ============================================
# Configure Logging
# ============================================

logging.basicConfig(
    level=getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

USAGE_ERRORS = (ConfigurationError, SchemaMismatchError)


# ============================================
# Argument Parsing
# ============================================

def parse_n_values(text: str) -> List[int]:
    """Ring sizes from "2..6" (inclusive range) or "2,3,5"."""
    try:
        if ".." in text:
            lo, hi = (int(part) for part in text.split("..", 1))
            values = list(range(lo, hi + 1))
        else:
            values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid ring sizes: {text!r}") from exc
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError(f"invalid ring sizes: {text!r}")
    return values


def parse_floats(text: str) -> List[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid number list: {text!r}") from exc
    if not values:
        raise argparse.ArgumentTypeError("empty number list")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="photocell", description="Guide-slide superabsorber photocell studies")
    subparsers = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, required=True, help="JSON run configuration")
    common.add_argument("--seed", type=int, help="Override the config seed")
    common.add_argument("--workers", type=int, help="Worker threads (default: config, then GSSA_WORKERS)")
    common.add_argument("--out", type=Path, help="Output directory")
    common.add_argument("--n", type=parse_n_values, help='Ring size(s): "5", "2..6" or "2,4,6"')
    common.add_argument("--suppression", type=parse_floats, help="Comma-separated suppression axis")
    common.add_argument("--gamma-r", type=parse_floats, help="Comma-separated gamma_r axis (eV)")
    common.add_argument("--temps", type=parse_floats, help="Comma-separated phonon temperatures (K)")

    subparsers.add_parser("solve", parents=[common], help="Load-optimised power report for one ring")
    subparsers.add_parser("grid", parents=[common], help="Suppression x gamma_r net-power grid")
    scaling = subparsers.add_parser("scaling", parents=[common], help="Per-site power or strength versus N")
    scaling.add_argument("--mode", choices=["power", "strength"], default="power")
    phasemap = subparsers.add_parser("phasemap", parents=[common], help="Net power over tau_L x r_nn x T_vib")
    phasemap.add_argument("--optimize-angles", action="store_true", help="Search dipole angles at every point")
    subparsers.add_parser("spectrum", parents=[common], help="Transition-frequency histograms")
    subparsers.add_parser("angles", parents=[common], help="Net power over the dipole-angle grid")
    subparsers.add_parser("processmap", parents=[common], help="Optical and phonon process lists")
    ens = subparsers.add_parser("ensemble", parents=[common], help="Disorder ensemble of one study kind")
    ens.add_argument("--kind", choices=["power", "strength", "ladder"])
    ens.add_argument("--fraction", type=float, help="Relative disorder")
    ens.add_argument("--trials", type=int, help="Number of trials")

    plot = subparsers.add_parser("plot", help="Render a result CSV as SVG")
    plot.add_argument("result", type=Path, help="Result CSV")
    plot.add_argument("--kind", choices=sorted(PLOT_KINDS), required=True)
    plot.add_argument("--out", type=Path, help="SVG path (default: next to the CSV)")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Load the config file and apply CLI overrides."""
    top_level: Dict[str, Any] = {}
    if args.n:
        top_level["n_sites"] = args.n[0]
    config = load_config(args.config, top_level)

    updates: Dict[str, Any] = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.workers is not None:
        updates["workers"] = args.workers
    if args.n:
        updates["axes.n_values"] = args.n
    if args.suppression:
        updates["axes.suppression"] = args.suppression
    if args.gamma_r:
        updates["axes.gamma_r"] = args.gamma_r
    if args.temps:
        updates["axes.temperatures"] = args.temps
    if not updates:
        return config
    try:
        return config.with_updates(updates)
    except ValueError as exc:
        raise ConfigurationError(f"Invalid command-line override: {exc}") from exc


def output_dir(args: argparse.Namespace, config: Optional[RunConfig] = None) -> Path:
    if getattr(args, "out", None):
        return Path(args.out)
    if config is not None and config.output_dir:
        return Path(config.output_dir)
    return Path(settings.OUTPUT_DIR or "results") / args.command


# ============================================
# Subcommands
# ============================================

Artifacts = List[Path]


def run_solve(config: RunConfig, args, out: Path, workers: int) -> Artifacts:
    report = solve_config(config)
    row = dict(report.row(), status="ok", error="")
    return [
        write_table([row], RESULT_COLUMNS["solve"], out / "solve.csv"),
        write_json(report.model_dump(), out / "report.json"),
    ]


def _sweep_artifacts(result, columns: Sequence[str], out: Path, name: str) -> Artifacts:
    return [
        write_table(result.rows, columns, out / f"{name}.csv"),
        write_json({"axes": result.axes, "statistics": result.statistics, "seed": result.seed}, out / f"{name}_statistics.json"),
    ]


def run_grid(config: RunConfig, args, out: Path, workers: int) -> Artifacts:
    return _sweep_artifacts(grid_power(config, workers=workers), RESULT_COLUMNS["grid"], out, "grid")


def run_scaling(config: RunConfig, args, out: Path, workers: int) -> Artifacts:
    result = scaling_study(config, mode=args.mode, workers=workers)
    return _sweep_artifacts(result, RESULT_COLUMNS[result.study], out, result.study)


def run_phasemap(config: RunConfig, args, out: Path, workers: int) -> Artifacts:
    optimize = True if args.optimize_angles else None
    return _sweep_artifacts(phase_map(config, optimize=optimize, workers=workers), RESULT_COLUMNS["phasemap"], out, "phasemap")


def run_angles(config: RunConfig, args, out: Path, workers: int) -> Artifacts:
    return _sweep_artifacts(angle_scan(config, workers=workers), RESULT_COLUMNS["angles"], out, "angles")


def run_spectrum(config: RunConfig, args, out: Path, workers: int) -> Artifacts:
    result = spectrum_histogram(config)
    return _sweep_artifacts(result, RESULT_COLUMNS["spectrum_histogram"], out, "spectrum_histogram") + [
        write_table(result.metadata["transitions"], RESULT_COLUMNS["spectrum_transitions"], out / "spectrum_transitions.csv"),
    ]


def run_processmap(config: RunConfig, args, out: Path, workers: int) -> Artifacts:
    return _sweep_artifacts(process_map(config), RESULT_COLUMNS["processmap"], out, "processmap")


def run_ensemble(config: RunConfig, args, out: Path, workers: int) -> Artifacts:
    result = ensemble(config, kind=args.kind, fraction=args.fraction, trials=args.trials, workers=workers)
    return _sweep_artifacts(result, result.metadata["columns"], out, result.study)


COMMANDS: Dict[str, Callable[[RunConfig, argparse.Namespace, Path, int], Artifacts]] = {
    "solve": run_solve,
    "grid": run_grid,
    "scaling": run_scaling,
    "phasemap": run_phasemap,
    "spectrum": run_spectrum,
    "ensemble": run_ensemble,
    "angles": run_angles,
    "processmap": run_processmap,
}


def run(command: str, config: RunConfig, args: argparse.Namespace) -> Tuple[Path, Artifacts]:
    """Run one study subcommand and write its artifacts plus manifest.json."""
    out = output_dir(args, config)
    workers = resolve_workers(config.workers)
    logger.info(f"Running '{command}' for N={config.n_sites} (seed {config.seed}, {workers} worker(s)) into {out}")
    started = time.perf_counter()
    artifacts = COMMANDS[command](config, args, out, workers)
    wall_time = time.perf_counter() - started
    manifest = write_manifest(out, command, config, workers, wall_time, artifacts)
    logger.info(f"'{command}' finished in {wall_time:.1f}s; {len(artifacts)} artifact(s)")
    return out, artifacts + [manifest]


# ============================================
# Error Handling
# ============================================

def report_error(exc: Exception, out: Optional[Path]) -> int:
    """Write the error record to stderr (and error.json when an output dir is known)."""
    if isinstance(exc, EngineError):
        record = exc.to_record()
        logger.error(f"{exc.code}: {exc.message}")
    else:
        record = {"error": "internal_error", "type": type(exc).__name__, "message": str(exc), "details": {}}
        logger.error(f"Unhandled exception: {exc}", exc_info=True)
    if out is not None:
        try:
            write_json(record, out / "error.json")
        except OSError as write_exc:
            logger.warning(f"Could not write error record: {write_exc}")
    print(json.dumps(record), file=sys.stderr)
    return 2 if isinstance(exc, USAGE_ERRORS) else 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    out: Optional[Path] = None if args.command == "plot" else args.out
    try:
        if args.command == "plot":
            emit_plot(args.result, args.kind, args.out)
            return 0
        config = resolve_config(args)
        out = output_dir(args, config)
        run(args.command, config, args)
        return 0
    except Exception as exc:  # noqa: BLE001
        return report_error(exc, out)


# ============================================
# Run Application
# ============================================

if __name__ == "__main__":
    sys.exit(main())
