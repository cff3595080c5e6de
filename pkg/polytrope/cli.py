"""
Polytrope Command Line
File: polytrope/cli.py

Run the solver, reduction, invariant-solution and symmetry workflows from the
shell and write reproducible CSV/JSON artifacts.

    python -m polytrope solve --n 5 --r-max 10 --out traj.csv
    python -m polytrope table --n-list 0,1,1.5,3,5 --out table.csv
    python -m polytrope symmetry-scan --n 3/2 --degree 3 --json

Settings resolve as: defaults < environment (.env) < --config file < flags.

Exit codes:
    0  success
    1  an output file could not be written
    2  bad arguments or config file
    3  input outside an operation's domain (n = 1 for reductions, n <= 3 for
       the invariant solution, ...)
    4  the solver did not converge or ran out of steps
"""

#####################################
# Import Modules
#####################################

# import from Python Standard Library
import argparse
import math
import pathlib
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Callable, Optional, Sequence

# import from external packages
import numpy as np
import pandas as pd

# import from local modules
from polytrope.core_ode import Index, SolverConfig, Termination, as_index, integrate
from polytrope.errors import (
    EXIT_CONVERGENCE,
    EXIT_OK,
    EXIT_OUTPUT_FAILURE,
    EXIT_USAGE,
    ConvergenceError,
    DomainError,
    PolytropeError,
    exit_code_for,
)
from polytrope.reduction import integrate_reduced, roundtrip_residual
from polytrope.symmetry_algebra import (
    determining_scan,
    invariant_infinitesimals,
    rational_index,
    reduced_scan,
    symmetry_residual,
)
from polytrope.symmetry_solutions import scale_solution, singular_samples
from utils.emitters import csv_emitter, json_emitter
from utils.utils_config import REDUCED_FORMS, get_default_settings, load_config_file
from utils.utils_logger import logger

#####################################
# Constants
#####################################

PROG = "polytrope"
TABLE_COLUMNS = ["n", "xi1", "minus_dpsi_at_xi1", "termination"]
ROUNDTRIP_DR = 1e-3
REDUCTION_COMMANDS = {"reduce", "roundtrip"}


class UsageError(Exception):
    """Arguments parsed but do not make a runnable command."""


#####################################
# Run Report
#####################################


@dataclass
class RunReport:
    """What ran, with which settings, what came out, and how it ended."""

    command: str
    argv: list[str]
    config: dict[str, Any] = field(default_factory=dict)
    results: dict[str, Any] = field(default_factory=dict)
    started_at: str = ""
    wall_clock: float = 0.0
    exit_status: int = EXIT_OK

    def to_payload(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "argv": list(self.argv),
            "config": self.config,
            "results": self.results,
            "started_at": self.started_at,
            "wall_clock": round(self.wall_clock, 6),
            "exit_status": self.exit_status,
        }


#####################################
# Argument Parsing
#####################################


def _index_arg(text: str) -> str:
    try:
        as_index(text)
    except (ValueError, ZeroDivisionError, OverflowError, DomainError) as e:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from e
    return text


def _index_list_arg(text: str) -> str:
    for part in text.split(","):
        _index_arg(part)
    return text


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=PROG, description="Lane-Emden polytrope toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=_index_arg, default=None, help="polytropic index, e.g. 3 or 3/2")
    common.add_argument("--rtol", type=float, default=None)
    common.add_argument("--atol", type=float, default=None)
    common.add_argument("--r-switch", dest="r_switch", type=float, default=None)
    common.add_argument("--r-max", dest="r_max", type=float, default=None)
    common.add_argument("--max-steps", dest="max_steps", type=int, default=None)
    common.add_argument("--out", type=pathlib.Path, default=None, help="artifact path (default: stdout)")
    common.add_argument("--json", action="store_true", help="print the run report as JSON")
    common.add_argument("--config", type=pathlib.Path, default=None, help="key=value settings file")

    solve = sub.add_parser("solve", parents=[common], help="integrate from the center, CSV r,psi,dpsi")
    solve.add_argument("--dr", type=float, default=None)
    solve.add_argument("--continue-past-zero", dest="continue_past_zero", action="store_true")

    sub.add_parser("first-zero", parents=[common], help="first zero xi1 and -psi'(xi1)")

    reduce = sub.add_parser("reduce", parents=[common], help="integrate the reduced or Abel form, CSV t,value")
    reduce.add_argument("--form", choices=list(REDUCED_FORMS), default=None)
    reduce.add_argument("--t0", type=float, default=0.0)
    reduce.add_argument("--v0", type=float, default=1.0)
    reduce.add_argument("--t1", type=float, default=1.0)
    reduce.add_argument("--dr", type=float, default=None, help="sample spacing in t")

    roundtrip = sub.add_parser("roundtrip", parents=[common], help="reduced equation vs integrated solution")
    roundtrip.add_argument("--r-lo", dest="r_lo", type=float, default=0.1)
    roundtrip.add_argument("--r-hi", dest="r_hi", type=float, default=None)
    roundtrip.add_argument("--dr", type=float, default=None)

    singular = sub.add_parser("singular", parents=[common], help="invariant solution samples (n > 3)")
    singular.add_argument("--dr", type=float, default=None)
    singular.add_argument("--r-lo", dest="r_lo", type=float, default=None)

    scale = sub.add_parser("scale", parents=[common], help="apply the scaling group to a solution")
    scale.add_argument("--lambda", dest="lam", type=float, default=None)
    scale.add_argument("--dr", type=float, default=None)

    sub.add_parser("symmetry-verify", parents=[common], help="exact check of the scaling generator")

    for name, default in (("symmetry-scan", 3), ("reduced-scan", 2)):
        scan = sub.add_parser(name, parents=[common], help="polynomial-ansatz kernel scan")
        scan.add_argument("--degree", type=int, default=None, help=f"ansatz degree (default {default})")

    table = sub.add_parser("table", parents=[common], help="xi1 table, CSV n,xi1,minus_dpsi_at_xi1,termination")
    table.add_argument("--n-list", dest="n_list", type=_index_list_arg, default=None)
    table.add_argument("--workers", type=int, default=None)
    return parser


#####################################
# Settings
#####################################

# argparse dest -> settings key
_FLAG_KEYS = {
    "rtol": "rtol",
    "atol": "atol",
    "r_switch": "r_switch",
    "r_max": "r_max",
    "max_steps": "max_steps",
    "dr": "dr",
    "workers": "workers",
    "degree": "degree",
    "lam": "lambda",
    "form": "form",
    "n": "n",
    "n_list": "n_list",
}


def resolve_settings(args: argparse.Namespace) -> dict[str, Any]:
    """defaults < environment < config file < flags."""
    settings = get_default_settings()
    if args.config is not None:
        try:
            settings.update(load_config_file(args.config))
        except (FileNotFoundError, ValueError) as e:
            raise UsageError(str(e)) from e
    for dest, key in _FLAG_KEYS.items():
        value = getattr(args, dest, None)
        if value is not None:
            settings[key] = value
    settings.setdefault("form", "u")
    settings.setdefault("degree", 3 if args.command == "symmetry-scan" else 2)
    return settings


def solver_config(settings: dict[str, Any]) -> SolverConfig:
    return SolverConfig(
        rtol=float(settings["rtol"]),
        atol=float(settings["atol"]),
        r_switch=float(settings["r_switch"]),
        r_max=float(settings["r_max"]),
        max_steps=int(settings["max_steps"]),
    )


def _require_index(settings: dict[str, Any]) -> Index:
    if settings.get("n") is None:
        raise UsageError("this command needs --n")
    try:
        return as_index(settings["n"])
    except (ValueError, ZeroDivisionError, OverflowError, DomainError) as e:
        raise UsageError(f"not a number: {settings['n']!r}") from e


# float flags that only exist on some subcommands
_ARG_FLOATS = ("t0", "v0", "t1", "r_lo", "r_hi")


def _validate(args: argparse.Namespace, settings: dict[str, Any]) -> None:
    """Reject inputs before any work is done."""
    if settings.get("form") not in REDUCED_FORMS:
        raise UsageError(f"form must be one of {REDUCED_FORMS}, got {settings.get('form')!r}")
    numbers = {k: v for k, v in settings.items() if isinstance(v, float)}
    numbers.update({k: getattr(args, k) for k in _ARG_FLOATS if getattr(args, k, None) is not None})
    for key, value in numbers.items():
        if not math.isfinite(value):
            raise DomainError(f"{key} must be finite, got {value}")
    if args.command in REDUCTION_COMMANDS and _require_index(settings).value == 1.0:
        raise DomainError("the reduction is undefined for n = 1")
    if float(settings["dr"]) <= 0:
        raise DomainError(f"grid spacing must be positive, got {settings['dr']}")
    if int(settings["workers"]) < 1:
        raise DomainError(f"workers must be at least 1, got {settings['workers']}")


#####################################
# Output
#####################################


def _write_frame(frame: pd.DataFrame, args: argparse.Namespace) -> int:
    if args.out is None:
        if not args.json:
            sys.stdout.write(csv_emitter.render_frame(frame))
        return EXIT_OK
    return EXIT_OK if csv_emitter.emit_frame(frame, path=args.out) else EXIT_OUTPUT_FAILURE


def _write_payload(payload: dict[str, Any], args: argparse.Namespace) -> int:
    if args.out is None:
        if not args.json:
            sys.stdout.write(json_emitter.render_payload(payload))
        return EXIT_OK
    return EXIT_OK if json_emitter.emit_payload(payload, path=args.out) else EXIT_OUTPUT_FAILURE


def _uniform_grid(lo: float, hi: float, step: float) -> np.ndarray:
    m = max(int(round((hi - lo) / step)), 1)
    return np.linspace(lo, hi, m + 1)


def _budget_status(termination: Termination) -> int:
    return EXIT_CONVERGENCE if termination is Termination.STEP_BUDGET_EXHAUSTED else EXIT_OK


#####################################
# Commands
#####################################

Handler = Callable[[argparse.Namespace, dict[str, Any]], tuple[dict[str, Any], int]]


def cmd_solve(args: argparse.Namespace, settings: dict[str, Any]) -> tuple[dict[str, Any], int]:
    idx = _require_index(settings)
    config = solver_config(settings)
    grid = _uniform_grid(0.0, config.r_max, float(settings["dr"]))
    trajectory = integrate(idx, config, r_eval=grid, continue_past_zero=args.continue_past_zero)
    status = _write_frame(trajectory.to_frame(), args)
    results = {
        "n": str(idx),
        "samples": len(trajectory),
        "termination": trajectory.termination.value,
        "xi1": trajectory.xi1,
    }
    return results, status or _budget_status(trajectory.termination)


def cmd_first_zero(args: argparse.Namespace, settings: dict[str, Any]) -> tuple[dict[str, Any], int]:
    idx = _require_index(settings)
    trajectory = integrate(idx, solver_config(settings))
    if trajectory.termination is Termination.STEP_BUDGET_EXHAUSTED:
        raise ConvergenceError(f"n={idx}: step budget exhausted before the first zero or r_max")
    results = {
        "n": str(idx),
        "xi1": trajectory.xi1,
        "minus_dpsi_at_xi1": trajectory.minus_dpsi_at_xi1,
        "termination": trajectory.termination.value,
    }
    if not args.json:
        print("xi1: none" if trajectory.xi1 is None else f"xi1: {trajectory.xi1:.12g}")
    return results, EXIT_OK


def cmd_reduce(args: argparse.Namespace, settings: dict[str, Any]) -> tuple[dict[str, Any], int]:
    idx = _require_index(settings)
    config = solver_config(settings)
    t_eval = None
    if args.dr is not None:
        step = float(settings["dr"])
        t_eval = _uniform_grid(min(args.t0, args.t1), max(args.t0, args.t1), step)
    trajectory = integrate_reduced(idx, (args.t0, args.v0), args.t1, settings["form"], config, t_eval=t_eval)
    status = _write_frame(trajectory.to_frame(), args)
    results = {
        "n": str(idx),
        "form": trajectory.form.value,
        "samples": len(trajectory.samples),
        "termination": trajectory.termination.value,
    }
    return results, status or _budget_status(trajectory.termination)


def cmd_roundtrip(args: argparse.Namespace, settings: dict[str, Any]) -> tuple[dict[str, Any], int]:
    idx = _require_index(settings)
    dr = args.dr if args.dr is not None else ROUNDTRIP_DR
    residual = roundtrip_residual(idx, solver_config(settings), r_lo=args.r_lo, r_hi=args.r_hi, dr=dr)
    if not args.json:
        print(f"roundtrip residual: {residual:.3e}")
    return {"n": str(idx), "residual": residual}, EXIT_OK


def cmd_singular(args: argparse.Namespace, settings: dict[str, Any]) -> tuple[dict[str, Any], int]:
    idx = _require_index(settings)
    dr = float(settings["dr"])
    r_lo = args.r_lo if args.r_lo is not None else dr
    if r_lo <= 0:
        raise DomainError("the invariant solution is sampled for r > 0 only")
    samples = singular_samples(idx, _uniform_grid(r_lo, float(settings["r_max"]), dr))
    frame = pd.DataFrame({"r": [s.r for s in samples], "psi": [s.psi for s in samples], "dpsi": [s.dpsi for s in samples]})
    return {"n": str(idx), "samples": len(samples)}, _write_frame(frame, args)


def cmd_scale(args: argparse.Namespace, settings: dict[str, Any]) -> tuple[dict[str, Any], int]:
    idx = _require_index(settings)
    if settings.get("lambda") is None:
        raise UsageError("scale needs --lambda")
    lam = float(settings["lambda"])
    config = solver_config(settings)
    source = integrate(idx, config, r_eval=_uniform_grid(0.0, config.r_max, float(settings["dr"])))
    scaled = scale_solution(idx, lam, source)
    status = _write_frame(scaled.to_frame(), args)
    results = {"n": str(idx), "lambda": lam, "termination": scaled.termination.value, "xi1": scaled.xi1}
    return results, status or _budget_status(source.termination)


def cmd_symmetry_verify(args: argparse.Namespace, settings: dict[str, Any]) -> tuple[dict[str, Any], int]:
    _require_index(settings)
    n = rational_index(settings["n"])
    xi, eta = invariant_infinitesimals(n)
    residual = symmetry_residual(n, xi, eta)
    message = "residual: 0 (exact)" if residual.is_zero() else f"residual: {residual}"
    if not args.json:
        print(message)
    return {"n": str(n), "xi": str(xi), "eta": str(eta), "residual": str(residual)}, EXIT_OK


def _scan_command(scan: Callable) -> Handler:
    def handler(args: argparse.Namespace, settings: dict[str, Any]) -> tuple[dict[str, Any], int]:
        _require_index(settings)
        result = scan(rational_index(settings["n"]), int(settings["degree"]))
        payload = result.to_payload()
        return payload, _write_payload(payload, args)

    return handler


#####################################
# Table
#####################################


def _table_row(n: str, config: SolverConfig) -> dict[str, str]:
    try:
        idx = as_index(n)
    except (ValueError, ZeroDivisionError, DomainError) as e:
        return {"n": str(n), "xi1": "", "minus_dpsi_at_xi1": "", "termination": f"error: {e}"}
    row = {"n": format(idx.value, "g"), "xi1": "", "minus_dpsi_at_xi1": ""}
    try:
        trajectory = integrate(idx, config)
    except PolytropeError as e:
        logger.error(f"table row n={idx}: {e}")
        row["termination"] = f"error: {e}"
        return row
    if trajectory.xi1 is not None:
        row["xi1"] = f"{trajectory.xi1:.6f}"
        minus = trajectory.minus_dpsi_at_xi1
        row["minus_dpsi_at_xi1"] = "" if minus is None else f"{minus:.6f}"
    row["termination"] = trajectory.termination.value
    return row


def emit_table(n_list: Sequence[str], config: SolverConfig, *, workers: int = 1) -> pd.DataFrame:
    """
    One row per index: n, xi1, -psi'(xi1), termination.

    Rows keep the order of n_list whatever the number of workers; a row that
    fails records the error in its termination cell.
    """
    if not n_list:
        raise DomainError("the table needs at least one index")
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        rows = list(pool.map(lambda n: _table_row(n, config), n_list))
    return pd.DataFrame(rows, columns=TABLE_COLUMNS)


def cmd_table(args: argparse.Namespace, settings: dict[str, Any]) -> tuple[dict[str, Any], int]:
    if settings.get("n_list") is None:
        raise UsageError("table needs --n-list")
    n_list = [part.strip() for part in str(settings["n_list"]).split(",") if part.strip()]
    frame = emit_table(n_list, solver_config(settings), workers=int(settings["workers"]))
    return {"rows": frame.to_dict(orient="records")}, _write_frame(frame, args)


COMMANDS: dict[str, Handler] = {
    "solve": cmd_solve,
    "first-zero": cmd_first_zero,
    "reduce": cmd_reduce,
    "roundtrip": cmd_roundtrip,
    "singular": cmd_singular,
    "scale": cmd_scale,
    "symmetry-verify": cmd_symmetry_verify,
    "symmetry-scan": _scan_command(determining_scan),
    "reduced-scan": _scan_command(reduced_scan),
    "table": cmd_table,
}


#####################################
# Entry Points
#####################################


def _settings_payload(settings: dict[str, Any]) -> dict[str, Any]:
    return {k: (v if isinstance(v, (int, float, bool)) or v is None else str(v)) for k, v in sorted(settings.items())}


def run(argv: Optional[Sequence[str]] = None) -> RunReport:
    """Parse argv, execute one command and return its report."""
    argv = list(sys.argv[1:] if argv is None else argv)
    report = RunReport(command="", argv=argv, started_at=datetime.now(timezone.utc).isoformat())
    clock = time.perf_counter()

    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        report.exit_status = EXIT_USAGE if e.code not in (0, None) else EXIT_OK
        report.wall_clock = time.perf_counter() - clock
        return report

    report.command = args.command
    try:
        settings = resolve_settings(args)
        report.config = _settings_payload(settings)
        logger.debug(f"{args.command}: resolved settings {report.config}")
        _validate(args, settings)
        report.results, report.exit_status = COMMANDS[args.command](args, settings)
    except UsageError as e:
        logger.error(f"{PROG} {args.command}: {e}")
        report.exit_status = EXIT_USAGE
    except PolytropeError as e:
        logger.error(f"{PROG} {args.command}: {type(e).__name__}: {e}")
        report.exit_status = exit_code_for(e)
    except OSError as e:
        logger.error(f"{PROG} {args.command}: cannot write output: {e}")
        report.exit_status = EXIT_OUTPUT_FAILURE

    report.wall_clock = time.perf_counter() - clock
    if args.json:
        sys.stdout.write(json_emitter.render_payload(report.to_payload()))
    return report


def main(argv: Optional[Sequence[str]] = None) -> int:
    return run(argv).exit_status


#####################################
# Conditional Execution
#####################################

if __name__ == "__main__":
    sys.exit(main())
