from __future__ import annotations
import argparse, logging, sys

from typing import Any, List, Optional, Tuple

from .utils import init_logger
from .config import BUILTIN_MODELS, FORMATS, RunConfig
from .errors import CheckFailure, InvalidInput, QcrbError
from .export import format_for_path, render_csv, render_json, render_table, write_auto
from .ladder import SWEEP_COLUMNS, build_model, compute_ladder, resolve_weight, sweep
from .checks import DEFAULT_SEED, SUITES, all_passed, run_checks, summary_rows

REPORT_COLUMNS = ["quantity", "value", "method"]
CHECK_COLUMNS = ["suite", "status", "worst", "cases", "failing"]

# payload and column order handed to the writers
Output = Tuple[Any, Optional[List[str]]]


def _beta_list(text: str) -> List[float]:
    try:
        return [float(b) for b in text.split(",") if b.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"--beta expects comma separated reals, got '{text}'")


def _r_range(text: str):
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"--r-range expects LO:HI:STEP, got '{text}'")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--r-range expects LO:HI:STEP, got '{text}'")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="qcrb", description="Quantum multiparameter Cramer-Rao bound ladder"
    )
    ap.add_argument("command", choices=["bounds", "sweep", "check"])
    ap.add_argument("--config", type=str, help="Run config (JSON); flags override it")
    ap.add_argument("--model", type=str, help="Model file (JSON)")
    ap.add_argument("--builtin", type=str, choices=BUILTIN_MODELS, help="Builtin example")
    ap.add_argument("--a", type=float, help="Example contraction a in (0, 1)")
    ap.add_argument("--r", type=float, help="Example parameter |theta| in [0, 1)")
    ap.add_argument("--p", type=float, help="Classical example probability")
    ap.add_argument("--weight", type=str, help="identity, sld or a weight file")
    ap.add_argument("--beta", type=_beta_list, help="Extra beta values, e.g. 0,0.5,1")
    ap.add_argument("--r-range", dest="r_range", type=_r_range, help="Sweep grid LO:HI:STEP")
    ap.add_argument("--format", dest="fmt", choices=FORMATS, help="Output format")
    ap.add_argument("--output", type=str, help="Output file (default standard output)")
    ap.add_argument("--seed", type=int, help=f"Check suite seed (default {DEFAULT_SEED})")
    ap.add_argument("--suite", type=str, help=f"Run one suite: {', '.join(SUITES)}")
    ap.add_argument("--jobs", type=int, help="Worker threads for sweep")
    ap.add_argument(
        "--debug",
        default=False,
        help="Show debug messages",
        action="store_const",
        const=True,
    )
    ap.add_argument("--logfile", type=str, help="Also log to this file")
    return ap


def make_config(args: argparse.Namespace, log: logging.Logger) -> RunConfig:
    cfg = RunConfig(log=log)
    if args.config:
        cfg.read_config(args.config)
    else:
        cfg.init_defaults()
    cfg.command = args.command

    if args.model is not None:
        cfg.model_path, cfg.builtin = args.model, None
    if args.builtin is not None:
        cfg.builtin, cfg.model_path = args.builtin, None
    for key in ("a", "r", "p", "weight", "r_range", "fmt", "output", "seed", "suite", "jobs"):
        value = getattr(args, key)
        if value is not None:
            setattr(cfg, key, value)
    if args.beta is not None:
        cfg.beta_list = args.beta
    if args.fmt is None and not args.config:
        implied = format_for_path(cfg.output) if cfg.output else None
        if implied is not None:
            cfg.fmt = implied
        elif cfg.command == "sweep":
            cfg.fmt = "csv"
    cfg.validate()
    return cfg


def cmd_bounds(cfg: RunConfig) -> Output:
    m = build_model(cfg)
    g = resolve_weight(cfg.weight, m)
    report = compute_ladder(m, g, cfg.beta_list, cfg.solver)
    if cfg.fmt == "json":
        return report.to_dict(), None
    return report.rows(), REPORT_COLUMNS


def cmd_sweep(cfg: RunConfig) -> Output:
    rows = sweep(cfg)
    if cfg.fmt == "json":
        return {"rows": rows}, None
    return rows, SWEEP_COLUMNS


def cmd_check(cfg: RunConfig) -> Output:
    """Summary rows; raises CheckFailure after emitting them when a suite fails."""
    results = run_checks(cfg.seed, cfg.suite)
    rows = summary_rows(results)
    out: Output = ({"seed": cfg.seed, "suites": rows}, None) if cfg.fmt == "json" else (rows, CHECK_COLUMNS)
    ok, failing = all_passed(results)
    if not ok:
        _emit(cfg, *out)
        raise CheckFailure(failing)
    return out


def _emit(cfg: RunConfig, data: Any, columns: Optional[List[str]]) -> None:
    if cfg.output:
        write_auto(cfg.output, data, columns, cfg.fmt)
        cfg.log.info("Wrote %s output to %s", cfg.command, cfg.output)
        return
    if cfg.fmt == "json":
        text = render_json(data)
    elif cfg.fmt == "csv":
        text = render_csv(data, columns)
    else:
        text = render_table(data, columns)
    sys.stdout.write(text)


COMMAND_HANDLERS = {"bounds": cmd_bounds, "sweep": cmd_sweep, "check": cmd_check}


def main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)

    log = init_logger(
        "qcrb", level=logging.DEBUG if args.debug else logging.INFO, logfile=args.logfile
    )
    log.debug("Args: %s", args)

    try:
        cfg = make_config(args, log)
        data, columns = COMMAND_HANDLERS[cfg.command](cfg)
        _emit(cfg, data, columns)
    except QcrbError as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return InvalidInput.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
