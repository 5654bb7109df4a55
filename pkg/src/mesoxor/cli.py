"""Command line: ``mesoxor <experiment> [--config F] [--seed N] [--jobs N] [--out DIR]``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import EXPERIMENTS, default_config, load_config
from .errors import ConfigError, NumericalError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mesoxor", description=__doc__)
    ap.add_argument("experiment", choices=EXPERIMENTS)
    ap.add_argument("--config", type=Path, help="sectioned key = value file")
    ap.add_argument("--seed", type=int, help="overrides [run] seed")
    ap.add_argument("--jobs", type=int, help="overrides [run] jobs")
    ap.add_argument("--out", type=Path, help="overrides [run] out_dir")
    return ap


def _fail(code: int, exc: Exception, out: Path | None) -> int:
    rec = {"status": "error", "exit_code": code, "type": type(exc).__name__,
           "message": str(exc)}
    line = json.dumps(rec)
    print(line, file=sys.stderr)
    if out is not None:
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / "error.json").write_text(line + "\n")
        except OSError:
            pass
    return code


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    out = args.out
    try:
        cfg = load_config(args.config) if args.config else default_config(args.experiment)
        if cfg.experiment not in (None, args.experiment):
            raise ConfigError(f"config names experiment {cfg.experiment!r} but "
                              f"{args.experiment!r} was requested")
        cfg = cfg.with_value("run", "experiment", args.experiment)
        if args.seed is not None:
            cfg = cfg.with_value("run", "seed", args.seed)
        if args.jobs is not None:
            cfg = cfg.with_value("run", "jobs", args.jobs)
        if out is not None:
            cfg = cfg.with_value("run", "out_dir", str(out))
        out = Path(cfg.get("run", "out_dir"))
        from .experiments import run_experiment
        rec = run_experiment(cfg, out)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, exc, out)
    except (NumericalError, FloatingPointError, ArithmeticError) as exc:
        return _fail(EXIT_NUMERICAL, exc, out)
    print(json.dumps({"status": "ok", "experiment": rec["experiment"], "out": str(out),
                      "files": rec["files"]}))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
