"""
cocycle-lab command line
cocycle-lab <command> [name] --config PATH [--seed U64] [--out DIR] [--workers N] [--override key=value ...]
"""
import argparse
import logging
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import List, Optional, Sequence

from cocycle_lab.commands import COMMANDS
from cocycle_lab.commands.validate import execute_validate
from cocycle_lab.services.gallery import GALLERY_ALIASES
from cocycle_lab.services.suites import SUITE_ALIASES
from cocycle_lab.settings import (
    OUT_ENV,
    config_sha256,
    file_sha256,
    load_config,
    load_environment,
    resolve_log_level,
    shipped_config,
)
from cocycle_lab.storage import RunDirectory, build_manifest, run_directory_name
from cocycle_lab.utils.errors import LabError
from cocycle_lab.utils.workers import configure_worker_pool

logger = logging.getLogger("cocycle_lab")

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
COMMAND_NAMES = [*COMMANDS, "validate"]
NAME_ALIASES = {"suite": SUITE_ALIASES, "gallery": GALLERY_ALIASES}


def configure_logging(level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format=LOG_FORMAT,
        handlers=[logging.StreamHandler(sys.stderr)],
        force=True,
    )


def attach_run_log(path: Path) -> logging.FileHandler:
    handler = logging.FileHandler(path, mode="w", encoding="utf-8")
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logging.getLogger().addHandler(handler)
    return handler


def detach_run_log(handler: logging.FileHandler) -> None:
    logging.getLogger().removeHandler(handler)
    handler.close()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cocycle-lab",
        description="Finite-horizon recurrence experiments for R^d-valued cocycles",
    )
    parser.add_argument("command", choices=COMMAND_NAMES)
    parser.add_argument("name", nargs="?", help="suite or gallery entry name")
    parser.add_argument("--config", type=Path, help="experiment config (JSON)")
    parser.add_argument("--seed", type=int, help="master seed, overrides the config")
    parser.add_argument("--out", help=f"output directory (falls back to ${OUT_ENV}, then the config)")
    parser.add_argument("--workers", type=int, help="worker threads (falls back to $COCYCLE_LAB_WORKERS)")
    parser.add_argument(
        "--override", action="append", default=[], metavar="KEY=VALUE",
        help="dotted config edit, e.g. suite.horizon=1000 or cocycle=constant:1",
    )
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")
    return parser


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def run(
    command: str,
    name: Optional[str] = None,
    config_path: Optional[Path] = None,
    overrides: Sequence[str] = (),
    seed: Optional[int] = None,
    out: Optional[str] = None,
    workers: Optional[int] = None,
) -> int:
    """Run one command and write its artifacts; returns the process exit code"""
    if command not in COMMAND_NAMES:
        logger.error(f"❌ Unknown command {command!r}")
        return 2
    started_at = _timestamp()
    clock = time.perf_counter()
    if config_path is None and name and command in NAME_ALIASES:
        config_path = shipped_config(command, NAME_ALIASES[command].get(name, name))
        if config_path is not None:
            logger.info(f"🔧 No --config given, using {config_path}")

    if command == "validate":
        output_dir = out or os.getenv(OUT_ENV) or "runs"
        store = RunDirectory(Path(output_dir) / run_directory_name(command, name))
        config_hash = file_sha256(config_path)
        pool = configure_worker_pool(workers)
        handler = attach_run_log(store.log_path)
        try:
            exit_code = execute_validate(config_path, overrides, store)
        finally:
            detach_run_log(handler)
    else:
        try:
            config = load_config(config_path, overrides, seed, out)
        except LabError as e:
            logger.error(f"❌ {e}")
            return e.exit_code
        store = RunDirectory(Path(config.output_dir) / run_directory_name(command, name))
        config_hash = config_sha256(config)
        pool = configure_worker_pool(workers)
        handler = attach_run_log(store.log_path)
        try:
            logger.info(f"🚀 Running {command}{' ' + name if name else ''} into {store.root}")
            exit_code = COMMANDS[command](config, name, store)
        except LabError as e:
            logger.error(f"❌ {type(e).__name__}: {e}")
            exit_code = e.exit_code
        except Exception as e:
            logger.exception(f"❌ Unexpected failure: {e}")
            exit_code = 1
        finally:
            detach_run_log(handler)

    manifest = build_manifest(
        command=command,
        name=name,
        config_hash=config_hash,
        workers=pool.workers,
        started_at=started_at,
        finished_at=_timestamp(),
        wall_time=time.perf_counter() - clock,
        exit_code=exit_code,
    )
    store.write_manifest(manifest)
    logger.info(f"✅ {command} finished with exit code {exit_code} in {manifest.wall_time_seconds:.1f}s")
    return exit_code


def main(argv: Optional[List[str]] = None) -> int:
    load_environment()
    args = build_parser().parse_args(argv)
    configure_logging(resolve_log_level(args.log_level))
    return run(
        args.command,
        name=args.name,
        config_path=args.config,
        overrides=args.override,
        seed=args.seed,
        out=args.out,
        workers=args.workers,
    )


if __name__ == "__main__":
    sys.exit(main())
