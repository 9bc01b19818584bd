import argparse
import logging
import os
import sys
from typing import List, Optional

from brittle_limit.config import config
from brittle_limit.models.errors import BrittleLimitError, ConfigError, NumericalError
from brittle_limit.models.run_config import RunConfig
from brittle_limit.services.artifact_store import ArtifactStore
from brittle_limit.services.parallel import resolve_jobs
from brittle_limit.commands import COMMANDS

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_CONFIG = 2

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def _setup_logging(cfg):
    handlers = [logging.StreamHandler(sys.stderr)]
    if cfg.LOG_FILE:
        handlers.append(logging.FileHandler(cfg.LOG_FILE))
    logging.basicConfig(level=getattr(logging, cfg.LOG_LEVEL, logging.INFO),
                        format=LOG_FORMAT, handlers=handlers, force=True)


def create_cli(config_name: str = 'default') -> argparse.ArgumentParser:
    """Build the argument parser and configure logging for ``config_name``."""
    cfg = config[config_name]
    _setup_logging(cfg)

    parser = argparse.ArgumentParser(prog='brittle-limit',
                                     description='Effective densities and limits of brittle damage energies')
    parser.set_defaults(cfg=cfg)
    subparsers = parser.add_subparsers(dest='command', required=True)
    for name, module in COMMANDS.items():
        sub = subparsers.add_parser(name, help=module.HELP)
        sub.add_argument('--config', required=True, help='JSON run configuration')
        sub.add_argument('--jobs', type=int, default=None, help='worker processes (default BRITTLE_LIMIT_JOBS)')
        sub.add_argument('--seed', type=int, default=None, help='base random seed')
        sub.add_argument('--out', default=None, help='output directory')
        sub.set_defaults(handler=module.run)

    logger.debug(f"CLI created with {config_name} configuration")
    return parser


def _resolve(args: argparse.Namespace) -> RunConfig:
    cfg = args.cfg
    run_config = RunConfig.from_file(args.command, args.config)
    # command-line flags override the file, which overrides the environment
    if args.jobs is not None:
        if args.jobs < 1:
            raise ConfigError(f"--jobs must be positive, got {args.jobs}")
        run_config.jobs = args.jobs
    run_config.jobs = resolve_jobs(run_config.jobs)
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError(f"--seed must be non-negative, got {args.seed}")
        run_config.seed = args.seed
    if run_config.seed is None:
        run_config.seed = cfg.DEFAULT_SEED
    run_config.out = args.out or run_config.out or cfg.OUT_DIR
    run_config.config = cfg
    return run_config


def main(argv: Optional[List[str]] = None) -> int:
    config_name = os.getenv('BRITTLE_LIMIT_ENV', 'default')
    if config_name not in config:
        config_name = 'default'
    parser = create_cli(config_name)
    args = parser.parse_args(argv)

    try:
        run_config = _resolve(args)
    except ConfigError as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_CONFIG

    try:
        store = ArtifactStore(run_config.out, args.cfg.FLOAT_FORMAT)
        logger.info(f"Running {args.command} with {run_config.jobs} job(s), seed {run_config.seed}, "
                    f"output in {run_config.out}")
        return args.handler(run_config, store)
    except ConfigError as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_CONFIG
    except (NumericalError, ValueError) as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_NUMERICAL
    except BrittleLimitError as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_NUMERICAL


__all__ = ['create_cli', 'main']
