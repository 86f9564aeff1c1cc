import logging
import sys

from config import settings
from src.cli.commands import COMMANDS, EXIT_BAD_INPUT
from src.cli.config import RunConfig
from src.cli.parser import parse_args

logger = logging.getLogger("tensor_rpca")


def configure_logging(verbose):
    level = logging.WARNING if verbose <= 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format=settings.LOG_FORMAT, stream=sys.stderr, force=True)


def main(argv=None):
    try:
        args = parse_args(argv)
    except (ValueError, OSError) as exc:
        configure_logging(0)
        logger.error("%s", exc)
        return EXIT_BAD_INPUT

    configure_logging(args.verbose)
    try:
        # --- Configuration ---
        cfg = RunConfig.from_args(args)
        cfg.validate_paths()

        # --- Run ---
        logger.info("Running %s", cfg.command)
        code = COMMANDS[cfg.command](cfg)
    except (ValueError, OSError) as exc:
        logger.error("%s", exc)
        return EXIT_BAD_INPUT

    if code != 0:
        logger.warning("%s finished without converging (exit %d); outputs were written", cfg.command, code)
    return code


if __name__ == "__main__":
    sys.exit(main())
