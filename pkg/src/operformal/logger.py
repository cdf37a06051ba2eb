import logging
import sys

# Create a logger shared by every operformal module
logger = logging.getLogger("operformal")
logger.setLevel(logging.WARNING)

# Add a console handler only if the logger has no handlers
if not logger.hasHandlers():
    # stderr keeps stdout free for --json reports
    console_handler = logging.StreamHandler(sys.stderr)
    formatter = logging.Formatter(
        "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    )
    console_handler.setFormatter(formatter)

    logger.addHandler(console_handler)


def set_verbosity(level: int) -> None:
    """Maps the CLI -v count onto a logging level (0 warning, 1 info, 2+ debug)."""
    if level >= 2:
        logger.setLevel(logging.DEBUG)
    elif level == 1:
        logger.setLevel(logging.INFO)
    else:
        logger.setLevel(logging.WARNING)


if __name__ == "__main__":
    set_verbosity(2)
    logger.info("Logger initialized and configured.")
    logger.debug("Debug output enabled.")
    logger.warning("This is a warning message.")
