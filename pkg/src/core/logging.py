import logging
import sys

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level: str = "INFO") -> logging.Logger:
    """Install one stderr handler on the package logger; idempotent."""
    logger = logging.getLogger("src")
    logger.setLevel(level.upper())
    if not any(getattr(h, "_irb_handler", False) for h in logger.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._irb_handler = True  # type: ignore[attr-defined]
        logger.addHandler(handler)
    return logger
