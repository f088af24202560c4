class IRBError(Exception):
    """Base class for every error raised by the irb-scene package."""


__all__ = ["IRBError"]
