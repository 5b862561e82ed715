"""HTTP service; the command line talks to it with ``--server``."""

from .app import create_app

__all__ = ["create_app"]
