"""HTTP API and admin CLI."""

from .config import ApiConfig

__all__ = ["ApiConfig"]
