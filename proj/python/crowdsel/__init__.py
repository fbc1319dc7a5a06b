"""Selecting strangers to ask on social media."""

from ._core import *  # noqa: F401,F403
from ._core import Matrix, Model, ParseError, ValidationError

__all__ = [name for name in dir() if not name.startswith("_")]
