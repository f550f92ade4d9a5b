"""Choi matrix calculus and certificates for positive maps on 3x3 matrices."""

from importlib import metadata

try:
    __version__ = metadata.version("mapcone")
except metadata.PackageNotFoundError:  # pragma: no cover
    __version__ = "unknown"
