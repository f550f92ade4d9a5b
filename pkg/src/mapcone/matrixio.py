"""JSON encoding of complex matrices.

A matrix file holds ``{"rows": n, "cols": m, "re": [[...]], "im": [[...]]}``; ``im``
may be omitted for real matrices.
"""

from __future__ import annotations

import json
from typing import TYPE_CHECKING, Self

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveInt, ValidationError, model_validator

from mapcone.core import DIM2, ComplexArray, DensityMatrix9, as_matrix
from mapcone.logging import get_logger

if TYPE_CHECKING:
    from pathlib import Path

    import numpy.typing as npt

logger = get_logger(__name__)


class MatrixFormatError(Exception):
    """Raised when a matrix file cannot be parsed into the expected shape."""

    @classmethod
    def unreadable(cls, path: Path) -> MatrixFormatError:
        """Create error for a file that is not valid matrix JSON."""
        return cls(f"Could not read a matrix from {path}")

    @classmethod
    def wrong_shape(cls, path: Path, actual: tuple[int, int], expected: tuple[int, int]) -> MatrixFormatError:
        """Create error for a matrix of unexpected dimensions."""
        return cls(f"Matrix in {path} has shape {actual}, expected {expected}")


class MatrixPayload(BaseModel):
    """Serialized complex matrix."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    rows: PositiveInt = Field(description="Number of rows")
    cols: PositiveInt = Field(description="Number of columns")
    re: list[list[float]] = Field(description="Real parts, row-major")
    im: list[list[float]] | None = Field(default=None, description="Imaginary parts, row-major")

    @model_validator(mode="after")
    def check_dimensions(self) -> Self:
        """Check that ``re`` and ``im`` match ``rows`` x ``cols``."""
        for name, block in (("re", self.re), ("im", self.im)):
            if block is None:
                continue
            if len(block) != self.rows or any(len(row) != self.cols for row in block):
                raise ValueError(f"'{name}' does not have {self.rows} rows of {self.cols} entries")
        return self

    def to_array(self) -> ComplexArray:
        """Return the matrix as a complex array."""
        real = np.asarray(self.re, dtype=float)
        imaginary = np.zeros_like(real) if self.im is None else np.asarray(self.im, dtype=float)
        return real + 1j * imaginary

    @classmethod
    def from_array(cls, matrix: npt.ArrayLike) -> MatrixPayload:
        """Encode a 2-d array."""
        array = np.atleast_2d(np.asarray(matrix, dtype=np.complex128))
        return cls(
            rows=array.shape[0],
            cols=array.shape[1],
            re=array.real.tolist(),
            im=array.imag.tolist(),
        )


def load_payload(path: Path) -> MatrixPayload:
    """Read and validate a matrix file.

    Raises
    ------
    MatrixFormatError
        If the file cannot be read or does not hold a valid payload.

    """
    try:
        payload = MatrixPayload.model_validate(json.loads(path.read_text()))
    except (OSError, json.JSONDecodeError, ValidationError) as e:
        raise MatrixFormatError.unreadable(path) from e
    logger.debug("Loaded %dx%d matrix from %s", payload.rows, payload.cols, path)
    return payload


def load_matrix(path: Path, shape: tuple[int, int]) -> ComplexArray:
    """Read a matrix of the given shape.

    Raises
    ------
    MatrixFormatError
        If the file is malformed or the shape differs.

    """
    payload = load_payload(path)
    if (payload.rows, payload.cols) != shape:
        raise MatrixFormatError.wrong_shape(path, (payload.rows, payload.cols), shape)
    return as_matrix(payload.to_array(), shape, path.name)


def load_density_matrix(path: Path) -> DensityMatrix9:
    """Read a 9x9 matrix and validate it as a density matrix."""
    return DensityMatrix9.from_matrix(load_matrix(path, (DIM2, DIM2)))


def dump_matrix(matrix: npt.ArrayLike) -> dict[str, object]:
    """Return the JSON-ready payload of a matrix."""
    return MatrixPayload.from_array(matrix).model_dump()
