import json

import numpy as np
import pytest

from mapcone.matrixio import dump_matrix


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def write_matrix(tmp_path):
    """Write a matrix file in the JSON layout read by the commands and return its path."""

    def write(matrix, name="matrix.json"):
        path = tmp_path / name
        path.write_text(json.dumps(dump_matrix(matrix)))
        return path

    return write
