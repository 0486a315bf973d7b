import json
from fractions import Fraction

import numpy as np
import pytest

from singpack.services.lattice import blowup_plane, product_spheres, projective_plane


@pytest.fixture
def plane():
    """CP^2 with a line of area 1"""
    return projective_plane()


@pytest.fixture
def cubic_model():
    """One-point blow-up of CP^2 at capacity 1/2"""
    return blowup_plane(Fraction(1, 2))


@pytest.fixture
def product_model():
    """S^2 x S^2 with areas 1 and 7/10"""
    return product_spheres(Fraction(7, 10))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def cubic_manifold_file(tmp_path):
    """Manifold JSON for the mu = 1/2 cubic model with the two packing curves"""
    path = tmp_path / "cubic.json"
    path.write_text(json.dumps({
        "basis": ["L", "E"],
        "intersection": [[1, 0], [0, -1]],
        "omega": ["1", "-1/2"],
        "curves": [
            {"name": "cubic", "class": [3, -2]},
            {"name": "exceptional", "class": [0, 1]},
        ],
    }))
    return str(path)


@pytest.fixture
def product_manifold_file(tmp_path):
    path = tmp_path / "product.json"
    path.write_text(json.dumps({
        "basis": ["A", "B"],
        "intersection": [[0, 1], [1, 0]],
        "omega": ["0.7", 1],
        "curves": [
            {"name": "S1", "class": [1, 0]},
            {"name": "S2", "class": [0, 1]},
        ],
        "weights": ["7/10", "1"],
        "epsilon": "0",
    }))
    return str(path)
