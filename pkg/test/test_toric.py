from fractions import Fraction

import numpy as np
import pytest

from singpack.core.exceptions import InputError, OutOfRangeError
from singpack.services.lattice import blowup_plane_points, symplectic_volume
from singpack.services.svg import render_svg
from singpack.services.toric import (
    PLANE_TRIANGLE,
    Basin,
    Polytope,
    ToricField,
    basin_areas,
    basin_triangles,
    build_polytope,
    chop,
    classify_batch,
    cubic_pipeline,
    polytope_area,
    product_field_classify,
    separatrix_drift,
    separatrix_sign,
)

F = Fraction


@pytest.fixture
def field():
    return ToricField(1, F(7, 10))


class TestPolytope:

    def test_rejects_clockwise(self):
        """Test clockwise vertices are rejected"""
        with pytest.raises(InputError, match="counterclockwise"):
            Polytope(((0, 0), (0, 1), (1, 0)))

    def test_rejects_collinear(self):
        """Test a vertex in the middle of an edge is rejected"""
        with pytest.raises(InputError):
            Polytope(((0, 0), (1, 0), (2, 0), (0, 1)))

    def test_shoelace(self):
        """Test exact areas of a rectangle and an ellipsoid triangle"""
        assert polytope_area(build_polytope("rectangle", {"w": "3/2", "h": 2})) == 3
        assert build_polytope("ellipsoid_triangle", {"a": 3, "b": F(1, 3)}).area == F(1, 2)

    def test_unknown_kind(self):
        """Test an unknown polytope kind"""
        with pytest.raises(InputError, match="Unknown polytope kind"):
            build_polytope("hexagon", {})


class TestChop:

    def test_plane_blowup(self):
        """Test the plane triangle chopped at the origin by 1/2"""
        chopped = chop(PLANE_TRIANGLE, 0, F(1, 2))
        assert chopped.vertices == ((0, F(1, 2)), (F(1, 2), 0), (1, 0), (0, 1))
        assert chopped.area == F(3, 8)

    @pytest.mark.parametrize("mu", [F(1, 10), F(1, 3), F(13, 20)])
    def test_area_drops_by_half_square(self, mu):
        """Test a chop of size mu removes area mu^2/2"""
        assert chop(PLANE_TRIANGLE, 0, mu).area == PLANE_TRIANGLE.area - mu ** 2 / 2

    def test_two_chops_match_lattice_volume(self):
        """Test chopping two corners agrees with the two-point blow-up volume"""
        once = chop(PLANE_TRIANGLE, 0, F(1, 3))
        twice = build_polytope("chop", {"polytope": once, "corner": 2, "mu": F(1, 4)})
        assert len(twice) == 5
        assert twice.area == symplectic_volume(blowup_plane_points([F(1, 3), F(1, 4)]))

    def test_too_large(self):
        """Test a chop longer than the adjacent edges"""
        with pytest.raises(OutOfRangeError):
            chop(PLANE_TRIANGLE, 0, F(3, 2))

    def test_non_positive(self):
        """Test a chop of size zero"""
        with pytest.raises(InputError):
            chop(PLANE_TRIANGLE, 0, 0)

    def test_non_smooth_corner(self):
        """Test a corner whose edge directions are not a lattice basis"""
        kite = Polytope(((0, 0), (2, 1), (0, 1)))
        with pytest.raises(InputError, match="not smooth"):
            chop(kite, 0, F(1, 10))


class TestProductField:

    def test_sign(self, field):
        """Test the exact separatrix sign at the example point"""
        assert separatrix_sign(field, ["1/2", "1/10"]) == F(-1, 4)

    @pytest.mark.parametrize("point", [["1/2"], ["1/2", "1/10", "0"]])
    def test_sign_needs_two_coordinates(self, field, point):
        """Test points with the wrong number of coordinates"""
        with pytest.raises(InputError, match="two coordinates"):
            separatrix_sign(field, point)

    @pytest.mark.parametrize("point, basin", [
        (("1/2", "1/10"), Basin.SIGMA1),
        (("1/10", "6/10"), Basin.SIGMA2),
    ])
    def test_examples(self, field, point, basin):
        """Test the sign test and integration agree on both sides"""
        c = product_field_classify(field, point)
        assert c.label == c.integrated == basin
        assert c.agree

    def test_on_separatrix(self, field):
        """Test a point on the diagonal is labelled as the separatrix"""
        c = product_field_classify(field, ["1/2", "7/20"])
        assert c.sign == 0
        assert c.label == Basin.SEPARATRIX == c.integrated

    def test_outside_rectangle(self, field):
        """Test a point on the boundary of the rectangle"""
        with pytest.raises(InputError):
            product_field_classify(field, ["1", "1/2"])

    @pytest.mark.parametrize("mu", [F(7, 10), F(707, 1000), F(1)])
    def test_batch_agrees_with_sign(self, mu, rng):
        """Test batch integration against the sign test away from the diagonal"""
        f = ToricField(1, mu)
        points = rng.uniform(0.01, 0.99, (2000, 2)) * f.corner
        sign = points[:, 1] - points[:, 0] * float(mu)
        clear = np.abs(sign) > 1e-6
        labels = classify_batch(f, points[clear])
        assert np.array_equal(labels, np.where(sign[clear] < 0, "sigma1", "sigma2"))

    def test_batch_is_warning_free(self, field, rng):
        """Test the edge-crossing bookkeeping does no invalid float arithmetic"""
        points = rng.uniform(0.05, 0.95, (200, 2)) * field.corner
        with np.errstate(all="raise"):
            labels = classify_batch(field, points)
        assert len(labels) == 200

    @pytest.mark.parametrize("mu", [F(7, 10), F(707, 1000), F(1)])
    def test_separatrix_invariant(self, mu):
        """Test trajectories started on the diagonal stay on it"""
        assert separatrix_drift(ToricField(1, mu)) <= 1e-9

    def test_basin_areas(self, field):
        """Test the two basins split the rectangle in half"""
        first, second = basin_areas(field)
        assert first == second == F(7, 20)
        assert sum(t.area for t in basin_triangles(field)) == field.rectangle().area


class TestCubicPipeline:

    def test_half(self):
        """Test the ledger at mu = 1/2"""
        report = cubic_pipeline(F(1, 2))
        assert report.volumes == (F(1, 8), F(1, 3), F(1, 24))
        assert report.total == F(1, 2)
        assert report.identity_holds
        assert report.polytope_area == report.lattice_volume == F(3, 8)
        assert report.gammas.gammas == (F(5, 6), F(-1, 3))

    @pytest.mark.parametrize("mu", [F(1, 3), F(1, 2), F(13, 20)])
    def test_fills_plane(self, mu):
        """Test the three pieces fill the plane for several mu"""
        report = cubic_pipeline(mu)
        assert report.total == F(1, 2)
        assert report.labels == ("ball", "cubic", "exceptional")
        assert report.pieces[1].a == 3 - 2 * mu
        assert report.ledger.residual == 0

    def test_identity_for_random_mu(self, rng):
        """Test L - mu E = (1/3)(3L - 2E) + (2/3 - mu) E for random mu"""
        for _ in range(50):
            mu = F(int(rng.integers(1, 2000)), 3000)
            report = cubic_pipeline(mu)
            assert report.identity_holds
            assert report.total == F(1, 2)

    @pytest.mark.parametrize("mu", [0, F(2, 3), 1])
    def test_range(self, mu):
        """Test mu outside (0, 2/3)"""
        with pytest.raises(OutOfRangeError):
            cubic_pipeline(mu)

    def test_to_dict_is_exact(self):
        """Test the report serializes volumes as exact strings"""
        out = cubic_pipeline(F(1, 3)).to_dict()
        assert out["total"] == "1/2"
        assert out["pieces"][0] == {"label": "ball", "a": "1/3", "b": "1/3", "volume": "1/18"}


class TestSvg:

    def test_scale_and_shading(self, field):
        """Test the scale, height and basin shading of the product picture"""
        figure = render_svg(field.rectangle(), field=field, width=640)
        assert figure.scale == 600
        assert figure.height == 460
        assert figure.markup.count("<path") == 3
        assert "scale 600 px per unit" in figure.markup

    def test_write(self, tmp_path):
        """Test the figure is written to disk"""
        figure = render_svg(chop(PLANE_TRIANGLE, 0, F(1, 2)), width=220)
        path = tmp_path / "cubic.svg"
        figure.write(str(path))
        assert path.read_text().startswith("<svg")
        assert figure.scale == 180
