import json

import pytest

from singpack.main import EXIT_INPUT, EXIT_INVARIANT, EXIT_OK, run


def _json(capsys):
    return json.loads(capsys.readouterr().out)


class TestPack:

    def test_cubic_ledger(self, cubic_manifold_file, capsys):
        """Test the cubic and exceptional pieces of the mu = 1/2 blow-up"""
        assert run(["pack", cubic_manifold_file, "--weights", "1/3,1/6"]) == EXIT_OK
        out = _json(capsys)
        assert out["residual"] == "0"
        assert [p["volume"] for p in out["pieces"]] == ["1/3", "1/24"]
        assert out["gammas"] == ["5/6", "-1/3"]

    def test_blow_down(self, cubic_manifold_file, capsys):
        """Test blowing down B(1/2) fills the plane exactly"""
        assert run(["pack", cubic_manifold_file, "--weights", "1/3,1/6", "--ball", "1/2"]) == EXIT_OK
        out = _json(capsys)
        assert out["blown_down"]
        assert out["total_volume"] == out["manifold_volume"] == "1/2"
        assert out["pieces"][-1]["label"] == "B(1/2)"

    def test_weights_from_file(self, product_manifold_file, capsys):
        """Test weights are read from the manifold file when not given"""
        assert run(["pack", product_manifold_file]) == EXIT_OK
        assert _json(capsys)["total_volume"] == "7/10"

    def test_identity_failure(self, cubic_manifold_file, capsys):
        """Test weights that miss [w] exit with the invariant code"""
        assert run(["pack", cubic_manifold_file, "--weights", "1/3,1/5"]) == EXIT_INVARIANT
        captured = capsys.readouterr()
        assert captured.out == ""
        assert "identity" in captured.err

    def test_missing_weights(self, cubic_manifold_file, capsys):
        """Test a pack request without any weights is an input error"""
        assert run(["pack", cubic_manifold_file]) == EXIT_INPUT
        assert "error:" in capsys.readouterr().err

    def test_output_is_byte_identical(self, cubic_manifold_file, capsys):
        """Test repeated runs print the same bytes"""
        run(["pack", cubic_manifold_file, "--weights", "1/3,1/6", "--epsilon", "1/10"])
        first = capsys.readouterr().out
        run(["pack", cubic_manifold_file, "--weights", "1/3,1/6", "--epsilon", "1/10"])
        assert capsys.readouterr().out == first


class TestMalformedInput:

    def test_missing_file(self, tmp_path):
        """Test a missing manifold file"""
        assert run(["pack", str(tmp_path / "missing.json"), "--weights", "1"]) == EXIT_INPUT

    def test_bad_json(self, tmp_path):
        """Test a manifold file that is not JSON"""
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        assert run(["decompose", str(path)]) == EXIT_INPUT

    def test_asymmetric_form(self, tmp_path):
        """Test an intersection form that is not symmetric"""
        path = tmp_path / "asym.json"
        path.write_text(json.dumps({"basis": ["A", "B"], "intersection": [[0, 1], [2, 0]], "omega": [1, 1]}))
        assert run(["decompose", str(path)]) == EXIT_INPUT

    def test_bad_rational(self, cubic_manifold_file):
        """Test a weight that is not a rational"""
        assert run(["pack", cubic_manifold_file, "--weights", "1/3,x"]) == EXIT_INPUT

    def test_unknown_command(self):
        """Test an unknown subcommand"""
        assert run(["unfold"]) == EXIT_INPUT

    def test_short_point(self):
        """Test a flow point with two of its four coordinates"""
        assert run(["flow", "--a", "1/3", "--gamma", "1/2", "--A", "1", "--point", "0.5,0"]) == EXIT_INPUT

    @pytest.mark.parametrize("argv", [
        ["toric", "polytope", "--chop", "0"],
        ["toric", "polytope", "--chop", "x:1/2"],
        ["toric", "polytope", "--chop", "0:y"],
        ["toric", "polytope", "--size", "1"],
        ["toric", "polytope", "--size", "1,1,1"],
        ["toric", "product", "--point", "1/2"],
        ["toric", "product", "--point", "1/2,1/10,0"],
    ])
    def test_toric_flags(self, argv, capsys):
        """Test malformed toric flags exit with the input code and a diagnostic"""
        assert run(argv) == EXIT_INPUT
        captured = capsys.readouterr()
        assert captured.out == ""
        assert "error:" in captured.err

    def test_chop_names_offending_text(self, capsys):
        """Test the diagnostic quotes the bad --chop value"""
        assert run(["toric", "polytope", "--chop", "3/2"]) == EXIT_INPUT
        assert "'3/2'" in capsys.readouterr().err


class TestDecompose:

    def test_rational_product(self, product_manifold_file, capsys):
        """Test a rational class is returned as one curve with its weight"""
        assert run(["decompose", product_manifold_file, "--grid", "10"]) == EXIT_OK
        out = _json(capsys)
        assert out["classes"] == [["7", "10"]]
        assert out["weights"] == ["1/10"]
        assert out["identity_holds"]


class TestFlow:

    def test_example_point(self, capsys):
        """Test the chart image, Liouville form and basin at a sample point"""
        argv = ["flow", "--a", "1/3", "--gamma", "1/2", "--A", "1", "--point", "0.5,0,0.5,0", "--t", "0.6931"]
        assert run(argv) == EXIT_OK
        out = _json(capsys)
        assert out["image"][0] == pytest.approx(3 / 8)
        assert out["image"][2] == pytest.approx(1 / 6)
        assert out["liouville_form"][1] == pytest.approx(-3 / 8)
        assert out["flow_defect"] <= out["flow_tolerance"]
        assert out["basin"]["inside"]

    def test_hyperboloid_has_no_basin(self, capsys):
        """Test negative gamma reports no basin"""
        argv = ["flow", "--a", "1", "--gamma", "-1", "--A", "1", "--point", "0.5,0,0.5,0"]
        assert run(argv) == EXIT_OK
        assert _json(capsys)["basin"] is None

    def test_outside_chart(self, capsys):
        """Test a point beyond the disc bundle"""
        argv = ["flow", "--a", "1", "--gamma", "0", "--A", "1", "--point", "2,0,0.5,0"]
        assert run(argv) == EXIT_INPUT


class TestToric:

    def test_product_classification(self, capsys):
        """Test the example point of the product lies in the first basin"""
        assert run(["toric", "product", "--mu", "7/10", "--point", "1/2,1/10"]) == EXIT_OK
        out = _json(capsys)
        assert out["classification"]["label"] == "sigma1"
        assert out["basin_areas"] == ["7/20", "7/20"]

    def test_cubic_with_svg(self, tmp_path, capsys):
        """Test the cubic picture is written at 600 px per unit"""
        path = tmp_path / "cubic.svg"
        assert run(["toric", "cubic", "--mu", "1/2", "--svg", str(path)]) == EXIT_OK
        out = _json(capsys)
        assert out["cubic"]["total"] == "1/2"
        assert out["polytope"]["area"] == "3/8"
        assert out["svg_scale"] == "600"
        assert path.read_text().startswith("<svg")

    def test_chopped_polytope(self, capsys):
        """Test two corner chops give a pentagon"""
        assert run(["toric", "polytope", "--size", "1,1", "--chop", "0:1/3", "--chop", "2:1/4"]) == EXIT_OK
        assert len(_json(capsys)["polytope"]["vertices"]) == 5

    def test_cubic_out_of_range(self):
        """Test mu = 2/3 is rejected"""
        assert run(["toric", "cubic", "--mu", "2/3"]) == EXIT_INPUT


class TestBubble:

    def test_singular_cubic(self, capsys):
        """Test none of the five decompositions of 3L - 2E survives"""
        assert run(["bubble", "--target", "3,2", "--max-parts", "3", "--filters"]) == EXIT_OK
        out = _json(capsys)
        assert out["count"] == 5
        assert out["survivors"] == 0
        assert all(d["verdict"] != "SURVIVES" for d in out["decompositions"])


class TestVerify:

    def test_seed_from_environment(self, monkeypatch, capsys):
        """Test the sampling seed is read from SINGPACK_SEED"""
        monkeypatch.setenv("SINGPACK_SEED", "7")
        assert run(["verify", "--samples", "100", "--mc-samples", "400000"]) == EXIT_OK
        out = _json(capsys)
        assert out["seed"] == 7
        assert out["samples"] == 100
        assert out["passed"]
