import io
import json

import numpy as np
import pytest

from kernelafa.cli import main, split_specs


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def files(tmp_path):
    (tmp_path / "g3.json").write_text('{"n": 3, "values": [0, 0, 0, 1, 0, 1, 0, 1]}')
    (tmp_path / "gadd.json").write_text('{"n": 3, "values": [10, 11, 12, 13, 13, 14, 15, 16]}')
    (tmp_path / "d.csv").write_text("a,b\n0,0\n2,4\n1,-1\n")
    (tmp_path / "lin.json").write_text('{"type": "linear", "beta0": 0.5, "beta": [1, -2]}')
    return tmp_path


def test_attribute_json(files):
    code, out, err = run("attribute", "--game", files / "g3.json", "--kernel", "shap", "--format", "json")
    assert code == 0 and err == ""
    doc = json.loads(out)
    np.testing.assert_allclose(doc["phi"], [2 / 3, 1 / 6, 1 / 6], atol=1e-12)
    assert doc["grand_gap"] == 1


def test_attribute_oracle_matches_closed_form(files):
    _, a, _ = run("attribute", "--game", files / "g3.json", "--kernel", "shap", "--format", "json")
    code, b, _ = run("attribute", "--game", files / "g3.json", "--kernel", "shap",
                     "--method", "oracle", "--format", "json")
    assert code == 0
    np.testing.assert_allclose(json.loads(a)["phi"], json.loads(b)["phi"], atol=1e-8)


def test_attribute_degenerate_kernel(files):
    code, out, err = run("attribute", "--game", files / "g3.json", "--kernel", "custom:0,0,1")
    assert code == 3 and out == ""
    assert "DegenerateKernel" in err or "AllZeroInterior" in err


def test_attribute_dataset_uses_names(files):
    code, out, _ = run("attribute", "--data", files / "d.csv", "--model", files / "lin.json",
                       "--instance", 1, "--kernel", "es", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["features"] == ["a", "b"]
    # beta_j (x_j - mean_j) with means (1, 1)
    np.testing.assert_allclose(doc["phi"], [1.0, -6.0], atol=1e-12)


def test_attribute_explicit_instance(files):
    code, out, _ = run("attribute", "--data", files / "d.csv", "--model", files / "lin.json",
                       "--x", "1,1", "--reference", "shapley", "--format", "json")
    assert code == 0
    np.testing.assert_allclose(json.loads(out)["phi"], [0, 0], atol=1e-12)


def test_attribute_unconstrained(tmp_path):
    (tmp_path / "g2.json").write_text('{"n": 2, "values": [0, 1, 3, 6]}')
    code, out, _ = run("attribute", "--game", tmp_path / "g2.json", "--kernel", "custom:1,1",
                       "--unconstrained", "--format", "json")
    assert code == 0
    np.testing.assert_allclose(json.loads(out)["phi"], [5 / 3, 11 / 3], atol=1e-12)


@pytest.mark.parametrize("fmt", ["table", "csv"])
def test_attribute_other_formats(files, fmt):
    code, out, _ = run("attribute", "--game", files / "g3.json", "--kernel", "uniform", "--format", fmt)
    assert code == 0
    shown = "0.6667" if fmt == "table" else "0.666666666666666"
    assert "x1" in out and shown in out


def test_compare_shap_uniform_es(files):
    code, out, _ = run("compare", "--game", files / "g3.json", "--kernels", "shap,uniform,es",
                       "--format", "json")
    assert code == 0
    phi = json.loads(out)["phi"]
    np.testing.assert_allclose(phi["shap"], phi["uniform"], atol=1e-12)
    np.testing.assert_allclose(phi["es"], [1 / 3] * 3, atol=1e-12)


def test_compare_additive_all_equal(files):
    code, out, _ = run("compare", "--game", files / "gadd.json",
                       "--kernels", "shap,es,linear,exp,concave", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    for column in doc["phi"].values():
        np.testing.assert_allclose(column, [1, 2, 3], atol=1e-12)
    assert max(p["value"] for p in doc["pairwise_max_abs_diff"]) < 1e-12


def test_compare_linear_model(files):
    code, out, _ = run("compare", "--data", files / "d.csv", "--model", files / "lin.json",
                       "--instance", 0, "--kernels", "shap,concave", "--format", "json")
    assert code == 0
    phi = json.loads(out)["phi"]
    np.testing.assert_allclose(phi["shap"], phi["concave"], atol=1e-12)
    np.testing.assert_allclose(phi["shap"], [-1, 2], atol=1e-12)


def test_compare_table_footer(files):
    code, out, _ = run("compare", "--game", files / "g3.json", "--kernels", "shap,es",
                       "--references", "shapley")
    assert code == 0
    assert "shap" in out and "es" in out and "shapley" in out


def test_compare_needs_two_methods(files):
    code, _, err = run("compare", "--game", files / "g3.json", "--kernels", "shap")
    assert code == 1 and err


def test_compare_custom_kernel_specs(files):
    code, out, _ = run("compare", "--game", files / "g3.json", "--kernels", "custom:1,1,0,shap",
                       "--format", "json")
    assert code == 0
    assert len(json.loads(out)["methods"]) == 2


def test_split_specs():
    assert split_specs("shap,custom:1,2,3,es,fesp:0.2") == ["shap", "custom:1,2,3", "es", "fesp:0.2"]


@pytest.mark.parametrize(
    "spec, expected",
    [
        ("shap", [1 / 3, 1 / 6, 1 / 3, 0]),
        ("exp", [1 / 9, 2 / 9, 4 / 9, 8 / 9]),
        ("concave", [7 / 46, 12 / 46, 15 / 46, 16 / 46]),
    ],
)
def test_kernels_table(spec, expected):
    code, out, _ = run("kernels", "--n", 4, "--kernels", spec, "--format", "json")
    assert code == 0
    weights = json.loads(out)["weights"]
    np.testing.assert_allclose(next(iter(weights.values())), expected, atol=1e-15)


def test_kernels_default_and_normalized():
    code, out, _ = run("kernels", "--n", 4, "--normalize", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["normalized"] is True and len(doc["weights"]) >= 8
    code, out, _ = run("kernels", "--n", 4)
    assert code == 0 and "concave" in out


def test_verify_small():
    code, out, _ = run("verify", "--seed", 42, "--trials", 1, "--n-max", 2, "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["passed"] and doc["seed"] == 42
    names = {c["name"] for c in doc["checks"]}
    assert "solver.8" in names


def test_verify_table_prints_seed():
    code, out, _ = run("verify", "--seed", 7, "--trials", 1, "--n-max", 3)
    assert code == 0 and "7" in out


def test_verify_failure_exit_code():
    # an impossible tolerance forces failures on the floating-point checks
    code, _, _ = run("verify", "--seed", 1, "--trials", 2, "--n-max", 3, "--tolerance", 1e-30)
    assert code == 3


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--n-max", "30"],
        ["verify", "--n-max", "1"],
        ["verify", "--trials", "0"],
        [],
        ["frobnicate"],
        ["attribute", "--kernel", "shap"],
        ["attribute", "--game", "g.json", "--data", "d.csv", "--kernel", "shap"],
        ["attribute", "--game", "g.json", "--kernel", "shap", "--reference", "es"],
        ["kernels", "--n", "4", "--kernels", "bogus"],
    ],
)
def test_usage_errors(argv):
    code, out, err = run(*argv)
    assert code == 1 and out == "" and err


def test_unknown_kernel_spec(files):
    code, out, err = run("attribute", "--game", files / "g3.json", "--kernel", "nope")
    assert code == 1 and out == "" and err


def test_dataset_without_instance(files):
    code, _, err = run("attribute", "--data", files / "d.csv", "--model", files / "lin.json",
                       "--kernel", "shap")
    assert code == 1 and err


@pytest.mark.parametrize(
    "name, content",
    [
        ("missing.json", None),
        ("bad.json", "{not json"),
        ("short.json", '{"n": 3, "values": [0, 1]}'),
        ("nan.json", '{"n": 1, "values": [0, NaN]}'),
        ("extra.json", '{"n": 1, "values": [0, 1], "x": 1}'),
    ],
)
def test_validation_errors(tmp_path, name, content):
    path = tmp_path / name
    if content is not None:
        path.write_text(content)
    code, out, err = run("attribute", "--game", path, "--kernel", "shap")
    assert code == 2 and out == "" and err


def test_validation_errors_dataset(files, tmp_path):
    (tmp_path / "ragged.csv").write_text("a,b\n0\n")
    code, _, err = run("attribute", "--data", tmp_path / "ragged.csv", "--model", files / "lin.json",
                       "--instance", 0, "--kernel", "shap")
    assert code == 2 and err
    code, _, _ = run("attribute", "--data", files / "d.csv", "--model", files / "lin.json",
                     "--instance", 9, "--kernel", "shap")
    assert code == 2
    code, _, _ = run("kernels", "--n", 4, "--kernels", "fesp:1.5")
    assert code == 2


def test_n_two_fesp_rejected(tmp_path):
    (tmp_path / "g2.json").write_text('{"n": 2, "values": [0, 1, 3, 6]}')
    code, _, _ = run("attribute", "--game", tmp_path / "g2.json", "--kernel", "fesp:0.5")
    assert code == 2


def test_json_round_trip_full_precision(files):
    code, out, _ = run("attribute", "--game", files / "g3.json", "--kernel", "exp", "--format", "json")
    assert code == 0
    from kernelafa import make_game, solve_constrained
    from kernelafa.kernels import parse_kernel

    direct = solve_constrained(make_game(3, [0, 0, 0, 1, 0, 1, 0, 1]), parse_kernel("exp", 3)).phi
    assert json.loads(out)["phi"] == direct.tolist()


@pytest.mark.parametrize("fmt", ["json", "csv", "table"])
def test_output_deterministic(files, fmt):
    argv = ("compare", "--game", files / "g3.json", "--kernels", "shap,linear,concave",
            "--references", "shapley,lsprenucleolus", "--format", fmt)
    first = run(*argv)
    assert first[0] == 0
    assert run(*argv) == first
