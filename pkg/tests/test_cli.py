import json
import os

import numpy as np

from ssmap.cli import main


def run(args, capsys):
    code = main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_check_toy(models_dir, capsys):
    code, out, _ = run(["check", str(models_dir / "toy.model")], capsys)
    assert code == 0
    assert "2 vars, 3 levels each, 9 states" in out


def test_check_missing_file(capsys):
    code, _, err = run(["check", "/nonexistent/model.file"], capsys)
    assert code == 2
    assert "cannot read" in err


def test_check_syntax_error(tmp_path, capsys):
    bad = tmp_path / "bad.model"
    bad.write_text("var x1 levels 2\neq x1 = 1.0 * act(x1, 0.5\n")
    code, _, err = run(["check", str(bad)], capsys)
    assert code == 2
    assert "line 2" in err


def test_check_semantic_error_names_variable(tmp_path, capsys):
    bad = tmp_path / "missing_eq.model"
    bad.write_text(
        "var x1 levels 2 thresholds 0.5\nvar x2 levels 2 thresholds 0.5\n"
        "eq x1 = 1.0 * act(x2, 0.5, n1)\n")
    code, _, err = run(["check", str(bad)], capsys)
    assert code == 3
    assert "x2" in err


def test_correspondence_n2_exits_partial(models_dir, tmp_path, capsys):
    out_path = tmp_path / "report.json"
    code, _, _ = run(
        ["correspondence", str(models_dir / "toy.model"), "--n", "2",
         "--out", str(out_path)], capsys)
    assert code == 1  # steady states match, sampled contraction fails
    payload = json.loads(out_path.read_text())
    assert payload["verdict"] == "partial"
    assert payload["fixed_points"] == [[0, 0], [2, 2]]
    points = sorted(s["point"] for s in payload["steady_states"])
    assert np.allclose(points[0], [0.0, 0.0], atol=1e-9)
    assert np.allclose(points[1], [0.73, 0.78], atol=0.01)
    assert not payload["contraction"]["passes"]
    assert payload["excluded_measure"] == 0.36
    assert payload["degenerate_states"] == [{"on_threshold": [1], "state": [0, 2]}]
    for rec in payload["steady_states"]:
        assert rec["stability"] == "asymptotically_stable"
        assert all(re < 0 for re, _ in rec["eigenvalues"])


def test_correspondence_n50_exits_clean(models_dir, capsys):
    code, out, _ = run(
        ["correspondence", str(models_dir / "toy.model"), "--n", "50",
         "--delta", "0.1"], capsys)
    assert code == 0
    assert json.loads(out)["verdict"] == "one_to_one"


def test_correspondence_discrete_only_is_semantic_error(tmp_path, capsys):
    disc = tmp_path / "disc.model"
    disc.write_text("var a levels 2\ntable\n0 -> 1\n1 -> 0\n")
    code, _, err = run(["correspondence", str(disc)], capsys)
    assert code == 3
    assert "no equations" in err


def test_correspondence_byte_identical(models_dir, tmp_path, capsys):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        code, _, _ = run(
            ["correspondence", str(models_dir / "toy.model"), "--n", "2",
             "--seed", "7", "--out", str(p)], capsys)
        assert code == 1
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_correspondence_threads_do_not_change_output(models_dir, tmp_path, capsys):
    paths = [tmp_path / "t1.json", tmp_path / "t4.json"]
    for p, threads in zip(paths, ("1", "4")):
        os.environ["SSMAP_THREADS"] = threads
        try:
            code, _, _ = run(
                ["correspondence", str(models_dir / "toy.model"), "--n", "50",
                 "--delta", "0.1", "--audit", "--out", str(p)], capsys)
        finally:
            os.environ.pop("SSMAP_THREADS", None)
        assert code == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_pfvs_toy(models_dir, capsys):
    code, out, _ = run(["pfvs", str(models_dir / "toy.model")], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["pfvs"] == [1, 2]
    assert payload["bound"] == 9


def test_pfvs_nine(models_dir, capsys):
    code, out, _ = run(["pfvs", str(models_dir / "repressor9.model")], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["pfvs"] == [5]
    assert payload["bound"] == 2
    assert all(5 in c["vertices"] for c in payload["positive_cycles"])


def test_pfvs_acyclic_discrete(tmp_path, capsys):
    disc = tmp_path / "const.model"
    disc.write_text("var a levels 2\nvar b levels 2\ntable\n"
                    "0 0 -> 0 1\n0 1 -> 0 1\n1 0 -> 0 1\n1 1 -> 0 1\n")
    code, out, _ = run(["pfvs", str(disc)], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["pfvs"] == [] and payload["bound"] == 1


def test_simulate_csv(models_dir, tmp_path, capsys):
    out_path = tmp_path / "traj.csv"
    code, _, _ = run(
        ["simulate", str(models_dir / "toy.model"), "--x0", "0.9,0.9",
         "--dt", "0.01", "--t-end", "50", "--out", str(out_path)], capsys)
    assert code == 0
    lines = out_path.read_text().splitlines()
    assert lines[0] == "t,x1,x2"
    assert len(lines) == 5002
    last = [float(v) for v in lines[-1].split(",")]
    assert last[0] == 50.0
    assert np.allclose(last[1:], [0.7324376, 0.7731425], atol=1e-4)


def test_simulate_requires_x0(models_dir, capsys):
    code, _, err = run(["simulate", str(models_dir / "toy.model")], capsys)
    assert code == 3
    assert "--x0" in err


def test_portrait_with_field(models_dir, tmp_path, capsys):
    field = tmp_path / "field.csv"
    code, out, _ = run(
        ["portrait", str(models_dir / "toy.model"), "--field-out", str(field)], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "x1,x2,fx1,fx2,fixed"
    assert len(lines) == 10  # header + 9 arrows
    fixed_rows = [ln for ln in lines[1:] if ln.endswith(",1")]
    assert sorted(fixed_rows) == ["0,0,0,0,1", "2,2,2,2,1"]
    flines = field.read_text().splitlines()
    assert flines[0] == "x1,x2,dx1,dx2"
    assert len(flines) == 1 + 21 * 21
    # equilibrium rows have zero derivative
    assert flines[1] == "0,0,0,0"


def test_portrait_field_refused_for_3d(tmp_path, capsys):
    model = tmp_path / "three.model"
    model.write_text(
        "var a levels 2 thresholds 0.5\nvar b levels 2 thresholds 0.5\n"
        "var c levels 2 thresholds 0.5\n"
        "exponent n = 4\n"
        "eq a = 1.0 * act(b, 0.5, n)\n"
        "eq b = 1.0 * act(c, 0.5, n)\n"
        "eq c = 1.0 * act(a, 0.5, n)\n")
    field = tmp_path / "field.csv"
    code, out, err = run(
        ["portrait", str(model), "--field-out", str(field)], capsys)
    assert code == 0
    assert len(out.splitlines()) == 1 + 8  # portrait still emitted
    assert "2-variable" in err
    assert not field.exists()


def test_delta_list_arity_checked(models_dir, capsys):
    code, _, err = run(
        ["correspondence", str(models_dir / "toy.model"), "--n", "2",
         "--delta", "0.05,0.05,0.05"], capsys)
    assert code == 3
    assert "3 margins for 2 variables" in err


def test_correspondence_text_format(models_dir, capsys):
    code, out, _ = run(
        ["correspondence", str(models_dir / "toy.model"), "--n", "2",
         "--format", "text"], capsys)
    assert code == 1
    assert out.startswith("verdict: partial")
    assert "contraction: sup" in out


def test_portrait_hill_only_model_uses_induced_network(models_dir, capsys):
    code, _, err = run(["portrait", str(models_dir / "repressor9.model")], capsys)
    assert code == 3  # exponent slots unassigned and no --n given
    assert "exponent" in err

    code, out, _ = run(
        ["portrait", str(models_dir / "repressor9.model"), "--n", "10"], capsys)
    assert code == 0
    assert len(out.splitlines()) == 1 + 512


def test_limit_net_text_and_json(models_dir, capsys):
    code, out, _ = run(["limit-net", str(models_dir / "toy.model")], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "0 0 -> 0 0"
    assert any("limit on threshold: x1" in ln for ln in lines)

    code, out, _ = run(
        ["limit-net", str(models_dir / "toy.model"), "--format", "json"], capsys)
    payload = json.loads(out)
    assert payload["fixed_points"] == [[0, 0], [2, 2]]
    assert len(payload["rows"]) == 9


def test_uniform_exponent_override_applies(models_dir, capsys):
    # the file assigns n=2 everywhere; --n 50 must move the steady state
    code, out, _ = run(
        ["correspondence", str(models_dir / "toy.model"), "--n", "50",
         "--delta", "0.1", "--format", "json"], capsys)
    assert code == 0
    payload = json.loads(out)
    pts = {tuple(s["matched"]): s["point"] for s in payload["steady_states"]}
    assert np.allclose(pts[(2, 2)], [0.8, 0.9], atol=1e-6)
