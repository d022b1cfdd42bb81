"""Command-line surface: config handling, envelopes, exit codes."""

import json

import pytest

from heckephi.cli import (
    ConfigError,
    RunConfig,
    assemble_config,
    load_config_file,
    main,
    make_parser,
    run,
)


def test_config_sha_ignores_execution_keys():
    base = RunConfig()
    assert RunConfig(jobs=4).sha256() == base.sha256()
    assert RunConfig(out="somewhere").sha256() == base.sha256()
    # semantic knobs must move the hash
    assert RunConfig(upto=50).sha256() != base.sha256()
    assert RunConfig(seed=1).sha256() != base.sha256()
    assert RunConfig(coeff="cyclotomic:3").sha256() != base.sha256()
    assert RunConfig(d0=61).sha256() != base.sha256()


def test_load_config_file(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("# comment\nfield.d0 = 229\nbounds.upto=40  # tail\n\nseed=3\n")
    assert load_config_file(str(p)) == {"d0": 229, "upto": 40, "seed": 3}


def test_load_config_file_errors(tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text("nonsense=1\n")
    with pytest.raises(ConfigError, match="line 1"):
        load_config_file(str(p))
    p.write_text("field.d0\n")
    with pytest.raises(ConfigError, match="key=value"):
        load_config_file(str(p))
    with pytest.raises(ConfigError, match="cannot read"):
        load_config_file(str(tmp_path / "missing.cfg"))


def test_flags_override_config(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("bounds.upto=40\nseed=5\n")
    args = make_parser().parse_args(["attach", "--config", str(p), "--upto", "12"])
    cfg = assemble_config(args)
    assert cfg.upto == 12 and cfg.seed == 5


def test_range_validation():
    args = make_parser().parse_args(["field", "--chi-order", "0"])
    with pytest.raises(ConfigError, match="chi.order"):
        assemble_config(args)
    args = make_parser().parse_args(["attach", "--jobs", "0"])
    with pytest.raises(ConfigError, match="jobs"):
        assemble_config(args)


def test_field_command(capsys):
    assert main(["field"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["command"] == "field"
    assert out["config_sha256"] == RunConfig().sha256()
    assert out["class_number"] == 3
    assert out["generators"] == [{"label": "lam3", "order": 3}]
    assert out["context"] == {
        "p": 7, "N": 1, "M": 7, "pdN": 1603, "i_S": 8, "sign_iS": -1,
    }
    assert out["conventions"]["lambda"].startswith("for split ell")


def test_character_command(capsys):
    assert main(["character", "--samples", "20"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["order"] == 3 and out["source"] == "class-group"
    assert out["conditions"]["status"] == "pass"
    assert "2 inert 0 0" in out["table"]


def test_attach_tsv(capsys):
    assert main(["attach", "--upto", "12"]) == 0
    lines = capsys.readouterr().out.splitlines()
    data = [l for l in lines if l and not l.startswith("#")]
    assert data[0].split("\t") == ["ell", "kind", "a", "A", "tr", "det", "match"]
    rows = [l.split("\t") for l in data[1:]]
    assert [r[0] for r in rows] == ["2", "3", "5", "11"]
    assert all(r[-1] == "true" for r in rows)


def test_tree_dot(capsys):
    assert main(["tree", "--ell", "2", "--n", "2", "--radius", "2"]) == 0
    out = capsys.readouterr().out
    assert "vertices=20 expected=20" in out
    assert out.count("->") == 24  # 8 interior sheet-vertices, 3 edges each
    assert "// config_sha256:" in out


def test_phi_command(capsys):
    assert main(["phi", "--lattice", "[[4,0],[0,1]]"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["phi"] == "5" and out["m"] == 24 and out["m_prime"] == 3
    assert out["support"] == [2]


def test_hecke_command(capsys):
    assert main(["hecke", "--ell", "3", "--lattice", "[[4,0],[0,1]]"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["mu"] == "6"
    assert out["report"]["pass"] is True
    assert sum(s["n"] for s in out["report"]["summands"]) == 4


def test_error_exit_codes(capsys):
    assert main(["field", "--d0", "12"]) == 2  # not squarefree
    assert main(["field", "--coeff", "Fp:2"]) == 2
    assert main(["tree", "--ell", "4", "--radius", "2"]) == 2
    assert main(["hecke", "--ell", "7"]) == 1  # divides pdN
    assert main(["phi", "--lattice", "nonsense"]) == 1
    err = capsys.readouterr().err
    assert "config error" in err and "error:" in err


def test_attach_out_deterministic_across_jobs(tmp_path, capsys):
    b1, b2 = tmp_path / "a", tmp_path / "b"
    assert main(["attach", "--upto", "12", "--out", str(b1)]) == 0
    assert main(["attach", "--upto", "12", "--jobs", "2", "--out", str(b2)]) == 0
    for ext in (".tsv", ".json"):
        one = (tmp_path / ("a" + ext)).read_bytes()
        two = (tmp_path / ("b" + ext)).read_bytes()
        assert one == two
    report = json.loads((tmp_path / "a.json").read_text())
    assert report["all_match"] is True
    assert [row["ell"] for row in report["rows"]] == [2, 3, 5, 11]


def test_run_programmatic(capsys):
    assert run("field", RunConfig()) == 0
    assert json.loads(capsys.readouterr().out)["class_number"] == 3
    with pytest.raises(ConfigError):
        run("bogus", RunConfig())
