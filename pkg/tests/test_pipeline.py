import json
from pathlib import Path

import pytest

from tsna.cli import main as cli_main
from tsna.pipeline import (
    EXIT_OK,
    EXIT_VALIDATION,
    PipelineConfig,
    PipelineConfigError,
    run_pipeline,
)

TOY_CDR = """caller,callee,timestamp,kind,duration,cell_id,callee_cell_id
p1,p2,100,call,30,c1,c2
p2,p1,200,call,45,c2,c1
p1,p3,300,sms,0,c1,
p3,p1,400,call,60,c2,c1
p2,p3,500,call,15,c1,c2
p3,p2,600,call,20,c2,c1
p1,p2,700,call,30,c1,c2
p2,p1,800,sms,0,c2,c1
p4,p1,900,call,10,c1,c2
p1,p4,1000,call,12,c2,c1
p2,p4,1100,call,14,c1,
p4,p2,1200,call,16,c2,c1
p3,p4,1300,sms,0,c1,c2
p4,p3,1400,call,18,c2,c1
p1,p3,1500,call,22,c1,c2
p3,p1,1600,call,25,c2,c1
p2,p3,1700,call,28,c1,c2
p3,p2,1800,call,31,c2,c1
p1,p2,1900,call,34,c1,c2
p5,p1,1950,call,5,c2,c1
"""

TOY_CELLS = """cell_id,lat,lon
c1,50.06,19.94
c2,50.06,20.08
"""

EXPECTED_ARTIFACTS = {
    "ingest.json",
    "measures_full.csv",
    "measures_full.json",
    "measures_windows.csv",
    "measures_windows.json",
    "roles.csv",
    "roles.json",
    "groups.json",
    "traces.csv",
    "society.json",
    "alarms.csv",
    "series.csv",
    "agents.json",
}


def toy_config(tmp_path: Path, **overrides) -> dict:
    cdr = tmp_path / "cdr.csv"
    cdr.write_text(TOY_CDR)
    cells = tmp_path / "cells.csv"
    cells.write_text(TOY_CELLS)
    config = {
        "input": {"kind": "telecom", "cdr": str(cdr), "cells": str(cells)},
        "output_dir": str(tmp_path / "out"),
        "seed": 42,
        "window": {"width": 500, "step": 500},
        "groups": {"weight_threshold": 1},
        "cusum": {"baseline_windows": 2},
    }
    config.update(overrides)
    return config


class TestConfig:
    def test_missing_seed_rejected(self, tmp_path):
        config = toy_config(tmp_path)
        del config["seed"]
        with pytest.raises(PipelineConfigError, match="seed"):
            PipelineConfig.from_dict(config)

    def test_inverted_tiers_rejected_before_compute(self, tmp_path):
        config = toy_config(
            tmp_path,
            groups={"tiers": {"weak": 0.6, "circumjacent": 0.25, "kernel": 0.5}},
        )
        with pytest.raises(PipelineConfigError, match="tiers"):
            PipelineConfig.from_dict(config)

    def test_unknown_measure_rejected(self, tmp_path):
        config = toy_config(tmp_path, measures=["degree_in", "charisma"])
        with pytest.raises(PipelineConfigError, match="charisma"):
            PipelineConfig.from_dict(config)

    def test_output_dir_env_override(self, tmp_path, monkeypatch):
        monkeypatch.setenv("TSNA_OUTPUT_DIR", str(tmp_path / "elsewhere"))
        config = PipelineConfig.from_dict(toy_config(tmp_path))
        assert config.output_dir == str(tmp_path / "elsewhere")


class TestRun:
    def test_toy_run_produces_all_artifacts(self, tmp_path):
        config = PipelineConfig.from_dict(toy_config(tmp_path))
        result = run_pipeline(config)
        assert result.exit_code == EXIT_OK
        manifest = json.loads((result.output_dir / "manifest.json").read_text())
        assert manifest["status"] == "ok"
        assert set(manifest["artifacts"]) == EXPECTED_ARTIFACTS
        for name in EXPECTED_ARTIFACTS:
            assert (result.output_dir / name).is_file()
        assert manifest["inputs"].keys() == {"cdr", "cells"}

    def test_missing_input_fails_validation(self, tmp_path):
        config_dict = toy_config(tmp_path)
        config_dict["input"]["cdr"] = str(tmp_path / "nope.csv")
        config = PipelineConfig.from_dict(config_dict)
        result = run_pipeline(config)
        assert result.exit_code == EXIT_VALIDATION
        assert result.manifest["failure_stage"] == "validate"
        # no artifacts beyond the failure manifest
        assert result.manifest["artifacts"] == {}

    def test_determinism_byte_identical(self, tmp_path):
        c1 = toy_config(tmp_path)
        c1["output_dir"] = str(tmp_path / "run1")
        c2 = dict(c1, output_dir=str(tmp_path / "run2"))
        r1 = run_pipeline(PipelineConfig.from_dict(c1))
        r2 = run_pipeline(PipelineConfig.from_dict(c2))
        assert r1.exit_code == r2.exit_code == EXIT_OK
        assert r1.manifest["artifacts"] == r2.manifest["artifacts"]
        for name in r1.manifest["artifacts"]:
            b1 = (Path(c1["output_dir"]) / name).read_bytes()
            b2 = (Path(c2["output_dir"]) / name).read_bytes()
            assert b1 == b2, name

    def test_graph_export_formats(self, tmp_path):
        config = PipelineConfig.from_dict(
            toy_config(tmp_path, graph_formats=["graphml", "dot", "csv"])
        )
        result = run_pipeline(config)
        assert result.exit_code == EXIT_OK
        for ext in ("graphml", "dot", "csv"):
            assert (result.output_dir / f"graph_full.{ext}").is_file()

    def test_agent_reports(self, tmp_path):
        config = PipelineConfig.from_dict(toy_config(tmp_path, agents=["p1"]))
        result = run_pipeline(config)
        assert result.exit_code == EXIT_OK
        payload = json.loads((result.output_dir / "agents.json").read_text())
        assert payload["agents"][0]["entity"] == "p1"
        assert payload["agents"][0]["windows"]


class TestCli:
    def test_run_subcommand(self, tmp_path, capsys):
        config = toy_config(tmp_path)
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps(config))
        assert cli_main(["run", str(config_path)]) == 0
        out = capsys.readouterr().out
        assert "ok" in out

    def test_run_bad_config(self, tmp_path, capsys):
        config = toy_config(tmp_path)
        del config["seed"]
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps(config))
        assert cli_main(["run", str(config_path)]) == EXIT_VALIDATION

    def test_stagewise_composition(self, tmp_path, capsys):
        cdr = tmp_path / "cdr.csv"
        cdr.write_text(TOY_CDR)
        cells = tmp_path / "cells.csv"
        cells.write_text(TOY_CELLS)
        interactions = tmp_path / "interactions.csv"
        matrix = tmp_path / "matrix.csv"
        roles_csv = tmp_path / "roles.csv"
        groups_json = tmp_path / "groups.json"
        graph_dot = tmp_path / "graph.dot"

        assert cli_main([
            "ingest", "--kind", "telecom", "--input", str(cdr),
            "--cells", str(cells), "--output", str(interactions),
        ]) == 0
        assert cli_main([
            "measure", "--input", str(interactions), "--output", str(matrix),
        ]) == 0
        assert cli_main([
            "roles", "--matrix", str(matrix), "--output", str(roles_csv),
        ]) == 0
        assert cli_main([
            "groups", "--input", str(interactions), "--output", str(groups_json),
            "--tau", "1",
        ]) == 0
        assert cli_main([
            "export", "--input", str(interactions), "--format", "dot",
            "--output", str(graph_dot),
        ]) == 0
        assert roles_csv.read_text().startswith("entity,role,score")
        assert "digraph" in graph_dot.read_text()

    def test_dynamics_subcommand(self, tmp_path, capsys):
        cdr = tmp_path / "cdr.csv"
        cdr.write_text(TOY_CDR)
        interactions = tmp_path / "interactions.csv"
        assert cli_main([
            "ingest", "--kind", "telecom", "--input", str(cdr),
            "--output", str(interactions),
        ]) == 0
        society = tmp_path / "society.json"
        series = tmp_path / "series.csv"
        assert cli_main([
            "dynamics", "--input", str(interactions), "--output", str(society),
            "--series", str(series), "--width", "500",
            "--measures", "degree_in,degree_out", "--baseline-windows", "2",
        ]) == 0
        report = json.loads(society.read_text())
        assert len(report["windows"]) == 4
        assert series.read_text().startswith("subject,measure,window,value")

    def test_hist_subcommand(self, tmp_path, capsys):
        data = tmp_path / "values.csv"
        data.write_text("m3\n1\n10\n100\n1000\n")
        out = tmp_path / "hist.csv"
        assert cli_main([
            "hist", "--input", str(data), "--column", "m3",
            "--output", str(out), "--log", "--low", "1", "--high", "10000",
            "--bins", "4",
        ]) == 0
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 5

    def test_profiles_subcommand(self, tmp_path, capsys):
        cdr = tmp_path / "cdr.csv"
        cdr.write_text(TOY_CDR)
        cells = tmp_path / "cells.csv"
        cells.write_text(TOY_CELLS)
        out_csv = tmp_path / "profiles.csv"
        out_json = tmp_path / "profiles.json"
        assert cli_main([
            "profiles", "--cdr", str(cdr), "--cells", str(cells),
            "--output", str(out_csv), "--json", str(out_json),
        ]) == 0
        lines = out_csv.read_text().strip().splitlines()
        assert len(lines) == 6  # header + p1..p5
        payload = json.loads(out_json.read_text())
        assert {p["entity"] for p in payload} == {"p1", "p2", "p3", "p4", "p5"}
        assert all(p["observed_records"] >= 1 for p in payload)

    def test_blogs_similar_per_document(self, tmp_path, capsys):
        posts = tmp_path / "posts.csv"
        posts.write_text(
            "post_id,author,timestamp,title,body,tags\n"
            "p1,alice,1,Cats,cats dogs cats,pets\n"
            "p2,bob,2,Birds,cats birds,pets\n"
            "p3,carol,3,Planes,planes trains,travel\n"
        )
        comments = tmp_path / "comments.csv"
        comments.write_text("comment_id,post_id,author,timestamp,body\n")
        assert cli_main([
            "blogs", "similar", "--posts", str(posts), "--comments", str(comments),
            "--query", "p1", "--top", "2",
        ]) == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert out[0].startswith("p2")

    def test_blogs_similar(self, tmp_path, capsys):
        posts = tmp_path / "posts.csv"
        posts.write_text(
            "post_id,author,timestamp,title,body,tags\n"
            "p1,alice,1,Cats,cats dogs cats,pets\n"
            "p2,bob,2,Birds,cats birds,pets\n"
            "p3,carol,3,Planes,planes trains,travel\n"
        )
        comments = tmp_path / "comments.csv"
        comments.write_text("comment_id,post_id,author,timestamp,body\n")
        assert cli_main([
            "blogs", "similar", "--posts", str(posts), "--comments", str(comments),
            "--unit", "author", "--query", "alice", "--top", "2",
        ]) == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert out[0].startswith("bob")
