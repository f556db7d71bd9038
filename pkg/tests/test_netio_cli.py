"""Network file format and the command-line contract."""

import json
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import pytest

import nets
from quorumlens import (
    NetworkFormatError,
    NetworkValidationError,
    QuotaNetwork,
    TrustNetwork,
    load_network,
    load_network_file,
    network_document,
    save_network,
)
from quorumlens.cli import run

REPO = Path(__file__).resolve().parent.parent
SCHEMA = json.loads((REPO / "src" / "quorumlens" / "report_schema.json").read_text())


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def triangles_doc():
    return {
        "nodes": ["1", "2", "3", "4", "5", "6"],
        "kind": "slices",
        "slices": {
            n: [["1", "2", "3"]] if n in "123" else [["4", "5", "6"]] for n in "123456"
        },
    }


def shared_five_doc():
    return {
        "nodes": ["1", "2", "3", "4", "5", "6"],
        "kind": "quota",
        "trust": {n: ["1", "2", "3", "4", "5"] for n in "123456"},
        "quota_uniform": 0.8,
    }


class TestNetworkFiles:
    def test_load_slices_network(self, tmp_path):
        net = load_network(write(tmp_path, "fig.json", triangles_doc()))
        assert isinstance(net, TrustNetwork)
        assert net.nodes == tuple("123456")
        assert net.trust["1"] == frozenset("123")

    def test_load_quota_network_keeps_quota_form(self, tmp_path):
        net = load_network(write(tmp_path, "q.json", shared_five_doc()))
        assert isinstance(net, QuotaNetwork)
        assert net.quota["1"] == Fraction(4, 5)
        assert net.byz_fraction["1"] == Fraction(1, 5)

    def test_label_not_declared(self, tmp_path):
        doc = triangles_doc()
        doc["slices"]["1"] = [["1", "2", "7"]]
        with pytest.raises(NetworkFormatError, match="does not appear"):
            load_network(write(tmp_path, "bad.json", doc))

    def test_unknown_key_rejected(self, tmp_path):
        doc = triangles_doc()
        doc["colour"] = "blue"
        with pytest.raises(NetworkFormatError, match="unknown keys"):
            load_network(write(tmp_path, "bad.json", doc))

    def test_quota_and_uniform_exclusive(self, tmp_path):
        doc = shared_five_doc()
        doc["quota"] = {n: 0.8 for n in "123456"}
        with pytest.raises(NetworkFormatError, match="exactly one"):
            load_network(write(tmp_path, "bad.json", doc))

    def test_validation_failure_surfaces(self, tmp_path):
        doc = triangles_doc()
        doc["byzantine"] = ["1", "2", "3", "4", "5", "6"]
        with pytest.raises((NetworkFormatError, NetworkValidationError)):
            load_network(write(tmp_path, "bad.json", doc))

    def test_roundtrip_slices(self, tmp_path):
        net = nets.two_triangles_vetoed()
        path = tmp_path / "veto.json"
        save_network(net, path)
        assert load_network(path) == net

    def test_roundtrip_quota(self, tmp_path):
        net = nets.shared_five(byz="5")
        path = tmp_path / "q.json"
        save_network(net, path)
        assert load_network(path) == net

    def test_slice_addition_metadata(self, tmp_path):
        doc = triangles_doc()
        doc["slice_addition"] = {"node": "3", "slice": ["1", "2", "3"]}
        loaded = load_network_file(write(tmp_path, "meta.json", doc))
        assert loaded.slice_addition == ("3", frozenset("123"))

    def test_document_shape(self):
        doc = network_document(nets.shared_five())
        assert doc["kind"] == "quota"
        assert doc["quota_uniform"] == 0.8
        assert "byz_fraction" not in doc and "byz_fraction_uniform" not in doc


class TestCliContract:
    def test_qi_violated_exit_one(self, tmp_path, capsys):
        path = write(tmp_path, "fig.json", triangles_doc())
        assert run(["qi", path]) == 1
        out = capsys.readouterr().out
        assert "violated" in out and "{1, 2, 3}" in out and "{4, 5, 6}" in out

    def test_qi_holds_exit_zero(self, tmp_path, capsys):
        doc = triangles_doc()
        doc["slices"]["3"] = [["1", "2", "3", "5"]]
        path = write(tmp_path, "ex2.json", doc)
        assert run(["qi", path]) == 0
        assert "minimal quora: {4, 5, 6}" in capsys.readouterr().out

    def test_check_valid_and_invalid(self, tmp_path, capsys):
        good = write(tmp_path, "good.json", triangles_doc())
        assert run(["check", good]) == 0
        doc = triangles_doc()
        doc["slices"]["1"] = [["4"]]  # slice outside the derived trust set is fine;
        doc["slices"]["2"] = []  # an empty family is not
        bad = write(tmp_path, "bad.json", doc)
        assert run(["check", bad]) == 2

    def test_fork_exit_codes(self, tmp_path, capsys):
        split = {
            "nodes": ["1", "2", "3", "4", "5"],
            "byzantine": ["3"],
            "kind": "quota",
            "trust": {
                "1": ["1", "2", "3"],
                "2": ["1", "2", "3"],
                "4": ["3", "4", "5"],
                "5": ["3", "4", "5"],
            },
            "quota_uniform": 1.0,
        }
        path = write(tmp_path, "split.json", split)
        assert run(["fork", path]) == 1
        assert "forked" in capsys.readouterr().out
        safe = write(tmp_path, "safe.json", shared_five_doc())
        assert run(["fork", safe]) == 0

    def test_strong_fork_exit_codes(self, tmp_path):
        path = write(tmp_path, "fig.json", triangles_doc())
        assert run(["fork", path, "--strong"]) == 1
        unanimity = {
            "nodes": ["a", "b", "c"],
            "kind": "slices",
            "slices": {n: [["a", "b", "c"]] for n in "abc"},
        }
        upath = write(tmp_path, "u.json", unanimity)
        assert run(["fork", upath, "--strong"]) == 0

    def test_budget_exit_three(self, tmp_path, capsys):
        path = write(tmp_path, "fig.json", triangles_doc())
        assert run(["qi", path, "--max-nodes", "3", "--json"]) == 3
        report = json.loads(capsys.readouterr().out)
        assert report["verdict"] == "budget-exceeded"

    def test_missing_file_exit_two(self, capsys):
        assert run(["qi", "/nonexistent/net.json"]) == 2
        assert "error" in capsys.readouterr().err

    def test_unknown_subcommand_exit_two(self, capsys):
        assert run(["frobnicate"]) == 2

    def test_safety_tables(self, tmp_path, capsys):
        path = write(tmp_path, "q.json", shared_five_doc())
        assert run(["safety", path, "--json"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["verdict"] == "passes"
        assert report["tables"]["summary"]["common_trust_nonempty"] is True
        assert all(row["satisfies"] for row in report["tables"]["overlap_bounds"])

    def test_safety_violated_exit_one(self, tmp_path, capsys):
        doc = {
            "nodes": ["1", "2", "3", "4"],
            "kind": "quota",
            "trust": {"1": ["1", "2"], "2": ["1", "2"], "3": ["3", "4"], "4": ["3", "4"]},
            "quota_uniform": 0.75,
        }
        path = write(tmp_path, "split.json", doc)
        assert run(["safety", path]) == 1

    def test_influence_limit_values(self, tmp_path, capsys):
        path = write(tmp_path, "q.json", shared_five_doc())
        assert run(["influence", path, "--limit", "--json"]) == 0
        report = json.loads(capsys.readouterr().out)
        limit = report["tables"]["limit"]
        assert limit["classification"] == "fully-regular"
        for row in limit["matrix"]:
            assert row[5] == 0.0
            assert all(abs(x - 0.2) < 1e-9 for x in row[:5])

    def test_influence_exact_entries(self, tmp_path, capsys):
        path = write(tmp_path, "q.json", shared_five_doc())
        assert run(["influence", path, "--exact", "--json"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["tables"]["matrix"][0][:5] == ["1/5"] * 5

    def test_quiet_suppresses_output(self, tmp_path, capsys):
        path = write(tmp_path, "fig.json", triangles_doc())
        assert run(["qi", path, "--quiet"]) == 1
        assert capsys.readouterr().out == ""


class TestGenerators:
    def test_gen_sat_then_qi(self, tmp_path, capsys):
        unsat = tmp_path / "unsat.cnf"
        unsat.write_text("p cnf 1 2\n1 0\n-1 0\n")
        out = tmp_path / "net.json"
        assert run(["gen", "sat", "--dimacs", str(unsat), "-o", str(out)]) == 0
        capsys.readouterr()
        assert run(["qi", str(out), "--max-nodes", "32"]) == 0

        sat = tmp_path / "sat.cnf"
        sat.write_text("p cnf 1 1\n1 0\n")
        out2 = tmp_path / "net2.json"
        assert run(["gen", "sat", "--dimacs", str(sat), "-o", str(out2)]) == 0
        capsys.readouterr()
        assert run(["qi", str(out2), "--max-nodes", "32"]) == 1

    def test_gen_sat_slice_addition_metadata(self, tmp_path, capsys):
        cnf = tmp_path / "f.cnf"
        cnf.write_text("p cnf 1 1\n1 0\n")
        out = tmp_path / "base.json"
        assert run(["gen", "sat", "--dimacs", str(cnf), "--slice-addition", "-o", str(out)]) == 0
        loaded = load_network_file(out)
        assert loaded.slice_addition == ("y1", frozenset({"y1", "n1"}))
        assert run(["qi", str(out), "--max-nodes", "32"]) == 0

    def test_gen_sat_bad_premise_exit_two(self, tmp_path, capsys):
        cnf = tmp_path / "f.cnf"
        cnf.write_text("p cnf 1 1\n-1 0\n")
        out = tmp_path / "base.json"
        assert run(["gen", "sat", "--dimacs", str(cnf), "--slice-addition", "-o", str(out)]) == 2

    def test_gen_random_reproducible(self, tmp_path, capsys):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        argv = ["gen", "random", "--nodes", "8", "--trust", "5", "--quota", "0.8",
                "--byz", "1", "--seed", "7", "--topology", "centralised"]
        assert run(argv + ["-o", str(a)]) == 0
        assert run(argv + ["-o", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        net = load_network(a)
        assert isinstance(net, QuotaNetwork) and len(net.nodes) == 8

    def test_gen_random_infeasible_exit_two(self, tmp_path):
        assert run(["gen", "random", "--nodes", "4", "--trust", "9", "--quota", "0.8",
                    "-o", str(tmp_path / "x.json")]) == 2


class TestReportDiscipline:
    def test_json_reports_validate_against_schema(self, tmp_path, capsys):
        jsonschema = pytest.importorskip("jsonschema")
        fig = write(tmp_path, "fig.json", triangles_doc())
        quota = write(tmp_path, "q.json", shared_five_doc())
        cnf = tmp_path / "f.cnf"
        cnf.write_text("p cnf 1 1\n1 0\n")
        out = tmp_path / "gen.json"
        commands = [
            ["check", fig],
            ["qi", fig],
            ["qi", quota, "--honest"],
            ["fork", quota],
            ["fork", fig, "--strong"],
            ["safety", quota],
            ["influence", quota, "--limit"],
            ["gen", "sat", "--dimacs", str(cnf), "-o", str(out)],
            ["gen", "random", "--nodes", "6", "--trust", "4", "--quota", "0.75",
             "--seed", "1", "-o", str(out)],
            ["qi", fig, "--max-nodes", "2"],
        ]
        for argv in commands:
            run(argv + ["--json"])
            report = json.loads(capsys.readouterr().out)
            jsonschema.validate(report, SCHEMA)
            assert report["command"] == argv + ["--json"]

    def test_byte_identical_reports_modulo_timing(self, tmp_path, capsys):
        path = write(tmp_path, "fig.json", triangles_doc())
        outputs = []
        for _ in range(2):
            run(["qi", path, "--json"])
            doc = json.loads(capsys.readouterr().out)
            doc["timing_ms"] = None
            outputs.append(json.dumps(doc, sort_keys=True))
        assert outputs[0] == outputs[1]

    def test_threads_env_and_flag(self, tmp_path, capsys, monkeypatch):
        path = write(tmp_path, "q.json", shared_five_doc())
        monkeypatch.setenv("QUORUMLENS_THREADS", "2")
        assert run(["qi", path]) == 0
        monkeypatch.setenv("QUORUMLENS_THREADS", "bogus")
        assert run(["qi", path]) == 2
        # The flag wins over the environment.
        assert run(["qi", path, "--threads", "1"]) == 0

    def test_module_entry_point(self, tmp_path):
        path = write(tmp_path, "fig.json", triangles_doc())
        proc = subprocess.run(
            [sys.executable, "-m", "quorumlens", "qi", path],
            capture_output=True,
            text=True,
            cwd=REPO,
        )
        assert proc.returncode == 1
        assert "violated" in proc.stdout
