import io
import json

import pytest

from mmsgap.cli import main
from mmsgap.model import parse_instance


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


def test_generate_theorem1_round_trips(capsys):
    code, out = run(["generate", "theorem1"], capsys)
    assert code == 0
    inst = parse_instance(out)
    assert (inst.n, inst.m, inst.mode) == (3, 9, "goods")


def test_generate_base_matrix_layout(capsys):
    code, out = run(["generate", "base-matrix", "--n", "4"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["target_sum"] == "17"
    assert len(doc["items"]) == 13


def test_generate_extended_item_count(capsys):
    code, out = run(["generate", "extended", "--N", "7"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["agents"] == 7 and doc["items"] == 24


def test_generate_vrvc_bad_params_exit_usage(capsys):
    code = main(["generate", "vrvc", "--n", "5", "--row-agents", "2",
                 "--col-agents", "2"])
    assert code == 2


def test_mms_command(tmp_path, capsys):
    path = tmp_path / "inst.json"
    main(["generate", "theorem1", "--out", str(path)])
    capsys.readouterr()
    code, out = run(["mms", str(path)], capsys)
    assert code == 0
    report = json.loads(out)
    assert report["command"] == "mms"
    assert report["result"]["mms"] == ["40", "40", "40"]
    assert "elapsed_ms" in report


def test_mms_single_agent_instance(tmp_path, capsys):
    path = tmp_path / "one.json"
    path.write_text('{"mode": "goods", "agents": 1, "items": 2, "values": [[3, 4]]}')
    code, out = run(["mms", str(path)], capsys)
    assert code == 0
    assert json.loads(out)["result"]["mms"] == ["7"]


def test_gap_command_on_both_modes(tmp_path, capsys):
    p1 = tmp_path / "goods.json"
    main(["generate", "theorem1", "--out", str(p1)])
    capsys.readouterr()
    code, out = run(["gap", str(p1)], capsys)
    assert code == 0
    assert json.loads(out)["result"]["gap"] == "1/40"

    p2 = tmp_path / "chores.json"
    main(["generate", "chores9", "--out", str(p2)])
    capsys.readouterr()
    code, out = run(["gap", str(p2)], capsys)
    assert code == 0
    report = json.loads(out)["result"]
    assert report["gap"] == "1/43"
    assert report["worst_max_fraction"] == "44/43"


def test_gap_identical_valuations_zero(tmp_path, capsys):
    path = tmp_path / "same.json"
    path.write_text('{"mode": "goods", "agents": 2, "items": 3, '
                    '"values": [[2, 3, 4], [2, 3, 4]]}')
    code, out = run(["gap", str(path)], capsys)
    assert code == 0
    assert json.loads(out)["result"]["gap"] == "0"


def test_verify_confirmed_and_counterexample(tmp_path, capsys):
    path = tmp_path / "inst.json"
    main(["generate", "theorem1", "--out", str(path)])
    capsys.readouterr()
    code, out = run(["verify", str(path), "--bound", "39",
                     "--claimed-mms", "40,40,40"], capsys)
    assert code == 0
    report = json.loads(out)["result"]
    assert report["confirmed"] is True
    assert report["structure"]["kind"] == "parallel-diagonals"

    code, out = run(["verify", str(path), "--bound", "38"], capsys)
    assert code == 1
    report = json.loads(out)["result"]
    assert report["confirmed"] is False
    assert "counterexample" in report


def test_verify_reads_stdin(tmp_path, capsys, monkeypatch):
    text = ('{"mode": "goods", "agents": 2, "items": 2, '
            '"values": [[1, 1], [1, 1]]}')
    monkeypatch.setattr("sys.stdin", io.StringIO(text))
    code, out = run(["verify", "-", "--bound", "0"], capsys)
    assert code == 1  # giving each agent one item beats a zero bound


def test_malformed_instance_exits_usage(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"mode": "goods"}')
    code = main(["mms", str(path)])
    assert code == 2


def test_search_emits_root_lp_file(tmp_path, capsys):
    lp_path = tmp_path / "root.lp"
    code, out = run(["search", "--structure", "pd", "--emit-lp", str(lp_path),
                     "--max-rounds", "1", "--budget-nodes", "60"], capsys)
    text = lp_path.read_text()
    assert text.count("\n pos_") == 27
    assert text.count("\n mms_") == 9
    assert text.count("\n bad_") == 12
    assert text.count("\n ord_") == 9
    assert text.count("\n alloc_") == 3
    # one line per constraint: the documented 60-row root relaxation
    assert sum(text.count(f"\n {p}") for p in ("pos_", "mms_", "bad_", "ord_", "alloc_")) == 60


def test_reports_are_deterministic(tmp_path, capsys):
    path = tmp_path / "inst.json"
    main(["generate", "theorem1", "--out", str(path)])
    capsys.readouterr()
    _, out1 = run(["gap", str(path)], capsys)
    _, out2 = run(["gap", str(path)], capsys)
    r1, r2 = json.loads(out1), json.loads(out2)
    r1.pop("elapsed_ms"), r2.pop("elapsed_ms")
    assert r1 == r2
