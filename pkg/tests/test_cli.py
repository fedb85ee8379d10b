import json
import os

import pytest

from fincover import io
from fincover.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _rows(out):
    return [tuple(line.split("\t", 1)) for line in out.splitlines()]


def test_cover_k4_k33(capsys):
    code, out, err = run(capsys, "cover", "fixture:k4", "fixture:k33", "--solver", "measure")
    assert code == 0
    rows = dict(_rows(out))
    assert rows["weights"] == "1,2"
    assert rows["solver"] == "measure"
    assert rows["assembled_vertices"] == "144"
    assert rows["verified"] == "yes"
    d1, d2 = map(int, rows["degrees"].split(","))
    assert 4 * d1 == 6 * d2
    assert err == ""


def test_cover_kernel_solver(capsys):
    code, out, _ = run(capsys, "cover", "fixture:tri3", "fixture:hex6", "--solver", "kernel")
    assert code == 0 and "solver\tkernel" in out


def test_check_exit_codes(capsys):
    code, out, _ = run(capsys, "check", "fixture:k4", "fixture:c5")
    assert code == 2
    assert "equivalent\tno" in out and "mismatch\tcolour" in out
    code, out, _ = run(capsys, "check", "fixture:k4", "fixture:k33")
    assert code == 0 and "equivalent\tyes" in out


def test_cover_mismatch_exit(capsys):
    code, out, _ = run(capsys, "cover", "fixture:k4", "fixture:c5")
    assert code == 2 and "mismatch\t" in out and "verified" not in out


def test_nfold(capsys, tmp_path):
    out_path = str(tmp_path / "t3.json")
    code, out, _ = run(capsys, "nfold", "fixture:tri3", "3", "--seed", "0", "--out", out_path)
    assert code == 0
    rows = dict(_rows(out))
    assert rows["degree"] == "3" and rows["verified"] == "yes"
    code, out, _ = run(capsys, "verify", out_path, str(tmp_path / "t3.phi1.json"), "fixture:tri3")
    assert code == 0 and "degree\t3" in out


def test_nfold_rejects_bad_degree(capsys):
    code, _, err = run(capsys, "nfold", "fixture:tri3", "0")
    assert code == 1 and "positive" in err


def test_cover_writes_files_and_verify_catches_tampering(capsys, tmp_path):
    out_path = str(tmp_path / "sub" / "cov.json")
    code, out, _ = run(capsys, "cover", "fixture:theta2", "fixture:theta2", "--seed", "3", "--out", out_path)
    assert code == 0
    for suffix in ("", ".phi1", ".phi2"):
        assert os.path.exists(str(tmp_path / "sub" / ("cov%s.json" % suffix)))
    maps = str(tmp_path / "sub" / "cov.phi1.json")
    assert run(capsys, "verify", out_path, maps, "fixture:theta2")[0] == 0
    data = json.loads(open(maps).read())
    v = sorted(data["vertices"])[0]
    data["vertices"][v] = "nowhere"
    bad = str(tmp_path / "bad.json")
    io.write_text(bad, json.dumps(data))
    code, out, _ = run(capsys, "verify", out_path, bad, "fixture:theta2")
    assert code == 4 and "violation\tvertex %s" % v in out


def test_report_dir(capsys, tmp_path):
    rep = tmp_path / "rep"
    code, out, _ = run(capsys, "cover", "fixture:tri3", "fixture:hex6", "--report", str(rep))
    assert code == 0
    for name in ("report.tsv", "weights.png", "cover.png", "windings.png"):
        assert (rep / name).exists()
    assert (rep / "report.tsv").read_text() in out
    assert (rep / "cover.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_timings_only_on_stderr(capsys):
    code, out, err = run(capsys, "cover", "fixture:seg", "fixture:seg", "--timings")
    assert code == 0
    assert "time\t" not in out
    assert "time\trefine\t" in err


def test_identical_invocations_are_byte_identical(capsys, tmp_path):
    outs = []
    for k in range(2):
        p = str(tmp_path / ("c%d.json" % k))
        code, out, _ = run(capsys, "cover", "fixture:k4", "fixture:k33", "--seed", "5", "--out", p)
        assert code == 0
        outs.append((out.replace(p[:-5], "X"), open(p).read(), open(p[:-5] + ".phi2.json").read()))
    assert outs[0] == outs[1]


def test_gen_then_cover(capsys, tmp_path):
    p = str(tmp_path / "inst.json")
    code, out, _ = run(capsys, "gen", "--seed", "4", "--out", p)
    assert code == 0
    inst = io.read_instance(p)
    assert len(inst.complexes) == 2 and inst.expected["equivalent"] is True
    assert run(capsys, "cover", p)[0] == 0
    a = run(capsys, "gen", "--seed", "4")[1]
    b = run(capsys, "gen", "--seed", "4")[1]
    assert a == b == open(p).read()


def test_export(capsys):
    code, out, _ = run(capsys, "export", "fixture:tri3", "--dot")
    assert code == 0 and out.startswith("digraph")
    code, out, _ = run(capsys, "export", "fixture:tri3")
    assert out == io.fixture_text("tri3")
    assert run(capsys, "export", "fixture:tri3", "--index", "3")[0] == 1


def test_input_errors(capsys, tmp_path):
    code, _, err = run(capsys, "check", str(tmp_path / "missing.json"), "fixture:k4")
    assert code == 1 and "missing.json" in err
    code, _, err = run(capsys, "check", "fixture:nope", "fixture:k4")
    assert code == 1 and "unknown fixture" in err
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"format": "fincover-instance", "version": 1, "complexes": [
        {"name": "r", "vertices": ["o"], "edges": [["a", "o", "o"]], "fins": {"f": ["a", "-a"]}}]}))
    code, _, err = run(capsys, "cover", str(bad), "fixture:k4")
    assert code == 1 and "backtracking at position 1" in err
    code, _, err = run(capsys, "cover", "fixture:k4")
    assert code == 1 and "expected two complexes" in err


def test_pair_cap_exit(capsys, monkeypatch):
    monkeypatch.setenv("FINCOVER_PAIR_CAP", "10")
    code, out, _ = run(capsys, "cover", "fixture:k4", "fixture:k33")
    assert code == 3 and "FINCOVER_PAIR_CAP" in out


@pytest.mark.parametrize("argv", [["frobnicate"], ["cover"], ["nfold", "fixture:tri3", "x"], []])
def test_usage_errors_exit_one(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 1
    assert "usage:" in capsys.readouterr().err
