import json
import shutil
from pathlib import Path

import pytest

from conftest import DATA
from pfgame.cli import run

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture
def files_dir(tmp_path):
    for name in ("running_example.op", "blackmailer.op", "example53.tns"):
        shutil.copy(str(DATA / name), tmp_path / name)
    return tmp_path


def _json(path):
    return json.loads(Path(path).read_text())


def test_decide_existence_running(files_dir, capsys):
    out = files_dir / "out.json"
    assert run(["decide-existence", str(files_dir / "running_example.op"), "--json", str(out)]) == 0
    assert "NoDisjointDominions" in capsys.readouterr().out
    rep = _json(out)
    assert rep["schema"] == "pfgame/1" and rep["exit_code"] == 0
    assert rep["report"]["verdict"] == "NoDisjointDominions"


def test_decide_existence_certificate(tmp_path, capsys):
    src = tmp_path / "id.op"
    src.write_text("operator n=2\nT1 := x1\nT2 := x2\n")
    out = tmp_path / "out.json"
    assert run(["decide-existence", str(src), "--json", str(out)]) == 0
    rep = _json(out)
    assert rep["report"]["I"] == [1] and rep["report"]["J"] == [2]
    assert rep["certificate"]["verified"] is True


def test_decide_uniqueness_at(files_dir, capsys):
    out = files_dir / "u.json"
    code = run(["decide-uniqueness", str(files_dir / "running_example.op"), "--at", "0,0,2",
                "--json", str(out)])
    assert code == 0
    text = capsys.readouterr().out
    assert "I={1,2} J={3}" in text and "second eigenvector" in text
    rep = _json(out)
    assert rep["report"]["verdict"] == "DisjointDominions"
    assert len(rep["second_eigenvector"]) == 3


def test_decide_uniqueness_solve(files_dir, capsys):
    assert run(["decide-uniqueness", str(files_dir / "running_example.op"), "--solve"]) == 0
    assert "I={1,2} J={3}" in capsys.readouterr().out


def test_at_and_solve_are_exclusive(files_dir):
    with pytest.raises(SystemExit):
        run(["decide-uniqueness", str(files_dir / "running_example.op"), "--solve", "--at", "0,0,2"])
    with pytest.raises(SystemExit):
        run(["decide-uniqueness", str(files_dir / "running_example.op")])


def test_not_an_eigenvector_is_input_error(files_dir, capsys):
    assert run(["decide-uniqueness", str(files_dir / "running_example.op"), "--at", "0,0,0"]) == 1
    assert run(["decide-uniqueness", str(files_dir / "running_example.op"), "--at", "0,0"]) == 1


def test_bad_file(tmp_path, capsys):
    bad = tmp_path / "bad.op"
    bad.write_text("operator n=2\nT1 := max(x1,\nT2 := x2\n")
    assert run(["solve", str(bad)]) == 1
    assert "line" in capsys.readouterr().err
    assert run(["solve", str(tmp_path / "missing.op")]) == 1


def test_solve_and_undetermined(files_dir, tmp_path, capsys):
    out = files_dir / "s.json"
    assert run(["solve", str(files_dir / "running_example.op"), "--json", str(out)]) == 0
    assert _json(out)["eigenvector"]["residual"] < 1e-8
    split = tmp_path / "split.op"
    split.write_text("operator n=2\nT1 := 1 + x1\nT2 := x2\n")
    out2 = tmp_path / "u.json"
    assert run(["solve", str(split), "--max-iters", "500", "--json", str(out2)]) == 2
    assert _json(out2)["exit_code"] == 2


def test_mean_payoff(files_dir, capsys):
    out = files_dir / "m.json"
    assert run(["mean-payoff", str(files_dir / "blackmailer.op"), "--k", "10", "--json", str(out)]) == 0
    assert len(_json(out)["mean_payoff"]) == 3
    assert run(["mean-payoff", str(files_dir / "blackmailer.op"), "--k", "0"]) == 1


def test_recession_and_signature(files_dir, capsys):
    import oracles as O

    assert run(["recession", str(files_dir / "blackmailer.op")]) == 0
    assert capsys.readouterr().out == O.BLACKMAILER_RECESSION
    assert run(["signature", str(DATA / "e_expr.op")]) == 0
    assert capsys.readouterr().out.startswith("operator n=2")


def test_export_golden(files_dir):
    dot = files_dir / "h.dot"
    assert run(["export", str(files_dir / "running_example.op"), "--graph", "hminus",
                "--minimal", "--dot", str(dot)]) == 0
    assert dot.read_text() == (GOLDEN / "running_hminus.dot").read_text()


def test_export_local_needs_point(files_dir):
    dot = files_dir / "g.dot"
    assert run(["export", str(files_dir / "running_example.op"), "--graph", "hu-plus",
                "--dot", str(dot)]) == 1
    assert run(["export", str(files_dir / "running_example.op"), "--graph", "hu-plus",
                "--at", "0,0,2", "--dot", str(dot)]) == 0
    assert dot.read_text().startswith('digraph "hu-plus"')
    assert run(["export", str(files_dir / "running_example.op"), "--graph", "ginf",
                "--dot", str(dot)]) == 1


def test_tensor_commands(files_dir, capsys):
    assert run(["tensor-decide", str(files_dir / "example53.tns")]) == 0
    text = capsys.readouterr().out
    assert "final classes: {1,2}" in text
    assert "positive eigenvector for every positive instance: YES" in text
    out = files_dir / "t.json"
    assert run(["tensor-solve", str(files_dir / "example53.tns"), "--json", str(out)]) == 0
    assert _json(out)["eigenpair"]["residual"] < 1e-8


def test_json_is_deterministic(files_dir):
    reps = []
    for k in range(2):
        out = files_dir / f"d{k}.json"
        run(["decide-uniqueness", str(files_dir / "running_example.op"), "--solve", "--seed", "7",
             "--json", str(out)])
        rep = _json(out)
        rep.pop("timestamp")
        reps.append(json.dumps(rep, sort_keys=True))
    assert reps[0] == reps[1]


def test_threads_flag(files_dir, capsys):
    assert run(["decide-existence", str(files_dir / "blackmailer.op"), "--threads", "3"]) == 0
    assert "NoDisjointDominions" in capsys.readouterr().out
