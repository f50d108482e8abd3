import json
import subprocess
import sys

from tmkit.cli import main
from tmkit.trace import Trace

from conftest import CORPUS
from dotcheck import read_dot

PERSON = str(CORPUS / "person.tm")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def json_lines(err):
    return [json.loads(l) for l in err.splitlines() if l.strip()]


def test_validate_ok(capsys):
    code, out, err = run(capsys, "validate", PERSON)
    assert code == 0 and out == "" and err == ""


def test_validate_bad_adjacency(capsys):
    code, _, err = run(capsys, "validate", str(CORPUS / "mutants" / "bad-adjacency.tm"))
    assert code == 1
    diags = json_lines(err)
    assert [d["code"] for d in diags] == ["illegal-adjacency"]
    assert set(diags[0]) == {"severity", "code", "message", "line", "column"}


def test_validate_missing_file(capsys):
    code, _, err = run(capsys, "validate", "/nonexistent/model.tm")
    assert code == 2
    assert json_lines(err)[0]["code"] == "io-error"


def test_human_diagnostics(capsys):
    path = str(CORPUS / "mutants" / "boundary.tm")
    code, _, err = run(capsys, "--human", "validate", path)
    assert code == 1
    assert f"{path}:10:1: error[boundary-violation]" in err


def test_parse_error_exit(tmp_path, capsys):
    bad = tmp_path / "bad.tm"
    bad.write_text("model m\nmachine a create\n")
    code, _, err = run(capsys, "validate", str(bad))
    assert code == 1
    assert json_lines(err)[0]["code"] == "syntax-error"


def test_render(capsys):
    code, out, _ = run(capsys, "render", PERSON)
    assert code == 0
    clusters, _, _ = read_dot(out)
    assert len(clusters) == 5


def test_render_folded(capsys):
    code, out, _ = run(capsys, "render", PERSON, "--fold", "person.work")
    assert code == 0
    clusters, nodes, _ = read_dot(out)
    assert len(clusters) == 4
    assert [n for n, a in nodes.items() if "box3d" in a] == ["person.work"]


def test_render_unknown_highlight(capsys):
    code, out, err = run(capsys, "render", PERSON, "--highlight", "no-such-event")
    assert code == 1 and out == ""
    assert json_lines(err)[0]["code"] == "unknown-event"


def test_render_bad_fold(capsys):
    code, _, err = run(capsys, "render", PERSON, "--fold", "person")
    assert code == 1
    assert json_lines(err)[0]["code"] == "fold-error"


def test_simulate_person(tmp_path, capsys):
    trace_file = tmp_path / "t.jsonl"
    timeline = tmp_path / "t.tsv"
    code, out, err = run(capsys, "simulate", PERSON, "--config", str(CORPUS / "person.cfg"),
                         "--trace", str(trace_file), "--timeline", str(timeline))
    assert code == 0 and out == ""
    trace = Trace.from_jsonl(trace_file.read_text())
    assert trace.records[0].stage == "person.self.create"
    assert timeline.read_text().startswith("event\tstart\tend\nappears\t1\t1\n")


def test_simulate_trace_to_stdout(capsys):
    code, out, _ = run(capsys, "simulate", PERSON, "--config", str(CORPUS / "person.cfg"))
    assert code == 0
    assert json.loads(out.splitlines()[0])["stage"] == "person.self.create"


def test_simulate_hammer_timeline(tmp_path, capsys):
    timeline = tmp_path / "h.tsv"
    code, _, _ = run(capsys, "simulate", str(CORPUS / "hammer.tm"),
                     "--config", str(CORPUS / "hammer.cfg"),
                     "--trace", str(tmp_path / "h.jsonl"), "--timeline", str(timeline))
    assert code == 0
    rows = {l.split("\t")[0]: tuple(map(int, l.split("\t")[1:]))
            for l in timeline.read_text().splitlines()[1:]}
    assert rows["grasp"][0] <= rows["movement"][0] <= rows["grasp"][1]


def test_simulate_horizon(tmp_path, capsys):
    cfg = tmp_path / "short.cfg"
    cfg.write_text('max_ticks = 1\nspawn = "self.create @ 1"\n')
    code, _, err = run(capsys, "simulate", PERSON, "--config", str(cfg))
    assert code == 3
    assert json_lines(err)[-1]["code"] == "horizon-exhausted"


def test_simulate_chronology_violation(tmp_path, capsys):
    cfg = tmp_path / "adv.cfg"
    cfg.write_text('spawn = "eat.create @ 1"\nspawn = "self.create @ 5"\n')
    code, _, err = run(capsys, "simulate", PERSON, "--config", str(cfg))
    assert code == 1
    assert "chronology-violation" in [d["code"] for d in json_lines(err)]


def test_simulate_errors_beat_horizon(tmp_path, capsys):
    cfg = tmp_path / "adv.cfg"
    cfg.write_text('max_ticks = 6\nspawn = "eat.create @ 1"\nspawn = "self.create @ 5"\n')
    code, _, _ = run(capsys, "simulate", PERSON, "--config", str(cfg))
    assert code == 1


def test_simulate_config_error(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("spawn = self.process\n")
    code, _, err = run(capsys, "simulate", PERSON, "--config", str(cfg))
    assert code == 1
    assert json_lines(err)[0]["code"] == "config-error"
    code, _, _ = run(capsys, "simulate", PERSON, "--config", str(tmp_path / "missing.cfg"))
    assert code == 2


def test_fold_command(capsys):
    code, out, _ = run(capsys, "fold", PERSON, "work", "eat")
    assert code == 0
    assert "machine work folded" in out and "machine eat folded" in out


def test_events_listing(capsys):
    code, out, _ = run(capsys, "events", PERSON)
    assert code == 0
    assert [l.split("\t")[0] for l in out.splitlines()] == [
        "appears", "eats", "goes_to_work", "named"]
    code, out, _ = run(capsys, "events", PERSON, "--elementary")
    assert len(out.splitlines()) == 4 + 3 + 2 + 2


def test_events_state(capsys):
    code, out, _ = run(capsys, "events", PERSON, "--config", str(CORPUS / "person.cfg"),
                       "--at", "7")
    assert code == 0
    state = json.loads(out)
    assert state["active"] == ["goes_to_work"]
    assert state["positions"] == {"person#1": "person.work.process"}
    code, _, _ = run(capsys, "events", PERSON, "--config", str(CORPUS / "person.cfg"),
                     "--at", "999")
    assert code == 1


def test_usage_error(capsys):
    assert main([]) == 2
    assert main(["bogus"]) == 2


def test_console_script():
    out = subprocess.run([sys.executable, "-m", "tmkit.cli", "validate", PERSON],
                         capture_output=True, text=True)
    assert out.returncode == 0
