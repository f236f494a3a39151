import json
import os
import subprocess
import sys
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from modmult import cli
from modmult.config import CONFIG_ENV, RunConfig
from modmult.errors import DomainError, LockHeld, ReplayMismatch
from modmult.store import CertificateRecord, Store, replay_record

DATA = Path(__file__).parent / "data"
J_MF = str(DATA / "j.mf")
J1728_MF = str(DATA / "j_over_1728.mf")


def run(capsys, *argv):
    rc = cli.dispatch(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


# -- dispatch examples ---------------------------------------------------------------

def test_hurwitz_table_ends_with_q7(capsys):
    rc, out, _ = run(capsys, "qseries", "hurwitz", "--max", "7")
    assert rc == 0
    assert out.strip().splitlines()[-1].split() == ["7", "1"]


def test_dep_search_for_j_is_empty(capsys):
    rc, out, err = run(capsys, "dep", "search", "--function", J_MF, "--n", "1", "--max-disc", "100")
    assert rc == 0
    lines = [json.loads(x) for x in out.splitlines()]
    assert len(lines) == 1 and "coverage" in lines[0]
    discs = [D for D in range(-3, -101, -1) if D % 4 in (0, 1)]
    assert lines[0]["coverage"]["discs"] == discs
    assert err.startswith("# 0 certificates")
    assert all(str(D) in err.split() for D in discs)


def test_check_b0_j_case(capsys):
    rc, out, _ = run(capsys, "borcherds", "check-b0", "--exps", "3:3")
    data = json.loads(out)
    assert rc == 0 and data["verdict"] == "HOLDS"
    assert "j = Psi(f_3)^3" in data["note"]


def test_assorted_commands(capsys):
    rc, out, _ = run(capsys, "forms", "enum", "--disc", "-15")
    assert rc == 0 and out.splitlines() == ["1 1 4", "2 1 2"]
    rc, out, _ = run(capsys, "forms", "reduce", "--tau", "1/10,1/5")
    assert json.loads(out)["tau"] == "0 + 4*sqrt(-1)"
    rc, out, _ = run(capsys, "special", "hcp", "--disc", "-4")
    assert json.loads(out)["coefficients"] == ["-1728", "1"]
    rc, out, _ = run(capsys, "witness", "--function", J_MF, "--g", "1,0;0,1", "--g", "2,0;0,1")
    assert json.loads(out)["verdict"] == "CERTIFIED"
    rc, out, _ = run(capsys, "zp", "scan-roots", "--function", J1728_MF, "--max-disc", "4")
    hits = json.loads(out)["hits"]
    assert [(h["disc"], h["order"], h["certificate"]["verdict"]) for h in hits] == [(-4, 1, "VERIFIED")]


def test_classify_from_files(capsys, tmp_path):
    point = tmp_path / "p.json"
    point.write_text(json.dumps({"x": [5, 5], "t": [5, 5]}))
    bounds = tmp_path / "b.toml"
    bounds.write_text("max_disc = 20\nnmax = 2\n")
    rc, out, _ = run(capsys, "zp", "classify", "--function", J_MF, "--point", str(point), "--n", "2",
                     "--bounds", str(bounds))
    assert rc == 0
    assert [t["template"] for t in json.loads(out)["templates"]] == ["(t1, t1, t2, t2)"]


# -- exit codes -------------------------------------------------------------------------

def test_usage_errors_print_grammar(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.dispatch(["qseries", "bogus"])
    assert exc.value.code == 2
    err = capsys.readouterr().err
    assert "commands:" in err and "dep search --function FUNCTION --n N" in err
    with pytest.raises(SystemExit) as exc:
        cli.dispatch([])
    assert exc.value.code == 2


def test_domain_error_exit_code(capsys):
    rc, _, err = run(capsys, "forms", "enum", "--disc", "-5")
    assert rc == 1 and err
    rc, _, _ = run(capsys, "modfunc", "divisor", "--function", "/nonexistent.mf")
    assert rc == 1


def test_console_script_exit_codes(tmp_path):
    env = dict(os.environ, PYTHONPATH=str(Path(__file__).parents[1] / "src"))
    ok = subprocess.run([sys.executable, "-m", "modmult", "qseries", "hurwitz", "--max", "3"],
                        capture_output=True, text=True, env=env)
    assert ok.returncode == 0 and ok.stdout.strip().endswith("3 1/3")
    bad = subprocess.run([sys.executable, "-m", "modmult", "nope"], capture_output=True, text=True, env=env)
    assert bad.returncode == 2


def _dummy_args(group, cmd, specs):
    argv = [group] + ([cmd] if cmd else [])
    for name, kw in specs:
        if not name.startswith("-"):
            argv.append("x")
        elif kw.get("required"):
            argv += [name, "1" if kw.get("type") is int else "x"]
    return argv


@pytest.mark.parametrize("key", sorted(cli._COMMANDS, key=str))
def test_every_command_has_dry_run(capsys, key):
    argv = _dummy_args(key[0], key[1], cli._COMMANDS[key][1]) + ["--dry-run", "--bits", "200"]
    rc, out, _ = run(capsys, *argv)
    assert rc == 0
    assert RunConfig.from_toml(out) == RunConfig(bits=200)


# -- configuration --------------------------------------------------------------------

@settings(max_examples=40)
@given(st.integers(64, 4096), st.one_of(st.none(), st.floats(1e-80, 1e-3)), st.integers(1, 500),
       st.floats(0.01, 100), st.integers(1, 10 ** 4), st.integers(1, 10 ** 3), st.integers(1, 20),
       st.integers(1, 64), st.one_of(st.none(), st.text("abc/._", min_size=1, max_size=12)))
def test_config_toml_roundtrip(bits, tol, box, cn, disc, order, nmax, workers, out):
    cfg = RunConfig(bits, tol, box, cn, disc, order, nmax, workers, out)
    assert RunConfig.from_toml(cfg.to_toml()) == cfg


def test_config_validation_and_env(tmp_path, monkeypatch, capsys):
    with pytest.raises(DomainError):
        RunConfig(bits=32)
    with pytest.raises(DomainError):
        RunConfig(max_disc=0)
    with pytest.raises(DomainError):
        RunConfig.from_toml("bogus = 1\n")
    path = tmp_path / "c.toml"
    path.write_text(RunConfig(bits=300, max_disc=12).to_toml())
    monkeypatch.setenv(CONFIG_ENV, str(path))
    assert RunConfig.load() == RunConfig(bits=300, max_disc=12)
    assert RunConfig.load(bits=400).bits == 400
    rc, out, _ = run(capsys, "special", "hcp", "--disc", "-3", "--dry-run")
    assert RunConfig.from_toml(out).bits == 300


# -- store -------------------------------------------------------------------------------

def test_store_single_writer(tmp_path):
    path = str(tmp_path / "s.jsonl")
    with Store(path):
        with pytest.raises(LockHeld):
            with Store(path):
                pass
    assert not os.path.exists(path + ".lock")
    with pytest.raises(LockHeld):
        Store(path).append(CertificateRecord("qseries.hurwitz", {"max": 3}, {}, "x", 128))


def test_hurwitz_append_and_replay(capsys, tmp_path):
    out = str(tmp_path / "s.jsonl")
    run(capsys, "qseries", "hurwitz", "--max", "7", "--out", out)
    (rec,) = list(Store(out).records())
    assert rec.kind == "qseries.hurwitz" and rec.inputs["max"] == 7
    assert rec.replay == ["modmult", "store", "replay", out, "--index", "0"]
    assert replay_record(rec) == rec.verdict
    rc, text, _ = run(capsys, "store", "replay", out)
    assert rc == 0 and text.startswith("0 qseries.hurwitz OK")


def test_relation_replay_at_doubled_precision(capsys, tmp_path):
    out = str(tmp_path / "s.jsonl")
    run(capsys, "zp", "scan-roots", "--function", J1728_MF, "--max-disc", "4", "--out", out)
    recs = list(Store(out).records())
    rel = [r for r in recs if r.kind == "relation"]
    assert len(rel) == 1 and rel[0].verdict == "VERIFIED"
    assert replay_record(rel[0], 2 * rel[0].bits) == "VERIFIED"


def test_tampered_record(capsys, tmp_path):
    out = str(tmp_path / "s.jsonl")
    run(capsys, "borcherds", "check-b0", "--exps", "3:3", "--out", out)
    (rec,) = list(Store(out).records())
    rec.verdict = "FAILS"
    with pytest.raises(ReplayMismatch):
        replay_record(rec)
    Path(out).write_text(rec.to_json() + "\n")
    rc, text, _ = run(capsys, "store", "replay", out)
    assert rc == 1 and "MISMATCH" in text


def test_outputs_are_deterministic(capsys, tmp_path):
    outs, payloads = [], []
    for k in range(2):
        path = str(tmp_path / f"s{k}.jsonl")
        rc, text, _ = run(capsys, "special", "moduli", "--disc", "-15", "--out", path)
        outs.append(text)
        rec = next(Store(path).records())
        payloads.append((rec.kind, rec.inputs, rec.result, rec.verdict, rec.bits))
    assert outs[0] == outs[1]
    assert payloads[0] == payloads[1]
