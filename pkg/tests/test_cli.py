import json
import socket
import subprocess
import sys

import pytest

from zkpauth.cli import main
from zkpauth.curve import P192
from zkpauth.identity import load_identity, load_public
from zkpauth.net import Channel
from zkpauth.protocols import ZKP1, Zkp1Prover
from zkpauth.wire import MsgType

CLI = [sys.executable, "-m", "zkpauth"]


def listen(*args):
    proc = subprocess.Popen([*CLI, *args, "--listen", "127.0.0.1:0"], stdout=subprocess.PIPE,
                            stderr=subprocess.PIPE, text=True)
    line = proc.stdout.readline()
    assert line.startswith("listening "), line + proc.stderr.read()
    return proc, line.split()[1]


def connect(addr, *args):
    return subprocess.run([*CLI, *args, "--connect", addr], capture_output=True, text=True, timeout=60)


def finish(proc):
    out, err = proc.communicate(timeout=60)
    return proc.returncode, out, err


@pytest.fixture
def ids(tmp_path):
    paths = {}
    for name in ("alice", "bob"):
        p = tmp_path / name
        assert main(["keygen", "--curve", "p192", "--out", str(p), "--pool-size", "3"]) == 0
        paths[name] = p
    return paths


@pytest.mark.parametrize("protocol", ["zkp1", "zkp2"])
def test_prove_verify(ids, protocol):
    proc, addr = listen("verify", "--protocol", protocol, "--curve", "p192",
                        "--peer-pub", f"{ids['alice']}.pub")
    prover = connect(addr, "prove", "--protocol", protocol, "--identity", str(ids["alice"]))
    code, out, _err = finish(proc)
    assert prover.returncode == 0, prover.stderr
    assert code == 0
    rec = json.loads(out.splitlines()[-1])
    assert rec["role"] == "verifier" and rec["curve"] == "p192"
    assert json.loads(prover.stdout.splitlines()[-1])["role"] == "prover"


def test_zkp2_pool_persisted_and_exhausted(ids):
    for expected_left in (2, 1, 0):
        proc, addr = listen("verify", "--protocol", "zkp2", "--curve", "p192",
                            "--peer-pub", f"{ids['alice']}.pub")
        r = connect(addr, "prove", "--protocol", "zkp2", "--identity", str(ids["alice"]))
        assert r.returncode == 0 and finish(proc)[0] == 0
        assert load_identity(ids["alice"])[1].remaining() == expected_left
    r = connect("127.0.0.1:1", "prove", "--protocol", "zkp2", "--identity", str(ids["alice"]))
    assert r.returncode == 5
    assert "re-provision" in r.stderr


def test_wrong_peer_rejects(ids):
    proc, addr = listen("verify", "--protocol", "zkp1", "--curve", "p192",
                        "--peer-pub", f"{ids['bob']}.pub")
    prover = connect(addr, "prove", "--protocol", "zkp1", "--identity", str(ids["alice"]))
    assert finish(proc)[0] == 1
    assert prover.returncode == 1


def test_mutual(ids):
    proc, addr = listen("mutual", "--identity", str(ids["alice"]), "--peer-pub", f"{ids['bob']}.pub")
    b = connect(addr, "mutual", "--identity", str(ids["bob"]), "--peer-pub", f"{ids['alice']}.pub")
    code, out, _ = finish(proc)
    assert code == 0 and b.returncode == 0
    fa = [ln for ln in out.splitlines() if ln.startswith("session-key-fingerprint")]
    fb = [ln for ln in b.stdout.splitlines() if ln.startswith("session-key-fingerprint")]
    assert fa and fa == fb


def test_mutual_wrong_peer(ids):
    proc, addr = listen("mutual", "--identity", str(ids["alice"]), "--peer-pub", f"{ids['alice']}.pub")
    b = connect(addr, "mutual", "--identity", str(ids["bob"]), "--peer-pub", f"{ids['alice']}.pub")
    assert finish(proc)[0] == 1 and b.returncode == 1
    assert "fingerprint" not in b.stdout


def test_protocol_mismatch(ids):
    proc, addr = listen("verify", "--protocol", "zkp2", "--curve", "p192",
                        "--peer-pub", f"{ids['alice']}.pub")
    r = connect(addr, "prove", "--protocol", "zkp1", "--identity", str(ids["alice"]))
    assert r.returncode == 7
    assert finish(proc)[0] == 7


def _raw_prover(addr, w, y_for):
    host, port = addr.rsplit(":", 1)
    with socket.create_connection((host, int(port))) as s:
        chan = Channel(s, P192, ZKP1, timeout=30)
        chan.hello()
        chan.send(MsgType.WITNESS, w)
        e = chan.recv().value
        chan.send(MsgType.ANSWER, y_for(e))
        return e, chan.recv().value


def test_zkp1_replay_rejected(ids):
    ident, _ = load_identity(ids["alice"])
    prover = Zkp1Prover(ident)
    w = prover.commit()
    proc, addr = listen("verify", "--protocol", "zkp1", "--curve", "p192", "--peer-pub", f"{ids['alice']}.pub")
    e1, ok = _raw_prover(addr, w, prover.respond)
    assert ok is True and finish(proc)[0] == 0
    y = prover.transcript.answer

    proc, addr = listen("verify", "--protocol", "zkp1", "--curve", "p192", "--peer-pub", f"{ids['alice']}.pub")
    e2, ok = _raw_prover(addr, w, lambda _e: y)
    assert e2 != e1
    assert ok is False and finish(proc)[0] == 1


def test_garbage_peer_decode_error(ids):
    proc, addr = listen("verify", "--protocol", "zkp1", "--curve", "p192", "--peer-pub", f"{ids['alice']}.pub")
    host, port = addr.rsplit(":", 1)
    with socket.create_connection((host, int(port))) as s:
        s.sendall(b"\x01\x01\x04p192" + b"\x01\x01\x00\x31" + b"\x04" + b"\xff" * 48)
        s.recv(100)
    assert finish(proc)[0] == 4


def test_usage_and_identity_errors(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["prove", "--connect", "127.0.0.1:1"])
    assert exc.value.code == 2
    bad = tmp_path / "bad"
    bad.write_text("curve=tiny17\nsecret=02\npublic=040501\n")
    assert main(["prove", "--identity", str(bad), "--connect", "127.0.0.1:1"]) == 6
    good = tmp_path / "good"
    main(["keygen", "--out", str(good)])
    assert main(["prove", "--identity", str(good), "--connect", "127.0.0.1:1"]) == 3
    assert main(["prove", "--protocol", "zkp2", "--identity", str(good), "--connect", "127.0.0.1:1"]) == 6
    assert main(["prove", "--protocol", "zkp3", "--identity", str(good), "--connect", "127.0.0.1:1"]) == 2


def test_keygen_seed_warns(tmp_path, capsys):
    out = tmp_path / "k"
    assert main(["keygen", "--seed", "5", "--out", str(out)]) == 0
    assert "TESTS ONLY" in capsys.readouterr().err
    assert load_public(f"{out}.pub").curve.name == "tiny17"


def test_concurrent_sessions(ids, tmp_path):
    proc, addr = listen("verify", "--protocol", "zkp1", "--curve", "p192", "--sessions", "3",
                        "--peer-pub", f"{ids['alice']}.pub")
    provers = [subprocess.Popen([*CLI, "prove", "--identity", str(ids["alice"]), "--connect", addr],
                                stdout=subprocess.PIPE, stderr=subprocess.PIPE) for _ in range(3)]
    assert [p.wait(timeout=60) for p in provers] == [0, 0, 0]
    code, out, _ = finish(proc)
    assert code == 0
    assert len([ln for ln in out.splitlines() if ln.startswith("{")]) == 3


def test_bench_cli(tmp_path):
    report = tmp_path / "r.jsonl"
    assert main(["bench", "--curve", "p192", "--repetitions", "1", "--pool-size", "3",
                 "--report", str(report)]) == 0
    rows = [json.loads(ln) for ln in report.read_text().splitlines()]
    assert {r["protocol"] for r in rows} == {"ZKP1", "ZKP2", "ZKP3"}
