import io
import random

import pytest

from zkpauth.curve import P192, TINY17, Point
from zkpauth.protocols import (
    ZKP1,
    ZKP2,
    ZKP3,
    CompromisePool,
    Identity,
    run_zkp1,
    run_zkp2,
    run_zkp3,
)
from zkpauth.wire import (
    BadLengthError,
    BadPointError,
    DecodeError,
    IncompleteSessionError,
    Message,
    MsgType,
    ScalarRangeError,
    TruncatedError,
    UnknownIdError,
    VersionError,
    compare_protocols,
    decode_message,
    encode_hello,
    encode_message,
    measure_session,
    read_hello,
    read_message,
    table4_counts,
)


def test_worked_encodings():
    G = TINY17.G
    assert encode_message(Message(ZKP1, MsgType.WITNESS, G), TINY17) == bytes.fromhex("0101 0003 040501")
    assert encode_message(Message(ZKP1, MsgType.ANSWER, 11), TINY17) == bytes.fromhex("0103 0001 0b")
    assert encode_message(Message(ZKP3, MsgType.RESULT, True), TINY17) == bytes.fromhex("0304 0001 01")
    assert encode_hello(ZKP2, "p192") == b"\x01\x02\x04p192"


@pytest.mark.parametrize("msg", [
    Message(ZKP1, MsgType.WITNESS, P192.mul_g(12345)),
    Message(ZKP1, MsgType.WITNESS, P192.infinity),
    Message(ZKP1, MsgType.CHALLENGE, P192.m - 1),
    Message(ZKP1, MsgType.ANSWER, 0),
    Message(ZKP2, MsgType.WITNESS, bytes(range(32))),
    Message(ZKP2, MsgType.CHALLENGE, 7),
    Message(ZKP3, MsgType.WITNESS, P192.G),
    Message(ZKP3, MsgType.ANSWER, 99),
    Message(ZKP3, MsgType.RESULT, False),
])
def test_roundtrip(msg):
    data = encode_message(msg, P192)
    assert decode_message(data, P192) == msg
    assert read_message(io.BytesIO(data).read, P192) == msg


def test_p192_sizes():
    assert len(encode_message(Message(ZKP1, MsgType.WITNESS, P192.G), P192)) == 4 + 49
    assert len(encode_message(Message(ZKP1, MsgType.ANSWER, 1), P192)) == 4 + 24
    assert len(encode_message(Message(ZKP2, MsgType.WITNESS, b"\x00" * 32), P192)) == 4 + 32


def test_encoder_refuses_bad_values():
    with pytest.raises(ValueError):
        encode_message(Message(ZKP1, MsgType.ANSWER, P192.m), P192)
    with pytest.raises(ValueError):
        encode_message(Message(ZKP1, MsgType.WITNESS, Point(5, 2, TINY17)), TINY17)
    with pytest.raises(UnknownIdError):
        encode_message(Message(ZKP3, MsgType.CHALLENGE, 1), TINY17)


def test_decode_errors():
    good = encode_message(Message(ZKP1, MsgType.WITNESS, TINY17.G), TINY17)
    cases = [
        (b"\x01\x01", TruncatedError),
        (good[:-1], TruncatedError),
        (good + b"\x00", BadLengthError),
        (b"\x09" + good[1:], UnknownIdError),
        (good[:1] + b"\x07" + good[2:], UnknownIdError),
        (b"\x03\x02\x00\x01\x05", UnknownIdError),  # ZKP3 challenge never travels
        (good[:-1] + b"\x02", BadPointError),
        (bytes.fromhex("0103 0001 13"), ScalarRangeError),  # 19 == m
        (bytes.fromhex("0103 0002 0001"), BadLengthError),
        (bytes.fromhex("0201 0002 0001"), BadLengthError),
        (bytes.fromhex("0104 0001 02"), BadLengthError),
    ]
    for data, err in cases:
        with pytest.raises(err):
            decode_message(data, TINY17)
        assert issubclass(err, DecodeError)


def test_hello():
    assert read_hello(io.BytesIO(encode_hello(ZKP3, "tiny17")).read) == (ZKP3, "tiny17")
    with pytest.raises(VersionError):
        read_hello(io.BytesIO(b"\x02\x01\x06tiny17").read)
    with pytest.raises(UnknownIdError):
        read_hello(io.BytesIO(b"\x01\x05\x06tiny17").read)


def test_random_bytes_never_crash():
    rng = random.Random(0)
    for _ in range(3000):
        data = rng.randbytes(rng.randrange(0, 60))
        try:
            decode_message(data, P192)
        except DecodeError:
            pass


@pytest.fixture(scope="module")
def p192_reports():
    rng = random.Random(7)
    ident = Identity.from_secret(P192, rng.randrange(1, P192.m))
    other = Identity.from_secret(P192, rng.randrange(1, P192.m))
    pool = CompromisePool.precompute(P192, 4, rng)
    sessions = [*run_zkp1(ident, rng, rng), *run_zkp2(ident, pool, rng, rng), *run_zkp3(ident, other, rng, rng)]
    assert all(s.accepted for s in sessions)
    return [measure_session(s) for s in sessions]


def test_measured_bits(p192_reports):
    got = {(r.protocol, r.role): (r.transferred_bits, r.stored_secret_bits) for r in p192_reports}
    assert got[(ZKP1, "prover")] == (392 + 192, 384)
    assert got[(ZKP1, "verifier")] == (192, 128)
    assert got[(ZKP2, "prover")] == (256 + 192, 4 * (192 + 392) + 192)
    assert got[(ZKP2, "verifier")] == (192, 0)
    assert got[(ZKP3, "mutual")] == (584, 384)


def test_records_flag_published_discrepancy(p192_reports):
    rec = p192_reports[0].as_record()
    assert rec["protocol"] == "ZKP1" and rec["published_transferred_bits"] == 1728
    assert rec["bandwidth_discrepancy"] is True
    assert '"transferred_bits": 584' in p192_reports[0].to_json()


def test_compare_protocols(p192_reports):
    cmp_ = compare_protocols(p192_reports)
    assert cmp_["bandwidth_order"] == ["ZKP2", "ZKP1", "ZKP3"]
    assert cmp_["bandwidth"]["ZKP3"] == 1168
    assert cmp_["zkp2_min_bandwidth"] and cmp_["zkp2_max_memory"]
    assert cmp_["zkp3_over_zkp1_ops"] == pytest.approx(8 / 4)


def test_compare_protocols_errors(p192_reports):
    with pytest.raises(ValueError):
        compare_protocols([r for r in p192_reports if r.protocol != ZKP2])
    ident = Identity.from_secret(TINY17, 2)
    tiny = measure_session(run_zkp1(ident)[0])
    with pytest.raises(ValueError):
        compare_protocols([*p192_reports, tiny])


def test_framing_and_incomplete():
    ident = Identity.from_secret(TINY17, 2)
    p, v = run_zkp1(ident)
    assert measure_session(p, include_framing=True).transferred_bits == measure_session(p).transferred_bits + 64
    assert measure_session(v, include_framing=True).transferred_bits == measure_session(v).transferred_bits + 32 + 40
    from zkpauth.protocols import Zkp1Prover
    with pytest.raises(IncompleteSessionError):
        measure_session(Zkp1Prover(ident))


def test_table4_counts():
    assert table4_counts(ZKP1, "prover") == (1, 0)
    assert table4_counts(ZKP1, "verifier") == (2, 1)
    assert table4_counts(ZKP2, "prover", 8) == (8, 0)
    assert table4_counts(ZKP3, "mutual") == (3, 1)
