import hashlib
import math
import random

import pytest

from zkpauth.challenge import (
    DIGEST_LEN,
    TOY_MODULUS,
    ChallengeInput,
    derive_session_key,
    digest_to_scalar,
    get_hash,
    hash_points,
    key_fingerprint,
    sha3_256,
    toy_hash,
)
from zkpauth.curve import P192, TINY17, ParameterError, Point


def test_sha3_vectors():
    # FIPS 202 reference digests
    assert sha3_256(b"").hex() == "a7ffc6f8bf1ed76651c14756a061d662f580ff4de43b49fa82d80a4b80f8434a"
    assert sha3_256(b"abc").hex() == "3a985da74fe225b2045c172d6bd390bd855f086e3e9d525b46bfe24511431532"


def test_toy_hash_range():
    for i in range(200):
        d = toy_hash(i.to_bytes(2, "big"))
        assert len(d) == DIGEST_LEN
        assert int.from_bytes(d, "big") < TOY_MODULUS
        assert int.from_bytes(d, "big") == sha3_256(i.to_bytes(2, "big"))[-1]


def test_unknown_hash():
    with pytest.raises(ParameterError):
        get_hash("md5")


def test_encoding_layout(tiny):
    inp = ChallengeInput(b"T", (tiny.G, Point(6, 3, tiny)), key=b"\xaa\xbb")
    assert inp.encode() == bytes.fromhex("01" "54" "02" "aabb" "0002" "040501" "040603")
    assert hash_points(inp) == hashlib.sha3_256(inp.encode()).digest()


def test_deterministic_and_order_sensitive(tiny):
    P, Q = tiny.G, Point(6, 3, tiny)
    assert hash_points(ChallengeInput(b"x", (P, Q))) == hash_points(ChallengeInput(b"x", (P, Q)))
    assert hash_points(ChallengeInput(b"x", (P, Q))) != hash_points(ChallengeInput(b"x", (Q, P)))


def test_domain_and_key_separation(tiny):
    pts = (tiny.G,)
    digests = {
        hash_points(ChallengeInput(b"ZKP1", pts)),
        hash_points(ChallengeInput(b"ZKP3", pts)),
        hash_points(ChallengeInput(b"ZKP1", pts, key=b"k")),
        hash_points(ChallengeInput(b"ZKP1", pts, key=b"j")),
    }
    assert len(digests) == 4


def test_tag_key_boundary_unambiguous(tiny):
    # moving an octet between tag and key must change the encoding
    a = ChallengeInput(b"ab", (tiny.G,), key=b"c")
    b = ChallengeInput(b"a", (tiny.G,), key=b"bc")
    assert a.encode() != b.encode()


def test_input_validation(tiny):
    with pytest.raises(ParameterError):
        ChallengeInput(b"x", ())
    with pytest.raises(ParameterError):
        ChallengeInput(b"x" * 256, (tiny.G,))
    with pytest.raises(ParameterError):
        ChallengeInput(b"x", (tiny.G,), key=b"k" * 256)
    with pytest.raises(ParameterError):
        ChallengeInput(b"x", (tiny.G, P192.G))


def test_digest_to_scalar():
    assert digest_to_scalar((40).to_bytes(32, "big"), 19) == 2
    assert digest_to_scalar(b"\xff" * 32, 19) == (2**256 - 1) % 19
    with pytest.raises(ParameterError):
        digest_to_scalar(b"\x00" * 32, 1)


def test_residue_distribution():
    n, m = 19_000, 19
    counts = [0] * m
    for i in range(n):
        counts[digest_to_scalar(sha3_256(i.to_bytes(4, "big")), m)] += 1
    mean = n / m
    sigma = math.sqrt(n * (1 / m) * (1 - 1 / m))
    assert all(abs(c - mean) <= 5 * sigma for c in counts)


def test_p192_challenges_spread():
    rng = random.Random(3)
    vals = {digest_to_scalar(sha3_256(rng.randbytes(16)), P192.m) for _ in range(1000)}
    assert len(vals) == 1000


def test_session_key_derivation():
    d = bytes(range(32))
    k = derive_session_key(d)
    assert len(k) == 32
    assert k == derive_session_key(d)
    assert k == hashlib.sha3_256(b"ZKP3-KDF" + d).digest()
    assert derive_session_key(bytes([1]) + d[1:]) != k
    assert len(key_fingerprint(k)) == 16
    assert key_fingerprint(k) != k[:8].hex()


def test_toy_hash_selectable(tiny):
    inp = ChallengeInput(b"ZKP3", (tiny.G,))
    assert hash_points(inp, "toy") == toy_hash(inp.encode())
    assert TINY17.m < TOY_MODULUS
