"""Hash-to-scalar challenges and ZKP3 session keys.

The hash input for a list of points is::

    len(tag) (1 octet) || tag || len(key) (1 octet) || key
        || count (2 octets, big-endian) || enc(P1) || enc(P2) || ...

``key`` is empty except for the verifier-keyed ZKP1 challenge.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .curve import ParameterError, Point, encode_point

DIGEST_LEN = 32
SESSION_KEY_LEN = 32
TOY_MODULUS = 256

Digest = bytes
SessionKey = bytes


def sha3_256(data: bytes) -> Digest:
    return hashlib.sha3_256(data).digest()


def toy_hash(data: bytes) -> Digest:
    """SHA3-256 collapsed to TOY_MODULUS values, padded to DIGEST_LEN.

    Small enough that every digest value can be enumerated; used only by the
    audit harness.
    """
    v = int.from_bytes(sha3_256(data), "big") % TOY_MODULUS
    return v.to_bytes(DIGEST_LEN, "big")


HASHES: dict[str, Callable[[bytes], Digest]] = {
    "sha3-256": sha3_256,
    "toy": toy_hash,
}


def get_hash(name: str) -> Callable[[bytes], Digest]:
    try:
        return HASHES[name]
    except KeyError:
        raise ParameterError(f"unknown hash {name!r}; known: {sorted(HASHES)}") from None


@dataclass(frozen=True)
class ChallengeInput:
    domain_tag: bytes
    points: Sequence[Point]
    key: bytes = field(default=b"")

    def __post_init__(self):
        if not self.points:
            raise ParameterError("challenge input needs at least one point")
        if len(self.domain_tag) > 255 or len(self.key) > 255:
            raise ParameterError("domain tag and key are limited to 255 octets")
        names = {P.curve.name for P in self.points}
        if len(names) > 1:
            raise ParameterError(f"points from different curves: {sorted(names)}")

    def encode(self) -> bytes:
        parts = [
            bytes([len(self.domain_tag)]),
            self.domain_tag,
            bytes([len(self.key)]),
            self.key,
            len(self.points).to_bytes(2, "big"),
        ]
        parts.extend(encode_point(P) for P in self.points)
        return b"".join(parts)


def hash_points(inp: ChallengeInput, hash_name: str = "sha3-256") -> Digest:
    return get_hash(hash_name)(inp.encode())


def digest_to_scalar(d: Digest, m: int) -> int:
    if m < 2:
        raise ParameterError("modulus must be at least 2")
    return int.from_bytes(d, "big") % m


def derive_session_key(e_digest: Digest) -> SessionKey:
    # Always full SHA3-256, even when challenges use the toy hash.
    return sha3_256(b"ZKP3-KDF" + e_digest)


def key_fingerprint(key: SessionKey, length: int = 8) -> str:
    """Short hex tag for comparing keys out loud without revealing them."""
    return sha3_256(b"ZKP3-FPR" + key)[:length].hex()
