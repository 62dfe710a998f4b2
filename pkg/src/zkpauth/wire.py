"""Wire format and cost accounting.

Stream layout (each direction)::

    hello:   0x01 (version) | protocol id | len(curve id) | curve id (ascii)
    message: protocol id | message type | payload length (2 octets, BE) | payload

Payloads: points use the uncompressed curve encoding, scalars are fixed
width big-endian ``ceil(bits(m)/8)`` octets, digests are raw 32 octets, a
result is one octet (1 accept, 0 reject).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Callable

from .challenge import DIGEST_LEN
from .curve import Curve, Point, PointDecodeError, decode_point, encode_point
from .protocols import ZKP1, ZKP2, ZKP3, VERIFIER_KEY_LEN, Session, State

VERSION = 0x01
HEADER_LEN = 4
PROTOCOL_NAMES = {ZKP1: "ZKP1", ZKP2: "ZKP2", ZKP3: "ZKP3"}


class MsgType(enum.IntEnum):
    WITNESS = 1
    CHALLENGE = 2
    ANSWER = 3
    RESULT = 4


class DecodeError(ValueError):
    pass


class TruncatedError(DecodeError):
    pass


class UnknownIdError(DecodeError):
    pass


class BadLengthError(DecodeError):
    pass


class BadPointError(DecodeError):
    pass


class ScalarRangeError(DecodeError):
    pass


class VersionError(DecodeError):
    pass


# payload kind for every legal (protocol, type) combination
_KINDS = {
    (ZKP1, MsgType.WITNESS): "point",
    (ZKP1, MsgType.CHALLENGE): "scalar",
    (ZKP1, MsgType.ANSWER): "scalar",
    (ZKP1, MsgType.RESULT): "result",
    (ZKP2, MsgType.WITNESS): "digest",
    (ZKP2, MsgType.CHALLENGE): "scalar",
    (ZKP2, MsgType.ANSWER): "scalar",
    (ZKP2, MsgType.RESULT): "result",
    # ZKP3 challenges are computed locally, never sent
    (ZKP3, MsgType.WITNESS): "point",
    (ZKP3, MsgType.ANSWER): "scalar",
    (ZKP3, MsgType.RESULT): "result",
}


@dataclass(frozen=True)
class Message:
    protocol: int
    kind: MsgType
    value: Point | bytes | int | bool


def _payload(msg: Message, curve: Curve) -> bytes:
    try:
        kind = _KINDS[(msg.protocol, MsgType(msg.kind))]
    except (KeyError, ValueError):
        raise UnknownIdError(f"no message type {msg.kind} for protocol {msg.protocol}") from None
    v = msg.value
    if kind == "point":
        if not isinstance(v, Point) or not curve.is_on_curve(v):
            raise ValueError("witness must be a point on the curve")
        return encode_point(v)
    if kind == "scalar":
        if isinstance(v, bool) or not isinstance(v, int) or not 0 <= v < curve.m:
            raise ValueError(f"scalar {v!r} outside [0, m)")
        return v.to_bytes(curve.scalar_len, "big")
    if kind == "digest":
        if not isinstance(v, (bytes, bytearray)) or len(v) != DIGEST_LEN:
            raise ValueError("digest must be 32 octets")
        return bytes(v)
    return b"\x01" if v else b"\x00"


def encode_message(msg: Message, curve: Curve) -> bytes:
    payload = _payload(msg, curve)
    return bytes([msg.protocol, msg.kind]) + len(payload).to_bytes(2, "big") + payload


def _decode_payload(protocol: int, kind: MsgType, payload: bytes, curve: Curve):
    what = _KINDS[(protocol, kind)]
    if what == "point":
        try:
            return decode_point(payload, curve)
        except PointDecodeError as exc:
            raise BadPointError(str(exc)) from None
    if what == "scalar":
        if len(payload) != curve.scalar_len:
            raise BadLengthError(f"scalar of {len(payload)} octets, want {curve.scalar_len}")
        v = int.from_bytes(payload, "big")
        if v >= curve.m:
            raise ScalarRangeError("scalar not reduced mod m")
        return v
    if what == "digest":
        if len(payload) != DIGEST_LEN:
            raise BadLengthError(f"digest of {len(payload)} octets")
        return payload
    if payload not in (b"\x00", b"\x01"):
        raise BadLengthError("result payload must be a single 0x00/0x01 octet")
    return payload == b"\x01"


def _parse_header(header: bytes) -> tuple[int, MsgType, int]:
    protocol, kind, length = header[0], header[1], int.from_bytes(header[2:4], "big")
    if protocol not in PROTOCOL_NAMES:
        raise UnknownIdError(f"unknown protocol id {protocol}")
    try:
        kind = MsgType(kind)
    except ValueError:
        raise UnknownIdError(f"unknown message type {kind}") from None
    if (protocol, kind) not in _KINDS:
        raise UnknownIdError(f"message type {kind.name} not used by protocol {protocol}")
    return protocol, kind, length


def decode_message(data: bytes, curve: Curve) -> Message:
    """Decode exactly one framed message; trailing bytes are an error."""
    if len(data) < HEADER_LEN:
        raise TruncatedError("short header")
    protocol, kind, length = _parse_header(data[:HEADER_LEN])
    payload = data[HEADER_LEN:]
    if len(payload) < length:
        raise TruncatedError(f"payload has {len(payload)} of {length} octets")
    if len(payload) > length:
        raise BadLengthError("trailing octets after message")
    return Message(protocol, kind, _decode_payload(protocol, kind, payload, curve))


def encode_hello(protocol: int, curve_name: str) -> bytes:
    name = curve_name.encode("ascii")
    return bytes([VERSION, protocol, len(name)]) + name


def read_hello(read_exact: Callable[[int], bytes]) -> tuple[int, str]:
    head = read_exact(3)
    if head[0] != VERSION:
        raise VersionError(f"unsupported wire version {head[0]}")
    if head[1] not in PROTOCOL_NAMES:
        raise UnknownIdError(f"unknown protocol id {head[1]}")
    name = read_exact(head[2])
    try:
        return head[1], name.decode("ascii")
    except UnicodeDecodeError:
        raise DecodeError("curve id is not ascii") from None


def read_message(read_exact: Callable[[int], bytes], curve: Curve) -> Message:
    header = read_exact(HEADER_LEN)
    protocol, kind, length = _parse_header(header)
    return Message(protocol, kind, _decode_payload(protocol, kind, read_exact(length), curve))


# --------------------------------------------------------------------------
# Cost accounting

# Published comparison figures for P-192 / SHA-3 (bits and operation counts).
# Memory for ZKP2 depends on the pool size n.
PUBLISHED_COSTS = {
    (ZKP1, "prover"): {"bandwidth": 1728, "memory": lambda n: 384, "lambda": 1, "mu": 0},
    (ZKP1, "verifier"): {"bandwidth": 128, "memory": None, "lambda": 2, "mu": 1},
    (ZKP2, "prover"): {"bandwidth": 320, "memory": lambda n: n * 1536 + 192, "lambda": None, "mu": 0},
    (ZKP2, "verifier"): {"bandwidth": 192, "memory": None, "lambda": 2, "mu": 1},
    (ZKP3, "mutual"): {"bandwidth": 1728, "memory": lambda n: 384, "lambda": 3, "mu": 1},
}


def table4_counts(protocol: int, role: str, n: int = 0) -> tuple[int, int]:
    """Symbolic (lambda, mu) from the comparison table; ZKP2's prover is n*lambda."""
    row = PUBLISHED_COSTS[(protocol, role)]
    lam = n if row["lambda"] is None else row["lambda"]
    return lam, row["mu"]


@dataclass
class CostReport:
    protocol: int
    curve: str
    role: str
    lambda_count: int
    mu_count: int
    point_adds: int
    offline_lambda: int
    transferred_bits: int
    received_bits: int
    stored_secret_bits: int
    table4_lambda: int
    table4_mu: int
    pool_size: int = 0

    @property
    def session_bits(self) -> int:
        return self.transferred_bits + self.received_bits

    def published_figures(self) -> dict:
        row = PUBLISHED_COSTS.get((self.protocol, self.role))
        if row is None:
            return {}
        mem = row["memory"]
        return {
            "published_transferred_bits": row["bandwidth"],
            "published_stored_secret_bits": mem(self.pool_size) if mem else None,
        }

    def as_record(self) -> dict:
        rec = {
            "protocol": PROTOCOL_NAMES[self.protocol],
            "curve": self.curve,
            "role": self.role,
            "lambda": self.lambda_count,
            "mu": self.mu_count,
            "point_adds": self.point_adds,
            "transferred_bits": self.transferred_bits,
            "stored_secret_bits": self.stored_secret_bits,
            "table4_lambda": self.table4_lambda,
            "table4_mu": self.table4_mu,
            "offline_lambda": self.offline_lambda,
            "session_bits": self.session_bits,
        }
        if self.pool_size:
            rec["pool_size"] = self.pool_size
        if self.curve == "p192":
            published = self.published_figures()
            rec.update(published)
            rec["bandwidth_discrepancy"] = published.get("published_transferred_bits") != self.transferred_bits
            pm = published.get("published_stored_secret_bits")
            rec["memory_discrepancy"] = pm is not None and pm != self.stored_secret_bits
        return rec

    def to_json(self) -> str:
        return json.dumps(self.as_record(), sort_keys=False)


class IncompleteSessionError(RuntimeError):
    pass


def _sizes(curve: Curve) -> dict[str, int]:
    return {
        "point": 8 * (1 + 2 * curve.coord_len),
        "inf": 8,
        "scalar": 8 * curve.scalar_len,
        "digest": 8 * DIGEST_LEN,
        "result": 8,
    }


def _point_bits(P: Point, sz) -> int:
    return sz["inf"] if P.is_infinity else sz["point"]


def measure_session(session: Session, include_framing: bool = False) -> CostReport:
    """Bits and operation counts for one finished session, from the point of
    view of ``session``'s party.

    By default only payload bits of the protocol messages are counted.
    With ``include_framing`` every message also pays its 4-octet header and
    the verdict messages are counted.
    """
    if session.state not in (State.ACCEPTED, State.REJECTED):
        raise IncompleteSessionError(f"session is {session.state.value}")
    t = session.transcript
    curve = session.curve
    sz = _sizes(curve)
    sent: list[int] = []
    recv: list[int] = []

    def wit_bits(w):
        return sz["digest"] if isinstance(w, (bytes, bytearray)) else _point_bits(w, sz)

    if session.protocol in (ZKP1, ZKP2):
        wit = [wit_bits(t.witness)] if t.witness is not None else []
        chal = [sz["scalar"]] if t.challenge is not None else []
        ans = [sz["scalar"]] if t.answer is not None else []
        if session.role == "prover":
            sent, recv = wit + ans, chal
        else:
            sent, recv = chal, wit + ans
    else:
        if t.witness is not None:
            sent.append(wit_bits(t.witness))
        if t.answer is not None:
            sent.append(sz["scalar"])
        if t.peer_witness is not None:
            recv.append(wit_bits(t.peer_witness))
        if t.peer_answer is not None:
            recv.append(sz["scalar"])

    if include_framing:
        sent = [b + 8 * HEADER_LEN for b in sent]
        recv = [b + 8 * HEADER_LEN for b in recv]
        verdict = sz["result"] + 8 * HEADER_LEN
        if session.role in ("verifier", "mutual"):
            sent.append(verdict)
        if session.role in ("prover", "mutual"):
            recv.append(verdict)

    pool_size = 0
    if session.protocol == ZKP2 and session.role == "prover":
        pool_size = len(session.pool)
        stored = pool_size * (sz["scalar"] + sz["point"]) + sz["scalar"]
    elif session.role in ("prover", "mutual"):
        stored = 2 * sz["scalar"]  # long-term secret + compromise
    elif session.protocol == ZKP1:
        stored = 8 * VERIFIER_KEY_LEN  # the verifier's hash key
    else:
        stored = 0

    c = session.cost
    return CostReport(
        protocol=session.protocol,
        curve=curve.name,
        role=session.role,
        lambda_count=c.lambda_count,
        mu_count=c.mu_count,
        point_adds=c.point_adds,
        offline_lambda=c.offline_lambda,
        transferred_bits=sum(sent),
        received_bits=sum(recv),
        stored_secret_bits=stored,
        table4_lambda=c.table4_lambda,
        table4_mu=c.table4_mu,
        pool_size=pool_size,
    )


def compare_protocols(reports: list[CostReport]) -> dict:
    """Rank protocols by bits sent by the authenticating side(s) and by the
    per-party stored secret bits.

    Bandwidth of ZKP1/ZKP2 is the prover's; for ZKP3 both parties prove, so
    both parties' bits are summed.
    """
    curves = {r.curve for r in reports}
    if len(curves) != 1:
        raise ValueError(f"reports span several curves: {sorted(curves)}")
    bandwidth: dict[int, int] = {}
    memory: dict[int, int] = {}
    ops: dict[int, int] = {}
    for r in reports:
        if r.role not in ("prover", "mutual"):
            continue
        bandwidth[r.protocol] = bandwidth.get(r.protocol, 0) + r.transferred_bits
        memory[r.protocol] = max(memory.get(r.protocol, 0), r.stored_secret_bits)
        ops[r.protocol] = ops.get(r.protocol, 0) + r.table4_lambda + r.table4_mu
    for r in reports:
        if r.role == "verifier":
            ops[r.protocol] = ops.get(r.protocol, 0) + r.table4_lambda + r.table4_mu
    missing = {ZKP1, ZKP2, ZKP3} - set(bandwidth)
    if missing:
        raise ValueError(f"missing reports for {sorted(PROTOCOL_NAMES[p] for p in missing)}")

    def order(d):
        return [PROTOCOL_NAMES[p] for p, _ in sorted(d.items(), key=lambda kv: (kv[1], kv[0]))]

    return {
        "curve": curves.pop(),
        "bandwidth": {PROTOCOL_NAMES[p]: v for p, v in sorted(bandwidth.items())},
        "bandwidth_order": order(bandwidth),
        "memory": {PROTOCOL_NAMES[p]: v for p, v in sorted(memory.items())},
        "memory_order": order(memory),
        "zkp2_min_bandwidth": bandwidth[ZKP2] < min(bandwidth[ZKP1], bandwidth[ZKP3]),
        "zkp2_max_memory": memory[ZKP2] > max(memory[ZKP1], memory[ZKP3]),
        # reported only; no threshold is asserted
        "zkp3_over_zkp1_ops": ops[ZKP3] / ops[ZKP1] if ops.get(ZKP1) else None,
    }
