"""Running one protocol session over a byte stream.

Both ends first send a hello (version, protocol id, curve id) and check the
peer's. After that messages follow the protocol tables; a RESULT message
may arrive early from a verifier that has already rejected.
"""

from __future__ import annotations

import socket
from typing import Callable

from .curve import Curve
from .protocols import (
    ZKP1,
    ZKP2,
    ZKP3,
    CompromisePool,
    Identity,
    Session,
    Zkp1Prover,
    Zkp1Verifier,
    Zkp2Prover,
    Zkp2Verifier,
    Zkp3Party,
)
from .wire import (
    DecodeError,
    Message,
    MsgType,
    PROTOCOL_NAMES,
    encode_hello,
    encode_message,
    read_hello,
    read_message,
)


class TransportError(ConnectionError):
    pass


class PeerMismatchError(RuntimeError):
    """The peer announced another protocol or curve."""


class UnexpectedMessageError(DecodeError):
    pass


class Channel:
    """Blocking framed I/O on a connected socket."""

    def __init__(self, sock: socket.socket, curve: Curve, protocol: int, timeout: float | None = 30.0):
        self.sock = sock
        self.curve = curve
        self.protocol = protocol
        sock.settimeout(timeout)

    def read_exact(self, n: int) -> bytes:
        buf = bytearray()
        while len(buf) < n:
            try:
                chunk = self.sock.recv(n - len(buf))
            except OSError as exc:
                raise TransportError(str(exc)) from exc
            if not chunk:
                raise TransportError(f"connection closed after {len(buf)} of {n} octets")
            buf += chunk
        return bytes(buf)

    def _send(self, data: bytes) -> None:
        try:
            self.sock.sendall(data)
        except OSError as exc:
            raise TransportError(str(exc)) from exc

    def hello(self) -> None:
        self._send(encode_hello(self.protocol, self.curve.name))
        protocol, curve = read_hello(self.read_exact)
        if protocol != self.protocol or curve != self.curve.name:
            raise PeerMismatchError(
                f"peer runs {PROTOCOL_NAMES[protocol]} on {curve}, "
                f"we run {PROTOCOL_NAMES[self.protocol]} on {self.curve.name}"
            )

    def send(self, kind: MsgType, value) -> None:
        self._send(encode_message(Message(self.protocol, kind, value), self.curve))

    def recv(self) -> Message:
        msg = read_message(self.read_exact, self.curve)
        if msg.protocol != self.protocol:
            raise UnexpectedMessageError(f"message for protocol {msg.protocol}")
        return msg

    def send_result(self, ok: bool) -> None:
        # best effort: the peer may already be gone
        try:
            self.send(MsgType.RESULT, ok)
        except TransportError:
            pass


def _expect(msg: Message, kind: MsgType):
    if msg.kind != kind:
        raise UnexpectedMessageError(f"expected {kind.name}, got {msg.kind.name}")
    return msg.value


def _recv_or_verdict(chan: Channel, kind: MsgType, session: Session):
    """Next message of ``kind``, or None if the peer sent its verdict early."""
    msg = chan.recv()
    if msg.kind == MsgType.RESULT:
        session.abort()
        return None
    return _expect(msg, kind)


def _guarded(chan: Channel, session: Session, body: Callable[[], None]) -> Session:
    """Run ``body``; on decode problems tell the peer we reject, then re-raise."""
    try:
        body()
    except DecodeError:
        session.abort()
        chan.send_result(False)
        raise
    except TransportError:
        session.abort()
        raise
    return session


def run_prover(chan: Channel, identity: Identity, pool: CompromisePool | None = None, rng=None,
               hash_name: str = "sha3-256", on_commit: Callable[[], None] | None = None) -> Session:
    """Prover side of ZKP1 or ZKP2. ``on_commit`` runs after a ZKP2 pool pair
    is consumed and before anything is sent (to persist the pool)."""
    if chan.protocol == ZKP1:
        session = Zkp1Prover(identity, hash_name)
    elif chan.protocol == ZKP2:
        if pool is None:
            raise ValueError("ZKP2 needs a compromise pool")
        session = Zkp2Prover(identity, pool, hash_name)
    else:
        raise ValueError("use run_mutual for ZKP3")

    def body():
        chan.hello()
        w = session.commit(rng)
        if on_commit is not None:
            on_commit()
        chan.send(MsgType.WITNESS, w)
        e = _recv_or_verdict(chan, MsgType.CHALLENGE, session)
        if e is None:
            return
        chan.send(MsgType.ANSWER, session.respond(e))
        session.conclude(_expect(chan.recv(), MsgType.RESULT))

    return _guarded(chan, session, body)


def run_verifier(chan: Channel, peer_public, rng=None, hash_name: str = "sha3-256") -> Session:
    curve = chan.curve
    if chan.protocol == ZKP1:
        session = Zkp1Verifier(curve, peer_public, hash_name, rng=rng)
    elif chan.protocol == ZKP2:
        session = Zkp2Verifier(curve, peer_public, hash_name)
    else:
        raise ValueError("use run_mutual for ZKP3")

    def body():
        chan.hello()
        w = _expect(chan.recv(), MsgType.WITNESS)
        if chan.protocol == ZKP1:
            e = session.challenge(w)
            if e is None:
                chan.send_result(False)
                return
        else:
            if not session.receive_witness(w):
                chan.send_result(False)
                return
            e = session.challenge(rng)
        chan.send(MsgType.CHALLENGE, e)
        ok = session.verify(_expect(chan.recv(), MsgType.ANSWER))
        chan.send_result(ok)

    return _guarded(chan, session, body)


def run_mutual(chan: Channel, identity: Identity, peer_public, rng=None,
               hash_name: str = "sha3-256") -> Zkp3Party:
    if chan.protocol != ZKP3:
        raise ValueError("mutual mode is ZKP3 only")
    session = Zkp3Party(identity, peer_public, hash_name)

    def body():
        chan.hello()
        chan.send(MsgType.WITNESS, session.commit(rng))
        w_peer = _recv_or_verdict(chan, MsgType.WITNESS, session)
        if w_peer is None:
            return
        if not session.receive_witness(w_peer):
            chan.send_result(False)
            return
        chan.send(MsgType.ANSWER, session.respond())
        y_peer = _recv_or_verdict(chan, MsgType.ANSWER, session)
        if y_peer is None:
            return
        ok = session.verify(y_peer)
        chan.send_result(ok)
        peer_ok = _expect(chan.recv(), MsgType.RESULT)
        session.conclude(ok and peer_ok)

    return _guarded(chan, session, body)


def parse_endpoint(s: str) -> tuple[str, int]:
    host, sep, port = s.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"endpoint must be HOST:PORT, got {s!r}")
    return host or "127.0.0.1", int(port)
