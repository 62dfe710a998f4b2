"""Prover/verifier state machines for the three single-round ZKPs.

ZKP1  one-way, challenge is a verifier-keyed hash of (G, PuId_A, w).
ZKP2  one-way, prover holds a precomputed pool of compromises and sends the
      hash of a point as its witness; random challenge.
ZKP3  symmetric mutual authentication; both sides derive the same challenge
      locally and use it as the seed of a shared session key.

Each session tracks its own cost counters. ``lambda_count``/``mu_count`` are
every scalar multiplication / hash actually performed; ``table4_lambda`` and
``table4_mu`` are the subset booked by the comparison table (ZKP3 leaves out
its two verification products and the key derivation hash, ZKP2's prover
books its offline precomputation).

Out-of-order calls raise :class:`ProtocolStateError` and leave the session
REJECTED. Bad message *contents* (off-curve points, wrong answer) are not
errors: the session moves to REJECTED and the call returns ``False``/``None``.
"""

from __future__ import annotations

import enum
import itertools
import random
import secrets
import threading
from dataclasses import dataclass
from typing import Callable

from .challenge import (
    DIGEST_LEN,
    ChallengeInput,
    Digest,
    SessionKey,
    derive_session_key,
    digest_to_scalar,
    hash_points,
)
from .curve import Curve, Point

ZKP1, ZKP2, ZKP3 = 1, 2, 3
VERIFIER_KEY_LEN = 16

_sysrand = secrets.SystemRandom()


class ProtocolStateError(RuntimeError):
    """A protocol step was invoked in the wrong state."""


class PoolExhaustedError(RuntimeError):
    """Every unordered pair of the compromise pool has been used."""


class State(enum.Enum):
    INIT = "init"
    WITNESS_SENT = "witness-sent"
    WITNESS_RECEIVED = "witness-received"
    CHALLENGED = "challenged"
    ANSWERED = "answered"
    VERIFIED = "verified"  # ZKP3: peer checked, waiting for peer's verdict
    ACCEPTED = "accepted"
    REJECTED = "rejected"


@dataclass
class CostCounter:
    lambda_count: int = 0
    mu_count: int = 0
    point_adds: int = 0
    offline_lambda: int = 0
    table4_lambda: int = 0
    table4_mu: int = 0


@dataclass(frozen=True)
class Identity:
    """A party's secret scalar and public point ``secret * G``."""

    curve: Curve
    secret: int
    public: Point

    @classmethod
    def from_secret(cls, curve: Curve, secret: int) -> Identity:
        if not 1 <= secret < curve.m:
            raise ValueError(f"secret must lie in [1, {curve.m - 1}]")
        return cls(curve, secret, curve.mul_g(secret))

    def check(self) -> Identity:
        if not 1 <= self.secret < self.curve.m:
            raise ValueError("secret out of range")
        if self.curve.mul_g(self.secret) != self.public:
            raise ValueError("public point does not match secret")
        return self

    def __repr__(self):
        # never print the secret
        return f"Identity({self.curve.name}, public={self.public!r})"


def _rand_scalar(rng, m: int, nonzero: bool = True) -> int:
    rng = rng or _sysrand
    return rng.randrange(1 if nonzero else 0, m)


def keygen(curve: Curve, rng: random.Random | None = None, secret: int | None = None) -> Identity:
    if secret is None:
        secret = _rand_scalar(rng, curve.m)
    return Identity.from_secret(curve, secret)


@dataclass
class Transcript:
    protocol: int
    witness: Point | Digest | None = None
    challenge: int | None = None
    answer: int | None = None
    # ZKP3 only: the other party's messages and the challenge digest
    peer_witness: Point | None = None
    peer_answer: int | None = None
    challenge_digest: Digest | None = None


class Session:
    protocol: int
    role: str

    def __init__(self, curve: Curve, hash_name: str = "sha3-256"):
        self.curve = curve
        self.hash_name = hash_name
        self.state = State.INIT
        self.cost = CostCounter()
        self.transcript = Transcript(self.protocol)

    # counted primitives

    def _mul(self, k: int, P: Point, table4: bool = True) -> Point:
        self.cost.lambda_count += 1
        if table4:
            self.cost.table4_lambda += 1
        return self.curve.scalar_mul(k, P)

    def _hash(self, inp: ChallengeInput, table4: bool = True) -> Digest:
        self.cost.mu_count += 1
        if table4:
            self.cost.table4_mu += 1
        return hash_points(inp, self.hash_name)

    def _add(self, P: Point, Q: Point) -> Point:
        self.cost.point_adds += 1
        return self.curve.add(P, Q)

    # state handling

    def _expect(self, *states: State) -> None:
        if self.state not in states:
            got = self.state
            self.state = State.REJECTED
            raise ProtocolStateError(
                f"{type(self).__name__}: expected {[s.value for s in states]}, in {got.value}"
            )

    def abort(self) -> None:
        """Give up on the session (peer vanished, transport error)."""
        self.state = State.REJECTED

    def _reject(self):
        self.state = State.REJECTED
        return None

    def _valid_point(self, P) -> bool:
        return isinstance(P, Point) and P.curve.name == self.curve.name and self.curve.in_subgroup(P)

    def _valid_scalar(self, v) -> bool:
        return isinstance(v, int) and 0 <= v < self.curve.m

    @property
    def accepted(self) -> bool:
        return self.state is State.ACCEPTED

    @property
    def finished(self) -> bool:
        return self.state in (State.ACCEPTED, State.REJECTED)


class _ProverMixin:
    def conclude(self, accepted: bool) -> bool:
        """Record the verifier's verdict."""
        self._expect(State.ANSWERED)
        self.state = State.ACCEPTED if accepted else State.REJECTED
        return self.accepted


# --------------------------------------------------------------------------
# ZKP1


def zkp1_challenge_input(curve: Curve, public: Point, w: Point, key: bytes) -> ChallengeInput:
    return ChallengeInput(b"ZKP1", (curve.G, public, w), key=key)


def zkp1_check(public: Point, w: Point, e: int, y: int) -> bool:
    """Uncounted verification equation y*G - e*PuId == w."""
    curve = public.curve
    return curve.mul_g(y) - curve.scalar_mul(e, public) == w


class Zkp1Prover(_ProverMixin, Session):
    protocol = ZKP1
    role = "prover"

    def __init__(self, identity: Identity, hash_name: str = "sha3-256"):
        super().__init__(identity.curve, hash_name)
        self.identity = identity
        self._nonce: int | None = None

    def commit(self, rng=None, nonce: int | None = None) -> Point:
        self._expect(State.INIT)
        x = _rand_scalar(rng, self.curve.m) if nonce is None else nonce % self.curve.m
        self._nonce = x
        w = self._mul(x, self.curve.G)
        self.transcript.witness = w
        self.state = State.WITNESS_SENT
        return w

    def respond(self, e: int) -> int:
        self._expect(State.WITNESS_SENT)
        if not self._valid_scalar(e):
            self._reject()
            raise ValueError(f"challenge {e!r} outside [0, m)")
        y = (self._nonce + self.identity.secret * e) % self.curve.m
        self._nonce = None
        self.transcript.challenge = e
        self.transcript.answer = y
        self.state = State.ANSWERED
        return y


class Zkp1Verifier(Session):
    """Verifier side of ZKP1.

    The challenge hash is keyed with a fresh random value held only by this
    verifier, so each session picks its own hash from a family and a
    recorded transcript cannot be replayed.
    """

    protocol = ZKP1
    role = "verifier"

    def __init__(self, curve: Curve, peer_public: Point, hash_name: str = "sha3-256",
                 rng=None, key: bytes | None = None):
        super().__init__(curve, hash_name)
        self.peer_public = peer_public
        if key is None:
            key = (rng or _sysrand).getrandbits(8 * VERIFIER_KEY_LEN).to_bytes(VERIFIER_KEY_LEN, "big")
        self.key = key

    def challenge(self, w: Point, e: int | None = None) -> int | None:
        """Receive the witness and return the challenge.

        Passing ``e`` bypasses the hash (honest-verifier audits only).
        Returns None and rejects if ``w`` is not a group element.
        """
        self._expect(State.INIT)
        if not self._valid_point(w):
            return self._reject()
        self.transcript.witness = w
        if e is None:
            d = self._hash(zkp1_challenge_input(self.curve, self.peer_public, w, self.key))
            e = digest_to_scalar(d, self.curve.m)
        self.transcript.challenge = e
        self.state = State.CHALLENGED
        return e

    def verify(self, y: int) -> bool:
        self._expect(State.CHALLENGED)
        self.transcript.answer = y
        if not self._valid_scalar(y):
            self._reject()
            return False
        lhs = self._mul(y, self.curve.G)
        rhs = self._mul(self.transcript.challenge, self.peer_public)
        ok = self._add(lhs, -rhs) == self.transcript.witness
        self.state = State.ACCEPTED if ok else State.REJECTED
        return ok


def simulate_transcript(public: Point, rng=None) -> Transcript:
    """Honest-verifier simulator: an accepting ZKP1 transcript built from
    the public point alone."""
    curve = public.curve
    e = _rand_scalar(rng, curve.m, nonzero=False)
    y = _rand_scalar(rng, curve.m, nonzero=False)
    w = curve.mul_g(y) - curve.scalar_mul(e, public)
    return Transcript(ZKP1, witness=w, challenge=e, answer=y)


# --------------------------------------------------------------------------
# ZKP2


class CompromisePool:
    """Offline-computed compromises (x_i, x_i*G) and the set of pairs
    already consumed. Pair indices are 0-based."""

    def __init__(self, curve: Curve, entries, used_pairs=(), offline_lambda: int = 0):
        if len(entries) < 2:
            raise ValueError("pool needs at least two entries")
        self.curve = curve
        self.entries: list[tuple[int, Point]] = list(entries)
        self.used_pairs: set[frozenset[int]] = {frozenset(p) for p in used_pairs}
        self.offline_lambda = offline_lambda
        self._lock = threading.Lock()

    @classmethod
    def precompute(cls, curve: Curve, n: int, rng=None, nonces=None) -> CompromisePool:
        if n < 2:
            raise ValueError("pool size must be at least 2")
        if nonces is None:
            nonces = [_rand_scalar(rng, curve.m) for _ in range(n)]
        elif len(nonces) != n:
            raise ValueError("need exactly n nonces")
        entries = [(x % curve.m, curve.mul_g(x)) for x in nonces]
        return cls(curve, entries, offline_lambda=n)

    def __len__(self):
        return len(self.entries)

    @property
    def capacity(self) -> int:
        n = len(self.entries)
        return n * (n - 1) // 2

    def remaining(self) -> int:
        return self.capacity - len(self.used_pairs)

    def check(self) -> CompromisePool:
        for x, X in self.entries:
            if self.curve.mul_g(x) != X:
                raise ValueError("pool entry point does not match its scalar")
        n = len(self.entries)
        for pair in self.used_pairs:
            if len(pair) != 2 or not all(0 <= i < n for i in pair):
                raise ValueError(f"bad used pair {sorted(pair)}")
        return self

    def take_pair(self, rng=None, pair: tuple[int, int] | None = None) -> tuple[int, int]:
        """Mark a fresh unordered pair {j, k}, j != k, as used and return it."""
        n = len(self.entries)
        with self._lock:
            if pair is not None:
                j, k = pair
                key = frozenset((j, k))
                if j == k or not (0 <= j < n and 0 <= k < n):
                    raise ValueError(f"invalid pair {pair}")
                if key in self.used_pairs:
                    raise PoolExhaustedError(f"pair {sorted(key)} already used")
            else:
                if self.remaining() <= 0:
                    raise PoolExhaustedError("compromise pool exhausted; re-provision")
                rng = rng or _sysrand
                for _ in range(64):
                    j, k = rng.sample(range(n), 2)
                    if frozenset((j, k)) not in self.used_pairs:
                        break
                else:
                    free = [p for p in itertools.combinations(range(n), 2)
                            if frozenset(p) not in self.used_pairs]
                    j, k = rng.choice(free)
                key = frozenset((j, k))
            self.used_pairs.add(key)
            return j, k


def zkp2_precompute(identity: Identity, n: int, rng=None, nonces=None) -> CompromisePool:
    return CompromisePool.precompute(identity.curve, n, rng, nonces)


def zkp2_witness_input(V: Point) -> ChallengeInput:
    return ChallengeInput(b"ZKP2-witness", (V,))


class Zkp2Prover(_ProverMixin, Session):
    protocol = ZKP2
    role = "prover"

    def __init__(self, identity: Identity, pool: CompromisePool, hash_name: str = "sha3-256"):
        super().__init__(identity.curve, hash_name)
        self.identity = identity
        self.pool = pool
        self.cost.offline_lambda = pool.offline_lambda
        self.cost.table4_lambda = pool.offline_lambda
        self.pair: tuple[int, int] | None = None
        self._sum: int | None = None

    def commit(self, rng=None, pair: tuple[int, int] | None = None) -> Digest:
        self._expect(State.INIT)
        try:
            j, k = self.pool.take_pair(rng, pair)
        except PoolExhaustedError:
            self.state = State.REJECTED
            raise
        (xj, Xj), (xk, Xk) = self.pool.entries[j], self.pool.entries[k]
        self.pair = (j, k)
        self._sum = (xj + xk) % self.curve.m
        V = self._add(Xj, Xk)
        w = self._hash(zkp2_witness_input(V), table4=False)
        self.transcript.witness = w
        self.state = State.WITNESS_SENT
        return w

    def respond(self, e: int) -> int:
        self._expect(State.WITNESS_SENT)
        if not self._valid_scalar(e):
            self._reject()
            raise ValueError(f"challenge {e!r} outside [0, m)")
        y = (self._sum - self.identity.secret * e) % self.curve.m
        self._sum = None
        self.transcript.challenge = e
        self.transcript.answer = y
        self.state = State.ANSWERED
        return y


class Zkp2Verifier(Session):
    protocol = ZKP2
    role = "verifier"

    def __init__(self, curve: Curve, peer_public: Point, hash_name: str = "sha3-256"):
        super().__init__(curve, hash_name)
        self.peer_public = peer_public

    def receive_witness(self, w: Digest) -> bool:
        self._expect(State.INIT)
        if not isinstance(w, (bytes, bytearray)) or len(w) != DIGEST_LEN:
            self._reject()
            return False
        self.transcript.witness = bytes(w)
        self.state = State.WITNESS_RECEIVED
        return True

    def challenge(self, rng=None, e: int | None = None) -> int:
        self._expect(State.WITNESS_RECEIVED)
        if e is None:
            e = _rand_scalar(rng, self.curve.m, nonzero=False)
        self.transcript.challenge = e
        self.state = State.CHALLENGED
        return e

    def verify(self, y: int) -> bool:
        self._expect(State.CHALLENGED)
        self.transcript.answer = y
        if not self._valid_scalar(y):
            self._reject()
            return False
        V = self._add(self._mul(y, self.curve.G),
                      self._mul(self.transcript.challenge, self.peer_public))
        ok = self._hash(zkp2_witness_input(V)) == self.transcript.witness
        self.state = State.ACCEPTED if ok else State.REJECTED
        return ok


# --------------------------------------------------------------------------
# ZKP3


def zkp3_challenge_input(curve: Curve, long_term: Point, ephemeral: Point) -> ChallengeInput:
    return ChallengeInput(b"ZKP3", (curve.G, long_term, ephemeral))


class Zkp3Party(Session):
    """One side of the mutual protocol; both sides run the same code.

    Flow: commit -> receive_witness -> respond -> verify -> conclude.
    A party is ACCEPTED only after its own check of the peer succeeded and
    the peer reported success too, so any tampering rejects both ends.
    """

    protocol = ZKP3
    role = "mutual"

    def __init__(self, identity: Identity, peer_public: Point, hash_name: str = "sha3-256"):
        super().__init__(identity.curve, hash_name)
        self.identity = identity
        self.peer_public = peer_public
        self._nonce: int | None = None
        self._key: SessionKey | None = None

    def commit(self, rng=None, nonce: int | None = None) -> Point:
        self._expect(State.INIT)
        x = _rand_scalar(rng, self.curve.m) if nonce is None else nonce % self.curve.m
        self._nonce = x
        w = self._mul(x, self.curve.G)
        self.transcript.witness = w
        self.state = State.WITNESS_SENT
        return w

    def receive_witness(self, w_peer: Point) -> bool:
        """Take the peer's witness and derive the shared challenge."""
        self._expect(State.WITNESS_SENT)
        if not self._valid_point(w_peer):
            self._reject()
            return False
        self.transcript.peer_witness = w_peer
        long_term = self._mul(self.identity.secret, self.peer_public)
        ephemeral = self._mul(self._nonce, w_peer)
        d = self._hash(zkp3_challenge_input(self.curve, long_term, ephemeral))
        self.transcript.challenge_digest = d
        self.transcript.challenge = digest_to_scalar(d, self.curve.m)
        self.state = State.CHALLENGED
        return True

    def respond(self) -> int:
        self._expect(State.CHALLENGED)
        y = (self._nonce + self.identity.secret * self.transcript.challenge) % self.curve.m
        self._nonce = None
        self.transcript.answer = y
        self.state = State.ANSWERED
        return y

    def verify(self, y_peer: int) -> bool:
        self._expect(State.ANSWERED)
        self.transcript.peer_answer = y_peer
        if not self._valid_scalar(y_peer):
            self._reject()
            return False
        lhs = self._mul(y_peer, self.curve.G, table4=False)
        rhs = self._mul(self.transcript.challenge, self.peer_public, table4=False)
        if self._add(lhs, -rhs) != self.transcript.peer_witness:
            self._reject()
            return False
        self.state = State.VERIFIED
        return True

    def conclude(self, peer_accepted: bool) -> bool:
        if self.state is State.REJECTED:
            return False
        self._expect(State.VERIFIED)
        if not peer_accepted:
            self._reject()
            return False
        self.cost.mu_count += 1  # key derivation, outside the table's count
        self._key = derive_session_key(self.transcript.challenge_digest)
        self.state = State.ACCEPTED
        return True

    @property
    def session_key(self) -> SessionKey:
        if self._key is None:
            raise ProtocolStateError("no session key: session not accepted")
        return self._key


# --------------------------------------------------------------------------
# In-process runners. ``tamper(name, value)`` sees every message in flight
# and may replace it.

Tamper = Callable[[str, object], object]


def _pass(_name, value):
    return value


def run_zkp1(identity: Identity, rng_p=None, rng_v=None, *, nonce=None,
             hash_name="sha3-256", tamper: Tamper = _pass, verifier_public=None):
    p = Zkp1Prover(identity, hash_name)
    v = Zkp1Verifier(identity.curve, verifier_public or identity.public, hash_name, rng=rng_v)
    w = tamper("witness", p.commit(rng_p, nonce))
    e = v.challenge(w)
    if e is None:
        p.state = State.REJECTED
        return p, v
    y = p.respond(tamper("challenge", e))
    ok = v.verify(tamper("answer", y))
    p.conclude(ok)
    return p, v


def run_zkp2(identity: Identity, pool: CompromisePool, rng_p=None, rng_v=None, *,
             pair=None, e=None, hash_name="sha3-256", tamper: Tamper = _pass):
    p = Zkp2Prover(identity, pool, hash_name)
    v = Zkp2Verifier(identity.curve, identity.public, hash_name)
    w = tamper("witness", p.commit(rng_p, pair))
    if not v.receive_witness(w):
        p.state = State.REJECTED
        return p, v
    e = v.challenge(rng_v, e)
    y = p.respond(tamper("challenge", e))
    ok = v.verify(tamper("answer", y))
    p.conclude(ok)
    return p, v


def run_zkp3(id_a: Identity, id_b: Identity, rng_a=None, rng_b=None, *,
             nonce_a=None, nonce_b=None, hash_name="sha3-256", tamper: Tamper = _pass):
    a = Zkp3Party(id_a, id_b.public, hash_name)
    b = Zkp3Party(id_b, id_a.public, hash_name)
    w_a = tamper("w_a", a.commit(rng_a, nonce_a))
    w_b = tamper("w_b", b.commit(rng_b, nonce_b))
    ok_a = a.receive_witness(w_b)
    ok_b = b.receive_witness(w_a)
    y_a = tamper("y_a", a.respond()) if ok_a else None
    y_b = tamper("y_b", b.respond()) if ok_b else None
    for party, y_peer in ((a, y_b), (b, y_a)):
        if party.state is State.ANSWERED:
            if y_peer is None:
                party.abort()
            else:
                party.verify(y_peer)
    ok_a = a.state is State.VERIFIED
    ok_b = b.state is State.VERIFIED
    a.conclude(ok_b)
    b.conclude(ok_a)
    return a, b


def zkp3_run(id_a: Identity, id_b: Identity, rng_a=None, rng_b=None, **kw):
    """Returns (accept_A, accept_B, key_A, key_B); keys are None on reject."""
    a, b = run_zkp3(id_a, id_b, rng_a, rng_b, **kw)
    key_a = a.session_key if a.accepted else None
    key_b = b.session_key if b.accepted else None
    return a.accepted, b.accepted, key_a, key_b
