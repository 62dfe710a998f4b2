"""Audits and the cost benchmark behind the ``audit`` and ``bench`` commands.

The tiny17 audits are exhaustive and exact (rational arithmetic, no
sampling). P-192 gets seeded sampled runs.
"""

from __future__ import annotations

import itertools
import json
import random
import time
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

from .challenge import (
    TOY_MODULUS,
    derive_session_key,
    hash_points,
)
from .curve import P192, TINY17, Curve, Point
from .protocols import (
    ZKP1,
    ZKP2,
    ZKP3,
    CompromisePool,
    Identity,
    Zkp1Prover,
    Zkp1Verifier,
    Zkp2Prover,
    Zkp2Verifier,
    keygen,
    run_zkp1,
    run_zkp2,
    run_zkp3,
    zkp2_witness_input,
    zkp3_challenge_input,
)
from .wire import (
    PROTOCOL_NAMES,
    CostReport,
    DecodeError,
    Message,
    MsgType,
    compare_protocols,
    decode_message,
    encode_message,
    measure_session,
    table4_counts,
)


@dataclass
class AuditResult:
    check: str
    params: dict
    verdict: bool
    measured: object
    expected: object
    runtime: float = 0.0
    details: dict = field(default_factory=dict)

    def as_record(self) -> dict:
        def conv(v):
            if isinstance(v, Fraction):
                return str(v)
            if isinstance(v, dict):
                return {str(k): conv(x) for k, x in v.items()}
            if isinstance(v, (list, tuple)):
                return [conv(x) for x in v]
            return v

        return {
            "check": self.check,
            "params": conv(self.params),
            "verdict": "pass" if self.verdict else "fail",
            "measured": conv(self.measured),
            "expected": conv(self.expected),
            "runtime_s": round(self.runtime, 3),
            "details": conv(self.details),
        }

    def to_json(self) -> str:
        return json.dumps(self.as_record())


class _Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def _multiples(curve: Curve) -> list[Point]:
    return curve.subgroup()


# --------------------------------------------------------------------------
# Soundness


def audit_soundness(curve: Curve = TINY17, protocol: int = ZKP1,
                    challenge_space=None, secrets=None) -> AuditResult:
    """Best win rate of a cheater that fixes its witness and answer before
    seeing the challenge.

    ZKP1: a strategy is (w, y); it wins on challenge e iff y*G - e*Q == w.
    ZKP2 (toy hash): a strategy is (digest, y); it wins iff
    toy(y*G + e*Q) == digest. Strategies range over every group element or
    toy digest and every answer; the challenge is uniform over
    ``challenge_space`` (default all of [0, m)).
    """
    with _Timer() as tm:
        m = curve.m
        space = list(range(m) if challenge_space is None else challenge_space)
        secrets = list(range(1, m) if secrets is None else secrets)
        mult = _multiples(curve)
        best = Fraction(0)
        honest_ok = True
        hash_bound = None
        if protocol == ZKP2:
            # For fixed y, e -> y*G + e*Q is a bijection onto <G>, so the best
            # strategy wins once per preimage of its digest.
            toy = Counter(hash_points(zkp2_witness_input(P), "toy") for P in mult)
            hash_bound = Fraction(max(toy.values()), m)
        for a in secrets:
            wins: Counter = Counter()
            for y in range(m):
                yG = mult[y]
                for e in space:
                    if protocol == ZKP1:
                        wins[(yG - mult[e * a % m], y)] += 1
                    else:
                        V = yG + mult[e * a % m]
                        wins[(hash_points(zkp2_witness_input(V), "toy"), y)] += 1
            top = Fraction(max(wins.values()), len(space))
            best = max(best, top)
            # honest prover: every (x, e) verifies
            for x in range(1, m):
                for e in space:
                    if protocol == ZKP1:
                        honest_ok &= mult[(x + a * e) % m] - mult[e * a % m] == mult[x]
                    else:
                        honest_ok &= mult[(x - a * e) % m] + mult[e * a % m] == mult[x]
        if protocol == ZKP1:
            # at most one accepting challenge per strategy, and some strategy
            # always has one inside the space
            expected = Fraction(1, len(space))
        else:
            expected = hash_bound if challenge_space is None else None
        verdict = honest_ok and (expected is None or best == expected)
    return AuditResult(
        check=f"soundness-{PROTOCOL_NAMES[protocol]}",
        params={"curve": curve.name, "challenge_space": len(space), "secrets": len(secrets),
                "hash": "toy" if protocol == ZKP2 else None},
        verdict=verdict,
        measured=best,
        expected=expected,
        runtime=tm.elapsed,
        details={"honest_win_rate": Fraction(1) if honest_ok else "below 1",
                 "toy_hash_bound": hash_bound, "toy_modulus": TOY_MODULUS if protocol == ZKP2 else None},
    )


# --------------------------------------------------------------------------
# Zero knowledge


def _tv_distance(p: Counter, q: Counter) -> Fraction:
    n_p, n_q = sum(p.values()), sum(q.values())
    keys = set(p) | set(q)
    return sum((abs(Fraction(p[k], n_p) - Fraction(q[k], n_q)) for k in keys), Fraction(0)) / 2


def audit_zero_knowledge(curve: Curve = TINY17, secrets=None) -> AuditResult:
    """Exhaustive real vs simulated ZKP1 transcripts, challenge uniform and
    external (honest-verifier model)."""
    with _Timer() as tm:
        m = curve.m
        mult = _multiples(curve)
        secrets = list(range(1, m) if secrets is None else secrets)
        worst = Fraction(0)
        uniform_w = True
        sims_verify = True
        for a in secrets:
            Q = mult[a]
            real = Counter((mult[x], e, (x + a * e) % m) for x in range(m) for e in range(m))
            sim = Counter()
            for y in range(m):
                for e in range(m):
                    w = mult[y] - curve.scalar_mul(e, Q)
                    sim[(w, e, y)] += 1
                    v = Zkp1Verifier(curve, Q, key=b"")
                    v.challenge(w, e=e)
                    sims_verify &= v.verify(y)
            worst = max(worst, _tv_distance(real, sim))
            w_counts = Counter(w for (w, _e, _y), c in real.items() for _ in range(c))
            uniform_w &= len(w_counts) == m and set(w_counts.values()) == {m}
        verdict = worst == 0 and uniform_w and sims_verify
    return AuditResult(
        check="zero-knowledge-ZKP1",
        params={"curve": curve.name, "secrets": len(secrets), "cases_per_secret": m * m},
        verdict=verdict,
        measured=worst,
        expected=Fraction(0),
        runtime=tm.elapsed,
        details={"witness_uniform": uniform_w, "simulated_all_verify": sims_verify},
    )


# --------------------------------------------------------------------------
# Forward secrecy surrogate

# name -> (build candidate point from public data + long-term secrets,
#          its discrete log as a function of (a, b, xa, xb) mod m)
_CANDIDATES = {
    "a*w_B": (lambda c, a, b, wa, wb: c.scalar_mul(a, wb), lambda a, b, xa, xb: a * xb),
    "b*w_A": (lambda c, a, b, wa, wb: c.scalar_mul(b, wa), lambda a, b, xa, xb: b * xa),
    "a*w_A": (lambda c, a, b, wa, wb: c.scalar_mul(a, wa), lambda a, b, xa, xb: a * xa),
    "b*w_B": (lambda c, a, b, wa, wb: c.scalar_mul(b, wb), lambda a, b, xa, xb: b * xb),
    "ab*G": (lambda c, a, b, wa, wb: c.mul_g(a * b), lambda a, b, xa, xb: a * b),
    "w_A+w_B": (lambda c, a, b, wa, wb: wa + wb, lambda a, b, xa, xb: xa + xb),
    "w_A-w_B": (lambda c, a, b, wa, wb: wa - wb, lambda a, b, xa, xb: xa - xb),
    "ab*G+w_A": (lambda c, a, b, wa, wb: c.mul_g(a * b) + wa, lambda a, b, xa, xb: a * b + xa),
    "ab*G+w_B": (lambda c, a, b, wa, wb: c.mul_g(a * b) + wb, lambda a, b, xa, xb: a * b + xb),
    "ab*G-w_A": (lambda c, a, b, wa, wb: c.mul_g(a * b) - wa, lambda a, b, xa, xb: a * b - xa),
    "ab*G-w_B": (lambda c, a, b, wa, wb: c.mul_g(a * b) - wb, lambda a, b, xa, xb: a * b - xb),
    "a*w_B+b*w_A": (lambda c, a, b, wa, wb: c.scalar_mul(a, wb) + c.scalar_mul(b, wa),
                    lambda a, b, xa, xb: a * xb + b * xa),
}

DEFAULT_FS_PAIRS = ((2, 3), (5, 11), (7, 7), (18, 1))


def audit_forward_secrecy(curve: Curve = TINY17, identity_pairs=DEFAULT_FS_PAIRS) -> AuditResult:
    """An eavesdropper holding both long-term secrets and the transcript
    tries closed-form guesses for the ephemeral shared point.

    For each guess, the number of ephemeral pairs (x_A, x_B) on which the
    guessed session key equals the true one must equal the number of
    solutions of the guess's scalar congruence (the forced collisions).
    Also checks that session keys from real runs coincide exactly when the
    ephemeral products x_A*x_B coincide.
    """
    with _Timer() as tm:
        m = curve.m
        ok = True
        table = {}
        key_checks = {}
        for a, b in identity_pairs:
            id_a, id_b = Identity.from_secret(curve, a), Identity.from_secret(curve, b)
            abG = curve.mul_g(a * b)
            hits = Counter()
            forced = Counter()
            keys = {}
            for xa in range(1, m):
                for xb in range(1, m):
                    A, B = run_zkp3(id_a, id_b, nonce_a=xa, nonce_b=xb)
                    if not (A.accepted and B.accepted and A.session_key == B.session_key):
                        ok = False
                        continue
                    true_key = A.session_key
                    keys[(xa, xb)] = true_key
                    wa, wb = A.transcript.witness, B.transcript.witness
                    for name, (build, dlog) in _CANDIDATES.items():
                        guess = build(curve, a, b, wa, wb)
                        d = hash_points(zkp3_challenge_input(curve, abG, guess))
                        if derive_session_key(d) == true_key:
                            hits[name] += 1
                        if (dlog(a, b, xa, xb) - xa * xb) % m == 0:
                            forced[name] += 1
            for name in _CANDIDATES:
                table[(a, b, name)] = (hits[name], forced[name])
                ok &= hits[name] == forced[name]
            # keys coincide iff products coincide
            by_key = Counter(keys.values())
            by_prod = Counter((xa * xb) % m for xa, xb in keys)
            same_partition = all(
                (keys[p] == keys[q]) == ((p[0] * p[1] - q[0] * q[1]) % m == 0)
                for p, q in itertools.combinations(sorted(keys), 2)
            )
            collisions = sum(c * (c - 1) // 2 for c in by_key.values())
            forced_coll = sum(c * (c - 1) // 2 for c in by_prod.values())
            key_checks[(a, b)] = {"distinct_keys": len(by_key), "distinct_products": len(by_prod),
                                  "key_collisions": collisions, "forced_collisions": forced_coll}
            ok &= same_partition and collisions == forced_coll and len(by_key) == len(by_prod)
            # replaying the same ephemerals gives the same key
            _, _, k1, _ = _zkp3_keys(id_a, id_b, 4, 5)
            _, _, k2, _ = _zkp3_keys(id_a, id_b, 4, 5)
            ok &= k1 == k2
    return AuditResult(
        check="forward-secrecy-ZKP3",
        params={"curve": curve.name, "identity_pairs": [list(p) for p in identity_pairs],
                "candidates": list(_CANDIDATES)},
        verdict=ok,
        measured={f"{a},{b}:{n}": h for (a, b, n), (h, _f) in table.items()},
        expected={f"{a},{b}:{n}": f for (a, b, n), (_h, f) in table.items()},
        runtime=tm.elapsed,
        details={f"{a},{b}": v for (a, b), v in key_checks.items()},
    )


def _zkp3_keys(id_a, id_b, xa, xb):
    A, B = run_zkp3(id_a, id_b, nonce_a=xa, nonce_b=xb)
    return A.accepted, B.accepted, A.session_key, B.session_key


# --------------------------------------------------------------------------
# Completeness and operation counts


def _expected_counts(protocol: int, role: str, n: int = 0) -> dict:
    lam, mu = table4_counts(protocol, role, n)
    exp = {"table4_lambda": lam, "table4_mu": mu}
    # actual online work, by construction of each protocol
    exp.update({
        (ZKP1, "prover"): {"lambda_count": 1, "mu_count": 0, "point_adds": 0},
        (ZKP1, "verifier"): {"lambda_count": 2, "mu_count": 1, "point_adds": 1},
        (ZKP2, "prover"): {"lambda_count": 0, "mu_count": 1, "point_adds": 1, "offline_lambda": n},
        (ZKP2, "verifier"): {"lambda_count": 2, "mu_count": 1, "point_adds": 1},
        (ZKP3, "mutual"): {"lambda_count": 5, "mu_count": 2, "point_adds": 1},
    }[(protocol, role)])
    return exp


def check_counts(session, n: int = 0) -> list[str]:
    """Mismatches between a finished honest session's counters and the
    expected per-protocol counts (empty list when exact)."""
    exp = _expected_counts(session.protocol, session.role, n)
    return [f"{PROTOCOL_NAMES[session.protocol]} {session.role} {k}: {getattr(session.cost, k)} != {v}"
            for k, v in exp.items() if getattr(session.cost, k) != v]


def audit_completeness(curve: Curve = TINY17, runs: int = 1000, seed: int = 0,
                       protocols=(ZKP1, ZKP2, ZKP3)) -> AuditResult:
    """Honest runs must all accept with exact operation counts.

    tiny17 is exhaustive over every secret and every ephemeral in [0, m); other curves
    use ``runs`` seeded random runs per protocol.
    """
    rng = random.Random(seed)
    exhaustive = curve.m <= 64
    total = Counter()
    accepted = Counter()
    mismatches: list[str] = []

    def record(proto, sessions, n=0):
        total[proto] += 1
        if all(s.accepted for s in sessions):
            accepted[proto] += 1
        for s in sessions:
            mismatches.extend(check_counts(s, n))

    with _Timer() as tm:
        m = curve.m
        if ZKP1 in protocols:
            if exhaustive:
                for a in range(1, m):
                    ident = Identity.from_secret(curve, a)
                    for x in range(m):
                        record(ZKP1, run_zkp1(ident, rng_v=rng, nonce=x))
            else:
                for _ in range(runs):
                    record(ZKP1, run_zkp1(keygen(curve, rng), rng, rng))
        if ZKP2 in protocols:
            if exhaustive:
                for a in range(1, m):
                    ident = Identity.from_secret(curve, a)
                    for xj in range(m):
                        for xk in range(m):
                            pool = CompromisePool.precompute(curve, 2, nonces=[xj, xk])
                            record(ZKP2, run_zkp2(ident, pool, rng, rng), n=2)
            else:
                for _ in range(runs):
                    n = rng.randrange(2, 6)
                    ident = keygen(curve, rng)
                    pool = CompromisePool.precompute(curve, n, rng)
                    record(ZKP2, run_zkp2(ident, pool, rng, rng), n=n)
        if ZKP3 in protocols:
            if exhaustive:
                ids = [Identity.from_secret(curve, s) for s in range(1, m)]
                for id_a, id_b in itertools.product(ids, ids):
                    for xa in range(m):
                        for xb in range(m):
                            record(ZKP3, run_zkp3(id_a, id_b, nonce_a=xa, nonce_b=xb))
            else:
                for _ in range(runs):
                    record(ZKP3, run_zkp3(keygen(curve, rng), keygen(curve, rng), rng, rng))
    rates = {PROTOCOL_NAMES[p]: Fraction(accepted[p], total[p]) for p in total}
    return AuditResult(
        check="completeness",
        params={"curve": curve.name, "exhaustive": exhaustive, "seed": seed,
                "runs": {PROTOCOL_NAMES[p]: total[p] for p in total}},
        verdict=all(r == 1 for r in rates.values()) and not mismatches,
        measured=rates,
        expected={k: Fraction(1) for k in rates},
        runtime=tm.elapsed,
        details={"count_mismatches": mismatches[:20], "count_mismatch_total": len(mismatches)},
    )


# --------------------------------------------------------------------------
# ZKP3 key agreement and tampering

_ZKP3_MESSAGES = ("w_a", "w_b", "y_a", "y_b")


def _zkp3_honest_ok(A, B) -> bool:
    return (A.accepted and B.accepted
            and A.transcript.challenge_digest == B.transcript.challenge_digest
            and A.transcript.challenge == B.transcript.challenge
            and A.session_key == B.session_key)


def audit_key_agreement(curve: Curve = TINY17, runs: int = 1000, seed: int = 0,
                        tamper_pairs=((2, 3), (9, 9))) -> AuditResult:
    """Honest ZKP3 runs agree on challenge and key; any single tampered
    witness or answer makes both parties reject.

    tiny17: honest runs over all secrets x ephemerals; tampering replaces each
    of the four messages with every other valid value, for the identities in
    ``tamper_pairs`` and every ephemeral pair. Other curves: ``runs`` seeded
    honest runs plus ``runs`` runs with one random message replaced.
    """
    rng = random.Random(seed)
    m = curve.m
    honest = honest_ok = 0
    tampered = both_rejected = 0
    failures = []
    with _Timer() as tm:
        if m <= 64:
            mult = _multiples(curve)
            ids = [Identity.from_secret(curve, s) for s in range(1, m)]
            for id_a, id_b in itertools.product(ids, ids):
                for xa in range(1, m):
                    for xb in range(1, m):
                        honest += 1
                        honest_ok += _zkp3_honest_ok(*run_zkp3(id_a, id_b, nonce_a=xa, nonce_b=xb))
            for a, b in tamper_pairs:
                id_a, id_b = Identity.from_secret(curve, a), Identity.from_secret(curve, b)
                for xa in range(1, m):
                    for xb in range(1, m):
                        for target in _ZKP3_MESSAGES:
                            alternatives = mult if target.startswith("w") else range(m)
                            for alt in alternatives:
                                def tamper(name, value, target=target, alt=alt):
                                    return alt if name == target else value
                                A, B = run_zkp3(id_a, id_b, nonce_a=xa, nonce_b=xb, tamper=tamper)
                                if _is_noop(target, alt, A, B):
                                    continue
                                tampered += 1
                                if not A.accepted and not B.accepted:
                                    both_rejected += 1
                                elif len(failures) < 10:
                                    failures.append((a, b, xa, xb, target, repr(alt)))
        else:
            for _ in range(runs):
                honest += 1
                honest_ok += _zkp3_honest_ok(*run_zkp3(keygen(curve, rng), keygen(curve, rng), rng, rng))
            for _ in range(runs):
                id_a, id_b = keygen(curve, rng), keygen(curve, rng)
                target = rng.choice(_ZKP3_MESSAGES)
                if target.startswith("w"):
                    alt = curve.mul_g(rng.randrange(1, m))
                else:
                    alt = rng.randrange(m)
                seen = {}

                def tamper(name, value, target=target, alt=alt):
                    if name == target:
                        seen["orig"] = value
                        return alt
                    return value
                A, B = run_zkp3(id_a, id_b, rng, rng, tamper=tamper)
                if seen.get("orig") == alt:
                    continue
                tampered += 1
                if not A.accepted and not B.accepted:
                    both_rejected += 1
                elif len(failures) < 10:
                    failures.append((target,))
    return AuditResult(
        check="key-agreement-ZKP3",
        params={"curve": curve.name, "honest_runs": honest, "tampered_runs": tampered, "seed": seed},
        verdict=honest_ok == honest and both_rejected == tampered and honest > 0 and tampered > 0,
        measured={"honest_agree": Fraction(honest_ok, honest),
                  "tampered_mutual_reject": Fraction(both_rejected, tampered)},
        expected={"honest_agree": Fraction(1), "tampered_mutual_reject": Fraction(1)},
        runtime=tm.elapsed,
        details={"failures": failures},
    )


def _is_noop(target: str, alt, A, B) -> bool:
    # the substituted value equals what the honest party would have sent
    if target == "w_a":
        return alt == A.transcript.witness
    if target == "w_b":
        return alt == B.transcript.witness
    if target == "y_a":
        return A.transcript.answer == alt
    return B.transcript.answer == alt


# --------------------------------------------------------------------------
# Wire fuzzing


def _mutate(data: bytes, rng: random.Random) -> bytes:
    op = rng.randrange(3)
    if op == 0 or len(data) < 2:
        # flip 1..3 bits
        buf = bytearray(data)
        for _ in range(rng.randrange(1, 4)):
            i = rng.randrange(len(buf) * 8)
            buf[i // 8] ^= 1 << (i % 8)
        return bytes(buf)
    if op == 1:
        return data[: rng.randrange(len(data))]
    i = rng.randrange(len(data))
    return data[:i] + bytes([rng.randrange(256)]) + data[i:]


def audit_wire_fuzz(curve: Curve = P192, mutations: int = 10_000, seed: int = 0) -> AuditResult:
    """Mutate encoded honest messages and feed them to fresh verifiers.

    Each mutation hits one message (witness or answer, ZKP1/ZKP2/ZKP3). A
    mutation either fails to decode or is processed by the receiving session;
    acceptance or any other exception is a failure.
    """
    rng = random.Random(seed)
    outcomes = Counter()
    failures = []
    with _Timer() as tm:
        ident = keygen(curve, rng)
        peer = keygen(curve, rng)
        for i in range(mutations):
            protocol = (ZKP1, ZKP2, ZKP3)[i % 3]
            target = rng.choice(("witness", "answer"))
            try:
                outcome = _fuzz_one(curve, protocol, target, ident, peer, rng)
            except Exception as exc:  # noqa: BLE001 - any crash is a finding
                outcome = "crash"
                if len(failures) < 10:
                    failures.append(f"{PROTOCOL_NAMES[protocol]} {target}: {exc!r}")
            outcomes[outcome] += 1
            if outcome == "accepted" and len(failures) < 10:
                failures.append(f"{PROTOCOL_NAMES[protocol]} {target}: accepted")
    bad = outcomes["accepted"] + outcomes["crash"]
    return AuditResult(
        check="wire-fuzz",
        params={"curve": curve.name, "mutations": mutations, "seed": seed},
        verdict=bad == 0 and sum(outcomes.values()) == mutations,
        measured=dict(outcomes),
        expected={"accepted": 0, "crash": 0},
        runtime=tm.elapsed,
        details={"failures": failures},
    )


def _deliver(data: bytes, curve: Curve, expect: Message):
    # same checks as the network receiver: right protocol, right type
    msg = decode_message(data, curve)
    if msg.protocol != expect.protocol or msg.kind != expect.kind:
        raise DecodeError("unexpected protocol or message type")
    return msg.value


def _fuzz_one(curve, protocol, target, ident, peer, rng) -> str:
    # Build the honest message, mutate it, and let the receiver process it.
    def mutated(msg: Message):
        data = encode_message(msg, curve)
        bad = _mutate(data, rng)
        while bad == data:
            bad = _mutate(data, rng)
        return _deliver(bad, curve, msg)

    try:
        if protocol == ZKP1:
            p = Zkp1Prover(ident)
            v = Zkp1Verifier(curve, ident.public, rng=rng)
            w = p.commit(rng)
            if target == "witness":
                w = mutated(Message(ZKP1, MsgType.WITNESS, w))
            e = v.challenge(w)
            if e is None:
                return "rejected"
            y = p.respond(e)
            if target == "answer":
                y = mutated(Message(ZKP1, MsgType.ANSWER, y))
            return "accepted" if v.verify(y) else "rejected"
        if protocol == ZKP2:
            pool = _fuzz_pool(curve, rng)
            p = Zkp2Prover(ident, pool)
            v = Zkp2Verifier(curve, ident.public)
            w = p.commit(rng)
            if target == "witness":
                w = mutated(Message(ZKP2, MsgType.WITNESS, w))
            if not v.receive_witness(w):
                return "rejected"
            y = p.respond(v.challenge(rng))
            if target == "answer":
                y = mutated(Message(ZKP2, MsgType.ANSWER, y))
            return "accepted" if v.verify(y) else "rejected"
        key = "w_a" if target == "witness" else "y_a"

        def tamper(name, value):
            if name != key:
                return value
            kind = MsgType.WITNESS if name == "w_a" else MsgType.ANSWER
            return mutated(Message(ZKP3, kind, value))
        A, B = run_zkp3(ident, peer, rng, rng, tamper=tamper)
        return "accepted" if (A.accepted or B.accepted) else "rejected"
    except DecodeError:
        return "decode-error"


_POOL_CACHE: dict = {}


def _fuzz_pool(curve, rng):
    # pools are expensive on P-192; reuse one and refresh it when exhausted
    pool = _POOL_CACHE.get(curve.name)
    if pool is None or pool.remaining() == 0:
        pool = CompromisePool.precompute(curve, 24, rng)
        _POOL_CACHE[curve.name] = pool
    return pool


# --------------------------------------------------------------------------
# Cost benchmark


def _run_all(curve: Curve, n: int, rng) -> tuple[list, dict]:
    sessions = []
    timing = {}
    ident, peer = keygen(curve, rng), keygen(curve, rng)
    t0 = time.perf_counter()
    sessions += list(run_zkp1(ident, rng, rng))
    timing["ZKP1"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    pool = CompromisePool.precompute(curve, n, rng)
    timing["ZKP2-offline"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    sessions += list(run_zkp2(ident, pool, rng, rng))
    timing["ZKP2"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    sessions += list(run_zkp3(ident, peer, rng, rng))
    timing["ZKP3"] = time.perf_counter() - t0
    return sessions, timing


def bench_table4(curve: Curve = P192, n: int = 8, repetitions: int = 3, seed: int = 0) -> dict:
    """Run every protocol ``repetitions`` times and compare its costs with
    the published comparison table.

    Operation counts must match on every repetition. Bit totals are reported
    beside the published ones; wall-clock times depend on the platform.
    """
    rng = random.Random(seed)
    rows: list[dict] = []
    reports: list[CostReport] = []
    timings: list[dict] = []
    counts_ok = True
    for rep in range(repetitions):
        sessions, timing = _run_all(curve, n, rng)
        timings.append(timing)
        for s in sessions:
            rep_ = measure_session(s)
            exp = _expected_counts(s.protocol, s.role, n)
            got = {k: getattr(s.cost, k) for k in exp}
            match = got == exp and s.accepted
            counts_ok &= match
            if rep == 0:
                reports.append(rep_)
                row = rep_.as_record()
                row["expected_counts"] = exp
                row["counts_match"] = match
                rows.append(row)
            elif not match:
                rows.append({"repetition": rep, "protocol": PROTOCOL_NAMES[s.protocol],
                             "role": s.role, "counts_match": False, "got": got, "expected": exp})
    comparison = compare_protocols(reports)
    bandwidth_ok = (comparison["bandwidth"]["ZKP2"] < comparison["bandwidth"]["ZKP1"]
                    < comparison["bandwidth"]["ZKP3"])
    return {
        "curve": curve.name,
        "pool_size": n,
        "repetitions": repetitions,
        "rows": rows,
        "comparison": comparison,
        "counts_match": counts_ok,
        "bandwidth_order_ok": bandwidth_ok,
        "memory_slope_bits": zkp2_memory_slope(curve),
        "timings_s (platform-dependent)": {
            k: sum(t[k] for t in timings) / len(timings) for k in timings[0]
        },
        "verdict": counts_ok and bandwidth_ok and comparison["zkp2_max_memory"],
    }


def zkp2_memory_slope(curve: Curve, sizes=(2, 3, 4, 8)) -> int | None:
    """Stored-bit increment per extra pool entry, or None if not linear."""
    rng = random.Random(1)
    ident = keygen(curve, rng)
    stored = []
    for n in sizes:
        # pool points are placeholders; only their count and encoding size matter
        pool = CompromisePool(curve, [(1, curve.G)] * n, offline_lambda=n)
        p, v = run_zkp2(ident, pool, rng, rng)
        stored.append(measure_session(p).stored_secret_bits)
    slopes = {(b - a) // (n2 - n1) for (a, n1), (b, n2) in
              zip(zip(stored, sizes), zip(stored[1:], sizes[1:]))}
    exact = all((b - a) % (n2 - n1) == 0 for (a, n1), (b, n2) in
                zip(zip(stored, sizes), zip(stored[1:], sizes[1:])))
    return slopes.pop() if len(slopes) == 1 and exact else None


def run_audits(seed: int = 0, fuzz_mutations: int = 2000, p192_runs: int = 50) -> list[AuditResult]:
    """Everything the ``audit`` command runs."""
    results = [
        audit_completeness(TINY17, seed=seed),
        audit_completeness(P192, runs=p192_runs, seed=seed),
        audit_soundness(TINY17, ZKP1),
        audit_soundness(TINY17, ZKP1, challenge_space=(0, 1)),
        audit_soundness(TINY17, ZKP2),
        audit_zero_knowledge(TINY17),
        audit_forward_secrecy(TINY17),
        audit_key_agreement(TINY17, seed=seed),
        audit_wire_fuzz(P192, mutations=fuzz_mutations, seed=seed),
    ]
    return results


def summary_table(results: list[AuditResult]) -> str:
    lines = [f"{'check':<24} {'curve':<8} {'verdict':<7} {'measured':<28} {'expected':<28} {'time':>7}"]
    for r in results:
        rec = r.as_record()
        meas = json.dumps(rec["measured"]) if isinstance(rec["measured"], dict) else str(rec["measured"])
        exp = json.dumps(rec["expected"]) if isinstance(rec["expected"], dict) else str(rec["expected"])
        if len(meas) > 28:
            meas = meas[:25] + "..."
        if len(exp) > 28:
            exp = exp[:25] + "..."
        lines.append(f"{r.check:<24} {r.params.get('curve', ''):<8} {rec['verdict']:<7} "
                     f"{meas:<28} {exp:<28} {r.runtime:>6.2f}s")
    return "\n".join(lines)
