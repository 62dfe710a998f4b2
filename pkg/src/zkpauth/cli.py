"""Command-line interface: keygen, prove, verify, mutual, audit, bench."""

from __future__ import annotations

import argparse
import json
import random
import socket
import sys
import threading
from pathlib import Path

from . import harness
from .challenge import key_fingerprint
from .curve import CurveError, get_curve
from .identity import (
    IdentityFileError,
    format_public,
    load_identity,
    load_public,
    save_identity,
)
from .net import (
    Channel,
    PeerMismatchError,
    TransportError,
    parse_endpoint,
    run_mutual,
    run_prover,
    run_verifier,
)
from .protocols import ZKP1, ZKP2, ZKP3, CompromisePool, PoolExhaustedError, keygen
from .wire import DecodeError, measure_session

EXIT_ACCEPT = 0
EXIT_REJECT = 1
EXIT_USAGE = 2
EXIT_TRANSPORT = 3
EXIT_DECODE = 4
EXIT_POOL_EXHAUSTED = 5
EXIT_IDENTITY = 6
EXIT_PEER_MISMATCH = 7

PROTOCOLS = {"zkp1": ZKP1, "zkp2": ZKP2, "zkp3": ZKP3}


def _err(msg: str) -> None:
    print(f"zkpauth: {msg}", file=sys.stderr)


def _rng(args):
    if args.seed is None:
        return None
    print("!" * 64 + "\n!! WARNING: --seed makes every nonce predictable. TESTS ONLY. !!\n" + "!" * 64,
          file=sys.stderr)
    return random.Random(args.seed)


def _emit(args, record: dict, lock=threading.Lock()) -> None:
    line = json.dumps(record)
    with lock:
        if args.report:
            with open(args.report, "a") as fh:
                fh.write(line + "\n")
        else:
            print(line, flush=True)


# --------------------------------------------------------------------------


def cmd_keygen(args) -> int:
    curve = get_curve(args.curve)
    rng = _rng(args)
    ident = keygen(curve, rng)
    pool = CompromisePool.precompute(curve, args.pool_size, rng) if args.pool_size else None
    out = Path(args.out)
    save_identity(out, ident, pool)
    out.with_name(out.name + ".pub").write_text(format_public(ident))
    print(f"wrote {out} and {out}.pub ({curve.name}"
          + (f", pool of {len(pool)})" if pool else ")"))
    return EXIT_ACCEPT


def _connections(args):
    """Yield connected sockets: one for --connect, --sessions for --listen."""
    if args.connect:
        host, port = parse_endpoint(args.connect)
        try:
            yield socket.create_connection((host, port), timeout=args.timeout)
        except OSError as exc:
            raise TransportError(f"connect to {args.connect}: {exc}") from exc
        return
    host, port = parse_endpoint(args.listen)
    srv = socket.create_server((host, port))
    with srv:
        print(f"listening {srv.getsockname()[0]}:{srv.getsockname()[1]}", flush=True)
        for _ in range(args.sessions):
            conn, _addr = srv.accept()
            yield conn


def _session_exit(session) -> int:
    return EXIT_ACCEPT if session.accepted else EXIT_REJECT


def _serve(args, handler) -> int:
    """Run ``handler(sock)`` on each connection; listeners run them in
    threads. Returns the worst exit code."""
    codes: list[int] = []
    threads = []

    def guarded(conn):
        with conn:
            codes.append(_run_handler(handler, conn))

    try:
        for conn in _connections(args):
            if args.connect or args.sessions == 1:
                guarded(conn)
            else:
                t = threading.Thread(target=guarded, args=(conn,))
                t.start()
                threads.append(t)
    except TransportError as exc:
        _err(f"transport failure: {exc}")
        codes.append(EXIT_TRANSPORT)
    for t in threads:
        t.join()
    return max(codes) if codes else EXIT_TRANSPORT


def _run_handler(handler, conn) -> int:
    try:
        return handler(conn)
    except TransportError as exc:
        _err(f"transport failure: {exc}")
        return EXIT_TRANSPORT
    except PeerMismatchError as exc:
        _err(str(exc))
        return EXIT_PEER_MISMATCH
    except DecodeError as exc:
        _err(f"decode error: {exc}")
        return EXIT_DECODE
    except PoolExhaustedError as exc:
        _err(str(exc))
        return EXIT_POOL_EXHAUSTED


def _report(args, session) -> None:
    _emit(args, measure_session(session).as_record())


def _load_identity(args):
    ident, pool = load_identity(args.identity)
    if args.curve and args.curve != ident.curve.name:
        raise IdentityFileError(f"identity is for {ident.curve.name}, --curve says {args.curve}")
    return ident, pool


def cmd_prove(args) -> int:
    protocol = PROTOCOLS[args.protocol]
    if protocol == ZKP3:
        _err("zkp3 is symmetric; use the mutual command")
        return EXIT_USAGE
    ident, pool = _load_identity(args)
    pool_lock = threading.Lock()
    if protocol == ZKP2:
        if pool is None:
            _err("identity file has no compromise pool; run keygen --pool-size N")
            return EXIT_IDENTITY
        if pool.remaining() < args.sessions:
            _err("compromise pool exhausted; re-provision with keygen --pool-size N")
            return EXIT_POOL_EXHAUSTED
    rng = _rng(args)

    def persist():
        with pool_lock:
            save_identity(args.identity, ident, pool)

    def handler(conn):
        chan = Channel(conn, ident.curve, protocol, timeout=args.timeout)
        session = run_prover(chan, ident, pool, rng, on_commit=persist if protocol == ZKP2 else None)
        _report(args, session)
        return _session_exit(session)

    return _serve(args, handler)


def cmd_verify(args) -> int:
    protocol = PROTOCOLS[args.protocol]
    if protocol == ZKP3:
        _err("zkp3 is symmetric; use the mutual command")
        return EXIT_USAGE
    curve = get_curve(args.curve or "tiny17")
    peer = load_public(args.peer_pub, curve)
    rng = _rng(args)

    def handler(conn):
        chan = Channel(conn, curve, protocol, timeout=args.timeout)
        session = run_verifier(chan, peer, rng)
        _report(args, session)
        return _session_exit(session)

    return _serve(args, handler)


def cmd_mutual(args) -> int:
    ident, _pool = _load_identity(args)
    peer = load_public(args.peer_pub, ident.curve)
    rng = _rng(args)

    def handler(conn):
        chan = Channel(conn, ident.curve, ZKP3, timeout=args.timeout)
        session = run_mutual(chan, ident, peer, rng)
        _report(args, session)
        if session.accepted:
            print(f"session-key-fingerprint {key_fingerprint(session.session_key)}", flush=True)
        return _session_exit(session)

    return _serve(args, handler)


def cmd_audit(args) -> int:
    results = harness.run_audits(seed=args.seed or 0, fuzz_mutations=args.fuzz,
                                 p192_runs=args.p192_runs)
    for r in results:
        _emit(args, r.as_record())
    print(harness.summary_table(results), file=sys.stderr if not args.report else sys.stdout)
    return EXIT_ACCEPT if all(r.verdict for r in results) else EXIT_REJECT


def cmd_bench(args) -> int:
    curve = get_curve(args.curve or "p192")
    res = harness.bench_table4(curve, n=args.pool_size or 8, repetitions=args.repetitions,
                               seed=args.seed or 0)
    for row in res["rows"]:
        _emit(args, row)
    out = sys.stderr if not args.report else sys.stdout
    print(f"{'protocol':<6} {'role':<9} {'t4 lam':>6} {'t4 mu':>5} {'bits':>6} {'publ.':>6} "
          f"{'stored':>7} {'publ.':>7}  counts", file=out)
    for row in res["rows"]:
        print(f"{row['protocol']:<6} {row['role']:<9} {row['table4_lambda']:>6} {row['table4_mu']:>5} "
              f"{row['transferred_bits']:>6} {str(row.get('published_transferred_bits', '-')):>6} "
              f"{row['stored_secret_bits']:>7} {str(row.get('published_stored_secret_bits', '-')):>7}  "
              f"{'ok' if row['counts_match'] else 'MISMATCH'}", file=out)
    cmp_ = res["comparison"]
    print(f"bandwidth order: {' < '.join(cmp_['bandwidth_order'])}; "
          f"memory order: {' < '.join(cmp_['memory_order'])}; "
          f"ZKP3/ZKP1 op ratio {cmp_['zkp3_over_zkp1_ops']:.2f}", file=out)
    print(f"timings (platform-dependent): {res['timings_s (platform-dependent)']}", file=out)
    return EXIT_ACCEPT if res["verdict"] else EXIT_REJECT


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zkpauth", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, net=False):
        sp.add_argument("--curve", choices=["tiny17", "p192"])
        sp.add_argument("--seed", type=int, help="seed every RNG (tests only)")
        sp.add_argument("--report", help="append JSON-lines reports here instead of stdout")
        if net:
            sp.add_argument("--protocol", choices=sorted(PROTOCOLS), default="zkp1")
            sp.add_argument("--identity", help="identity file")
            sp.add_argument("--peer-pub", help="peer public point (hex) or .pub/identity file")
            ep = sp.add_mutually_exclusive_group(required=True)
            ep.add_argument("--listen", metavar="HOST:PORT")
            ep.add_argument("--connect", metavar="HOST:PORT")
            sp.add_argument("--sessions", type=int, default=1,
                            help="connections to serve when listening (concurrently)")
            sp.add_argument("--timeout", type=float, default=30.0)

    kg = sub.add_parser("keygen", help="create an identity file")
    common(kg)
    kg.add_argument("--out", "--identity", dest="out", required=True)
    kg.add_argument("--pool-size", type=int, help="also precompute a ZKP2 pool of N compromises")
    kg.set_defaults(func=cmd_keygen)

    for name, func in (("prove", cmd_prove), ("verify", cmd_verify), ("mutual", cmd_mutual)):
        sp = sub.add_parser(name)
        common(sp, net=True)
        sp.set_defaults(func=func)

    au = sub.add_parser("audit", help="exhaustive tiny17 audits and P-192 smoke runs")
    common(au)
    au.add_argument("--fuzz", type=int, default=2000, help="wire fuzz mutations")
    au.add_argument("--p192-runs", type=int, default=50)
    au.set_defaults(func=cmd_audit)

    be = sub.add_parser("bench", help="reproduce the protocol cost comparison")
    common(be)
    be.add_argument("--pool-size", type=int, default=8)
    be.add_argument("--repetitions", type=int, default=3)
    be.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command in ("prove", "mutual") and not args.identity:
        parser.error(f"{args.command} needs --identity")
    if args.command in ("verify", "mutual") and not args.peer_pub:
        parser.error(f"{args.command} needs --peer-pub")
    if args.command == "keygen" and args.pool_size is not None and args.pool_size < 2:
        parser.error("--pool-size must be at least 2")
    if args.command == "keygen" and not args.curve:
        args.curve = "tiny17"
    try:
        return args.func(args)
    except (IdentityFileError, CurveError) as exc:
        _err(str(exc))
        return EXIT_IDENTITY
    except OSError as exc:
        _err(str(exc))
        return EXIT_TRANSPORT


if __name__ == "__main__":
    sys.exit(main())
