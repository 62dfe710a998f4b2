"""Identity files.

Plain ``key=value`` lines::

    curve=tiny17
    secret=02
    public=040603
    pool=05:04090f      # optional, ZKP2 compromise x_i : x_i*G (hex)
    used=0,1            # optional, consumed pool pairs

A public file carries only ``curve`` and ``public``. Parsing is strict:
unknown or repeated single-valued keys are rejected, and every point is
recomputed from its scalar.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

from .curve import Curve, CurveError, Point, decode_point, encode_point, get_curve
from .protocols import CompromisePool, Identity


class IdentityFileError(ValueError):
    pass


_SINGLE = {"curve", "secret", "public"}
_MULTI = {"pool", "used"}


def _parse(text: str, allowed: set[str]) -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or key not in allowed:
            raise IdentityFileError(f"line {lineno}: unexpected entry {key!r}")
        if key in _SINGLE and key in out:
            raise IdentityFileError(f"line {lineno}: duplicate {key!r}")
        out.setdefault(key, []).append(value)
    return out


def _hex_point(s: str, curve: Curve) -> Point:
    try:
        return decode_point(bytes.fromhex(s), curve)
    except (ValueError, CurveError) as exc:
        raise IdentityFileError(f"bad point {s!r}: {exc}") from None


def _hex_int(s: str) -> int:
    try:
        return int(s, 16)
    except ValueError:
        raise IdentityFileError(f"bad hex scalar {s!r}") from None


def _curve(fields) -> Curve:
    if "curve" not in fields:
        raise IdentityFileError("missing curve")
    try:
        return get_curve(fields["curve"][0])
    except CurveError as exc:
        raise IdentityFileError(str(exc)) from None


def parse_identity(text: str) -> tuple[Identity, CompromisePool | None]:
    fields = _parse(text, _SINGLE | _MULTI)
    curve = _curve(fields)
    for key in ("secret", "public"):
        if key not in fields:
            raise IdentityFileError(f"missing {key}")
    ident = Identity(curve, _hex_int(fields["secret"][0]), _hex_point(fields["public"][0], curve))
    try:
        ident.check()
    except ValueError as exc:
        raise IdentityFileError(str(exc)) from None

    pool = None
    if "pool" in fields:
        entries = []
        for item in fields["pool"]:
            x, sep, pt = item.partition(":")
            if not sep:
                raise IdentityFileError(f"bad pool entry {item!r}")
            entries.append((_hex_int(x), _hex_point(pt, curve)))
        used = []
        for item in fields.get("used", []):
            try:
                j, k = (int(v) for v in item.split(","))
            except ValueError:
                raise IdentityFileError(f"bad used pair {item!r}") from None
            used.append((j, k))
        try:
            pool = CompromisePool(curve, entries, used, offline_lambda=len(entries)).check()
        except ValueError as exc:
            raise IdentityFileError(str(exc)) from None
    elif "used" in fields:
        raise IdentityFileError("used pairs without a pool")
    return ident, pool


def format_identity(identity: Identity, pool: CompromisePool | None = None) -> str:
    n = identity.curve.scalar_len
    lines = [
        f"curve={identity.curve.name}",
        f"secret={identity.secret:0{2 * n}x}",
        f"public={encode_point(identity.public).hex()}",
    ]
    if pool is not None:
        for x, X in pool.entries:
            lines.append(f"pool={x:0{2 * n}x}:{encode_point(X).hex()}")
        for pair in sorted(tuple(sorted(p)) for p in pool.used_pairs):
            lines.append(f"used={pair[0]},{pair[1]}")
    return "\n".join(lines) + "\n"


def format_public(identity: Identity) -> str:
    return f"curve={identity.curve.name}\npublic={encode_point(identity.public).hex()}\n"


def _write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.chmod(tmp, 0o600)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_identity(path, identity: Identity, pool: CompromisePool | None = None) -> None:
    _write_atomic(Path(path), format_identity(identity, pool))


def load_identity(path) -> tuple[Identity, CompromisePool | None]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise IdentityFileError(f"cannot read {path}: {exc}") from None
    return parse_identity(text)


def load_public(spec: str, curve: Curve | None = None) -> Point:
    """Peer public point from a hex string or a public/identity file."""
    p = Path(spec)
    if p.is_file():
        fields = _parse(p.read_text(), _SINGLE | _MULTI)
        file_curve = _curve(fields)
        if curve is not None and file_curve.name != curve.name:
            raise IdentityFileError(f"{spec} is for {file_curve.name}, not {curve.name}")
        if "public" not in fields:
            raise IdentityFileError(f"{spec} has no public point")
        point = _hex_point(fields["public"][0], file_curve)
    else:
        if curve is None:
            raise IdentityFileError("a curve is needed to parse a hex public point")
        point = _hex_point(spec, curve)
    if point.is_infinity:
        raise IdentityFileError("public point cannot be the point at infinity")
    return point
