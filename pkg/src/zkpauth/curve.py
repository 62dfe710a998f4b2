"""Prime-field arithmetic and short Weierstrass curve groups.

Curves have the form y^2 = x^3 + A*x + B over F_p. Points are affine; the
point at infinity is represented by ``x is None``.

Nothing here is hardened against side channels. The scalar multiplication
loop performs a double and an add for every bit so its *structure* does not
depend on the scalar, but the underlying big-integer and affine formulas
still branch on data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import gmpy2

ECDLP_BRUTEFORCE_LIMIT = 1 << 20


def _inv(a: int, p: int) -> int:
    # gmpy2 is ~10x faster than pow(a, -1, p) at 192 bits
    return int(gmpy2.invert(a, p))


class CurveError(ValueError):
    """Base class for parameter and curve errors."""


class ParameterError(CurveError):
    """Operands belong to different fields or curves."""


class SingularCurveError(CurveError):
    pass


class GeneratorNotOnCurveError(CurveError):
    pass


class WrongOrderError(CurveError):
    pass


class NotPrimeError(CurveError):
    pass


class ECDLPRefusedError(CurveError):
    """Subgroup too large for exhaustive search."""


class ECDLPNotFoundError(CurveError):
    """The point is not a multiple of the generator."""


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_probable_prime(n: int) -> bool:
    """Miller-Rabin with fixed bases (deterministic below 3.3e24)."""
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


# --------------------------------------------------------------------------
# Field elements


@dataclass(frozen=True, slots=True)
class FieldElement:
    value: int
    p: int

    def __post_init__(self):
        if not 0 <= self.value < self.p:
            object.__setattr__(self, "value", self.value % self.p)

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"FieldElement({self.value} mod {self.p})"


def _same_field(u: FieldElement, v: FieldElement) -> int:
    if u.p != v.p:
        raise ParameterError(f"modulus mismatch: {u.p} != {v.p}")
    return u.p


def fe_add(u: FieldElement, v: FieldElement) -> FieldElement:
    p = _same_field(u, v)
    return FieldElement((u.value + v.value) % p, p)


def fe_sub(u: FieldElement, v: FieldElement) -> FieldElement:
    p = _same_field(u, v)
    return FieldElement((u.value - v.value) % p, p)


def fe_mul(u: FieldElement, v: FieldElement) -> FieldElement:
    p = _same_field(u, v)
    return FieldElement(u.value * v.value % p, p)


def fe_neg(u: FieldElement) -> FieldElement:
    return FieldElement(-u.value % u.p, u.p)


def fe_inv(u: FieldElement) -> FieldElement:
    if u.value == 0:
        raise ZeroDivisionError("inverse of zero")
    return FieldElement(pow(u.value, -1, u.p), u.p)


# --------------------------------------------------------------------------
# Points and curves


class Point:
    """Affine point on ``curve``; ``x is None`` marks the point at infinity.

    Construction does not validate; use :meth:`Curve.point` or
    :meth:`Curve.is_on_curve` for untrusted coordinates.
    """

    __slots__ = ("x", "y", "curve")

    def __init__(self, x: int | None, y: int | None, curve: Curve):
        self.x = x
        self.y = y
        self.curve = curve

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def __eq__(self, other):
        if not isinstance(other, Point):
            return NotImplemented
        return (self.x, self.y) == (other.x, other.y) and (
            self.curve is other.curve or self.curve.name == other.curve.name
        )

    def __hash__(self):
        return hash((self.x, self.y, self.curve.name))

    def __repr__(self):
        if self.x is None:
            return f"Point(INF, {self.curve.name})"
        return f"Point({self.x}, {self.y}, {self.curve.name})"

    def __add__(self, other: Point) -> Point:
        return self.curve.add(self, other)

    def __sub__(self, other: Point) -> Point:
        return self.curve.add(self, self.curve.neg(other))

    def __neg__(self) -> Point:
        return self.curve.neg(self)

    def __rmul__(self, k: int) -> Point:
        return self.curve.scalar_mul(k, self)


@dataclass(frozen=True, eq=False)
class Curve:
    """Curve group parameters: y^2 = x^3 + A*x + B over F_p, base point G
    of order m.

    Instances are immutable. Call :func:`validate_params` (or use
    :func:`get_curve`) before trusting hand-written parameters.
    """

    name: str
    p: int
    A: int
    B: int
    gx: int
    gy: int
    m: int
    cofactor: int = 1

    @cached_property
    def G(self) -> Point:
        return Point(self.gx, self.gy, self)

    @cached_property
    def infinity(self) -> Point:
        return Point(None, None, self)

    @cached_property
    def coord_len(self) -> int:
        return math.ceil(self.p.bit_length() / 8)

    @cached_property
    def scalar_len(self) -> int:
        return math.ceil(self.m.bit_length() / 8)

    @property
    def prime_order(self) -> bool:
        return is_probable_prime(self.m)

    def field(self, value: int) -> FieldElement:
        return FieldElement(value % self.p, self.p)

    def point(self, x: int, y: int) -> Point:
        """Validated affine point."""
        P = Point(x % self.p, y % self.p, self)
        if not self.is_on_curve(P):
            raise CurveError(f"({x}, {y}) is not on {self.name}")
        return P

    def _check(self, *points: Point) -> None:
        for P in points:
            if P.curve is not self and P.curve.name != self.name:
                raise ParameterError(
                    f"point on {P.curve.name} used with {self.name}"
                )

    def is_on_curve(self, P: Point) -> bool:
        self._check(P)
        if P.x is None:
            return True
        x, y, p = P.x, P.y, self.p
        if not (0 <= x < p and 0 <= y < p):
            return False
        return (y * y - (x * x * x + self.A * x + self.B)) % p == 0

    def in_subgroup(self, P: Point) -> bool:
        if not self.is_on_curve(P):
            return False
        if self.cofactor == 1:
            return True
        return self.scalar_mul(self.m, P).is_infinity

    # -- group law on raw (x, y) tuples; None is infinity ---------------

    def _add(self, P, Q):
        if P is None:
            return Q
        if Q is None:
            return P
        p = self.p
        x1, y1 = P
        x2, y2 = Q
        if x1 == x2:
            if (y1 + y2) % p == 0:
                return None
            return self._double(P)
        lam = (y2 - y1) * _inv(x2 - x1, p) % p
        x3 = (lam * lam - x1 - x2) % p
        return x3, (lam * (x1 - x3) - y1) % p

    def _double(self, P):
        if P is None:
            return None
        p = self.p
        x1, y1 = P
        if y1 == 0:
            return None
        lam = (3 * x1 * x1 + self.A) * _inv(2 * y1, p) % p
        x3 = (lam * lam - 2 * x1) % p
        return x3, (lam * (x1 - x3) - y1) % p

    def _wrap(self, R) -> Point:
        if R is None:
            return self.infinity
        return Point(R[0], R[1], self)

    @staticmethod
    def _raw(P: Point):
        return None if P.x is None else (P.x, P.y)

    def add(self, P: Point, Q: Point) -> Point:
        self._check(P, Q)
        return self._wrap(self._add(self._raw(P), self._raw(Q)))

    def double(self, P: Point) -> Point:
        self._check(P)
        return self._wrap(self._double(self._raw(P)))

    def neg(self, P: Point) -> Point:
        self._check(P)
        if P.x is None:
            return P
        return Point(P.x, -P.y % self.p, self)

    def scalar_mul(self, k: int, P: Point) -> Point:
        """k*P by left-to-right double-and-add-always.

        k is taken as given (negative values are reduced mod m first). Every
        bit costs one doubling and one addition; the addition result is kept
        only when the bit is set.
        """
        self._check(P)
        if k < 0:
            k %= self.m
        R = None
        Q = self._raw(P)
        for bit in bin(k)[2:] if k else ():
            R = self._double(R)
            S = self._add(R, Q)
            R = (R, S)[bit == "1"]
        return self._wrap(R)

    def mul_g(self, k: int) -> Point:
        return self.scalar_mul(k, self.G)

    def subgroup(self) -> list[Point]:
        """All multiples k*G for k in [0, m); tiny curves only."""
        if self.m > ECDLP_BRUTEFORCE_LIMIT:
            raise ECDLPRefusedError(f"subgroup of order {self.m} too large")
        out = [self.infinity]
        R = None
        G = self._raw(self.G)
        for _ in range(1, self.m):
            R = self._add(R, G)
            out.append(self._wrap(R))
        return out

    def __repr__(self):
        return f"Curve({self.name})"


# Module-level spellings of the group operations.

def point_add(P: Point, Q: Point) -> Point:
    return P.curve.add(P, Q)


def point_double(P: Point) -> Point:
    return P.curve.double(P)


def point_neg(P: Point) -> Point:
    return P.curve.neg(P)


def scalar_mul(k: int, P: Point) -> Point:
    return P.curve.scalar_mul(k, P)


def is_on_curve(P: Point) -> bool:
    return P.curve.is_on_curve(P)


def validate_params(curve: Curve) -> Curve:
    """Return ``curve`` if it is a usable group, else raise.

    Checks that p is prime, the curve is nonsingular, G lies on it, and G
    has order exactly m.
    """
    p = curve.p
    if not is_probable_prime(p) or p < 5:
        raise NotPrimeError(f"modulus {p} is not an odd prime > 3")
    if (4 * curve.A**3 + 27 * curve.B**2) % p == 0:
        raise SingularCurveError("4A^3 + 27B^2 == 0 (mod p)")
    G = curve.G
    if not curve.is_on_curve(G) or G.is_infinity:
        raise GeneratorNotOnCurveError(f"G not on {curve.name}")
    if curve.m < 2 or not curve.mul_g(curve.m).is_infinity:
        raise WrongOrderError(f"m*G != O for m={curve.m}")
    if not curve.prime_order:
        # Composite m: only exhaustive checking is supported.
        if curve.m > ECDLP_BRUTEFORCE_LIMIT:
            raise WrongOrderError("composite subgroup order too large to verify")
        R = None
        g = curve._raw(G)
        for _ in range(1, curve.m):
            R = curve._add(R, g)
            if R is None:
                raise WrongOrderError(f"G has order smaller than {curve.m}")
    return curve


def solve_ecdlp_bruteforce(Q: Point, curve: Curve | None = None) -> int:
    """Find k in [0, m) with Q = k*G by walking the subgroup."""
    curve = curve or Q.curve
    curve._check(Q)
    if curve.m > ECDLP_BRUTEFORCE_LIMIT:
        raise ECDLPRefusedError(f"m={curve.m} exceeds {ECDLP_BRUTEFORCE_LIMIT}")
    target = curve._raw(Q)
    R = None
    G = curve._raw(curve.G)
    for k in range(curve.m):
        if R == target:
            return k
        R = curve._add(R, G)
    raise ECDLPNotFoundError(f"{Q!r} is not in <G>")


# --------------------------------------------------------------------------
# Encoding (shared with the wire format)


def encode_point(P: Point) -> bytes:
    if P.x is None:
        return b"\x00"
    n = P.curve.coord_len
    return b"\x04" + P.x.to_bytes(n, "big") + P.y.to_bytes(n, "big")


def point_encoding_len(curve: Curve, infinity: bool = False) -> int:
    return 1 if infinity else 1 + 2 * curve.coord_len


class PointDecodeError(CurveError):
    pass


def decode_point(data: bytes, curve: Curve) -> Point:
    if not data:
        raise PointDecodeError("empty point encoding")
    tag = data[0]
    if tag == 0x00:
        if len(data) != 1:
            raise PointDecodeError("trailing bytes after infinity")
        return curve.infinity
    if tag != 0x04:
        raise PointDecodeError(f"bad point tag 0x{tag:02x}")
    n = curve.coord_len
    if len(data) != 1 + 2 * n:
        raise PointDecodeError(f"point encoding has {len(data)} octets, want {1 + 2 * n}")
    x = int.from_bytes(data[1 : 1 + n], "big")
    y = int.from_bytes(data[1 + n :], "big")
    P = Point(x, y, curve)
    if not curve.is_on_curve(P):
        raise PointDecodeError("decoded point is not on the curve")
    return P


# --------------------------------------------------------------------------
# Named curves

TINY17 = Curve(name="tiny17", p=17, A=2, B=2, gx=5, gy=1, m=19)

P192 = Curve(
    name="p192",
    p=0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEFFFFFFFFFFFFFFFF,
    A=0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEFFFFFFFFFFFFFFFC,
    B=0x64210519E59C80E70FA7E9AB72243049FEB8DEECC146B9B1,
    gx=0x188DA80EB03090F67CBF20EB43A18800F4FF0AFD82FF1012,
    gy=0x07192B95FFC8DA78631011ED6B24CDD573F977A11E794811,
    m=0xFFFFFFFFFFFFFFFFFFFFFFFF99DEF836146BC9B1B4D22831,
)

CURVES = {c.name: c for c in (TINY17, P192)}


def get_curve(name: str) -> Curve:
    try:
        return CURVES[name]
    except KeyError:
        raise ParameterError(f"unknown curve {name!r}; known: {sorted(CURVES)}") from None
