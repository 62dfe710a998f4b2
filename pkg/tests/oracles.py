"""Reference computations that share no code with the package.

Plain integer arithmetic only; slow on purpose.
"""

P, A, B = 17, 2, 2
G = (5, 1)
M = 19


def egcd_inverse(u, p):
    """Modular inverse by the extended Euclidean algorithm."""
    r0, r1, s0, s1 = p, u % p, 0, 1
    while r1:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    assert r0 == 1
    return s0 % p


def enumerate_points(p=P, a=A, b=B):
    """Every affine solution of y^2 = x^3 + ax + b, by brute force."""
    return [(x, y) for x in range(p) for y in range(p) if (y * y - x**3 - a * x - b) % p == 0]


def add(P1, P2, p=P, a=A):
    """Textbook chord-and-tangent addition; None is the point at infinity."""
    if P1 is None:
        return P2
    if P2 is None:
        return P1
    (x1, y1), (x2, y2) = P1, P2
    if x1 == x2 and (y1 + y2) % p == 0:
        return None
    if P1 == P2:
        lam = (3 * x1 * x1 + a) * egcd_inverse(2 * y1, p) % p
    else:
        lam = (y2 - y1) * egcd_inverse(x2 - x1, p) % p
    x3 = (lam * lam - x1 - x2) % p
    return x3, (lam * (x1 - x3) - y1) % p


def repeated_add(k, Q=G):
    R = None
    for _ in range(k):
        R = add(R, Q)
    return R


MULTIPLES = [repeated_add(k) for k in range(M)]


def dlog(Q):
    return MULTIPLES.index(Q)
