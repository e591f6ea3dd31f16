"""Classical invariants used to anchor gradings and to sanity-check ranks."""
from __future__ import annotations

import math

from ..errors import InvalidSpec, NonCoprime


def signature_torus(p: int, q: int) -> int:
    """Signature of the (p, q) torus knot from the Brieskorn lattice-point count.

    Pairs (i, j) with 0 < i < |p|, 0 < j < |q| and 1/2 < i/p + j/q < 3/2
    count -1, the rest +1 (with positive p, q); mirror images flip the sign.
    """
    if math.gcd(p, q) != 1:
        raise NonCoprime(f"gcd({p},{q}) != 1")
    a, b = abs(p), abs(q)
    sig = 0
    for i in range(1, a):
        for j in range(1, b):
            # compare 2(ib + ja) with ab and 3ab exactly
            t = 2 * (i * b + j * a)
            sig += -1 if a * b < t < 3 * a * b else 1
    return sig if p * q > 0 else -sig


def signature_two_bridge(p: int, q: int) -> int:
    """Signature of the 2-bridge knot K(p, q), p odd, from the sawtooth sum.

    sigma = -sum_{i=1}^{p-1} (-1)^floor(i q' / p), where q' is the odd
    representative of q modulo p.
    """
    if p <= 0 or p % 2 == 0:
        raise InvalidSpec(f"p={p} must be odd and positive")
    if math.gcd(p, q) != 1:
        raise NonCoprime(f"gcd({p},{q}) != 1")
    qq = q if q % 2 else (q - p if q > 0 else q + p)
    return -sum(1 if (i * qq) // p % 2 == 0 else -1 for i in range(1, p))


def _polydiv_exact(num: list[int], den: list[int]) -> list[int]:
    """Exact quotient of integer polynomials (coefficients low degree first)."""
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    lead = den[-1]
    for k in range(len(out) - 1, -1, -1):
        c, r = divmod(num[k + len(den) - 1], lead)
        if r:
            raise ValueError("division is not exact")
        out[k] = c
        for i, d in enumerate(den):
            num[k + i] -= c * d
    if any(num[: len(den) - 1]):
        raise ValueError("division is not exact")
    return out


def _mul(a: list[int], b: list[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _xn_minus_1(n: int) -> list[int]:
    return [-1] + [0] * (n - 1) + [1]


def alexander_torus(p: int, q: int) -> list[int]:
    """Coefficients of (t^pq - 1)(t - 1) / ((t^p - 1)(t^q - 1)), low degree first."""
    if math.gcd(p, q) != 1:
        raise NonCoprime(f"gcd({p},{q}) != 1")
    p, q = abs(p), abs(q)
    num = _mul(_xn_minus_1(p * q), _xn_minus_1(1))
    den = _mul(_xn_minus_1(p), _xn_minus_1(q))
    return _polydiv_exact(num, den)


def alexander_abs_sum_torus(p: int, q: int) -> int:
    return sum(abs(c) for c in alexander_torus(p, q))
