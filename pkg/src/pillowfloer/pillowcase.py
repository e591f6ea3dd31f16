"""The pillowcase as the quotient of R^2 by Z^2 x| Z/2.

Lifts live in R^2 with coordinates (gamma, theta).  The deck group acts by
``x -> sigma * x + 2*pi*(m, n)``; its only fixed points are the lattice
points ``(pi Z)^2``, which map to the four corners.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import NonClosedLoop, NonCoprime, NonTransverseCrossing

TWO_PI = 2.0 * math.pi
CORNER_TOL = 1e-9


class LiftPoint(NamedTuple):
    gamma: float
    theta: float


class PillowPoint(NamedTuple):
    gamma: float
    theta: float


@dataclass(frozen=True)
class DeckElement:
    m: int = 0
    n: int = 0
    sigma: int = 1

    def __post_init__(self):
        if self.sigma not in (1, -1):
            raise ValueError("sigma must be +1 or -1")

    def __mul__(self, other: "DeckElement") -> "DeckElement":
        return DeckElement(
            self.m + self.sigma * other.m,
            self.n + self.sigma * other.n,
            self.sigma * other.sigma,
        )

    def inverse(self) -> "DeckElement":
        # sigma*(sigma*x + t) + t' = x  =>  t' = -sigma*t
        return DeckElement(-self.sigma * self.m, -self.sigma * self.n, self.sigma)

    def __pow__(self, k: int) -> "DeckElement":
        base = self if k >= 0 else self.inverse()
        out = IDENTITY
        for _ in range(abs(k)):
            out = out * base
        return out

    @property
    def is_identity(self) -> bool:
        return self.m == 0 and self.n == 0 and self.sigma == 1

    def apply(self, pts):
        pts = np.asarray(pts, dtype=float)
        return self.sigma * pts + TWO_PI * np.array([self.m, self.n], dtype=float)

    def to_json(self) -> dict:
        return {"m": self.m, "n": self.n, "sigma": self.sigma}

    @classmethod
    def from_json(cls, d: dict) -> "DeckElement":
        return cls(int(d["m"]), int(d["n"]), int(d["sigma"]))


IDENTITY = DeckElement(0, 0, 1)


def is_corner_lift(pt, tol: float = CORNER_TOL) -> bool:
    a = np.asarray(pt, dtype=float) / math.pi
    return bool(np.all(np.abs(a - np.round(a)) * math.pi <= tol))


def canonicalize(pt, tol: float = CORNER_TOL) -> tuple[PillowPoint, DeckElement]:
    """Fold a lift into [0, pi] x [0, 2*pi) and return the folding element.

    The returned element g satisfies ``g.apply(canonical) == pt``.  Points on
    the fold edges gamma in {0, pi} are normalized to theta in [0, pi].
    """
    g0, t0 = float(pt[0]), float(pt[1])
    m = math.floor(g0 / TWO_PI)
    n = math.floor(t0 / TWO_PI)
    a = g0 - TWO_PI * m
    b = t0 - TWO_PI * n
    if a > TWO_PI - tol:
        a, m = a - TWO_PI, m + 1
    if b > TWO_PI - tol:
        b, n = b - TWO_PI, n + 1
    if abs(a) <= tol:
        a = 0.0
    if abs(b) <= tol:
        b = 0.0
    flip = a > math.pi + tol or (abs(a - math.pi) <= tol or a == 0.0) and b > math.pi + tol
    if abs(a - math.pi) <= tol:
        a = math.pi
    if not flip:
        return PillowPoint(a, b), DeckElement(m, n, 1)
    # pt = -(c) + 2pi(m', n')  with c = (2pi*m' - g0, 2pi*n' - t0)
    mm = m + 1 if a > 0 else m
    nn = n + 1 if b > 0 else n
    c = (TWO_PI * mm - g0, TWO_PI * nn - t0)
    ca = 0.0 if abs(c[0]) <= tol else (math.pi if abs(c[0] - math.pi) <= tol else c[0])
    cb = 0.0 if abs(c[1]) <= tol else c[1]
    return PillowPoint(ca, cb), DeckElement(mm, nn, -1)


def same_pillow_point(p, q, tol: float = 1e-7) -> bool:
    a, _ = canonicalize(p)
    b, _ = canonicalize(q)
    d = abs(a.gamma - b.gamma) + min(abs(a.theta - b.theta), TWO_PI - abs(a.theta - b.theta))
    return d <= tol


class PerturbationFunction:
    """Finite sine series g(x) = sum_k a_k sin(k x)."""

    def __init__(self, coeffs: dict[int, float] | None = None):
        self.coeffs = {int(k): float(a) for k, a in (coeffs or {}).items() if a != 0.0}
        if any(k <= 0 for k in self.coeffs):
            raise ValueError("sine-series indices must be positive")

    @classmethod
    def parse(cls, text: str) -> "PerturbationFunction":
        """Parse ``"k:amp,k:amp"``; an empty string is the zero function."""
        coeffs: dict[int, float] = {}
        if text.strip() == "0":
            return cls()
        for item in filter(None, (s.strip() for s in text.split(","))):
            m = re.fullmatch(r"(\d+)\s*:\s*([-+0-9.eE]+)", item)
            if not m:
                raise ValueError(f"bad sine-series term {item!r}")
            coeffs[int(m.group(1))] = coeffs.get(int(m.group(1)), 0.0) + float(m.group(2))
        return cls(coeffs)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for k, a in self.coeffs.items():
            out = out + a * np.sin(k * x)
        return out

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for k, a in self.coeffs.items():
            out = out + a * k * np.cos(k * x)
        return out

    def scaled(self, c: float) -> "PerturbationFunction":
        return PerturbationFunction({k: c * a for k, a in self.coeffs.items()})

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __repr__(self) -> str:
        return ",".join(f"{k}:{a:g}" for k, a in sorted(self.coeffs.items())) or "0"


_FAMILIES = (
    # (coordinate functional, offset in units of pi, orientation, axis keying d)
    # A1: theta - gamma in 2pi Z, arc direction (1,1)*d, d keyed to gamma
    ((-1, 1), 0, 1, 0),
    # A2: gamma in pi + 2pi Z, arc direction (0,1)*d, d keyed to theta
    ((1, 0), 1, -1, 1),
    # A3: theta in pi + 2pi Z, arc direction (1,0)*d, d keyed to gamma
    ((0, 1), 1, 1, 0),
)


def _arc_sign_rules(pts: np.ndarray):
    """Yield (crossing point, sign) for every crossing with the dual arcs."""
    p0, p1 = pts[:-1], pts[1:]
    for (a, b), off, orient, key_axis in _FAMILIES:
        f0 = a * p0[:, 0] + b * p0[:, 1] - off * math.pi
        f1 = a * p1[:, 0] + b * p1[:, 1] - off * math.pi
        k0 = np.floor(f0 / TWO_PI)
        k1 = np.floor(f1 / TWO_PI)
        for idx in np.nonzero(k0 != k1)[0]:
            lo, hi = sorted((k0[idx], k1[idx]))
            step = 1.0 if f1[idx] > f0[idx] else -1.0
            for k in np.arange(lo + 1, hi + 1):
                lam = (k * TWO_PI - f0[idx]) / (f1[idx] - f0[idx])
                x = p0[idx] + lam * (p1[idx] - p0[idx])
                d = 1.0 if (x[key_axis] % TWO_PI) < math.pi else -1.0
                yield x, orient * d * step


def z_of_loop(vertices, tol: float = CORNER_TOL) -> int:
    """The class z of a loop given by a lifted polyline from x to g.x.

    Crossings with the three dual-arc families are counted with sign; a
    vertex lying exactly on an arc line is treated as lying just above it
    (a symbolic perturbation of the arc lines), so exactly-degenerate inputs
    give a well-defined answer.
    """
    pts = np.asarray(vertices, dtype=float)
    total = 0
    for x, sign in _arc_sign_rules(pts):
        if is_corner_lift(x, tol):
            raise NonTransverseCrossing(f"loop passes through the corner lift {tuple(x)}")
        total += int(sign)
    return total % 4


def z_of_loop_exact(vertices) -> int:
    """z_of_loop for vertices given exactly as rational multiples of pi.

    ``vertices`` holds pairs of Fractions (or ints) meaning (gamma/pi, theta/pi).
    """
    pts = [(Fraction(a), Fraction(b)) for a, b in vertices]
    total = 0
    for u, w in zip(pts[:-1], pts[1:]):
        for (a, b), off, orient, key_axis in _FAMILIES:
            f0 = a * u[0] + b * u[1] - off
            f1 = a * w[0] + b * w[1] - off
            k0, k1 = math.floor(f0 / 2), math.floor(f1 / 2)
            if k0 == k1:
                continue
            step = 1 if f1 > f0 else -1
            for k in range(min(k0, k1) + 1, max(k0, k1) + 1):
                lam = (2 * k - f0) / (f1 - f0)
                x = (u[0] + lam * (w[0] - u[0]), u[1] + lam * (w[1] - u[1]))
                if x[0].denominator == 1 and x[1].denominator == 1:
                    raise NonTransverseCrossing(f"loop passes through the corner lift {x} (units of pi)")
                d = 1 if x[key_axis] % 2 < 1 else -1
                total += orient * d * step
    return total % 4


def winding_numbers(vertices, tol: float = CORNER_TOL) -> dict[tuple[int, int], int]:
    """Winding numbers of a closed polyline about lattice points.

    Keys are integer pairs (i, j) standing for the lattice point (i*pi, j*pi);
    only nonzero windings are returned.
    """
    pts = np.asarray(vertices, dtype=float)
    if np.linalg.norm(pts[0] - pts[-1]) > 1e-7:
        raise NonClosedLoop("loop closure is not the identity")
    lo = np.floor(pts.min(axis=0) / math.pi).astype(int)
    hi = np.ceil(pts.max(axis=0) / math.pi).astype(int)
    ii, jj = np.meshgrid(np.arange(lo[0], hi[0] + 1), np.arange(lo[1], hi[1] + 1), indexing="ij")
    lat = np.stack([ii.ravel(), jj.ravel()], axis=1)
    w = winding_about(pts, lat * math.pi)
    return {(int(a), int(b)): int(k) for (a, b), k in zip(lat, w) if k != 0}


def winding_about(pts: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Winding number of the closed polyline ``pts`` about each target point."""
    pts = np.asarray(pts, dtype=float)
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    a = pts[:-1][None, :, :]
    b = pts[1:][None, :, :]
    t = targets[:, None, :]
    cross = (b[..., 0] - a[..., 0]) * (t[..., 1] - a[..., 1]) - (t[..., 0] - a[..., 0]) * (b[..., 1] - a[..., 1])
    up = (a[..., 1] <= t[..., 1]) & (b[..., 1] > t[..., 1]) & (cross > 0)
    down = (a[..., 1] > t[..., 1]) & (b[..., 1] <= t[..., 1]) & (cross < 0)
    return up.sum(axis=1) - down.sum(axis=1)


def apply_isotopy_cg(curve, g: PerturbationFunction, s: float):
    """The isotopy (gamma, theta) -> (gamma, theta + s*g(gamma)) at time s."""
    return curve.map_vertices(lambda v: np.stack([v[:, 0], v[:, 1] + s * g(v[:, 0])], axis=1))


def apply_shear(curve, f: PerturbationFunction):
    """(gamma, theta) -> (gamma, theta + 2 f(gamma + pi))."""
    return curve.map_vertices(lambda v: np.stack([v[:, 0], v[:, 1] + 2.0 * f(v[:, 0] + math.pi)], axis=1))


def pq_shear_map(p: int, q: int, phi: PerturbationFunction):
    if math.gcd(p, q) != 1:
        raise NonCoprime(f"gcd({p},{q}) != 1")

    def fn(v):
        v = np.asarray(v, dtype=float)
        w = phi(p * v[..., 0] + q * v[..., 1])
        return np.stack([v[..., 0] - q * w, v[..., 1] + p * w], axis=-1)

    return fn


def apply_pq_shear(curve, p: int, q: int, phi: PerturbationFunction):
    """(gamma, theta) -> (gamma - q phi(p gamma + q theta), theta + p phi(p gamma + q theta))."""
    return curve.map_vertices(pq_shear_map(p, q, phi))
