"""2-bridge knots: the linear arc t -> (qt, (q-p)t) and its exactly graded complex.

All coordinates here are rational multiples of pi, stored as Fractions in
units of pi.  The perturbed figure-eight enters only through its lift that
passes the corner lift (0, 0): within a thin strip along the diagonal it sits
at theta - gamma = -2 e cos(pi c) at horizontal position c, with e a symbolic
small positive rational.  Near the corner this is the line theta = gamma - 2e.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..curves import LiftedCurve, figure_eight, intersections
from ..errors import InvalidSpec, NonCoprime, NonTransverse
from ..floer import ChainComplexZ4, ComponentComplex, diagonal_labels, r_plus
from ..maslov import GradingAssignment
from ..pillowcase import PerturbationFunction, z_of_loop_exact
from .invariants import signature_two_bridge


@dataclass(frozen=True)
class TwoBridgeSpec:
    p: int
    q: int

    def __post_init__(self):
        if self.p <= 0 or self.p % 2 == 0:
            raise InvalidSpec(f"p={self.p} must be odd and positive")
        if math.gcd(self.p, self.q) != 1:
            raise NonCoprime(f"gcd({self.p},{self.q}) != 1")

    @property
    def slope(self) -> Fraction:
        return Fraction(self.q - self.p, self.q)

    def signature(self) -> int:
        return signature_two_bridge(self.p, self.q)


def exact_vertices(spec: TwoBridgeSpec) -> list[tuple[Fraction, Fraction]]:
    """Vertices of the arc on t in [0, 1] (units of pi), edges shorter than pi/2."""
    n = 4 * max(abs(spec.q), abs(spec.q - spec.p))
    return [(Fraction(spec.q * k, n), Fraction((spec.q - spec.p) * k, n)) for k in range(n + 1)]


def two_bridge_curve(spec: TwoBridgeSpec) -> LiftedCurve:
    v = np.array([[float(a) * math.pi, float(b) * math.pi] for a, b in exact_vertices(spec)])
    return LiftedCurve.arc(v, label=f"K({spec.p},{spec.q})")


def _line_meet(base, direction, offset):
    """Point base + u*direction on the line theta - gamma = offset."""
    du = direction[1] - direction[0]
    u = (offset - (base[1] - base[0])) / du
    return (base[0] + u * direction[0], base[1] + u * direction[1])


def exact_gradings(spec: TwoBridgeSpec, signature: int | None = None) -> dict[str, int]:
    """Absolute Z/4 gradings of r+, x<l>+ and x<l>- from exact loop classes z."""
    p, q = spec.p, spec.q
    sigma = spec.signature() if signature is None else signature
    e = Fraction(1, 1000 * p * (abs(q) + p))
    direction = (Fraction(q), Fraction(q - p))
    # r+ sits where the arc leaves (0,0) and meets theta = gamma - 2e
    r0 = _line_meet((Fraction(0), Fraction(0)), direction, -2 * e)
    front_plus = p - 2 * q > 0  # r+ lies on the slope-below-one strand
    side = -1 if front_plus else 1
    out = {"r+": sigma % 4}
    for ell in range(1, (p - 1) // 2 + 1):
        a = Fraction(2 * q * ell, p)
        am = a % 2
        g = am if am <= 1 else 2 - am  # folded gamma of x_l in [0, 1]
        c = side * g
        # deck element h with h.(a, a') = (c, c): sigma_h = -1 iff the fold flipped
        flip = -1 if (am <= 1) != (c >= 0) else 1
        shift = (c - flip * a, c - flip * Fraction(2 * (q - p) * ell, p))
        assert shift[0].denominator == 1 and shift[1].denominator == 1 and shift[0] % 2 == 0 == shift[1] % 2
        hdir = (flip * direction[0], flip * direction[1])
        h_r0 = (flip * r0[0] + shift[0], flip * r0[1] + shift[1])
        below = abs(c) < Fraction(1, 2)
        P = _line_meet(h_r0, hdir, -2 * e if below else 2 * e)
        z = z_of_loop_exact([r0, P, h_r0])
        g_front = (sigma - z) % 4
        if front_plus:
            out[f"x{ell}+"], out[f"x{ell}-"] = g_front, (g_front - 1) % 4
        else:
            out[f"x{ell}-"], out[f"x{ell}+"] = g_front, (g_front + 1) % 4
    return out


def two_bridge_complex(spec: TwoBridgeSpec, eps: float = 0.1, g: PerturbationFunction | None = None,
                       signature: int | None = None) -> ChainComplexZ4:
    """Rank-p complex with exact gradings and zero differential.

    Generator positions come from the float intersection of the PL arc with
    the figure-eight; gradings come from ``exact_gradings``.
    """
    sigma = spec.signature() if signature is None else signature
    L0 = figure_eight(eps, g)
    L1 = two_bridge_curve(spec)
    gens = sorted(intersections(L0, L1), key=lambda x: (x.s1, x.s0))
    if len(gens) != spec.p:
        raise NonTransverse(f"expected {spec.p} generators, found {len(gens)}; reduce eps")
    anchor = r_plus(L1, gens)
    prefix = f"{L1.label}."
    labels = diagonal_labels(L0, L1, gens, anchor, prefix)
    values = {prefix + k: v for k, v in exact_gradings(spec, sigma).items()}
    if sorted(labels) != sorted(values):
        raise NonTransverse(f"generator labels {labels} do not match the exact model; reduce eps")
    grading = GradingAssignment({lab: values[lab] for lab in labels}, {L1.label: list(labels)},
                                {L1.label: {"generator": prefix + "r+", "value": sigma % 4,
                                            "provenance": "signature"}})
    comp = ComponentComplex(L1.label, L1, gens, labels, grading)
    return ChainComplexZ4([comp], {"L0": L0.label, "signature": sigma, "exact": True, "p": spec.p, "q": spec.q})
