"""Maslov indices against constant line fields, the triple index, and gradings.

Line directions are angles modulo pi.  Tangency with the reference line is
resolved by comparing against ``ell + NUDGE``: a direction exactly equal to
``ell`` counts as lying just clockwise of the reference, which reproduces
the small-delta convention for path endpoints.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .curves import IntersectionPoint, LiftedCurve
from .errors import ChainMismatch, DifferentComponents, EqualLines, UnknownGenerator
from .pillowcase import same_pillow_point, z_of_loop

ELL1 = math.pi / 4
NUDGE = 1e-7


class LineSlope(float):
    """A line direction as an angle normalized to [0, pi)."""

    def __new__(cls, angle: float):
        return super().__new__(cls, float(angle) % math.pi)

    @classmethod
    def of_vector(cls, v) -> "LineSlope":
        return cls(math.atan2(v[1], v[0]))


def _crossings(a_start: float, a_end: float, ell: float) -> int:
    ref = ell + NUDGE
    return math.floor((a_end - ref) / math.pi) - math.floor((a_start - ref) / math.pi)


def path_maslov(c: LiftedCurve, s_from: float, s_to: float, ell: float = ELL1) -> int:
    """Signed number of times the tangent line of c passes ell between the parameters."""
    return _crossings(c.unwrapped_angle(s_from), c.unwrapped_angle(s_to), ell)


def triple_index(l0: float, l1: float, ell: float = ELL1) -> int:
    """1 if the shortest clockwise rotation from l0 to l1 passes through ell, else 0."""
    a0 = float(l0) % math.pi
    sweep = (a0 - float(l1)) % math.pi
    if sweep < 1e-12 or sweep > math.pi - 1e-12:
        raise EqualLines(f"lines {l0} and {l1} coincide")
    return -_crossings(a0, a0 - sweep, ell)


def _tangent_line(c: LiftedCurve, s: float) -> float:
    return float(LineSlope(c.unwrapped_angle(s)))


def mas_ngon(paths, ell: float = ELL1) -> int:
    """Maslov index of a cyclic chain of paths (curve, s_from, s_to).

    Path k runs along curve L_k from the corner p_k to p_{k+1}; the polygon is
    traversed so that the chain is its clockwise boundary.
    """
    n = len(paths)
    total = 0
    for k, (curve, s_a, s_b) in enumerate(paths):
        prev_curve, _, prev_end = paths[k - 1]
        if not same_pillow_point(prev_curve.point(prev_end), curve.point(s_a)):
            raise ChainMismatch(f"path {k - 1} does not end where path {k} starts")
        total += path_maslov(curve, s_a, s_b, ell)
        total += triple_index(_tangent_line(curve, s_a), _tangent_line(prev_curve, prev_end), ell)
    del n
    return 1 - total


def polygon_chain(vertices, overshoot: float = 0.1) -> list:
    """mas_ngon input for a straight-edged polygon listed clockwise.

    Edge k becomes a two-vertex path extended by ``overshoot`` of its length
    past both corners, so each corner is a transverse crossing.
    """
    v = np.asarray(vertices, dtype=float)
    n = len(v)
    a = overshoot / (1 + 2 * overshoot)
    chain = []
    for k in range(n):
        p, q = v[k], v[(k + 1) % n]
        seg = LiftedCurve.path([p - overshoot * (q - p), q + overshoot * (q - p)], label=f"L{k}")
        chain.append((seg, a, 1 - a))
    return chain


def load_chain(path) -> list:
    """A polygon fixture: ``{"curves": [...], "chain": [[curve index, s_from, s_to], ...]}``."""
    import json
    from pathlib import Path

    data = json.loads(Path(path).read_text())
    curves = [LiftedCurve.from_json(c) for c in data["curves"]]
    return [(curves[i], float(a), float(b)) for i, a, b in data["chain"]]


def dump_chain(chain) -> dict:
    curves, index, rows = [], {}, []
    for c, a, b in chain:
        if id(c) not in index:
            index[id(c)] = len(curves)
            curves.append(c.to_json())
        rows.append([index[id(c)], a, b])
    return {"curves": curves, "chain": rows}


def grading_loop(L0: LiftedCurve, L1: LiftedCurve, p: IntersectionPoint, q: IntersectionPoint, j: int = 0, k: int = 0):
    """Lifted loop alpha0 * alpha1 together with its parameter ranges.

    alpha0 runs on L0 from p to q (ending j periods further along), alpha1 on
    L1 from q back to p (k periods further along).  Returns
    (vertices, (s0_from, s0_to), (s1_from, s1_to), deck) where ``deck`` places
    the L1 lift used by alpha1.
    """
    s0_to = q.s0 + j * L0.period
    s1_to = p.s1 + k * L1.period
    seg0 = L0.subpath(p.s0, s0_to)
    place = (L0.closure ** j) * q.lift_offset if L0.is_closed else q.lift_offset
    seg1 = place.apply(L1.subpath(q.s1, s1_to))
    loop = np.vstack([seg0, seg1[1:]])
    return loop, (p.s0, s0_to), (q.s1, s1_to), place


def _nearest_wrap(s_from: float, s_to: float, period: int, closed: bool) -> int:
    if not closed:
        return 0
    d = s_to - s_from
    return int(round(-d / period)) if abs(d) > period / 2 else 0


def relative_grading(p: IntersectionPoint, q: IntersectionPoint, L0: LiftedCurve, L1: LiftedCurve,
                     j: int | None = None, k: int | None = None) -> int:
    """gr(p, q) in Z/4 from Maslov indices, triple indices and the class z."""
    if p is q or (p.s0 == q.s0 and p.s1 == q.s1):
        return 0
    if j is None:
        j = _nearest_wrap(p.s0, q.s0, L0.period, L0.is_closed)
    if k is None:
        k = _nearest_wrap(q.s1, p.s1, L1.period, L1.is_closed)
    loop, (a0, b0), (a1, b1), _ = grading_loop(L0, L1, p, q, j, k)
    mu0 = path_maslov(L0, a0, b0)
    mu1 = path_maslov(L1, a1, b1)
    tau_p = triple_index(_tangent_line(L0, p.s0), _tangent_line(L1, p.s1))
    tau_q = triple_index(_tangent_line(L0, q.s0), _tangent_line(L1, q.s1))
    z = z_of_loop(loop)
    return (mu0 + mu1 + tau_p - tau_q + z) % 4


@dataclass
class GradingAssignment:
    """Absolute Z/4 gradings per component, with the anchor that fixed them."""

    values: dict = field(default_factory=dict)  # generator id -> Z/4
    components: dict = field(default_factory=dict)  # component -> list of generator ids
    anchors: dict = field(default_factory=dict)  # component -> {generator, value, provenance}

    def component_of(self, gen) -> object:
        for comp, gens in self.components.items():
            if gen in gens:
                return comp
        raise UnknownGenerator(gen)


def anchor_absolute(grading: GradingAssignment, component, generator, value: int,
                    provenance: str = "user") -> GradingAssignment:
    """Shift a component's gradings so that ``generator`` sits in degree ``value``."""
    gens = grading.components.get(component)
    if gens is None or generator not in gens:
        raise UnknownGenerator(f"{generator!r} is not a generator of component {component!r}")
    shift = (value - grading.values[generator]) % 4
    values = dict(grading.values)
    for g in gens:
        values[g] = (values[g] + shift) % 4
    anchors = dict(grading.anchors)
    anchors[component] = {"generator": generator, "value": value % 4, "provenance": provenance}
    return GradingAssignment(values, dict(grading.components), anchors)


def check_same_component(comp_p, comp_q) -> None:
    if comp_p != comp_q:
        raise DifferentComponents(f"{comp_p!r} vs {comp_q!r}")
