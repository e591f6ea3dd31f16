"""Immersed circles and proper arcs in the pillowcase, stored as lifted polylines.

A circle is stored as one period of its lift, ``v[0], ..., v[P]`` with
``v[P] = closure . v[0]``; the full lift is the union of the translates
``closure**k`` of that polyline.  Curve parameters are real numbers: the
integer part indexes an edge and the fractional part is the position along
it, and for circles ``s + P`` is the same domain point on the next lift.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import BadEpsilon, InvalidCurve, NonGenericVertex, NonIntegralDegree, NonTransverse
from .pillowcase import (
    IDENTITY,
    TWO_PI,
    DeckElement,
    PerturbationFunction,
    PillowPoint,
    canonicalize,
    is_corner_lift,
    winding_numbers,
    z_of_loop,
)

TRANSVERSE_TOL = 1e-6


@dataclass
class LiftedCurve:
    kind: str  # "circle", "arc", or "path" (a plain polyline, used for polygons and tests)
    vertices: np.ndarray
    closure: DeckElement = IDENTITY
    label: str = ""
    limiting_slopes: tuple[float, float] | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    # construction -------------------------------------------------------
    @classmethod
    def circle(cls, vertices, closure: DeckElement, label: str = "") -> "LiftedCurve":
        v = np.array(vertices, dtype=float)
        if np.linalg.norm(v[-1] - closure.apply(v[0])) > 1e-6:
            v = np.vstack([v, closure.apply(v[0])])
        v[-1] = closure.apply(v[0])
        curve = cls("circle", v, closure, label)
        curve.validate()
        return curve

    @classmethod
    def arc(cls, vertices, label: str = "") -> "LiftedCurve":
        v = np.array(vertices, dtype=float)
        slopes = (_slope(v[1] - v[0]), _slope(v[-1] - v[-2]))
        curve = cls("arc", v, IDENTITY, label, slopes)
        curve.validate()
        return curve

    @classmethod
    def path(cls, vertices, label: str = "") -> "LiftedCurve":
        return cls("path", np.array(vertices, dtype=float), IDENTITY, label)

    def validate(self) -> None:
        v = self.vertices
        if len(v) < 2:
            raise InvalidCurve("a curve needs at least two vertices")
        steps = np.linalg.norm(np.diff(v, axis=0), axis=1)
        if np.any(steps <= 0):
            raise InvalidCurve(f"{self.label}: repeated consecutive vertices")
        interior = v[1:-1] if self.kind == "arc" else v
        for pt in interior:
            if is_corner_lift(pt, 1e-9):
                raise InvalidCurve(f"{self.label}: vertex {tuple(pt)} sits on a lattice point")
        if self.kind == "arc" and not (is_corner_lift(v[0], 1e-9) and is_corner_lift(v[-1], 1e-9)):
            raise InvalidCurve(f"{self.label}: arc endpoints must be corner lifts")
        self.turnings()

    def map_vertices(self, fn) -> "LiftedCurve":
        new = np.asarray(fn(self.vertices.copy()), dtype=float)
        if self.kind == "circle":
            return LiftedCurve.circle(new, self.closure, self.label)
        if self.kind == "arc":
            return LiftedCurve.arc(new, self.label)
        return LiftedCurve.path(new, self.label)

    # geometry -----------------------------------------------------------
    @property
    def period(self) -> int:
        """Number of edges in one period (or in the whole arc)."""
        return len(self.vertices) - 1

    @property
    def is_closed(self) -> bool:
        return self.kind == "circle"

    def vertex(self, j: int) -> np.ndarray:
        if not self.is_closed:
            return self.vertices[j]
        k, r = divmod(j, self.period)
        return (self.closure ** k).apply(self.vertices[r])

    def edge_vector(self, i: int) -> np.ndarray:
        if not self.is_closed:
            return self.vertices[i + 1] - self.vertices[i]
        k, r = divmod(i, self.period)
        e = self.vertices[r + 1] - self.vertices[r]
        return e * (self.closure.sigma ** (k % 2)) if k % 2 else e

    def point(self, s: float) -> np.ndarray:
        i = math.floor(s)
        if not self.is_closed:
            i = min(max(i, 0), self.period - 1)
        frac = s - i
        a = self.vertex(i)
        return a + frac * self.edge_vector(i)

    def turnings(self) -> np.ndarray:
        """Signed turning angle at each vertex; index k is the turn into edge k.

        For circles index 0 holds the seam turn (edge P-1 into closure . edge 0).
        """
        if "turn" in self._cache:
            return self._cache["turn"]
        v = self.vertices
        e = np.diff(v, axis=0)
        if self.is_closed:
            prev = np.vstack([e[-1] * self.closure.sigma, e[:-1]])
            nxt = e * 1.0
            nxt_prev = prev
            turn = np.arctan2(_cross(nxt_prev, nxt), np.sum(nxt_prev * nxt, axis=1))
            turn[0] = math.atan2(_cross1(e[-1], self.closure.sigma * e[0]), float(e[-1] @ (self.closure.sigma * e[0])))
        else:
            turn = np.zeros(len(e))
            if len(e) > 1:
                turn[1:] = np.arctan2(_cross(e[:-1], e[1:]), np.sum(e[:-1] * e[1:], axis=1))
        bad = np.nonzero(np.abs(turn) >= math.pi / 2)[0]
        if len(bad):
            raise NonGenericVertex(f"{self.label}: turning of {turn[bad[0]]:.3f} rad at vertex {bad[0]}")
        self._cache["turn"] = turn
        return turn

    def _edge_angles(self) -> tuple[np.ndarray, float]:
        if "angles" in self._cache:
            return self._cache["angles"]
        turn = self.turnings()
        e0 = self.vertices[1] - self.vertices[0]
        base = math.atan2(e0[1], e0[0])
        ang = base + np.concatenate([[0.0], np.cumsum(turn[1:])])
        rot = float(ang[-1] + turn[0] - ang[0]) if self.is_closed else 0.0
        self._cache["angles"] = (ang, rot)
        return ang, rot

    def unwrapped_angle(self, s: float) -> float:
        """Continuous tangent angle along the curve.

        Inside an edge it is the edge direction; at a vertex it is the bisector
        of the adjacent edges; at arc endpoints it is the end edge direction.
        """
        ang, rot = self._edge_angles()
        turn = self.turnings()
        k = 0
        if self.is_closed:
            k, r = divmod(s, self.period)
            k = int(k)
        else:
            r = min(max(s, 0.0), float(self.period))
        i = int(math.floor(r))
        if r == i:
            if self.is_closed:
                i = i % self.period
                return float(ang[i] - turn[i] / 2 + k * rot)
            if i == 0:
                return float(ang[0])
            if i >= self.period:
                return float(ang[-1])
            return float(ang[i] - turn[i] / 2)
        return float(ang[i] + k * rot)

    def tangent(self, s: float) -> np.ndarray:
        """Unit edge direction at a non-vertex parameter (vector, not a line)."""
        i = math.floor(s)
        if not self.is_closed:
            i = min(max(i, 0), self.period - 1)
        e = self.edge_vector(i)
        return e / np.linalg.norm(e)

    def subpath(self, s_from: float, s_to: float) -> np.ndarray:
        """Lifted polyline from parameter s_from to s_to (either direction)."""
        pts = [self.point(s_from)]
        if s_to >= s_from:
            js = range(math.floor(s_from) + 1, math.ceil(s_to))
        else:
            js = range(math.ceil(s_from) - 1, math.floor(s_to), -1)
        pts.extend(self.vertex(j) for j in js)
        pts.append(self.point(s_to))
        out = np.array(pts)
        keep = np.concatenate([[True], np.linalg.norm(np.diff(out, axis=0), axis=1) > 1e-13])
        return out[keep]

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    # serialization ------------------------------------------------------
    def to_json(self) -> dict:
        d = {
            "kind": self.kind,
            "label": self.label,
            "vertices": [[float(a), float(b)] for a, b in self.vertices],
        }
        if self.is_closed:
            d["closure"] = self.closure.to_json()
        return d

    @classmethod
    def from_json(cls, d: dict) -> "LiftedCurve":
        kind = d["kind"]
        if kind == "circle":
            return cls.circle(d["vertices"], DeckElement.from_json(d["closure"]), d.get("label", ""))
        if kind == "arc":
            return cls.arc(d["vertices"], d.get("label", ""))
        if kind == "path":
            return cls.path(d["vertices"], d.get("label", ""))
        raise InvalidCurve(f"unknown curve kind {kind!r}")


def _cross(a, b):
    return a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]


def _cross1(a, b):
    return float(a[0] * b[1] - a[1] * b[0])


def _slope(e) -> float:
    return float(e[1] / e[0]) if e[0] != 0 else math.inf


def load_curves(path) -> list[LiftedCurve]:
    data = json.loads(Path(path).read_text())
    return [LiftedCurve.from_json(c) for c in data["curves"]]


def dump_curves(curves, path=None) -> str:
    text = json.dumps({"curves": [c.to_json() for c in curves]}, indent=1)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


# ---------------------------------------------------------------------------
# the figure-eight family


def figure_eight(eps: float = 0.1, g: PerturbationFunction | None = None, samples: int = 512) -> LiftedCurve:
    """The immersed circle t -> (t + eps sin t + pi/2, t - eps sin t + pi/2 + g(...))."""
    if eps <= 0:
        raise BadEpsilon(f"epsilon must be positive, got {eps}")
    if samples < 64:
        raise ValueError("samples must be at least 64")
    g = g or PerturbationFunction()
    t = np.linspace(0.0, TWO_PI, samples + 1)
    gamma = t + eps * np.sin(t) + math.pi / 2
    theta = t - eps * np.sin(t) + math.pi / 2 + g(gamma)
    v = np.stack([gamma, theta], axis=1)
    return LiftedCurve.circle(v, DeckElement(1, 1, 1), label=f"L0(eps={eps:g},g={g!r})")


# ---------------------------------------------------------------------------
# intersections


@dataclass(frozen=True)
class IntersectionPoint:
    s0: float
    s1: float
    point: PillowPoint
    lift_offset: DeckElement  # curve0.point(s0) == lift_offset . curve1.point(s1)
    angle: float
    label: str = ""

    def key(self) -> tuple:
        return (round(self.s0, 9), round(self.s1, 9))


def _edge_arrays(c: LiftedCurve):
    v = c.vertices
    return v[:-1], v[1:]


def _candidate_pairs(a0, b0, a1, b1):
    """Pairs (i, j, offset) whose edges overlap modulo 2*pi*Z^2, via a torus grid."""
    lens = np.concatenate([np.linalg.norm(b0 - a0, axis=1), np.linalg.norm(b1 - a1, axis=1)])
    longest = float(lens.max()) if len(lens) else 1.0
    if longest >= math.pi:
        raise InvalidCurve("edges longer than pi are not supported; resample the curve")
    grid = int(min(256, max(4, TWO_PI / max(longest, 1e-3))))
    h = TWO_PI / grid

    def cells(a, b):
        lo = np.floor(np.minimum(a, b) / h).astype(np.int64)
        hi = np.floor(np.maximum(a, b) / h).astype(np.int64)
        return lo, hi

    lo1, hi1 = cells(a1, b1)
    table: dict[tuple[int, int], list[int]] = {}
    for j in range(len(a1)):
        for cx in range(lo1[j, 0], hi1[j, 0] + 1):
            for cy in range(lo1[j, 1], hi1[j, 1] + 1):
                table.setdefault((cx % grid, cy % grid), []).append(j)
    lo0, hi0 = cells(a0, b0)
    pairs = set()
    mid0 = (a0 + b0) / 2
    mid1 = (a1 + b1) / 2
    for i in range(len(a0)):
        for cx in range(lo0[i, 0], hi0[i, 0] + 1):
            for cy in range(lo0[i, 1], hi0[i, 1] + 1):
                for j in table.get((cx % grid, cy % grid), ()):
                    off = np.round((mid0[i] - mid1[j]) / TWO_PI).astype(int)
                    pairs.add((i, j, int(off[0]), int(off[1])))
    return sorted(pairs)


def _orient(a, b, c):
    return (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])


def _sgn(x):
    return np.where(x >= 0, 1, -1)


def raw_crossings(c0: LiftedCurve, c1: LiftedCurve, exclude_trivial: bool = False):
    """All (i, j, g, lam0, lam1, sin_angle) with edge_i(c0) meeting g . edge_j(c1)."""
    a0, b0 = _edge_arrays(c0)
    out = []
    for sigma in (1, -1):
        a1 = sigma * c1.vertices[:-1]
        b1 = sigma * c1.vertices[1:]
        pairs = _candidate_pairs(a0, b0, a1, b1)
        if not pairs:
            continue
        arr = np.array(pairs)
        i, j, om, on = arr.T
        shift = TWO_PI * np.stack([om, on], axis=1)
        p, q = a0[i], b0[i]
        r, s = a1[j] + shift, b1[j] + shift
        o1, o2 = _orient(p, q, r), _orient(p, q, s)
        o3, o4 = _orient(r, s, p), _orient(r, s, q)
        hit = (_sgn(o1) != _sgn(o2)) & (_sgn(o3) != _sgn(o4))
        for k in np.nonzero(hit)[0]:
            g = DeckElement(int(om[k]), int(on[k]), sigma)
            ii, jj = int(i[k]), int(j[k])
            if exclude_trivial and _trivial_self_pair(c0, ii, jj, g):
                continue
            lam0 = float(o3[k] / (o3[k] - o4[k]))
            lam1 = float(o1[k] / (o1[k] - o2[k]))
            d0 = q[k] - p[k]
            d1 = s[k] - r[k]
            sin_angle = abs(_cross1(d0, d1)) / (np.linalg.norm(d0) * np.linalg.norm(d1))
            out.append((ii, jj, g, min(max(lam0, 0.0), 1.0), min(max(lam1, 0.0), 1.0), float(sin_angle)))
    return out


def _trivial_self_pair(c: LiftedCurve, i: int, j: int, g: DeckElement) -> bool:
    if g.is_identity and abs(i - j) <= 1:
        return True
    if c.is_closed:
        last = c.period - 1
        if (i, j) == (last, 0) and g == c.closure:
            return True
        if (i, j) == (0, last) and g == c.closure.inverse():
            return True
        if c.period == 1 and i == j:
            return True
    return False


def intersections(c0: LiftedCurve, c1: LiftedCurve, tol: float = TRANSVERSE_TOL) -> list[IntersectionPoint]:
    """Transverse crossings of c0 and c1 in the pillowcase, one per domain pair."""
    pts = []
    for i, j, g, lam0, lam1, sin_angle in raw_crossings(c0, c1):
        s0, s1 = i + lam0, j + lam1
        if sin_angle < tol:
            raise NonTransverse(f"crossing angle {sin_angle:.2e} at s0={s0:.6f}, s1={s1:.6f}")
        loc = c0.point(s0)
        pp, _ = canonicalize(loc)
        pts.append(IntersectionPoint(s0, s1, pp, g, math.asin(min(1.0, sin_angle))))
    pts.sort(key=lambda x: (x.s0, x.s1))
    return pts


# ---------------------------------------------------------------------------
# unobstructedness and restrictedness


@dataclass
class ObstructionReport:
    ok: bool
    fishtails: list = field(default_factory=list)
    self_crossings: int = 0
    degenerate: int = 0
    essential: bool = True


def check_unobstructed(c: LiftedCurve, tol: float = TRANSVERSE_TOL) -> ObstructionReport:
    """Detect fishtails: self-intersection subloops that are nullhomotopic in P*."""
    fishtails = []
    count = 0
    degenerate = 0
    for i, j, g, lam0, lam1, sin_angle in raw_crossings(c, c, exclude_trivial=True):
        sa, sb = i + lam0, j + lam1
        if sa >= sb:
            continue
        count += 1
        if sin_angle < tol:
            degenerate += 1
            continue
        # c(sa) = g . c(sb); the subloop sa -> sb has closure g^{-1}
        loops = [(sa, sb, g)]
        if c.is_closed:
            loops.append((sb, sa + c.period, c.closure * g))
        for start, end, h in loops:
            if h.is_identity and not winding_numbers(_closed(c.subpath(start, end))):
                fishtails.append((start, end))
    essential = True
    if c.is_closed and c.closure.is_identity:
        essential = bool(winding_numbers(_closed(c.vertices)))
    return ObstructionReport(not fishtails and essential, fishtails, count, degenerate, essential)


def _closed(pts: np.ndarray) -> np.ndarray:
    pts = np.array(pts)
    pts[-1] = pts[0] if np.linalg.norm(pts[-1] - pts[0]) < 1e-7 else pts[-1]
    return pts


@dataclass
class RestrictedReport:
    ok: bool
    maslov: int | None = None
    z: int | None = None
    reasons: list = field(default_factory=list)


def circle_maslov(c: LiftedCurve, ell: float = math.pi / 4) -> int:
    from .maslov import path_maslov

    return path_maslov(c, 0.5, 0.5 + c.period, ell)


def check_restricted(c: LiftedCurve) -> RestrictedReport:
    """Restricted-curve conditions: mu + z = 0 mod 4 for circles, proper-arc conditions for arcs."""
    reasons = []
    if c.kind == "circle":
        mu = circle_maslov(c)
        z = z_of_loop(c.vertices)
        if (mu + z) % 4:
            reasons.append(f"mu + z = {mu} + {z} is not 0 mod 4")
        return RestrictedReport(not reasons, mu, z, reasons)
    if c.kind != "arc":
        return RestrictedReport(False, reasons=["not a circle or arc"])
    v = c.vertices
    if not (is_corner_lift(v[0]) and is_corner_lift(v[-1])):
        reasons.append("endpoints are not corner lifts")
    if any(is_corner_lift(x) for x in v[1:-1]):
        reasons.append("interior vertex on a lattice point")
    for sl in c.limiting_slopes or ():
        if abs(sl - 1.0) < 1e-9:
            reasons.append("limiting slope equals 1")
    if not check_unobstructed(c).ok:
        reasons.append("arc has fishtails")
    return RestrictedReport(not reasons, reasons=reasons)


def vertical_degree(c: LiftedCurve, tol: float = 1e-6) -> int:
    if c.kind != "circle":
        raise InvalidCurve("vertical degree is defined for circles")
    d = abs(c.vertices[-1, 1] - c.vertices[0, 1]) / TWO_PI
    if abs(d - round(d)) > tol:
        raise NonIntegralDegree(f"vertical displacement {d:.6f} periods is not integral")
    return int(round(d))


def is_vertically_monotonic(c: LiftedCurve) -> bool:
    if c.kind != "circle":
        return False
    e = np.diff(c.vertices, axis=0)
    if np.any(np.abs(e[:, 1]) <= np.abs(e[:, 0])):
        return False
    strip = np.floor(c.vertices[:, 0] / math.pi)
    on_line = np.abs(c.vertices[:, 0] / math.pi - np.round(c.vertices[:, 0] / math.pi)) < 1e-12
    return bool(np.all(strip == strip[0]) and not np.any(on_line))
