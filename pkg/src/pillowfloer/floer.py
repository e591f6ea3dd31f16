"""Bigons, the F2 differential, and Z/4-graded homology of C(L0, L1).

A bigon from p to q for the ordered pair (L0, L1) is searched for in the
branched cover: its counterclockwise boundary runs along a lift of L0 from
p to q and back along a deck translate of L1 from q to p, and must close up
exactly in R^2.  Candidates are enumerated over the number of periods each
side winds (at most ``k_max`` extra periods).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import shapely

from .curves import TRANSVERSE_TOL, IntersectionPoint, LiftedCurve, intersections, is_vertically_monotonic, vertical_degree
from .errors import DifferentialNotSquareZero, NonTransverse, NotMonotonic, UnknownGenerator, WindowExhausted
from .maslov import GradingAssignment, anchor_absolute, mas_ngon, relative_grading
from .pillowcase import DeckElement, winding_about

log = logging.getLogger(__name__)

EMBEDDED = "EmbeddedDisk"
IMMERSED = "ImmersedGlued"


@dataclass(frozen=True)
class GradedRanks:
    ranks: tuple[int, int, int, int] = (0, 0, 0, 0)

    @classmethod
    def of(cls, *ranks) -> "GradedRanks":
        if len(ranks) == 1:
            ranks = tuple(ranks[0])
        return cls(tuple(int(r) for r in ranks))

    def __add__(self, other: "GradedRanks") -> "GradedRanks":
        return GradedRanks(tuple(a + b for a, b in zip(self.ranks, other.ranks)))

    def __getitem__(self, i: int) -> int:
        return self.ranks[i]

    @property
    def total(self) -> int:
        return sum(self.ranks)

    def shifted(self, k: int) -> "GradedRanks":
        """Ranks after raising every grading by k."""
        return GradedRanks(tuple(self.ranks[(i - k) % 4] for i in range(4)))

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.ranks)) + ")"


@dataclass
class BigonCertificate:
    source: str  # generator label of p
    target: str  # generator label of q
    alpha0: tuple[float, float]  # L0 parameters, p to q
    alpha1: tuple[float, float]  # L1 parameters, q to p
    deck: DeckElement  # places the L1 lift carrying alpha1
    boundary_loop: np.ndarray
    interior_class: str
    maslov: int = 1

    def to_json(self) -> dict:
        return {
            "from": self.source,
            "to": self.target,
            "alpha0": list(self.alpha0),
            "alpha1": list(self.alpha1),
            "deck": self.deck.to_json(),
            "interior_class": self.interior_class,
            "maslov": self.maslov,
        }


@dataclass
class ComponentComplex:
    label: str
    curve: LiftedCurve
    generators: list[IntersectionPoint]
    labels: list[str]
    grading: GradingAssignment
    bigons: list[BigonCertificate] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownGenerator(label) from None

    def degree(self, label: str) -> int:
        return self.grading.values[label]

    def differential(self) -> np.ndarray:
        """F2 matrix with entry (q, p) = parity of the bigons from p to q."""
        n = len(self.labels)
        d = np.zeros((n, n), dtype=np.uint8)
        for b in self.bigons:
            d[self.index(b.target), self.index(b.source)] ^= 1
        return d

    def chain_ranks(self) -> GradedRanks:
        r = [0, 0, 0, 0]
        for lab in self.labels:
            r[self.degree(lab)] += 1
        return GradedRanks(tuple(r))


@dataclass
class ChainComplexZ4:
    components: list[ComponentComplex]
    metadata: dict = field(default_factory=dict)

    def chain_ranks(self) -> GradedRanks:
        out = GradedRanks()
        for c in self.components:
            out = out + c.chain_ranks()
        return out

    def to_json(self) -> dict:
        comps = []
        for c in self.components:
            d = c.differential()
            comps.append({
                "label": c.label,
                "generators": [
                    {"label": lab, "grading": c.degree(lab), "s0": g.s0, "s1": g.s1,
                     "point": [g.point.gamma, g.point.theta]}
                    for lab, g in zip(c.labels, c.generators)
                ],
                "anchor": c.grading.anchors.get(c.label),
                "differential": [[c.labels[j], c.labels[i]] for i, j in zip(*np.nonzero(d))],
                "bigons": [b.to_json() for b in c.bigons],
                "warnings": list(c.warnings),
            })
        return {"components": comps, "metadata": dict(self.metadata)}


# ---------------------------------------------------------------------------
# F2 linear algebra


def f2_rank(m: np.ndarray) -> int:
    """Rank over F2 by Gaussian elimination on Python-int bit rows."""
    rows = [int("".join("1" if x else "0" for x in row), 2) for row in np.asarray(m, dtype=np.uint8) if row.any()]
    rank = 0
    while rows:
        pivot = max(rows)
        rows.remove(pivot)
        rank += 1
        top = pivot.bit_length() - 1
        rows = [r ^ pivot if (r >> top) & 1 else r for r in rows]
        rows = [r for r in rows if r]
    return rank


def _check_square_zero(d: np.ndarray, labels: list[str]) -> None:
    sq = (d.astype(np.int64) @ d.astype(np.int64)) % 2
    if sq.any():
        bad = [f"{labels[j]} -> {labels[i]}" for i, j in zip(*np.nonzero(sq))]
        raise DifferentialNotSquareZero("d^2 != 0 on " + ", ".join(bad))


def component_homology(c: ComponentComplex) -> GradedRanks:
    d = c.differential()
    _check_square_zero(d, c.labels)
    deg = np.array([c.degree(lab) for lab in c.labels], dtype=int)
    rank_out = []
    for i in range(4):
        cols = np.nonzero(deg == i)[0]
        rows = np.nonzero(deg == (i - 1) % 4)[0]
        rank_out.append(f2_rank(d[np.ix_(rows, cols)]) if len(rows) and len(cols) else 0)
    dims = [int(np.sum(deg == i)) for i in range(4)]
    return GradedRanks(tuple(dims[i] - rank_out[i] - rank_out[(i + 1) % 4] for i in range(4)))


def homology(cx: ChainComplexZ4) -> tuple[list[GradedRanks], GradedRanks]:
    """Per-component and total homology ranks."""
    per = [component_homology(c) for c in cx.components]
    total = GradedRanks()
    for h in per:
        total = total + h
    return per, total


def differential_rank(cx: ChainComplexZ4) -> int:
    return sum(f2_rank(c.differential()) for c in cx.components)


# ---------------------------------------------------------------------------
# bigons


def _windings_vanish(loop: np.ndarray) -> bool:
    lo = np.floor(loop.min(axis=0) / math.pi).astype(int)
    hi = np.ceil(loop.max(axis=0) / math.pi).astype(int)
    ii, jj = np.meshgrid(np.arange(lo[0], hi[0] + 1), np.arange(lo[1], hi[1] + 1), indexing="ij")
    lattice = np.stack([ii.ravel(), jj.ravel()], axis=1) * math.pi
    return not np.any(winding_about(loop, lattice))


def _signed_area(loop: np.ndarray) -> float:
    x, y = loop[:, 0], loop[:, 1]
    return 0.5 * float(np.sum(x[:-1] * y[1:] - x[1:] * y[:-1]))


def _direction(curve: LiftedCurve, s: float, forward: bool) -> np.ndarray:
    """Unit direction of travel leaving s (forward) or arriving at s (backward traversal)."""
    eps = 1e-9
    a = curve.point(s)
    b = curve.point(s + eps if forward else s - eps)
    d = b - a
    return d / np.linalg.norm(d)


def _corner_convex(incoming: np.ndarray, outgoing: np.ndarray) -> bool:
    return float(incoming[0] * outgoing[1] - incoming[1] * outgoing[0]) > 0


def _turning_number(loop: np.ndarray) -> float:
    e = np.diff(loop, axis=0)
    e = e[np.linalg.norm(e, axis=1) > 0]
    nxt = np.roll(e, -1, axis=0)
    turn = np.arctan2(e[:, 0] * nxt[:, 1] - e[:, 1] * nxt[:, 0], np.sum(e * nxt, axis=1))
    return float(turn.sum() / (2 * math.pi))


def _region_windings_nonnegative(loop: np.ndarray, n: int = 160) -> bool:
    lo, hi = loop.min(axis=0), loop.max(axis=0)
    xs = np.linspace(lo[0], hi[0], n + 2)[1:-1]
    ys = np.linspace(lo[1], hi[1], n + 2)[1:-1]
    pts = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1).reshape(-1, 2)
    return bool(np.all(winding_about(loop, pts) >= 0))


def _range_for(curve: LiftedCurve, k_max: int) -> range:
    return range(-k_max, k_max + 1) if curve.is_closed else range(0, 1)


def find_bigons(L0: LiftedCurve, L1: LiftedCurve, generators: list[IntersectionPoint], labels: list[str],
                gradings: dict | None = None, k_max: int = 2, tier2: bool = True,
                window: int | None = None) -> list[BigonCertificate]:
    """All bigons between the given generators, certified geometrically.

    The L0 side may wind up to ``k_max`` extra periods and the L1 side up to
    ``window`` (default ``k_max``).
    """
    window = k_max if window is None else window
    out = []
    n = len(generators)
    for a in range(n):
        for b in range(n):
            if a == b:
                continue
            p, q = generators[a], generators[b]
            if gradings is not None and (gradings[labels[a]] - gradings[labels[b]]) % 4 != 1:
                continue
            for j in _range_for(L0, k_max):
                c0j = L0.closure ** j
                need = (c0j * q.lift_offset).inverse() * p.lift_offset
                for k in _range_for(L1, window):
                    if L1.closure ** k != need:
                        continue
                    cert = _certify(L0, L1, p, q, labels[a], labels[b], j, k, tier2)
                    if cert is None:
                        continue
                    if (L0.is_closed and k_max and abs(j) == k_max) or (L1.is_closed and window and abs(k) == window):
                        raise WindowExhausted(
                            f"bigon {labels[a]} -> {labels[b]} found at the window edge (j={j}, k={k})")
                    out.append(cert)
    return out


def _certify(L0, L1, p, q, lab_p, lab_q, j, k, tier2):
    s0_to = q.s0 + j * L0.period
    s1_to = p.s1 + k * L1.period
    if s0_to == p.s0 or s1_to == q.s1:
        return None
    place = (L0.closure ** j) * q.lift_offset
    seg0 = L0.subpath(p.s0, s0_to)
    seg1 = place.apply(L1.subpath(q.s1, s1_to))
    loop = np.vstack([seg0, seg1[1:]])
    if np.linalg.norm(loop[-1] - loop[0]) > 1e-7:
        return None
    loop[-1] = loop[0]
    if _signed_area(loop) <= 0:
        return None
    # convex corners: the boundary turns left at q and at p
    fwd0 = s0_to > p.s0
    fwd1 = s1_to > q.s1
    sig = place.sigma
    in_q = _direction(L0, s0_to, not fwd0) * -1
    out_q = sig * _direction(L1, q.s1, fwd1)
    in_p = sig * _direction(L1, s1_to, not fwd1) * -1
    out_p = _direction(L0, p.s0, fwd0)
    if not (_corner_convex(in_q, out_q) and _corner_convex(in_p, out_p)):
        return None
    if not _windings_vanish(loop):
        return None
    ring = shapely.LinearRing(loop)
    if ring.is_simple:
        kind = EMBEDDED
    elif tier2 and abs(_turning_number(loop) - 1.0) < 1e-6 and _region_windings_nonnegative(loop):
        kind = IMMERSED
    else:
        return None
    mas = mas_ngon([(L0, s0_to, p.s0), (L1, s1_to, q.s1)])
    if mas != 1:
        return None
    return BigonCertificate(lab_p, lab_q, (p.s0, s0_to), (q.s1, s1_to), place, loop, kind, mas)


# ---------------------------------------------------------------------------
# complexes


def _default_labels(curve: LiftedCurve, gens: list[IntersectionPoint], prefix: str) -> list[str]:
    return [f"{prefix}g{i}" for i in range(len(gens))]


def grade_component(L0: LiftedCurve, L1: LiftedCurve, gens: list[IntersectionPoint], labels: list[str],
                    component: str) -> GradingAssignment:
    """Relative gradings, normalized so the first generator sits in degree 0."""
    values = {}
    if gens:
        base = gens[0]
        for g, lab in zip(gens, labels):
            values[lab] = relative_grading(g, base, L0, L1)
    anchors = {component: {"generator": labels[0], "value": 0, "provenance": "relative"}} if gens else {}
    return GradingAssignment(values, {component: list(labels)}, anchors)


def _r_plus_end(L1: LiftedCurve) -> float | None:
    """Parameter of the arc end at a corner of class (0, 0), else (1, 1)."""
    if L1.kind != "arc":
        return None
    ends = [0.0, float(L1.period)]
    cls = [tuple(np.mod(np.round(L1.vertices[i] / math.pi).astype(int), 2)) for i in (0, -1)]
    for which in ((0, 0), (1, 1)):
        for end, c in zip(ends, cls):
            if c == which:
                return end
    return None


def r_plus(L1: LiftedCurve, gens: list[IntersectionPoint]) -> int | None:
    """Index of the generator nearest the arc end at the corner (0, 0)."""
    end = _r_plus_end(L1)
    if end is None or not gens:
        return None
    return int(np.argmin([abs(g.s1 - end) for g in gens]))


def diagonal_labels(L0: LiftedCurve, L1: LiftedCurve, gens: list[IntersectionPoint], anchor: int | None,
                    prefix: str = "") -> list[str]:
    """Labels x<l>+ / x<l>- keyed by the diagonal crossing each generator sits beside.

    Crossings of L1 with the diagonal are numbered along L1 starting from the
    r+ end; the sign records whether L0 has slope below (+) or above (-) one
    at the generator.  Falls back to plain indices if the pairing is ambiguous.
    """
    diag = LiftedCurve.arc(np.array([[0.0, 0.0], [math.pi / 2, math.pi / 2], [math.pi, math.pi]]), "diagonal")
    try:
        xs = sorted(x.s1 for x in intersections(diag, L1))
    except Exception:  # noqa: BLE001 - labels are cosmetic
        xs = []
    end = _r_plus_end(L1)
    if end is not None and end > 0:
        order = lambda s: L1.period - s  # noqa: E731
    else:
        order = lambda s: s  # noqa: E731
    xs = sorted(xs, key=order)
    first = 1 if L1.kind == "arc" else 0

    def steepness(g):
        t = L0.tangent(g.s0)
        return abs(t[1]) / max(abs(t[0]), 1e-300)

    near = {i: int(np.argmin([abs(g.s1 - s) for s in xs])) for i, g in enumerate(gens) if xs and i != anchor}
    labels = []
    for i, g in enumerate(gens):
        if i == anchor:
            labels.append(prefix + "r+")
            continue
        if not xs:
            labels.append(f"{prefix}g{i}")
            continue
        mates = [j for j, n in near.items() if n == near[i] and j != i]
        if len(mates) == 1:
            # both strands can be near slope one; compare the pair instead
            sign = "+" if steepness(g) < steepness(gens[mates[0]]) else "-"
        else:
            sign = "+" if steepness(g) < 1 else "-"
        labels.append(f"{prefix}x{near[i] + first}{sign}")
    if len(set(labels)) != len(labels):
        labels = [prefix + ("r+" if i == anchor else f"g{i}") for i in range(len(gens))]
    return labels


def _rel_values(L0: LiftedCurve, L1: LiftedCurve, gens: list[IntersectionPoint]) -> list[int]:
    return [relative_grading(g, gens[0], L0, L1) for g in gens] if gens else []


def _match(L0: LiftedCurve, L1: LiftedCurve, old: list[IntersectionPoint], new: list[IntersectionPoint],
           tol: float) -> dict[int, int]:
    """Mutual nearest neighbours (new index -> old index) between nearby generator sets."""
    def dist(a, b):
        ds0 = abs(a.s0 - b.s0) % L0.period
        ds0 = min(ds0, L0.period - ds0) / L0.period
        return float(np.linalg.norm(L1.point(a.s1) - L1.point(b.s1))) + ds0

    if not old or not new:
        return {}
    d = np.array([[dist(a, b) for b in old] for a in new])
    out = {}
    for i in range(len(new)):
        j = int(np.argmin(d[i]))
        if d[i, j] < tol and int(np.argmin(d[:, j])) == i:
            out[i] = j
    return out


def track_r_plus(L0_at, L1: LiftedCurve, eps: float, eps_ref: float = 0.02, step: float = 0.01,
                 tol: float = 0.15) -> tuple[dict, int | None]:
    """Gradings relative to r+ on the arc L1, carried from eps_ref up to eps.

    r+ is only guaranteed to be the near-corner intersection for small eps;
    at larger eps it may cancel against a neighbour.  Generators that persist
    across a small change of eps keep their grading, so the gradings found at
    eps_ref are transported step by step.  Returns ({generator key: grading
    with r+ in degree 0}, index of r+ at eps or None if it did not survive).
    """
    if eps <= eps_ref:
        levels = [eps]
    else:
        n = max(1, math.ceil((eps - eps_ref) / step - 1e-9))
        levels = [eps_ref + (eps - eps_ref) * i / n for i in range(n + 1)]
    L0 = L0_at(levels[0])
    gens = sorted(intersections(L0, L1), key=lambda g: (g.s1, g.s0))
    r_idx = r_plus(L1, gens)
    if r_idx is None:
        return {}, None
    rel = _rel_values(L0, L1, gens)
    known = [(v - rel[r_idx]) % 4 for v in rel]
    for e in levels[1:]:
        L0 = L0_at(e)
        new = sorted(intersections(L0, L1), key=lambda g: (g.s1, g.s0))
        pairs = _match(L0, L1, gens, new, tol)
        rel = _rel_values(L0, L1, new)
        shifts = {(known[j] - rel[i]) % 4 for i, j in pairs.items()}
        if len(shifts) != 1:
            raise NonTransverse(f"cannot transport gradings to eps={e:g}: shifts {sorted(shifts)}")
        shift = shifts.pop()
        known = [(v + shift) % 4 for v in rel]
        r_idx = next((i for i, j in pairs.items() if j == r_idx), None) if r_idx is not None else None
        gens = new
    return {g.key(): v for g, v in zip(gens, known)}, r_idx


def build_component(L0: LiftedCurve, L1: LiftedCurve, label: str, signature: int | None = None,
                    k_max: int = 2, tier2: bool = True, track=None, window: int | None = None,
                    tol: float = TRANSVERSE_TOL) -> ComponentComplex:
    """One block of the complex.

    ``track = (L0_at, eps)`` anchors an arc by transporting r+ from small eps
    (see ``track_r_plus``); otherwise r+ is the generator nearest the corner.
    """
    gens = intersections(L0, L1, tol)
    gens.sort(key=lambda g: (g.s1, g.s0))
    anchor = r_plus(L1, gens)
    transported = None
    if track is not None and anchor is not None and signature is not None:
        transported, anchor = track_r_plus(track[0], L1, track[1])
    prefix = f"{label}." if label else ""
    labels = diagonal_labels(L0, L1, gens, anchor, prefix)
    grading = grade_component(L0, L1, gens, labels, label)
    if transported:
        lab0 = labels[0]
        grading = anchor_absolute(grading, label, lab0, (signature + transported[gens[0].key()]) % 4,
                                  "signature, transported from small eps")
        if anchor is None:
            grading.anchors[label]["note"] = "r+ cancelled before reaching this eps"
    elif anchor is not None and signature is not None:
        grading = anchor_absolute(grading, label, labels[anchor], signature % 4, "signature")
    comp = ComponentComplex(label, L1, gens, labels, grading)
    comp.bigons = find_bigons(L0, L1, gens, labels, grading.values, k_max, tier2, window)
    seen = {}
    for b in comp.bigons:
        seen[(b.source, b.target)] = seen.get((b.source, b.target), 0) + 1
    for pair, count in seen.items():
        if count > 1:
            comp.warnings.append(f"{count} bigon classes from {pair[0]} to {pair[1]}")
    _check_square_zero(comp.differential(), labels)
    return comp


def build_complex(L0: LiftedCurve, L1_components: list[LiftedCurve], signature: int | None = None,
                  k_max: int = 2, tier2: bool = True, labels: list[str] | None = None,
                  track=None, window: int | None = None, tol: float = TRANSVERSE_TOL) -> ChainComplexZ4:
    """The graded complex C(L0, L1), block diagonal over the components of L1."""
    labels = labels or [c.label or f"R{i}" for i, c in enumerate(L1_components)]
    comps = [build_component(L0, c, lab, signature, k_max, tier2, track, window, tol)
             for c, lab in zip(L1_components, labels)]
    return ChainComplexZ4(comps, {"L0": L0.label, "k_max": k_max, "window": k_max if window is None else window,
                                  "signature": signature})


def vertically_monotonic_fastpath(L0: LiftedCurve, L1: LiftedCurve) -> GradedRanks:
    """(d/2, d/2, d/2, d/2) for a vertically monotonic circle of vertical degree d."""
    del L0
    if not is_vertically_monotonic(L1):
        raise NotMonotonic(f"{L1.label or 'curve'} is not vertically monotonic")
    d = vertical_degree(L1)
    return GradedRanks((d // 2,) * 4)
