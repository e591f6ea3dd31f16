"""Built-in property suites behind ``pillowfloer verify``.

Each suite returns a list of failure messages; an empty list is a pass.
The random generators here are shared with the test suite.
"""
from __future__ import annotations

import math
from importlib import resources

import numpy as np

from .curves import LiftedCurve, figure_eight, load_curves
from .errors import NonGenericVertex
from .maslov import load_chain, mas_ngon, polygon_chain, triple_index
from .pillowcase import PerturbationFunction, winding_numbers, z_of_loop

CENTER = np.array([1.5, 1.5])


def fixture_path(name: str):
    return resources.files("pillowfloer") / "fixtures" / name


def corner_loop(corner, r: float = 0.3, n: int = 16, turns: float = 0.5) -> np.ndarray:
    """Counterclockwise path around a corner lift; half a turn closes up in the pillowcase."""
    t = np.linspace(0.0, 2 * math.pi * turns, n + 1) + 0.1
    return np.c_[corner[0] + r * np.cos(t), corner[1] + r * np.sin(t)]


def random_star_polygon(rng: np.random.Generator, n: int) -> np.ndarray:
    """A simple star-shaped polygon around CENTER, listed clockwise."""
    while True:
        ang = np.sort(rng.uniform(0, 2 * math.pi, n))[::-1]
        gaps = -np.diff(np.r_[ang, ang[0] - 2 * math.pi])
        if gaps.min() > 0.15 and gaps.max() < math.pi - 0.15:
            break
    rad = rng.uniform(0.25, 1.0, n)
    return CENTER + np.c_[rad * np.cos(ang), rad * np.sin(ang)]


def random_convex_polygon(rng: np.random.Generator, n: int) -> np.ndarray:
    while True:
        ang = np.sort(rng.uniform(0, 2 * math.pi, n))[::-1]
        gaps = -np.diff(np.r_[ang, ang[0] - 2 * math.pi])
        if gaps.min() > 0.15 and gaps.max() < math.pi - 0.15:
            return CENTER + 0.9 * np.c_[np.cos(ang), np.sin(ang)]


def reflex_corners(v: np.ndarray) -> int:
    """Non-convex corners of a clockwise polygon (left turns)."""
    n = len(v)
    count = 0
    for k in range(n):
        a, b, c = v[k - 1], v[k], v[(k + 1) % n]
        if (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]) > 0:
            count += 1
    return count


def _path_through(points, overshoot: float = 0.1):
    """Polyline through the given points, extended past both ends; returns (curve, s at each point)."""
    pts = np.asarray(points, dtype=float)
    head = pts[0] - overshoot * (pts[1] - pts[0])
    tail = pts[-1] + overshoot * (pts[-1] - pts[-2])
    curve = LiftedCurve.path(np.vstack([head, pts, tail]))
    return curve, [float(i + 1) for i in range(len(pts))]


def splice_instance(rng: np.random.Generator, n: int, k: int):
    """Chain (gamma_0..gamma_{n-1}) whose paths 0 and k both pass through a point q.

    Returns (whole chain, first spliced chain, second spliced chain).
    """
    while True:
        p = [CENTER + rng.uniform(-1.1, 1.1, 2) for _ in range(n)]
        q = CENTER + rng.uniform(-1.1, 1.1, 2)
        curves, params = [], []
        try:
            for j in range(n):
                a, b = p[j], p[(j + 1) % n]
                mid = [q] if j in (0, k) else [(a + b) / 2]
                pts = [a, (a + mid[0]) / 2 + rng.uniform(-0.3, 0.3, 2), mid[0],
                       (mid[0] + b) / 2 + rng.uniform(-0.3, 0.3, 2), b]
                c, s = _path_through(pts)
                c.turnings()
                curves.append(c)
                params.append(s[::2])
        except NonGenericVertex:
            continue
        corners = [(curves[j - 1], params[j - 1][2], curves[j], params[j][0]) for j in range(n)]
        corners.append((curves[0], params[0][1], curves[k], params[k][1]))
        if all(_transverse(*c) for c in corners):
            break
    whole = [(curves[j], params[j][0], params[j][2]) for j in range(n)]
    first = [(curves[0], params[0][1], params[0][2])] + whole[1:k] + [(curves[k], params[k][0], params[k][1])]
    second = ([(curves[k], params[k][1], params[k][2])] + whole[k + 1:]
              + [(curves[0], params[0][0], params[0][1])])
    return whole, first, second


def _transverse(c0, s0, c1, s1, margin: float = 0.05) -> bool:
    a = (c0.unwrapped_angle(s0) - c1.unwrapped_angle(s1)) % math.pi
    return margin < a < math.pi - margin


def reversed_chain(chain):
    return [(c, b, a) for c, a, b in reversed(chain)]


# ---------------------------------------------------------------------------
# suites


def suite_z(rng, cases):
    bad = []
    for c in [(0, 0), (math.pi, 0), (0, math.pi), (math.pi, math.pi)]:
        if z_of_loop(corner_loop(c)) != 1:
            bad.append(f"corner loop at {c} gave {z_of_loop(corner_loop(c))}")
    if z_of_loop(corner_loop((1.0, 1.3))) != 0:
        bad.append("contractible loop has z != 0")
    for eps in (0.05, 0.1, 0.2):
        for g in (PerturbationFunction(), PerturbationFunction({1: 0.05})):
            if z_of_loop(figure_eight(eps, g).vertices) != 0:
                bad.append(f"z(L0) != 0 at eps={eps}, g={g!r}")
    re1 = load_curves(fixture_path("figure_re1.json"))[0]
    if z_of_loop(re1.vertices) != 0:
        bad.append("z(figure_re1) != 0")
    for _ in range(cases):
        v = random_star_polygon(rng, int(rng.integers(3, 9))) + rng.uniform(-3, 3, 2)
        loop = np.vstack([v, v[:1]])
        try:
            total = sum(winding_numbers(loop).values())
        except Exception:  # noqa: BLE001 - a vertex on a lattice point, skip
            continue
        if z_of_loop(loop) != (2 * total) % 4:
            bad.append(f"identity-closure loop: z={z_of_loop(loop)} but 2*sum windings={2 * total}")
            break
    return bad


def suite_maslov(rng, cases):
    bad = []
    if mas_ngon(load_chain(fixture_path("five_gon.json"))) != -1:
        bad.append("5-gon fixture: Mas != -1")
    if mas_ngon(load_chain(fixture_path("model_bigon.json"))) != 1:
        bad.append("model bigon fixture: Mas != 1")
    for _ in range(cases):
        n = int(rng.integers(3, 8))
        v = random_star_polygon(rng, n)
        m = mas_ngon(polygon_chain(v))
        if m != 3 - n + reflex_corners(v):
            bad.append(f"polygon with n={n}: Mas={m}, expected {3 - n + reflex_corners(v)}")
            break
        l0, l1, ell = rng.uniform(0, math.pi, 3)
        if abs(l0 - l1) > 1e-6 and triple_index(l0, l1, ell) + triple_index(l1, l0, ell) != 1:
            bad.append(f"tau symmetry fails at {l0}, {l1}, {ell}")
            break
        k = int(rng.integers(1, n))
        whole, first, second = splice_instance(rng, n, k)
        if mas_ngon(whole) != mas_ngon(first) + mas_ngon(second):
            bad.append("splicing identity fails")
            break
        if mas_ngon(reversed_chain(whole)) != 2 - n - mas_ngon(whole):
            bad.append("path reversal identity fails")
            break
        if mas_ngon(whole[1:] + whole[:1]) != mas_ngon(whole):
            bad.append("cyclic invariance fails")
            break
    return bad


def suite_two_bridge(rng, cases):
    from .floer import differential_rank, homology
    from .knots.twobridge import TwoBridgeSpec, two_bridge_complex

    golden = {(3, -1): (1, 0, 1, 1), (3, 2): (1, 0, 1, 1), (5, -3): (1, 1, 2, 1), (5, 2): (1, 1, 2, 1),
              (11, -5): (3, 2, 3, 3), (11, 6): (3, 2, 3, 3)}
    bad = []
    for (p, q), want in golden.items():
        cx = two_bridge_complex(TwoBridgeSpec(p, q))
        _, total = homology(cx)
        if total.ranks != want or differential_rank(cx) != 0 or total.total != p:
            bad.append(f"K({p},{q}): H={total}, expected {want}")
    return bad


def suite_fixture(rng, cases):
    from .floer import build_complex, homology

    bad = []
    re1 = load_curves(fixture_path("figure_re1.json"))[0]
    for eps in (0.05, 0.1, 0.2):
        cx = build_complex(figure_eight(eps), [re1])
        c = cx.components[0]
        _, total = homology(cx)
        ends = {b.source for b in c.bigons} | {b.target for b in c.bigons}
        if (len(c.labels), c.chain_ranks().ranks, len(c.bigons), len(ends), total.ranks) != \
                (8, (2, 2, 2, 2), 2, 4, (1, 1, 1, 1)):
            bad.append(f"figure_re1 at eps={eps}: {len(c.labels)} generators, C={c.chain_ranks()}, "
                       f"{len(c.bigons)} bigons, H={total}")
    return bad


def suite_jacobian(rng, cases):
    from .knots.torus import TorusSpec, psi, psi_jacobian

    spec = TorusSpec(3, 5, 2, -1, epsA=0.05, epsB=0.03)
    h = 1e-6
    worst = 0.0
    for _ in range(cases):
        x = np.r_[rng.uniform(0, math.pi, 2), rng.uniform(-0.95, 0.95)]
        jac = psi_jacobian(spec, *x)[:, 2:]
        fd = np.zeros((2, 3))
        for i in range(3):
            e = np.zeros(3)
            e[i] = h
            fd[:, i] = (np.array(psi(spec, *(x + e))) - np.array(psi(spec, *(x - e)))) / (2 * h)
        scale = max(1.0, float(np.abs(jac).max()))
        worst = max(worst, float(np.abs(fd - jac).max()) / scale)
    return [f"Jacobian relative error {worst:.2e}"] if worst >= 1e-6 else []


def suite_torus(rng, cases):
    from .floer import differential_rank
    from .knots.invariants import alexander_abs_sum_torus
    from .knots.torus import TorusSpec, torus_knot_homology

    golden = {(3, 7, 5, -2): (3, 2, 2, 2), (5, 7, 3, -2): (5, 4, 4, 4), (5, 12, 5, -2): (8, 7, 7, 7),
              (5, 17, 7, -2): (11, 10, 10, 10), (3, 4, 3, -2): (2, 1, 1, 1), (3, 5, 2, -1): (2, 1, 2, 2),
              (4, 5, 4, -3): (2, 1, 2, 2), (4, 7, 2, -1): (3, 2, 3, 3), (5, 11, 9, -4): (5, 4, 4, 4)}
    bad = []
    for k, want in golden.items():
        rep = torus_knot_homology(TorusSpec(*k))
        if rep.total.ranks != want:
            bad.append(f"T{k[:2]}: H={rep.total}, expected {want}")
        if rep.total.total != alexander_abs_sum_torus(k[0], k[1]):
            bad.append(f"T{k[:2]}: rank {rep.total.total} != Alexander sum")
        if k == (5, 11, 9, -4) and rep.complex.chain_ranks().total - rep.total.total != 2 * differential_rank(rep.complex):
            bad.append("T(5,11): chain-to-homology drop != 2 rank(d)")
    return bad


SUITES = {
    "z": suite_z,
    "maslov": suite_maslov,
    "two-bridge": suite_two_bridge,
    "fixture": suite_fixture,
    "jacobian": suite_jacobian,
    "torus": suite_torus,
}
FAST = ["z", "maslov", "two-bridge", "fixture", "jacobian"]


def run_suites(names=None, cases: int = 200, seed: int = 0, echo=print) -> bool:
    names = list(names) if names else FAST
    ok = True
    for name in names:
        if name not in SUITES:
            raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
        rng = np.random.default_rng(seed)
        bad = SUITES[name](rng, cases)
        echo(f"{'PASS' if not bad else 'FAIL'} {name}" + "".join(f"\n    {b}" for b in bad))
        ok = ok and not bad
    return ok
