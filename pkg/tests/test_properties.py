"""Criterion 7: index identities and complex invariants on random inputs (1000 cases each)."""
import functools
import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from pillowfloer.curves import LiftedCurve, figure_eight, intersections, load_curves
from pillowfloer.errors import EqualLines
from pillowfloer.floer import build_complex, component_homology, f2_rank
from pillowfloer.knots.twobridge import TwoBridgeSpec, two_bridge_curve
from pillowfloer.maslov import mas_ngon, polygon_chain, relative_grading, triple_index
from pillowfloer.pillowcase import DeckElement, PerturbationFunction
from pillowfloer.verify import fixture_path, random_star_polygon, reflex_corners, reversed_chain, splice_instance

CASES = settings(max_examples=1000, deadline=None, suppress_health_check=[HealthCheck.too_slow])
seeds = st.integers(0, 2**32 - 1)

pytestmark = pytest.mark.criterion(7)


def monotone_circle(d, a=0.6, phase=0.3, n=400):
    t = np.linspace(0, 2 * math.pi, n + 1)
    return LiftedCurve.circle(np.c_[math.pi / 2 + a * np.sin(t + phase), d * t], DeckElement(0, d, 1), f"vm{d}")


@functools.lru_cache(maxsize=None)
def l1_pool():
    pool = [load_curves(fixture_path("figure_re1.json"))[0], monotone_circle(2), monotone_circle(4, 0.4, 1.1)]
    for pq in [(3, -1), (3, 2), (5, -3), (5, 2), (7, 3), (9, 2), (11, -5), (11, 6), (13, 5)]:
        pool.append(two_bridge_curve(TwoBridgeSpec(*pq)))
    return pool


perturbations = st.tuples(st.floats(0.05, 0.2), st.floats(-0.05, 0.05), st.integers(0, len(l1_pool()) - 1))


def _L0(eps, amp):
    return figure_eight(eps, PerturbationFunction({1: amp}) if amp else PerturbationFunction())


# Maslov index of polygons ----------------------------------------------------


@CASES
@given(seeds, st.integers(3, 9))
def test_polygon_maslov(seed, n):
    v = random_star_polygon(np.random.default_rng(seed), n)
    assert mas_ngon(polygon_chain(v)) == 3 - n + reflex_corners(v)


@CASES
@given(st.floats(0, math.pi), st.floats(0, math.pi), st.floats(0, math.pi))
def test_triple_index_symmetry(l0, l1, ell):
    try:
        assert triple_index(l0, l1, ell) + triple_index(l1, l0, ell) == 1
    except EqualLines:
        assert abs((l0 - l1) % math.pi) < 1e-11 or abs((l0 - l1) % math.pi - math.pi) < 1e-11


def _splice(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 7))
    return n, splice_instance(rng, n, int(rng.integers(1, n)))


@CASES
@given(seeds)
def test_splicing(seed):
    _, (whole, first, second) = _splice(seed)
    assert mas_ngon(whole) == mas_ngon(first) + mas_ngon(second)


@CASES
@given(seeds)
def test_path_reversal(seed):
    n, (whole, _, _) = _splice(seed)
    assert mas_ngon(reversed_chain(whole)) == 2 - n - mas_ngon(whole)


@CASES
@given(seeds, st.integers(1, 5))
def test_cyclic_invariance(seed, shift):
    n, (whole, _, _) = _splice(seed)
    k = shift % n
    assert mas_ngon(whole[k:] + whole[:k]) == mas_ngon(whole)


# relative gradings -----------------------------------------------------------


@functools.lru_cache(maxsize=256)
def _generators(eps, amp, idx):
    L0, L1 = _L0(eps, amp), l1_pool()[idx]
    return L0, L1, intersections(L0, L1)


def _rounded(draw):
    eps, amp, idx = draw
    # a coarse grid keeps the intersection cache useful
    return round(eps, 2), round(amp, 2), idx


@CASES
@given(perturbations, st.data())
def test_grading_additivity(draw, data):
    L0, L1, gens = _generators(*_rounded(draw))
    p, q, r = (gens[data.draw(st.integers(0, len(gens) - 1))] for _ in range(3))
    gr = lambda a, b: relative_grading(a, b, L0, L1)  # noqa: E731
    assert (gr(p, q) + gr(q, r)) % 4 == gr(p, r)
    assert gr(p, p) == 0
    assert (gr(p, q) + gr(q, p)) % 4 == 0


# constructed complexes -------------------------------------------------------


@functools.lru_cache(maxsize=256)
def _complex(eps, amp, idx):
    return build_complex(_L0(eps, amp), [l1_pool()[idx]])


def check_complex(cx, L0):
    for c in cx.components:
        d = c.differential()
        assert not ((d.astype(int) @ d.astype(int)) % 2).any()
        gens = dict(zip(c.labels, c.generators))
        for b in c.bigons:
            assert (c.degree(b.source) - c.degree(b.target)) % 4 == 1
            assert relative_grading(gens[b.source], gens[b.target], L0, c.curve) == 1
        component_homology(c)


@CASES
@given(perturbations)
def test_complex_invariants(draw):
    eps, amp, idx = _rounded(draw)
    check_complex(_complex(eps, amp, idx), _L0(eps, amp))


@pytest.mark.slow
@pytest.mark.parametrize("key", [(3, 5, 2, -1), (4, 5, 4, -3), (4, 7, 2, -1), (5, 11, 9, -4), (3, 4, 3, -2)])
def test_torus_complex_invariants(key, torus):
    rep = torus(*key)
    check_complex(rep.complex, figure_eight(rep.eps, rep.g))


# F2 rank oracle ----------------------------------------------------------------


def _brute_rank(m):
    """Rank over F2 as log2 of the size of the row span."""
    span = {0}
    for row in m:
        v = int("".join(map(str, row)) or "0", 2)
        span |= {s ^ v for s in span}
    return len(span).bit_length() - 1


@CASES
@given(st.integers(1, 7), st.integers(1, 7), seeds)
def test_f2_rank_bruteforce(r, c, seed):
    m = np.random.default_rng(seed).integers(0, 2, (r, c)).astype(np.uint8)
    assert f2_rank(m) == _brute_rank(m.tolist())
