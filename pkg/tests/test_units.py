"""Unit tests and derived oracles for the library modules."""
import json
import math

import numpy as np
import pytest

from pillowfloer.curves import (LiftedCurve, check_restricted, check_unobstructed, dump_curves, figure_eight,
                                intersections, is_vertically_monotonic, load_curves, vertical_degree)
from pillowfloer.errors import (BadEpsilon, EqualLines, InvalidCurve, InvalidSpec, NonCoprime, NonGenericVertex,
                                NonTransverseCrossing, NotMonotonic)
from pillowfloer.floer import (GradedRanks, build_complex, f2_rank, homology, vertically_monotonic_fastpath)
from pillowfloer.knots.invariants import (alexander_abs_sum_torus, alexander_torus, signature_torus,
                                          signature_two_bridge)
from pillowfloer.knots.quaternion import qinv, qmul
from pillowfloer.knots.torus import TorusSpec, psi, representation, trace_character_variety
from pillowfloer.knots.twobridge import TwoBridgeSpec, exact_vertices, two_bridge_curve
from pillowfloer.maslov import load_chain, mas_ngon, path_maslov, triple_index
from pillowfloer.pillowcase import (DeckElement, PerturbationFunction, canonicalize, same_pillow_point,
                                    winding_numbers, z_of_loop, z_of_loop_exact)
from pillowfloer.verify import corner_loop, fixture_path, run_suites
from test_properties import monotone_circle

PI = math.pi


# pillowcase ------------------------------------------------------------------


def test_deck_group_laws():
    a, b = DeckElement(1, -2, -1), DeckElement(0, 3, 1)
    x = np.array([[0.3, 1.7], [2.0, -4.0]])
    assert np.allclose((a * b).apply(x), a.apply(b.apply(x)))
    assert (a * a.inverse()).is_identity and (a.inverse() * a).is_identity
    assert a ** 2 == a * a and b ** -2 == b.inverse() * b.inverse()
    assert DeckElement.from_json(a.to_json()) == a
    with pytest.raises(ValueError):
        DeckElement(0, 0, 2)


@pytest.mark.parametrize("pt", [(0.4, 1.1), (-2.5, 9.0), (7.0, -3.3), (PI, 4.0), (0.0, 5.0), (2 * PI, 0.2)])
def test_canonicalize_roundtrip(pt):
    c, g = canonicalize(pt)
    assert 0 <= c.gamma <= PI and 0 <= c.theta < 2 * PI
    assert np.allclose(g.apply(np.array(c)), pt)


def test_same_pillow_point_under_involution():
    assert same_pillow_point((0.5, 1.0), (-0.5, -1.0))
    assert same_pillow_point((0.5, 1.0), (0.5 + 2 * PI, 1.0 - 4 * PI))
    assert not same_pillow_point((0.5, 1.0), (0.6, 1.0))


def test_perturbation_parse():
    g = PerturbationFunction.parse("1:0.05, 3:-0.01")
    assert repr(g) == "1:0.05,3:-0.01"
    assert math.isclose(float(g(PI / 2)), 0.05 + 0.01)
    assert not PerturbationFunction.parse("0") and not PerturbationFunction.parse("")
    with pytest.raises(ValueError):
        PerturbationFunction.parse("x:1")


def test_z_exact_matches_float_on_corner_half_turns():
    from fractions import Fraction as F

    tri = [(F(-1, 10), F(-1, 10)), (F(1, 5), F(-1, 10)), (F(1, 10), F(1, 5))]
    assert z_of_loop_exact(tri) == z_of_loop(np.array([[x * PI, y * PI] for x, y in tri + tri[:1]], float))
    with pytest.raises(NonTransverseCrossing):
        z_of_loop_exact([(F(0), F(0)), (F(1, 2), F(0)), (F(0), F(1, 2))])


def test_full_circle_is_two():
    assert z_of_loop(corner_loop((0, 0), turns=1.0)) == 2


def test_winding_numbers():
    sq = np.array([[-1, -1], [1, -1], [1, 1], [-1, 1], [-1, -1]], float)
    assert winding_numbers(sq) == {(0, 0): 1}


# curves ----------------------------------------------------------------------


def test_figure_eight_shape():
    L0 = figure_eight(0.1)
    assert L0.kind == "circle" and L0.closure == DeckElement(1, 1, 1)
    report = check_unobstructed(L0)
    assert report.ok and report.self_crossings == 1
    with pytest.raises(BadEpsilon):
        figure_eight(0.0)


def test_curve_validation():
    with pytest.raises(InvalidCurve):
        LiftedCurve.arc([[0.1, 0.0], [1.0, 1.0]])
    with pytest.raises(InvalidCurve):
        LiftedCurve.circle([[PI, PI], [4, 5]], DeckElement(0, 1, 1))
    with pytest.raises(NonGenericVertex):
        LiftedCurve.path([[0, 0], [1, 0], [0.2, 0.01]]).turnings()


def test_curve_json_roundtrip(tmp_path):
    curves = [figure_eight(0.1, samples=64), two_bridge_curve(TwoBridgeSpec(5, 2)), LiftedCurve.path([[0, 1], [2, 3]])]
    dump_curves(curves, tmp_path / "c.json")
    back = load_curves(tmp_path / "c.json")
    for a, b in zip(curves, back):
        assert a.kind == b.kind and a.closure == b.closure and np.array_equal(a.vertices, b.vertices)


def test_intersections_of_two_bridge_arc():
    for pq in [(3, -1), (5, 2), (11, -5)]:
        assert len(intersections(figure_eight(0.1), two_bridge_curve(TwoBridgeSpec(*pq)))) == pq[0]


def test_exact_vertices_are_lattice_path():
    v = exact_vertices(TwoBridgeSpec(5, 2))
    assert v[0] == (0, 0) and v[-1][0] % 1 == 0 and v[-1][1] % 1 == 0
    assert check_restricted(two_bridge_curve(TwoBridgeSpec(5, 2))).ok


def test_fixture_curve_invariants():
    re1 = load_curves(fixture_path("figure_re1.json"))[0]
    rep = check_restricted(re1)
    assert rep.ok and rep.maslov == 0 and rep.z == 0
    assert check_unobstructed(re1).ok
    assert not is_vertically_monotonic(re1)


# maslov ----------------------------------------------------------------------


def test_fixture_chains():
    assert mas_ngon(load_chain(fixture_path("five_gon.json"))) == -1
    assert mas_ngon(load_chain(fixture_path("model_bigon.json"))) == 1


def test_triple_index_values():
    assert triple_index(0.0, PI / 2) == 0
    assert triple_index(PI / 2, 0.0) == 1
    with pytest.raises(EqualLines):
        triple_index(0.3, 0.3 + PI)


def test_path_maslov_counts_turns():
    c = LiftedCurve.path(corner_loop((2.0, 2.0), r=0.5, n=64, turns=1.0))
    assert abs(path_maslov(c, 0, c.period)) == 2


# floer -----------------------------------------------------------------------


def test_graded_ranks():
    a = GradedRanks.of(1, 2, 3, 4)
    assert a.total == 10 and (a + a)[3] == 8
    assert a.shifted(1).ranks == (4, 1, 2, 3)
    assert str(a) == "(1,2,3,4)"


def test_f2_rank_small():
    assert f2_rank(np.array([[1, 1], [1, 1]])) == 1
    assert f2_rank(np.eye(5, dtype=np.uint8)) == 5
    assert f2_rank(np.zeros((3, 3))) == 0


@pytest.mark.parametrize("d", [2, 4, 6])
@pytest.mark.parametrize("eps", [0.05, 0.1, 0.2])
def test_monotonic_fastpath_agrees(d, eps):
    c = monotone_circle(d)
    L0 = figure_eight(eps)
    assert homology(build_complex(L0, [c]))[1] == vertically_monotonic_fastpath(L0, c)
    assert vertical_degree(c) == d


def test_fastpath_refuses_fixture():
    with pytest.raises(NotMonotonic):
        vertically_monotonic_fastpath(None, load_curves(fixture_path("figure_re1.json"))[0])


def test_complex_json_roundtrip():
    cx = build_complex(figure_eight(0.1), [load_curves(fixture_path("figure_re1.json"))[0]])
    d = json.loads(json.dumps(cx.to_json()))
    comp = d["components"][0]
    assert len(comp["generators"]) == 8 and len(comp["bigons"]) == 2
    assert sorted(map(tuple, comp["differential"])) == sorted((b["from"], b["to"]) for b in comp["bigons"])


# knots -----------------------------------------------------------------------


def _seifert_torus(p, q):
    """Seifert matrix of the positive (p, q) torus knot as a tensor product of A_n forms."""
    def lam(n):
        return np.eye(n) - np.eye(n, k=1)
    return np.kron(lam(p - 1), lam(q - 1))


@pytest.mark.parametrize("pq", [(2, 3), (2, 5), (3, 4), (3, 5), (3, 7), (4, 5), (4, 7), (5, 7), (5, 11), (5, 12)])
def test_torus_signature_oracle(pq):
    V = _seifert_torus(*pq)
    ev = np.linalg.eigvalsh(V + V.T)
    # this form is positive definite on positive torus knots, whose signature is negative
    assert signature_torus(*pq) == -int(np.sum(ev > 1e-9) - np.sum(ev < -1e-9))
    assert signature_torus(-pq[0], pq[1]) == -signature_torus(*pq)
    # determinant |Delta(-1)| two ways
    delta = alexander_torus(*pq)
    assert abs(sum(c * (-1) ** i for i, c in enumerate(delta))) == round(abs(np.linalg.det(V + V.T)))


def test_alexander_trefoil():
    assert alexander_torus(2, 3) == [1, -1, 1]
    assert alexander_abs_sum_torus(2, 3) == 3


def test_two_bridge_signature_values():
    assert signature_two_bridge(3, 1) in (2, -2)
    assert signature_two_bridge(3, 1) == -signature_two_bridge(3, -1)
    with pytest.raises(InvalidSpec):
        signature_two_bridge(4, 1)
    with pytest.raises(NonCoprime):
        signature_two_bridge(9, 3)


def test_torus_spec_validation():
    with pytest.raises(InvalidSpec):
        TorusSpec(3, 5, 1, 1)
    with pytest.raises(InvalidSpec):
        TorusSpec(3, 6, 1, 0)


def test_representation_satisfies_relation():
    """Traced samples give quaternion triples with rho(a), rho(b) traceless and the torus relation."""
    spec = TorusSpec(3, 5, 2, -1)
    comps = trace_character_variety(spec)
    s = np.vstack([c.samples[:: max(1, len(c.samples) // 50)] for c in comps])
    ra, rb, rc = representation(spec, s[:, 0], s[:, 1], s[:, 2])
    for x in (ra, rb, rc):
        assert np.allclose(x[:, 0], 0, atol=1e-9)
    assert np.allclose(np.linalg.norm(ra, axis=1), 1)
    assert np.allclose(qmul(qmul(qinv(rb), ra), rb)[:, 0], 0, atol=1e-9)


def test_sign_scan_oracle():
    """Dense sign scan of Psi on tau slices finds only points near the traced (3,5) variety."""
    spec = TorusSpec(3, 5, 2, -1)
    samples = np.vstack([c.samples for c in trace_character_variety(spec)])
    n = 200
    u = np.linspace(0, PI, n)
    hits = 0
    for tau in np.linspace(-0.95, 0.95, 20):
        U, V = np.meshgrid(u, u, indexing="ij")
        sg = np.sign(psi(spec, U, V, np.full_like(U, tau)))
        c00 = sg[:-1, :-1]
        flip = (c00 != sg[1:, :-1]) | (c00 != sg[:-1, 1:]) | (c00 != sg[1:, 1:])
        ii, jj = np.nonzero(flip[..., 0] & flip[..., 1])
        for i, j in zip(ii, jj):
            c = np.array([u[i] + PI / (2 * n), u[j] + PI / (2 * n), tau])
            near = np.min(np.linalg.norm((samples - c) * [1, 1, 0.25], axis=1))
            assert near < 0.08, f"sign change at {c} far from the traced variety"
            hits += 1
    assert hits > 20


# verify / cli ----------------------------------------------------------------


def test_run_fast_suites():
    lines = []
    assert run_suites(["z", "two-bridge", "fixture"], cases=50, echo=lines.append)
    assert all(line.startswith("PASS") for line in lines)
