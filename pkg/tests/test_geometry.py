from __future__ import annotations

import pytest

from fibreapp.geometry import (
    MapSpec,
    chart_cells,
    chart_expand,
    dimension,
    ff_count,
    ff_dim_estimate,
    fibred_power,
    image_closure,
    jump_locus,
    split_components,
)
from fibreapp.groebner import Ideal, contains_ideal, ideal_equal, variety_contains
from fibreapp.polycore import Ring

from conftest import corpus_spec, ideal


def gens(J):
    return sorted(str(g) for g in J.groebner())


# dimension -----------------------------------------------------------------------


def test_dimension_examples():
    assert dimension(Ideal(Ring(("a", "b", "c")))) == 3
    assert dimension(ideal("y1 y2 x1 x2", "y1*x1 + y2*x2")) == 3
    assert dimension(ideal("y1 y2 y3 y4", "y1*y3", "y1*y4", "y2*y3", "y2*y4")) == 2
    assert dimension(ideal("x y", "x", "x + 1")) == -1


def test_ff_oracle_examples():
    assert ff_count(Ideal(Ring(("a", "b"))), 5) == 25
    assert ff_dim_estimate(ideal("y1 y2 x1 x2", "y1*x1 + y2*x2")) == (3, [33, 145, 385])
    assert ff_dim_estimate(ideal("x y", "1")) == (-1, [0, 0, 0])


def test_ff_oracle_refuses_large_spaces():
    R = Ring(tuple(f"v{i}" for i in range(12)))
    with pytest.raises(ValueError):
        ff_count(Ideal(R), 7)


# image closure ----------------------------------------------------------------------


def test_image_closure_examples():
    target = ["y1", "y2"]
    assert image_closure(ideal("y1 y2 x1 x2", "y1*x1 + y2*x2"), target).is_zero()
    assert gens(image_closure(ideal("y1 y2 x1 x2", "y1", "y2"), target)) == ["y1", "y2"]
    assert image_closure(ideal("y1 y2 t", "y2 - y1*t"), target).is_zero()


def test_projection_never_raises_dimension():
    for name in ["breakpoint-d2", "blowup", "notopen", "example-d", "square"]:
        m = corpus_spec(name).with_target_equations()
        for P in m.sources:
            assert dimension(image_closure(P, m.target_vars)) <= dimension(P)


# component splitting -------------------------------------------------------------------


def test_split_monomial():
    cs = split_components(ideal("y1 x1", "y1*x1"))
    assert sorted(gens(p.ideal) for p in cs) == [["x1"], ["y1"]]
    assert all(p.tag == "split-piece" for p in cs)


def test_split_cross():
    cs = split_components(ideal("y1 y2 y3 y4", "y1*y3", "y1*y4", "y2*y3", "y2*y4"))
    assert sorted(gens(p.ideal) for p in cs) == [["y1", "y2"], ["y3", "y4"]]


def test_split_fibred_square_of_breakpoint(bp2):
    sq = fibred_power(bp2, 2)
    (P,) = sq.sources
    cs = split_components(P, hints=sq.hints, target=sq.target_vars)
    assert sorted(p.dim for p in cs) == [4, 4]
    assert ["y1", "y2"] in [gens(p.ideal) for p in cs]
    assert cs.dim == dimension(P)
    for p in cs:
        assert contains_ideal(p.ideal, P)
    est, _ = ff_dim_estimate(P, primes=(3, 5))
    assert est == 4


def test_split_pieces_cover_the_variety():
    I = ideal("x y z", "x*y", "x*z")
    cs = split_components(I)
    union = cs.pieces[0].ideal
    from fibreapp.groebner import intersect

    for p in cs.pieces[1:]:
        union = intersect(union, p.ideal)
    assert variety_contains(union, I) and variety_contains(I, union)


def test_asserted_pieces_are_not_split():
    cs = split_components(ideal("x y", "x*y"), asserted=True)
    assert len(cs) == 1 and cs.pieces[0].tag == "asserted-irreducible"


# fibred powers and charts ------------------------------------------------------------------


def test_fibred_power_identity(bp2):
    one = fibred_power(bp2, 1)
    assert one.ring.names == bp2.ring.names
    assert one.sources == bp2.sources


def test_fibred_square_generators(bp2):
    sq = fibred_power(bp2, 2)
    assert sq.ring.names == ("y1", "y2", "x1", "x2", "x1'", "x2'")
    assert sorted(str(g) for g in sq.sources[0].gens) == ["y1*x1 + y2*x2", "y1*x1' + y2*x2'"]


def test_fibred_cube_arity(bp2):
    cube = fibred_power(bp2, 3)
    assert len(cube.target_vars) == 2 and len(cube.fibre_vars) == 6
    assert len(cube.sources[0].gens) == 3


def test_fibred_power_keeps_target_components():
    m = corpus_spec("notopen")
    assert fibred_power(m, 3).target_components == m.target_components


def test_chart_expand_without_blocks(bp2):
    assert chart_expand(bp2) == [bp2]


def test_universal_charts():
    charts = chart_expand(corpus_spec("universal-d3"))
    assert len(charts) == 2
    assert [str(g) for g in charts[0].sources[0].gens] == ["x0*lam^2 + x1*lam + x2"]


def test_matrix_charts():
    m = corpus_spec("matrix").with_target_equations()
    c1, c2 = chart_expand(m)
    g1 = {str(g) for g in c1.sources[0].gens}
    g2 = {str(g) for g in c2.sources[0].gens}
    assert {"a11*lam + a12", "a21*lam + a22"} <= g1
    assert {"a12*mu + a11", "a22*mu + a21"} <= g2
    det = "a12*a21 - a11*a22"  # monic in grevlex
    assert det in g1 and det in g2


def test_non_homogeneous_block_is_rejected():
    R = Ring(("y", "lam", "mu"))
    m = MapSpec(R, ("y",), (Ideal.parse(R, ["y*lam + mu^2"]),), projective_blocks=(("lam", "mu"),))
    with pytest.raises(ValueError, match="homogeneous"):
        chart_expand(m)


def test_chart_cells_are_disjoint():
    cells = chart_cells(corpus_spec("universal-d3"))
    assert len(cells) == 2
    assert cells[1].chart == "lam=1,mu=0"


# jump loci ---------------------------------------------------------------------------------


def test_jump_locus_breakpoint(bp2):
    loc = jump_locus(bp2, 2, seed=0)
    assert gens(loc.ideal) == ["y1", "y2"]
    assert dimension(loc.ideal) == 0


def test_jump_locus_projection_is_empty():
    loc = jump_locus(corpus_spec("projection"), 2, seed=0)
    assert loc.ideal.is_unit()


def test_jump_locus_universal_is_origin():
    chart = chart_expand(corpus_spec("universal-d3"))[0]
    loc = jump_locus(chart, 1, seed=0)
    assert gens(loc.ideal) == ["x0", "x1", "x2"]


def test_jump_locus_is_deterministic(bp2):
    assert jump_locus(bp2, 1, seed=5) == jump_locus(bp2, 1, seed=5)


@pytest.mark.parametrize("name", ["breakpoint-d2", "blowup", "projection"])
@pytest.mark.parametrize("seed", [0, 1])
def test_jump_locus_monotone(name, seed):
    m = chart_expand(corpus_spec(name))[0]
    for k in range(1, len(m.fibre_vars)):
        small = jump_locus(m, k + 1, seed=seed).ideal
        big = jump_locus(m, k, seed=seed).ideal
        assert variety_contains(big, small)


def test_ideal_equality_of_locus_across_seeds(bp2):
    a = jump_locus(bp2, 2, seed=0).ideal
    b = jump_locus(bp2, 2, seed=123).ideal
    assert ideal_equal(a, b)
