from __future__ import annotations

import pytest

from fibreapp import analysis as an
from fibreapp.analysis import INFINITY, Stratum
from fibreapp.geometry import MapSpec, dimension, fibred_power
from fibreapp.groebner import Ideal, ideal_equal
from fibreapp.polycore import Ring

from conftest import corpus_spec


def stratum(k, r, w, h):
    R = Ring(("y",))
    J = Ideal(R)
    return Stratum(J, None, k, r, w, h, J)


def data(part):
    return sorted((s.k, s.r, s.w, s.h) for s in part.strata)


# quasiopenness ------------------------------------------------------------------------


def test_breakpoint_first_power_is_quasiopen(bp2):
    assert an.quasiopen(bp2)


def test_breakpoint_square_is_not_quasiopen(bp2):
    q = an.quasiopen(fibred_power(bp2, 2))
    assert not q
    bad = [e for e in q.pieces if not e["dominant"]]
    assert bad and bad[0]["image"] == "<y1, y2>"


def test_origin_embedding_is_not_quasiopen():
    assert not an.quasiopen(corpus_spec("origin"))


def test_empty_source_is_vacuously_quasiopen():
    R = Ring(("y", "x"))
    m = MapSpec(R, ("y",), (Ideal.parse(R, ["1"]),))
    assert an.quasiopen(m)


@pytest.mark.parametrize("name, fail_at", [("breakpoint-d2", 2), ("blowup", 2), ("matrix", 2)])
def test_failure_is_monotone(name, fail_at):
    m = corpus_spec(name)
    assert not an.quasiopen(fibred_power(m, fail_at), oracle=False)
    assert not an.quasiopen(fibred_power(m, fail_at + 1, up_to_symmetry=True), oracle=False)


# direct route -----------------------------------------------------------------------


@pytest.mark.parametrize(
    "name, value",
    [
        ("breakpoint-d2", 1),
        ("breakpoint-d3", 2),
        ("matrix", 1),
        ("projection", INFINITY),
        ("notopen", INFINITY),
        ("example-d", 1),
        ("origin", 0),
    ],
)
def test_app_direct(name, value):
    res = an.app_direct(corpus_spec(name))
    assert res.value == value
    assert res.route == "direct"
    if res.finite:
        assert [c.quasiopen for c in res.certificate] == [True] * value + [False]


def test_notopen_uses_sum_of_component_dimensions():
    res = an.app_direct(corpus_spec("notopen"))
    assert res.bound == 4 and len(res.certificate) == 4


def test_heuristic_caveat_gives_interval(monkeypatch):
    monkeypatch.setattr(an, "suspect_hidden_component", lambda piece, dim: True)
    res = an.app_direct(corpus_spec("blowup"))
    assert an.HEURISTIC in res.caveats
    assert res.interval == (0, 1)


# rank partitions -------------------------------------------------------------------------


def test_rank_partition_linear_projection():
    part = an.rank_partition(corpus_spec("linear-projection"))
    assert data(part) == [(4, 2, 2, 4)]


def test_rank_partition_blowup():
    assert data(an.rank_partition(corpus_spec("blowup"))) == [(1, 0, 1, 2), (2, 2, 0, 2)]


def test_rank_partition_breakpoint(bp2):
    part = an.rank_partition(bp2)
    assert data(part) == [(2, 0, 2, 3), (3, 2, 1, 3)]
    assert part.stabilized
    for s in part.strata:
        s.check(2)


def test_rank_partition_is_seed_deterministic(bp2):
    a = an.rank_partition(bp2, seed=9)
    b = an.rank_partition(bp2, seed=9)
    assert [(s.ideal, s.image) for s in a] == [(s.ideal, s.image) for s in b]


# formula route ---------------------------------------------------------------------------


def test_formula_breakpoint():
    res = an.app_formula([stratum(3, 2, 1, 3), stratum(2, 0, 2, 3)], 2)
    assert res.value == 1 and res.route == "formula"
    assert res.certificate[0]["k"] == 2


def test_formula_universal_jump_stratum():
    assert an.app_formula([stratum(3, 3, 0, 3), stratum(1, 0, 1, 3)], 3).value == 2


def test_formula_singular_target_caveat():
    res = an.app_formula([stratum(1, 0, 1, 3)], 3, target_smooth=False)
    assert res.value == 2 and an.TARGET_SINGULAR in res.caveats


def test_formula_no_qualifying_stratum():
    assert an.app_formula([stratum(4, 2, 2, 4)], 2).value == INFINITY


def test_formula_clamps_at_zero():
    # the origin in the line: k = r = w = h = 0, d = 1
    assert an.app_formula([stratum(0, 0, 0, 0)], 1).value == 0


@pytest.mark.parametrize("bad", [(3, 1, 1, 3), (4, 2, 2, 3), (2, 3, -1, 3)])
def test_formula_rejects_inconsistent_strata(bad):
    with pytest.raises(an.InconsistentStrata):
        an.app_formula([stratum(*bad)], 2)


@pytest.mark.parametrize("name", ["breakpoint-d2", "blowup", "universal-d3"])
def test_refinement_leaves_formula_unchanged(name):
    m = corpus_spec(name)
    part = an.rank_partition(m)
    base = an.app_formula(part.strata, m.d).value
    for i in range(len(part.strata)):
        chart = next(c for c in _charts(m) if c.chart == part.strata[i].chart)
        finer = an.refine_stratum(part.strata, i, chart, seed=i)
        assert len(finer) > len(part.strata)
        assert an.app_formula(finer, m.d).value == base


def _charts(m):
    from fibreapp.geometry import chart_expand

    return chart_expand(m.with_target_equations())


# openness and critical values -------------------------------------------------------------


@pytest.mark.parametrize(
    "name, verdict",
    [
        ("linear-projection", "open"),
        ("projection", "open"),
        ("square", "open"),
        ("breakpoint-d2", "not-open"),
        ("blowup", "not-open"),
        ("notopen", "undecided"),
        ("example-d", "undecided"),
    ],
)
def test_openness(name, verdict):
    assert an.openness(corpus_spec(name)).verdict == verdict


def test_openness_needs_local_irreducibility():
    from dataclasses import replace

    m = replace(corpus_spec("matrix"), target_locally_irreducible=None)
    v = an.openness(m)
    assert v.verdict == "undecided" and "locally irreducible" in v.reason


def test_critical_values_blowup():
    m = corpus_spec("blowup")
    crit = an.critical_values(an.rank_partition(m).strata, 2)
    assert sorted(str(g) for g in crit.groebner()) == ["y1", "y2"]


def test_critical_values_open_projection_is_empty():
    m = corpus_spec("linear-projection")
    assert an.critical_values(an.rank_partition(m).strata, 2).is_unit()


def test_critical_values_breakpoint(bp2):
    crit = an.critical_values(an.rank_partition(bp2).strata, 2)
    assert ideal_equal(crit, Ideal.parse(crit.ring, ["y1", "y2"]))
    assert dimension(crit) < 2


def test_critical_values_dimension_is_checked():
    R = Ring(("y",))
    big = Stratum(Ideal(R), None, 1, 0, 1, 1, Ideal(R))
    with pytest.raises(an.TheoremContradiction):
        an.critical_values([big], 1)


# fibre counts -----------------------------------------------------------------------------


@pytest.mark.parametrize("name, count", [("universal-d3", 2), ("square", 2), ("matrix", 1), ("blowup", 1)])
def test_generic_fibre_count(name, count):
    assert an.generic_fibre_count(corpus_spec(name), seed=0) == count


def test_generic_fibre_count_rejects_positive_dimensional_fibres(bp2):
    with pytest.raises(an.SamplingError):
        an.generic_fibre_count(bp2)


def test_count_points_distinct_solutions():
    R = Ring(("x", "y"))
    assert an.count_points(Ideal.parse(R, ["x^2", "y - 1"])) == 1
    assert an.count_points(Ideal.parse(R, ["x^2 - 1", "y^2 - x"])) == 4
    assert an.count_points(Ideal.parse(R, ["x", "x - 1"])) == 0


def test_fibre_count_bound_universal_d4():
    m = corpus_spec("universal-d4")
    part = an.rank_partition(m)
    assert an.fibre_count_bound(part.strata, 4) == 3
    assert an.generic_fibre_count(m) == 3


def test_fibre_count_bound_isolated_fibre():
    assert an.fibre_count_bound([stratum(5, 5, 0, 5), stratum(2, 0, 2, 5)], 5) == 2


def test_fibre_count_bound_not_applicable():
    assert an.fibre_count_bound([stratum(1, 1, 0, 1)], 1) is None


def test_fibre_count_bound_preconditions():
    with pytest.raises(an.PreconditionError):
        an.fibre_count_bound([stratum(3, 2, 1, 3)], 2)


# target smoothness ------------------------------------------------------------------------


@pytest.mark.parametrize(
    "name, smooth",
    [("breakpoint-d2", True), ("matrix", False), ("moredata", False), ("notopen", False), ("example-d", False)],
)
def test_target_smoothness(name, smooth):
    assert an.target_is_smooth(corpus_spec(name)) is smooth
