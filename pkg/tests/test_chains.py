import pytest

from chains import (
    ChainDiagram,
    LadderInstance,
    colimit_of_chain,
    mediating_morphism,
    push_span,
    verify_ladder,
    verify_smooth_composition,
    verify_step,
)
from corpus import bare_set, cycle, path, shuffled_copy
from errors import MalformedInstanceError, PreconditionError
from span_calculus import greatest_dense_family, make_span
from structures import CategoryMode, Morphism, identity, iso_oracle

EMB = CategoryMode.EMB


def test_colimit_of_a_finite_chain_is_its_last_stage(examples):
    C = examples.chain("rotations")
    colimit = colimit_of_chain(C)
    assert colimit.object == examples.structure("tri2")
    assert colimit.cocone[0].table == examples.morphism("rot").table
    assert colimit.cocone[-1].table == (0, 1, 2)


def test_composites_along_a_chain(examples):
    C = examples.chain("still")
    assert len(C) == 3
    assert C.composite(0, 2).table == (0, 1, 2)
    with pytest.raises(PreconditionError):
        C.composite(2, 1)


def test_colimit_needs_monos(examples):
    C = ChainDiagram("squash", (examples.structure("path2"), examples.structure("loop")), (examples.morphism("collapse"),))
    with pytest.raises(PreconditionError, match="not a mono"):
        colimit_of_chain(C)


def test_malformed_chains(examples):
    tri = examples.structure("tri")
    with pytest.raises(MalformedInstanceError):
        ChainDiagram("short", (tri, tri), ())
    with pytest.raises(MalformedInstanceError):
        ChainDiagram("skew", (tri, tri), (examples.morphism("rot"),))
    with pytest.raises(MalformedInstanceError):
        ChainDiagram("empty", (), ())


def test_mediating_morphism_is_the_last_component(examples):
    C = examples.chain("rotations")
    colimit = colimit_of_chain(C)
    tri2 = examples.structure("tri2")
    competing = [examples.morphism("rot"), identity(tri2)]
    assert mediating_morphism(C, colimit, competing).table == (0, 1, 2)
    with pytest.raises(PreconditionError, match="does not commute"):
        mediating_morphism(C, colimit, [identity(examples.structure("tri")), identity(tri2)])


def test_smooth_composition(examples):
    report = verify_smooth_composition(examples.chain("rotations"))
    assert report.hypothesis_ok and report.conclusion_ok
    assert report.colimit_map.table == examples.morphism("rot").table


def test_smooth_composition_without_hypothesis(examples):
    report = verify_smooth_composition(examples.chain("grow"))
    assert not report.hypothesis_ok
    assert report.conclusion_ok is None
    assert report.failures == ["incl"]


def test_identity_ladder(examples):
    report = verify_ladder(examples.ladder("steady"))
    assert report.to_dict() == {
        "hypothesis_ok": True,
        "conclusion_ok": True,
        "failures": [],
        "colimit_map": report.colimit_map.to_dict(),
    }
    assert report.colimit_map.table == (0, 1, 2)


def test_ladder_between_rotated_chains(examples):
    C = examples.chain("rotations")
    L = LadderInstance("lift", C, C, (identity(examples.structure("tri")), identity(examples.structure("tri2"))))
    report = verify_ladder(L, EMB)
    assert report.hypothesis_ok and report.conclusion_ok


def test_ladder_must_commute(examples):
    C = examples.chain("rotations")
    tri2 = examples.structure("tri2")
    turn = Morphism(tri2, tri2, (2, 0, 1), "turn")
    with pytest.raises(MalformedInstanceError, match="naturality"):
        LadderInstance("twisted", C, C, (identity(examples.structure("tri")), turn))


def test_push_span_composes_both_legs():
    X = bare_set(2)
    swap = Morphism(X, X, (1, 0), "swap")
    assert push_span(make_span(X, EMB, {0: 1}), swap, identity(X)) == make_span(X, EMB, {1: 1})


def test_pushed_spans_stay_in_the_greatest_family():
    X, Y = cycle(3), cycle(3)
    X0 = shuffled_copy(X, seed=3)
    f, g = iso_oracle(X, X0), identity(Y)
    for span in greatest_dense_family(X, Y, EMB):
        report = verify_step(span, f, g)
        assert report.hypothesis_ok and report.conclusion_ok
        assert push_span(span, f, g) in greatest_dense_family(X0, Y, EMB)


def test_step_needs_embeddings_and_a_greatest_span():
    one, two = bare_set(1), bare_set(2)
    incl = Morphism(one, two, (0,), "incl")
    span = make_span(one, EMB, {0: 0})
    report = verify_step(span, incl, identity(one))
    assert not report.hypothesis_ok
    assert report.conclusion_ok is None
    assert "incl" in report.failures
    P = path(2)
    report = verify_step(make_span(P, EMB, {0: 1}), identity(P), identity(P))
    assert "not in the greatest family" in report.failures[0]
