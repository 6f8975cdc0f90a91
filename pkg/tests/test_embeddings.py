import itertools

import pytest

from corpus import bare_set, cycle, cyclic_group, digraph, klein_group, path, shuffled_copy
from embeddings import (
    check_embedding_condition,
    check_purity,
    decide_back_and_forth_embedding,
    decide_lambda_embedding,
    disagreeing_subset,
    monomorphisms,
    monos_are_embeddings,
    all_dense_implies_embeddings,
)
from errors import NotDenseError, NotMonoError, PreconditionError
from span_calculus import decide_equivalent, enumerate_spans, greatest_dense_family
from structures import CategoryMode, MorphismClass, classify_morphism, compose, identity

EMB, STR = CategoryMode.EMB, CategoryMode.STR


def test_isomorphism_is_witnessed(examples):
    rot = examples.morphism("rot")
    S = greatest_dense_family(rot.source, rot.target, EMB)
    verdict = check_embedding_condition(rot, S)
    assert verdict.holds
    assert len(verdict.witnesses) == 8
    assert all(w.verify(rot) for w in verdict.witnesses)
    assert decide_lambda_embedding(rot, EMB)
    assert decide_lambda_embedding(rot, STR)


def test_proper_inclusion_is_not_an_embedding(examples, groups):
    assert not decide_lambda_embedding(examples.morphism("incl"), EMB)
    assert not decide_lambda_embedding(examples.morphism("incl"), STR)
    assert not decide_lambda_embedding(groups.morphism("double"), EMB)
    assert decide_lambda_embedding(groups.morphism("iso4"), EMB)


def test_condition_fails_on_a_non_witnessed_automorphism():
    X = bare_set(2)
    swap_family = greatest_dense_family(X, X, EMB).with_spans(
        s for s in greatest_dense_family(X, X, EMB) if s.mapping == {} or s.image != s.domain
    )
    identity_map = identity(X)
    verdict = check_embedding_condition(identity_map, swap_family)
    assert not verdict.holds
    assert verdict.failing_test_object.carrier == (0,)


def test_condition_needs_a_dense_family(examples):
    incl = examples.morphism("incl")
    with pytest.raises(NotDenseError):
        check_embedding_condition(incl, enumerate_spans(incl.source, incl.target, EMB))
    rot = examples.morphism("rot")
    with pytest.raises(PreconditionError):
        check_embedding_condition(incl, greatest_dense_family(rot.source, rot.target, EMB))


def test_purity_of_isomorphisms(examples):
    assert check_purity(examples.morphism("rot"), EMB).pure
    assert check_purity(examples.morphism("swap"), STR).pure


def test_purity_failure_reports_the_square(examples):
    verdict = check_purity(examples.morphism("incl"), EMB)
    assert not verdict.pure
    assert verdict.inner.carrier == ()
    assert verdict.outer.carrier == (0, 1, 2)
    assert verdict.to_dict()["square"]["outer"]["carrier"] == [0, 1, 2]


def test_purity_needs_a_mono(examples):
    with pytest.raises(NotMonoError):
        check_purity(examples.morphism("collapse"), STR)


def test_monomorphism_counts():
    assert len(list(monomorphisms(bare_set(2), bare_set(3), EMB))) == 6
    assert len(list(monomorphisms(path(2), cycle(3), EMB))) == 3
    assert len(list(monomorphisms(cyclic_group(2), klein_group(), EMB))) == 3


@pytest.mark.parametrize("mode", [EMB, STR])
def test_embeddings_between_small_digraphs_are_isomorphisms(mode):
    pool = [digraph(1, []), digraph(1, [(0, 0)]), digraph(2, []), path(2), digraph(2, [(0, 1), (1, 0)])]
    for X, Y in itertools.product(pool, repeat=2):
        for f in monomorphisms(X, Y, mode):
            assert decide_lambda_embedding(f, mode) == (classify_morphism(f) == MorphismClass.ISO)


def test_composition_of_embeddings(examples):
    rot = examples.morphism("rot")
    back = next(monomorphisms(rot.target, rot.source, EMB))
    assert decide_lambda_embedding(compose(rot, back), EMB)


def test_all_dense_implies_embeddings():
    assert monos_are_embeddings(bare_set(2), bare_set(2), EMB)
    assert not monos_are_embeddings(bare_set(1), bare_set(2), EMB)
    assert all_dense_implies_embeddings(bare_set(1), bare_set(2), EMB)
    assert all_dense_implies_embeddings(cyclic_group(2), cyclic_group(2), EMB)


def test_element_wise_clause(examples):
    assert decide_back_and_forth_embedding(examples.morphism("rot"))
    assert not decide_back_and_forth_embedding(examples.morphism("incl"))
    one, two = bare_set(1), bare_set(2)
    # no partial isomorphisms survive between sets of different sizes
    assert disagreeing_subset(next(monomorphisms(one, two, EMB))) == ()
    assert disagreeing_subset(identity(two)) is None


def test_element_wise_and_span_clauses_agree():
    C3 = cycle(3)
    pool = [bare_set(1), bare_set(2), path(2), digraph(2, [(0, 1), (1, 0)]), C3, shuffled_copy(C3, seed=2)]
    for X, Y in itertools.product(pool, repeat=2):
        if X.signature != Y.signature or X.size > Y.size:
            continue
        for f in monomorphisms(X, Y, EMB):
            clause = decide_back_and_forth_embedding(f)
            assert clause == decide_lambda_embedding(f, EMB) == decide_lambda_embedding(f, STR)


def test_embeddings_imply_equivalence():
    pool = [bare_set(2), path(2), cycle(3), digraph(3, [(0, 1), (1, 2)]), cyclic_group(2), klein_group()]
    for X, Y in itertools.product(pool, repeat=2):
        if X.signature != Y.signature:
            continue
        for f in monomorphisms(X, Y, EMB):
            if decide_lambda_embedding(f, EMB):
                assert decide_equivalent(X, Y, EMB)
