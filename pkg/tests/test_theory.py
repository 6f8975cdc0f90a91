import pytest

from corpus import DIGRAPH_SIGNATURE, cycle, cyclic_group, digraph, groups_up_to_8, symmetric_group_3
from errors import PreconditionError, WorkspaceSemanticError, WorkspaceSyntaxError
from structures import CategoryMode, Morphism, MorphismClass, Signature, classify_morphism, enumerate_test_objects
from theory import (
    FALSE,
    GROUP_SIGNATURE,
    INEQUALITY_SYMBOL,
    App,
    Atom,
    Equals,
    Var,
    abelian_group_theory,
    empty_theory,
    group_theory,
    image_factorization,
    inequality_expansion,
    parse_sentence,
    parse_theory,
    satisfies,
    with_inequality,
)

SYMMETRY = "forall x y. E(x,y) -> E(y,x)"


def test_parse_relational_sentence():
    s = parse_sentence(SYMMETRY, DIGRAPH_SIGNATURE)
    assert s.variables == ("x", "y")
    assert s.antecedent == Atom("E", (Var("x"), Var("y")))
    assert s.consequent == Atom("E", (Var("y"), Var("x")))


def test_parse_equation_with_constant():
    s = parse_sentence("forall x. true -> m(x, e) = x", GROUP_SIGNATURE)
    assert s.consequent == Equals(App("m", (Var("x"), App("e"))), Var("x"))


def test_false_consequent():
    s = parse_sentence("forall x. E(x,x) -> false", DIGRAPH_SIGNATURE)
    assert s.consequent == FALSE


@pytest.mark.parametrize(
    "text",
    [
        "forall x. not E(x,x) -> false",
        "forall x. E(x,x) -> exists y. E(x,y)",
        "forall x. E(x,x)",
        "forall x. E(x,x) -> E(x,x) extra",
    ],
)
def test_rejects_sentences_outside_the_fragment(text):
    with pytest.raises(WorkspaceSyntaxError):
        parse_sentence(text, DIGRAPH_SIGNATURE)


def test_semantic_errors_carry_position():
    with pytest.raises(WorkspaceSemanticError) as info:
        parse_sentence("forall x. E(x) -> false", DIGRAPH_SIGNATURE, line=4, column=1)
    assert info.value.line == 4
    assert "arity" in info.value.bare_message
    with pytest.raises(WorkspaceSemanticError, match="unbound"):
        parse_sentence("forall x. true -> m(x, y) = x", GROUP_SIGNATURE)


def test_parse_theory_splits_lines_and_semicolons():
    T = parse_theory("forall x. E(x,x) -> false ; forall x y. E(x,y) -> E(y,x)\n# comment\n", DIGRAPH_SIGNATURE)
    assert len(T.sentences) == 2
    assert T.to_dict()["signature"] == "digraph"


def test_satisfies_reports_failing_assignment():
    T = parse_theory(SYMMETRY, DIGRAPH_SIGNATURE, "symmetric")
    assert satisfies(digraph(2, [(0, 1), (1, 0)]), T).holds
    result = satisfies(cycle(3), T)
    assert not result
    assert result.to_dict() == {"holds": False, "sentence": SYMMETRY, "assignment": {"x": 0, "y": 1}}


def test_group_axioms():
    for G in groups_up_to_8():
        assert satisfies(G, group_theory()), G.name
    assert satisfies(cyclic_group(6), abelian_group_theory())
    assert not satisfies(symmetric_group_3(), abelian_group_theory())


def test_image_factorization_of_collapse(examples):
    f = examples.morphism("collapse")
    split = image_factorization(f, empty_theory(f.source.signature))
    assert split.image.size == 1
    assert split.image_set == (0,)
    assert classify_morphism(split.embedding) >= MorphismClass.EMBEDDING
    assert [split.embedding(split.surjection(x)) for x in f.source.carrier] == list(f.table)


def test_image_factorization_needs_models(examples):
    f = examples.morphism("incl")
    irreflexive = examples.theory("irreflexive")
    assert image_factorization(f, irreflexive).image.size == 2
    with pytest.raises(PreconditionError, match="not a model"):
        image_factorization(examples.morphism("collapse"), irreflexive)


def test_inequality_extension():
    T = with_inequality(empty_theory(DIGRAPH_SIGNATURE))
    assert T.signature.has_relation(INEQUALITY_SYMBOL)
    expanded = inequality_expansion(cycle(3), T.signature)
    assert satisfies(expanded, T)
    assert len(expanded.relation(INEQUALITY_SYMBOL)) == 6


def test_image_factorization_of_a_quotient():
    f = Morphism(cyclic_group(4), cyclic_group(2), (0, 1, 0, 1), "mod2")
    split = image_factorization(f, group_theory())
    assert split.image.size == 2
    assert split.surjection.table == (0, 1, 0, 1)
    assert classify_morphism(split.embedding) == MorphismClass.ISO


def test_factoring_an_embedding_leaves_an_iso_then_an_embedding():
    f = Morphism(cyclic_group(2), cyclic_group(4), (0, 2), "double")
    split = image_factorization(f, abelian_group_theory())
    assert split.image_set == (0, 2)
    assert classify_morphism(split.surjection) == MorphismClass.ISO
    assert classify_morphism(split.embedding) >= MorphismClass.EMBEDDING


def _substructures(X):
    return [G.materialize()[0] for G in enumerate_test_objects(X, CategoryMode.EMB)]


def test_models_are_closed_under_substructures():
    for G in groups_up_to_8():
        if G.size <= 6:
            assert all(satisfies(H, group_theory()) for H in _substructures(G)), G.name
    assert all(satisfies(H, abelian_group_theory()) for H in _substructures(cyclic_group(4)))
    symmetric = parse_theory(SYMMETRY, DIGRAPH_SIGNATURE, "symmetric")
    X = digraph(3, [(0, 1), (1, 0), (1, 2), (2, 1)])
    assert satisfies(X, symmetric)
    assert all(satisfies(U, symmetric) for U in _substructures(X))


def test_unsigned_theories_apply_where_their_symbols_are_declared():
    T = parse_theory("forall x. E(x,x) -> false\nforall x. true -> f(x) = x", None, "loose")
    assert T.symbols == {("rel", "E", 2), ("fun", "f", 1)}
    assert T.applies_to(Signature("ef", (("E", 2),), (("f", 1),)))
    assert not T.applies_to(DIGRAPH_SIGNATURE)
    assert not T.applies_to(Signature("wide", (("E", 3),), (("f", 1),)))
    assert group_theory().applies_to(GROUP_SIGNATURE)
    assert not group_theory().applies_to(DIGRAPH_SIGNATURE)
