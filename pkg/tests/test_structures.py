import itertools

import pytest
from hypothesis import given, strategies as st

from corpus import (
    DIGRAPH_SIGNATURE,
    all_maps,
    bare_set,
    cycle,
    cyclic_group,
    digraph,
    digraphs_isomorphic,
    klein_group,
    path,
    symmetric_group_3,
)
from errors import CapExceededError, PreconditionError, UnsupportedModeError, WorkspaceSemanticError
from structures import (
    CategoryMode,
    FinStructure,
    Morphism,
    MorphismClass,
    Signature,
    SubObject,
    all_isomorphisms,
    check_caps,
    classify_morphism,
    closure,
    compose,
    enumerate_test_objects,
    generated_substructure,
    identity,
    induced_subobject,
    is_generated_by,
    is_mono_in,
    is_morphism_in,
    iso_oracle,
    maximal_test_object,
    relabel,
    search_maps,
)


@st.composite
def digraphs(draw, max_size=3):
    n = draw(st.integers(min_value=0, max_value=max_size))
    pairs = [(a, b) for a in range(n) for b in range(n)]
    edges = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return digraph(n, edges)


def test_signature_rejects_duplicate_symbols():
    with pytest.raises(WorkspaceSemanticError):
        Signature("bad", (("E", 2),), (("E", 1),))


def test_build_rejects_tuple_outside_carrier():
    with pytest.raises(WorkspaceSemanticError, match="outside carrier"):
        FinStructure.build(DIGRAPH_SIGNATURE, 2, {"E": [(0, 5)]})


def test_build_rejects_partial_function_table():
    sig = Signature("unary", (), (("s", 1),))
    with pytest.raises(WorkspaceSemanticError, match="not total"):
        FinStructure.build(sig, 3, {}, {"s": [0, 1]})


def test_structure_equality_ignores_name():
    assert cycle(3, "a") == cycle(3, "b")
    assert cycle(3) != path(3)


def test_nested_and_flat_tables_agree():
    sig = Signature("binary", (), (("m", 2),))
    nested = FinStructure.build(sig, 2, {}, {"m": [[0, 1], [1, 0]]})
    flat = FinStructure.build(sig, 2, {}, {"m": [0, 1, 1, 0]})
    assert nested == flat
    assert nested.apply("m", (1, 1)) == 0


def test_classification_of_workspace_morphisms(examples, groups):
    expected = {
        "rot": MorphismClass.ISO,
        "id_tri": MorphismClass.ISO,
        "collapse": MorphismClass.HOM,
        "incl": MorphismClass.EMBEDDING,
        "swap": MorphismClass.ISO,
    }
    for name, level in expected.items():
        assert classify_morphism(examples.morphism(name)) == level
    assert classify_morphism(groups.morphism("double")) == MorphismClass.EMBEDDING
    assert classify_morphism(groups.morphism("iso4")) == MorphismClass.ISO


def test_injective_hom_that_does_not_reflect_is_mono_only(examples):
    f = Morphism(examples.structure("path2"), examples.structure("sym"), (0, 1), "f")
    assert classify_morphism(f) == MorphismClass.MONO_HOM
    assert is_mono_in(f, CategoryMode.STR)
    assert not is_morphism_in(f, CategoryMode.EMB)


def test_compose_applies_first_map_first(examples):
    rot = examples.morphism("rot")
    assert compose(identity(rot.source), rot).table == rot.table
    assert rot.then(identity(rot.target)).table == rot.table


def test_closure_in_cyclic_group():
    Z4 = cyclic_group(4)
    assert closure(Z4, [2]) == frozenset({0, 2})
    assert closure(Z4, []) == frozenset({0})
    assert generated_substructure(Z4, [1]).carrier == (0, 1, 2, 3)


def test_test_objects_of_an_edge():
    edge = path(2)
    assert len(enumerate_test_objects(edge, CategoryMode.EMB)) == 4
    # the two-element subobject appears with and without its edge
    assert len(enumerate_test_objects(edge, CategoryMode.STR)) == 5


def test_test_objects_of_a_group_are_subgroups():
    carriers = [G.carrier for G in enumerate_test_objects(cyclic_group(4), CategoryMode.EMB)]
    assert carriers == [(0,), (0, 2), (0, 1, 2, 3)]
    assert len(enumerate_test_objects(klein_group(), CategoryMode.EMB)) == 5


def test_budget_keeps_small_generators():
    Z4 = cyclic_group(4)
    whole = maximal_test_object(Z4)
    assert is_generated_by(whole, 2, CategoryMode.EMB)
    assert not is_generated_by(whole, 1, CategoryMode.EMB)
    assert [G.carrier for G in enumerate_test_objects(Z4, CategoryMode.EMB, budget=1)] == [(0,)]


def test_str_mode_needs_relational_signature():
    with pytest.raises(UnsupportedModeError):
        enumerate_test_objects(cyclic_group(2), CategoryMode.STR)


def test_caps():
    with pytest.raises(CapExceededError):
        check_caps(cycle(3), cap=2)
    check_caps(cycle(3), cap=3)


def test_materialize_relabels_and_includes():
    sub = induced_subobject(cycle(3), [1, 2])
    U, inclusion = sub.materialize()
    assert U.relation("E") == frozenset({(0, 1)})
    assert inclusion.table == (1, 2)
    assert classify_morphism(inclusion) == MorphismClass.EMBEDDING


def test_materialize_rejects_unclosed_carrier():
    with pytest.raises(PreconditionError, match="not closed"):
        SubObject(cyclic_group(4), (0, 1), ()).materialize()


def test_search_maps_counts_edge_embeddings():
    maps = list(search_maps(maximal_test_object(path(2)), cycle(3), "embedding"))
    assert sorted(tuple(m[x] for x in range(2)) for m in maps) == [(0, 1), (1, 2), (2, 0)]


def test_search_maps_respects_fixed_values():
    maps = list(search_maps(maximal_test_object(bare_set(2)), bare_set(3), "any", fixed={0: 2}))
    assert all(m[0] == 2 for m in maps)
    assert len(maps) == 2


def test_every_map_is_classified():
    levels = {classify_morphism(f) for f in all_maps(path(2), cycle(2))}
    assert MorphismClass.NOT_HOM in levels
    assert MorphismClass.MONO_HOM in levels


@given(digraphs(), st.randoms(use_true_random=False))
def test_relabelled_copy_is_isomorphic(X, rnd):
    perm = list(X.carrier)
    rnd.shuffle(perm)
    Y = relabel(X, perm)
    iso = iso_oracle(X, Y)
    assert iso is not None
    assert classify_morphism(iso) == MorphismClass.ISO


@given(digraphs(), digraphs())
def test_iso_oracle_matches_networkx(X, Y):
    assert (iso_oracle(X, Y) is not None) == digraphs_isomorphic(X, Y)


def test_all_isomorphisms_are_the_automorphisms():
    assert sorted(f.table for f in all_isomorphisms(cycle(3), cycle(3))) == [(0, 1, 2), (1, 2, 0), (2, 0, 1)]
    assert len(list(all_isomorphisms(cyclic_group(4), cyclic_group(4)))) == 2
    assert len(list(all_isomorphisms(klein_group(), klein_group()))) == 6
    assert list(all_isomorphisms(bare_set(2), bare_set(3))) == []


GROUPS = [cyclic_group(4), klein_group(), symmetric_group_3()]


@st.composite
def seeds_in_a_group(draw):
    G = draw(st.sampled_from(GROUPS))
    small = draw(st.sets(st.sampled_from(list(G.carrier))))
    large = small | draw(st.sets(st.sampled_from(list(G.carrier))))
    return G, small, large


@given(seeds_in_a_group())
def test_generated_substructure_is_a_closure_operator(case):
    G, small, large = case
    hull = set(generated_substructure(G, small).carrier)
    assert small <= hull
    assert hull <= set(generated_substructure(G, large).carrier)
    assert set(generated_substructure(G, hull).carrier) == hull


@pytest.mark.parametrize("X", [cyclic_group(4), klein_group(), cycle(3), bare_set(3)], ids=lambda X: X.name)
def test_emb_test_objects_are_the_closed_subsets(X):
    carriers = {G.carrier for G in enumerate_test_objects(X, CategoryMode.EMB)}
    subsets = (tuple(c) for r in range(X.size + 1) for c in itertools.combinations(X.carrier, r))
    assert carriers == {s for s in subsets if closure(X, s) == frozenset(s)}
