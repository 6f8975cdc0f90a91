import itertools

import pytest

from corpus import (
    COLORED_SIGNATURE,
    all_maps,
    colored_digraph,
    cyclic_group,
    groups_up_to_8,
    shuffled_copy,
    symmetric_group_3,
)
from embeddings import decide_lambda_embedding
from errors import NotDenseError, PreconditionError
from functor_transport import (
    abelianization_functor,
    abelianization_quotient,
    apply_functor,
    functor_by_name,
    identity_functor,
    induced_image_map,
    reduct_functor,
    transport_direct,
    transport_image,
    underlying_set_functor,
)
from span_calculus import check_density, enumerate_spans, greatest_dense_family
from structures import CategoryMode, FinStructure, MorphismClass, classify_morphism, compose, identity, iso_oracle
from theory import GROUP_SIGNATURE, abelian_group_theory, satisfies

EMB, STR = CategoryMode.EMB, CategoryMode.STR


def test_abelianization_sizes(groups):
    assert abelianization_quotient(groups.structure("S3"))[0].size == 2
    assert abelianization_quotient(groups.structure("Z4"))[0].size == 4
    assert abelianization_quotient(groups.structure("V4"))[0].size == 4
    assert abelianization_quotient(cyclic_group(1))[0].size == 1


def test_abelianization_of_s3_splits_by_sign(groups):
    quotient, projection = abelianization_quotient(groups.structure("S3"))
    # identity and the two 3-cycles land in the class of the identity
    assert projection == (0, 1, 1, 1, 0, 0)
    assert satisfies(quotient, abelian_group_theory())


def test_abelianization_on_morphisms(groups):
    F = abelianization_functor()
    iso4 = apply_functor(F, groups.morphism("iso4"))
    assert classify_morphism(iso4) == MorphismClass.ISO
    double = apply_functor(F, groups.morphism("double"))
    assert double.table == (0, 2)


def test_abelianization_rejects_non_groups():
    magma = FinStructure.build(GROUP_SIGNATURE, 2, {}, {"m": [[0, 0], [0, 0]], "inv": [0, 0], "e": [0]}, "magma")
    with pytest.raises(PreconditionError, match="not a model"):
        apply_functor(abelianization_functor(), magma)


def test_identity_transport_is_the_family(examples):
    tri, tri2 = examples.structure("tri"), examples.structure("tri2")
    S = greatest_dense_family(tri, tri2, EMB)
    T = transport_direct(identity_functor(tri.signature), S)
    assert T.spans == S.spans


def test_underlying_set_transport_stays_dense(examples):
    tri, tri2 = examples.structure("tri"), examples.structure("tri2")
    F = underlying_set_functor(tri.signature)
    T = transport_direct(F, greatest_dense_family(tri, tri2, EMB))
    assert T.left.signature.name == "set"
    assert T.left.relations == ()
    assert check_density(T).dense


def test_reduct_keeps_named_symbols():
    X = colored_digraph(3, [(0, 1), (1, 2), (2, 0)], [0], "X")
    Y = shuffled_copy(X, seed=5)
    F = reduct_functor(COLORED_SIGNATURE, ["E"])
    assert apply_functor(F, X).signature.relation_names == ["E"]
    T = transport_direct(F, greatest_dense_family(X, Y, EMB))
    assert check_density(T).dense


def test_direct_route_needs_mono_preservation(groups):
    G = groups.structure("Z4")
    with pytest.raises(PreconditionError, match="image route"):
        transport_direct(abelianization_functor(), greatest_dense_family(G, groups.structure("Z4b"), EMB))


def test_transport_needs_a_dense_family(examples):
    two, three = examples.structure("two"), examples.structure("three")
    with pytest.raises(NotDenseError):
        transport_direct(identity_functor(two.signature), enumerate_spans(two, three, EMB))


def test_image_transport_of_groups():
    F = abelianization_functor()
    for G in groups_up_to_8():
        if G.size > 6:
            continue
        H = shuffled_copy(G, seed=G.size)
        result = transport_image(F, greatest_dense_family(G, H, EMB))
        assert result.all_certified, G.name
        assert result.family.mode == EMB
        assert check_density(result.family).dense, G.name


def test_induced_image_map_between_image_factorizations():
    G = symmetric_group_3()
    H = shuffled_copy(G, seed=3)
    S = greatest_dense_family(G, H, EMB)
    small = next(s for s in S if len(s.domain) == 1)
    big = next(s for s in S if len(s.domain) == G.size)
    w = induced_image_map(abelianization_functor(), S, small, big)
    assert (w.source.size, w.target.size) == (1, 2)
    assert classify_morphism(w) >= MorphismClass.EMBEDDING


def test_functor_lookup(examples):
    sig = examples.structure("tri").signature
    assert functor_by_name("uset", sig).name == "uset"
    assert functor_by_name("reduct", sig, STR, ["E"]).target_mode == STR
    with pytest.raises(PreconditionError, match="unknown functor"):
        functor_by_name("free", sig)


def _embeddings(X, Y):
    return [f for f in all_maps(X, Y) if classify_morphism(f) >= MorphismClass.EMBEDDING]


def test_abelianization_is_a_functor():
    F = abelianization_functor()
    Z2, Z4, S3 = cyclic_group(2), cyclic_group(4), symmetric_group_3()
    for G in (Z2, Z4, S3):
        FG = apply_functor(F, G)
        assert apply_functor(F, identity(G)).table == tuple(FG.carrier)
    for X, Y, Z in [(Z2, Z4, Z4), (Z2, S3, S3), (S3, S3, S3), (Z2, Z2, S3)]:
        for f, g in itertools.product(_embeddings(X, Y), _embeddings(Y, Z)):
            assert apply_functor(F, compose(f, g)).table == compose(apply_functor(F, f), apply_functor(F, g)).table


def test_reduct_is_a_functor():
    X = colored_digraph(3, [(0, 1), (1, 2), (2, 0)], [0], "X")
    Y = shuffled_copy(X, seed=1)
    F = reduct_functor(COLORED_SIGNATURE, ["E"])
    f, g = iso_oracle(X, Y), iso_oracle(Y, X)
    assert apply_functor(F, identity(X)).table == (0, 1, 2)
    assert apply_functor(F, compose(f, g)).table == compose(apply_functor(F, f), apply_functor(F, g)).table


def test_functors_carry_embeddings_to_embeddings():
    uset = underlying_set_functor(GROUP_SIGNATURE)
    abelianization = abelianization_functor()
    for G in groups_up_to_8():
        if G.size > 6:
            continue
        f = iso_oracle(G, shuffled_copy(G, seed=G.size + 1))
        assert decide_lambda_embedding(f, EMB)
        assert decide_lambda_embedding(apply_functor(uset, f), EMB), G.name
        assert decide_lambda_embedding(apply_functor(abelianization, f), EMB), G.name
    X = colored_digraph(3, [(0, 1), (1, 2)], [2], "X")
    f = iso_oracle(X, shuffled_copy(X, seed=4))
    assert decide_lambda_embedding(apply_functor(reduct_functor(COLORED_SIGNATURE, ["C"]), f), EMB)
