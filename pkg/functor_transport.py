"""
Functor transport
Built-in functors between structure categories and transport of span families along them
"""

import itertools
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, Iterable, List, Optional, Tuple, Union

from networkx.utils import UnionFind

from errors import NotDenseError, PreconditionError, TheoremViolation
from span_calculus import Span, SpanFamily, check_density, extends, make_span, span_legs
from structures import (
    CategoryMode,
    FinStructure,
    Morphism,
    Row,
    Signature,
    check_mode,
    induced_subobject,
    is_morphism_in,
    is_mono_in,
)
from theory import (
    GROUP_SIGNATURE,
    Theory,
    abelian_group_theory,
    empty_theory,
    group_theory,
    image_factorization,
    satisfies,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FunctorSpec:
    name: str
    source_signature: Signature
    target_signature: Signature
    source_mode: CategoryMode
    target_mode: CategoryMode
    on_object: Callable[[FinStructure], FinStructure] = field(compare=False)
    on_morphism: Callable[[Morphism], Morphism] = field(compare=False)
    preserves_monos: bool = True
    target_theory: Optional[Theory] = None
    source_theory: Optional[Theory] = None

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "source": {"signature": self.source_signature.name, "mode": self.source_mode.value},
            "target": {"signature": self.target_signature.name, "mode": self.target_mode.value},
            "preserves_monos": self.preserves_monos,
            "target_theory": self.target_theory.name if self.target_theory else None,
        }


def apply_functor(F: FunctorSpec, x: Union[FinStructure, Morphism]) -> Union[FinStructure, Morphism]:
    """Image of a structure or a morphism; inputs outside the source category are rejected"""
    if isinstance(x, Morphism):
        for end in (x.source, x.target):
            _require_source_object(F, end)
        if not is_morphism_in(x, F.source_mode):
            raise PreconditionError(f"{x.name} is not an arrow of the {F.source_mode.value} source of {F.name}")
        return F.on_morphism(x)
    _require_source_object(F, x)
    return F.on_object(x)


def _require_source_object(F: FunctorSpec, X: FinStructure):
    if X.signature != F.source_signature:
        raise PreconditionError(f"{X.name} is not over {F.source_signature.name}, the source signature of {F.name}")
    if F.source_theory is not None:
        result = satisfies(X, F.source_theory)
        if not result:
            raise PreconditionError(f"{X.name} is not a model of {F.source_theory.name}: {result.sentence.text}")


# ---------- BUILT-IN FUNCTORS ----------
def identity_functor(
    signature: Signature, mode: CategoryMode = CategoryMode.EMB, target_mode: Optional[CategoryMode] = None
) -> FunctorSpec:
    return FunctorSpec(
        name="identity",
        source_signature=signature,
        target_signature=signature,
        source_mode=mode,
        target_mode=target_mode or mode,
        on_object=lambda X: X,
        on_morphism=lambda f: f,
        preserves_monos=True,
        target_theory=empty_theory(signature),
    )


def reduct_functor(signature: Signature, keep: Iterable[str], mode: CategoryMode = CategoryMode.EMB, name: str = "reduct") -> FunctorSpec:
    """Forget every symbol outside keep"""
    keep = tuple(keep)
    target = signature.reduct(keep, name=None if keep else "set")

    def on_object(X: FinStructure) -> FinStructure:
        rels = {sym: rows for sym, rows in X.relations if target.has_relation(sym)}
        funs = {sym: list(flat) for sym, flat in X.functions if target.has_function(sym)}
        return FinStructure.build(target, X.size, rels, funs, f"{X.name}|{target.name}")

    def on_morphism(f: Morphism) -> Morphism:
        return Morphism(on_object(f.source), on_object(f.target), f.table, f.name)

    return FunctorSpec(
        name=name,
        source_signature=signature,
        target_signature=target,
        source_mode=mode,
        target_mode=mode,
        on_object=on_object,
        on_morphism=on_morphism,
        preserves_monos=True,
        target_theory=empty_theory(target),
    )


def underlying_set_functor(signature: Signature, mode: CategoryMode = CategoryMode.EMB) -> FunctorSpec:
    return reduct_functor(signature, (), mode, name="uset")


@lru_cache(maxsize=128)
def abelianization_quotient(G: FinStructure) -> Tuple[FinStructure, Row]:
    """G/[G,G] and the projection; classes are numbered by their least element"""
    uf = UnionFind(G.carrier)
    m = lambda a, b: G.apply("m", (a, b))  # noqa: E731
    for a, b in itertools.product(G.carrier, repeat=2):
        uf.union(m(a, b), m(b, a))
    changed = True
    while changed:
        changed = False
        for x, x2 in itertools.product(G.carrier, repeat=2):
            if x >= x2 or uf[x] != uf[x2]:
                continue
            pairs = [(G.apply("inv", (x,)), G.apply("inv", (x2,)))]
            pairs += [(m(x, y), m(x2, y)) for y in G.carrier]
            pairs += [(m(y, x), m(y, x2)) for y in G.carrier]
            for p, q in pairs:
                if uf[p] != uf[q]:
                    uf.union(p, q)
                    changed = True
    classes = sorted((sorted(c) for c in uf.to_sets()), key=lambda c: c[0])
    projection = [0] * G.size
    for i, members in enumerate(classes):
        for v in members:
            projection[v] = i
    reps = [c[0] for c in classes]
    k = len(reps)
    table = [projection[m(reps[i], reps[j])] for i in range(k) for j in range(k)]
    inv = [projection[G.apply("inv", (reps[i],))] for i in range(k)]
    e = [projection[G.apply("e", ())]]
    logger.debug("abelianization of %s has %d classes", G.name, k)
    quotient = FinStructure.build(GROUP_SIGNATURE, k, {}, {"m": table, "inv": inv, "e": e}, f"{G.name}^ab")
    return quotient, tuple(projection)


def abelianization_functor() -> FunctorSpec:
    def on_object(G: FinStructure) -> FinStructure:
        return abelianization_quotient(G)[0]

    def on_morphism(f: Morphism) -> Morphism:
        source, source_projection = abelianization_quotient(f.source)
        target, projection = abelianization_quotient(f.target)
        table = [0] * source.size
        for x in f.source.carrier:
            table[source_projection[x]] = projection[f(x)]
        return Morphism(source, target, tuple(table), f"{f.name}^ab")

    return FunctorSpec(
        name="abelianization",
        source_signature=GROUP_SIGNATURE,
        target_signature=GROUP_SIGNATURE,
        source_mode=CategoryMode.EMB,
        target_mode=CategoryMode.EMB,
        on_object=on_object,
        on_morphism=on_morphism,
        preserves_monos=False,
        target_theory=abelian_group_theory(),
        source_theory=group_theory(),
    )


BUILTIN_FUNCTORS = ("identity", "reduct", "uset", "abelianization")


def functor_by_name(
    name: str, signature: Signature, mode: CategoryMode = CategoryMode.EMB, keep: Iterable[str] = ()
) -> FunctorSpec:
    if name == "identity":
        return identity_functor(signature, mode)
    if name == "reduct":
        return reduct_functor(signature, keep, mode)
    if name == "uset":
        return underlying_set_functor(signature, mode)
    if name == "abelianization":
        return abelianization_functor()
    raise PreconditionError(f"unknown functor {name}; choose from {', '.join(BUILTIN_FUNCTORS)}")


# ---------- TRANSPORT ----------
def _require_dense_source(F: FunctorSpec, S: SpanFamily):
    if S.left.signature != F.source_signature or S.mode != F.source_mode:
        raise PreconditionError(f"family does not live in the source category of {F.name}")
    verdict = check_density(S)
    if not verdict.dense:
        raise NotDenseError(f"cannot transport a family that is not dense: {verdict.reason}")


def _image_span(FX: FinStructure, Fu: Morphism, Fv: Morphism, mode: CategoryMode) -> Span:
    mapping = {Fu(z): Fv(z) for z in Fu.source.carrier}
    relations = None
    if mode == CategoryMode.STR:
        relations = {
            sym: [tuple(Fu(v) for v in row) for row in rows] for sym, rows in Fu.source.relations
        }
    return make_span(FX, mode, mapping, relations)


def transport_direct(F: FunctorSpec, S: SpanFamily) -> SpanFamily:
    """{F(X) ← F(U) → F(Y)} for a mono-preserving F"""
    if not F.preserves_monos:
        raise PreconditionError(f"{F.name} does not preserve monomorphisms; use the image route")
    _require_dense_source(F, S)
    X, Y = S.left, S.right
    FX, FY = apply_functor(F, X), apply_functor(F, Y)
    check_mode(FX.signature, F.target_mode)
    spans = []
    for span in S.sorted():
        _, u, v = span_legs(span, X, Y)
        Fu, Fv = apply_functor(F, u), apply_functor(F, v)
        if not (is_mono_in(Fu, F.target_mode) and is_mono_in(Fv, F.target_mode)):
            raise TheoremViolation(f"{F.name} sent a mono leg to a non-mono")
        spans.append(_image_span(FX, Fu, Fv, F.target_mode))
    return SpanFamily(FX, FY, F.target_mode, frozenset(spans))


@dataclass(frozen=True)
class Certificate:
    """The canonical map between the images of F(left leg) and F(right leg) of one span"""

    span: Span
    mapping: Tuple[Tuple[int, int], ...]
    well_defined: bool
    bijective: bool
    preserves_functions: bool
    preserves_relations: bool
    reflects_relations: bool

    @property
    def passed(self) -> bool:
        return (
            self.well_defined
            and self.bijective
            and self.preserves_functions
            and self.preserves_relations
            and self.reflects_relations
        )

    def to_dict(self, mode: CategoryMode) -> Dict:
        return {
            "span": self.span.to_dict(mode),
            "map": [list(p) for p in self.mapping],
            "passed": self.passed,
            "well_defined": self.well_defined,
            "bijective": self.bijective,
            "preserves_functions": self.preserves_functions,
            "preserves_relations": self.preserves_relations,
            "reflects_relations": self.reflects_relations,
        }


@dataclass(frozen=True)
class ImageTransport:
    family: SpanFamily
    certificates: List[Certificate]

    @property
    def all_certified(self) -> bool:
        return all(c.passed for c in self.certificates)


def certify_images(span: Span, Fu: Morphism, Fv: Morphism, T: Theory) -> Certificate:
    """Check that w(F(u)(z)) = F(v)(z) is a well-defined isomorphism between the two images"""
    left = image_factorization(Fu, T)
    right = image_factorization(Fv, T)
    FX, FY = Fu.target, Fv.target
    w: Dict[int, int] = {}
    well_defined = True
    for z in Fu.source.carrier:
        a, b = Fu(z), Fv(z)
        if w.setdefault(a, b) != b:
            well_defined = False
    bijective = well_defined and sorted(w) == sorted(left.image_set) and sorted(set(w.values())) == sorted(right.image_set)
    bijective = bijective and len(set(w.values())) == len(w)
    functions_ok = relations_ok = reflects_ok = False
    if bijective:
        domain = sorted(w)
        functions_ok = all(
            w[FX.apply(sym, args)] == FY.apply(sym, [w[a] for a in args])
            for sym, arity in FX.signature.functions
            for args in itertools.product(domain, repeat=arity)
        )
        relations_ok = reflects_ok = True
        for sym, arity in FX.signature.relations:
            for row in itertools.product(domain, repeat=arity):
                here = FX.holds(sym, row)
                there = FY.holds(sym, [w[a] for a in row])
                relations_ok = relations_ok and (not here or there)
                reflects_ok = reflects_ok and (not there or here)
    return Certificate(
        span, tuple(sorted(w.items())), well_defined, bijective, functions_ok, relations_ok, reflects_ok
    )


def transport_image(F: FunctorSpec, S: SpanFamily) -> ImageTransport:
    """Image factorizations of {F(X) ← F(U) → F(Y)} in the models of F's target theory"""
    if F.target_theory is None:
        raise PreconditionError(f"{F.name} has no target theory; the image route needs one")
    _require_dense_source(F, S)
    X, Y = S.left, S.right
    FX, FY = apply_functor(F, X), apply_functor(F, Y)
    spans, certificates = [], []
    for span in S.sorted():
        _, u, v = span_legs(span, X, Y)
        Fu, Fv = apply_functor(F, u), apply_functor(F, v)
        certificate = certify_images(span, Fu, Fv, F.target_theory)
        certificates.append(certificate)
        if not certificate.passed:
            logger.error("canonical image map failed for span %s under %s", span.domain, F.name)
            raise TheoremViolation(f"images of the legs of span {span.to_dict(S.mode)} are not canonically isomorphic")
        spans.append(make_span(FX, CategoryMode.EMB, dict(certificate.mapping)))
    return ImageTransport(SpanFamily(FX, FY, CategoryMode.EMB, frozenset(spans)), certificates)


def induced_image_map(F: FunctorSpec, S: SpanFamily, small: Span, big: Span) -> Morphism:
    """The map W0 → W1 between image factorizations induced by a span morphism small → big"""
    if small not in S or big not in S:
        raise PreconditionError("both spans must belong to the family")
    if not extends(small, big):
        raise PreconditionError("there is no span morphism between the given spans")
    X, Y = S.left, S.right
    FX = apply_functor(F, X)
    images = []
    for span in (small, big):
        _, u, v = span_legs(span, X, Y)
        Fu, Fv = apply_functor(F, u), apply_functor(F, v)
        images.append((sorted(Fu.image), {Fu(z): Fv(z) for z in Fu.source.carrier}))
    (w0, right0), (w1, right1) = images
    position = {a: j for j, a in enumerate(w1)}
    if any(a not in position or right1[a] != right0[a] for a in w0):
        raise TheoremViolation("span morphism does not induce a map of image factorizations")
    W0, _ = induced_subobject(FX, w0).materialize()
    W1, _ = induced_subobject(FX, w1).materialize()
    return Morphism(W0, W1, tuple(position[a] for a in w0), "w")
