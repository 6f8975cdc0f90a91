"""
Embedding checks
Decide whether a morphism is witnessed through a dense span family, and check purity
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional

from errors import NotDenseError, NotMonoError, PreconditionError
from span_calculus import (
    BACK,
    Span,
    SpanFamily,
    all_spans_dense,
    back_and_forth_family,
    check_density,
    covers,
    greatest_dense_family,
)
from structures import (
    CategoryMode,
    FinStructure,
    Morphism,
    Row,
    SubObject,
    check_caps,
    check_mode,
    enumerate_subobjects,
    enumerate_test_objects,
    is_mono_in,
    maximal_test_object,
    search_maps,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EmbeddingWitness:
    """A span through which a test mono g: G ↣ X factors as u·t = g with v·t = f·g"""

    test_object: SubObject
    span: Span
    connecting: Row  # t: position in span.domain of each element of the test object

    def verify(self, f: Morphism) -> bool:
        for i, j in enumerate(self.connecting):
            x = self.test_object.carrier[i]
            if self.span.domain[j] != x or self.span.image[j] != f(x):
                return False
        return covers(self.span, self.test_object, BACK)

    def to_dict(self, mode: CategoryMode) -> Dict:
        return {
            "test_object": self.test_object.to_dict(),
            "span": self.span.to_dict(mode),
            "connecting": list(self.connecting),
        }


@dataclass(frozen=True)
class EmbeddingVerdict:
    morphism: Morphism
    holds: bool
    witnesses: List[EmbeddingWitness] = field(default_factory=list)
    failing_test_object: Optional[SubObject] = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.holds

    def to_dict(self, mode: CategoryMode) -> Dict:
        return {
            "morphism": self.morphism.to_dict(),
            "holds": self.holds,
            "reason": self.reason,
            "witnesses": [w.to_dict(mode) for w in self.witnesses],
            "failing_test_object": self.failing_test_object.to_dict() if self.failing_test_object else None,
        }


def _witness(f: Morphism, G: SubObject, spans: List[Span]) -> Optional[EmbeddingWitness]:
    for span in spans:
        if not covers(span, G, BACK):
            continue
        mapping = span.mapping
        if all(mapping[x] == f(x) for x in G.carrier):
            position = {a: j for j, a in enumerate(span.domain)}
            return EmbeddingWitness(G, span, tuple(position[x] for x in G.carrier))
    return None


def check_embedding_condition(f: Morphism, S: SpanFamily, with_witnesses: bool = True) -> EmbeddingVerdict:
    """
    Check f against a dense family S between its source and target.

    Every test object of the source needs a span of S containing it whose right leg agrees with f there.
    Raises NotDenseError when S is not dense.
    """
    if S.left != f.source or S.right != f.target:
        raise PreconditionError(f"family does not live between the endpoints of {f.name}")
    density = check_density(S)
    if not density.dense:
        raise NotDenseError(f"family for {f.name} is not dense: {density.reason}")
    spans = S.sorted()
    top = maximal_test_object(f.source)
    # the maximal test object contains every other one, so its witness serves them all
    if _witness(f, top, spans) is not None:
        if not with_witnesses:
            return EmbeddingVerdict(f, True, [], None, "witnessed")
        tests = enumerate_test_objects(f.source, S.mode)
        return EmbeddingVerdict(f, True, [_witness(f, G, spans) for G in tests], None, "witnessed")
    for G in enumerate_test_objects(f.source, S.mode):
        if _witness(f, G, spans) is None:
            logger.info("no witness for %s on test object %s", f.name, G.carrier)
            return EmbeddingVerdict(f, False, [], G, "test object without witness")
    return EmbeddingVerdict(f, False, [], top, "test object without witness")


def decide_lambda_embedding(f: Morphism, mode: CategoryMode, cap: Optional[int] = None) -> bool:
    check_mode(f.source.signature, mode)
    check_caps(f.source, f.target, cap=cap)
    S = greatest_dense_family(f.source, f.target, mode, cap)
    if not S.spans:
        return False
    return check_embedding_condition(f, S, with_witnesses=False).holds


# ---------- PURITY ----------
@dataclass(frozen=True)
class PurityVerdict:
    pure: bool
    inner: Optional[SubObject] = None  # A, the square's corner mapped into the source
    outer: Optional[SubObject] = None  # B, the test object of the target

    def __bool__(self) -> bool:
        return self.pure

    def to_dict(self) -> Dict:
        return {
            "pure": self.pure,
            "square": None
            if self.pure
            else {"inner": self.inner.to_dict(), "outer": self.outer.to_dict()},
        }


def _pullback_leg(f: Morphism, A: SubObject, mode: CategoryMode) -> Optional[Dict[int, int]]:
    """u = f⁻¹ on A when it lands in the source and is an arrow of the category"""
    inverse = {y: x for x, y in enumerate(f.table)}
    if any(a not in inverse for a in A.carrier):
        return None
    u = {a: inverse[a] for a in A.carrier}
    kind = "embedding" if mode == CategoryMode.EMB else "hom"
    if next(search_maps(A, f.source, kind, fixed=u, injective=True), None) is None:
        return None
    return u


def check_purity(f: Morphism, mode: CategoryMode, cap: Optional[int] = None) -> PurityVerdict:
    """Every commuting square f·u = v·g with test objects A ↣ B ↣ target has a mono filler t: B → source, t·g = u"""
    check_mode(f.source.signature, mode)
    check_caps(f.source, f.target, cap=cap)
    if not is_mono_in(f, mode):
        raise NotMonoError(f"{f.name} is not a monomorphism in {mode.value} mode")
    kind = "embedding" if mode == CategoryMode.EMB else "hom"
    for B in enumerate_test_objects(f.target, mode):
        for A in enumerate_subobjects(B, mode):
            u = _pullback_leg(f, A, mode)
            if u is None:
                continue
            if next(search_maps(B, f.source, kind, fixed=u, injective=True), None) is None:
                logger.info("square %s in %s has no filler for %s", A.carrier, B.carrier, f.name)
                return PurityVerdict(False, A, B)
    return PurityVerdict(True)


# ---------- MONOS ----------
def monomorphisms(X: FinStructure, Y: FinStructure, mode: CategoryMode) -> Iterator[Morphism]:
    kind = "embedding" if mode == CategoryMode.EMB else "hom"
    for i, mapping in enumerate(search_maps(maximal_test_object(X), Y, kind, injective=True)):
        yield Morphism(X, Y, tuple(mapping[x] for x in X.carrier), f"mono{i}")


def monos_are_embeddings(X: FinStructure, Y: FinStructure, mode: CategoryMode, cap: Optional[int] = None) -> bool:
    """Whether every mono X → Y passes decide_lambda_embedding"""
    return all(decide_lambda_embedding(f, mode, cap) for f in monomorphisms(X, Y, mode))


def all_dense_implies_embeddings(X: FinStructure, Y: FinStructure, mode: CategoryMode, cap: Optional[int] = None) -> bool:
    return not all_spans_dense(X, Y, mode, cap) or monos_are_embeddings(X, Y, mode, cap)


# ---------- PARTIAL ISOMORPHISMS ----------
def disagreeing_subset(f: Morphism, cap: Optional[int] = None) -> Optional[Row]:
    """Least finite Z ⊆ source on which no back-and-forth partial isomorphism agrees with f"""
    I = back_and_forth_family(f.source, f.target, cap)
    if not I.spans:
        return ()
    for r in range(f.source.size + 1):
        for Z in itertools.combinations(f.source.carrier, r):
            if not any(all(h.mapping.get(z) == f(z) for z in Z) for h in I.spans):
                return Z
    return None


def decide_back_and_forth_embedding(f: Morphism, cap: Optional[int] = None) -> bool:
    """Some element-wise back-and-forth family agrees with f on every finite set of elements"""
    check_caps(f.source, f.target, cap=cap)
    Z = disagreeing_subset(f, cap)
    if Z is not None:
        logger.debug("%s: no partial isomorphism agrees on %s", f.name, list(Z))
    return Z is None
