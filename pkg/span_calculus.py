"""
Span calculus
Spans and span families, density checking, the greatest dense family, equivalence and ⋆-composition
"""

import itertools
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from config_utils import get_config
from errors import CapExceededError, PreconditionError, SignatureMismatchError
from structures import (
    CategoryMode,
    FinStructure,
    Morphism,
    RelationTable,
    Row,
    SubObject,
    check_caps,
    check_mode,
    closure,
    enumerate_subobjects,
    enumerate_test_objects,
    induced_relations,
    maximal_test_object,
    search_maps,
)

logger = logging.getLogger(__name__)

BACK = "back"
FORTH = "forth"


# ---------- SPANS ----------
@dataclass(frozen=True)
class Span:
    """X ↢ U ↣ Y with U = (domain, relations) ⊆ X and right leg domain[i] ↦ image[i]"""

    domain: Row
    image: Row
    relations: RelationTable = ()

    @property
    def mapping(self) -> Dict[int, int]:
        return dict(zip(self.domain, self.image))

    def relation(self, symbol: str) -> FrozenSet[Row]:
        for sym, rows in self.relations:
            if sym == symbol:
                return rows
        return frozenset()

    def image_relation(self, symbol: str) -> FrozenSet[Row]:
        mapping = self.mapping
        return frozenset(tuple(mapping[v] for v in row) for row in self.relation(symbol))

    def sort_key(self) -> Tuple:
        rel_key = tuple((sym, tuple(sorted(rows))) for sym, rows in self.relations)
        return (len(self.domain), self.domain, self.image, rel_key)

    def center(self, X: FinStructure) -> SubObject:
        return SubObject(X, self.domain, self.relations)

    def to_dict(self, mode: CategoryMode = CategoryMode.EMB) -> Dict:
        out = {"domain": list(self.domain), "map": list(self.image)}
        if mode == CategoryMode.STR:
            out["relations"] = {sym: sorted(list(r) for r in rows) for sym, rows in self.relations}
        return out


def make_span(
    X: FinStructure,
    mode: CategoryMode,
    mapping: Dict[int, int],
    relations: Optional[Dict[str, Iterable[Sequence[int]]]] = None,
) -> Span:
    """Canonical span from a partial map; EMB spans always carry the induced relations"""
    domain = tuple(sorted(mapping))
    if mode == CategoryMode.EMB or relations is None:
        rels = induced_relations(X, domain) if mode == CategoryMode.EMB else tuple(
            (sym, frozenset()) for sym in X.signature.relation_names
        )
    else:
        rels = tuple(
            (sym, frozenset(tuple(r) for r in relations.get(sym, ()))) for sym in X.signature.relation_names
        )
    return Span(domain, tuple(mapping[a] for a in domain), rels)


def span_legs(span: Span, X: FinStructure, Y: FinStructure) -> Tuple[FinStructure, Morphism, Morphism]:
    """Materialize the center U with legs u: U → X and v: U → Y"""
    U, u = span.center(X).materialize()
    return U, u, Morphism(U, Y, span.image, f"v_{U.name}")


def span_problem(span: Span, X: FinStructure, Y: FinStructure, mode: CategoryMode) -> Optional[str]:
    """Why span is not a canonical span between X and Y in mode, or None"""
    if len(set(span.image)) != len(span.image):
        return "right leg is not injective"
    if any(not (0 <= a < X.size) for a in span.domain) or any(not (0 <= b < Y.size) for b in span.image):
        return "span leaves the carrier"
    if list(span.domain) != sorted(set(span.domain)):
        return "domain is not in canonical order"
    induced = dict(induced_relations(X, span.domain))
    mapping = span.mapping
    for sym, rows in span.relations:
        if not rows <= induced[sym]:
            return f"relation {sym} of the center is not carried by the left structure"
        if not span.image_relation(sym) <= Y.relation(sym):
            return f"right leg does not preserve {sym}"
    if mode == CategoryMode.STR:
        return None
    if closure(X, span.domain) != frozenset(span.domain):
        return "domain is not a substructure"
    for sym, rows in span.relations:
        if rows != induced[sym]:
            return f"EMB span must carry the induced {sym}"
        arity = X.signature.arity(sym)
        for row in itertools.product(span.domain, repeat=arity):
            if (row in rows) != (tuple(mapping[v] for v in row) in Y.relation(sym)):
                return f"right leg does not reflect {sym}"
    for sym, arity in X.signature.functions:
        for args in itertools.product(span.domain, repeat=arity):
            if mapping[X.apply(sym, args)] != Y.apply(sym, [mapping[a] for a in args]):
                return f"right leg does not preserve {sym}"
    return None


def extends(small: Span, big: Span) -> bool:
    """Whether a morphism of spans small → big exists (it is unique when it does)"""
    big_map = big.mapping
    for a, b in zip(small.domain, small.image):
        if big_map.get(a) != b:
            return False
    return all(rows <= big.relation(sym) for sym, rows in small.relations)


def covers(span: Span, G: SubObject, direction: str) -> bool:
    """Whether the test mono G factors through the left (back) or right (forth) leg of span"""
    if direction == BACK:
        if not set(G.carrier) <= set(span.domain):
            return False
        return all(rows <= span.relation(sym) for sym, rows in G.relations)
    if not set(G.carrier) <= set(span.image):
        return False
    return all(rows <= span.image_relation(sym) for sym, rows in G.relations)


def reverse_span(span: Span) -> Span:
    pairs = sorted(zip(span.image, span.domain))
    mapping = span.mapping
    rels = tuple(
        (sym, frozenset(tuple(mapping[v] for v in row) for row in rows)) for sym, rows in span.relations
    )
    return Span(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs), rels)


@dataclass(frozen=True)
class SpanMorphismWitness:
    source: Span
    target: Span
    connecting: Row  # position in target.domain of each source.domain element

    def verify(self) -> bool:
        for i, j in enumerate(self.connecting):
            if self.target.domain[j] != self.source.domain[i] or self.target.image[j] != self.source.image[i]:
                return False
        return extends(self.source, self.target)

    def to_dict(self, mode: CategoryMode) -> Dict:
        return {
            "source": self.source.to_dict(mode),
            "target": self.target.to_dict(mode),
            "connecting": list(self.connecting),
        }


def span_morphism(small: Span, big: Span) -> Optional[SpanMorphismWitness]:
    if not extends(small, big):
        return None
    position = {a: j for j, a in enumerate(big.domain)}
    return SpanMorphismWitness(small, big, tuple(position[a] for a in small.domain))


# ---------- FAMILIES ----------
@dataclass(frozen=True)
class SpanFamily:
    left: FinStructure
    right: FinStructure
    mode: CategoryMode
    spans: FrozenSet[Span]

    def __len__(self) -> int:
        return len(self.spans)

    def __iter__(self):
        return iter(self.sorted())

    def __contains__(self, span: Span) -> bool:
        return span in self.spans

    def sorted(self) -> List[Span]:
        return sorted(self.spans, key=Span.sort_key)

    def union(self, other: "SpanFamily") -> "SpanFamily":
        _require_same_ends(self, other)
        return SpanFamily(self.left, self.right, self.mode, self.spans | other.spans)

    def with_spans(self, spans: Iterable[Span]) -> "SpanFamily":
        return SpanFamily(self.left, self.right, self.mode, frozenset(spans))

    def to_list(self) -> List[Dict]:
        return [span.to_dict(self.mode) for span in self.sorted()]


def _require_same_ends(a: SpanFamily, b: SpanFamily):
    if a.left != b.left or a.right != b.right or a.mode != b.mode:
        raise SignatureMismatchError("span families live between different objects")


def make_family(X: FinStructure, Y: FinStructure, mode: CategoryMode, spans: Iterable[Span]) -> SpanFamily:
    """Validate spans and collect them into a family (duplicates collapse)"""
    check_mode(X.signature, mode)
    if X.signature != Y.signature:
        raise SignatureMismatchError(f"{X.name} and {Y.name} have different signatures")
    spans = frozenset(spans)
    for span in spans:
        problem = span_problem(span, X, Y, mode)
        if problem:
            raise PreconditionError(f"invalid span {span.to_dict(mode)}: {problem}")
    return SpanFamily(X, Y, mode, spans)


def family_from_json(data: List[Dict], X: FinStructure, Y: FinStructure, mode: CategoryMode) -> SpanFamily:
    spans = []
    for item in data:
        domain = item.get("domain", [])
        image = item.get("map", [])
        if len(domain) != len(image):
            raise PreconditionError("family entry has domain and map of different lengths")
        spans.append(make_span(X, mode, dict(zip(domain, image)), item.get("relations")))
    return make_family(X, Y, mode, spans)


def reverse_family(S: SpanFamily) -> SpanFamily:
    return SpanFamily(S.right, S.left, S.mode, frozenset(reverse_span(s) for s in S.spans))


def enumerate_spans(X: FinStructure, Y: FinStructure, mode: CategoryMode, cap: Optional[int] = None) -> SpanFamily:
    """Every canonical span between X and Y"""
    return _rebind(_enumerate_spans(X, Y, mode, cap), X, Y)


def _rebind(S: SpanFamily, X: FinStructure, Y: FinStructure) -> SpanFamily:
    # cache keys ignore names, so the cached ends may be equal structures under other names
    if S.left is X and S.right is Y:
        return S
    return SpanFamily(X, Y, S.mode, S.spans)


@lru_cache(maxsize=256)
def _enumerate_spans(X: FinStructure, Y: FinStructure, mode: CategoryMode, cap: Optional[int] = None) -> SpanFamily:
    check_mode(X.signature, mode)
    check_caps(X, Y, cap=cap)
    if X.signature != Y.signature:
        raise SignatureMismatchError(f"{X.name} and {Y.name} have different signatures")
    limit = get_config().max_spans
    found: List[Span] = []

    def keep(span: Span):
        found.append(span)
        if len(found) > limit:
            raise CapExceededError(f"more than {limit} spans between {X.name} and {Y.name}")

    if mode == CategoryMode.EMB:
        for A in enumerate_test_objects(X, mode):
            for mapping in search_maps(A, Y, "embedding"):
                keep(Span(A.carrier, tuple(mapping[a] for a in A.carrier), A.relations))
    else:
        for r in range(min(X.size, Y.size) + 1):
            for subset in itertools.combinations(X.carrier, r):
                bare = SubObject(X, subset, ())
                induced = induced_relations(X, subset)
                for mapping in search_maps(bare, Y, "any"):
                    compatible = [
                        (sym, row)
                        for sym, rows in induced
                        for row in sorted(rows)
                        if tuple(mapping[v] for v in row) in Y.relation(sym)
                    ]
                    for r2 in range(len(compatible) + 1):
                        for choice in itertools.combinations(compatible, r2):
                            chosen = {sym: [row for s, row in choice if s == sym] for sym, _ in induced}
                            keep(make_span(X, mode, mapping, chosen))
    logger.debug("enumerated %d spans between %s and %s (%s)", len(found), X.name, Y.name, mode.value)
    return SpanFamily(X, Y, mode, frozenset(found))


# ---------- DENSITY ----------
@dataclass(frozen=True)
class Counterexample:
    span: Span
    test_object: SubObject
    direction: str

    def to_dict(self, mode: CategoryMode) -> Dict:
        return {
            "span": self.span.to_dict(mode),
            "test_object": self.test_object.to_dict(),
            "direction": self.direction,
        }


@dataclass(frozen=True)
class DensityVerdict:
    dense: bool
    counterexample: Optional[Counterexample] = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.dense

    def to_dict(self, mode: CategoryMode) -> Dict:
        return {
            "dense": self.dense,
            "reason": self.reason,
            "counterexample": self.counterexample.to_dict(mode) if self.counterexample else None,
        }


def _critical_tests(X: FinStructure, mode: CategoryMode, budget: Optional[int]) -> List[SubObject]:
    # every test object sits inside the maximal one and the extension condition is monotone
    if budget is None:
        return [maximal_test_object(X)]
    return enumerate_test_objects(X, mode, budget)


def _has_extension(span: Span, candidates: Sequence[Span]) -> bool:
    return any(extends(span, j) for j in candidates)


def find_extension(
    S: SpanFamily, span: Span, G: SubObject, direction: str
) -> Optional[SpanMorphismWitness]:
    """A span of S receiving span and the test mono G, with the connecting span morphism"""
    for j in S.sorted():
        if covers(j, G, direction) and extends(span, j):
            return span_morphism(span, j)
    return None


def check_density(S: SpanFamily, budget: Optional[int] = None) -> DensityVerdict:
    """Non-emptiness plus the back and forth clauses, reporting the least failing pair"""
    if not S.spans:
        return DensityVerdict(False, None, "empty family")
    check_mode(S.left.signature, S.mode)
    spans = S.sorted()
    sides = ((BACK, S.left), (FORTH, S.right))
    critical = {
        direction: [(G, [j for j in spans if covers(j, G, direction)]) for G in _critical_tests(X, S.mode, budget)]
        for direction, X in sides
    }
    for span in spans:
        for direction, X in sides:
            if all(_has_extension(span, cands) for _, cands in critical[direction]):
                continue
            for G in enumerate_test_objects(X, S.mode, budget):
                candidates = [j for j in spans if covers(j, G, direction)]
                if not _has_extension(span, candidates):
                    logger.info("density fails: %s test %s (%s)", span.domain, G.carrier, direction)
                    return DensityVerdict(False, Counterexample(span, G, direction), f"{direction} clause fails")
    return DensityVerdict(True, None, "dense")


def _survivors(current: Sequence[Span], critical: Dict[str, List[SubObject]]) -> List[Span]:
    candidate_sets = [
        [j for j in current if covers(j, G, direction)] for direction, tests in critical.items() for G in tests
    ]
    return [s for s in current if all(_has_extension(s, cands) for cands in candidate_sets)]


def prune(S: SpanFamily, strategy: str = "rounds", budget: Optional[int] = None) -> SpanFamily:
    """Greatest dense subfamily of S (possibly empty)"""
    check_mode(S.left.signature, S.mode)
    critical = {
        BACK: _critical_tests(S.left, S.mode, budget),
        FORTH: _critical_tests(S.right, S.mode, budget),
    }
    current = S.sorted()
    if strategy == "rounds":
        rounds = 0
        while True:
            rounds += 1
            survivors = _survivors(current, critical)
            logger.debug("pruning round %d: %d -> %d spans", rounds, len(current), len(survivors))
            if len(survivors) == len(current):
                break
            current = survivors
    elif strategy == "sequential":
        while True:
            survivors = set(_survivors(current, critical))
            failing = next((s for s in current if s not in survivors), None)
            if failing is None:
                break
            current = [s for s in current if s != failing]
    else:
        raise PreconditionError(f"unknown pruning strategy {strategy}")
    return S.with_spans(current)


def greatest_dense_family(
    X: FinStructure,
    Y: FinStructure,
    mode: CategoryMode,
    cap: Optional[int] = None,
    budget: Optional[int] = None,
) -> SpanFamily:
    return _rebind(_greatest_dense_family(X, Y, mode, cap, budget), X, Y)


@lru_cache(maxsize=256)
def _greatest_dense_family(
    X: FinStructure, Y: FinStructure, mode: CategoryMode, cap: Optional[int], budget: Optional[int]
) -> SpanFamily:
    return prune(_enumerate_spans(X, Y, mode, cap), "rounds", budget)


def decide_equivalent(
    X: FinStructure, Y: FinStructure, mode: CategoryMode, cap: Optional[int] = None, budget: Optional[int] = None
) -> bool:
    return len(greatest_dense_family(X, Y, mode, cap, budget)) > 0


def all_spans_dense(X: FinStructure, Y: FinStructure, mode: CategoryMode, cap: Optional[int] = None) -> bool:
    return check_density(enumerate_spans(X, Y, mode, cap)).dense


# ---------- COMPOSITION ----------
def _pullback(s: Span, t: Span) -> Span:
    s_map, t_map = s.mapping, t.mapping
    kept = [a for a in s.domain if s_map[a] in t_map]
    members = set(kept)
    rels = tuple(
        (
            sym,
            frozenset(
                row
                for row in rows
                if all(v in members for v in row) and tuple(s_map[v] for v in row) in t.relation(sym)
            ),
        )
        for sym, rows in s.relations
    )
    return Span(tuple(kept), tuple(t_map[s_map[a]] for a in kept), rels)


def sub_spans(span: Span, X: FinStructure, mode: CategoryMode) -> List[Span]:
    """Every span with a morphism into span"""
    mapping = span.mapping
    return [
        Span(G.carrier, tuple(mapping[a] for a in G.carrier), G.relations)
        for G in enumerate_subobjects(span.center(X), mode)
    ]


def sieve_closure(tops: Iterable[Span], X: FinStructure, mode: CategoryMode) -> FrozenSet[Span]:
    closed: set = set()
    for top in sorted(set(tops), key=lambda s: (-len(s.domain), s.sort_key())):
        if top in closed:
            continue
        closed.update(sub_spans(top, X, mode))
    return frozenset(closed)


def star_compose(S_XY: SpanFamily, S_YZ: SpanFamily) -> SpanFamily:
    """Spans X ↢ U ↣ Z factoring through some pair of spans over the middle object"""
    if S_XY.right != S_YZ.left:
        raise SignatureMismatchError("middle objects of the composed families differ")
    if S_XY.mode != S_YZ.mode:
        raise SignatureMismatchError("composed families live in different categories")
    tops = {_pullback(s, t) for s in S_XY.spans for t in S_YZ.spans}
    return SpanFamily(S_XY.left, S_YZ.right, S_XY.mode, sieve_closure(tops, S_XY.left, S_XY.mode))


# ---------- PARTIAL ISOMORPHISMS (element-wise back-and-forth) ----------
def back_and_forth_family(X: FinStructure, Y: FinStructure, cap: Optional[int] = None) -> SpanFamily:
    """Greatest set of partial isomorphisms with the one-element back-and-forth property"""
    current = enumerate_spans(X, Y, CategoryMode.EMB, cap).sorted()
    while True:
        survivors = [
            p
            for p in current
            if all(any(x in q.domain and extends(p, q) for q in current) for x in X.carrier)
            and all(any(y in q.image and extends(p, q) for q in current) for y in Y.carrier)
        ]
        if len(survivors) == len(current):
            break
        current = survivors
    return SpanFamily(X, Y, CategoryMode.EMB, frozenset(current))


def decide_back_and_forth(X: FinStructure, Y: FinStructure, cap: Optional[int] = None) -> bool:
    return len(back_and_forth_family(X, Y, cap)) > 0


def clear_cache():
    """Clear every memoised span computation"""
    _enumerate_spans.cache_clear()
    _greatest_dense_family.cache_clear()
