"""
Chains and ladders
Finite chains of monos, their colimits and the ladder harness
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from embeddings import decide_lambda_embedding
from span_calculus import Span, greatest_dense_family
from errors import MalformedInstanceError, PreconditionError, TheoremViolation
from structures import CategoryMode, FinStructure, Morphism, compose, identity, is_mono_in

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ChainDiagram:
    """X0 → X1 → ... → Xn given by its consecutive connecting maps"""

    name: str
    objects: Tuple[FinStructure, ...]
    maps: Tuple[Morphism, ...]

    def __post_init__(self):
        if not self.objects:
            raise MalformedInstanceError(f"chain {self.name} has no stages")
        if len(self.maps) != len(self.objects) - 1:
            raise MalformedInstanceError(
                f"chain {self.name} has {len(self.objects)} stages but {len(self.maps)} connecting maps"
            )
        for i, f in enumerate(self.maps):
            if f.source != self.objects[i] or f.target != self.objects[i + 1]:
                raise MalformedInstanceError(f"connecting map {f.name} of {self.name} does not join stages {i} and {i + 1}")

    def __len__(self) -> int:
        return len(self.objects)

    @property
    def last(self) -> int:
        return len(self.objects) - 1

    def composite(self, i: int, j: int) -> Morphism:
        """X_i → X_j for i <= j"""
        if not (0 <= i <= j <= self.last):
            raise PreconditionError(f"chain {self.name} has no composite from stage {i} to stage {j}")
        result = identity(self.objects[i])
        for f in self.maps[i:j]:
            result = compose(result, f)
        return result

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "objects": [X.name for X in self.objects],
            "maps": [f.to_dict() for f in self.maps],
        }


@dataclass(frozen=True)
class Colimit:
    object: FinStructure
    cocone: Tuple[Morphism, ...]

    def to_dict(self) -> Dict:
        return {"object": self.object.to_dict(), "cocone": [f.to_dict() for f in self.cocone]}


def colimit_of_chain(C: ChainDiagram, mode: CategoryMode = CategoryMode.EMB) -> Colimit:
    """For a finite chain the colimit is the last stage and the cocone the composites into it"""
    for f in C.maps:
        if not is_mono_in(f, mode):
            raise PreconditionError(f"connecting map {f.name} of {C.name} is not a mono in {mode.value} mode")
    return Colimit(C.objects[-1], tuple(C.composite(i, C.last) for i in range(len(C))))


def _same_map(f: Morphism, g: Morphism) -> bool:
    return f.source == g.source and f.target == g.target and f.table == g.table


def mediating_morphism(C: ChainDiagram, colimit: Colimit, competing: Sequence[Morphism]) -> Morphism:
    """The unique map out of the colimit through which a competing cocone factors"""
    if len(competing) != len(C):
        raise PreconditionError(f"cocone over {C.name} needs {len(C)} components")
    for i, f in enumerate(C.maps):
        if not _same_map(compose(f, competing[i + 1]), competing[i]):
            raise PreconditionError(f"competing cocone does not commute with {f.name}")
    # the last cocone leg of a finite chain is the identity, which forces the mediating map
    mediating = competing[-1]
    for leg, target_leg in zip(colimit.cocone, competing):
        if not _same_map(compose(leg, mediating), target_leg):
            raise TheoremViolation(f"mediating map out of the colimit of {C.name} does not factor the cocone")
    return Morphism(colimit.object, mediating.target, mediating.table, f"med_{C.name}")


# ---------- LADDERS ----------
@dataclass(frozen=True)
class LadderInstance:
    """A natural transformation between two chains over the same index list"""

    name: str
    lower: ChainDiagram
    upper: ChainDiagram
    components: Tuple[Morphism, ...]

    def __post_init__(self):
        if len(self.lower) != len(self.upper) or len(self.components) != len(self.lower):
            raise MalformedInstanceError(f"ladder {self.name}: chains and components have different lengths")
        for i, eta in enumerate(self.components):
            if eta.source != self.lower.objects[i] or eta.target != self.upper.objects[i]:
                raise MalformedInstanceError(f"ladder {self.name}: component {eta.name} does not join stage {i}")
        for i in range(len(self.lower) - 1):
            left = compose(self.lower.maps[i], self.components[i + 1])
            right = compose(self.components[i], self.upper.maps[i])
            if left.table != right.table:
                raise MalformedInstanceError(f"ladder {self.name}: naturality square {i} does not commute")


@dataclass
class LadderReport:
    hypothesis_ok: bool
    conclusion_ok: Optional[bool] = None  # None when the hypothesis fails
    failures: List[str] = field(default_factory=list)
    colimit_map: Optional[Morphism] = None

    def to_dict(self) -> Dict:
        return {
            "hypothesis_ok": self.hypothesis_ok,
            "conclusion_ok": self.conclusion_ok,
            "failures": list(self.failures),
            "colimit_map": self.colimit_map.to_dict() if self.colimit_map else None,
        }


def _embedding_failures(maps: Sequence[Morphism], mode: CategoryMode, cap: Optional[int]) -> List[str]:
    return [f.name or f"{f.source.name}->{f.target.name}" for f in maps if not decide_lambda_embedding(f, mode, cap)]


def verify_ladder(L: LadderInstance, mode: CategoryMode = CategoryMode.EMB, cap: Optional[int] = None) -> LadderReport:
    failures = _embedding_failures(L.lower.maps + L.upper.maps + L.components, mode, cap)
    if failures:
        logger.info("ladder %s: hypothesis fails at %s", L.name, failures)
        return LadderReport(False, None, failures)
    lower = colimit_of_chain(L.lower, mode)
    upper = colimit_of_chain(L.upper, mode)
    competing = [compose(eta, leg) for eta, leg in zip(L.components, upper.cocone)]
    f = mediating_morphism(L.lower, lower, competing)
    conclusion = decide_lambda_embedding(f, mode, cap)
    if not conclusion:
        logger.error("ladder %s: induced colimit map is not an embedding although every rung is", L.name)
    return LadderReport(True, conclusion, [], f)


def verify_smooth_composition(
    C: ChainDiagram, mode: CategoryMode = CategoryMode.EMB, cap: Optional[int] = None
) -> LadderReport:
    """Whether X0 → colim passes when every connecting map does"""
    failures = _embedding_failures(C.maps, mode, cap)
    if failures:
        return LadderReport(False, None, failures)
    colimit = colimit_of_chain(C, mode)
    first = colimit.cocone[0]
    return LadderReport(True, decide_lambda_embedding(first, mode, cap), [], first)


# ---------- STEPS ----------
def push_span(span: Span, f: Morphism, g: Morphism) -> Span:
    """X0 ↢ X ↢ U ↣ Y ↣ Y0 as a canonical span between f.target and g.target"""
    pairs = sorted((f(a), g(b)) for a, b in zip(span.domain, span.image))
    rels = tuple((sym, frozenset(tuple(f(v) for v in row) for row in rows)) for sym, rows in span.relations)
    return Span(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs), rels)


def verify_step(
    span: Span, f: Morphism, g: Morphism, mode: CategoryMode = CategoryMode.EMB, cap: Optional[int] = None
) -> LadderReport:
    """A greatest-family span pushed along two embeddings stays in the greatest family"""
    failures = []
    if span not in greatest_dense_family(f.source, g.source, mode, cap):
        failures.append(f"span {list(span.domain)}->{list(span.image)} is not in the greatest family")
    failures += _embedding_failures((f, g), mode, cap)
    if failures:
        return LadderReport(False, None, failures)
    pushed = push_span(span, f, g)
    conclusion = pushed in greatest_dense_family(f.target, g.target, mode, cap)
    if not conclusion:
        logger.error("pushed span %s leaves the greatest family between %s and %s", pushed, f.target.name, g.target.name)
    return LadderReport(True, conclusion, [])
