"""
Symbolic sets
Sets known only by cardinality (a natural number or INF), with spans given by center size
"""

import logging
from dataclasses import dataclass
from functools import total_ordering
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from chains import LadderReport
from errors import MalformedInstanceError, PreconditionError

logger = logging.getLogger(__name__)

INF_TEXT = "INF"
CONSTANT_TAIL = "="
INCREASING_TAIL = "+"


@total_ordering
@dataclass(frozen=True)
class CardToken:
    value: Optional[int] = None  # None is INF

    def __post_init__(self):
        if self.value is not None and self.value < 0:
            raise PreconditionError(f"cardinality {self.value} is negative")

    @classmethod
    def parse(cls, text: Union[str, int, "CardToken"]) -> "CardToken":
        if isinstance(text, CardToken):
            return text
        if isinstance(text, int):
            return cls(text)
        text = text.strip()
        if text.upper() in (INF_TEXT, "∞"):
            return INF
        if not text.isdigit():
            raise PreconditionError(f"not a cardinality token: {text!r} (use a natural number or {INF_TEXT})")
        return cls(int(text))

    @property
    def is_infinite(self) -> bool:
        return self.value is None

    def __lt__(self, other) -> bool:
        other = CardToken.parse(other)
        if self.is_infinite:
            return False
        return other.is_infinite or self.value < other.value

    def minus(self, k: int) -> "CardToken":
        """INF - k = INF; n - k needs k <= n"""
        if self.is_infinite:
            return self
        if k > self.value:
            raise PreconditionError(f"cannot remove {k} elements from a set of size {self.value}")
        return CardToken(self.value - k)

    def plus(self, other: "CardToken") -> "CardToken":
        if self.is_infinite or other.is_infinite:
            return INF
        return CardToken(self.value + other.value)

    def admits(self, k: int) -> bool:
        return self.is_infinite or k <= self.value

    def __str__(self) -> str:
        return INF_TEXT if self.is_infinite else str(self.value)


INF = CardToken(None)


def _bound(*tokens: CardToken) -> int:
    """Enumeration bound: every finite token, plus room to exceed it"""
    return max([t.value for t in tokens if not t.is_infinite] + [0]) + 2


def _range(token: CardToken, bound: int) -> range:
    return range((bound if token.is_infinite else token.value) + 1)


@dataclass(frozen=True)
class SymSpan:
    """A span with a finite center of size `center` and the sizes left outside it on each side"""

    center: int
    left_rest: CardToken
    right_rest: CardToken

    @classmethod
    def between(cls, a: CardToken, b: CardToken, center: int) -> "SymSpan":
        return cls(center, a.minus(center), b.minus(center))

    def to_dict(self) -> Dict:
        return {"center": self.center, "left_rest": str(self.left_rest), "right_rest": str(self.right_rest)}


def sym_equivalent(a, b) -> bool:
    a, b = CardToken.parse(a), CardToken.parse(b)
    if a.is_infinite or b.is_infinite:
        return a.is_infinite and b.is_infinite
    return a.value == b.value


# ---------- DENSITY ----------
@dataclass(frozen=True)
class SymCounterexample:
    span: SymSpan
    test_size: int
    overlap: int
    direction: str

    def to_dict(self) -> Dict:
        return {
            "span": self.span.to_dict(),
            "test_size": self.test_size,
            "overlap": self.overlap,
            "direction": self.direction,
        }


@dataclass(frozen=True)
class SymDensityVerdict:
    dense: bool
    counterexample: Optional[SymCounterexample] = None

    def __bool__(self) -> bool:
        return self.dense

    def to_dict(self) -> Dict:
        return {
            "dense": self.dense,
            "counterexample": self.counterexample.to_dict() if self.counterexample else None,
        }


def _test_shapes(side: CardToken, span_side: int, bound: int) -> Iterator[Tuple[int, int]]:
    """(g, k): a test set of size g meeting the span's leg image in k elements"""
    for g in _range(side, bound):
        for k in range(min(span_side, g) + 1):
            if side.minus(span_side).admits(g - k):
                yield g, k


def sym_density_check(a, b) -> SymDensityVerdict:
    """Back and forth for the family of all finite-center spans between sets of sizes a and b"""
    a, b = CardToken.parse(a), CardToken.parse(b)
    bound = _bound(a, b)
    largest = min(_range(a, bound)[-1], _range(b, bound)[-1])
    for u in range(largest, -1, -1):
        span = SymSpan.between(a, b, u)
        # an extension must add g - k fresh elements on the far side as well
        for direction, near, far in (("back", a, b), ("forth", b, a)):
            for g, k in _test_shapes(near, u, bound):
                if not far.minus(u).admits(g - k):
                    logger.info("symbolic density fails for (%s, %s) at center %d", a, b, u)
                    return SymDensityVerdict(False, SymCounterexample(span, g, k, direction))
    return SymDensityVerdict(True)


# ---------- EMBEDDINGS ----------
def _check_injection(src: CardToken, dst: CardToken, bijective: bool):
    if dst < src:
        raise PreconditionError(f"no injection from a set of size {src} into one of size {dst}")
    if bijective and src != dst:
        raise PreconditionError(f"no bijection between sets of sizes {src} and {dst}")
    if not bijective and src == dst and not src.is_infinite:
        raise PreconditionError(f"every injection between sets of size {src} is a bijection")


def sym_embedding(src, dst, bijective: bool = False) -> bool:
    src, dst = CardToken.parse(src), CardToken.parse(dst)
    _check_injection(src, dst, bijective)
    return bijective or (src.is_infinite and dst.is_infinite)


def in_greatest_family(span: SymSpan) -> bool:
    """Whether span survives in the greatest dense family: what is left outside it must match"""
    return sym_equivalent(span.left_rest, span.right_rest)


def sym_greatest_family(a, b) -> List[SymSpan]:
    """Members of the greatest dense family with center up to the enumeration bound"""
    a, b = CardToken.parse(a), CardToken.parse(b)
    bound = _bound(a, b)
    largest = min(_range(a, bound)[-1], _range(b, bound)[-1])
    return [span for span in (SymSpan.between(a, b, u) for u in range(largest + 1)) if in_greatest_family(span)]


def injection_complements(src, dst, bijective: bool = False) -> List[CardToken]:
    """Possible sizes of dst minus the image of an injection src -> dst"""
    src, dst = CardToken.parse(src), CardToken.parse(dst)
    _check_injection(src, dst, bijective)
    if bijective:
        return [CardToken(0)]
    if not dst.is_infinite:
        return [CardToken(dst.value - src.value)]
    if not src.is_infinite:
        return [INF]
    return [CardToken(1), INF]


@dataclass(frozen=True)
class SymWitness:
    """A span agreeing with the injection on a test set of size test_size"""

    test_size: int
    span: SymSpan

    def to_dict(self) -> Dict:
        return {"test_size": self.test_size, "span": self.span.to_dict()}


def _witness(src: CardToken, complement: CardToken, g: int, bound: int) -> Optional[SymWitness]:
    # restrict the injection to a finite u-set containing the test set; its image misses
    # the rest of the source's image plus the complement
    for u in range(g, (bound if src.is_infinite else src.value) + 1):
        left_rest = src.minus(u)
        span = SymSpan(u, left_rest, left_rest.plus(complement))
        if in_greatest_family(span):
            return SymWitness(g, span)
    return None


def sym_embedding_witnesses(src, dst, bijective: bool = False) -> Optional[List[SymWitness]]:
    """One witness span per finite test size, or None when some test set has none"""
    src, dst = CardToken.parse(src), CardToken.parse(dst)
    bound = _bound(src, dst)
    witnesses: List[SymWitness] = []
    for complement in injection_complements(src, dst, bijective):
        for g in _range(src, bound):
            found = _witness(src, complement, g, bound)
            if found is None:
                logger.debug("no witness for %s -> %s on %d elements (complement %s)", src, dst, g, complement)
                return None
            witnesses.append(found)
    return witnesses


def sym_embedding_search(src, dst, bijective: bool = False) -> bool:
    """The embedding condition decided by witness search over finite-center spans"""
    return sym_embedding_witnesses(src, dst, bijective) is not None


# ---------- CHAINS ----------
@dataclass(frozen=True)
class SymChain:
    prefix: Tuple[CardToken, ...]
    tail: str = CONSTANT_TAIL

    def __post_init__(self):
        if not self.prefix:
            raise MalformedInstanceError("a symbolic chain needs at least one stage")
        if self.tail not in (CONSTANT_TAIL, INCREASING_TAIL):
            raise MalformedInstanceError(f"unknown tail behaviour {self.tail!r}")
        for x, y in zip(self.prefix, self.prefix[1:]):
            if y < x:
                raise MalformedInstanceError(f"stage of size {y} cannot receive an injection from size {x}")
        if self.tail == INCREASING_TAIL and self.prefix[-1].is_infinite:
            raise MalformedInstanceError("a strictly increasing tail needs a finite last stage")

    @classmethod
    def parse(cls, text: str) -> "SymChain":
        """`1,2,3,+` (strictly increasing tail) or `3,3,=` (constant tail)"""
        parts = [p.strip() for p in text.split(",") if p.strip()]
        tail = CONSTANT_TAIL
        if parts and parts[-1] in (CONSTANT_TAIL, INCREASING_TAIL):
            tail = parts.pop()
        return cls(tuple(CardToken.parse(p) for p in parts), tail)

    def steps(self) -> List[Tuple[CardToken, CardToken]]:
        """Connecting maps as (source size, target size), one tail step included"""
        pairs = list(zip(self.prefix, self.prefix[1:]))
        last = self.prefix[-1]
        pairs.append((last, last if self.tail == CONSTANT_TAIL else CardToken(last.value + 1)))
        return pairs

    def __str__(self) -> str:
        return ",".join(str(t) for t in self.prefix) + "," + self.tail


def sym_chain_colimit(C: SymChain) -> CardToken:
    return C.prefix[-1] if C.tail == CONSTANT_TAIL else INF


def _step_failures(label: str, steps: Sequence[Tuple[CardToken, CardToken]]) -> List[str]:
    failures = []
    for i, (x, y) in enumerate(steps):
        if not sym_embedding(x, y, bijective=(x == y)):
            failures.append(f"{label}[{i}]: {x}->{y}")
    return failures


def sym_verify_ladder(lower: SymChain, upper: SymChain) -> LadderReport:
    """Componentwise injections between two chains with the same prefix length"""
    if len(lower.prefix) != len(upper.prefix):
        raise MalformedInstanceError("ladder chains have prefixes of different lengths")
    components = list(zip(lower.prefix, upper.prefix))
    for x, y in components:
        if y < x:
            raise MalformedInstanceError(f"no component injection from size {x} into size {y}")
    failures = _step_failures("lower", lower.steps()) + _step_failures("upper", upper.steps())
    failures += _step_failures("component", components)
    if failures:
        return LadderReport(False, None, failures)
    a, b = sym_chain_colimit(lower), sym_chain_colimit(upper)
    return LadderReport(True, sym_embedding(a, b, bijective=(a == b)), [])
