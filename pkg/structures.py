"""
Core structures for the back-and-forth engine
Signatures, finite structures, morphisms, substructures, test objects and the isomorphism oracle
"""

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Any, Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from config_utils import get_config
from errors import (
    CapExceededError,
    PreconditionError,
    SignatureMismatchError,
    UnsupportedModeError,
    WorkspaceSemanticError,
)

logger = logging.getLogger(__name__)

Row = Tuple[int, ...]
RelationTable = Tuple[Tuple[str, FrozenSet[Row]], ...]


class CategoryMode(str, Enum):
    EMB = "emb"  # embeddings; every morphism is mono
    STR = "str"  # homomorphisms; monos are the injective homs


class MorphismClass(IntEnum):
    NOT_HOM = 0
    HOM = 1
    MONO_HOM = 2
    EMBEDDING = 3
    ISO = 4

    @property
    def label(self) -> str:
        return self.name.lower().replace("_", "-")


# ---------- SIGNATURES ----------
@dataclass(frozen=True)
class Signature:
    name: str
    relations: Tuple[Tuple[str, int], ...] = ()
    functions: Tuple[Tuple[str, int], ...] = ()

    def __post_init__(self):
        names = [n for n, _ in self.relations] + [n for n, _ in self.functions]
        if len(set(names)) != len(names):
            raise WorkspaceSemanticError(f"duplicate symbol in signature {self.name}")
        for sym, arity in self.relations:
            if arity < 1:
                raise WorkspaceSemanticError(f"relation {sym} needs arity >= 1")
        for sym, arity in self.functions:
            if arity < 0:
                raise WorkspaceSemanticError(f"function {sym} needs arity >= 0")

    @property
    def relation_names(self) -> List[str]:
        return [n for n, _ in self.relations]

    @property
    def function_names(self) -> List[str]:
        return [n for n, _ in self.functions]

    @property
    def is_relational(self) -> bool:
        return not self.functions

    def arity(self, symbol: str) -> int:
        for sym, arity in self.relations + self.functions:
            if sym == symbol:
                return arity
        raise WorkspaceSemanticError(f"undeclared symbol {symbol} in signature {self.name}")

    def has_relation(self, symbol: str) -> bool:
        return symbol in self.relation_names

    def has_function(self, symbol: str) -> bool:
        return symbol in self.function_names

    def reduct(self, keep: Iterable[str], name: Optional[str] = None) -> "Signature":
        keep = set(keep)
        unknown = keep - set(self.relation_names) - set(self.function_names)
        if unknown:
            raise WorkspaceSemanticError(f"cannot keep undeclared symbols {sorted(unknown)}")
        return Signature(
            name or f"{self.name}|{','.join(sorted(keep))}",
            tuple(r for r in self.relations if r[0] in keep),
            tuple(f for f in self.functions if f[0] in keep),
        )

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "relations": {n: a for n, a in self.relations},
            "functions": {n: a for n, a in self.functions},
        }


# ---------- STRUCTURES ----------
def _flatten_table(table: Any, arity: int, size: int, symbol: str) -> Row:
    """Turn a nested (or flat) function table into a flat row-major tuple"""
    if arity == 0:
        if isinstance(table, int):
            return (table,)
        if isinstance(table, (list, tuple)) and len(table) == 1 and isinstance(table[0], int):
            return (table[0],)
        raise WorkspaceSemanticError(f"constant {symbol} needs a single value")

    def walk(node: Any, depth: int) -> List[int]:
        if depth == 0:
            if not isinstance(node, int):
                raise WorkspaceSemanticError(f"function {symbol}: table entries must be integers")
            return [node]
        if not isinstance(node, (list, tuple)) or len(node) != size:
            raise WorkspaceSemanticError(f"function {symbol} is not total: expected {size} rows")
        out: List[int] = []
        for child in node:
            out.extend(walk(child, depth - 1))
        return out

    if (
        arity > 1
        and isinstance(table, (list, tuple))
        and len(table) == size ** arity
        and all(isinstance(v, int) for v in table)
    ):
        flat = list(table)
    else:
        flat = walk(table, arity)
    if size == 0:
        flat = []
    return tuple(flat)


@dataclass(frozen=True)
class FinStructure:
    signature: Signature
    size: int
    relations: RelationTable
    functions: Tuple[Tuple[str, Row], ...]
    name: str = field(default="", compare=False)

    @classmethod
    def build(
        cls,
        signature: Signature,
        size: int,
        relations: Optional[Mapping[str, Iterable[Sequence[int]]]] = None,
        functions: Optional[Mapping[str, Any]] = None,
        name: str = "",
    ) -> "FinStructure":
        """Validate and freeze a structure given as plain Python data"""
        relations = dict(relations or {})
        functions = dict(functions or {})
        if size < 0:
            raise WorkspaceSemanticError(f"structure {name}: negative size")
        for sym in list(relations) + list(functions):
            signature.arity(sym)
        rel_items = []
        for sym, arity in signature.relations:
            rows = set()
            for row in relations.get(sym, ()):
                row = (row,) if isinstance(row, int) else tuple(row)
                if len(row) != arity:
                    raise WorkspaceSemanticError(
                        f"structure {name}: tuple {row} of {sym} has arity {len(row)}, expected {arity}"
                    )
                for v in row:
                    if not (0 <= v < size):
                        raise WorkspaceSemanticError(
                            f"structure {name}: tuple element {v} outside carrier of size {size}"
                        )
                rows.add(row)
            rel_items.append((sym, frozenset(rows)))
        fun_items = []
        for sym, arity in signature.functions:
            if sym not in functions:
                if size == 0 and arity > 0:
                    fun_items.append((sym, ()))
                    continue
                raise WorkspaceSemanticError(f"structure {name}: function {sym} has no table")
            flat = _flatten_table(functions[sym], arity, size, sym)
            if len(flat) != size ** arity:
                raise WorkspaceSemanticError(f"structure {name}: function {sym} is not total")
            for v in flat:
                if not (0 <= v < size):
                    raise WorkspaceSemanticError(
                        f"structure {name}: value {v} of {sym} outside carrier of size {size}"
                    )
            fun_items.append((sym, flat))
        return cls(signature, size, tuple(rel_items), tuple(fun_items), name)

    @property
    def carrier(self) -> range:
        return range(self.size)

    def relation(self, symbol: str) -> FrozenSet[Row]:
        for sym, rows in self.relations:
            if sym == symbol:
                return rows
        raise WorkspaceSemanticError(f"undeclared relation {symbol}")

    def table(self, symbol: str) -> Row:
        for sym, flat in self.functions:
            if sym == symbol:
                return flat
        raise WorkspaceSemanticError(f"undeclared function {symbol}")

    def apply(self, symbol: str, args: Sequence[int]) -> int:
        index = 0
        for a in args:
            index = index * self.size + a
        return self.table(symbol)[index]

    def holds(self, symbol: str, row: Sequence[int]) -> bool:
        return tuple(row) in self.relation(symbol)

    def named(self, name: str) -> "FinStructure":
        return FinStructure(self.signature, self.size, self.relations, self.functions, name)

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "signature": self.signature.name,
            "size": self.size,
            "relations": {sym: sorted(list(r) for r in rows) for sym, rows in self.relations},
            "functions": {sym: list(flat) for sym, flat in self.functions},
        }


# ---------- MORPHISMS ----------
@dataclass(frozen=True)
class Morphism:
    source: FinStructure
    target: FinStructure
    table: Row
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if len(self.table) != self.source.size:
            raise WorkspaceSemanticError(
                f"morphism {self.name}: map has {len(self.table)} entries, source has {self.source.size}"
            )
        for v in self.table:
            if not (0 <= v < self.target.size):
                raise WorkspaceSemanticError(f"morphism {self.name}: value {v} outside target carrier")

    def __call__(self, x: int) -> int:
        return self.table[x]

    def then(self, other: "Morphism") -> "Morphism":
        """The composite other∘self"""
        return compose(self, other)

    @property
    def image(self) -> FrozenSet[int]:
        return frozenset(self.table)

    @property
    def is_injective(self) -> bool:
        return len(set(self.table)) == len(self.table)

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "source": self.source.name,
            "target": self.target.name,
            "map": list(self.table),
        }


def identity(X: FinStructure) -> Morphism:
    return Morphism(X, X, tuple(X.carrier), f"id_{X.name}")


def compose(f: Morphism, g: Morphism) -> Morphism:
    """g∘f: first f, then g"""
    if f.target != g.source:
        raise SignatureMismatchError(f"cannot compose {f.name} and {g.name}: middle objects differ")
    return Morphism(f.source, g.target, tuple(g(f(x)) for x in f.source.carrier), f"{g.name}.{f.name}")


def _require_shared_signature(X: FinStructure, Y: FinStructure):
    if X.signature != Y.signature:
        raise SignatureMismatchError(
            f"structures {X.name} and {Y.name} have different signatures "
            f"({X.signature.name} vs {Y.signature.name})"
        )


def preserves_functions(f: Morphism) -> bool:
    X, Y = f.source, f.target
    for sym, arity in X.signature.functions:
        for args in itertools.product(X.carrier, repeat=arity):
            if f(X.apply(sym, args)) != Y.apply(sym, [f(a) for a in args]):
                return False
    return True


def preserves_relations(f: Morphism) -> bool:
    for sym, rows in f.source.relations:
        target_rows = f.target.relation(sym)
        for row in rows:
            if tuple(f(a) for a in row) not in target_rows:
                return False
    return True


def reflects_relations(f: Morphism) -> bool:
    """Only meaningful for injective f"""
    inverse = {y: x for x, y in enumerate(f.table)}
    for sym, rows in f.target.relations:
        source_rows = f.source.relation(sym)
        for row in rows:
            if all(v in inverse for v in row) and tuple(inverse[v] for v in row) not in source_rows:
                return False
    return True


def classify_morphism(f: Morphism) -> MorphismClass:
    """Classify f on the chain not-hom < hom < mono-hom < embedding < iso"""
    _require_shared_signature(f.source, f.target)
    if not (preserves_functions(f) and preserves_relations(f)):
        return MorphismClass.NOT_HOM
    if not f.is_injective:
        return MorphismClass.HOM
    if not reflects_relations(f):
        return MorphismClass.MONO_HOM
    if f.source.size != f.target.size:
        return MorphismClass.EMBEDDING
    inverse_table = [0] * f.target.size
    for x, y in enumerate(f.table):
        inverse_table[y] = x
    inverse = Morphism(f.target, f.source, tuple(inverse_table), f"{f.name}^-1")
    if preserves_functions(inverse) and preserves_relations(inverse) and reflects_relations(inverse):
        return MorphismClass.ISO
    return MorphismClass.EMBEDDING


def is_morphism_in(f: Morphism, mode: CategoryMode) -> bool:
    """Whether f is an arrow of emb(Σ) resp. str(Σ)"""
    level = classify_morphism(f)
    return level >= (MorphismClass.EMBEDDING if mode == CategoryMode.EMB else MorphismClass.HOM)


def is_mono_in(f: Morphism, mode: CategoryMode) -> bool:
    level = classify_morphism(f)
    return level >= (MorphismClass.EMBEDDING if mode == CategoryMode.EMB else MorphismClass.MONO_HOM)


# ---------- CAPS AND MODES ----------
def check_mode(signature: Signature, mode: CategoryMode):
    if mode == CategoryMode.STR and not signature.is_relational:
        raise UnsupportedModeError(
            f"STR mode needs a purely relational signature; {signature.name} has function symbols"
        )


def check_caps(*structures: FinStructure, cap: Optional[int] = None):
    config = get_config()
    cap = cap if cap is not None else config.max_carrier
    for X in structures:
        if X.size > cap:
            raise CapExceededError(f"structure {X.name} has {X.size} elements; cap is {cap}")
        for sym, arity in X.signature.relations + X.signature.functions:
            if arity > config.max_arity:
                raise CapExceededError(f"symbol {sym} has arity {arity}; cap is {config.max_arity}")


# ---------- SUBSTRUCTURES ----------
def _freeze_relations(signature: Signature, rows: Mapping[str, Iterable[Row]]) -> RelationTable:
    return tuple((sym, frozenset(rows.get(sym, ()))) for sym in signature.relation_names)


def induced_relations(X: FinStructure, carrier: Iterable[int]) -> RelationTable:
    carrier = set(carrier)
    return tuple(
        (sym, frozenset(row for row in rows if all(v in carrier for v in row))) for sym, rows in X.relations
    )


@dataclass(frozen=True)
class SubObject:
    """A mono G ↣ X in canonical form: a carrier subset plus the relations G carries, in X's labels"""

    ambient: FinStructure
    carrier: Row
    relations: RelationTable

    def relation(self, symbol: str) -> FrozenSet[Row]:
        for sym, rows in self.relations:
            if sym == symbol:
                return rows
        return frozenset()

    @property
    def relation_count(self) -> int:
        return sum(len(rows) for _, rows in self.relations)

    def sort_key(self) -> Tuple:
        rel_key = tuple((sym, tuple(sorted(rows))) for sym, rows in self.relations)
        return (len(self.carrier), self.carrier, self.relation_count, rel_key)

    def is_within(self, other: "SubObject") -> bool:
        """Whether the inclusion of carriers is a morphism self → other"""
        if not set(self.carrier) <= set(other.carrier):
            return False
        return all(rows <= other.relation(sym) for sym, rows in self.relations)

    def materialize(self) -> Tuple[FinStructure, Morphism]:
        """Relabel the carrier to 0..k-1; return the structure and its inclusion into the ambient"""
        X = self.ambient
        index = {v: i for i, v in enumerate(self.carrier)}
        rels = {sym: [tuple(index[v] for v in row) for row in rows] for sym, rows in self.relations}
        funs = {}
        for sym, arity in X.signature.functions:
            flat = []
            for args in itertools.product(self.carrier, repeat=arity):
                value = X.apply(sym, args)
                if value not in index:
                    raise PreconditionError(f"carrier {list(self.carrier)} is not closed under {sym}")
                flat.append(index[value])
            funs[sym] = flat
        G = FinStructure.build(X.signature, len(self.carrier), rels, funs, name=f"{X.name}{list(self.carrier)}")
        return G, Morphism(G, X, tuple(self.carrier), f"incl_{G.name}")

    @property
    def structure(self) -> FinStructure:
        return self.materialize()[0]

    def to_dict(self) -> Dict:
        return {
            "carrier": list(self.carrier),
            "relations": {sym: sorted(list(r) for r in rows) for sym, rows in self.relations},
        }


def closure(X: FinStructure, seed: Iterable[int]) -> FrozenSet[int]:
    """Smallest subset containing seed and closed under every function symbol (constants included)"""
    closed = set(seed)
    for v in closed:
        if not (0 <= v < X.size):
            raise PreconditionError(f"seed element {v} outside carrier of {X.name}")
    changed = True
    while changed:
        changed = False
        for sym, arity in X.signature.functions:
            for args in itertools.product(sorted(closed), repeat=arity):
                value = X.apply(sym, args)
                if value not in closed:
                    closed.add(value)
                    changed = True
    return frozenset(closed)


def induced_subobject(X: FinStructure, carrier: Iterable[int]) -> SubObject:
    carrier = tuple(sorted(set(carrier)))
    return SubObject(X, carrier, induced_relations(X, carrier))


def generated_substructure(X: FinStructure, seed: Iterable[int]) -> SubObject:
    return induced_subobject(X, closure(X, seed))


def maximal_test_object(X: FinStructure) -> SubObject:
    return SubObject(X, tuple(X.carrier), X.relations)


def is_generated_by(G: SubObject, k: int, mode: CategoryMode) -> bool:
    """Whether G is generated by fewer than k elements (the exploration budget)"""
    if mode == CategoryMode.STR:
        return len(G.carrier) < k and G.relation_count < k
    target = frozenset(G.carrier)
    for r in range(min(k, len(G.carrier) + 1)):
        for seed in itertools.combinations(G.carrier, r):
            if closure(G.ambient, seed) == target:
                return True
    return False


def enumerate_subobjects(within: SubObject, mode: CategoryMode) -> Iterator[SubObject]:
    """Every test object of the ambient contained in `within`, in canonical order"""
    X = within.ambient
    check_mode(X.signature, mode)
    for r in range(len(within.carrier) + 1):
        for subset in itertools.combinations(within.carrier, r):
            if mode == CategoryMode.EMB:
                if closure(X, subset) == frozenset(subset):
                    yield SubObject(X, subset, induced_relations(X, subset))
                continue
            members = set(subset)
            available = [
                (sym, row)
                for sym, rows in within.relations
                for row in sorted(rows)
                if all(v in members for v in row)
            ]
            for r2 in range(len(available) + 1):
                for choice in itertools.combinations(available, r2):
                    grouped: Dict[str, List[Row]] = {}
                    for sym, row in choice:
                        grouped.setdefault(sym, []).append(row)
                    yield SubObject(X, subset, _freeze_relations(X.signature, grouped))


def enumerate_test_objects(
    X: FinStructure, mode: CategoryMode, budget: Optional[int] = None
) -> List[SubObject]:
    """All monos G ↣ X with finitely generated G, one per subobject"""
    found = list(enumerate_subobjects(maximal_test_object(X), mode))
    if budget is not None:
        found = [G for G in found if is_generated_by(G, budget, mode)]
    return sorted(found, key=SubObject.sort_key)


# ---------- MAP SEARCH ----------
def search_maps(
    source: SubObject,
    Y: FinStructure,
    kind: str = "embedding",
    fixed: Optional[Mapping[int, int]] = None,
    injective: bool = True,
) -> Iterator[Dict[int, int]]:
    """
    Backtracking search for maps source.carrier → Y.

    kind: "embedding" (functions preserved, relations preserved and reflected),
    "hom" (functions and the source's relations preserved) or "any".
    """
    X = source.ambient
    fixed = dict(fixed or {})
    order = [x for x in source.carrier if x in fixed] + [x for x in source.carrier if x not in fixed]
    position = {x: i for i, x in enumerate(order)}
    checks: List[List[Tuple]] = [[] for _ in order]

    if kind != "any":
        members = set(source.carrier)
        for sym, arity in X.signature.functions:
            for args in itertools.product(order, repeat=arity):
                value = X.apply(sym, args)
                if value not in members:
                    continue
                last = max([position[a] for a in args] + [position[value]])
                checks[last].append(("fun", sym, args, value))
        for sym, arity in X.signature.relations:
            chosen = source.relation(sym)
            if kind == "embedding":
                for row in itertools.product(order, repeat=arity):
                    last = max(position[v] for v in row)
                    checks[last].append(("iff", sym, row, row in chosen))
            else:
                for row in chosen:
                    last = max(position[v] for v in row)
                    checks[last].append(("imp", sym, row, True))

    assignment: Dict[int, int] = {}
    used: set = set()

    def consistent(i: int) -> bool:
        for check in checks[i]:
            tag, sym, args, extra = check
            if tag == "fun":
                if Y.apply(sym, [assignment[a] for a in args]) != assignment[extra]:
                    return False
            else:
                holds = tuple(assignment[v] for v in args) in Y.relation(sym)
                if tag == "iff" and holds != extra:
                    return False
                if tag == "imp" and not holds:
                    return False
        return True

    def extend(i: int) -> Iterator[Dict[int, int]]:
        if i == len(order):
            yield dict(assignment)
            return
        x = order[i]
        candidates = [fixed[x]] if x in fixed else list(Y.carrier)
        for y in candidates:
            if injective and y in used:
                continue
            assignment[x] = y
            used.add(y)
            if consistent(i):
                yield from extend(i + 1)
            used.discard(y)
            del assignment[x]

    yield from extend(0)


def all_isomorphisms(X: FinStructure, Y: FinStructure) -> Iterator[Morphism]:
    _require_shared_signature(X, Y)
    if X.size != Y.size:
        return
    for mapping in search_maps(maximal_test_object(X), Y, "embedding"):
        yield Morphism(X, Y, tuple(mapping[x] for x in X.carrier), f"iso_{X.name}_{Y.name}")


def iso_oracle(X: FinStructure, Y: FinStructure) -> Optional[Morphism]:
    """Some isomorphism X → Y found by backtracking, or None"""
    return next(all_isomorphisms(X, Y), None)


def relabel(X: FinStructure, perm: Sequence[int], name: Optional[str] = None) -> FinStructure:
    """The isomorphic copy of X in which element x is renamed perm[x]"""
    if sorted(perm) != list(X.carrier):
        raise PreconditionError("relabelling needs a permutation of the carrier")
    inverse = [0] * X.size
    for x, y in enumerate(perm):
        inverse[y] = x
    rels = {sym: [tuple(perm[v] for v in row) for row in rows] for sym, rows in X.relations}
    funs = {}
    for sym, arity in X.signature.functions:
        funs[sym] = [
            perm[X.apply(sym, [inverse[a] for a in args])] for args in itertools.product(X.carrier, repeat=arity)
        ]
    return FinStructure.build(X.signature, X.size, rels, funs, name or f"{X.name}'")
