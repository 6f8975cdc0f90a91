"""
Corpus builders
Deterministic families of small structures: sets, digraphs, two-relation structures and groups of order <= 8
"""

import itertools
from typing import Callable, Dict, Hashable, Iterable, Iterator, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from config_utils import get_config
from structures import FinStructure, Morphism, Signature, relabel
from theory import GROUP_SIGNATURE

SET_SIGNATURE = Signature("set")
DIGRAPH_SIGNATURE = Signature("digraph", (("E", 2),))
COLORED_SIGNATURE = Signature("colored", (("E", 2), ("C", 1)))
TWO_RELATION_SIGNATURE = Signature("two", (("E", 2), ("P", 1)))


def _rng(seed: Optional[int] = None) -> np.random.Generator:
    return np.random.default_rng(get_config().seed if seed is None else seed)


# ---------- RELATIONAL ----------
def bare_set(n: int, name: Optional[str] = None) -> FinStructure:
    return FinStructure.build(SET_SIGNATURE, n, name=name or f"set{n}")


def digraph(n: int, edges: Iterable[Sequence[int]], name: Optional[str] = None) -> FinStructure:
    edges = sorted(tuple(e) for e in edges)
    return FinStructure.build(DIGRAPH_SIGNATURE, n, {"E": edges}, name=name or f"g{n}{edges}")


def cycle(n: int, name: Optional[str] = None) -> FinStructure:
    return digraph(n, [(i, (i + 1) % n) for i in range(n)], name or f"C{n}")


def path(n: int, name: Optional[str] = None) -> FinStructure:
    return digraph(n, [(i, i + 1) for i in range(n - 1)], name or f"P{n}")


def all_digraphs(n: int) -> List[FinStructure]:
    """Every digraph on n labelled nodes, loops included"""
    pairs = list(itertools.product(range(n), repeat=2))
    return [
        digraph(n, [p for p, bit in zip(pairs, bits) if bit], name=f"g{n}_{i}")
        for i, bits in enumerate(itertools.product((0, 1), repeat=len(pairs)))
    ]


def random_digraph(n: int, p: float = 0.4, seed: Optional[int] = None, name: Optional[str] = None) -> FinStructure:
    rng = _rng(seed)
    G = nx.gnp_random_graph(n, p, seed=int(rng.integers(2**31)), directed=True)
    loops = [(v, v) for v in range(n) if rng.random() < p / 2]
    return digraph(n, list(G.edges()) + loops, name or f"rand{n}")


def colored_digraph(n: int, edges: Iterable[Sequence[int]], colored: Iterable[int], name: Optional[str] = None) -> FinStructure:
    return FinStructure.build(
        COLORED_SIGNATURE, n, {"E": list(edges), "C": [(v,) for v in colored]}, name=name or f"col{n}"
    )


def random_two_relational(n: int, seed: Optional[int] = None, name: Optional[str] = None) -> FinStructure:
    rng = _rng(seed)
    edges = [(a, b) for a in range(n) for b in range(n) if rng.random() < 0.35]
    marked = [(v,) for v in range(n) if rng.random() < 0.5]
    return FinStructure.build(TWO_RELATION_SIGNATURE, n, {"E": edges, "P": marked}, name=name or f"two{n}")


def shuffled_copy(X: FinStructure, seed: Optional[int] = None, name: Optional[str] = None) -> FinStructure:
    perm = [int(v) for v in _rng(seed).permutation(X.size)]
    return relabel(X, perm, name or f"{X.name}~")


def to_networkx(X: FinStructure) -> nx.DiGraph:
    G = nx.DiGraph()
    G.add_nodes_from(X.carrier)
    G.add_edges_from(X.relation("E"))
    return G


def digraphs_isomorphic(X: FinStructure, Y: FinStructure) -> bool:
    """networkx check, loops included"""
    GX, GY = to_networkx(X), to_networkx(Y)
    for G in (GX, GY):
        nx.set_node_attributes(G, {v: G.has_edge(v, v) for v in G.nodes}, "loop")
    return nx.is_isomorphic(GX, GY, node_match=lambda a, b: a["loop"] == b["loop"])


# ---------- GROUPS ----------
def group_from_operation(
    elements: Sequence[Hashable], op: Callable[[Hashable, Hashable], Hashable], name: str
) -> FinStructure:
    """The (m, inv, e) structure of a finite group given by its multiplication"""
    index: Dict[Hashable, int] = {g: i for i, g in enumerate(elements)}
    n = len(elements)
    table = np.array([[index[op(a, b)] for b in elements] for a in elements], dtype=int)
    identity_row = [i for i in range(n) if list(table[i]) == list(range(n))]
    e = identity_row[0]
    inv = [int(np.flatnonzero(table[i] == e)[0]) for i in range(n)]
    return FinStructure.build(GROUP_SIGNATURE, n, {}, {"m": table.tolist(), "inv": inv, "e": [e]}, name)


def cyclic_group(n: int) -> FinStructure:
    table = np.add.outer(np.arange(n), np.arange(n)) % n
    inv = (-np.arange(n)) % n
    return FinStructure.build(GROUP_SIGNATURE, n, {}, {"m": table.tolist(), "inv": inv.tolist(), "e": [0]}, f"Z{n}")


def direct_product(G: FinStructure, H: FinStructure, name: Optional[str] = None) -> FinStructure:
    elements = list(itertools.product(G.carrier, H.carrier))
    op = lambda a, b: (G.apply("m", (a[0], b[0])), H.apply("m", (a[1], b[1])))  # noqa: E731
    return group_from_operation(elements, op, name or f"{G.name}x{H.name}")


def klein_group() -> FinStructure:
    return direct_product(cyclic_group(2), cyclic_group(2), "V4")


def _compose_perm(p: Tuple[int, ...], q: Tuple[int, ...]) -> Tuple[int, ...]:
    """p after q"""
    return tuple(p[q[i]] for i in range(len(q)))


def permutation_group(generators: Sequence[Tuple[int, ...]], name: str) -> FinStructure:
    """The group generated by the given permutations, elements in order of discovery"""
    identity = tuple(range(len(generators[0])))
    elements = [identity]
    seen = {identity}
    frontier = [identity]
    while frontier:
        nxt = []
        for g in frontier:
            for s in generators:
                h = _compose_perm(s, g)
                if h not in seen:
                    seen.add(h)
                    elements.append(h)
                    nxt.append(h)
        frontier = nxt
    return group_from_operation(elements, _compose_perm, name)


def symmetric_group_3() -> FinStructure:
    return permutation_group([(1, 0, 2), (1, 2, 0)], "S3")


def dihedral_group_4() -> FinStructure:
    return permutation_group([(1, 2, 3, 0), (3, 2, 1, 0)], "D4")


_QUATERNION_UNITS = {
    (0, 0): (1, 0), (0, 1): (1, 1), (0, 2): (1, 2), (0, 3): (1, 3),
    (1, 0): (1, 1), (1, 1): (-1, 0), (1, 2): (1, 3), (1, 3): (-1, 2),
    (2, 0): (1, 2), (2, 1): (-1, 3), (2, 2): (-1, 0), (2, 3): (1, 1),
    (3, 0): (1, 3), (3, 1): (1, 2), (3, 2): (-1, 1), (3, 3): (-1, 0),
}  # fmt: skip


def quaternion_group() -> FinStructure:
    elements = [(s, u) for s in (1, -1) for u in range(4)]

    def op(a, b):
        sign, unit = _QUATERNION_UNITS[(a[1], b[1])]
        return (a[0] * b[0] * sign, unit)

    return group_from_operation(elements, op, "Q8")


def groups_up_to_8() -> List[FinStructure]:
    """One group per isomorphism type of order <= 8"""
    groups = [cyclic_group(n) for n in range(1, 9)]
    groups += [
        klein_group(),
        symmetric_group_3(),
        direct_product(cyclic_group(2), cyclic_group(4), "Z2xZ4"),
        direct_product(klein_group(), cyclic_group(2), "Z2^3"),
        dihedral_group_4(),
        quaternion_group(),
    ]
    return groups


# ---------- MORPHISMS ----------
def all_maps(X: FinStructure, Y: FinStructure) -> Iterator[Morphism]:
    for i, table in enumerate(itertools.product(Y.carrier, repeat=X.size)):
        yield Morphism(X, Y, tuple(table), f"f{i}")
