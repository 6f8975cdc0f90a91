"""
Acceptance suite behind `bfcalc selftest`
Each criterion returns one summary row; quick mode runs a thinned corpus
"""

import contextlib
import io
import itertools
import json
import logging
import os
import tempfile
import time
from typing import Callable, Dict, List, Optional, Tuple

from chains import (
    ChainDiagram,
    LadderInstance,
    colimit_of_chain,
    verify_ladder,
    verify_smooth_composition,
    verify_step,
)
from corpus import (
    all_digraphs,
    all_maps,
    bare_set,
    cycle,
    cyclic_group,
    digraph,
    groups_up_to_8,
    klein_group,
    path,
    random_digraph,
    random_two_relational,
    shuffled_copy,
)
from embeddings import (
    EmbeddingWitness,
    check_purity,
    decide_back_and_forth_embedding,
    decide_lambda_embedding,
    monomorphisms,
)
from errors import BackForthError
from functor_transport import abelianization_functor, transport_image
from span_calculus import (
    Span,
    check_density,
    decide_back_and_forth,
    decide_equivalent,
    family_from_json,
    find_extension,
    greatest_dense_family,
    make_span,
    star_compose,
)
from structures import (
    CategoryMode,
    FinStructure,
    Morphism,
    MorphismClass,
    SubObject,
    all_isomorphisms,
    classify_morphism,
    compose,
    enumerate_test_objects,
    identity,
    iso_oracle,
    is_mono_in,
)
from symbolic_set import (
    INF,
    CardToken,
    SymChain,
    sym_density_check,
    sym_embedding,
    sym_embedding_search,
    sym_equivalent,
    sym_verify_ladder,
)

logger = logging.getLogger(__name__)

EMB, STR = CategoryMode.EMB, CategoryMode.STR

ROUND_TRIP_WORKSPACE = """
rel E/2
structure A : 3 ; E = {(0,1),(1,2),(2,0)}
structure B : 3 ; E = {(1,0),(0,2),(2,1)}
structure P : 2 ; E = {}
structure Q : 2 ; E = {}
morphism rot : A -> B ; map [0, 2, 1]
"""


class _Tally:
    def __init__(self, name: str):
        self.name = name
        self.checked = 0
        self.failures: List[str] = []
        self.notes: List[str] = []
        self.started = time.perf_counter()

    def check(self, condition: bool, label: str):
        self.checked += 1
        if not condition:
            self.failures.append(label)
            logger.warning("%s failed: %s", self.name, label)

    def row(self) -> Dict:
        return {
            "criterion": self.name,
            "passed": not self.failures,
            "checked": self.checked,
            "failures": "; ".join(self.failures[:3]) + (" ..." if len(self.failures) > 3 else ""),
            "seconds": time.perf_counter() - self.started,
            "note": "; ".join(self.notes),
        }


def _thin(items: List, quick: bool, step: int) -> List:
    return items[::step] if quick else items


# ---------- CORPUS PAIRS ----------
def relational_pairs(quick: bool) -> List[Tuple[FinStructure, FinStructure]]:
    pairs = []
    for n in (0, 1, 2):
        graphs = all_digraphs(n)
        pairs += _thin([(X, Y) for X in graphs for Y in graphs], quick, 8)
    for i, X in enumerate(_thin(all_digraphs(3), quick, 16)):
        pairs.append((X, shuffled_copy(X, seed=i)))
        flipped = set(X.relation("E")) ^ {(0, 1)}
        pairs.append((X, digraph(3, flipped, f"{X.name}^")))
    for seed in range(4 if quick else 12):
        n = 4 + seed % 2
        X = random_digraph(n, 0.3, seed=seed)
        pairs.append((X, shuffled_copy(X, seed=seed + 100)))
        pairs.append((X, random_digraph(n, 0.3, seed=seed + 1000)))
    for seed in range(3 if quick else 8):
        X = random_two_relational(3 + seed % 2, seed=seed)
        pairs.append((X, shuffled_copy(X, seed=seed + 200)))
        pairs.append((X, random_two_relational(X.size, seed=seed + 300)))
    return pairs


def group_pairs(quick: bool) -> List[Tuple[FinStructure, FinStructure]]:
    groups = [G for G in groups_up_to_8() if not quick or G.size <= 6]
    pairs = [(G, H) for G in groups for H in groups if G.size == H.size]
    pairs += [(G, shuffled_copy(G, seed=G.size)) for G in groups]
    return pairs


def _str_applicable(X: FinStructure) -> bool:
    return X.signature.is_relational and X.size <= 4


# ---------- CRITERIA ----------
def criterion_set_grid(quick: bool, cap: Optional[int]) -> Dict:
    tally = _Tally("symbolic set grid")
    tokens = [CardToken(n) for n in range(7)] + [INF]
    for a, b in itertools.product(tokens, repeat=2):
        rule = (not a.is_infinite and a == b) or (a.is_infinite and b.is_infinite)
        tally.check(sym_equivalent(a, b) == rule, f"equivalence ({a}, {b})")
        tally.check(sym_density_check(a, b).dense == rule, f"density ({a}, {b})")
    return tally.row()


def criterion_oracle(quick: bool, cap: Optional[int]) -> Dict:
    tally = _Tally("equivalence matches isomorphism")
    for X, Y in relational_pairs(quick) + group_pairs(quick):
        iso = iso_oracle(X, Y) is not None
        tally.check(decide_equivalent(X, Y, EMB, cap) == iso, f"emb {X.name}/{Y.name}")
        if _str_applicable(X):
            tally.check(decide_equivalent(X, Y, STR, cap) == iso, f"str {X.name}/{Y.name}")
    return tally.row()


def partial_isomorphisms(X: FinStructure, Y: FinStructure) -> frozenset:
    """Restrictions of isomorphisms X → Y to substructures, by brute force"""
    tests = enumerate_test_objects(X, EMB)
    return frozenset(
        Span(A.carrier, tuple(iso(a) for a in A.carrier), A.relations) for iso in all_isomorphisms(X, Y) for A in tests
    )


def criterion_greatest_family(quick: bool, cap: Optional[int]) -> Dict:
    tally = _Tally("greatest family is the restricted isomorphisms")
    structures = [bare_set(n) for n in range(5)]
    for n in (1, 2) if quick else (1, 2, 3):
        structures += _thin(all_digraphs(n), quick, 4)
    for i, X in enumerate(structures):
        Y = shuffled_copy(X, seed=i)
        for left, right in ((X, X), (X, Y)):
            S = greatest_dense_family(left, right, EMB, cap)
            tally.check(S.spans == partial_isomorphisms(left, right), f"{left.name}/{right.name}")
    tally.check(len(greatest_dense_family(bare_set(2), bare_set(3), EMB, cap)) == 0, "set2/set3 drains")
    return tally.row()


def equivalent_triples(quick: bool) -> List[Tuple[FinStructure, ...]]:
    bases = [bare_set(n) for n in range(4)] + [cyclic_group(n) for n in range(1, 5)] + [klein_group()]
    bases += _thin(all_digraphs(2), quick, 2) + _thin(all_digraphs(3), quick, 24 if quick else 6)
    return [
        tuple(shuffled_copy(X, seed=10 * i + k, name=f"{X.name}#{k}") if k else X for k in range(4))
        for i, X in enumerate(bases)
    ]


def criterion_composition(quick: bool, cap: Optional[int]) -> Dict:
    tally = _Tally("composite of dense families is dense")
    associativity_failures = 0
    for X, Y, Z, W in equivalent_triples(quick):
        S1 = greatest_dense_family(X, Y, EMB, cap)
        S2 = greatest_dense_family(Y, Z, EMB, cap)
        S3 = greatest_dense_family(Z, W, EMB, cap)
        tally.check(check_density(star_compose(S1, S2)).dense, f"{X.name}*{Z.name}")
        left = star_compose(star_compose(S1, S2), S3)
        right = star_compose(S1, star_compose(S2, S3))
        if left.spans != right.spans:
            associativity_failures += 1
    tally.notes.append(f"associativity violations: {associativity_failures}")
    return tally.row()


def criterion_mode_agreement(quick: bool, cap: Optional[int]) -> Dict:
    tally = _Tally("emb and str modes agree")
    for X, Y in relational_pairs(quick):
        emb = decide_equivalent(X, Y, EMB, cap)
        if _str_applicable(X):
            tally.check(emb == decide_equivalent(X, Y, STR, cap), f"{X.name}/{Y.name}")
        tally.check(emb == decide_back_and_forth(X, Y, cap), f"element-wise {X.name}/{Y.name}")
    return tally.row()


def criterion_abelianization(quick: bool, cap: Optional[int]) -> Dict:
    tally = _Tally("abelianization transports dense families")
    F = abelianization_functor()
    for G in groups_up_to_8():
        if quick and G.size > 6:
            continue
        H = shuffled_copy(G, seed=G.size + 7)
        try:
            result = transport_image(F, greatest_dense_family(G, H, EMB, cap))
        except BackForthError as e:
            tally.check(False, f"{G.name}: {e}")
            continue
        tally.check(result.all_certified, f"certificates {G.name}")
        tally.check(check_density(result.family).dense, f"density {G.name}")
    return tally.row()


def embedding_pool() -> List[FinStructure]:
    return [
        bare_set(1), bare_set(2), bare_set(3),
        digraph(2, []), digraph(2, [(0, 1)]), digraph(2, [(0, 1), (1, 0)]),
        cycle(3), path(3),
        cyclic_group(1), cyclic_group(2), cyclic_group(4), klein_group(),
    ]  # fmt: skip


def criterion_embeddings(quick: bool, cap: Optional[int]) -> Dict:
    tally = _Tally("embedding laws")
    pool = embedding_pool()
    for mode in (EMB, STR):
        objects = [X for X in pool if mode == EMB or X.signature.is_relational]
        for X, Y in itertools.product(objects, repeat=2):
            if X.signature != Y.signature or (quick and X.size + Y.size > 5):
                continue
            for f in all_maps(X, Y):
                level = classify_morphism(f)
                if level < (MorphismClass.EMBEDDING if mode == EMB else MorphismClass.HOM):
                    continue
                holds = decide_lambda_embedding(f, mode, cap)
                label = f"{mode.value} {X.name}->{Y.name} {list(f.table)}"
                tally.check(not holds or is_mono_in(f, mode), f"mono {label}")
                if mode == EMB:
                    tally.check(holds == decide_back_and_forth_embedding(f, cap), f"element-wise {label}")
                    if X.signature.is_relational:
                        tally.check(holds == decide_lambda_embedding(f, STR, cap), f"str {label}")
                tally.check(holds == (level == MorphismClass.ISO), f"iso {label}")
                if holds:
                    tally.check(check_purity(f, mode, cap).pure, f"pure {label}")
        for X, Y, Z in itertools.product(objects, repeat=3):
            if not (X.signature == Y.signature == Z.signature) or X.size + Y.size + Z.size > (6 if quick else 9):
                continue
            for f in monomorphisms(X, Y, mode):
                for g in monomorphisms(Y, Z, mode):
                    ef, eg = decide_lambda_embedding(f, mode, cap), decide_lambda_embedding(g, mode, cap)
                    egf = decide_lambda_embedding(compose(f, g), mode, cap)
                    label = f"{mode.value} {X.name}->{Y.name}->{Z.name}"
                    tally.check(not (ef and eg) or egf, f"composition {label}")
                    tally.check(not (eg and egf) or ef, f"two of three {label}")
    tokens = [CardToken(n) for n in range(5)] + [INF]
    for src, dst in itertools.product(tokens, repeat=2):
        if dst < src:
            continue
        for bijective in (False, True):
            if (bijective and src != dst) or (not bijective and src == dst and not src.is_infinite):
                continue
            rule = bijective or (src.is_infinite and dst.is_infinite)
            value = sym_embedding(src, dst, bijective)
            tally.check(value == rule == sym_embedding_search(src, dst, bijective), f"sym {src}->{dst}")
            tally.check(not value or sym_equivalent(src, dst), f"sym equivalence {src}->{dst}")
    return tally.row()


def finite_chains(quick: bool) -> List[ChainDiagram]:
    pool = [bare_set(1), bare_set(2), bare_set(3), cycle(3), path(3), cyclic_group(2), cyclic_group(4)]
    chains = []
    for length in (1, 2, 3):
        for objects in itertools.product(pool, repeat=length):
            if any(X.signature != objects[0].signature for X in objects):
                continue
            if any(X.size > Y.size for X, Y in zip(objects, objects[1:])):
                continue
            options = [list(monomorphisms(X, Y, EMB)) for X, Y in zip(objects, objects[1:])]
            for maps in itertools.product(*options):
                chains.append(ChainDiagram(f"c{len(chains)}", tuple(objects), tuple(maps)))
    return _thin(chains, quick, 7)


def conjugate_ladder(C: ChainDiagram, seed: int) -> LadderInstance:
    """C against a relabelled copy, with the relabellings as components"""
    perms, copies = [], []
    for i, X in enumerate(C.objects):
        Y = shuffled_copy(X, seed=seed + i, name=f"{X.name}'{i}")
        copies.append(Y)
        perms.append(next(all_isomorphisms(X, Y)))
    maps = []
    for i, f in enumerate(C.maps):
        inverse = {y: x for x, y in enumerate(perms[i].table)}
        table = tuple(perms[i + 1](f(inverse[y])) for y in copies[i].carrier)
        maps.append(Morphism(copies[i], copies[i + 1], table, f"{f.name}'"))
    upper = ChainDiagram(f"{C.name}'", tuple(copies), tuple(maps))
    return LadderInstance(f"L{C.name}", C, upper, tuple(perms))


def sym_chains(length: int) -> List[SymChain]:
    tokens = [CardToken(0), CardToken(1), CardToken(2), INF]
    found = []
    for prefix in itertools.product(tokens, repeat=length):
        for tail in ("=", "+"):
            try:
                found.append(SymChain(prefix, tail))
            except BackForthError:
                continue
    return found


def criterion_ladders(quick: bool, cap: Optional[int]) -> Dict:
    tally = _Tally("ladder conclusion under its hypothesis")
    for i, C in enumerate(finite_chains(quick)):
        smooth = verify_smooth_composition(C, EMB, cap)
        tally.check(not smooth.hypothesis_ok or smooth.conclusion_ok, f"smooth {C.name}")
        if smooth.hypothesis_ok:
            legs = colimit_of_chain(C, EMB).cocone
            tally.check(all(decide_lambda_embedding(leg, EMB, cap) for leg in legs), f"cocone {C.name}")
        identities = LadderInstance(f"id{C.name}", C, C, tuple(identity(X) for X in C.objects))
        for L in (identities, conjugate_ladder(C, seed=i)):
            report = verify_ladder(L, EMB, cap)
            tally.check(not report.hypothesis_ok or report.conclusion_ok, f"ladder {L.name}")
            if report.hypothesis_ok:
                colim_lower = colimit_of_chain(L.lower, EMB).object
                colim_upper = colimit_of_chain(L.upper, EMB).object
                tally.check(decide_equivalent(colim_lower, colim_upper, EMB, cap), f"colimits {L.name}")
                f, g = L.lower.composite(0, L.lower.last), L.upper.composite(0, L.upper.last)
                for span in greatest_dense_family(L.lower.objects[0], L.upper.objects[0], EMB, cap).sorted()[:4]:
                    step = verify_step(span, f, g, EMB, cap)
                    tally.check(not step.hypothesis_ok or bool(step.conclusion_ok), f"step {L.name}")
    for length in (1, 2, 3):
        chains = sym_chains(length)
        for lower, upper in itertools.product(chains, repeat=2):
            if any(y < x for x, y in zip(lower.prefix, upper.prefix)):
                continue
            report = sym_verify_ladder(lower, upper)
            tally.check(not report.hypothesis_ok or report.conclusion_ok, f"sym ladder {lower} => {upper}")
    return tally.row()


def _run_cli(argv: List[str]) -> Tuple[int, Dict]:
    from app import run

    out = io.StringIO()
    with contextlib.redirect_stdout(out):
        code = run(argv)
    return code, json.loads(out.getvalue().strip().splitlines()[-1])


def criterion_round_trip(quick: bool, cap: Optional[int]) -> Dict:
    tally = _Tally("emitted witnesses re-validate")
    from workspace_parser import parse_workspace

    ws = parse_workspace(ROUND_TRIP_WORKSPACE)
    with tempfile.TemporaryDirectory() as tmp:
        workspace = os.path.join(tmp, "ws.bf")
        with open(workspace, "w", encoding="utf-8") as f:
            f.write(ROUND_TRIP_WORKSPACE)
        for mode in ("emb", "str"):
            code, report = _run_cli(["equiv", workspace, "--left", "A", "--right", "B", "--mode", mode])
            tally.check(code == 0, f"equiv {mode}")
            family_file = os.path.join(tmp, f"family_{mode}.json")
            with open(family_file, "w", encoding="utf-8") as f:
                json.dump(report, f)
            code, _ = _run_cli(["dense", workspace, "--left", "A", "--right", "B", "--mode", mode, "--family", family_file])
            tally.check(code == 0, f"dense round trip {mode}")

        bad_file = os.path.join(tmp, "bad.json")
        with open(bad_file, "w", encoding="utf-8") as f:
            json.dump([{"domain": [], "map": []}], f)
        code, report = _run_cli(["dense", workspace, "--left", "P", "--right", "Q", "--family", bad_file])
        tally.check(code == 1, "counterexample exit code")
        counterexample = report["payload"]["density"]["counterexample"]
        P, Q = ws.structure("P"), ws.structure("Q")
        S = family_from_json([{"domain": [], "map": []}], P, Q, EMB)
        span = make_span(P, EMB, dict(zip(counterexample["span"]["domain"], counterexample["span"]["map"])))
        ambient = P if counterexample["direction"] == "back" else Q
        G = SubObject(
            ambient,
            tuple(counterexample["test_object"]["carrier"]),
            tuple((sym, frozenset(map(tuple, rows))) for sym, rows in counterexample["test_object"]["relations"].items()),
        )
        tally.check(span in S and find_extension(S, span, G, counterexample["direction"]) is None, "counterexample")

        code, report = _run_cli(["embed", workspace, "--morphism", "rot"])
        tally.check(code == 0, "embed exit code")
        f = ws.morphism("rot")
        for item in report["payload"]["verdict"]["witnesses"]:
            A = ws.structure("A")
            G = SubObject(
                A,
                tuple(item["test_object"]["carrier"]),
                tuple((sym, frozenset(map(tuple, rows))) for sym, rows in item["test_object"]["relations"].items()),
            )
            witness_span = make_span(A, EMB, dict(zip(item["span"]["domain"], item["span"]["map"])))
            witness = EmbeddingWitness(G, witness_span, tuple(item["connecting"]))
            tally.check(witness.verify(f), f"embedding witness {G.carrier}")

        code, report = _run_cli(["setcalc", "dense", "2", "3"])
        tally.check(code == 1, "symbolic counterexample exit code")
        cx = report["payload"]["counterexample"]
        far = CardToken.parse(cx["span"]["right_rest"] if cx["direction"] == "back" else cx["span"]["left_rest"])
        tally.check(not far.admits(cx["test_size"] - cx["overlap"]), "symbolic counterexample")
    return tally.row()


CRITERIA: List[Callable[[bool, Optional[int]], Dict]] = [
    criterion_set_grid,
    criterion_oracle,
    criterion_greatest_family,
    criterion_composition,
    criterion_mode_agreement,
    criterion_abelianization,
    criterion_embeddings,
    criterion_ladders,
    criterion_round_trip,
]


def run_acceptance(quick: bool = False, cap: Optional[int] = None) -> List[Dict]:
    rows = []
    for criterion in CRITERIA:
        try:
            rows.append(criterion(quick, cap))
        except BackForthError as e:
            logger.error("%s aborted: %s", criterion.__name__, e)
            rows.append(
                {"criterion": criterion.__name__, "passed": False, "checked": 0, "failures": str(e), "seconds": 0.0, "note": ""}
            )
    return rows
