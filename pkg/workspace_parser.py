"""
Workspace Parser
Reads workspace files: signatures, structures, morphisms, theories, chains and ladders
"""

import ast
import logging
import re
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from chains import ChainDiagram, LadderInstance
from errors import BackForthError, WorkspaceSemanticError, WorkspaceSyntaxError
from structures import FinStructure, Morphism, Signature
from theory import Sentence, Theory, parse_sentence

logger = logging.getLogger(__name__)

DEFAULT_SIGNATURE = "default"

_NAME = r"[A-Za-z_][\w.']*"
_SIGNATURE_RE = re.compile(rf"signature\s+({_NAME})\s*(?::\s*(.*))?$", re.S)
_DECL_RE = re.compile(rf"(rel|fun)\s+({_NAME})\s*/\s*(\d+)$")
_STRUCTURE_RE = re.compile(rf"structure\s+({_NAME})\s*:\s*({_NAME}|\d+)$")
_SIZE_RE = re.compile(r"size\s+(\d+)$")
_ASSIGN_RE = re.compile(rf"({_NAME})\s*=\s*(.+)$", re.S)
_MORPHISM_RE = re.compile(rf"morphism\s+({_NAME})\s*:\s*({_NAME})\s*->\s*({_NAME})$")
_MAP_RE = re.compile(r"map\s*(\[.*\])$", re.S)
_THEORY_RE = re.compile(rf"theory\s+({_NAME})(?:\s*:\s*({_NAME}))?$")
_CHAIN_RE = re.compile(rf"chain\s+({_NAME})\s*:\s*(.+)$", re.S)
_ARROW_RE = re.compile(rf"\s*-({_NAME})->\s*")
_LADDER_RE = re.compile(rf"ladder\s+({_NAME})\s*:\s*({_NAME})\s*=>\s*({_NAME})$")
_COMPONENTS_RE = re.compile(r"components\s*\[(.*)\]$", re.S)

_OPEN, _CLOSE = "([{", ")]}"


@dataclass(frozen=True)
class Clause:
    text: str
    line: int
    column: int

    @property
    def keyword(self) -> str:
        return self.text.split(None, 1)[0] if self.text else ""


def split_clauses(text: str) -> List[Clause]:
    """Split on ';' and newlines outside brackets; '#' starts a comment"""
    clauses: List[Clause] = []
    buffer: List[str] = []
    start: Optional[Tuple[int, int]] = None
    stack: List[Tuple[str, int, int]] = []
    line, column = 1, 0
    in_comment = False

    def flush():
        nonlocal buffer, start
        chunk = "".join(buffer).strip()
        if chunk:
            clauses.append(Clause(chunk, start[0], start[1]))
        buffer, start = [], None

    for ch in text:
        if ch == "\n":
            line, column = line + 1, 0
            in_comment = False
            if not stack:
                flush()
            else:
                buffer.append(" ")
            continue
        column += 1
        if in_comment:
            continue
        if ch == "#":
            in_comment = True
            continue
        if ch in _OPEN:
            stack.append((ch, line, column))
        elif ch in _CLOSE:
            if not stack or _OPEN.index(stack[-1][0]) != _CLOSE.index(ch):
                raise WorkspaceSyntaxError(f"unbalanced '{ch}'", line, column)
            stack.pop()
        if ch == ";" and not stack:
            flush()
            continue
        if start is None and not ch.isspace():
            start = (line, column)
        buffer.append(ch)
    if stack:
        ch, l, c = stack[-1]
        raise WorkspaceSyntaxError(f"unclosed '{ch}'", l, c)
    flush()
    return clauses


@dataclass
class Workspace:
    signatures: Dict[str, Signature] = field(default_factory=dict)
    structures: Dict[str, FinStructure] = field(default_factory=dict)
    morphisms: Dict[str, Morphism] = field(default_factory=dict)
    theories: Dict[str, Theory] = field(default_factory=dict)
    chains: Dict[str, ChainDiagram] = field(default_factory=dict)
    ladders: Dict[str, LadderInstance] = field(default_factory=dict)

    def _lookup(self, table: Dict, kind: str, name: str):
        if name not in table:
            known = ", ".join(sorted(table)) or "none"
            raise WorkspaceSemanticError(f"unknown {kind} {name} (declared: {known})")
        return table[name]

    def structure(self, name: str) -> FinStructure:
        return self._lookup(self.structures, "structure", name)

    def morphism(self, name: str) -> Morphism:
        return self._lookup(self.morphisms, "morphism", name)

    def theory(self, name: str) -> Theory:
        return self._lookup(self.theories, "theory", name)

    def chain(self, name: str) -> ChainDiagram:
        return self._lookup(self.chains, "chain", name)

    def ladder(self, name: str) -> LadderInstance:
        return self._lookup(self.ladders, "ladder", name)

    def summary(self) -> Dict:
        return {
            "signatures": [s.to_dict() for s in self.signatures.values()],
            "structures": sorted(self.structures),
            "morphisms": sorted(self.morphisms),
            "theories": sorted(self.theories),
            "chains": sorted(self.chains),
            "ladders": sorted(self.ladders),
        }


def _literal(text: str, clause: Clause) -> Any:
    try:
        return ast.literal_eval(text.strip())
    except (ValueError, SyntaxError):
        raise WorkspaceSyntaxError(f"malformed value {text.strip()!r}", clause.line, clause.column)


def _rows(value: Any, clause: Clause) -> List[Tuple[int, ...]]:
    if isinstance(value, dict):
        if value:
            raise WorkspaceSyntaxError("relation values are sets of tuples", clause.line, clause.column)
        return []
    if not isinstance(value, (set, frozenset, list, tuple)):
        raise WorkspaceSyntaxError("relation values are sets of tuples", clause.line, clause.column)
    rows = []
    for row in value:
        row = (row,) if isinstance(row, int) else row
        if not isinstance(row, tuple) or not all(isinstance(v, int) for v in row):
            raise WorkspaceSyntaxError(f"relation tuple {row!r} is not a tuple of integers", clause.line, clause.column)
        rows.append(row)
    return rows


class _StructureDraft:
    def __init__(self, name: str, signature: Signature, size: Optional[int], clause: Clause):
        self.name = name
        self.signature = signature
        self.size = size
        self.clause = clause
        self.relations: Dict[str, List[Tuple[int, ...]]] = {}
        self.functions: Dict[str, Any] = {}

    def assign(self, symbol: str, raw: str, clause: Clause):
        if self.signature.has_relation(symbol):
            self.relations[symbol] = _rows(_literal(raw, clause), clause)
        elif self.signature.has_function(symbol):
            self.functions[symbol] = _literal(raw, clause)
        else:
            raise WorkspaceSemanticError(
                f"undeclared symbol {symbol} in signature {self.signature.name}", clause.line, clause.column
            )

    def build(self) -> FinStructure:
        if self.size is None:
            raise WorkspaceSemanticError(f"structure {self.name} has no size", self.clause.line, self.clause.column)
        try:
            return FinStructure.build(self.signature, self.size, self.relations, self.functions, self.name)
        except WorkspaceSemanticError as e:
            raise WorkspaceSemanticError(e.bare_message, self.clause.line, self.clause.column)


class _Parser:
    def __init__(self):
        self.ws = Workspace()
        self.declarations: Dict[str, List[Tuple[str, str, int]]] = {}
        self.current: Optional[Tuple[str, Any]] = None

    # ---------- SIGNATURES ----------
    def _declare(self, signature: str, clause: Clause, text: str):
        match = _DECL_RE.match(text.strip())
        if not match:
            raise WorkspaceSyntaxError(f"expected 'rel NAME/ARITY' or 'fun NAME/ARITY', got {text!r}", clause.line, clause.column)
        if signature in self.ws.signatures:
            raise WorkspaceSemanticError(
                f"signature {signature} is already in use; declare its symbols first", clause.line, clause.column
            )
        kind, symbol, arity = match.group(1), match.group(2), int(match.group(3))
        self.declarations.setdefault(signature, []).append((kind, symbol, arity))

    def signature(self, name: str, clause: Clause) -> Signature:
        if name not in self.ws.signatures:
            if name not in self.declarations and name != DEFAULT_SIGNATURE:
                raise WorkspaceSemanticError(f"unknown signature {name}", clause.line, clause.column)
            decls = self.declarations.get(name, [])
            try:
                self.ws.signatures[name] = Signature(
                    name,
                    tuple((s, a) for k, s, a in decls if k == "rel"),
                    tuple((s, a) for k, s, a in decls if k == "fun"),
                )
            except WorkspaceSemanticError as e:
                raise WorkspaceSemanticError(e.bare_message, clause.line, clause.column)
        return self.ws.signatures[name]

    # ---------- BLOCKS ----------
    def close(self):
        if self.current is None:
            return
        kind, draft = self.current
        self.current = None
        if kind == "structure":
            self.ws.structures[draft.name] = draft.build()
        elif kind == "morphism":
            name, source, target, clause = draft
            raise WorkspaceSemanticError(f"morphism {name} has no map", clause.line, clause.column)
        elif kind == "theory":
            name, signature, sentences = draft
            self.ws.theories[name] = Theory(name, signature, tuple(sentences))
        elif kind == "ladder":
            name, *_rest, clause = draft
            raise WorkspaceSemanticError(f"ladder {name} has no components", clause.line, clause.column)

    def _expect(self, kind: str, clause: Clause):
        if self.current is None or self.current[0] != kind:
            raise WorkspaceSyntaxError(f"'{clause.keyword}' outside a {kind} block", clause.line, clause.column)
        return self.current[1]

    def _unique(self, table: Dict, kind: str, name: str, clause: Clause):
        if name in table:
            raise WorkspaceSemanticError(f"{kind} {name} declared twice", clause.line, clause.column)

    def feed(self, clause: Clause):
        text, keyword = clause.text, clause.keyword
        if keyword == "signature":
            match = _SIGNATURE_RE.match(text)
            if not match:
                raise WorkspaceSyntaxError("expected 'signature NAME: ...'", clause.line, clause.column)
            self.close()
            self.current = ("signature", match.group(1))
            self.declarations.setdefault(match.group(1), [])
            if match.group(2):
                self._declare(match.group(1), clause, match.group(2))
        elif keyword in ("rel", "fun"):
            target = self.current[1] if self.current and self.current[0] == "signature" else DEFAULT_SIGNATURE
            self._declare(target, clause, text)
        elif keyword == "structure":
            match = _STRUCTURE_RE.match(text)
            if not match:
                raise WorkspaceSyntaxError("expected 'structure NAME : SIGNATURE'", clause.line, clause.column)
            self.close()
            name, spec = match.group(1), match.group(2)
            self._unique(self.ws.structures, "structure", name, clause)
            if spec.isdigit():
                draft = _StructureDraft(name, self.signature(DEFAULT_SIGNATURE, clause), int(spec), clause)
            else:
                draft = _StructureDraft(name, self.signature(spec, clause), None, clause)
            self.current = ("structure", draft)
        elif keyword == "size":
            draft = self._expect("structure", clause)
            match = _SIZE_RE.match(text)
            if not match:
                raise WorkspaceSyntaxError("expected 'size N'", clause.line, clause.column)
            draft.size = int(match.group(1))
        elif keyword == "morphism":
            match = _MORPHISM_RE.match(text)
            if not match:
                raise WorkspaceSyntaxError("expected 'morphism NAME : SOURCE -> TARGET'", clause.line, clause.column)
            self.close()
            self._unique(self.ws.morphisms, "morphism", match.group(1), clause)
            self.current = ("morphism", (match.group(1), match.group(2), match.group(3), clause))
        elif keyword == "map":
            name, source, target, header = self._expect("morphism", clause)
            match = _MAP_RE.match(text)
            if not match:
                raise WorkspaceSyntaxError("expected 'map [j0, j1, ...]'", clause.line, clause.column)
            table = _literal(match.group(1), clause)
            if not isinstance(table, list) or not all(isinstance(v, int) for v in table):
                raise WorkspaceSyntaxError("a map is a list of integers", clause.line, clause.column)
            X, Y = self._structure(source, header), self._structure(target, header)
            if X.signature != Y.signature:
                raise WorkspaceSemanticError(
                    f"morphism {name} joins structures over different signatures", header.line, header.column
                )
            try:
                self.ws.morphisms[name] = Morphism(X, Y, tuple(table), name)
            except WorkspaceSemanticError as e:
                raise WorkspaceSemanticError(e.bare_message, clause.line, clause.column)
            self.current = None
        elif keyword == "theory":
            match = _THEORY_RE.match(text)
            if not match:
                raise WorkspaceSyntaxError("expected 'theory NAME [: SIGNATURE]'", clause.line, clause.column)
            self.close()
            self._unique(self.ws.theories, "theory", match.group(1), clause)
            signature = self.signature(match.group(2), clause) if match.group(2) else None
            self.current = ("theory", (match.group(1), signature, []))
        elif keyword == "forall":
            _, signature, sentences = self._expect("theory", clause)
            sentences.append(parse_sentence(text, signature, clause.line, clause.column))
        elif keyword == "chain":
            self.close()
            self._chain(clause)
        elif keyword == "ladder":
            match = _LADDER_RE.match(text)
            if not match:
                raise WorkspaceSyntaxError("expected 'ladder NAME : CHAIN => CHAIN'", clause.line, clause.column)
            self.close()
            self._unique(self.ws.ladders, "ladder", match.group(1), clause)
            self.current = ("ladder", (match.group(1), match.group(2), match.group(3), clause))
        elif keyword == "components":
            name, lower, upper, header = self._expect("ladder", clause)
            match = _COMPONENTS_RE.match(text)
            if not match:
                raise WorkspaceSyntaxError("expected 'components [m0, m1, ...]'", clause.line, clause.column)
            names = [n.strip() for n in match.group(1).split(",") if n.strip()]
            components = tuple(self._morphism(n, clause) for n in names)
            try:
                self.ws.ladders[name] = LadderInstance(
                    name, self._chain_ref(lower, header), self._chain_ref(upper, header), components
                )
            except BackForthError as e:
                raise WorkspaceSemanticError(str(e), clause.line, clause.column)
            self.current = None
        elif _ASSIGN_RE.match(text):
            match = _ASSIGN_RE.match(text)
            draft = self._expect("structure", clause)
            draft.assign(match.group(1), match.group(2), clause)
        else:
            raise WorkspaceSyntaxError(f"unexpected clause {text[:40]!r}", clause.line, clause.column)

    # ---------- REFERENCES ----------
    def _structure(self, name: str, clause: Clause) -> FinStructure:
        if name not in self.ws.structures:
            raise WorkspaceSemanticError(f"unknown structure {name}", clause.line, clause.column)
        return self.ws.structures[name]

    def _morphism(self, name: str, clause: Clause) -> Morphism:
        if name not in self.ws.morphisms:
            raise WorkspaceSemanticError(f"unknown morphism {name}", clause.line, clause.column)
        return self.ws.morphisms[name]

    def _chain_ref(self, name: str, clause: Clause) -> ChainDiagram:
        if name not in self.ws.chains:
            raise WorkspaceSemanticError(f"unknown chain {name}", clause.line, clause.column)
        return self.ws.chains[name]

    def _chain(self, clause: Clause):
        match = _CHAIN_RE.match(clause.text)
        if not match:
            raise WorkspaceSyntaxError("expected 'chain NAME : X0 -m01-> X1 ...'", clause.line, clause.column)
        name = match.group(1)
        self._unique(self.ws.chains, "chain", name, clause)
        parts = _ARROW_RE.split(match.group(2).strip())
        objects = [self._structure(p.strip(), clause) for p in parts[0::2]]
        maps = [self._morphism(p, clause) for p in parts[1::2]]
        try:
            self.ws.chains[name] = ChainDiagram(name, tuple(objects), tuple(maps))
        except BackForthError as e:
            raise WorkspaceSemanticError(str(e), clause.line, clause.column)


def parse_workspace(text: str) -> Workspace:
    parser = _Parser()
    clauses = split_clauses(text)
    for clause in clauses:
        parser.feed(clause)
    parser.close()
    if DEFAULT_SIGNATURE in parser.declarations and DEFAULT_SIGNATURE not in parser.ws.signatures:
        parser.signature(DEFAULT_SIGNATURE, Clause("", 1, 1))
    logger.debug(
        "parsed %d clauses: %d structures, %d morphisms", len(clauses), len(parser.ws.structures), len(parser.ws.morphisms)
    )
    return parser.ws
