"""
Basic universal theories: parsing, model checking and image factorization
"""

import itertools
import logging
import re
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterator, List, Optional, Tuple, Union

from errors import PreconditionError, SignatureMismatchError, TheoremViolation, WorkspaceSemanticError, WorkspaceSyntaxError
from structures import (
    FinStructure,
    Morphism,
    MorphismClass,
    Signature,
    classify_morphism,
    induced_subobject,
)

logger = logging.getLogger(__name__)


# ---------- SYNTAX TREE ----------
@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class App:
    symbol: str
    args: Tuple["Term", ...] = ()


Term = Union[Var, App]


@dataclass(frozen=True)
class Atom:
    symbol: str
    args: Tuple[Term, ...]


@dataclass(frozen=True)
class Equals:
    left: Term
    right: Term


@dataclass(frozen=True)
class Conj:
    parts: Tuple["Formula", ...] = ()


@dataclass(frozen=True)
class Disj:
    parts: Tuple["Formula", ...] = ()


Formula = Union[Atom, Equals, Conj, Disj]
TRUE = Conj(())
FALSE = Disj(())


def _symbols(node) -> Iterator[Tuple[str, str, int]]:
    if isinstance(node, Var):
        return
    if isinstance(node, App):
        yield ("fun", node.symbol, len(node.args))
    elif isinstance(node, Atom):
        yield ("rel", node.symbol, len(node.args))
    if isinstance(node, Equals):
        children = (node.left, node.right)
    elif isinstance(node, (Conj, Disj)):
        children = node.parts
    else:
        children = node.args
    for child in children:
        yield from _symbols(child)


@dataclass(frozen=True)
class Sentence:
    variables: Tuple[str, ...]
    antecedent: Formula
    consequent: Formula
    text: str = field(default="", compare=False)


@dataclass(frozen=True)
class Theory:
    name: str
    signature: Optional[Signature]
    sentences: Tuple[Sentence, ...] = ()

    @property
    def symbols(self) -> FrozenSet[Tuple[str, str, int]]:
        """(kind, symbol, arity) for every symbol the sentences mention"""
        return frozenset(
            sym for s in self.sentences for part in (s.antecedent, s.consequent) for sym in _symbols(part)
        )

    def applies_to(self, signature: Signature) -> bool:
        """Whether every sentence can be read over signature"""
        if self.signature is not None:
            return self.signature == signature
        declared = {("rel", s, a) for s, a in signature.relations} | {("fun", s, a) for s, a in signature.functions}
        return self.symbols <= declared

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "signature": self.signature.name if self.signature else None,
            "sentences": [s.text for s in self.sentences],
        }


# ---------- PARSER ----------
_TOKEN_RE = re.compile(
    r"\s*(?:(?P<arrow>->)|(?P<ident>[A-Za-z_][A-Za-z0-9_']*)|(?P<num>\d+)|(?P<punct>[().,=&|~!])|(?P<bad>\S))"
)
_NEGATIONS = {"not", "~", "!"}
_QUANTIFIERS = {"forall", "exists"}


@dataclass
class _Token:
    kind: str
    text: str
    offset: int


class _SentenceParser:
    def __init__(self, text: str, signature: Optional[Signature], line: int, column: int):
        self.text = text
        self.signature = signature
        self.line = line
        self.column = column
        self.tokens = self._tokenize(text)
        self.pos = 0
        self.bound: Tuple[str, ...] = ()

    def error(self, message: str, token: Optional[_Token] = None, semantic: bool = False):
        offset = token.offset if token is not None else len(self.text)
        before = self.text[:offset]
        line = self.line + before.count("\n")
        column = (self.column + offset) if "\n" not in before else len(before) - before.rfind("\n")
        cls = WorkspaceSemanticError if semantic else WorkspaceSyntaxError
        raise cls(message, line, column)

    def _tokenize(self, text: str) -> List[_Token]:
        tokens = []
        index = 0
        while index < len(text):
            match = _TOKEN_RE.match(text, index)
            if match is None or match.end() == index:
                break
            index = match.end()
            kind = match.lastgroup
            value = match.group(kind)
            offset = match.start(kind)
            if kind == "bad":
                self.tokens = tokens
                self.error(f"unexpected character {value!r}", _Token(kind, value, offset))
            tokens.append(_Token(kind, value, offset))
        return tokens

    def peek(self) -> Optional[_Token]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> _Token:
        token = self.peek()
        if token is None:
            self.error("unexpected end of sentence")
        self.pos += 1
        return token

    def expect(self, text: str) -> _Token:
        token = self.next()
        if token.text != text:
            self.error(f"expected {text!r}, found {token.text!r}", token)
        return token

    def sentence(self) -> Sentence:
        variables: List[str] = []
        token = self.peek()
        if token is not None and token.text == "forall":
            self.next()
            while True:
                token = self.next()
                if token.text == ".":
                    break
                if token.kind != "ident" or token.text in _QUANTIFIERS:
                    self.error(f"expected a variable name, found {token.text!r}", token)
                variables.append(token.text)
        self.bound = tuple(variables)
        antecedent = self.formula()
        self.expect("->")
        consequent = self.formula()
        trailing = self.peek()
        if trailing is not None:
            self.error(f"unexpected {trailing.text!r} after sentence", trailing)
        return Sentence(tuple(variables), antecedent, consequent, self.text.strip())

    def formula(self) -> Formula:
        parts = [self.conjunction()]
        while self.peek() is not None and self.peek().text in ("or", "|"):
            self.next()
            parts.append(self.conjunction())
        return parts[0] if len(parts) == 1 else Disj(tuple(parts))

    def conjunction(self) -> Formula:
        parts = [self.primary()]
        while self.peek() is not None and self.peek().text in ("and", "&"):
            self.next()
            parts.append(self.primary())
        return parts[0] if len(parts) == 1 else Conj(tuple(parts))

    def primary(self) -> Formula:
        token = self.peek()
        if token is None:
            self.error("expected a formula")
        if token.text in _NEGATIONS:
            self.error("negation is not allowed inside a basic universal sentence", token)
        if token.text in _QUANTIFIERS:
            self.error("quantifiers are not allowed inside the matrix of a sentence", token)
        if token.text == "true":
            self.next()
            return TRUE
        if token.text == "false":
            self.next()
            return FALSE
        if token.text == "(":
            self.next()
            inner = self.formula()
            self.expect(")")
            return inner
        if token.kind != "ident":
            self.error(f"unexpected {token.text!r}", token)
        left_start = token
        left = self.application()
        after = self.peek()
        if after is not None and after.text == "=":
            self.next()
            right = self.term()
            return Equals(self._as_term(left, left_start), right)
        if isinstance(left, App) and left.args and self._is_relation(left.symbol):
            return Atom(left.symbol, left.args)
        self.error(f"expected an atom, found term {left_start.text!r}", left_start)

    def _is_relation(self, symbol: str) -> bool:
        if self.signature is None:
            return True
        return self.signature.has_relation(symbol)

    def _as_term(self, node: Union[Var, App], token: _Token) -> Term:
        if isinstance(node, App) and self.signature is not None and self.signature.has_relation(node.symbol):
            self.error(f"relation {node.symbol} used as a term", token, semantic=True)
        return node

    def term(self) -> Term:
        token = self.peek()
        if token is None or token.kind != "ident":
            self.error("expected a term", token)
        return self._as_term(self.application(), token)

    def application(self) -> Term:
        token = self.next()
        name = token.text
        if token.text in _NEGATIONS | _QUANTIFIERS | {"true", "false", "and", "or"}:
            self.error(f"unexpected keyword {name!r}", token)
        after = self.peek()
        if after is not None and after.text == "(":
            self.next()
            args = [self.term()]
            while self.peek() is not None and self.peek().text == ",":
                self.next()
                args.append(self.term())
            self.expect(")")
            self._check_symbol(name, len(args), token)
            return App(name, tuple(args))
        if name in self.bound:
            return Var(name)
        if self.signature is not None and self.signature.has_function(name):
            self._check_symbol(name, 0, token)
            return App(name, ())
        self.error(f"unbound variable {name!r}", token, semantic=True)

    def _check_symbol(self, name: str, arity: int, token: _Token):
        if self.signature is None:
            return
        if not (self.signature.has_relation(name) or self.signature.has_function(name)):
            self.error(f"undeclared symbol {name!r}", token, semantic=True)
        if self.signature.arity(name) != arity:
            self.error(
                f"symbol {name!r} has arity {self.signature.arity(name)}, used with {arity} arguments",
                token,
                semantic=True,
            )


def parse_sentence(text: str, signature: Optional[Signature] = None, line: int = 1, column: int = 1) -> Sentence:
    return _SentenceParser(text, signature, line, column).sentence()


def parse_theory(text: str, signature: Optional[Signature] = None, name: str = "T") -> Theory:
    """Parse sentences separated by ';' or newlines into a Theory"""
    sentences = []
    line = 1
    for raw_line in text.split("\n"):
        column = 1
        for chunk in raw_line.split("#", 1)[0].split(";"):
            if chunk.strip():
                lead = len(chunk) - len(chunk.lstrip())
                sentences.append(parse_sentence(chunk.strip(), signature, line, column + lead))
            column += len(chunk) + 1
        line += 1
    return Theory(name, signature, tuple(sentences))


# ---------- MODEL CHECKING ----------
def evaluate_term(M: FinStructure, term: Term, env: Dict[str, int]) -> int:
    if isinstance(term, Var):
        return env[term.name]
    return M.apply(term.symbol, [evaluate_term(M, a, env) for a in term.args])


def evaluate(M: FinStructure, formula: Formula, env: Dict[str, int]) -> bool:
    if isinstance(formula, Atom):
        return M.holds(formula.symbol, [evaluate_term(M, a, env) for a in formula.args])
    if isinstance(formula, Equals):
        return evaluate_term(M, formula.left, env) == evaluate_term(M, formula.right, env)
    if isinstance(formula, Conj):
        return all(evaluate(M, p, env) for p in formula.parts)
    return any(evaluate(M, p, env) for p in formula.parts)


@dataclass(frozen=True)
class Satisfaction:
    holds: bool
    sentence: Optional[Sentence] = None
    assignment: Optional[Tuple[Tuple[str, int], ...]] = None

    def __bool__(self) -> bool:
        return self.holds

    def to_dict(self) -> Dict:
        return {
            "holds": self.holds,
            "sentence": self.sentence.text if self.sentence else None,
            "assignment": dict(self.assignment) if self.assignment else None,
        }


def _assignments(M: FinStructure, variables: Tuple[str, ...]) -> Iterator[Dict[str, int]]:
    for values in itertools.product(M.carrier, repeat=len(variables)):
        yield dict(zip(variables, values))


def satisfies(M: FinStructure, T: Theory) -> Satisfaction:
    """Direct evaluation of every sentence under every assignment"""
    if T.signature is not None and T.signature != M.signature:
        raise SignatureMismatchError(f"theory {T.name} is over {T.signature.name}, structure {M.name} is not")
    for sentence in T.sentences:
        for env in _assignments(M, sentence.variables):
            if evaluate(M, sentence.antecedent, env) and not evaluate(M, sentence.consequent, env):
                logger.debug("%s fails %s at %s", M.name, sentence.text, env)
                return Satisfaction(False, sentence, tuple(env.items()))
    return Satisfaction(True)


def empty_theory(signature: Optional[Signature] = None) -> Theory:
    return Theory("empty", signature, ())


# ---------- IMAGE FACTORIZATION ----------
@dataclass(frozen=True)
class ImageFactorization:
    surjection: Morphism
    embedding: Morphism

    @property
    def image(self) -> FinStructure:
        return self.surjection.target

    @property
    def image_set(self) -> Tuple[int, ...]:
        return self.embedding.table


def image_factorization(f: Morphism, T: Theory) -> ImageFactorization:
    """Split a homomorphism of T-models as X ↠ U ↣ Y with U the induced image"""
    if classify_morphism(f) < MorphismClass.HOM:
        raise PreconditionError(f"{f.name} is not a homomorphism")
    for M in (f.source, f.target):
        result = satisfies(M, T)
        if not result:
            raise PreconditionError(f"{M.name} is not a model of {T.name}: {result.sentence.text}")
    sub = induced_subobject(f.target, f.image)
    U, inclusion = sub.materialize()
    U = U.named(f"im({f.name})")
    index = {v: i for i, v in enumerate(sub.carrier)}
    surjection = Morphism(f.source, U, tuple(index[f(x)] for x in f.source.carrier), f"{f.name}/epi")
    embedding = Morphism(U, f.target, inclusion.table, f"{f.name}/mono")
    if not satisfies(U, T):
        raise TheoremViolation(f"image of {f.name} is not a model of the universal theory {T.name}")
    if classify_morphism(surjection) < MorphismClass.HOM or classify_morphism(embedding) < MorphismClass.EMBEDDING:
        raise TheoremViolation(f"image factorization of {f.name} has a non-homomorphic factor")
    return ImageFactorization(surjection, embedding)


# ---------- BUILT-IN THEORIES ----------
GROUP_SIGNATURE = Signature("group", (), (("m", 2), ("inv", 1), ("e", 0)))

_GROUP_AXIOMS = """
forall x y z. true -> m(m(x,y),z) = m(x,m(y,z))
forall x. true -> m(e,x) = x and m(x,e) = x
forall x. true -> m(inv(x),x) = e and m(x,inv(x)) = e
"""


def group_theory() -> Theory:
    return parse_theory(_GROUP_AXIOMS, GROUP_SIGNATURE, "groups")


def abelian_group_theory() -> Theory:
    return parse_theory(_GROUP_AXIOMS + "forall x y. true -> m(x,y) = m(y,x)\n", GROUP_SIGNATURE, "abelian-groups")


INEQUALITY_SYMBOL = "n"


def with_inequality(T: Theory) -> Theory:
    """Extension by definition adding n(x,y) meaning x != y; its model homomorphisms are injective"""
    if T.signature is None:
        raise PreconditionError("the inequality extension needs a theory with a signature")
    if T.signature.has_relation(INEQUALITY_SYMBOL) or T.signature.has_function(INEQUALITY_SYMBOL):
        raise WorkspaceSemanticError(f"signature {T.signature.name} already uses {INEQUALITY_SYMBOL}")
    signature = Signature(
        f"{T.signature.name}+n",
        T.signature.relations + ((INEQUALITY_SYMBOL, 2),),
        T.signature.functions,
    )
    extra = parse_theory(
        "forall x y. n(x,y) and x = y -> false\nforall x y. true -> n(x,y) or x = y",
        signature,
    )
    return Theory(f"{T.name}+", signature, T.sentences + extra.sentences)


def inequality_expansion(M: FinStructure, signature: Signature) -> FinStructure:
    """The unique expansion of M to the signature with n interpreted as inequality"""
    rels = {sym: rows for sym, rows in M.relations}
    rels[INEQUALITY_SYMBOL] = [(a, b) for a in M.carrier for b in M.carrier if a != b]
    funs = {sym: list(flat) for sym, flat in M.functions}
    return FinStructure.build(signature, M.size, rels, funs, f"{M.name}+n")
