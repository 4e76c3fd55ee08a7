"""Linear-time formulas: syntax trees, parsing, evaluation and normal forms.

Two syntactic layers share one node vocabulary:

* Boolean expressions -- trees over {true, false, atom, !, |, &} -- label
  conditions evaluated against a single state's label set.
* Temporal formulas add X (next), U (until), F (eventually) and G (always),
  plus -> as a derived connective.

A "response" formula is an implication between two conjunctions of GF terms
over Boolean expressions; it is the fragment every player goal and every
fast-path specification must live in.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Optional


class ParseError(ValueError):
    """Raised on malformed formula text; carries line/column of the offence."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class ShapeError(ValueError):
    """Raised when a formula does not fit the GF-implication shape."""


@dataclass(frozen=True)
class Formula:
    pass


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Bottom(Formula):
    pass


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class Not(Formula):
    sub: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Next(Formula):
    sub: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Eventually(Formula):
    sub: Formula


@dataclass(frozen=True)
class Always(Formula):
    sub: Formula


TOP = Top()
BOTTOM = Bottom()

_TEMPORAL = (Next, Until, Eventually, Always)


@dataclass(frozen=True)
class Gr1Formula:
    """Implication between two conjunctions of GF terms.

    Empty antecedent or consequent tuples stand for `true` on that side, so
    bare GF conjunctions and tautologies are expressible.
    """

    antecedents: tuple[Formula, ...]
    consequents: tuple[Formula, ...]

    def __post_init__(self):
        for side in (self.antecedents, self.consequents):
            for term in side:
                if not is_bool_expr(term):
                    raise ShapeError(f"non-Boolean GF argument: {to_str(term)}")


GR1_TRUE = Gr1Formula((), ())


def is_bool_expr(f: Formula) -> bool:
    if isinstance(f, (Top, Bottom, Atom)):
        return True
    if isinstance(f, Not):
        return is_bool_expr(f.sub)
    if isinstance(f, (And, Or)):
        return is_bool_expr(f.left) and is_bool_expr(f.right)
    return False


def atoms_of(f) -> frozenset[str]:
    """Atom names appearing in a formula or Gr1Formula."""
    if isinstance(f, Gr1Formula):
        found = frozenset()
        for term in f.antecedents + f.consequents:
            found |= atoms_of(term)
        return found
    if isinstance(f, Atom):
        return frozenset([f.name])
    out = frozenset()
    for child in _children(f):
        out |= atoms_of(child)
    return out


def _children(f: Formula):
    if isinstance(f, (Not, Next, Eventually, Always)):
        return (f.sub,)
    if isinstance(f, (And, Or, Implies, Until)):
        return (f.left, f.right)
    return ()


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(->|[()!&|]|[A-Za-z_][A-Za-z0-9_]*)")
_KEYWORDS = {"G", "F", "X", "U", "true", "false"}


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if m is None or not m.group(1):
            line, col = _line_col(text, pos)
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        tok = m.group(1)
        line, col = _line_col(text, m.end(1) - len(tok))
        if re.fullmatch(r"[GFX]{2,}", tok):
            # a run of unary temporal operators written without spaces (GF p)
            for offset, ch in enumerate(tok):
                tokens.append((ch, line, col + offset))
        else:
            tokens.append((tok, line, col))
        pos = m.end()
    return tokens


def _line_col(text, pos):
    line = text.count("\n", 0, pos) + 1
    last_nl = text.rfind("\n", 0, pos)
    return line, pos - last_nl


class _Parser:
    def __init__(self, tokens, alphabet):
        self.tokens = tokens
        self.alphabet = alphabet
        self.i = 0

    def peek(self):
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message):
        if self.i < len(self.tokens):
            _, line, col = self.tokens[self.i]
        elif self.tokens:
            _, line, col = self.tokens[-1]
        else:
            line = col = 1
        raise ParseError(message, line, col)

    def parse(self):
        f = self.implication()
        if self.peek() is not None:
            self.error(f"trailing input starting at {self.peek()!r}")
        return f

    # precedence (loosest to tightest): ->, |, &, U, unary
    def implication(self):
        left = self.disjunction()
        if self.peek() == "->":
            self.advance()
            return Implies(left, self.implication())
        return left

    def disjunction(self):
        f = self.conjunction()
        while self.peek() == "|":
            self.advance()
            f = Or(f, self.conjunction())
        return f

    def conjunction(self):
        f = self.until()
        while self.peek() == "&":
            self.advance()
            f = And(f, self.until())
        return f

    def until(self):
        left = self.unary()
        if self.peek() == "U":
            self.advance()
            return Until(left, self.until())
        return left

    def unary(self):
        tok = self.peek()
        if tok is None:
            self.error("unexpected end of formula")
        if tok == "!":
            self.advance()
            return Not(self.unary())
        if tok == "X":
            self.advance()
            return Next(self.unary())
        if tok == "F":
            self.advance()
            return Eventually(self.unary())
        if tok == "G":
            self.advance()
            return Always(self.unary())
        if tok == "(":
            self.advance()
            f = self.implication()
            if self.peek() != ")":
                self.error("expected ')'")
            self.advance()
            return f
        if tok == "true":
            self.advance()
            return TOP
        if tok == "false":
            self.advance()
            return BOTTOM
        if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", tok) and tok not in _KEYWORDS:
            _, line, col = self.advance()
            if self.alphabet is not None and tok not in self.alphabet:
                raise ParseError(f"undeclared atom {tok!r}", line, col)
            return Atom(tok)
        self.error(f"unexpected token {tok!r}")


def parse_ltl(text: str, alphabet=None) -> Formula:
    """Parse a temporal formula; atoms outside `alphabet` are rejected."""
    return _Parser(_tokenize(text), alphabet).parse()


def parse_gr1(text: str, alphabet=None) -> Gr1Formula:
    """Parse text and require the GF-implication shape."""
    return to_gr1(parse_ltl(text, alphabet))


def to_gr1(f: Formula) -> Gr1Formula:
    """Recognize the GF-implication shape syntactically.

    A bare conjunction of GF terms is read as an implication with empty
    antecedent; `true` on a side is the empty conjunction.
    """
    if isinstance(f, Implies):
        return Gr1Formula(_gf_side(f.left), _gf_side(f.right))
    return Gr1Formula((), _gf_side(f))


def _gf_side(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, Top):
        return ()
    terms = []
    for conjunct in _flatten_and(f):
        if isinstance(conjunct, Always) and isinstance(conjunct.sub, Eventually):
            body = _as_bool_expr(conjunct.sub.sub)
            terms.append(body)
        else:
            raise ShapeError(f"not a GF term: {to_str(conjunct)}")
    return tuple(terms)


def _flatten_and(f: Formula):
    if isinstance(f, And):
        yield from _flatten_and(f.left)
        yield from _flatten_and(f.right)
    else:
        yield f


def _as_bool_expr(f: Formula) -> Formula:
    """Normalize -> away and reject temporal operators inside a GF argument."""
    if isinstance(f, _TEMPORAL):
        raise ShapeError(f"temporal operator inside GF argument: {to_str(f)}")
    if isinstance(f, (Top, Bottom, Atom)):
        return f
    if isinstance(f, Not):
        return Not(_as_bool_expr(f.sub))
    if isinstance(f, And):
        return And(_as_bool_expr(f.left), _as_bool_expr(f.right))
    if isinstance(f, Or):
        return Or(_as_bool_expr(f.left), _as_bool_expr(f.right))
    if isinstance(f, Implies):
        return Or(Not(_as_bool_expr(f.left)), _as_bool_expr(f.right))
    raise ShapeError(f"unsupported GF argument: {to_str(f)}")


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

_LEVEL_IMPLIES, _LEVEL_OR, _LEVEL_AND, _LEVEL_UNTIL, _LEVEL_UNARY = range(5)


def _level(f: Formula) -> int:
    if isinstance(f, Implies):
        return _LEVEL_IMPLIES
    if isinstance(f, Or):
        return _LEVEL_OR
    if isinstance(f, And):
        return _LEVEL_AND
    if isinstance(f, Until):
        return _LEVEL_UNTIL
    return _LEVEL_UNARY


def to_str(f) -> str:
    """Render back to the concrete syntax accepted by the parsers."""
    if isinstance(f, Gr1Formula):
        return to_str(gr1_to_ltl(f))
    return _print(f)


def _print(f: Formula) -> str:
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Bottom):
        return "false"
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Not):
        return "!" + _wrap(f.sub, _LEVEL_UNARY)
    if isinstance(f, Next):
        return "X " + _wrap(f.sub, _LEVEL_UNARY)
    if isinstance(f, Eventually):
        return "F " + _wrap(f.sub, _LEVEL_UNARY)
    if isinstance(f, Always):
        return "G " + _wrap(f.sub, _LEVEL_UNARY)
    if isinstance(f, Until):
        return _wrap(f.left, _LEVEL_UNARY) + " U " + _wrap(f.right, _LEVEL_UNTIL)
    if isinstance(f, And):
        return _wrap(f.left, _LEVEL_AND) + " & " + _wrap(f.right, _LEVEL_UNTIL)
    if isinstance(f, Or):
        return _wrap(f.left, _LEVEL_OR) + " | " + _wrap(f.right, _LEVEL_AND)
    if isinstance(f, Implies):
        return _wrap(f.left, _LEVEL_OR) + " -> " + _wrap(f.right, _LEVEL_IMPLIES)
    raise TypeError(f"not a formula: {f!r}")


def _wrap(f: Formula, min_level: int) -> str:
    text = _print(f)
    if _level(f) < min_level:
        return "(" + text + ")"
    return text


# ---------------------------------------------------------------------------
# Evaluation and normal forms
# ---------------------------------------------------------------------------

def eval_bool(e: Formula, label_set) -> bool:
    """Propositional truth of a Boolean expression against one label set."""
    if isinstance(e, Top):
        return True
    if isinstance(e, Bottom):
        return False
    if isinstance(e, Atom):
        return e.name in label_set
    if isinstance(e, Not):
        return not eval_bool(e.sub, label_set)
    if isinstance(e, And):
        return eval_bool(e.left, label_set) and eval_bool(e.right, label_set)
    if isinstance(e, Or):
        return eval_bool(e.left, label_set) or eval_bool(e.right, label_set)
    if isinstance(e, Implies):
        return (not eval_bool(e.left, label_set)) or eval_bool(e.right, label_set)
    raise TypeError(f"temporal operator in Boolean context: {to_str(e)}")


def gr1_to_ltl(g: Gr1Formula) -> Formula:
    """Embed the GF-implication shape into the general temporal syntax."""
    return Implies(_gf_conjunction(g.antecedents), _gf_conjunction(g.consequents))


def _gf_conjunction(terms) -> Formula:
    if not terms:
        return TOP
    f = Always(Eventually(terms[0]))
    for term in terms[1:]:
        f = And(f, Always(Eventually(term)))
    return f


def nnf(f: Formula) -> Formula:
    """Negation normal form over {true, false, atom, !atom, &, |, X, U, F, G}.

    `!` survives only on atoms.  `!(a U b)` is rewritten with the weak-until
    expansion `(!b U (!a & !b)) | G !b` so no extra release operator is
    needed.
    """
    if isinstance(f, (Top, Bottom, Atom)):
        return f
    if isinstance(f, And):
        return And(nnf(f.left), nnf(f.right))
    if isinstance(f, Or):
        return Or(nnf(f.left), nnf(f.right))
    if isinstance(f, Implies):
        return Or(nnf(Not(f.left)), nnf(f.right))
    if isinstance(f, Next):
        return Next(nnf(f.sub))
    if isinstance(f, Eventually):
        return Eventually(nnf(f.sub))
    if isinstance(f, Always):
        return Always(nnf(f.sub))
    if isinstance(f, Until):
        return Until(nnf(f.left), nnf(f.right))
    if isinstance(f, Not):
        g = f.sub
        if isinstance(g, Top):
            return BOTTOM
        if isinstance(g, Bottom):
            return TOP
        if isinstance(g, Atom):
            return f
        if isinstance(g, Not):
            return nnf(g.sub)
        if isinstance(g, And):
            return Or(nnf(Not(g.left)), nnf(Not(g.right)))
        if isinstance(g, Or):
            return And(nnf(Not(g.left)), nnf(Not(g.right)))
        if isinstance(g, Implies):
            return And(nnf(g.left), nnf(Not(g.right)))
        if isinstance(g, Next):
            return Next(nnf(Not(g.sub)))
        if isinstance(g, Eventually):
            return Always(nnf(Not(g.sub)))
        if isinstance(g, Always):
            return Eventually(nnf(Not(g.sub)))
        if isinstance(g, Until):
            na = nnf(Not(g.left))
            nb = nnf(Not(g.right))
            return Or(Until(nb, And(na, nb)), Always(nb))
    raise TypeError(f"not a formula: {f!r}")


def negate_to_ltl(f: Formula) -> Formula:
    """Negation, pushed into negation normal form."""
    return nnf(Not(f))


def lasso_satisfies(f: Formula, lasso, labels) -> bool:
    """Membership of the lasso's label word in the language of `f`.

    `labels` maps states to label sets.  Translates `f` to a Buechi automaton
    and searches the product of lasso positions and automaton states for an
    accepting cycle.
    """
    from . import buchi  # runtime import: buchi builds on this module's AST

    steps = tuple(lasso.prefix) + tuple(lasso.cycle)
    n_prefix = len(lasso.prefix)
    total = len(steps)

    def successors(i):
        nxt = i + 1 if i + 1 < total else n_prefix
        return ((None, nxt),)

    def label_of(i):
        return labels[steps[i][0]]

    aut = buchi.translate(f)
    return buchi.is_empty_product(0, successors, label_of, aut) is not None
