"""Differential terms and quantifier-free formulas: AST, parser, renderer.

Term grammar (bit-exact, also used by the CLI):

    term   := sum
    sum    := prod (('+'|'-') prod)*
    prod   := unary (('*'|'/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' nat)?
    atom   := rational | ident | "d" [nat] "(" term ")" | "(" term ")"
    rational := int ('/' posint)?
    ident  := letter (letter|digit)*

``d(t)`` applies the first derivation, ``d2(t)`` the second, and so on.
Condition files additionally use indexed identifiers ``z[e1,...,ep]``,
enabled by a parser flag.  Formulas combine comparisons ``t <cmp> t`` with
``&``, ``|`` and ``!``.

The renderer emits minimal parentheses and round-trips through the
parser: parse(render(parse(s))) == parse(s) and the rendered string is a
fixed point.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import ParseError, QuantifierUnsupported


# -- AST ----------------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: Fraction


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class IndexedVar:
    name: str
    theta: tuple


@dataclass(frozen=True)
class Add:
    left: object
    right: object


@dataclass(frozen=True)
class Sub:
    left: object
    right: object


@dataclass(frozen=True)
class Mul:
    left: object
    right: object


@dataclass(frozen=True)
class Div:
    left: object
    right: object


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class Pow:
    base: object
    exp: int


@dataclass(frozen=True)
class Apply:
    index: int
    arg: object


@dataclass(frozen=True)
class Atom:
    left: object
    op: str  # =, !=, <, <=, >, >=
    right: object


@dataclass(frozen=True)
class And:
    left: object
    right: object


@dataclass(frozen=True)
class Or:
    left: object
    right: object


@dataclass(frozen=True)
class Not:
    arg: object


TERM_NODES = (Const, Var, IndexedVar, Add, Sub, Mul, Div, Neg, Pow, Apply)


def term_depth(t) -> int:
    if isinstance(t, (Const, Var, IndexedVar)):
        return 0
    if isinstance(t, (Neg, Apply)):
        return 1 + term_depth(t.arg)
    if isinstance(t, Pow):
        return 1 + term_depth(t.base)
    return 1 + max(term_depth(t.left), term_depth(t.right))


def term_vars(t) -> set:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, IndexedVar):
        return {t.name}
    if isinstance(t, Const):
        return set()
    if isinstance(t, (Neg, Apply)):
        return term_vars(t.arg)
    if isinstance(t, Pow):
        return term_vars(t.base)
    return term_vars(t.left) | term_vars(t.right)


def max_applied_index(t) -> int:
    """Highest derivation index applied anywhere in the term."""
    if isinstance(t, Apply):
        return max(t.index, max_applied_index(t.arg))
    if isinstance(t, (Const, Var, IndexedVar)):
        return 0
    if isinstance(t, Neg):
        return max_applied_index(t.arg)
    if isinstance(t, Pow):
        return max_applied_index(t.base)
    return max(max_applied_index(t.left), max_applied_index(t.right))


def formula_atoms(phi):
    if isinstance(phi, Atom):
        yield phi
    elif isinstance(phi, Not):
        yield from formula_atoms(phi.arg)
    elif isinstance(phi, (And, Or)):
        yield from formula_atoms(phi.left)
        yield from formula_atoms(phi.right)
    else:
        raise TypeError(f"not a formula node: {phi!r}")


def map_formula_atoms(phi, fn):
    if isinstance(phi, Atom):
        return fn(phi)
    if isinstance(phi, Not):
        return Not(map_formula_atoms(phi.arg, fn))
    if isinstance(phi, And):
        return And(map_formula_atoms(phi.left, fn), map_formula_atoms(phi.right, fn))
    if isinstance(phi, Or):
        return Or(map_formula_atoms(phi.left, fn), map_formula_atoms(phi.right, fn))
    raise TypeError(f"not a formula node: {phi!r}")


# -- tokenizer ------------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<INT>\d+)
  | (?P<IDENT>[A-Za-z][A-Za-z0-9]*)
  | (?P<OP><=|>=|!=|[-+*/^()\[\],=<>&|!])
  | (?P<WS>\s+)
""", re.VERBOSE)

_QUANTIFIER_WORDS = {"exists", "forall", "all", "some"}


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(src: str):
    toks = []
    line, col = 1, 1
    i = 0
    while i < len(src):
        m = _TOKEN_RE.match(src, i)
        if m is None:
            raise ParseError(f"unexpected character {src[i]!r}", line, col)
        kind = m.lastgroup
        text = m.group()
        if kind != "WS":
            toks.append(_Tok(kind, text, line, col))
        for ch in text:
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1
        i = m.end()
    toks.append(_Tok("EOF", "", line, col))
    return toks


_DERIV_RE = re.compile(r"^d(\d*)$")


class Parser:
    def __init__(self, src: str, allow_indexed=False):
        self.toks = _tokenize(src)
        self.i = 0
        self.allow_indexed = allow_indexed

    # -- plumbing -------------------------------------------------------------

    def peek(self, ahead=0):
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def next(self):
        t = self.toks[self.i]
        if t.kind != "EOF":
            self.i += 1
        return t

    def expect(self, text):
        t = self.peek()
        if t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text or 'end of input'!r}", t.line, t.col)
        return self.next()

    def error(self, msg):
        t = self.peek()
        raise ParseError(msg, t.line, t.col)

    # -- terms ------------------------------------------------------------------

    def parse_term(self):
        t = self._sum()
        tok = self.peek()
        if tok.kind != "EOF":
            raise ParseError(f"trailing input {tok.text!r}", tok.line, tok.col)
        return t

    def _sum(self):
        left = self._prod()
        while self.peek().text in ("+", "-"):
            op = self.next().text
            right = self._prod()
            left = Add(left, right) if op == "+" else Sub(left, right)
        return left

    def _prod(self):
        left = self._unary()
        while self.peek().text in ("*", "/"):
            op = self.next().text
            right = self._unary()
            left = Mul(left, right) if op == "*" else Div(left, right)
        return left

    def _unary(self):
        if self.peek().text == "-":
            self.next()
            return Neg(self._unary())
        return self._power()

    def _power(self):
        base = self._atom()
        if self.peek().text == "^":
            self.next()
            t = self.peek()
            if t.kind != "INT":
                self.error("exponent must be a natural number")
            self.next()
            return Pow(base, int(t.text))
        return base

    def _atom(self):
        t = self.peek()
        if t.kind == "INT":
            self.next()
            # rational := int ('/' posint)?
            if self.peek().text == "/" and self.peek(1).kind == "INT":
                self.next()
                den_tok = self.next()
                den = int(den_tok.text)
                if den == 0:
                    raise ParseError("zero denominator in rational literal", den_tok.line, den_tok.col)
                return Const(Fraction(int(t.text), den))
            return Const(Fraction(int(t.text)))
        if t.kind == "IDENT":
            if t.text.lower() in _QUANTIFIER_WORDS:
                raise QuantifierUnsupported(f"quantifier {t.text!r} is not supported")
            m = _DERIV_RE.match(t.text)
            if m and self.peek(1).text == "(":
                self.next()
                self.expect("(")
                arg = self._sum()
                self.expect(")")
                return Apply(int(m.group(1) or "1"), arg)
            self.next()
            if self.allow_indexed and self.peek().text == "[":
                self.next()
                exps = [self._nat()]
                while self.peek().text == ",":
                    self.next()
                    exps.append(self._nat())
                self.expect("]")
                return IndexedVar(t.text, tuple(exps))
            return Var(t.text)
        if t.text == "(":
            self.next()
            inner = self._sum()
            self.expect(")")
            return inner
        self.error(f"expected a term, found {t.text or 'end of input'!r}")

    def _nat(self):
        t = self.peek()
        if t.kind != "INT":
            self.error("expected a natural number")
        self.next()
        return int(t.text)

    # -- formulas ----------------------------------------------------------------

    def parse_formula(self):
        phi = self._disj()
        tok = self.peek()
        if tok.kind != "EOF":
            raise ParseError(f"trailing input {tok.text!r}", tok.line, tok.col)
        return phi

    def _disj(self):
        left = self._conj()
        while self.peek().text == "|":
            self.next()
            left = Or(left, self._conj())
        return left

    def _conj(self):
        left = self._literal()
        while self.peek().text == "&":
            self.next()
            left = And(left, self._literal())
        return left

    def _literal(self):
        if self.peek().text == "!":
            self.next()
            return Not(self._literal())
        if self.peek().text == "(":
            # try a parenthesized formula, fall back to a term atom
            mark = self.i
            try:
                self.next()
                inner = self._disj()
                self.expect(")")
                return inner
            except ParseError:
                self.i = mark
        return self._cmp_atom()

    def _cmp_atom(self):
        left = self._sum()
        t = self.peek()
        if t.text not in ("=", "!=", "<", "<=", ">", ">="):
            self.error("expected a comparison operator")
        self.next()
        right = self._sum()
        return Atom(left, t.text, right)


def parse_term(src: str, allow_indexed=False):
    return Parser(src, allow_indexed=allow_indexed).parse_term()


def parse_formula(src: str, allow_indexed=False):
    return Parser(src, allow_indexed=allow_indexed).parse_formula()


# -- rendering --------------------------------------------------------------------

_SUM, _PROD, _UNARY, _POWER, _ATOM = 1, 2, 3, 4, 5


def render_term(t) -> str:
    return _render(t, _SUM)


def _render(t, level):
    if isinstance(t, Const):
        v = t.value
        s = str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
        return s
    if isinstance(t, Var):
        return t.name
    if isinstance(t, IndexedVar):
        return f"{t.name}[{','.join(str(e) for e in t.theta)}]"
    if isinstance(t, Apply):
        name = "d" if t.index == 1 else f"d{t.index}"
        return f"{name}({_render(t.arg, _SUM)})"
    if isinstance(t, Add):
        s = f"{_render(t.left, _SUM)} + {_render(t.right, _PROD)}"
        return f"({s})" if level > _SUM else s
    if isinstance(t, Sub):
        s = f"{_render(t.left, _SUM)} - {_render(t.right, _PROD)}"
        return f"({s})" if level > _SUM else s
    if isinstance(t, Mul):
        s = f"{_render(t.left, _PROD)}*{_render(t.right, _UNARY)}"
        return f"({s})" if level > _PROD else s
    if isinstance(t, Div):
        s = f"{_render(t.left, _PROD)}/{_render(t.right, _UNARY)}"
        return f"({s})" if level > _PROD else s
    if isinstance(t, Neg):
        s = f"-{_render(t.arg, _UNARY)}"
        return f"({s})" if level > _UNARY else s
    if isinstance(t, Pow):
        if isinstance(t.base, (Const, Var, IndexedVar, Apply)):
            base = _render(t.base, _ATOM)
        else:
            base = f"({_render(t.base, _SUM)})"
        return f"{base}^{t.exp}"
    raise TypeError(f"not a term node: {t!r}")


def render_formula(phi) -> str:
    return _render_f(phi, 1)


def _render_f(phi, level):
    if isinstance(phi, Atom):
        return f"{render_term(phi.left)} {phi.op} {render_term(phi.right)}"
    if isinstance(phi, Or):
        s = f"{_render_f(phi.left, 1)} | {_render_f(phi.right, 2)}"
        return f"({s})" if level > 1 else s
    if isinstance(phi, And):
        s = f"{_render_f(phi.left, 2)} & {_render_f(phi.right, 3)}"
        return f"({s})" if level > 2 else s
    if isinstance(phi, Not):
        return f"!({_render_f(phi.arg, 1)})"
    raise TypeError(f"not a formula node: {phi!r}")
