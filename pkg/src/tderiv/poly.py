"""Sparse multivariate polynomials and canonical rational functions over Q.

Coefficients are ``fractions.Fraction``; exponent vectors are tuples keyed
by a canonically sorted variable universe.  A single graded-lexicographic
monomial order is fixed globally so leading terms (and hence canonical
forms) are deterministic.

Variables may be plain strings or any hashable object exposing a
``sort_key()`` method (differential variables do).  Mixed universes are
aligned automatically by the arithmetic operators.

``RationalFunction`` values are kept fully canonical on construction:
the polynomial gcd and the shared numeric content of numerator and
denominator are removed and the denominator's leading coefficient is
positive.  Equality is therefore structural, which the coherence checker
relies on.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import DenominatorVanishes, ZeroDenominator

ZERO = Fraction(0)
ONE = Fraction(1)


def var_sort_key(v):
    """Total order on variable identifiers across kinds."""
    sk = getattr(v, "sort_key", None)
    if sk is not None:
        return ("d",) + tuple(sk())
    if isinstance(v, str):
        return ("s", v)
    return ("x", repr(v))


def grlex_key(exps):
    return (sum(exps), exps)


class MultiPoly:
    """Immutable sparse polynomial: map exponent-vector -> nonzero Fraction."""

    __slots__ = ("vars", "terms", "_hash")

    def __init__(self, variables, terms, _normalized=False):
        if _normalized:
            self.vars = variables
            self.terms = terms
        else:
            self.vars, self.terms = _normalize(variables, terms)
        self._hash = None

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls):
        return cls((), {}, _normalized=True)

    @classmethod
    def const(cls, value):
        c = Fraction(value)
        if c == 0:
            return cls.zero()
        return cls((), {(): c}, _normalized=True)

    @classmethod
    def var(cls, v, exp=1):
        if exp == 0:
            return cls.const(1)
        return cls((v,), {(exp,): ONE}, _normalized=True)

    @classmethod
    def from_terms(cls, variables, terms):
        return cls(tuple(variables), dict(terms))

    # -- basic queries -------------------------------------------------------

    def is_zero(self):
        return not self.terms

    def is_const(self):
        return not self.terms or (len(self.terms) == 1 and () in self.terms) or not self.vars

    def const_value(self):
        if not self.terms:
            return ZERO
        if self.is_const():
            return next(iter(self.terms.values()))
        raise ValueError("not a constant polynomial")

    def total_degree(self):
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def degree_in(self, v):
        if v not in self.vars:
            return 0
        i = self.vars.index(v)
        return max((e[i] for e in self.terms), default=0)

    def used_vars(self):
        return set(self.vars)

    def leading(self):
        """Leading (exponents, coefficient) under graded lex."""
        if not self.terms:
            return None
        e = max(self.terms, key=grlex_key)
        return e, self.terms[e]

    def leading_coeff(self):
        led = self.leading()
        return ZERO if led is None else led[1]

    def coeff(self, exps):
        return self.terms.get(tuple(exps), ZERO)

    def monomials(self):
        """Terms in descending graded-lex order."""
        for e in sorted(self.terms, key=grlex_key, reverse=True):
            yield e, self.terms[e]

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b, vs = _align(self, other)
        out = dict(a)
        for e, c in b.items():
            s = out.get(e, ZERO) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return MultiPoly(vs, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.vars, {e: -c for e, c in self.terms.items()}, _normalized=True)

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return _coerce(other) + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return MultiPoly.zero()
        a, b, vs = _align(self, other)
        out = {}
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                s = out.get(e, ZERO) + c1 * c2
                if s:
                    out[e] = s
                else:
                    del out[e]
        return MultiPoly(vs, out)

    __rmul__ = __mul__

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ValueError("polynomial powers must be non-negative integers")
        result = MultiPoly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base_needed = n >> 1
            if base_needed:
                base = base * base
            n = base_needed
        return result

    def scale(self, c):
        c = Fraction(c)
        if c == 0:
            return MultiPoly.zero()
        return MultiPoly(self.vars, {e: c * v for e, v in self.terms.items()}, _normalized=True)

    # -- calculus ------------------------------------------------------------

    def partial(self, v):
        """Formal partial derivative with respect to variable v."""
        if v not in self.vars:
            return MultiPoly.zero()
        i = self.vars.index(v)
        out = {}
        for e, c in self.terms.items():
            if e[i] == 0:
                continue
            ne = e[:i] + (e[i] - 1,) + e[i + 1:]
            out[ne] = out.get(ne, ZERO) + c * e[i]
        return MultiPoly(self.vars, out)

    def map_vars(self, fn):
        """Rename variables through fn (must stay injective on used vars)."""
        return MultiPoly(tuple(fn(v) for v in self.vars), dict(self.terms))

    def eval(self, values: Mapping):
        """Evaluate with values from any commutative ring containing Q.

        Every variable of the polynomial must be assigned.  Values must
        support +, * and integer powers with Fraction scalars.
        """
        if not self.terms:
            return ZERO
        powers = []
        for i, v in enumerate(self.vars):
            val = values[v]
            maxe = max(e[i] for e in self.terms)
            row = [ONE, val]
            for _ in range(2, maxe + 1):
                row.append(row[-1] * val)
            powers.append(row)
        total = None
        for e, c in self.terms.items():
            term = c
            for i, exp in enumerate(e):
                if exp:
                    term = term * powers[i][exp]
            total = term if total is None else total + term
        return total

    def subs(self, values: Mapping):
        """Partial substitution; unassigned variables stay symbolic."""
        full = {v: values.get(v, MultiPoly.var(v)) for v in self.vars}
        if not self.terms:
            return MultiPoly.zero()
        out = self.eval({v: (MultiPoly.const(x) if isinstance(x, (int, Fraction)) else x)
                         for v, x in full.items()})
        return _coerce(out)

    # -- comparisons / hashing ------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = MultiPoly.const(other)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.vars == other.vars and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.vars, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        return f"MultiPoly({render_poly(self)})"


def _normalize(variables, terms):
    variables = tuple(variables)
    clean = {tuple(e): Fraction(c) for e, c in terms.items() if c != 0}
    if not clean:
        return (), {}
    used = [i for i in range(len(variables)) if any(e[i] for e in clean)]
    kept = [variables[i] for i in used]
    order = sorted(range(len(kept)), key=lambda j: var_sort_key(kept[j]))
    new_vars = tuple(kept[j] for j in order)
    remap = [used[j] for j in order]
    out = {}
    for e, c in clean.items():
        out[tuple(e[i] for i in remap)] = c
    return new_vars, out


def _coerce(x):
    if isinstance(x, MultiPoly):
        return x
    if isinstance(x, (int, Fraction)):
        return MultiPoly.const(x)
    return NotImplemented


def _align(a: MultiPoly, b: MultiPoly):
    """Common variable universe; returns (terms_a, terms_b, vars)."""
    if a.vars == b.vars:
        return a.terms, b.terms, a.vars
    vs = tuple(sorted(set(a.vars) | set(b.vars), key=var_sort_key))
    return _embed(a, vs), _embed(b, vs), vs


def _embed(p: MultiPoly, vs):
    if p.vars == vs:
        return p.terms
    pos = {v: i for i, v in enumerate(vs)}
    idx = [pos[v] for v in p.vars]
    out = {}
    for e, c in p.terms.items():
        ne = [0] * len(vs)
        for i, exp in zip(idx, e):
            ne[i] = exp
        out[tuple(ne)] = c
    return out


def align_variables(a: MultiPoly, b: MultiPoly):
    """Rebuild both polynomials over the union of their variable lists."""
    ta, tb, vs = _align(a, b)
    return (MultiPoly(vs, ta, _normalized=True) if ta is not a.terms else a,
            MultiPoly(vs, tb, _normalized=True) if tb is not b.terms else b)


# --------------------------------------------------------------------------
# content, exact division and gcd
# --------------------------------------------------------------------------

def numeric_content(p: MultiPoly) -> Fraction:
    """Signed rational c with p/c integer, coprime, positive leading coeff."""
    if p.is_zero():
        return ZERO
    num_gcd = 0
    den_lcm = 1
    for c in p.terms.values():
        num_gcd = math.gcd(num_gcd, abs(c.numerator))
        den_lcm = den_lcm * c.denominator // math.gcd(den_lcm, c.denominator)
    content = Fraction(num_gcd, den_lcm)
    if p.leading_coeff() < 0:
        content = -content
    return content


def primitive(p: MultiPoly) -> MultiPoly:
    if p.is_zero():
        return p
    return p.scale(1 / numeric_content(p))


def divexact(a: MultiPoly, b: MultiPoly) -> MultiPoly:
    """Exact polynomial division; raises if b does not divide a."""
    if b.is_zero():
        raise ZeroDivisionError("polynomial division by zero")
    if a.is_zero():
        return MultiPoly.zero()
    if b.is_const():
        return a.scale(1 / b.const_value())
    ta, tb, vs = _align(a, b)
    rem = dict(ta)
    eb, cb = max(tb, key=grlex_key), None
    cb = tb[eb]
    quot = {}
    while rem:
        ea = max(rem, key=grlex_key)
        diff = tuple(x - y for x, y in zip(ea, eb))
        if any(d < 0 for d in diff):
            raise ValueError("inexact polynomial division")
        cq = rem[ea] / cb
        quot[diff] = cq
        for e2, c2 in tb.items():
            e = tuple(x + y for x, y in zip(diff, e2))
            s = rem.get(e, ZERO) - cq * c2
            if s:
                rem[e] = s
            else:
                rem.pop(e, None)
    return MultiPoly(vs, quot)


def _to_univariate(p: MultiPoly, v):
    """View p as a polynomial in v with MultiPoly coefficients."""
    i = p.vars.index(v)
    rest = p.vars[:i] + p.vars[i + 1:]
    coeffs = {}
    for e, c in p.terms.items():
        d = e[i]
        re = e[:i] + e[i + 1:]
        coeffs.setdefault(d, {})[re] = c
    return {d: MultiPoly(rest, t) for d, t in coeffs.items()}


def _from_univariate(coeffs, v):
    acc = MultiPoly.zero()
    xv = MultiPoly.var(v)
    for d, c in coeffs.items():
        acc = acc + c * xv ** d
    return acc


def _uni_pseudo_rem(A, B, v):
    """Pseudo-remainder of A by B, both dicts degree -> MultiPoly coeff."""
    da = max(A)
    db = max(B)
    lb = B[db]
    R = dict(A)
    while R and max(R) >= db:
        dr = max(R)
        lr = R[dr]
        shift = dr - db
        newR = {}
        for d, c in R.items():
            newR[d] = c * lb
        for d, c in B.items():
            dd = d + shift
            s = newR.get(dd, MultiPoly.zero()) - c * lr
            if s.is_zero():
                newR.pop(dd, None)
            else:
                newR[dd] = s
        R = {d: c for d, c in newR.items() if not c.is_zero()}
    return R


def _content_of_coeffs(coeffs):
    g = MultiPoly.zero()
    for c in coeffs:
        g = poly_gcd(g, c)
        if g.is_const() and not g.is_zero():
            return MultiPoly.const(1)
    return g


def poly_gcd(a: MultiPoly, b: MultiPoly) -> MultiPoly:
    """Gcd over Q, normalized primitive with positive leading coefficient."""
    if a.is_zero():
        return primitive(b)
    if b.is_zero():
        return primitive(a)
    if a.is_const() or b.is_const():
        return MultiPoly.const(1)

    shared = set(a.vars) & set(b.vars)
    # common divisors only involve shared variables
    a = _content_wrt(a, shared)
    b = _content_wrt(b, shared)
    if a.is_const() or b.is_const():
        return MultiPoly.const(1)

    # univariate-style primitive remainder sequence in a chosen main variable
    v = min(set(a.vars) & set(b.vars), key=lambda u: max(a.degree_in(u), b.degree_in(u)))
    ua, ub = _to_univariate(a, v), _to_univariate(b, v)
    ca, cb = _content_of_coeffs(ua.values()), _content_of_coeffs(ub.values())
    cont = poly_gcd(ca, cb)
    A = {d: divexact(c, ca) for d, c in ua.items()}
    B = {d: divexact(c, cb) for d, c in ub.items()}
    if max(A) < max(B):
        A, B = B, A
    while B:
        R = _uni_pseudo_rem(A, B, v)
        if R:
            cR = _content_of_coeffs(R.values())
            R = {d: divexact(c, cR) for d, c in R.items()}
        A, B = B, R
    g = _from_univariate(A, v)
    if not cont.is_const():
        g = g * cont
    return primitive(g)


def _content_wrt(p: MultiPoly, keep):
    """Content of p viewed over Q[keep]: gcd of coefficients of the
    monomials in the remaining variables."""
    outside = [v for v in p.vars if v not in keep]
    if not outside:
        return p
    idx = [p.vars.index(v) for v in outside]
    kept_idx = [i for i in range(len(p.vars)) if p.vars[i] not in outside]
    kept_vars = tuple(p.vars[i] for i in kept_idx)
    groups = {}
    for e, c in p.terms.items():
        key = tuple(e[i] for i in idx)
        ke = tuple(e[i] for i in kept_idx)
        groups.setdefault(key, {})[ke] = c
    g = MultiPoly.zero()
    for t in groups.values():
        g = poly_gcd(g, MultiPoly(kept_vars, t))
        if g.is_const() and not g.is_zero():
            return MultiPoly.const(1)
    return g


# --------------------------------------------------------------------------
# rational functions
# --------------------------------------------------------------------------

class RationalFunction:
    """Canonical quotient of two MultiPoly values.

    Invariants: den != 0, gcd(num, den) = 1, no shared numeric content,
    den primitive with positive graded-lex leading coefficient.
    """

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num, den=None, _canonical=False):
        num = _coerce(num)
        den = MultiPoly.const(1) if den is None else _coerce(den)
        if _canonical:
            self.num, self.den = num, den
        else:
            self.num, self.den = _reduce(num, den)
        self._hash = None

    @classmethod
    def const(cls, value):
        return cls(MultiPoly.const(value), MultiPoly.const(1), _canonical=True)

    @classmethod
    def var(cls, v):
        return cls(MultiPoly.var(v), MultiPoly.const(1), _canonical=True)

    def is_zero(self):
        return self.num.is_zero()

    def is_const(self):
        return self.num.is_const() and self.den.is_const()

    def const_value(self):
        return self.num.const_value() / self.den.const_value()

    def is_poly(self):
        return self.den.is_const()

    def used_vars(self):
        return self.num.used_vars() | self.den.used_vars()

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        other = _coerce_rf(other)
        if other is NotImplemented:
            return NotImplemented
        if self.den == other.den:
            return RationalFunction(self.num + other.num, self.den)
        g = poly_gcd(self.den, other.den)
        if g.is_const():
            return RationalFunction(self.num * other.den + other.num * self.den,
                                    self.den * other.den)
        db = divexact(other.den, g)
        da = divexact(self.den, g)
        return RationalFunction(self.num * db + other.num * da, self.den * db)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den, _canonical=True)

    def __sub__(self, other):
        other = _coerce_rf(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return _coerce_rf(other) + (-self)

    def __mul__(self, other):
        other = _coerce_rf(other)
        if other is NotImplemented:
            return NotImplemented
        # cross-cancel before multiplying to keep intermediates small
        g1 = poly_gcd(self.num, other.den)
        g2 = poly_gcd(other.num, self.den)
        n1 = self.num if g1.is_const() else divexact(self.num, g1)
        d2 = other.den if g1.is_const() else divexact(other.den, g1)
        n2 = other.num if g2.is_const() else divexact(other.num, g2)
        d1 = self.den if g2.is_const() else divexact(self.den, g2)
        return RationalFunction(n1 * n2, d1 * d2)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce_rf(other)
        if other is NotImplemented:
            return NotImplemented
        if other.num.is_zero():
            raise ZeroDenominator("division by the zero function")
        return self * RationalFunction(other.den, other.num)

    def __rtruediv__(self, other):
        return _coerce_rf(other) / self

    def __pow__(self, n):
        if n < 0:
            if self.num.is_zero():
                raise ZeroDenominator("negative power of the zero function")
            return RationalFunction(self.den, self.num) ** (-n)
        return RationalFunction(self.num ** n, self.den ** n)

    # -- calculus ------------------------------------------------------------

    def partial(self, v):
        """Formal partial derivative (quotient rule, canonicalized)."""
        dn = self.num.partial(v)
        dd = self.den.partial(v)
        if dd.is_zero():
            return RationalFunction(dn, self.den)
        return RationalFunction(dn * self.den - self.num * dd, self.den * self.den)

    def map_vars(self, fn):
        return RationalFunction(self.num.map_vars(fn), self.den.map_vars(fn))

    def eval(self, values: Mapping):
        """Evaluate at a point; raises DenominatorVanishes when undefined.

        Values may be Fractions, series, or rational functions; a series
        denominator with zero constant term counts as vanishing.
        """
        den_val = self.den.eval(values)
        if _vanishes(den_val):
            raise DenominatorVanishes("denominator vanishes at the evaluation point")
        num_val = self.num.eval(values)
        return _ring_div(num_val, den_val)

    def subs(self, values: Mapping):
        """Symbolic substitution var -> RationalFunction/MultiPoly/Fraction."""
        full = {}
        for v in self.used_vars():
            x = values.get(v, None)
            if x is None:
                full[v] = RationalFunction.var(v)
            elif isinstance(x, (int, Fraction)):
                full[v] = RationalFunction.const(x)
            elif isinstance(x, MultiPoly):
                full[v] = RationalFunction(x)
            else:
                full[v] = x
        den_val = self.den.eval(full) if not self.den.is_const() \
            else RationalFunction.const(self.den.const_value())
        den_val = _coerce_rf(den_val)
        if den_val.is_zero():
            raise DenominatorVanishes("denominator vanishes under substitution")
        num_val = _coerce_rf(self.num.eval(full))
        return num_val / den_val

    # -- comparisons -----------------------------------------------------------

    def __eq__(self, other):
        other = _coerce_rf(other)
        if other is NotImplemented:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def __bool__(self):
        return not self.num.is_zero()

    def __repr__(self):
        return f"RationalFunction({render_rational(self)})"


def _coerce_rf(x):
    if isinstance(x, RationalFunction):
        return x
    if isinstance(x, MultiPoly):
        return RationalFunction(x, MultiPoly.const(1), _canonical=True)
    if isinstance(x, (int, Fraction)):
        return RationalFunction.const(x)
    return NotImplemented


def _reduce(num: MultiPoly, den: MultiPoly):
    if den.is_zero():
        raise ZeroDenominator("zero denominator")
    if num.is_zero():
        return MultiPoly.zero(), MultiPoly.const(1)
    if den.is_const():
        return num.scale(1 / den.const_value()), MultiPoly.const(1)
    g = poly_gcd(num, den)
    if not g.is_const():
        num = divexact(num, g)
        den = divexact(den, g)
    if den.is_const():
        return num.scale(1 / den.const_value()), MultiPoly.const(1)
    c = numeric_content(den)
    return num.scale(1 / c), den.scale(1 / c)


def _vanishes(x):
    if isinstance(x, Fraction):
        return x == 0
    if isinstance(x, MultiPoly):
        return x.is_zero()
    if isinstance(x, RationalFunction):
        return x.is_zero()
    # truncated series: a non-unit cannot be inverted
    unit = getattr(x, "is_unit", None)
    if unit is not None:
        return not x.is_unit()
    return not x


def _ring_div(a, b):
    if isinstance(b, Fraction):
        if isinstance(a, Fraction):
            return a / b
        return a * (1 / b)
    return a / b


# --------------------------------------------------------------------------
# rendering
# --------------------------------------------------------------------------

def default_var_str(v):
    return v if isinstance(v, str) else str(v)


def render_poly(p: MultiPoly, var_str=default_var_str):
    if p.is_zero():
        return "0"
    parts = []
    for e, c in p.monomials():
        factors = []
        for v, exp in zip(p.vars, e):
            if exp == 0:
                continue
            name = var_str(v)
            factors.append(name if exp == 1 else f"{name}^{exp}")
        if not factors:
            body = _frac_str(abs(c))
        elif abs(c) == 1:
            body = "*".join(factors)
        else:
            body = "*".join([_frac_str(abs(c))] + factors)
        if not parts:
            parts.append(body if c > 0 else "-" + body)
        else:
            parts.append((" + " if c > 0 else " - ") + body)
    return "".join(parts)


def render_rational(f: RationalFunction, var_str=default_var_str):
    num = render_poly(f.num, var_str)
    if f.den.is_const() and f.den.const_value() == 1:
        return num
    den = render_poly(f.den, var_str)
    if len(f.num.terms) > 1:
        num = f"({num})"
    if len(f.den.terms) > 1:
        den = f"({den})"
    return f"{num}/{den}"


def _frac_str(c: Fraction):
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


# spec-level convenience wrappers -------------------------------------------

def poly_arith(a: MultiPoly, b: MultiPoly, op: str) -> MultiPoly:
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    raise ValueError(f"unknown polynomial operation {op!r}")


def partial_derivative(f: RationalFunction, v) -> RationalFunction:
    return f.partial(v)


def eval_rational(f: RationalFunction, point: Mapping):
    return f.eval(point)
