"""Truncated multivariate formal power series over Q.

A series in t_1..t_p is stored as a map from exponent vectors of total
degree <= order to Fraction coefficients.  The truncation bound is by
total degree; arithmetic results carry the minimum of the operand orders,
and each formal partial derivative costs one order of validity.

Equality means agreement of all coefficients up to the common valid
order ("equality modulo truncation").
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping

from .errors import DivisionByNonUnit

ZERO = Fraction(0)
ONE = Fraction(1)


class TruncatedSeries:
    __slots__ = ("p", "order", "terms")

    def __init__(self, p, order, terms=None):
        self.p = p
        self.order = order
        clean = {}
        if terms:
            for e, c in terms.items():
                c = Fraction(c)
                e = tuple(e)
                if len(e) != p:
                    raise ValueError("exponent arity mismatch")
                if c != 0 and sum(e) <= order:
                    clean[e] = c
        self.terms = clean

    # -- constructors ---------------------------------------------------------

    @classmethod
    def const(cls, value, p=1, order=0):
        return cls(p, order, {(0,) * p: Fraction(value)})

    @classmethod
    def gen(cls, i, p, order):
        """The generator t_i (1-based index)."""
        e = tuple(1 if j == i - 1 else 0 for j in range(p))
        return cls(p, order, {e: ONE})

    # -- queries ----------------------------------------------------------------

    def coeff(self, exps):
        return self.terms.get(tuple(exps), ZERO)

    def constant_term(self):
        return self.terms.get((0,) * self.p, ZERO)

    def is_unit(self):
        return self.constant_term() != 0

    def is_zero(self):
        return not self.terms

    def truncate(self, order):
        if order >= self.order:
            return TruncatedSeries(self.p, order if order < self.order else self.order, self.terms)
        return TruncatedSeries(self.p, order, {e: c for e, c in self.terms.items() if sum(e) <= order})

    # -- arithmetic ---------------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, TruncatedSeries):
            if other.p != self.p:
                raise ValueError("series arity mismatch")
            return other
        if isinstance(other, (int, Fraction)):
            return TruncatedSeries.const(other, self.p, self.order)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        order = min(self.order, o.order)
        out = dict(self.terms)
        for e, c in o.terms.items():
            s = out.get(e, ZERO) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return TruncatedSeries(self.p, order, out)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(self.p, self.order, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        order = min(self.order, o.order)
        out = {}
        for e1, c1 in self.terms.items():
            d1 = sum(e1)
            if d1 > order:
                continue
            for e2, c2 in o.terms.items():
                if d1 + sum(e2) > order:
                    continue
                e = tuple(x + y for x, y in zip(e1, e2))
                s = out.get(e, ZERO) + c1 * c2
                if s:
                    out[e] = s
                else:
                    del out[e]
        return TruncatedSeries(self.p, order, out)

    __rmul__ = __mul__

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ValueError("series powers must be non-negative integers")
        result = TruncatedSeries.const(1, self.p, self.order)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def inverse(self):
        """Multiplicative inverse; requires a nonzero constant term."""
        c0 = self.constant_term()
        if c0 == 0:
            raise DivisionByNonUnit("series has zero constant term")
        # 1/b = (1/c0) * sum_k (1 - b/c0)^k ; the base has positive valuation
        rest = -(self * (1 / c0) - 1)
        acc = TruncatedSeries.const(1, self.p, self.order)
        power = TruncatedSeries.const(1, self.p, self.order)
        for _ in range(self.order):
            power = power * rest
            if power.is_zero():
                break
            acc = acc + power
        return acc * (1 / c0)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    # -- calculus -------------------------------------------------------------------

    def partial(self, i):
        """Formal d/dt_i (1-based); the result is valid one order lower."""
        out = {}
        for e, c in self.terms.items():
            k = e[i - 1]
            if k == 0:
                continue
            ne = e[:i - 1] + (k - 1,) + e[i:]
            out[ne] = c * k
        return TruncatedSeries(self.p, self.order - 1, out)

    def theta_partial(self, exps):
        s = self
        for i, k in enumerate(exps):
            for _ in range(k):
                s = s.partial(i + 1)
        return s

    # -- comparison --------------------------------------------------------------------

    def agrees(self, other, order=None):
        """Coefficientwise equality up to the common valid order."""
        o = self._coerce(other)
        if o is None:
            raise TypeError("cannot compare")
        bound = min(self.order, o.order)
        if order is not None:
            bound = min(bound, order)
        for e in set(self.terms) | set(o.terms):
            if sum(e) <= bound and self.terms.get(e, ZERO) != o.terms.get(e, ZERO):
                return False
        return True

    def __eq__(self, other):
        if isinstance(other, (TruncatedSeries, int, Fraction)):
            return self.agrees(other)
        return NotImplemented

    def __hash__(self):
        raise TypeError("truncated series compare modulo truncation; not hashable")

    def __repr__(self):
        return f"TruncatedSeries({render_series(self)})"


def series_arith(a: TruncatedSeries, b: TruncatedSeries, op: str) -> TruncatedSeries:
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return a / b
    raise ValueError(f"unknown series operation {op!r}")


def from_coeff_list(coeffs, order=None):
    """Univariate series from the list of coefficients of t^0, t^1, ..."""
    order = len(coeffs) - 1 if order is None else order
    return TruncatedSeries(1, order, {(k,): Fraction(c) for k, c in enumerate(coeffs)})


def render_series(s: TruncatedSeries):
    tail = f" + O(^{s.order + 1})"
    if not s.terms:
        return "0" + tail
    if s.p == 1:
        parts = []
        for (k,), c in sorted(s.terms.items()):
            if k == 0:
                body = _c(abs(c))
            else:
                t = "t" if k == 1 else f"t^{k}"
                body = t if abs(c) == 1 else f"{_c(abs(c))}*{t}"
            if not parts:
                parts.append(body if c > 0 else "-" + body)
            else:
                parts.append((" + " if c > 0 else " - ") + body)
        return "".join(parts) + f" + O(t^{s.order + 1})"
    items = sorted(s.terms.items(), key=lambda kv: (sum(kv[0]), kv[0]))
    body = ", ".join(f"[{','.join(map(str, e))}]={_c(c)}" for e, c in items)
    return body + f" (order {s.order})"


def _c(c: Fraction):
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
