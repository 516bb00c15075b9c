"""Exact univariate real-root machinery and sign-system decision.

Polynomials are dense Fraction coefficient lists internally; the public
entry points accept univariate MultiPoly values.  Root counting uses
Sturm chains on the squarefree part; satisfiability of a conjunction of
sign constraints is decided by isolating the roots of every polynomial
involved and sampling rational points of the common refinement.  All
arithmetic is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ZeroPolynomialWithStrictSign
from .poly import MultiPoly

Coeffs = list  # dense: c[k] is the coefficient of x^k


def to_coeffs(p: MultiPoly) -> Coeffs:
    if p.is_zero():
        return []
    if len(p.vars) > 1:
        raise ValueError("univariate polynomial expected")
    if not p.vars:
        return [p.const_value()]
    out = [Fraction(0)] * (p.total_degree() + 1)
    for (e,), c in p.terms.items():
        out[e] = c
    return out


def _trim(c: Coeffs) -> Coeffs:
    while c and c[-1] == 0:
        c.pop()
    return c


def _as_coeffs(p) -> Coeffs:
    return to_coeffs(p) if isinstance(p, MultiPoly) else _trim([Fraction(x) for x in p])


def degree(c: Coeffs) -> int:
    return len(c) - 1


def evaluate(c: Coeffs, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for coeff in reversed(c):
        acc = acc * x + coeff
    return acc


def derivative(c: Coeffs) -> Coeffs:
    return [k * c[k] for k in range(1, len(c))]


def mul_coeffs(a: Coeffs, b: Coeffs) -> Coeffs:
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim(out)


def _divmod(a: Coeffs, b: Coeffs):
    a = a[:]
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 0)
    while _trim(a) and len(a) >= len(b):
        k = len(a) - len(b)
        coeff = a[-1] / b[-1]
        q[k] = coeff
        for i in range(len(b)):
            a[k + i] -= coeff * b[i]
        a.pop()
    return _trim(q), _trim(a)


def poly_rem(a: Coeffs, b: Coeffs) -> Coeffs:
    return _divmod(a, b)[1]


def gcd_coeffs(a: Coeffs, b: Coeffs) -> Coeffs:
    a, b = _trim(a[:]), _trim(b[:])
    while b:
        a, b = b, poly_rem(a, b)
    if a:
        lead = a[-1]
        a = [x / lead for x in a]
    return a


def squarefree_part(c: Coeffs) -> Coeffs:
    c = _trim(c[:])
    if degree(c) < 1:
        return c
    g = gcd_coeffs(c, derivative(c))
    if degree(g) < 1:
        return c
    return _divmod(c, g)[0]


def sturm_chain(c: Coeffs):
    chain = [squarefree_part(c)]
    d = _trim(derivative(chain[0]))
    if d:
        chain.append(d)
        while True:
            r = poly_rem(chain[-2], chain[-1])
            if not r:
                break
            chain.append([-x for x in r])
    return chain


def _variations(chain, x: Fraction) -> int:
    signs = []
    for c in chain:
        v = evaluate(c, x)
        if v != 0:
            signs.append(1 if v > 0 else -1)
    return sum(1 for s1, s2 in zip(signs, signs[1:]) if s1 != s2)


def cauchy_bound(c: Coeffs) -> Fraction:
    if degree(c) < 1:
        return Fraction(1)
    lead = abs(c[-1])
    return 1 + max(abs(x) for x in c[:-1]) / lead


def count_roots(p, lo: Fraction, hi: Fraction) -> int:
    """Distinct real roots in the half-open interval (lo, hi]."""
    c = _as_coeffs(p)
    if degree(c) < 1:
        return 0
    chain = sturm_chain(c)
    return _variations(chain, lo) - _variations(chain, hi)


def count_real_roots(p) -> int:
    c = _as_coeffs(p)
    if degree(c) < 1:
        return 0
    b = cauchy_bound(c) + 1
    return count_roots(c, -b, b)


@dataclass(frozen=True)
class Root:
    """Either an exact rational root or an open isolating interval
    (lo, hi) with non-root endpoints and exactly one root inside."""

    exact: Fraction = None
    lo: Fraction = None
    hi: Fraction = None

    def sample(self) -> Fraction:
        return self.exact if self.exact is not None else (self.lo + self.hi) / 2

    def bounds(self):
        if self.exact is not None:
            return self.exact, self.exact
        return self.lo, self.hi


@dataclass
class SturmResult:
    count: int
    roots: list


def isolate_roots(p) -> SturmResult:
    """Disjoint isolation of all real roots of the squarefree part."""
    sf = squarefree_part(_as_coeffs(p))
    if degree(sf) < 1:
        return SturmResult(0, [])
    chain = sturm_chain(sf)
    b = cauchy_bound(sf) + 1
    roots = []

    def split(lo, hi):
        n = _variations(chain, lo) - _variations(chain, hi)
        if n == 0:
            return
        if n == 1:
            if evaluate(sf, hi) == 0:
                roots.append(Root(exact=hi))
            else:
                roots.append(Root(lo=lo, hi=hi))
            return
        mid = (lo + hi) / 2
        split(lo, mid)
        split(mid, hi)

    split(-b, b)
    roots.sort(key=lambda r: r.sample())
    return SturmResult(len(roots), roots)


def _shrink(root: Root, chain, sf) -> Root:
    """One bisection step toward the isolated root."""
    if root.exact is not None:
        return root
    mid = (root.lo + root.hi) / 2
    if evaluate(sf, mid) == 0:
        return Root(exact=mid)
    if _variations(chain, root.lo) - _variations(chain, mid) == 1:
        return Root(lo=root.lo, hi=mid)
    return Root(lo=mid, hi=root.hi)


def refine_away(root: Root, sf, chain, avoid: Coeffs) -> Root:
    """Shrink an isolating interval until ``avoid`` has no root inside.

    Requires that the isolated root is not itself a root of ``avoid``;
    the sign of ``avoid`` is then constant on the result.
    """
    if degree(_trim(avoid[:])) < 1:
        return root
    avoid_chain = sturm_chain(avoid)
    while root.exact is None and \
            _variations(avoid_chain, root.lo) - _variations(avoid_chain, root.hi) > 0:
        root = _shrink(root, chain, sf)
    return root


@dataclass
class Decision:
    sat: bool
    witness: Fraction = None   # rational sample satisfying everything
    interval: tuple = None     # isolating interval when pinned to an irrational root

    def __bool__(self):
        return self.sat


_OPS = ("=", ">", "<", "!=")


def _sign_ok(value: Fraction, op: str) -> bool:
    if op == "=":
        return value == 0
    if op == ">":
        return value > 0
    if op == "<":
        return value < 0
    return value != 0


def sturm_decide(constraints) -> Decision:
    """Decide a conjunction of univariate sign constraints exactly.

    ``constraints`` is a sequence of (poly, op) with op among '=', '>',
    '<', '!=', each meaning  poly op 0.  Polynomials are univariate
    MultiPoly values (or coefficient lists) over a common variable.
    Returns a Decision carrying a rational witness; when the witness is
    pinned to an irrational root, also its isolating interval with the
    witness as proof-of-sign sample.
    """
    equations = []
    strict = []
    for poly, op in constraints:
        if op not in _OPS:
            raise ValueError(f"unknown sign {op!r}")
        c = _as_coeffs(poly)
        if degree(c) < 1:
            value = c[0] if c else Fraction(0)
            if not c and op != "=":
                raise ZeroPolynomialWithStrictSign(
                    f"constraint '0 {op} 0' has no polynomial content")
            if not _sign_ok(value, op):
                return Decision(False)
            continue
        if op == "=":
            equations.append(c)
        else:
            strict.append((c, op))

    if equations:
        e = equations[0]
        for other in equations[1:]:
            e = gcd_coeffs(e, other)
            if degree(e) < 1:
                return Decision(False)
        return _decide_on_roots(e, strict)

    if not strict:
        return Decision(True, witness=Fraction(0))
    return _decide_open(strict)


def _decide_on_roots(e: Coeffs, strict) -> Decision:
    sf = squarefree_part(e)
    chain = sturm_chain(sf)
    for root in isolate_roots(sf).roots:
        ok = True
        current = root
        for q, op in strict:
            if current.exact is not None:
                if not _sign_ok(evaluate(q, current.exact), op):
                    ok = False
                    break
                continue
            g = gcd_coeffs(sf, q)
            if degree(g) >= 1 and count_roots(g, current.lo, current.hi) > 0:
                # the isolated root is a common root: q vanishes there
                if not _sign_ok(Fraction(0), op):
                    ok = False
                    break
                continue
            current = refine_away(current, sf, chain, q)
            if not _sign_ok(evaluate(q, current.sample()), op):
                ok = False
                break
        if ok:
            if current.exact is not None:
                return Decision(True, witness=current.exact)
            return Decision(True, witness=current.sample(),
                            interval=(current.lo, current.hi))
    return Decision(False)


def _decide_open(strict) -> Decision:
    """Sample one rational point in every maximal sign-constant region."""
    product = [Fraction(1)]
    bound = Fraction(1)
    for q, _ in strict:
        product = mul_coeffs(product, q)
        bound = max(bound, cauchy_bound(q))
    sf = squarefree_part(product)
    chain = sturm_chain(sf)
    enclosures = isolate_roots(sf).roots
    samples = [-bound - 1, bound + 1]
    for left, right in zip(enclosures, enclosures[1:]):
        l_hi = left.bounds()[1]
        r_lo = right.bounds()[0]
        if l_hi < r_lo:
            samples.append((l_hi + r_lo) / 2)
        elif left.exact is None and right.exact is None:
            # touching non-root endpoints: the touch point itself works
            samples.append(l_hi)
        else:
            # an exact root touches its neighbour's enclosure: open a gap
            lt, rt = left, right
            while lt.bounds()[1] >= rt.bounds()[0]:
                if lt.exact is None:
                    lt = _shrink(lt, chain, sf)
                if rt.exact is None:
                    rt = _shrink(rt, chain, sf)
            samples.append((lt.bounds()[1] + rt.bounds()[0]) / 2)
    for x in samples:
        if all(_sign_ok(evaluate(q, x), op) for q, op in strict):
            return Decision(True, witness=x)
    return Decision(False)
