"""Axiom instances for closed ordered differential fields.

An instance is a polynomial P in the jet variables X0..Xn, side
inequalities Q_i free of the top variable and a rational point realizing
the premise P = 0, dP/dXn != 0, Q_i > 0.  The formal solver extends the
point to a truncated power series b with the prescribed initial jet and
P(b, b', ..., b^(n)) = 0 to the attainable order; every new Taylor
coefficient comes from one division by the separant at the base point.

Also here: the translation between jet-style instances and first-order
derivative constraint systems over doubled variables, the cell-type
bookkeeping that assigns a binary type and a dimension to derivative
cells, and rational jet witnesses for boxes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from . import terms as T
from .errors import EmptyInterval, ParseError, PremiseFails
from .poly import MultiPoly, RationalFunction
from .series import TruncatedSeries


def X(i: int) -> str:
    return f"X{i}"


@dataclass
class SingerInstance:
    """P in X0..Xn, Qs free of Xn, and the premise point a (n+1 entries)."""

    n: int
    P: MultiPoly
    Qs: tuple
    a: tuple

    def __post_init__(self):
        self.Qs = tuple(self.Qs)
        self.a = tuple(Fraction(x) for x in self.a)
        if len(self.a) != self.n + 1:
            raise ValueError(f"premise point needs {self.n + 1} entries")
        allowed = {X(i) for i in range(self.n + 1)}
        if not self.P.used_vars() <= allowed:
            raise ValueError("P uses variables outside X0..Xn")
        top = X(self.n)
        for q in self.Qs:
            if top in q.used_vars():
                raise ValueError(f"side inequality may not involve {top}")

    def point(self):
        return {X(i): self.a[i] for i in range(self.n + 1)}

    def separant(self) -> MultiPoly:
        return self.P.partial(X(self.n))


def check_singer_premise(inst: SingerInstance):
    """Evaluate the three premise clauses at the point; returns
    (ok, diagnostics) where diagnostics names each failing clause."""
    pt = inst.point()
    problems = []
    p_val = _eval_poly(inst.P, pt)
    if p_val != 0:
        problems.append(f"P(a) = {p_val} != 0")
    sep_val = _eval_poly(inst.separant(), pt)
    if sep_val == 0:
        problems.append("separant dP/dX%d vanishes at a" % inst.n)
    for i, q in enumerate(inst.Qs):
        q_val = _eval_poly(q, pt)
        if not q_val > 0:
            problems.append(f"Q{i + 1}(a) = {q_val} <= 0")
    return (not problems), problems


def _eval_poly(p: MultiPoly, pt) -> Fraction:
    if p.is_zero():
        return Fraction(0)
    val = p.eval(pt)
    return val if isinstance(val, Fraction) else Fraction(val)


def solve_singer_formal(inst: SingerInstance, N: int) -> TruncatedSeries:
    """Formal witness b in Q[[t]], truncated at degree N.

    b^(k)(0) = a_k for k <= n and P applied to the jet of b vanishes
    modulo t^(N-n+1).  Each new coefficient is obtained by a single
    division by the separant evaluated at the base point, which the
    premise guarantees is a fixed nonzero rational.
    """
    ok, problems = check_singer_premise(inst)
    if not ok:
        raise PremiseFails("; ".join(problems))
    n = inst.n
    if N < n:
        raise ValueError("truncation order must be at least the jet order")
    sep0 = _eval_poly(inst.separant(), inst.point())
    coeffs = {(k,): inst.a[k] / math.factorial(k) for k in range(n + 1)}

    for K in range(n, N):
        b = TruncatedSeries(1, N, coeffs)
        jets = {X(0): b}
        cur = b
        for j in range(1, n + 1):
            cur = cur.partial(1)
            jets[X(j)] = cur
        residual = inst.P.eval(jets)
        if isinstance(residual, Fraction):
            e = residual if K + 1 - n == 0 else Fraction(0)
        else:
            e = residual.coeff((K + 1 - n,))
        if e:
            scale = Fraction(math.factorial(K + 1), math.factorial(K + 1 - n))
            coeffs[(K + 1,)] = -e / (sep0 * scale)
    return TruncatedSeries(1, N, coeffs)


def residual(inst: SingerInstance, b: TruncatedSeries):
    """P evaluated along the jet of b, as a series valid to order N-n."""
    jets = {X(0): b}
    cur = b
    for j in range(1, inst.n + 1):
        cur = cur.partial(1)
        jets[X(j)] = cur
    out = inst.P.eval(jets)
    if isinstance(out, Fraction):
        out = TruncatedSeries.const(out, 1, b.order - inst.n)
    return out


# --------------------------------------------------------------------------
# jet instances as constraint systems over doubled variables
# --------------------------------------------------------------------------

@dataclass
class GeometricSystem:
    """Constraints on (x1..xn, y1..yn) whose solutions with y = dx are
    exactly the points whose jet satisfies the instance's atom block."""

    n: int
    chain: tuple     # pairs (y_i, x_{i+1}) forced equal, i = 1..n-1
    P: MultiPoly     # over x1..xn, yn
    Qs: tuple        # over x1..xn

    def variables(self):
        xs = tuple(f"x{i}" for i in range(1, self.n + 1))
        ys = tuple(f"y{i}" for i in range(1, self.n + 1))
        return xs + ys


def singer_to_geometric(inst: SingerInstance) -> GeometricSystem:
    """Translate the jet reading into the doubled-variable reading.

    X_i maps to x_{i+1} for i < n and X_n maps to y_n; the chain
    equalities y_i = x_{i+1} make (a, da) range over jets.
    """
    n = inst.n
    ren = {X(i): f"x{i + 1}" for i in range(n)}
    ren[X(n)] = f"y{n}"
    chain = tuple((f"y{i}", f"x{i + 1}") for i in range(1, n))
    P = inst.P.map_vars(lambda v: ren[v])
    Qs = tuple(q.map_vars(lambda v: ren[v]) for q in inst.Qs)
    return GeometricSystem(n, chain, P, Qs)


def geometric_to_singer(sys: GeometricSystem, a=None) -> SingerInstance:
    """Inverse reading; the premise point defaults to all zeros."""
    n = sys.n
    ren = {f"x{i + 1}": X(i) for i in range(n)}
    ren[f"y{n}"] = X(n)
    P = sys.P.map_vars(lambda v: ren[v])
    Qs = tuple(q.map_vars(lambda v: ren[v]) for q in sys.Qs)
    if a is None:
        a = (Fraction(0),) * (n + 1)
    return SingerInstance(n, P, Qs, a)


# --------------------------------------------------------------------------
# cell types of derivative cells
# --------------------------------------------------------------------------

def delta_type(rows):
    """Collapse a source-cell binary type to the derivative-cell type.

    ``rows`` lists, per base coordinate, the 0/1 cell type entries of its
    jet block.  A coordinate contributes 1 exactly when its whole row is
    1; the dimension is the number of such coordinates.
    """
    bold = []
    for row in rows:
        row = tuple(int(x) for x in row)
        if any(x not in (0, 1) for x in row):
            raise ValueError("cell types are binary")
        bold.append(1 if all(x == 1 for x in row) else 0)
    return tuple(bold), sum(bold)


# --------------------------------------------------------------------------
# box witnesses
# --------------------------------------------------------------------------

def jet_box_witness(box) -> MultiPoly:
    """A polynomial a(t) whose jet at 0 lies inside the open box.

    Takes interval midpoints: a = sum_k mid_k t^k / k!, so the k-th
    derivative at 0 is exactly mid_k.
    """
    coeffs = []
    for k, (lo, hi) in enumerate(box):
        lo, hi = Fraction(lo), Fraction(hi)
        if not lo < hi:
            raise EmptyInterval(f"interval {k} is empty: ({lo}, {hi})")
        coeffs.append((lo + hi) / 2)
    t = MultiPoly.var("t")
    out = MultiPoly.zero()
    for k, c in enumerate(coeffs):
        out = out + MultiPoly.const(c / math.factorial(k)) * t ** k
    return out


# --------------------------------------------------------------------------
# instance file format
# --------------------------------------------------------------------------

def parse_singer(text: str) -> SingerInstance:
    """Parse ``n = ...``, ``P = ...``, ``Q = ...`` (repeatable) and
    ``a = (r0, r1, ...)`` lines into an instance."""
    n = None
    P = None
    Qs = []
    a = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, rhs = line.partition("=")
        if not sep:
            raise ParseError(f"expected 'key = value', got {line!r}", lineno, 1)
        key = key.strip()
        rhs = rhs.strip()
        if key == "n":
            if not rhs.isdigit() or int(rhs) < 1:
                raise ParseError("n must be a positive integer", lineno, 1)
            n = int(rhs)
        elif key == "P":
            P = _poly_from_text(rhs, lineno)
        elif key == "Q":
            Qs.append(_poly_from_text(rhs, lineno))
        elif key == "a":
            body = rhs.strip()
            if not (body.startswith("(") and body.endswith(")")):
                raise ParseError("a must be a tuple (r0, r1, ...)", lineno, 1)
            try:
                a = tuple(Fraction(x.strip()) for x in body[1:-1].split(","))
            except ValueError as exc:
                raise ParseError(f"bad rational in a: {exc}", lineno, 1) from exc
        else:
            raise ParseError(f"unknown key {key!r}", lineno, 1)
    if n is None or P is None or a is None:
        raise ParseError("instance needs n, P and a lines")
    try:
        return SingerInstance(n, P, tuple(Qs), a)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def _poly_from_text(text: str, lineno: int) -> MultiPoly:
    try:
        ast = T.parse_term(text)
    except ParseError as exc:
        raise ParseError(f"bad polynomial: {exc}", lineno, 1) from exc
    rf = _poly_ast(ast)
    if not rf.is_poly():
        raise ParseError("expected a polynomial, found a denominator", lineno, 1)
    return rf.num


def _poly_ast(t) -> RationalFunction:
    if isinstance(t, T.Const):
        return RationalFunction.const(t.value)
    if isinstance(t, T.Var):
        return RationalFunction.var(t.name)
    if isinstance(t, T.Add):
        return _poly_ast(t.left) + _poly_ast(t.right)
    if isinstance(t, T.Sub):
        return _poly_ast(t.left) - _poly_ast(t.right)
    if isinstance(t, T.Mul):
        return _poly_ast(t.left) * _poly_ast(t.right)
    if isinstance(t, T.Div):
        return _poly_ast(t.left) / _poly_ast(t.right)
    if isinstance(t, T.Neg):
        return -_poly_ast(t.arg)
    if isinstance(t, T.Pow):
        return _poly_ast(t.base) ** t.exp
    if isinstance(t, T.Apply):
        raise ValueError("derivation applications are not allowed here")
    raise TypeError(f"not a term node: {t!r}")
