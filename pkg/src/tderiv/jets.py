"""Rewriting differential terms and formulas into jet normal form.

Every application of a derivation is eliminated by linearity, Leibniz,
the quotient and power rules, and the action y^theta -> y^(d_i theta) on
jet variables.  The result is a canonical rational function over
differential variables, together with the jet depth needed per base
variable.  In formulas, division is cleared from atoms by a sign-aware
case split on the denominator, so consumers only ever see polynomial
atoms.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import terms as T
from .derivations import DiffVar, free_derive, render_diffvar
from .errors import QuantifierUnsupported, ZeroDenominator
from .poly import MultiPoly, RationalFunction, render_poly, render_rational
from .theta import enumerate_theta, identity


@dataclass(frozen=True)
class JetTerm:
    """A derivation-free normal form over jet variables."""

    rf: RationalFunction
    p: int

    @property
    def support(self):
        """The derivative operators actually occurring."""
        return {v.theta for v in self.rf.used_vars()}

    def depth_per_var(self):
        depths = {}
        for v in self.rf.used_vars():
            depths[v.base] = max(depths.get(v.base, 0), v.order)
        return depths

    def depth(self):
        return max(self.depth_per_var().values(), default=0)

    def render(self):
        return render_rational(self.rf, var_str=render_diffvar)


@dataclass(frozen=True)
class PolyAtom:
    """poly <op> 0 with a polynomial over jet variables."""

    poly: MultiPoly
    op: str

    def render(self):
        return f"{render_poly(self.poly, var_str=render_diffvar)} {self.op} 0"


@dataclass(frozen=True)
class JetFormula:
    root: object  # PolyAtom or And/Or/Not over PolyAtoms
    p: int

    def atoms(self):
        def walk(node):
            if isinstance(node, PolyAtom):
                yield node
            elif isinstance(node, T.Not):
                yield from walk(node.arg)
            else:
                yield from walk(node.left)
                yield from walk(node.right)
        return walk(self.root)

    def depth_per_var(self):
        depths = {}
        for atom in self.atoms():
            for v in atom.poly.vars:
                depths[v.base] = max(depths.get(v.base, 0), v.order)
        return depths

    def depth(self):
        return max(self.depth_per_var().values(), default=0)

    def render(self):
        return _render_jf(self.root, 1)


def _render_jf(node, level):
    if isinstance(node, PolyAtom):
        return node.render()
    if isinstance(node, T.Or):
        s = f"{_render_jf(node.left, 1)} | {_render_jf(node.right, 2)}"
        return f"({s})" if level > 1 else s
    if isinstance(node, T.And):
        s = f"{_render_jf(node.left, 2)} & {_render_jf(node.right, 3)}"
        return f"({s})" if level > 2 else s
    if isinstance(node, T.Not):
        return f"!({_render_jf(node.arg, 1)})"
    raise TypeError(f"bad jet formula node {node!r}")


def term_arity(t) -> int:
    """Number of derivations a term mentions (at least 1)."""
    return max(T.max_applied_index(t), 1)


def rewrite_term(t, p=None) -> JetTerm:
    """Eliminate all derivation applications from a term.

    Raises ZeroDenominator when some division's denominator normalizes
    to the zero function.
    """
    if p is None:
        p = term_arity(t)
    return JetTerm(_rw(t, p), p)


def _rw(t, p) -> RationalFunction:
    if isinstance(t, T.Const):
        return RationalFunction.const(t.value)
    if isinstance(t, T.Var):
        return RationalFunction.var(DiffVar(t.name, identity(p)))
    if isinstance(t, T.IndexedVar):
        theta = t.theta
        if len(theta) != p:
            raise ValueError(f"operator arity {len(theta)} does not match p={p}")
        return RationalFunction.var(DiffVar(t.name, theta))
    if isinstance(t, T.Add):
        return _rw(t.left, p) + _rw(t.right, p)
    if isinstance(t, T.Sub):
        return _rw(t.left, p) - _rw(t.right, p)
    if isinstance(t, T.Mul):
        return _rw(t.left, p) * _rw(t.right, p)
    if isinstance(t, T.Div):
        den = _rw(t.right, p)
        if den.is_zero():
            raise ZeroDenominator("denominator rewrites to zero")
        return _rw(t.left, p) / den
    if isinstance(t, T.Neg):
        return -_rw(t.arg, p)
    if isinstance(t, T.Pow):
        return _rw(t.base, p) ** t.exp
    if isinstance(t, T.Apply):
        if t.index > p:
            raise ValueError(f"derivation index {t.index} exceeds p={p}")
        return free_derive(_rw(t.arg, p), t.index)
    raise TypeError(f"not a term node: {t!r}")


def rewrite_formula(phi, p=None):
    """Rewrite a quantifier-free formula; returns (JetFormula, depths).

    Atoms are first normalized to t <op> 0, rewritten, then cleared to
    polynomial atoms by a case split on the sign of the denominator.
    The second component maps each base variable to the jet depth it
    needs; the scalar maximum is JetFormula.depth().
    """
    if isinstance(phi, T.TERM_NODES):
        raise TypeError("expected a formula, got a term")
    if p is None:
        p = 1
        for a in T.formula_atoms(phi):
            p = max(p, T.max_applied_index(a.left), T.max_applied_index(a.right))

    def clear(atom: T.Atom):
        diff = T.Sub(atom.left, atom.right) if atom.right != T.Const(Fraction(0)) else atom.left
        rf = _rw(diff, p)
        num, den = rf.num, rf.den
        if den.is_const():
            return PolyAtom(num, atom.op)
        op = atom.op
        if op in ("=", "!="):
            return T.And(PolyAtom(num, op), PolyAtom(den, "!="))
        flipped = {"<": ">", ">": "<", "<=": ">=", ">=": "<="}[op]
        return T.Or(T.And(PolyAtom(den, ">"), PolyAtom(num, op)),
                    T.And(PolyAtom(den, "<"), PolyAtom(num, flipped)))

    root = T.map_formula_atoms(phi, clear)
    jf = JetFormula(root, p)
    return jf, jf.depth_per_var()


def jet_expand(name: str, n: int, p: int = 1):
    """The ordered jet tuple of a base variable.

    For one derivation this is (y, y', ..., y^(n)); for several it is the
    slice of all operators of order <= n in increasing operator order.
    """
    if n < 0:
        raise ValueError("jet depth must be non-negative")
    if p == 1:
        return tuple(DiffVar(name, (k,)) for k in range(n + 1))
    return tuple(DiffVar(name, theta) for theta in enumerate_theta(p, n))
