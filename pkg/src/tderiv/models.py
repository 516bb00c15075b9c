"""Concrete differential-field backends used as evaluation oracles.

Two models: truncated formal power series Q[[t_1..t_p]] where the i-th
derivation is the formal partial d/dt_i, and germs at +infinity of
rational functions in one variable s, where the derivation is d/ds and
atoms are decided by eventual sign.  Neither is a model of the generic
theory; they witness the calculus exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import terms as T
from .derivations import DiffVar
from .errors import (DenominatorVanishes, DivisionByNonUnit,
                     HigherDerivationInGermModel, ZeroDenominator)
from .jets import JetTerm
from .poly import MultiPoly, RationalFunction, _coerce_rf
from .series import TruncatedSeries

NEG, ZERO, POS = -1, 0, 1
SIGN_NAMES = {NEG: "NEG", ZERO: "ZERO", POS: "POS"}


@dataclass
class SeriesPoint:
    """Assignment of base variables to series sharing arity and order."""

    assignment: dict
    p: int
    order: int

    def __post_init__(self):
        for name, s in self.assignment.items():
            if s.p != self.p:
                raise ValueError(f"series for {name} has arity {s.p}, expected {self.p}")

    def __getitem__(self, name):
        return self.assignment[name]

    def jet_value(self, v: DiffVar) -> TruncatedSeries:
        return self.assignment[v.base].theta_partial(v.theta)


def eval_diff_term(t, pt: SeriesPoint) -> TruncatedSeries:
    """Evaluate a differential term with d_i acting as d/dt_i.

    Every division's denominator must evaluate to a unit series.  The
    k-th derivative of a series of order N is exact only to order N-k;
    the result's order reflects every such loss.
    """
    if isinstance(t, T.Const):
        return TruncatedSeries.const(t.value, pt.p, pt.order)
    if isinstance(t, T.Var):
        return pt[t.name]
    if isinstance(t, T.IndexedVar):
        return pt.jet_value(DiffVar(t.name, t.theta))
    if isinstance(t, T.Add):
        return eval_diff_term(t.left, pt) + eval_diff_term(t.right, pt)
    if isinstance(t, T.Sub):
        return eval_diff_term(t.left, pt) - eval_diff_term(t.right, pt)
    if isinstance(t, T.Mul):
        return eval_diff_term(t.left, pt) * eval_diff_term(t.right, pt)
    if isinstance(t, T.Div):
        den = eval_diff_term(t.right, pt)
        if not den.is_unit():
            raise DivisionByNonUnit("division by a series with zero constant term")
        return eval_diff_term(t.left, pt) / den
    if isinstance(t, T.Neg):
        return -eval_diff_term(t.arg, pt)
    if isinstance(t, T.Pow):
        return eval_diff_term(t.base, pt) ** t.exp
    if isinstance(t, T.Apply):
        if t.index > pt.p:
            raise ValueError(f"derivation index {t.index} exceeds p={pt.p}")
        return eval_diff_term(t.arg, pt).partial(t.index)
    raise TypeError(f"not a term node: {t!r}")


def eval_jet_term(jt: JetTerm, pt: SeriesPoint) -> TruncatedSeries:
    """Evaluate a jet normal form, sending y^theta to the theta-partial."""
    values = {v: pt.jet_value(v) for v in jt.rf.used_vars()}
    den = jt.rf.den.eval(values) if not jt.rf.den.is_const() else jt.rf.den.const_value()
    num = jt.rf.num.eval(values)
    if isinstance(den, Fraction):
        if den == 0:
            raise DivisionByNonUnit("denominator is zero")
        result = num * (1 / den)
    else:
        if not den.is_unit():
            raise DivisionByNonUnit("denominator evaluates to a non-unit series")
        result = num / den if isinstance(num, TruncatedSeries) else den.inverse() * num
    if isinstance(result, Fraction):
        result = TruncatedSeries.const(result, pt.p, pt.order)
    return result


def check_compatibility(f: RationalFunction, pt: SeriesPoint, i: int) -> bool:
    """Does d/dt_i(f(point)) match the chain rule sum at this point?

    Compares d/dt_i of f evaluated at the series point against
    sum_k (df/dy_k)(point) * d/dt_i(point_k), at the common valid order.
    """
    values = dict(pt.assignment)
    try:
        lhs = _as_series(f.eval(values), pt).partial(i)
    except DenominatorVanishes as exc:
        raise DivisionByNonUnit(str(exc)) from exc
    rhs = TruncatedSeries.const(0, pt.p, pt.order)
    for v in f.used_vars():
        df = f.partial(v)
        if df.is_zero():
            continue
        try:
            part = _as_series(df.eval(values), pt)
        except DenominatorVanishes as exc:
            raise DivisionByNonUnit(str(exc)) from exc
        rhs = rhs + part * pt[v].partial(i)
    return lhs.agrees(rhs)


def _as_series(x, pt: SeriesPoint) -> TruncatedSeries:
    if isinstance(x, TruncatedSeries):
        return x
    return TruncatedSeries.const(x, pt.p, pt.order)


# --------------------------------------------------------------------------
# germs at +infinity
# --------------------------------------------------------------------------

GERM_VAR = "s"


@dataclass
class GermPoint:
    """Assignment of base variables to rational germs in the variable s."""

    assignment: dict

    def __getitem__(self, name):
        return self.assignment[name]


def germ_sign(g: RationalFunction) -> int:
    """Eventual sign of g(s) as s grows without bound."""
    g = _coerce_rf(g)
    if g.is_zero():
        return ZERO
    num_lead = _lead_coeff_by_degree(g.num)
    den_lead = _lead_coeff_by_degree(g.den)
    s = num_lead * den_lead
    return POS if s > 0 else NEG


def _lead_coeff_by_degree(p: MultiPoly) -> Fraction:
    best = None
    best_deg = -1
    for e, c in p.terms.items():
        d = sum(e)
        if d > best_deg:
            best_deg = d
            best = c
    return best


def eval_formula(phi, pt: GermPoint) -> bool:
    """Decide a formula in the germ model (one derivation only)."""
    if isinstance(phi, T.Atom):
        lhs = _eval_germ_term(phi.left, pt)
        rhs = _eval_germ_term(phi.right, pt)
        sign = germ_sign(lhs - rhs)
        return _sign_matches(sign, phi.op)
    if isinstance(phi, T.And):
        return eval_formula(phi.left, pt) and eval_formula(phi.right, pt)
    if isinstance(phi, T.Or):
        return eval_formula(phi.left, pt) or eval_formula(phi.right, pt)
    if isinstance(phi, T.Not):
        return not eval_formula(phi.arg, pt)
    raise TypeError(f"not a formula node: {phi!r}")


def _sign_matches(sign: int, op: str) -> bool:
    return {
        "=": sign == 0,
        "!=": sign != 0,
        "<": sign < 0,
        "<=": sign <= 0,
        ">": sign > 0,
        ">=": sign >= 0,
    }[op]


def _eval_germ_term(t, pt: GermPoint) -> RationalFunction:
    if isinstance(t, T.Const):
        return RationalFunction.const(t.value)
    if isinstance(t, T.Var):
        return _coerce_rf(pt[t.name])
    if isinstance(t, T.Add):
        return _eval_germ_term(t.left, pt) + _eval_germ_term(t.right, pt)
    if isinstance(t, T.Sub):
        return _eval_germ_term(t.left, pt) - _eval_germ_term(t.right, pt)
    if isinstance(t, T.Mul):
        return _eval_germ_term(t.left, pt) * _eval_germ_term(t.right, pt)
    if isinstance(t, T.Div):
        den = _eval_germ_term(t.right, pt)
        if den.is_zero():
            raise ZeroDenominator("division by the zero germ")
        return _eval_germ_term(t.left, pt) / den
    if isinstance(t, T.Neg):
        return -_eval_germ_term(t.arg, pt)
    if isinstance(t, T.Pow):
        return _eval_germ_term(t.base, pt) ** t.exp
    if isinstance(t, T.Apply):
        if t.index != 1:
            raise HigherDerivationInGermModel(
                "the germ model carries a single derivation")
        return _eval_germ_term(t.arg, pt).partial(GERM_VAR)
    raise TypeError(f"not a term node: {t!r}")
