"""Conditions on several commuting derivations and their coherence.

A condition fixes an antichain P of principal derivative operators, an
open region U cut out by strict polynomial inequalities in the free
(parametric) derivatives z^theta, and for every beta in P a bounding
function f_beta determining the beta-derivative from earlier parametric
ones.  The induced recursion assigns to every operator theta a finite
set Omega_theta of candidate expressions for theta z in terms of the
parametric derivatives:

  * theta free:       Omega = { z^theta }
  * theta principal:  Omega = { f_theta }
  * theta above P:    one candidate through every predecessor inside the
                      bounded region, obtained by the chain rule with the
                      already-derived images substituted for the formal
                      derivatives.

The condition is coherent when all candidates below the join of P agree;
coherence propagates to every operator, and a coherent condition is
solvable by a truncated power series whose theta-jet at 0 follows the
derived functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from . import terms as T
from .derivations import DiffVar
from .errors import (DenominatorVanishes, DependenceViolation, NotAntichain,
                     NotCoherent, ParseError, SingularInitialData,
                     VariableInB, WitnessFails)
from .poly import MultiPoly, RationalFunction, _coerce_rf
from .series import TruncatedSeries
from .theta import (Antichain, ThetaPartition, enumerate_theta, identity,
                    join_all, ord_of, predecessors, render_theta,
                    successor_index, theta_key)


def zvar(theta) -> DiffVar:
    return DiffVar("z", tuple(theta))


@dataclass
class Condition:
    """(P, U, (f_beta)) with an optional witness for U's nonemptiness."""

    p: int
    principal: tuple                 # antichain of operators
    bounds: dict                     # theta -> RationalFunction
    inequalities: tuple = ()         # MultiPoly constraints, each "> 0"
    witness: dict = None             # theta -> Fraction, optional

    def __post_init__(self):
        self.principal = tuple(sorted((tuple(b) for b in self.principal), key=theta_key))
        self.bounds = {tuple(k): _coerce_rf(v) for k, v in self.bounds.items()}

    def partition(self) -> ThetaPartition:
        return ThetaPartition(Antichain(self.principal), p=self.p)

    def join(self):
        if not self.principal:
            return identity(self.p)
        return join_all(self.principal)


def validate_condition(c: Condition):
    """Check the structural clauses; raises a ConditionInvalid subclass."""
    for beta in c.principal:
        if len(beta) != c.p:
            raise NotAntichain(f"operator {render_theta(beta)} has wrong arity")
        if beta == identity(c.p):
            raise NotAntichain("the identity operator cannot be principal")
    for i, a in enumerate(c.principal):
        for b in c.principal[i + 1:]:
            if _divides(a, b) or _divides(b, a):
                raise NotAntichain(
                    f"{render_theta(a)} and {render_theta(b)} are comparable")
    try:
        part = c.partition()
    except ValueError as exc:
        raise NotAntichain(str(exc)) from exc

    if set(c.bounds) != set(c.principal):
        missing = set(c.principal) - set(c.bounds)
        extra = set(c.bounds) - set(c.principal)
        what = []
        if missing:
            what.append("missing bounds for " + ", ".join(render_theta(b) for b in sorted(missing, key=theta_key)))
        if extra:
            what.append("bounds for non-principal " + ", ".join(render_theta(b) for b in sorted(extra, key=theta_key)))
        raise NotAntichain("; ".join(what))

    for beta, f in c.bounds.items():
        for v in sorted(f.used_vars(), key=lambda u: theta_key(u.theta)):
            theta = v.theta
            if part.in_bounded(theta):
                raise VariableInB(render_theta(theta))
            if theta_key(theta) >= theta_key(beta):
                raise DependenceViolation(render_theta(beta), render_theta(theta))
    for u in c.inequalities:
        for v in u.used_vars():
            if part.in_bounded(v.theta):
                raise VariableInB(render_theta(v.theta))

    if c.witness is not None:
        point = {}
        used = set()
        for u in c.inequalities:
            used |= u.used_vars()
        for f in c.bounds.values():
            used |= f.used_vars()
        for v in used:
            point[v] = Fraction(c.witness.get(v.theta, 0))
        for u in c.inequalities:
            val = u.eval(point) if not u.is_const() else u.const_value()
            if not val > 0:
                raise WitnessFails(
                    f"inequality fails at the witness (value {val})")
        for beta, f in c.bounds.items():
            try:
                f.eval(point)
            except DenominatorVanishes:
                raise WitnessFails(
                    f"denominator of the bound for {render_theta(beta)} vanishes at the witness")


def _divides(a, b):
    return all(x <= y for x, y in zip(a, b))


@dataclass
class DerivedSystem:
    """The recursion output: candidate sets, chosen images, denominators."""

    p: int
    ord_bound: int
    omega: dict                       # theta -> {route: RationalFunction}
    g: dict                           # theta -> RationalFunction
    domain_denominators: tuple = ()

    def omega_set(self, theta):
        return set(self.omega[tuple(theta)].values())

    def routes(self, theta):
        return self.omega[tuple(theta)]


def derive_system(c: Condition, ord_bound: int) -> DerivedSystem:
    """Run the recursion for every operator of order <= ord_bound."""
    validate_condition(c)
    part = c.partition()
    omega = {}
    g = {}
    dens = []
    for theta in enumerate_theta(c.p, ord_bound):
        if part.in_free(theta):
            cand = RationalFunction.var(zvar(theta))
            omega[theta] = {None: cand}
            g[theta] = cand
            continue
        if theta in c.bounds:
            cand = c.bounds[theta]
            omega[theta] = {None: cand}
            g[theta] = cand
            if not cand.den.is_const():
                dens.append(cand.den)
            continue
        routes = {}
        preds = sorted((phi for phi in predecessors(theta) if part.in_bounded(phi)),
                       key=theta_key)
        for phi in preds:
            i = successor_index(phi, theta)
            base = g[phi]
            cand = RationalFunction.const(0)
            for v in base.used_vars():
                dfd = base.partial(v)
                if dfd.is_zero():
                    continue
                cand = cand + dfd * g[_shift(v.theta, i)]
            routes[phi] = cand
            if not cand.den.is_const():
                dens.append(cand.den)
        omega[theta] = routes
        g[theta] = routes[preds[0]]
    uniq = []
    for d in dens:
        if d not in uniq:
            uniq.append(d)
    return DerivedSystem(c.p, ord_bound, omega, g, tuple(uniq))


def _shift(theta, i):
    return theta[:i - 1] + (theta[i - 1] + 1,) + theta[i:]


@dataclass
class CoherenceReport:
    coherent: bool
    conflict: tuple = None        # (theta, phi1, phi2, difference)
    conflict_values: tuple = None  # (g via phi1, g via phi2)

    def __bool__(self):
        return self.coherent


def _first_conflict(system: DerivedSystem, thetas):
    """First non-singleton candidate set, routes listed in descending
    predecessor order so the route through the lower derivation index
    comes first."""
    for theta in thetas:
        routes = system.routes(theta)
        if len(set(routes.values())) > 1:
            items = sorted(routes.items(), key=lambda kv: theta_key(kv[0]), reverse=True)
            (phi1, g1) = items[0]
            for phi2, g2 in items[1:]:
                if g2 != g1:
                    return (theta, phi1, phi2, g1 - g2), (g1, g2)
    return None, None


def is_coherent(c: Condition) -> CoherenceReport:
    """Decide coherence: all candidate sets below the join of P agree.

    The first conflict in increasing operator order is certified by the
    two predecessor routes and their (nonzero) difference.
    """
    top = c.join()
    system = derive_system(c, ord_of(top))
    top_key = theta_key(top)
    thetas = [t for t in enumerate_theta(c.p, ord_of(top)) if theta_key(t) <= top_key]
    conflict, values = _first_conflict(system, thetas)
    if conflict is None:
        return CoherenceReport(True)
    return CoherenceReport(False, conflict, values)


def strong_coherence_probe(c: Condition, ord_bound: int):
    """Empirically confirm that coherence propagates above the join.

    Returns (True, None) when every candidate set up to the bound is a
    singleton, else (False, (theta, phi1, phi2, difference)).
    """
    system = derive_system(c, ord_bound)
    conflict, _ = _first_conflict(system, enumerate_theta(c.p, ord_bound))
    return (conflict is None), conflict


def solve_condition_series(c: Condition, init: dict, N: int) -> TruncatedSeries:
    """Build a truncated series whose jets at 0 realize the condition.

    Free derivatives take their value from ``init`` (default 0), bounded
    ones follow the derived functions; the coefficient of t^e is the
    value of the e-jet divided by e!.  Mixed partials commute by
    construction since a single series carries all of them.
    """
    report = is_coherent(c)
    if not report.coherent:
        theta, phi1, phi2, _ = report.conflict
        raise NotCoherent(
            f"conflict at {render_theta(theta)} between routes {render_theta(phi1)} and {render_theta(phi2)}")
    init = {tuple(k): Fraction(v) for k, v in init.items()}
    system = derive_system(c, N)
    part = c.partition()
    values = {}
    for theta in enumerate_theta(c.p, N):
        if part.in_free(theta):
            values[theta] = init.get(theta, Fraction(0))
        else:
            point = {zvar(al): values[al] for al in
                     (v.theta for v in system.g[theta].used_vars())}
            try:
                val = system.g[theta].eval(point)
            except DenominatorVanishes as exc:
                raise SingularInitialData(render_theta(theta)) from exc
            values[theta] = Fraction(val)
    terms = {}
    for theta, v in values.items():
        if v:
            fact = 1
            for e in theta:
                fact *= math.factorial(e)
            terms[theta] = v / fact
    return TruncatedSeries(c.p, N, terms)


@dataclass
class VerifyReport:
    ok: bool
    failing_beta: tuple = None
    failing_inequality: MultiPoly = None

    def __bool__(self):
        return self.ok


def verify_solution(c: Condition, a: TruncatedSeries) -> VerifyReport:
    """Check the beta-jets of a against the bounds and U at the origin.

    The beta-derivative of a is compared with f_beta applied to the
    parametric jets of a, as series valid to order
    N - ord(beta) - (maximal operator order used by f_beta).
    """
    N = a.order
    for u in c.inequalities:
        point = {v: a.theta_partial(v.theta).constant_term() for v in u.used_vars()}
        val = u.eval(point) if not u.is_const() else u.const_value()
        if not val > 0:
            return VerifyReport(False, failing_inequality=u)
    for beta in c.principal:
        f = c.bounds[beta]
        lhs = a.theta_partial(beta)
        used = sorted(f.used_vars(), key=lambda v: theta_key(v.theta))
        max_used = max((sum(v.theta) for v in used), default=0)
        margin = N - sum(beta) - max_used
        values = {v: a.theta_partial(v.theta) for v in used}
        try:
            if values:
                rhs = f.eval(values)
            else:
                rhs = f.const_value()
            if isinstance(rhs, Fraction):
                rhs = TruncatedSeries.const(rhs, c.p, N)
        except (DenominatorVanishes, ZeroDivisionError):
            return VerifyReport(False, failing_beta=beta)
        if not lhs.agrees(rhs, order=margin):
            return VerifyReport(False, failing_beta=beta)
    return VerifyReport(True)


# --------------------------------------------------------------------------
# the line-oriented condition format
# --------------------------------------------------------------------------

def parse_condition(text: str):
    """Parse the condition file format.

    Returns (Condition, init) where init collects the ``init`` lines for
    the solver.  Lines: ``p = n``; ``beta [e,...] := term``;
    ``ineq term > 0``; ``witness z[e,...] = rational``;
    ``init z[e,...] = rational``.  Blank lines and ``#`` comments are
    ignored.
    """
    p = None
    bounds = {}
    inequalities = []
    witness = {}
    init = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            if line.startswith("p"):
                _, _, rhs = line.partition("=")
                if not rhs.strip().isdigit():
                    raise ParseError("p must be a natural number", lineno, 1)
                p = int(rhs)
            elif line.startswith("beta"):
                if p is None:
                    raise ParseError("p must be declared before beta lines", lineno, 1)
                head, sep, rhs = line.partition(":=")
                if not sep:
                    raise ParseError("beta line needs ':='", lineno, 1)
                theta = _parse_bracket(head[len("beta"):].strip(), lineno)
                if len(theta) != p:
                    raise ParseError(f"operator arity {len(theta)} != p={p}", lineno, 1)
                bounds[theta] = _term_to_rf(rhs.strip(), p, lineno)
            elif line.startswith("ineq"):
                if p is None:
                    raise ParseError("p must be declared before ineq lines", lineno, 1)
                body = line[len("ineq"):].strip()
                if not body.endswith("> 0") and not body.endswith(">0"):
                    raise ParseError("inequalities must have the form 'term > 0'", lineno, 1)
                body = body[:body.rfind(">")].strip()
                rf = _term_to_rf(body, p, lineno)
                if not rf.is_poly():
                    raise ParseError("inequalities must be polynomial", lineno, 1)
                inequalities.append(rf.num)
            elif line.startswith("witness"):
                theta, val = _parse_assign(line[len("witness"):].strip(), p, lineno)
                witness[theta] = val
            elif line.startswith("init"):
                theta, val = _parse_assign(line[len("init"):].strip(), p, lineno)
                init[theta] = val
            else:
                raise ParseError(f"unknown directive {line.split()[0]!r}", lineno, 1)
        except ParseError:
            raise
        except Exception as exc:
            raise ParseError(str(exc), lineno, 1) from exc
    if p is None:
        raise ParseError("missing 'p = <nat>' line")
    cond = Condition(p, tuple(bounds), bounds, tuple(inequalities),
                     witness if witness else None)
    return cond, init


def _parse_bracket(text, lineno):
    text = text.strip()
    if not (text.startswith("[") and text.endswith("]")):
        raise ParseError(f"expected [e1,...,ep], got {text!r}", lineno, 1)
    return tuple(int(x) for x in text[1:-1].split(","))


def _parse_assign(text, p, lineno):
    if p is None:
        raise ParseError("p must be declared first", lineno, 1)
    lhs, sep, rhs = text.partition("=")
    if not sep:
        raise ParseError("expected 'z[e,...] = rational'", lineno, 1)
    lhs = lhs.strip()
    if lhs == "z":
        theta = identity(p)
    else:
        if not lhs.startswith("z"):
            raise ParseError("assignments are to z[...] variables", lineno, 1)
        theta = _parse_bracket(lhs[1:], lineno)
    if len(theta) != p:
        raise ParseError(f"operator arity {len(theta)} != p={p}", lineno, 1)
    return theta, Fraction(rhs.strip())


def _term_to_rf(text, p, lineno):
    try:
        ast = T.parse_term(text, allow_indexed=True)
    except ParseError as exc:
        raise ParseError(f"bad term: {exc}", lineno, 1) from exc
    return _ast_to_rf(ast, p)


def _ast_to_rf(t, p) -> RationalFunction:
    if isinstance(t, T.Const):
        return RationalFunction.const(t.value)
    if isinstance(t, T.Var):
        if t.name != "z":
            raise ValueError(f"conditions use the variable z, not {t.name!r}")
        return RationalFunction.var(zvar(identity(p)))
    if isinstance(t, T.IndexedVar):
        if t.name != "z":
            raise ValueError(f"conditions use the variable z, not {t.name!r}")
        if len(t.theta) != p:
            raise ValueError(f"operator arity {len(t.theta)} != p={p}")
        return RationalFunction.var(zvar(t.theta))
    if isinstance(t, T.Add):
        return _ast_to_rf(t.left, p) + _ast_to_rf(t.right, p)
    if isinstance(t, T.Sub):
        return _ast_to_rf(t.left, p) - _ast_to_rf(t.right, p)
    if isinstance(t, T.Mul):
        return _ast_to_rf(t.left, p) * _ast_to_rf(t.right, p)
    if isinstance(t, T.Div):
        den = _ast_to_rf(t.right, p)
        if den.is_zero():
            raise ValueError("division by zero in condition term")
        return _ast_to_rf(t.left, p) / den
    if isinstance(t, T.Neg):
        return -_ast_to_rf(t.arg, p)
    if isinstance(t, T.Pow):
        return _ast_to_rf(t.base, p) ** t.exp
    if isinstance(t, T.Apply):
        raise ValueError("derivation applications are not allowed in condition terms")
    raise TypeError(f"not a term node: {t!r}")
