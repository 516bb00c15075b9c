"""Derivations on rational-function rings and the free commuting action.

A differential variable pairs a base name with a derivative operator; the
free action of the i-th derivation sends y^theta to y^(d_i * theta) and
extends to polynomials and quotients by linearity, Leibniz and the
quotient rule.  Coefficients live in Q, so scalars are constants for
every derivation here.

``PolyDerivation`` is a derivation of a plain rational-function ring
determined by its images on the ambient variables; it acts through the
chain rule and supports the usual Lie-algebra structure.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import SingularJacobian
from .poly import MultiPoly, RationalFunction, _coerce_rf
from .theta import identity, theta_key, theta_mul


@dataclass(frozen=True)
class DiffVar:
    """y_base^theta; theta is an exponent vector over the derivations."""

    base: str
    theta: tuple

    def sort_key(self):
        return (self.base,) + theta_key(self.theta)

    def derive(self, i: int) -> "DiffVar":
        e = tuple(1 if j == i - 1 else 0 for j in range(len(self.theta)))
        return DiffVar(self.base, theta_mul(self.theta, e))

    @property
    def order(self):
        return sum(self.theta)

    def __str__(self):
        return render_diffvar(self)


def render_diffvar(v: DiffVar) -> str:
    if len(v.theta) == 1:
        return v.base + "'" * v.theta[0]
    return f"{v.base}[{','.join(str(e) for e in v.theta)}]"


def base_var(name: str, p: int) -> DiffVar:
    return DiffVar(name, identity(p))


def promote_poly(poly: MultiPoly, p: int) -> MultiPoly:
    """Lift plain string variables to differential variables at order 0."""
    return poly.map_vars(lambda v: v if isinstance(v, DiffVar) else DiffVar(v, identity(p)))


def promote(f: RationalFunction, p: int) -> RationalFunction:
    return RationalFunction(promote_poly(f.num, p), promote_poly(f.den, p))


def free_derive_poly(poly: MultiPoly, i: int) -> MultiPoly:
    """Apply the i-th free derivation to a polynomial in DiffVars."""
    out = MultiPoly.zero()
    for v in poly.vars:
        dp = poly.partial(v)
        if not dp.is_zero():
            out = out + dp * MultiPoly.var(v.derive(i))
    return out


def free_derive(f, i: int):
    """Free derivation on a DiffVar polynomial or rational function."""
    if isinstance(f, MultiPoly):
        return free_derive_poly(f, i)
    num, den = f.num, f.den
    dn = free_derive_poly(num, i)
    dd = free_derive_poly(den, i)
    if dd.is_zero():
        return RationalFunction(dn, den)
    return RationalFunction(dn * den - num * dd, den * den)


def f_delta(f: RationalFunction, i: int, p: int) -> RationalFunction:
    """The chain-rule companion sum_k df/dy_k * y_k^delta.

    Plain variables are promoted to order-0 differential variables first;
    with rational coefficients there is no extra parameter term.
    """
    return free_derive(promote(f, p), i)


class PolyDerivation:
    """Derivation of Q(z_1,...,z_m) given by its images on the variables."""

    def __init__(self, images):
        self.images = {v: _coerce_rf(g) for v, g in images.items()}

    @property
    def variables(self):
        return set(self.images)

    def __call__(self, f: RationalFunction) -> RationalFunction:
        return apply_derivation(self, f)

    def __eq__(self, other):
        if not isinstance(other, PolyDerivation):
            return NotImplemented
        keys = set(self.images) | set(other.images)
        zero = RationalFunction.const(0)
        return all(self.images.get(k, zero) == other.images.get(k, zero) for k in keys)

    def __repr__(self):
        body = ", ".join(f"{k} -> {v!r}" for k, v in sorted(self.images.items(), key=lambda kv: str(kv[0])))
        return f"PolyDerivation({body})"


def apply_derivation(d: PolyDerivation, f: RationalFunction) -> RationalFunction:
    """Chain-rule image sum_k df/dz_k * d(z_k)."""
    f = _coerce_rf(f)
    out = RationalFunction.const(0)
    for v in f.used_vars():
        img = d.images.get(v)
        if img is None:
            raise KeyError(f"derivation has no image for variable {v}")
        if img.is_zero():
            continue
        df = f.partial(v)
        if not df.is_zero():
            out = out + df * img
    return out


def lie_bracket(d: PolyDerivation, e: PolyDerivation) -> PolyDerivation:
    """[d, e] = d∘e - e∘d, again a derivation of the same ring."""
    variables = set(d.images) | set(e.images)
    images = {}
    for v in variables:
        ev = e.images.get(v, RationalFunction.const(0))
        dv = d.images.get(v, RationalFunction.const(0))
        images[v] = apply_derivation(d, ev) - apply_derivation(e, dv)
    return PolyDerivation(images)


def linear_combination(a1, d: PolyDerivation, a2, e: PolyDerivation) -> PolyDerivation:
    """a1*d + a2*e with rational-function scalars."""
    a1 = _coerce_rf(a1)
    a2 = _coerce_rf(a2)
    variables = set(d.images) | set(e.images)
    zero = RationalFunction.const(0)
    return PolyDerivation({v: a1 * d.images.get(v, zero) + a2 * e.images.get(v, zero)
                           for v in variables})


# --------------------------------------------------------------------------
# matrices of rational functions (small, dense)
# --------------------------------------------------------------------------

def mat_solve(A, B):
    """Solve A X = B over the rational-function field (A square).

    Raises SingularJacobian when A is singular as a symbolic matrix.
    """
    n = len(A)
    A = [row[:] for row in A]
    B = [row[:] for row in B]
    m = len(B[0])
    for col in range(n):
        pivot = None
        for r in range(col, n):
            if not A[r][col].is_zero():
                pivot = r
                break
        if pivot is None:
            raise SingularJacobian("coefficient matrix is identically singular")
        A[col], A[pivot] = A[pivot], A[col]
        B[col], B[pivot] = B[pivot], B[col]
        inv = RationalFunction.const(1) / A[col][col]
        A[col] = [x * inv for x in A[col]]
        B[col] = [x * inv for x in B[col]]
        for r in range(n):
            if r != col and not A[r][col].is_zero():
                factor = A[r][col]
                A[r] = [x - factor * y for x, y in zip(A[r], A[col])]
                B[r] = [x - factor * y for x, y in zip(B[r], B[col])]
    return [[B[r][c] for c in range(m)] for r in range(n)]


def implicit_delta(fs, x_vars, y_vars):
    """Jacobian of the implicit map y(x) defined by the system fs = 0.

    fs is a list of rational functions in the x and y variables with
    len(fs) == len(y_vars).  Returns the matrix J with
    df/dx + (df/dy) J = 0, valid on the locus where det(df/dy) != 0.
    """
    n = len(y_vars)
    if len(fs) != n:
        raise ValueError("need as many equations as dependent variables")
    fs = [_coerce_rf(f) for f in fs]
    dfy = [[f.partial(y) for y in y_vars] for f in fs]
    dfx = [[-f.partial(x) for x in x_vars] for f in fs]
    return mat_solve(dfy, dfx)
