"""Finitary matroids, quasi-endomorphisms and the jet-closure rank.

Three rank oracles: an explicit table oracle (validated against the
matroid axioms on construction), a linear-algebra oracle over Q, and an
algebraic-dependence oracle where rank is the Jacobian rank over the
fraction field.  An ``EndoSystem`` couples an oracle with a map of the
ground universe; the jet machinery computes bounded-depth approximations
of the induced closure operator and its limit rank.

Jacobian ranks are computed by exact evaluation at random rational
points with retries (a wrong answer needs a measure-zero hit five times
in a row); pass ``exact=True`` for symbolic elimination instead.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .derivations import PolyDerivation, apply_derivation
from .errors import (DenominatorVanishes, MonotonicityViolation,
                     NonCommutingDerivations, UnknownElement)
from .poly import RationalFunction, _coerce_rf
from .theta import enumerate_theta, theta_key


def _frac_rank(rows) -> int:
    """Rank of a matrix with Fraction entries by Gaussian elimination."""
    rows = [list(r) for r in rows]
    if not rows:
        return 0
    ncols = len(rows[0])
    rank = 0
    col = 0
    r = 0
    while r < len(rows) and col < ncols:
        pivot = None
        for i in range(r, len(rows)):
            if rows[i][col] != 0:
                pivot = i
                break
        if pivot is None:
            col += 1
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        pv = rows[r][col]
        for i in range(r + 1, len(rows)):
            if rows[i][col] != 0:
                factor = rows[i][col] / pv
                rows[i] = [a - factor * b for a, b in zip(rows[i], rows[r])]
        r += 1
        col += 1
        rank += 1
    return rank


def _symbolic_rank(rows) -> int:
    """Rank of a matrix of RationalFunction entries, exact elimination."""
    rows = [list(r) for r in rows]
    if not rows:
        return 0
    ncols = len(rows[0])
    rank = 0
    col = 0
    r = 0
    while r < len(rows) and col < ncols:
        pivot = None
        for i in range(r, len(rows)):
            if not rows[i][col].is_zero():
                pivot = i
                break
        if pivot is None:
            col += 1
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        pv = rows[r][col]
        for i in range(r + 1, len(rows)):
            if not rows[i][col].is_zero():
                factor = rows[i][col] / pv
                rows[i] = [a - factor * b for a, b in zip(rows[i], rows[r])]
        r += 1
        col += 1
        rank += 1
    return rank


class LinearMatroid:
    """Ground universe Q^dim; rank is relative dimension of spans."""

    def __init__(self, dim: int):
        self.dim = dim

    def _check(self, vecs):
        for v in vecs:
            if len(v) != self.dim:
                raise UnknownElement(f"vector {v} does not live in Q^{self.dim}")

    def rank(self, A, B=()) -> int:
        A, B = list(A), list(B)
        self._check(A)
        self._check(B)
        rows_b = [tuple(Fraction(x) for x in v) for v in B]
        rows_ab = rows_b + [tuple(Fraction(x) for x in v) for v in A]
        return _frac_rank(rows_ab) - _frac_rank(rows_b)


class AlgebraicMatroid:
    """Elements are rational functions of ambient indeterminates.

    rank(A|B) is the Jacobian rank of A over B in the fraction field,
    i.e. the transcendence-degree analogue at desk scale.
    """

    def __init__(self, ambient_vars, exact=False, seed=20260810, retries=5):
        self.ambient = tuple(ambient_vars)
        self.exact = exact
        self.retries = retries
        self._rng = random.Random(seed)

    def _check(self, fs):
        allowed = set(self.ambient)
        for f in fs:
            if not f.used_vars() <= allowed:
                raise UnknownElement(f"element {f!r} uses variables outside the ambient ring")

    def _gradient(self, f: RationalFunction):
        return [f.partial(v) for v in self.ambient]

    def _rank_rows(self, rows) -> int:
        if not rows:
            return 0
        if self.exact:
            return _symbolic_rank(rows)
        best = 0
        full = min(len(rows), len(self.ambient))
        attempts = 0
        samples = 0
        while samples < self.retries and attempts < 20 * self.retries:
            attempts += 1
            point = {v: Fraction(self._rng.randint(-50, 50), self._rng.randint(1, 7))
                     for v in self.ambient}
            try:
                numeric = [[entry.eval(point) for entry in row] for row in rows]
            except DenominatorVanishes:
                continue
            samples += 1
            best = max(best, _frac_rank(numeric))
            if best == full:
                break
        return best

    def rank(self, A, B=()) -> int:
        A, B = [_coerce_rf(a) for a in A], [_coerce_rf(b) for b in B]
        self._check(A)
        self._check(B)
        rows_b = [self._gradient(b) for b in B]
        rows_ab = rows_b + [self._gradient(a) for a in A]
        return self._rank_rows(rows_ab) - self._rank_rows(rows_b)


class TableMatroid:
    """Explicit rank oracle on a small indexed ground set.

    The absolute rank function is validated on construction: monotone,
    submodular, bounded by cardinality and normalized at the empty set.
    """

    def __init__(self, ground, rank_of_set):
        self.ground = tuple(ground)
        self._rank = {frozenset(k): v for k, v in rank_of_set.items()}
        self._validate()

    def _validate(self):
        universe = set(self.ground)
        subsets = [frozenset(c) for n in range(len(self.ground) + 1)
                   for c in itertools.combinations(self.ground, n)]
        for s in subsets:
            if s not in self._rank:
                raise ValueError(f"rank table is missing {set(s) or '{}'}")
        if self._rank[frozenset()] != 0:
            raise ValueError("rank of the empty set must be 0")
        for s in subsets:
            if not 0 <= self._rank[s] <= len(s):
                raise ValueError(f"rank out of range on {set(s)}")
            for x in universe - s:
                bigger = s | {x}
                if not self._rank[s] <= self._rank[bigger] <= self._rank[s] + 1:
                    raise ValueError(f"rank not unit-increasing at {set(s)} + {x}")
        for s in subsets:
            for t in subsets:
                if self._rank[s | t] + self._rank[s & t] > self._rank[s] + self._rank[t]:
                    raise ValueError(f"rank not submodular at {set(s)}, {set(t)}")

    def rank(self, A, B=()) -> int:
        A, B = set(A), set(B)
        for x in A | B:
            if x not in self.ground:
                raise UnknownElement(f"{x!r} is not in the ground set")
        return self._rank[frozenset(A | B)] - self._rank[frozenset(B)]


def linear_map(matrix):
    """Matrix rows -> a map on vectors for use as an EndoSystem delta."""
    rows = [tuple(Fraction(x) for x in row) for row in matrix]

    def apply(v):
        return tuple(sum(r[j] * v[j] for j in range(len(v))) for r in rows)

    return apply


def derivation_map(d: PolyDerivation):
    def apply(f):
        return apply_derivation(d, _coerce_rf(f))

    return apply


@dataclass
class EndoSystem:
    """A rank oracle together with a self-map of its ground universe."""

    matroid: object
    delta: object  # callable element -> element

    def apply(self, x):
        return self.delta(x)

    def jets(self, x, k):
        """(x, dx, ..., d^k x); k = -1 gives the empty tuple."""
        out = []
        cur = x
        for _ in range(k + 1):
            out.append(cur)
            cur = self.delta(cur)
        return tuple(out)

    def closure_fn(self, k_max):
        def contains(a, B):
            return in_delta_closure(self, a, B, k_max)

        return contains


def check_quasi_endomorphism(system: EndoSystem, universe):
    """Exhaustive check of rk(dA | A B dB) <= rk(A|B) over a finite universe.

    Returns (True, None) or (False, (A, B)) with the first violating pair.
    """
    universe = list(universe)
    if len(universe) > 12:
        raise ValueError("exhaustive check limited to 12 elements")
    subsets = [tuple(c) for n in range(len(universe) + 1)
               for c in itertools.combinations(universe, n)]
    m = system.matroid
    for A in subsets:
        dA = [system.apply(x) for x in A]
        for B in subsets:
            dB = [system.apply(x) for x in B]
            lhs = m.rank(dA, list(A) + list(B) + dB)
            rhs = m.rank(A, B)
            if lhs > rhs:
                return False, (set(A), set(B))
    return True, None


@dataclass
class DeltaRankResult:
    value: int
    stabilized: bool
    increments: list = field(default_factory=list)


def delta_rank(system: EndoSystem, A, B, k_max: int, window: int = 3) -> DeltaRankResult:
    """Bounded-depth approximation of the jet-closure rank of A over B.

    Computes the increments rk(d^k A | jets^(k-1)(A) B) for k = 0..k_max
    (B is replaced by its jet closure to depth k_max).  The increments
    must be nonincreasing; once computed, the trailing constant run
    decides stabilization: if it is at least ``window`` long the run's
    value is reported with stabilized=True, else the value at k_max with
    stabilized=False.  The flag is heuristic and one-sided: the true
    limit can lie below a reported plateau.
    """
    if not (k_max >= window >= 1):
        raise ValueError("need k_max >= window >= 1")
    A = list(A)
    m = system.matroid
    b_closed = []
    for b in B:
        b_closed.extend(system.jets(b, k_max))
    jets_a = {x: system.jets(x, k_max) for x in A}

    increments = [m.rank(A, b_closed)]
    for k in range(1, k_max + 1):
        context = [v for x in A for v in jets_a[x][:k]] + b_closed
        inc = m.rank([jets_a[x][k] for x in A], context)
        if inc > increments[-1]:
            raise MonotonicityViolation(
                f"rank increment rose from {increments[-1]} to {inc} at depth {k}")
        increments.append(inc)
    run = 1
    while run < len(increments) and increments[-run - 1] == increments[-1]:
        run += 1
    return DeltaRankResult(increments[-1], run >= window, increments)


def in_delta_closure(system: EndoSystem, a, B, k_max: int) -> bool:
    """Bounded-depth membership in the jet closure of B.

    True when some n <= k_max puts d^n a in the closure of the earlier
    jets of a and the depth-k_max jets of B; False only means "not
    detected up to k_max".
    """
    m = system.matroid
    b_jets = []
    for b in B:
        b_jets.extend(system.jets(b, k_max))
    jets_a = system.jets(a, k_max)
    for n in range(k_max + 1):
        if m.rank([jets_a[n]], list(jets_a[:n]) + b_jets) == 0:
            return True
    return False


def check_exchange(closure, universe):
    """Exchange property of a closure predicate over a finite universe.

    closure(a, S) decides membership of a in the closure of the set S.
    Returns (True, None) or (False, (a, b, B)) for the first violation of
    a in cl(B+b) \\ cl(B)  =>  b in cl(B+a).
    """
    universe = list(universe)
    if len(universe) > 8:
        raise ValueError("exhaustive check limited to 8 elements")
    subsets = [frozenset(c) for n in range(len(universe) + 1)
               for c in itertools.combinations(universe, n)]
    for B in subsets:
        for a in universe:
            for b in universe:
                if b in B or a == b:
                    continue
                if closure(a, B | {b}) and not closure(a, B):
                    if not closure(b, B | {a}):
                        return False, (a, b, set(B))
    return True, None


def multi_delta_independent(matroid: AlgebraicMatroid, derivations, a, B, ord_max: int):
    """Search for a bounded witness of dependence under several derivations.

    Checks that the tuple (theta a : ord(theta) <= ord_max) has full rank
    over the corresponding jets of B.  Returns (True, None) when no
    deficient operator set J is found up to the bound, otherwise
    (False, J) with a minimal prefix witness.  The derivations must
    commute on the ambient generators.
    """
    derivations = list(derivations)
    p = len(derivations)
    for i in range(p):
        for j in range(i + 1, p):
            di, dj = derivations[i], derivations[j]
            for z in set(di.images) | set(dj.images):
                zi = di.images.get(z, RationalFunction.const(0))
                zj = dj.images.get(z, RationalFunction.const(0))
                if apply_derivation(di, zj) != apply_derivation(dj, zi):
                    raise NonCommutingDerivations(
                        f"derivations {i + 1} and {j + 1} disagree on {z}")

    a = _coerce_rf(a)
    thetas = list(enumerate_theta(p, ord_max))

    def theta_jets(x):
        values = {thetas[0]: x}
        for theta in thetas[1:]:
            i = next(k for k, e in enumerate(theta) if e > 0)
            prev = theta[:i] + (theta[i] - 1,) + theta[i + 1:]
            values[theta] = apply_derivation(derivations[i], values[prev])
        return values

    a_jets = theta_jets(a)
    context = []
    for b in B:
        context.extend(theta_jets(_coerce_rf(b)).values())

    J = []
    for theta in sorted(thetas, key=theta_key):
        J.append(theta)
        if matroid.rank([a_jets[t] for t in J], context) < len(J):
            return False, list(J)
    return True, None
