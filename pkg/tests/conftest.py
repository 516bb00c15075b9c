"""Shared random generators for the exact-arithmetic test suite."""

from __future__ import annotations

import random
from fractions import Fraction

from tderiv import terms as T
from tderiv.poly import MultiPoly, RationalFunction
from tderiv.series import TruncatedSeries


def rand_fraction(rng: random.Random, height=6, nonzero=False) -> Fraction:
    while True:
        f = Fraction(rng.randint(-height, height), rng.randint(1, height))
        if not nonzero or f != 0:
            return f


def rand_poly(rng: random.Random, variables, max_deg=3, max_terms=4,
              nonzero=False) -> MultiPoly:
    variables = list(variables)
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        exps = [0] * len(variables)
        budget = rng.randint(0, max_deg)
        for _ in range(budget):
            exps[rng.randrange(len(variables))] += 1
        c = rand_fraction(rng, nonzero=True)
        key = tuple(exps)
        terms[key] = terms.get(key, Fraction(0)) + c
    p = MultiPoly.from_terms(tuple(variables), terms)
    if nonzero and p.is_zero():
        return MultiPoly.const(1) + p
    return p


def rand_rf(rng: random.Random, variables, max_deg=3, den_deg=1) -> RationalFunction:
    num = rand_poly(rng, variables, max_deg)
    if den_deg == 0 or rng.random() < 0.5:
        den = MultiPoly.const(1)
    else:
        den = rand_poly(rng, variables, den_deg, max_terms=2, nonzero=True)
    return RationalFunction(num, den)


def rand_unit_series(rng: random.Random, p=1, order=8) -> TruncatedSeries:
    terms = {}
    from itertools import combinations_with_replacement
    for n in range(order + 1):
        for combo in combinations_with_replacement(range(p), n):
            if rng.random() < 0.5:
                e = [0] * p
                for i in combo:
                    e[i] += 1
                terms[tuple(e)] = rand_fraction(rng)
    terms[(0,) * p] = rand_fraction(rng, nonzero=True)
    return TruncatedSeries(p, order, terms)


def rand_diff_term(rng: random.Random, variables, depth=4, p=1):
    """Random term AST over the grammar, derivations bounded by p."""
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.4:
            return T.Const(abs(rand_fraction(rng)))
        return T.Var(rng.choice(variables))
    kind = rng.choice(["add", "sub", "mul", "div", "neg", "pow", "apply", "apply"])
    if kind == "add":
        return T.Add(rand_diff_term(rng, variables, depth - 1, p),
                     rand_diff_term(rng, variables, depth - 1, p))
    if kind == "sub":
        return T.Sub(rand_diff_term(rng, variables, depth - 1, p),
                     rand_diff_term(rng, variables, depth - 1, p))
    if kind == "mul":
        return T.Mul(rand_diff_term(rng, variables, depth - 1, p),
                     rand_diff_term(rng, variables, depth - 1, p))
    if kind == "div":
        return T.Div(rand_diff_term(rng, variables, depth - 1, p),
                     rand_diff_term(rng, variables, depth - 1, p))
    if kind == "neg":
        return T.Neg(rand_diff_term(rng, variables, depth - 1, p))
    if kind == "pow":
        return T.Pow(rand_diff_term(rng, variables, depth - 1, p), rng.randint(0, 3))
    return T.Apply(rng.randint(1, p), rand_diff_term(rng, variables, depth - 1, p))
