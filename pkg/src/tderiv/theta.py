"""The free abelian monoid of derivative operators.

An operator d1^e1 ... dp^ep is a plain exponent vector (tuple of
non-negative ints).  Two orders matter: the total order < given by the
lexicographic comparison of (ord, e1, ..., ep), which has order type
omega, and the divisibility order given by componentwise <=.  The
divisibility order is a lattice under componentwise max/min.
"""

from __future__ import annotations

from itertools import combinations_with_replacement

from .errors import IdentityInGenerators

Theta = tuple  # exponent vector


def identity(p: int) -> Theta:
    return (0,) * p


def ord_of(theta: Theta) -> int:
    return sum(theta)


def theta_key(theta: Theta):
    """The (ord, exponents) tuple that induces the total order."""
    return (sum(theta),) + tuple(theta)


def theta_mul(a: Theta, b: Theta) -> Theta:
    if len(a) != len(b):
        raise ValueError("operator arity mismatch")
    return tuple(x + y for x, y in zip(a, b))


def theta_cmp(a: Theta, b: Theta) -> int:
    """-1, 0 or 1 comparing in the total order."""
    ka, kb = theta_key(a), theta_key(b)
    return -1 if ka < kb else (0 if ka == kb else 1)


def theta_divides(a: Theta, b: Theta) -> bool:
    """Whether a divides b, i.e. some x has x*a = b (componentwise <=)."""
    if len(a) != len(b):
        raise ValueError("operator arity mismatch")
    return all(x <= y for x, y in zip(a, b))


def theta_join(a: Theta, b: Theta) -> Theta:
    return tuple(max(x, y) for x, y in zip(a, b))


def theta_meet(a: Theta, b: Theta) -> Theta:
    return tuple(min(x, y) for x, y in zip(a, b))


def join_all(thetas) -> Theta:
    thetas = list(thetas)
    out = thetas[0]
    for t in thetas[1:]:
        out = theta_join(out, t)
    return out


def predecessors(theta: Theta) -> set:
    """Immediate divisibility predecessors: one positive coordinate down."""
    out = set()
    for i, e in enumerate(theta):
        if e > 0:
            out.add(theta[:i] + (e - 1,) + theta[i + 1:])
    return out


def successor_index(theta: Theta, phi: Theta) -> int:
    """The 1-based derivation index i with phi = d_i * theta, or 0."""
    diff = [y - x for x, y in zip(theta, phi)]
    if sum(diff) != 1 or any(d < 0 for d in diff):
        return 0
    return diff.index(1) + 1


def enumerate_theta(p: int, max_ord: int):
    """All operators of order <= max_ord in strictly increasing total order."""
    for n in range(max_ord + 1):
        block = []
        for combo in combinations_with_replacement(range(p), n):
            e = [0] * p
            for i in combo:
                e[i] += 1
            block.append(tuple(e))
        block.sort(key=theta_key)
        yield from block


def dickson_min(generators) -> "Antichain":
    """Divisibility-minimal elements of the upward closure of the input."""
    gens = list(generators)
    if not gens:
        raise ValueError("need at least one generator")
    p = len(gens[0])
    if any(g == identity(p) for g in gens):
        raise IdentityInGenerators("the identity operator generates everything")
    minimal = []
    for g in sorted(set(gens), key=theta_key):
        if not any(theta_divides(m, g) for m in minimal):
            minimal.append(g)
    return Antichain(minimal)


class Antichain:
    """A finite set of pairwise divisibility-incomparable operators (no id)."""

    __slots__ = ("elements", "p")

    def __init__(self, elements):
        elems = sorted(set(tuple(e) for e in elements), key=theta_key)
        if elems:
            p = len(elems[0])
            if any(len(e) != p for e in elems):
                raise ValueError("mixed operator arity")
            if identity(p) in elems:
                raise IdentityInGenerators("antichain may not contain the identity")
            for i, a in enumerate(elems):
                for b in elems[i + 1:]:
                    if theta_divides(a, b) or theta_divides(b, a):
                        raise ValueError(f"not an antichain: {a} divides or is divided by {b}")
            self.p = p
        else:
            self.p = None
        self.elements = tuple(elems)

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    def __contains__(self, theta):
        return tuple(theta) in self.elements

    def __eq__(self, other):
        if isinstance(other, Antichain):
            return self.elements == other.elements
        return NotImplemented

    def __hash__(self):
        return hash(self.elements)

    def __repr__(self):
        return f"Antichain({list(self.elements)})"


class ThetaPartition:
    """The split of the operator monoid induced by an antichain P.

    B is the upward closure of P under divisibility; I is the complement.
    Both are infinite, so membership is intensional.
    """

    __slots__ = ("P", "p")

    def __init__(self, P: Antichain, p=None):
        self.P = P
        if P.p is not None:
            self.p = P.p
        elif p is not None:
            self.p = p
        else:
            raise ValueError("arity needed for an empty antichain")

    def in_bounded(self, theta: Theta) -> bool:
        """Membership in B, the upward closure of P."""
        return any(theta_divides(b, theta) for b in self.P)

    def in_free(self, theta: Theta) -> bool:
        """Membership in I, the complement of B (downward closed)."""
        return not self.in_bounded(theta)

    def free_slice(self, max_ord: int):
        return [t for t in enumerate_theta(self.p, max_ord) if self.in_free(t)]

    def bounded_slice(self, max_ord: int):
        return [t for t in enumerate_theta(self.p, max_ord) if self.in_bounded(t)]


def render_theta(theta: Theta) -> str:
    return "[" + ",".join(str(e) for e in theta) + "]"


def parse_theta(text: str) -> Theta:
    text = text.strip()
    if not (text.startswith("[") and text.endswith("]")):
        raise ValueError(f"expected [e1,...,ep], got {text!r}")
    body = text[1:-1].strip()
    if not body:
        raise ValueError("empty operator")
    return tuple(int(x) for x in body.split(","))
