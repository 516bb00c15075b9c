"""Batch command-line front end.

Every subcommand reads inline arguments or a file (-f), prints a human
rendering by default and a schema-stable JSON object with --json (see
docs/cli-schema.json).  Exit codes: 0 success, 1 parse/validation error,
2 mathematical failure.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from fractions import Fraction

from . import codf, coherence, jets, matroid, models, sturm
from . import terms as T
from .derivations import PolyDerivation, lie_bracket, render_diffvar
from .errors import InputError, MathError, ParseError, TderivError
from .poly import MultiPoly, RationalFunction, render_rational
from .series import TruncatedSeries, render_series
from .theta import (dickson_min, enumerate_theta, parse_theta, predecessors,
                    render_theta, theta_cmp, theta_join, theta_meet, theta_key)


def _frac(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _read_input(args) -> str:
    if args.file:
        with open(args.file, "r", encoding="utf-8") as fh:
            return fh.read()
    if getattr(args, "input", None) is None:
        raise InputError("missing input: pass a string or -f FILE")
    return args.input


def _emit(args, human: str, payload: dict):
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(human)


# -- rewrite -----------------------------------------------------------------

_CMP_RE = re.compile(r"(!=|<=|>=|=|<|>)")


def cmd_rewrite(args):
    src = _read_input(args)
    if _CMP_RE.search(src):
        phi = T.parse_formula(src)
        jf, per_var = jets.rewrite_formula(phi)
        human = f"{jf.render()}, m={jf.depth()}"
        _emit(args, human, {
            "kind": "formula",
            "normal_form": jf.render(),
            "m": jf.depth(),
            "m_per_var": {k: v for k, v in sorted(per_var.items())},
        })
    else:
        term = T.parse_term(src)
        jt = jets.rewrite_term(term)
        human = f"{jt.render()}, m={jt.depth()}"
        _emit(args, human, {
            "kind": "term",
            "normal_form": jt.render(),
            "m": jt.depth(),
            "m_per_var": {k: v for k, v in sorted(jt.depth_per_var().items())},
        })


# -- lie ----------------------------------------------------------------------

def _parse_derivation(spec: str) -> PolyDerivation:
    images = {}
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        var, sep, rhs = part.partition("=")
        if not sep:
            raise InputError(f"derivation image needs 'var=term', got {part!r}")
        ast = T.parse_term(rhs.strip())
        images[var.strip()] = _plain_rf(ast)
    if not images:
        raise InputError("empty derivation specification")
    return PolyDerivation(images)


def _plain_rf(t) -> RationalFunction:
    if isinstance(t, T.Const):
        return RationalFunction.const(t.value)
    if isinstance(t, T.Var):
        return RationalFunction.var(t.name)
    if isinstance(t, T.Add):
        return _plain_rf(t.left) + _plain_rf(t.right)
    if isinstance(t, T.Sub):
        return _plain_rf(t.left) - _plain_rf(t.right)
    if isinstance(t, T.Mul):
        return _plain_rf(t.left) * _plain_rf(t.right)
    if isinstance(t, T.Div):
        return _plain_rf(t.left) / _plain_rf(t.right)
    if isinstance(t, T.Neg):
        return -_plain_rf(t.arg)
    if isinstance(t, T.Pow):
        return _plain_rf(t.base) ** t.exp
    raise InputError("derivation applications are not allowed in this context")


def cmd_lie(args):
    d = _parse_derivation(args.first)
    e = _parse_derivation(args.second)
    br = lie_bracket(d, e)
    items = sorted(br.images.items(), key=lambda kv: str(kv[0]))
    human = "; ".join(f"{v} -> {render_rational(img)}" for v, img in items)
    _emit(args, human, {
        "images": {str(v): render_rational(img) for v, img in items},
    })


# -- coherence -----------------------------------------------------------------

def cmd_coherence(args):
    cond, init = coherence.parse_condition(_read_input(args))
    if args.mode == "check":
        report = coherence.is_coherent(cond)
        if report.coherent:
            if args.ord is not None:
                ok, _conflict = coherence.strong_coherence_probe(cond, args.ord)
                human = f"coherent (probed to order {args.ord}: {'ok' if ok else 'FAILED'})"
                _emit(args, human, {"coherent": True, "conflict": None,
                                    "probe_order": args.ord, "probe_ok": ok})
            else:
                _emit(args, "coherent", {"coherent": True, "conflict": None})
            return
        theta, phi1, phi2, diff = report.conflict
        g1, g2 = report.conflict_values
        human = (f"conflict at {render_theta(theta)}: "
                 f"via {render_theta(phi1)} gives {render_rational(g1, render_diffvar)}, "
                 f"via {render_theta(phi2)} gives {render_rational(g2, render_diffvar)}")
        _emit(args, human, {
            "coherent": False,
            "conflict": {
                "theta": list(theta),
                "via": [
                    {"route": list(phi1), "value": render_rational(g1, render_diffvar)},
                    {"route": list(phi2), "value": render_rational(g2, render_diffvar)},
                ],
                "difference": render_rational(diff, render_diffvar),
            },
        })
        return
    # solve
    N = args.deg
    a = coherence.solve_condition_series(cond, init, N)
    lines = []
    coeffs = []
    for theta in enumerate_theta(cond.p, N):
        c = a.coeff(theta)
        coeffs.append({"exps": list(theta), "value": _frac(c)})
        lines.append(f"{render_theta(theta)} = {_frac(c)}")
    _emit(args, "\n".join(lines), {"order": N, "p": cond.p, "coefficients": coeffs})


# -- singer ----------------------------------------------------------------------

def cmd_singer(args):
    inst = codf.parse_singer(_read_input(args))
    if args.mode == "check":
        ok, problems = codf.check_singer_premise(inst)
        human = "premise holds" if ok else "premise fails: " + "; ".join(problems)
        _emit(args, human, {"ok": ok, "problems": problems})
        return
    b = codf.solve_singer_formal(inst, args.deg)
    coeffs = [b.coeff((k,)) for k in range(args.deg + 1)]
    human = ", ".join(_frac(c) for c in coeffs)
    _emit(args, human, {"deg": args.deg, "coefficients": [_frac(c) for c in coeffs]})


# -- rank -------------------------------------------------------------------------

def _parse_rank_file(text: str, seed, exact):
    dim = None
    ambient = None
    elems = {}
    matrix = None
    deriv_images = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, rhs = line.partition("=")
        if not sep:
            raise ParseError(f"expected 'key = value', got {line!r}", lineno, 1)
        key = key.strip()
        rhs = rhs.strip()
        if key == "dim":
            dim = int(rhs)
        elif key == "ambient":
            ambient = tuple(v.strip() for v in rhs.split(","))
        elif key.startswith("elem "):
            name = key[len("elem "):].strip()
            if ambient is not None:
                elems[name] = _plain_rf(T.parse_term(rhs))
            else:
                elems[name] = tuple(Fraction(x.strip()) for x in rhs.split(","))
        elif key == "map":
            matrix = [[Fraction(x.strip()) for x in row.split(",")]
                      for row in rhs.split(";")]
        elif key.startswith("delta "):
            var = key[len("delta "):].strip()
            deriv_images[var] = _plain_rf(T.parse_term(rhs))
        else:
            raise ParseError(f"unknown key {key!r}", lineno, 1)
    if ambient is not None:
        m = matroid.AlgebraicMatroid(ambient, exact=exact, seed=seed)
        delta = None
        if deriv_images:
            missing = set(ambient) - set(deriv_images)
            if missing:
                raise ParseError(f"delta images missing for {sorted(missing)}")
            delta = matroid.derivation_map(PolyDerivation(deriv_images))
        return m, elems, delta
    if dim is None:
        raise ParseError("rank file needs 'dim = n' or 'ambient = vars'")
    for name, vec in elems.items():
        if len(vec) != dim:
            raise ParseError(f"element {name} has {len(vec)} coordinates, expected {dim}")
    m = matroid.LinearMatroid(dim)
    delta = matroid.linear_map(matrix) if matrix is not None else None
    return m, elems, delta


def _named(elems, csv):
    if not csv:
        return []
    out = []
    for name in csv.split(","):
        name = name.strip()
        if name not in elems:
            raise InputError(f"unknown element {name!r}")
        out.append(elems[name])
    return out


def cmd_rank(args):
    m, elems, delta = _parse_rank_file(_read_input(args), args.seed, args.exact)
    A = _named(elems, args.A)
    B = _named(elems, args.B)
    if args.delta_rank:
        if delta is None:
            raise InputError("delta-rank needs a 'map =' or 'delta var =' specification")
        system = matroid.EndoSystem(m, delta)
        res = matroid.delta_rank(system, A, B, k_max=args.kmax, window=args.window)
        human = (f"increments: {', '.join(str(i) for i in res.increments)}\n"
                 f"value = {res.value}, stabilized = {'true' if res.stabilized else 'false'}")
        _emit(args, human, {
            "increments": res.increments,
            "value": res.value,
            "stabilized": res.stabilized,
        })
        return
    if args.quasi or args.exchange:
        if delta is None:
            raise InputError("this check needs a 'map =' or 'delta var =' specification")
        system = matroid.EndoSystem(m, delta)
        universe = list(elems.values())
        payload = {}
        lines = []
        if args.quasi:
            ok, witness = matroid.check_quasi_endomorphism(system, universe)
            lines.append(f"quasi-endomorphism: {'true' if ok else 'false'}")
            payload["quasi_endomorphism"] = ok
        if args.exchange:
            ok, witness = matroid.check_exchange(system.closure_fn(args.kmax), universe)
            lines.append(f"exchange: {'true' if ok else 'false'}")
            payload["exchange"] = ok
        _emit(args, "\n".join(lines), payload)
        return
    r = m.rank(A, B)
    _emit(args, f"rank = {r}", {"rank": r})


# -- theta ---------------------------------------------------------------------------

def cmd_theta(args):
    op = args.op
    if op == "min":
        gens = [parse_theta(tok) for tok in args.args[0].split()]
        try:
            result = dickson_min(gens)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        human = " ".join(render_theta(t) for t in result)
        _emit(args, human, {"result": [list(t) for t in result]})
    elif op in ("cmp", "join", "meet"):
        if len(args.args) != 2:
            raise InputError(f"theta {op} takes two operators")
        a, b = parse_theta(args.args[0]), parse_theta(args.args[1])
        if len(a) != len(b):
            raise InputError("operator arity mismatch")
        if op == "cmp":
            c = theta_cmp(a, b)
            name = {(-1): "LT", 0: "EQ", 1: "GT"}[c]
            _emit(args, name, {"result": name})
        else:
            t = theta_join(a, b) if op == "join" else theta_meet(a, b)
            _emit(args, render_theta(t), {"result": list(t)})
    elif op == "pred":
        theta = parse_theta(args.args[0])
        preds = sorted(predecessors(theta), key=theta_key)
        human = " ".join(render_theta(t) for t in preds) if preds else "(none)"
        _emit(args, human, {"result": [list(t) for t in preds]})
    elif op == "enum":
        thetas = list(enumerate_theta(args.p, args.ord))
        human = " ".join(render_theta(t) for t in thetas)
        _emit(args, human, {"result": [list(t) for t in thetas]})
    else:
        raise InputError(f"unknown theta operation {op!r}")


# -- delta-dim -------------------------------------------------------------------------

def cmd_delta_dim(args):
    src = _read_input(args)
    rows = []
    for chunk in src.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            rows.append(tuple(int(x.strip()) for x in chunk.split(",")))
        except ValueError as exc:
            raise InputError(f"bad cell-type row {chunk!r}") from exc
    if not rows:
        raise InputError("no cell-type rows given")
    try:
        bold, dim = codf.delta_type(rows)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    human = f"type ({','.join(str(b) for b in bold)}), dim {dim}"
    _emit(args, human, {"type": list(bold), "dim": dim})


# -- decide1 -----------------------------------------------------------------------------

def cmd_decide1(args):
    phi = T.parse_formula(_read_input(args))
    constraints = []

    def collect(node):
        if isinstance(node, T.And):
            collect(node.left)
            collect(node.right)
        elif isinstance(node, T.Atom):
            constraints.append(node)
        else:
            raise InputError("decide1 takes a conjunction of sign atoms")

    collect(phi)
    system = []
    for atom in constraints:
        diff = T.Sub(atom.left, atom.right)
        rf = _plain_rf(diff)
        if not rf.is_poly():
            raise InputError("decide1 atoms must be polynomial")
        op = atom.op
        if op in ("<=", ">="):
            raise InputError("decide1 supports strict signs and equations only")
        system.append((rf.num, op))
    variables = set()
    for poly, _ in system:
        variables |= poly.used_vars()
    if len(variables) > 1:
        raise InputError(f"decide1 is univariate; found variables {sorted(variables)}")
    decision = sturm.sturm_decide(system)
    if not decision.sat:
        _emit(args, "UNSAT", {"sat": False, "witness": None, "interval": None})
        return
    human = f"SAT witness={_frac(decision.witness)}"
    payload = {"sat": True, "witness": _frac(decision.witness), "interval": None}
    if decision.interval:
        lo, hi = decision.interval
        human += f" interval=({_frac(lo)},{_frac(hi)})"
        payload["interval"] = [_frac(lo), _frac(hi)]
    _emit(args, human, payload)


# -- eval ---------------------------------------------------------------------------------

_SERIES_RE = re.compile(r"^series\((\d+)\s*;(.*)\)$")
_SERIES2_RE = re.compile(r"^series2\((\d+)\s*;(.*)\)$")


def _split_top(text: str, sep: str):
    """Split on sep at parenthesis depth zero."""
    parts = []
    depth = 0
    cur = []
    for ch in text:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return parts


def _parse_series_literal(text: str) -> TruncatedSeries:
    text = text.strip()
    m = _SERIES_RE.match(text)
    if m:
        order = int(m.group(1))
        coeffs = [Fraction(c.strip()) for c in m.group(2).split(",") if c.strip()]
        return TruncatedSeries(1, order, {(k,): c for k, c in enumerate(coeffs)})
    m = _SERIES2_RE.match(text)
    if m:
        order = int(m.group(1))
        body = m.group(2).strip()
        terms = {}
        entry_re = re.compile(r"\[\s*(\d+(?:\s*,\s*\d+)*)\s*\]\s*=\s*(-?\d+(?:/\d+)?)")
        matched = 0
        for em in entry_re.finditer(body):
            exps = tuple(int(x.strip()) for x in em.group(1).split(","))
            terms[exps] = Fraction(em.group(2))
            matched += 1
        if body and not matched:
            raise InputError(f"series2 entries look like [i,j]=c, got {body!r}")
        return TruncatedSeries(2, order, terms)
    raise InputError(f"bad series literal {text!r}")


def cmd_eval(args):
    src = _read_input(args)
    if args.germ:
        assignment = {}
        for part in args.germ.split(";"):
            part = part.strip()
            if not part:
                continue
            var, sep, rhs = part.partition("=")
            if not sep:
                raise InputError(f"germ assignment needs 'var=term', got {part!r}")
            assignment[var.strip()] = _plain_rf(T.parse_term(rhs.strip()))
        pt = models.GermPoint(assignment)
        phi = T.parse_formula(src)
        value = models.eval_formula(phi, pt)
        _emit(args, "true" if value else "false", {"value": value})
        return
    if not args.at:
        raise InputError("eval needs --at series assignments or --germ germs")
    assignment = {}
    for part in _split_top(args.at, ";"):
        part = part.strip()
        if not part:
            continue
        var, sep, rhs = part.partition("=")
        if not sep:
            raise InputError(f"series assignment needs 'var=series(...)', got {part!r}")
        assignment[var.strip()] = _parse_series_literal(rhs.strip())
    if not assignment:
        raise InputError("empty --at assignment")
    p = next(iter(assignment.values())).p
    order = min(s.order for s in assignment.values())
    pt = models.SeriesPoint(assignment, p, order)
    term = T.parse_term(src)
    result = models.eval_diff_term(term, pt)
    _emit(args, render_series(result), {
        "order": result.order,
        "p": result.p,
        "terms": [{"exps": list(e), "value": _frac(c)}
                  for e, c in sorted(result.terms.items(), key=lambda kv: (sum(kv[0]), kv[0]))],
    })


# -- witness-box -----------------------------------------------------------------------------

_INTERVAL_RE = re.compile(r"\(([^()]*)\)")


def cmd_witness_box(args):
    src = _read_input(args)
    box = []
    for m in _INTERVAL_RE.finditer(src):
        parts = m.group(1).split(",")
        if len(parts) != 2:
            raise InputError(f"intervals look like (lo,hi), got ({m.group(1)})")
        box.append((Fraction(parts[0].strip()), Fraction(parts[1].strip())))
    if not box:
        raise InputError("no intervals given")
    poly = codf.jet_box_witness(box)
    from .poly import render_poly
    human = render_poly(poly)
    coeffs = []
    for k in range(len(box)):
        if poly.vars:
            coeffs.append(_frac(poly.coeff((k,))))
        else:
            coeffs.append(_frac(poly.const_value() if k == 0 else Fraction(0)))
    _emit(args, human, {"poly": human, "coefficients": coeffs})


# -- wiring -----------------------------------------------------------------------------------

def build_parser():
    top = argparse.ArgumentParser(
        prog="tderiv",
        description="exact calculus for ordered differential fields")
    top.add_argument("--json", action="store_true", help="structured output")
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, with_input=True):
        if with_input:
            p.add_argument("input", nargs="?", help="inline input")
        p.add_argument("-f", "--file", help="read input from a file")
        p.add_argument("--json", action="store_true", help="structured output")
        p.add_argument("--seed", type=int, default=20260810,
                       help="seed for randomized evaluation points")

    p = sub.add_parser("rewrite", help="jet normal form of a term or formula")
    common(p)
    p.set_defaults(fn=cmd_rewrite)

    p = sub.add_parser("lie", help="Lie bracket of two derivations")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--json", action="store_true", help="structured output")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_lie)

    p = sub.add_parser("coherence", help="check or solve a condition")
    p.add_argument("mode", choices=["check", "solve"])
    common(p)
    p.add_argument("--deg", type=int, default=6, help="series truncation degree")
    p.add_argument("--ord", type=int, default=None,
                   help="additionally probe singletons to this order (check mode)")
    p.set_defaults(fn=cmd_coherence)

    p = sub.add_parser("singer", help="check or formally solve an axiom instance")
    p.add_argument("mode", choices=["check", "solve"])
    common(p)
    p.add_argument("--deg", type=int, default=6, help="series truncation degree")
    p.set_defaults(fn=cmd_singer)

    p = sub.add_parser("rank", help="matroid rank queries and jet-rank checks")
    common(p)
    p.add_argument("--A", default="", help="comma list of element names")
    p.add_argument("--B", default="", help="comma list of element names")
    p.add_argument("--delta-rank", action="store_true", dest="delta_rank")
    p.add_argument("--quasi", action="store_true",
                   help="check the quasi-endomorphism inequality over all elements")
    p.add_argument("--exchange", action="store_true",
                   help="check the exchange property over all elements")
    p.add_argument("--kmax", type=int, default=8)
    p.add_argument("--window", type=int, default=3)
    p.add_argument("--exact", action="store_true",
                   help="symbolic Jacobian ranks instead of random evaluation")
    p.set_defaults(fn=cmd_rank)

    p = sub.add_parser("theta", help="derivative-operator monoid operations")
    p.add_argument("op", choices=["min", "cmp", "join", "meet", "pred", "enum"])
    p.add_argument("args", nargs="*")
    p.add_argument("--p", type=int, default=2, help="number of derivations (enum)")
    p.add_argument("--ord", type=int, default=2, help="order bound (enum)")
    p.add_argument("--json", action="store_true", help="structured output")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_theta)

    p = sub.add_parser("delta-dim", help="type and dimension of a derivative cell")
    common(p)
    p.set_defaults(fn=cmd_delta_dim)

    p = sub.add_parser("decide1", help="decide a univariate sign system")
    common(p)
    p.set_defaults(fn=cmd_decide1)

    p = sub.add_parser("eval", help="evaluate a term in a series or germ model")
    common(p)
    p.add_argument("--at", help="semicolon list var=series(N; c0, c1, ...)")
    p.add_argument("--germ", help="semicolon list var=rational-function of s")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("witness-box", help="polynomial jet witness for a box")
    common(p)
    p.set_defaults(fn=cmd_witness_box)

    return top


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.fn(args)
        return 0
    except InputError as exc:
        _fail(args, exc, 1)
        return 1
    except MathError as exc:
        _fail(args, exc, 2)
        return 2
    except TderivError as exc:
        _fail(args, exc, 2)
        return 2


def _fail(args, exc, code):
    if getattr(args, "json", False):
        print(json.dumps({"error": {
            "code": type(exc).__name__,
            "message": str(exc),
        }}, indent=2, sort_keys=True))
    else:
        print(f"error: {exc}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
