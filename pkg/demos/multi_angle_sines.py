"""Reducing sin(n x) to powers of cos(x) with a repeat block.

The rule ``sin(k?,x) = 2*sin(k-1,x)*cos(x) - sin(k-2,x)`` fires until
only ``sin(x)`` and ``cos(x)`` remain.  The coefficients are those of the
Chebyshev polynomials of the second kind, which this script checks.
Run with ``python demos/multi_angle_sines.py``.
"""

import io

from miniform import algebra
from miniform.frontend import parse_expression, tokenize
from miniform.programs import program_text
from miniform.rewrite import apply_repeat, compile_rule
from miniform.runtime import run_text
from miniform.sorting import sort_merge
from miniform.terms import Declarations, format_sum

out = io.StringIO()
run_text(program_text("example2.frm"), out)
print(out.getvalue())

# the same reduction through the library API, for larger n
decls = Declarations(["x", "k"], ["sin", "cos"])
COS = decls.functions["cos"]


def evaluate(text):
    return algebra.evaluate(parse_expression(tokenize(text)), algebra.Scope(decls))


def rule(text):
    lhs, rhs = text.split("=")
    return compile_rule(parse_expression(tokenize(lhs), allow_wildcards=True),
                        parse_expression(tokenize(rhs)), decls)


rules = [rule("sin(0,x) = 0"), rule("sin(1,x) = sin(x)"),
         rule("sin(k?,x) = 2*sin(k-1,x)*cos(x) - sin(k-2,x)")]


def chebyshev_u(m):
    """U_m as {power: coefficient} from U_m = 2c U_{m-1} - U_{m-2}."""
    prev, cur = {0: 1}, {1: 2}
    if m == 0:
        return prev
    for _ in range(m - 1):
        nxt = {p + 1: 2 * a for p, a in cur.items()}
        for p, a in prev.items():
            nxt[p] = nxt.get(p, 0) - a
        prev, cur = cur, {p: a for p, a in nxt.items() if a}
    return cur


for n in (2, 10, 30):
    (start,) = evaluate(f"sin({n},x)")
    # merging between rounds keeps large n cheap
    reduced = sort_merge(apply_repeat(rules, start, merge=True))
    poly = {sum(fa.function == COS for fa in t.functions): t.coef for t in reduced}
    assert poly == chebyshev_u(n - 1), n
    print(f"sin({n}x): {len(reduced)} terms, matches U_{n - 1}")
    if n == 2:
        print("   ", format_sum(reduced, decls))
