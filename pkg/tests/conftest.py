import io
from fractions import Fraction

import pytest
from hypothesis import strategies as st

from miniform import algebra
from miniform.frontend import parse_expression, tokenize
from miniform.rewrite import apply_id, apply_repeat, compile_rule
from miniform.runtime import run_text
from miniform.settings import Settings
from miniform.sorting import sort_merge
from miniform.terms import Declarations, FunctionApplication, SymbolArg, normalize

SINE_DECLS = Declarations(["x", "k", "[sin(x)]", "[cos(x)]"], ["sin", "cos"])

SINE_RULES = (
    "sin(0,x) = 0",
    "sin(1,x) = sin(x)",
    "sin(k?,x) = 2*sin(k-1,x)*cos(x) - sin(k-2,x)",
)


def expr(text, decls, expressions=None):
    """Evaluate expression source text to terms."""
    return algebra.evaluate(parse_expression(tokenize(text)), algebra.Scope(decls, expressions))


def term(text, decls):
    (t,) = expr(text, decls)
    return t


def rule(text, decls):
    lhs, rhs = text.split("=", 1)
    return compile_rule(parse_expression(tokenize(lhs), allow_wildcards=True),
                        parse_expression(tokenize(rhs)), decls)


def sine_rules():
    return [rule(r, SINE_DECLS) for r in SINE_RULES]


def chebyshev_u(m):
    """U_m as {power: coefficient}, by U_m = 2c U_{m-1} - U_{m-2}."""
    if m < 0:
        return {}
    prev, cur = {0: 1}, {1: 2}
    if m == 0:
        return prev
    for _ in range(m - 1):
        nxt = {p + 1: 2 * a for p, a in cur.items()}
        for p, a in prev.items():
            nxt[p] = nxt.get(p, 0) - a
        prev, cur = cur, {p: a for p, a in nxt.items() if a}
    return cur


def reduce_sine(n, merge=True):
    finals = []
    for t in apply_repeat(sine_rules(), term(f"sin({n},x)", SINE_DECLS), merge=merge):
        finals.extend(apply_id(rule("sin(x) = [sin(x)]", SINE_DECLS), t))
    out = []
    for t in finals:
        out.extend(apply_id(rule("cos(x) = [cos(x)]", SINE_DECLS), t))
    return sort_merge(out)


def as_polynomial(terms):
    s, c = SINE_DECLS.symbols["[sin(x)]"], SINE_DECLS.symbols["[cos(x)]"]
    poly = {}
    for t in terms:
        powers = dict(t.symbols)
        assert not t.functions and powers.pop(s) == 1 and set(powers) <= {c}
        poly[powers.get(c, 0)] = t.coef
    return poly


def run_program(text, settings=None, source=None, **kw):
    sink = io.StringIO()
    status = run_text(text, sink, settings or Settings(), source=source, **kw)
    return status, sink.getvalue()


# -- settings precedence ------------------------------------------------------

SOURCES = ["local", "-s", "system", "builtin"]


def build_matrix_case(root, highest, with_t):
    """Lay out files so that ``highest`` is the best available source.

    Every settings file names its origin in TempDir, so the winner can be
    read back from the resolved settings.
    """
    work = root / "work"
    work.mkdir()
    etc = root / "etc"
    etc.mkdir()
    inp = work / "input.frm"
    inp.write_text(".end\n")
    rank = SOURCES.index(highest)
    flag_s = None
    system = etc / "form.set"
    if rank <= 0:
        (work / "form.set").write_text("TempDir /from-local\n")
    if rank <= 1:
        flag_s = etc / "other.set"
        flag_s.write_text("TempDir /from-s\n")
    if rank <= 2:
        system.write_text("TempDir /from-system\n")
    flag_t = str(root / "scratch") if with_t else None
    return str(inp), flag_s and str(flag_s), flag_t, str(system)


@pytest.fixture
def sine_decls():
    return SINE_DECLS


# -- hypothesis strategies --------------------------------------------------

N_SYMBOLS = 4
N_FUNCTIONS = 2

coefs = st.fractions(min_value=-50, max_value=50, max_denominator=6).filter(lambda c: c != 0)

arguments = st.one_of(st.integers(-3, 12), st.builds(SymbolArg, st.integers(0, N_SYMBOLS - 1)))

applications = st.builds(
    FunctionApplication,
    st.integers(0, N_FUNCTIONS - 1),
    st.lists(arguments, max_size=2).map(tuple),
)


@st.composite
def terms(draw, coef=coefs):
    symbols = draw(st.lists(st.tuples(st.integers(0, N_SYMBOLS - 1), st.integers(-2, 4)), max_size=4))
    functions = draw(st.lists(applications, max_size=3))
    t = normalize(draw(coef), symbols, functions)
    return t


# small structure space so that like terms actually collide
small_terms = terms(coef=st.integers(-5, 5).filter(bool).map(Fraction))

RANDOM_DECLS = Declarations([f"s{i}" for i in range(N_SYMBOLS)], [f"f{i}" for i in range(N_FUNCTIONS)])
