"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line (visible with ``-s`` or
in the ``-v`` log) and then asserts, so the suite fails when any
criterion does.
"""

import io
import itertools
import os
import random
import re
import subprocess
import sys
import time
from fractions import Fraction

import pytest

from conftest import (SINE_DECLS, SOURCES, as_polynomial, build_matrix_case, chebyshev_u,
                      reduce_sine, rule, run_program, sine_rules, term)
from miniform import rewrite, runtime
from miniform.errors import NonTerminationError
from miniform.frontend import compile_text, parse_modules, preprocess, tokenize_source
from miniform.programs import program_text
from miniform.rewrite import apply_id, apply_repeat
from miniform.runtime import RunState, execute_module, run_text
from miniform.settings import Settings, resolve_settings
from miniform.sorting import sort_merge, spill_sort
from miniform.terms import (Declarations, FunctionApplication, SymbolArg, compare, format_sum,
                            normalize)

EXAMPLE1 = program_text("example1.frm")
EXAMPLE2 = program_text("example2.frm")


@pytest.fixture
def verdict(capsys):
    def report(name, failures, detail=""):
        status = "FAIL" if failures else "PASS"
        line = f"{status} {name}"
        if detail:
            line += f" ({detail})"
        if failures:
            line += ": " + "; ".join(failures[:5])
        with capsys.disabled():
            print(f"\n{line}")
        assert not failures, line
    return report


def timed(fn, *args, **kw):
    start = time.perf_counter()
    result = fn(*args, **kw)
    return result, time.perf_counter() - start


def printed_values(out):
    return {name: int(v) for name, v in re.findall(r"\n(T\d+) =\n   (-?\d+);\n", out)}


def mask_time(out):
    return re.sub(r"Time = [0-9.]+ sec", "Time = * sec", out)


# -- 1. Tribonacci ----------------------------------------------------------------


def tribonacci_oracle(n):
    t = [None, 1, 1, 2]
    while len(t) <= n:
        t.append(t[-1] + t[-2] + t[-3])
    return t


def test_tribonacci_golden_run(verdict):
    failures = []
    (status, out), elapsed = timed(run_program, EXAMPLE1)
    values = printed_values(out)
    golden = {"T4": 4, "T5": 7, "T99": 53324762928098149064722658,
              "T100": 98079530178586034536500564}
    if status != 0:
        failures.append(f"exit status {status}")
    for name, value in golden.items():
        if values.get(name) != value:
            failures.append(f"{name} = {values.get(name)}, expected {value}")
    oracle = tribonacci_oracle(100)
    wrong = [i for i in range(4, 101) if values.get(f"T{i}") != oracle[i]]
    if wrong:
        failures.append(f"oracle mismatch at T{wrong[0]}")
    if elapsed >= 1.0:
        failures.append(f"took {elapsed:.3f} s")
    verdict("[1] Tribonacci golden run", failures,
            f"{len(values)} values checked, {elapsed * 1000:.1f} ms")


# -- 2. multi-angle sines ---------------------------------------------------------

EXPECTED_EXPR = """
expr =
   512*[sin(x)]*[cos(x)]^9 -
   1024*[sin(x)]*[cos(x)]^7 +
   672*[sin(x)]*[cos(x)]^5 -
   160*[sin(x)]*[cos(x)]^3 +
   10*[sin(x)]*[cos(x)];
"""


def test_multi_angle_golden_run(verdict):
    failures = []
    (status, out), elapsed = timed(run_program, EXAMPLE2)
    if status != 0:
        failures.append(f"exit status {status}")
    if EXPECTED_EXPR not in out:
        failures.append("printed expression differs")
    if not re.search(r"\nexpr +Terms in output = 5\n", out):
        failures.append("statistics do not report 5 terms in output")
    generated = re.search(r"Generated terms = (\d+)", out)
    if generated is None:
        failures.append("no generated-terms count")
    if elapsed >= 0.1:
        failures.append(f"took {elapsed * 1000:.1f} ms")
    verdict("[2] Multi-angle golden run", failures,
            f"generated terms {generated and generated.group(1)}, {elapsed * 1000:.1f} ms")


# -- 3. Chebyshev oracle ----------------------------------------------------------


def test_chebyshev_oracle_suite(verdict):
    failures = []
    for n in range(31):
        got = as_polynomial(reduce_sine(n))
        if got != chebyshev_u(n - 1):
            failures.append(f"n={n}")
    double = apply_repeat(sine_rules(), term("sin(2,x)", SINE_DECLS))
    if format_sum(double, SINE_DECLS) != "2*sin(x)*cos(x)":
        failures.append(f"sin(2x) gave {format_sum(double, SINE_DECLS)}")
    verdict("[3] Chebyshev oracle suite", failures, "n = 0..30 and sin(2x)")


# -- 4. spill equivalence ---------------------------------------------------------

N_SYMBOLS, N_FUNCTIONS = 4, 2
RANDOM_DECLS = Declarations([f"s{i}" for i in range(N_SYMBOLS)],
                            [f"f{i}" for i in range(N_FUNCTIONS)])


def random_argument(rng, depth=0):
    roll = rng.random()
    if roll < 0.5:
        return rng.randint(-3, 12)
    if roll < 0.85 or depth:
        return SymbolArg(rng.randrange(N_SYMBOLS))
    return tuple(sort_merge([random_term(rng, depth + 1) for _ in range(2)]))


def random_term(rng, depth=0):
    while True:
        coef = Fraction(rng.randint(-9, 9), rng.choice([1, 1, 2, 3]))
        if rng.random() < 0.05:
            coef = Fraction(rng.randint(-10**30, 10**30))
        symbols = [(rng.randrange(N_SYMBOLS), rng.randint(-2, 4)) for _ in range(rng.randint(0, 3))]
        functions = [FunctionApplication(rng.randrange(N_FUNCTIONS),
                                         tuple(random_argument(rng, depth)
                                               for _ in range(rng.randint(0, 2))))
                     for _ in range(rng.randint(0, 2))]
        t = normalize(coef, symbols, functions)
        if t is not None:
            return t


def random_stream(rng, size):
    return [random_term(rng) for _ in range(size)]


def test_spill_equivalence(verdict, tmp_path, monkeypatch):
    failures = []
    rng = random.Random(2024)
    spills = 0
    temp = tmp_path / "spill"
    temp.mkdir()
    for i in range(50):
        stream = random_stream(rng, rng.randint(100, 800))
        reference = format_sum(sort_merge(stream), RANDOM_DECLS)
        for small in (256, 4096):
            report = {}
            got = spill_sort(iter(stream), Settings(temp_dir=str(temp), small_size=small), report)
            spills += len(report["spill_files"])
            if format_sum(got, RANDOM_DECLS) != reference:
                failures.append(f"stream {i} differs at SmallSize {small}")
            if os.listdir(temp):
                failures.append(f"stream {i} left files behind")

    # whole programs: the spill count is observed through the runtime's sort
    program_spills = {}
    real_spill_sort = runtime.spill_sort

    def observed(terms, settings, report=None):
        result = real_spill_sort(terms, settings, report)
        program_spills[current] = program_spills.get(current, 0) + len(report["spill_files"])
        return result

    monkeypatch.setattr(runtime, "spill_sort", observed)
    for name, text in [("example1", EXAMPLE1), ("example2", EXAMPLE2)]:
        current = (name, None)
        _, reference = run_program(text)
        for small in (256, 4096):
            current = (name, small)
            _, out = run_program(text, Settings(temp_dir=str(temp), small_size=small))
            if mask_time(out) != mask_time(reference):
                failures.append(f"{name} output differs at SmallSize {small}")
            if os.listdir(temp):
                failures.append(f"{name} left files behind")
    if program_spills.get(("example2", 256), 0) == 0:
        failures.append("example2 never spilled at 256 B")
    verdict("[4] Spill equivalence", failures,
            f"{spills} run files for random streams, example2 at 256 B wrote "
            f"{program_spills.get(('example2', 256), 0)}")


# -- 5. property suites -----------------------------------------------------------


def check_sort_merge(rng):
    failures = []
    for i in range(1000):
        stream = [random_term(rng) for _ in range(rng.randint(0, 40))]
        # reuse a few structures so that like terms meet
        stream += [t.with_coef(t.coef * rng.choice([-1, 2])) for t in rng.sample(stream, len(stream) // 3)]
        merged = sort_merge(stream)
        if sort_merge(merged) != merged:
            failures.append(f"not idempotent on stream {i}")
        shuffled = stream[:]
        rng.shuffle(shuffled)
        if sort_merge(shuffled) != merged:
            failures.append(f"permutation changed stream {i}")
    return failures


def check_order_laws(rng):
    failures = []
    sample = [random_term(rng) for _ in range(60)]
    for a, b in itertools.product(sample, repeat=2):
        if compare(a, b) != -compare(b, a):
            failures.append("antisymmetry")
        if (compare(a, b) == 0) != (a.body == b.body):
            failures.append("equality")
    for a, b, c in itertools.product(sample[:25], repeat=3):
        if compare(a, b) <= 0 and compare(b, c) <= 0 and compare(a, c) > 0:
            failures.append("transitivity")
    return sorted(set(failures))


def check_apply_id_identity():
    failures = []
    rules = [rule(r, SINE_DECLS) for r in ("sin(x) = [sin(x)]", "cos(3,x) = 0", "k = 2")]
    for text in ("x^3*[cos(x)]", "sin(2,x)*x", "cos(x)*[sin(x)]^2", "7"):
        t = term(text, SINE_DECLS)
        for r in rules:
            if rewrite.match(r.pattern, t) is None and apply_id(r, t) != [t]:
                failures.append(f"{text} changed")
    return failures


def check_repeat_cap(monkeypatch):
    failures = []
    decls = Declarations(["x"], [])
    try:
        apply_repeat([rule("x = x+1", decls)], term("x", decls), cap=1000)
        failures.append("apply_repeat did not stop")
    except NonTerminationError:
        pass
    monkeypatch.setattr(rewrite, "DEFAULT_REPEAT_CAP", 1000)
    status, out = run_program("Symbols x;\nLocal F = x;\nrepeat;\n  id x = x+1;\nendrepeat;\n.end\n")
    if status != 3 or "lines 3-5" not in out:
        failures.append(f"program gave status {status}")
    return failures


def unrolled_example1():
    lines = ["nwrite statistics;", "Local T1 = 1;", "Local T2 = 1;", "Local T3 = 2;"]
    for i in range(4, 101):
        lines += [".sort", f"drop T{i - 3};", f"skip T{i - 2};", f"skip T{i - 1};",
                  f"Local T{i} = T{i - 1}+T{i - 2}+T{i - 3};", "print;"]
    return "\n".join(lines + [".end", ""])


def check_loop_unroll():
    failures = []
    looped = preprocess(tokenize_source(EXAMPLE1))
    flat = preprocess(tokenize_source(unrolled_example1()))
    if looped != flat or parse_modules(looped) != parse_modules(flat):
        failures.append("unrolled example1 compiles differently")
    return failures


def check_settings_matrix(tmp_path):
    failures = []
    expected_temp = {"local": "/from-local", "-s": "/from-s", "system": "/from-system",
                     "builtin": Settings().temp_dir}
    for k, (highest, with_t) in enumerate(itertools.product(SOURCES, [False, True])):
        root = tmp_path / f"case{k}"
        root.mkdir()
        inp, flag_s, flag_t, system = build_matrix_case(root, highest, with_t)
        settings, origin = resolve_settings(inp, flag_s, flag_t, system)
        temp = flag_t if with_t else expected_temp[highest]
        if origin != highest or settings.temp_dir != temp:
            failures.append(f"{highest}/-t={with_t}")
    return failures


def check_tee(tmp_path):
    failures = []
    env = dict(os.environ, MINIFORM_SET=str(tmp_path / "absent.set"))
    cases = [("example1.frm", EXAMPLE1), ("example2.frm", EXAMPLE2),
             ("broken.frm", "Symbols x;\nLocal F = y;\n.end\n")]
    for name, text in cases:
        (tmp_path / name).write_text(text)
        proc = subprocess.run([sys.executable, "-m", "miniform", name], cwd=tmp_path, env=env,
                              capture_output=True)
        log = (tmp_path / name.replace(".frm", ".log")).read_bytes()
        if proc.stdout != log:
            failures.append(f"{name} log differs from stdout")
    return failures


def check_liveness():
    failures = []
    modules = compile_text(EXAMPLE1)
    state = RunState()
    sink = io.StringIO()
    for index, module in enumerate(modules):
        dropped = [s.payload[0] for s in module.statements if s.kind == "drop"]
        skipped = {s.payload[0]: state.expressions[s.payload[0]].terms
                   for s in module.statements if s.kind == "skip"}
        execute_module(module, state, sink)
        if len(state.expressions) > 3:
            failures.append(f"{len(state.expressions)} expressions after module {index}")
        if any(name in state.expressions for name in dropped):
            failures.append(f"dropped expression survives module {index}")
        if any(state.expressions[n].terms != terms for n, terms in skipped.items()):
            failures.append(f"skipped expression changed in module {index}")
    status = run_text(EXAMPLE1, io.StringIO(), on_module_end=lambda s: (
        len(s.expressions) > 3 and failures.append("ceiling exceeded in full run")))
    if status:
        failures.append(f"status {status}")
    return failures


def test_property_suites(verdict, tmp_path, monkeypatch):
    rng = random.Random(7)
    checks = {
        "sort_merge": lambda: check_sort_merge(rng),
        "order laws": lambda: check_order_laws(rng),
        "apply_id identity": check_apply_id_identity,
        "repeat cap": lambda: check_repeat_cap(monkeypatch),
        "loop unroll": check_loop_unroll,
        "settings 4x2": lambda: check_settings_matrix(tmp_path / "settings"),
        "tee": lambda: check_tee(tmp_path),
        "liveness": check_liveness,
    }
    (tmp_path / "settings").mkdir()
    failures = []
    for name, check in checks.items():
        failures += [f"{name}: {f}" for f in check()]
    verdict("[5] Property suites", failures, ", ".join(checks))
