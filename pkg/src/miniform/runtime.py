"""Program execution: expressions, modules, printing and statistics."""

import time
from dataclasses import dataclass, field

from . import algebra, rewrite
from .errors import CompileError, ExecutionError, MiniformError
from .frontend import compile_text
from .rewrite import RepeatBlock, compile_rule, run_statements
from .settings import Settings
from .sorting import spill_sort
from .terms import Declarations, format_magnitude

ACTIVE = "active"
SKIPPED = "skipped"
DROP_PENDING = "drop-pending"


@dataclass
class Expression:
    name: str
    terms: list
    scope: str = "local"
    status: str = ACTIVE


@dataclass
class RunStatistics:
    generated_terms: int
    terms_in_output: int
    bytes_used: int
    elapsed: float


@dataclass
class RunState:
    declarations: Declarations = field(default_factory=Declarations)
    expressions: dict = field(default_factory=dict)
    statistics_enabled: bool = True
    module_index: int = 0
    clock: object = time.perf_counter
    started: float = None

    def __post_init__(self):
        if self.started is None:
            self.started = self.clock()

    def elapsed(self):
        return self.clock() - self.started

    def values(self):
        return {name: e.terms for name, e in self.expressions.items()}


def evaluate_rhs(tree, state):
    """Terms of a right-hand side; expression names are read by value."""
    return algebra.evaluate(tree, algebra.Scope(state.declarations, state.values()))


def print_expression(expr, sink, decls):
    sink.write(f"\n{expr.name} =\n")
    terms = expr.terms
    if not terms:
        sink.write("   0;\n")
        return
    for i, t in enumerate(terms):
        body = format_magnitude(t, decls)
        if i == 0 and t.coef < 0:
            body = "-" + body
        if i + 1 < len(terms):
            end = " -" if terms[i + 1].coef < 0 else " +"
        else:
            end = ";"
        sink.write(f"   {body}{end}\n")


def emit_statistics(stats, name, sink):
    sink.write(f"\nTime = {stats.elapsed:.2f} sec   Generated terms = {stats.generated_terms}\n")
    sink.write(f"{name:<13} Terms in output = {stats.terms_in_output}\n")
    sink.write(f"{'':<13} Bytes used      = {stats.bytes_used}\n")


def _targets(names, state, what):
    if not names:
        return list(state.expressions)
    for name in names:
        if name not in state.expressions:
            raise ExecutionError(f"{what}: unknown expression {name!r}")
    return list(names)


def execute_module(module, state, sink, settings=None):
    """Run one module against ``state`` (mutated in place and returned)."""
    settings = settings or Settings()
    print_names = []
    program = []
    blocks = []

    for stmt in module.statements:
        try:
            kind = stmt.kind
            if kind == "symbols-decl" or kind == "function-decl":
                clash = [n for n in stmt.payload if n in state.expressions]
                if clash:
                    raise ExecutionError(f"{clash[0]!r} is already an expression name")
                if kind == "symbols-decl":
                    state.declarations = state.declarations.declare_symbols(stmt.payload)
                else:
                    state.declarations = state.declarations.declare_functions(stmt.payload)
            elif kind == "local":
                name = stmt.payload.name
                decls = state.declarations
                if name in state.expressions:
                    raise ExecutionError(f"expression {name!r} is already defined")
                if name in decls.symbols or name in decls.functions:
                    raise ExecutionError(f"{name!r} is already declared as a symbol or function")
                terms = evaluate_rhs(stmt.payload.expr, state)
                state.expressions[name] = Expression(name, terms, stmt.payload.scope)
            elif kind == "drop":
                for name in _targets(stmt.payload, state, "drop"):
                    state.expressions[name].status = DROP_PENDING
            elif kind == "skip":
                for name in _targets(stmt.payload, state, "skip"):
                    if state.expressions[name].status == ACTIVE:
                        state.expressions[name].status = SKIPPED
            elif kind == "print":
                for name in _targets(stmt.payload, state, "print"):
                    if name not in print_names:
                        print_names.append(name)
            elif kind == "nwrite-statistics":
                state.statistics_enabled = stmt.payload
            elif kind == "identify":
                rule = compile_rule(stmt.payload.lhs, stmt.payload.rhs, state.declarations,
                                    state.values(), stmt.line)
                (blocks[-1].statements if blocks else program).append(rule)
            elif kind == "repeat-begin":
                blocks.append(RepeatBlock(first_line=stmt.line, cap=rewrite.DEFAULT_REPEAT_CAP))
            elif kind == "repeat-end":
                block = blocks.pop()
                block.last_line = stmt.line
                (blocks[-1].statements if blocks else program).append(block)
        except MiniformError as exc:
            raise exc.located(stmt.source, stmt.line)

    report = {}
    statistics = []
    for expr in state.expressions.values():
        if expr.status != ACTIVE:
            continue
        stream = _stream(program, expr.terms)
        expr.terms = spill_sort(stream, settings, report)
        statistics.append((expr.name, RunStatistics(
            report["generated"], len(expr.terms), report["bytes"], state.elapsed())))

    if state.statistics_enabled:
        for name, stats in statistics:
            emit_statistics(stats, name, sink)
    for name in print_names:
        expr = state.expressions[name]
        if expr.status == ACTIVE:
            print_expression(expr, sink, state.declarations)

    for name in [n for n, e in state.expressions.items() if e.status == DROP_PENDING]:
        del state.expressions[name]
    for expr in state.expressions.values():
        expr.status = ACTIVE
    state.module_index += 1
    return state


def _stream(program, terms):
    if not program:
        yield from terms
        return
    for t in terms:
        yield from run_statements(program, t)[0]


def _echo_plan(modules, source, n_lines):
    """Last source line to echo before each module runs."""
    first_use = {}
    for index, module in enumerate(modules):
        for src, line in module.lines:
            if src == source and line not in first_use:
                first_use[line] = index
    plan = []
    for index in range(len(modules)):
        later = [line for line, first in first_use.items() if first > index]
        plan.append(min(later) - 1 if later else n_lines)
    return plan


def execute_program(modules, sink, settings=None, *, source_lines=None, source=None,
                    state=None, on_module_end=None):
    """Run ``modules`` in order, echoing source lines; returns an exit status.

    ``source_lines`` (the raw program lines) are echoed so that each line
    appears once, before the results of the first module that uses it.
    """
    settings = settings or Settings()
    state = state or RunState()
    lines = list(source_lines or ())
    plan = _echo_plan(modules, source, len(lines)) if lines else [0] * len(modules)
    echoed = 0
    for index, module in enumerate(modules):
        while echoed < plan[index]:
            sink.write(lines[echoed] + "\n")
            echoed += 1
        try:
            execute_module(module, state, sink, settings)
        except MiniformError as exc:
            exc.located(source)
            sink.write(f"{exc}\n")
            return exc.exit_code
        if on_module_end is not None:
            on_module_end(state)
    while echoed < len(lines):
        sink.write(lines[echoed] + "\n")
        echoed += 1
    return 0


def run_text(text, sink, settings=None, *, source=None, on_module_end=None):
    """Compile and execute one program text; returns an exit status."""
    settings = settings or Settings()
    try:
        modules = compile_text(text, source=source, comment_char=settings.comment_char,
                               include_path=settings.include_dirs)
    except CompileError as exc:
        exc.located(source)
        sink.write(f"{exc}\n")
        return exc.exit_code
    lines = [line.rstrip() for line in text.splitlines()]
    return execute_program(modules, sink, settings, source_lines=lines, source=source,
                           on_module_end=on_module_end)
