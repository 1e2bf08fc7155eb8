"""Pattern matching, ``id`` substitution and ``repeat`` fixpoints."""

from dataclasses import dataclass, field

from . import algebra
from .errors import CompileError, NonTerminationError
from .frontend.parser import Call, Name, Neg, Num, Wildcard
from .sorting import sort_merge
from .terms import FunctionApplication, SymbolArg, Term, multiply

DEFAULT_REPEAT_CAP = 10**6


@dataclass(frozen=True)
class Pattern:
    """A symbol (``args`` is None) or a function application pattern.

    Each entry of ``args`` is ``("int", n)``, ``("symbol", id)`` or
    ``("wildcard", name)``.
    """

    kind: str
    head: int
    args: tuple = None

    @property
    def wildcards(self):
        return tuple(v for k, v in self.args or () if k == "wildcard")

    def instantiate(self, binding):
        """The factor this pattern matches under ``binding``."""
        if self.kind == "symbol":
            return (self.head, 1)
        args = []
        for kind, value in self.args:
            if kind == "int":
                args.append(value)
            elif kind == "symbol":
                args.append(SymbolArg(value))
            else:
                args.append(binding[value])
        return FunctionApplication(self.head, tuple(args))


def compile_pattern(node, decls):
    if isinstance(node, Name):
        if node.name in decls.symbols:
            return Pattern("symbol", decls.symbols[node.name])
        if node.name in decls.functions:
            return Pattern("function", decls.functions[node.name], ())
        raise CompileError(f"id pattern uses undeclared name {node.name!r}")
    if not isinstance(node, Call):
        raise CompileError("id pattern must be a symbol or a function application")
    if node.name not in decls.functions:
        raise CompileError(f"{node.name!r} is not a declared function")
    args = []
    for arg in node.args:
        if isinstance(arg, Wildcard):
            args.append(("wildcard", arg.name))
        elif isinstance(arg, Num):
            args.append(("int", int(arg.value)))
        elif isinstance(arg, Neg) and isinstance(arg.operand, Num):
            args.append(("int", -int(arg.operand.value)))
        elif isinstance(arg, Name) and arg.name in decls.symbols:
            args.append(("symbol", decls.symbols[arg.name]))
        else:
            raise CompileError("pattern arguments must be integers, declared symbols or wildcards")
    return Pattern("function", decls.functions[node.name], tuple(args))


class RhsTemplate:
    """Right-hand side evaluated once per distinct binding."""

    def __init__(self, tree, decls, expressions=None):
        self.tree = tree
        self.decls = decls
        self.expressions = dict(expressions or {})
        self._cache = {}

    def instantiate(self, binding):
        key = tuple(sorted(binding.items()))
        try:
            return self._cache[key]
        except KeyError:
            pass
        scope = algebra.Scope(self.decls, self.expressions, dict(binding))
        terms = algebra.evaluate(self.tree, scope)
        self._cache[key] = terms
        return terms


@dataclass
class Rule:
    """One compiled ``id`` statement."""

    pattern: Pattern
    rhs: RhsTemplate
    line: int = 0


def compile_rule(lhs, rhs, decls, expressions=None, line=0):
    return Rule(compile_pattern(lhs, decls), RhsTemplate(rhs, decls, expressions), line)


@dataclass
class RepeatBlock:
    statements: list = field(default_factory=list)
    first_line: int = 0
    last_line: int = 0
    cap: int = DEFAULT_REPEAT_CAP
    merge: bool = False


# -- matching -----------------------------------------------------------------


def _match_application(p, fa):
    if fa.function != p.head or len(fa.args) != len(p.args):
        return None
    binding = {}
    for (kind, value), arg in zip(p.args, fa.args):
        if kind == "wildcard":
            if type(arg) is not int:
                return None
            binding[value] = arg
        elif kind == "int":
            if type(arg) is not int or arg != value:
                return None
        elif not isinstance(arg, SymbolArg) or arg.symbol != value:
            return None
    return binding


def match(p, t):
    """First matching factor of ``t`` as ``((kind, index), binding)``, or None.

    Symbols are scanned before functions; ``index`` points into
    ``t.symbols`` or ``t.functions`` accordingly.
    """
    if p.kind == "symbol":
        for i, (sym, exp) in enumerate(t.symbols):
            if sym == p.head and exp >= 1:
                return ("symbol", i), {}
        return None
    for i, fa in enumerate(t.functions):
        binding = _match_application(p, fa)
        if binding is not None:
            return ("function", i), binding
    return None


def substitute(t, site, binding, rhs):
    """Replace one unit of the factor at ``site`` by ``rhs`` (unmerged)."""
    kind, index = site
    if kind == "symbol":
        sym, exp = t.symbols[index]
        symbols = list(t.symbols)
        if exp == 1:
            del symbols[index]
        else:
            symbols[index] = (sym, exp - 1)
        residual = Term(t.coef, tuple(symbols), t.functions)
    else:
        residual = Term(t.coef, t.symbols, t.functions[:index] + t.functions[index + 1:])
    return [multiply(residual, r) for r in rhs.instantiate(binding)]


def _apply_rule(rule, t):
    """One pass of ``rule`` over ``t``; returns (terms, matched)."""
    p = rule.pattern
    if p.kind == "symbol":
        units = 0
        kept = []
        for sym, exp in t.symbols:
            if sym == p.head and exp >= 1:
                units = exp
            else:
                kept.append((sym, exp))
        if not units:
            return [t], False
        bindings = [{}] * units
        residual = Term(t.coef, tuple(kept), t.functions)
    else:
        bindings = []
        kept = []
        for fa in t.functions:
            binding = _match_application(p, fa)
            if binding is None:
                kept.append(fa)
            else:
                bindings.append(binding)
        if not bindings:
            return [t], False
        residual = Term(t.coef, t.symbols, tuple(kept))
    out = [residual]
    for binding in bindings:
        rhs = rule.rhs.instantiate(binding)
        out = [multiply(a, b) for a in out for b in rhs]
        if not out:
            break
    return sort_merge(out), True


def apply_id(rule, t):
    """Replace every matching factor of ``t`` once; RHS factors are not rescanned."""
    return _apply_rule(rule, t)[0]


def run_statements(statements, t):
    """Pass ``t`` through rules and repeat blocks in order.

    Returns (terms, changed).
    """
    terms = [t]
    changed = False
    for stmt in statements:
        nxt = []
        for u in terms:
            if isinstance(stmt, RepeatBlock):
                out, hit = _repeat(stmt.statements, u, stmt.cap, stmt.merge, stmt)
            else:
                out, hit = _apply_rule(stmt, u)
            changed |= hit
            nxt.extend(out)
        terms = nxt
    return terms, changed


def _repeat(statements, t, cap, merge, block=None):
    final = []
    visits = 0
    changed = False
    if merge:
        pending = [t]
        while pending:
            produced = []
            for u in pending:
                visits += 1
                if visits > cap:
                    raise _divergence(block, cap)
                out, hit = run_statements(statements, u)
                if hit:
                    changed = True
                    produced.extend(out)
                else:
                    final.extend(out)
            pending = sort_merge(produced)
    else:
        stack = [t]
        while stack:
            u = stack.pop()
            visits += 1
            if visits > cap:
                raise _divergence(block, cap)
            out, hit = run_statements(statements, u)
            if hit:
                changed = True
                stack.extend(reversed(out))
            else:
                final.extend(out)
    return final, changed


def _divergence(block, cap):
    if block is not None and block.first_line:
        where = f"repeat block at lines {block.first_line}-{block.last_line}"
    else:
        where = "repeat block"
    return NonTerminationError(f"{where} still changing after {cap} passes",
                               line=block.first_line if block is not None else None)


def apply_repeat(block, t, cap=DEFAULT_REPEAT_CAP, *, merge=False):
    """Run ``block`` on ``t`` until no statement changes any term.

    ``block`` is a :class:`RepeatBlock` or a plain list of rules.  By
    default terms are expanded depth first and emitted in generation order,
    unmerged.  With ``merge=True`` the work list is processed in rounds and
    sort-merged between them, which turns recursions such as the
    multi-angle sine reduction from exponential into polynomial work.
    """
    if isinstance(block, RepeatBlock):
        return _repeat(block.statements, t, cap, merge, block)[0]
    return _repeat(list(block), t, cap, merge)[0]
