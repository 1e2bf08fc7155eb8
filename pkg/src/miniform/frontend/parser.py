"""Statement parsing and module splitting.

A program is a sequence of statements separated by ``;``; each ``.sort`` or
``.end`` directive closes the statements collected so far into one
:class:`ModuleUnit`.
"""

from dataclasses import dataclass, field
from fractions import Fraction

from ..errors import CompileError

# -- expression trees -------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Name:
    """A symbol, function or expression reference; bracket names keep ``[]``."""

    name: str


@dataclass(frozen=True)
class Wildcard:
    name: str


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


def tree_names(node):
    """All plain names referenced anywhere in an expression tree."""
    if isinstance(node, Name):
        return {node.name}
    if isinstance(node, Call):
        names = {node.name}
        for arg in node.args:
            names |= tree_names(arg)
        return names
    if isinstance(node, Neg):
        return tree_names(node.operand)
    if isinstance(node, BinOp):
        return tree_names(node.left) | tree_names(node.right)
    return set()


# -- statements and modules --------------------------------------------------

STATEMENT_KINDS = (
    "symbols-decl", "function-decl", "local", "drop", "skip", "print",
    "nwrite-statistics", "identify", "repeat-begin", "repeat-end",
)

_KEYWORD_KIND = {
    "s": "symbols-decl", "symbol": "symbols-decl", "symbols": "symbols-decl",
    "f": "function-decl", "function": "function-decl", "functions": "function-decl",
    "cf": "function-decl", "cfunction": "function-decl", "cfunctions": "function-decl",
    "l": "local", "local": "local", "g": "local", "global": "local",
    "drop": "drop", "skip": "skip", "print": "print",
    "nwrite": "nwrite-statistics", "write": "nwrite-statistics",
    "id": "identify", "identify": "identify",
    "repeat": "repeat-begin", "endrepeat": "repeat-end",
}

DIRECTIVES = ("sort", "end")


@dataclass(frozen=True)
class LocalDef:
    name: str
    scope: str
    expr: object


@dataclass(frozen=True)
class IdentifyDef:
    lhs: object
    rhs: object


@dataclass(frozen=True)
class Statement:
    kind: str
    payload: object = None
    line: int = field(default=0, compare=False)
    source: str | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ModuleUnit:
    statements: tuple
    terminator: str
    source_span: tuple = field(default=(0, 0), compare=False)
    lines: frozenset = field(default=frozenset(), compare=False, repr=False)


# -- expression parser -------------------------------------------------------


class _ExprParser:
    def __init__(self, tokens, allow_wildcards=False):
        self.tokens = tokens
        self.pos = 0
        self.allow_wildcards = allow_wildcards

    def error(self, message, tok=None):
        tok = tok or (self.tokens[self.pos] if self.pos < len(self.tokens) else self.tokens[-1])
        return CompileError(message, source=tok.source, line=tok.line)

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def at(self, kind, text=None):
        tok = self.peek()
        return tok is not None and tok.kind == kind and (text is None or tok.text == text)

    def take(self):
        tok = self.peek()
        if tok is None:
            raise self.error("unexpected end of statement")
        self.pos += 1
        return tok

    def expect(self, kind, text):
        tok = self.peek()
        if tok is None or tok.kind != kind or tok.text != text:
            raise self.error(f"expected {text!r}")
        self.pos += 1
        return tok

    def parse_all(self):
        node = self.expr()
        if self.peek() is not None:
            raise self.error(f"unexpected {self.peek().text!r}")
        return node

    def expr(self):
        if self.at("operator", "-"):
            self.take()
            node = Neg(self.term())
        else:
            if self.at("operator", "+"):
                self.take()
            node = self.term()
        while self.at("operator", "+") or self.at("operator", "-"):
            op = self.take().text
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.at("operator", "*") or self.at("operator", "/"):
            op = self.take().text
            node = BinOp(op, node, self.factor())
        return node

    def factor(self):
        if self.at("operator", "-"):
            self.take()
            return Neg(self.factor())
        if self.at("operator", "+"):
            self.take()
            return self.factor()
        base = self.primary()
        if self.at("operator", "^"):
            self.take()
            return BinOp("^", base, self.factor())
        return base

    def primary(self):
        tok = self.take()
        if tok.kind == "number":
            return Num(Fraction(int(tok.text)))
        if tok.kind == "bracket":
            return Name(f"[{tok.text}]")
        if tok.kind in ("name", "keyword"):
            if self.at("punct", "("):
                self.take()
                args = []
                if not self.at("punct", ")"):
                    args.append(self.argument())
                    while self.at("punct", ","):
                        self.take()
                        args.append(self.argument())
                self.expect("punct", ")")
                return Call(tok.text, tuple(args))
            if self.at("operator", "?"):
                raise self.error("wildcards are only allowed as function arguments on the left of id")
            return Name(tok.text)
        if tok.kind == "punct" and tok.text == "(":
            node = self.expr()
            self.expect("punct", ")")
            return node
        raise self.error(f"unexpected {tok.text!r}", tok)

    def argument(self):
        tok = self.peek()
        nxt = self.tokens[self.pos + 1] if self.pos + 1 < len(self.tokens) else None
        if (tok is not None and tok.kind in ("name", "keyword") and nxt is not None
                and nxt.kind == "operator" and nxt.text == "?"):
            if not self.allow_wildcards:
                raise self.error("wildcards are only allowed on the left of id")
            self.pos += 2
            return Wildcard(tok.text)
        return self.expr()


def parse_expression(tokens, allow_wildcards=False):
    if not tokens:
        raise CompileError("empty expression")
    return _ExprParser(list(tokens), allow_wildcards).parse_all()


def _check_pattern(node, tok):
    """Reject left-hand sides outside the supported pattern language."""
    def fail(msg):
        return CompileError(msg, source=tok.source, line=tok.line)

    if isinstance(node, Name):
        return
    if not isinstance(node, Call):
        raise fail("id pattern must be a symbol or a function application")
    seen = set()
    for arg in node.args:
        if isinstance(arg, Wildcard):
            if arg.name in seen:
                raise fail(f"wildcard {arg.name}? occurs more than once")
            seen.add(arg.name)
        elif isinstance(arg, Num):
            if arg.value.denominator != 1:
                raise fail("pattern arguments must be integers, symbols or wildcards")
        elif isinstance(arg, Neg) and isinstance(arg.operand, Num):
            if arg.operand.value.denominator != 1:
                raise fail("pattern arguments must be integers, symbols or wildcards")
        elif not isinstance(arg, Name):
            raise fail("pattern arguments must be integers, symbols or wildcards")


# -- statements --------------------------------------------------------------


def _split_commas(tokens):
    groups, current, depth = [], [], 0
    for tok in tokens:
        if tok.kind == "punct" and tok.text == "(":
            depth += 1
        elif tok.kind == "punct" and tok.text == ")":
            depth -= 1
        if depth == 0 and tok.kind == "punct" and tok.text == ",":
            groups.append(current)
            current = []
        else:
            current.append(tok)
    groups.append(current)
    return groups


def _name_list(tokens, head, allow_empty):
    if not tokens:
        if allow_empty:
            return ()
        raise CompileError(f"{head.text} needs at least one name", source=head.source, line=head.line)
    names = []
    for group in _split_commas(tokens):
        if len(group) != 1 or group[0].kind not in ("name", "keyword", "bracket"):
            where = group[0] if group else head
            raise CompileError(f"malformed name list in {head.text}", source=where.source, line=where.line)
        tok = group[0]
        names.append(f"[{tok.text}]" if tok.kind == "bracket" else tok.text)
    return tuple(names)


def parse_statement(tokens):
    head = tokens[0]
    if head.kind not in ("name", "keyword"):
        raise CompileError(f"unexpected {head.raw()!r} at start of statement",
                           source=head.source, line=head.line)
    word = head.text.lower()
    kind = _KEYWORD_KIND.get(word)
    if kind is None:
        raise CompileError(f"unknown statement {head.text!r}", source=head.source, line=head.line)
    rest = tokens[1:]

    def make(payload=None):
        return Statement(kind, payload, head.line, head.source)

    def fail(msg):
        return CompileError(msg, source=head.source, line=head.line)

    if kind in ("symbols-decl", "function-decl"):
        return make(_name_list(rest, head, allow_empty=False))
    if kind in ("drop", "skip", "print"):
        return make(_name_list(rest, head, allow_empty=True))
    if kind == "nwrite-statistics":
        if len(rest) != 1 or rest[0].text.lower() != "statistics":
            raise fail(f"{head.text} expects 'statistics'")
        return make(word == "write")
    if kind == "local":
        if len(rest) < 3 or rest[0].kind not in ("name", "keyword") \
                or rest[1].kind != "operator" or rest[1].text != "=":
            raise fail(f"expected {head.text} NAME = expression")
        scope = "global" if word in ("g", "global") else "local"
        return make(LocalDef(rest[0].text, scope, parse_expression(rest[2:])))
    if kind == "identify":
        eq = [k for k, t in enumerate(rest) if t.kind == "operator" and t.text == "="]
        if len(eq) != 1:
            raise fail("expected id pattern = replacement")
        lhs_tokens, rhs_tokens = rest[:eq[0]], rest[eq[0] + 1:]
        if not lhs_tokens or not rhs_tokens:
            raise fail("expected id pattern = replacement")
        lhs = parse_expression(lhs_tokens, allow_wildcards=True)
        _check_pattern(lhs, head)
        rhs = parse_expression(rhs_tokens)
        return make(IdentifyDef(lhs, rhs))
    if kind == "repeat-end":
        if rest:
            raise fail("endrepeat takes no arguments")
        return make()
    # repeat-begin: bare, or "repeat <statement>" shorthand handled by caller
    return make()


def parse_modules(tokens):
    """Split a preprocessed token stream into modules.

    Raises :class:`CompileError` for a missing ``;``, text after ``.end``,
    unbalanced ``repeat``/``endrepeat`` or a missing final ``.end``.
    """
    modules = []
    statements = []
    pending = []
    lines = set()
    depth = 0
    finished = False
    for tok in tokens:
        if finished:
            raise CompileError("text after .end", source=tok.source, line=tok.line)
        lines.add((tok.source, tok.line))
        if tok.kind == "directive":
            if pending:
                first = pending[0]
                raise CompileError("missing ';'", source=first.source, line=first.line)
            word = tok.text.lower()
            if word not in DIRECTIVES:
                raise CompileError(f"unsupported directive .{tok.text}", source=tok.source, line=tok.line)
            if depth:
                raise CompileError("unbalanced repeat: endrepeat missing before directive",
                                   source=tok.source, line=tok.line)
            line_nums = [ln for _, ln in lines]
            modules.append(ModuleUnit(tuple(statements), word,
                                      (min(line_nums), max(line_nums)), frozenset(lines)))
            statements, lines = [], set()
            finished = word == "end"
            continue
        if tok.kind == "punct" and tok.text == ";":
            if not pending:
                continue
            stmt_tokens, pending = pending, []
            head = stmt_tokens[0]
            if head.text.lower() == "repeat" and len(stmt_tokens) > 1:
                # "repeat id a = b;" is a one-statement repeat block
                inner = parse_statement(stmt_tokens[1:])
                statements.extend([Statement("repeat-begin", None, head.line, head.source),
                                   inner,
                                   Statement("repeat-end", None, head.line, head.source)])
                continue
            stmt = parse_statement(stmt_tokens)
            if stmt.kind == "repeat-begin":
                depth += 1
            elif stmt.kind == "repeat-end":
                if depth == 0:
                    raise CompileError("unbalanced repeat: endrepeat without repeat",
                                       source=head.source, line=head.line)
                depth -= 1
            statements.append(stmt)
            continue
        if tok.kind in ("preproc", "macro", "brace", "string"):
            raise CompileError(f"unexpected {tok.raw()!r}", source=tok.source, line=tok.line)
        pending.append(tok)
    if not finished:
        if pending:
            first = pending[0]
            raise CompileError("missing ';'", source=first.source, line=first.line)
        if depth:
            raise CompileError("unbalanced repeat: endrepeat missing")
        raise CompileError("program must end with .end")
    return modules
