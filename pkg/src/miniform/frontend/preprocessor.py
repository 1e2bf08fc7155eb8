"""Textual macro expansion: ``#define``, ``#do``/``#enddo``, ``#include``.

Expansion runs on the token stream before anything is compiled.  Macro
references (``'name'``) and brace groups (``{...}``) are replaced by their
values; a run of tokens written without intervening whitespace is joined
and re-lexed afterwards, which is how ``T'i'`` becomes the name ``T4``.
"""

import os
import re
from fractions import Fraction

from ..errors import PreprocessError
from .lexer import KEYWORDS, tokenize, tokenize_source

MAX_INCLUDE_DEPTH = 16

_MACRO_REF = re.compile(r"'([A-Za-z][A-Za-z0-9]*)'")
_INNER_BRACE = re.compile(r"\{([^{}]*)\}")
_DEFINE = re.compile(r'^([A-Za-z][A-Za-z0-9]*)\s*"([^"]*)"\s*$')
_DO = re.compile(r"^([A-Za-z][A-Za-z0-9]*)\s*=\s*(.+?)\s*,\s*(.+?)\s*$")


class MacroEnv:
    """Macro bindings plus the stack of open ``#do`` loop variables."""

    def __init__(self, bindings=None):
        self.bindings = dict(bindings or {})
        self.loop_vars = []

    def lookup(self, name):
        for var, value in reversed(self.loop_vars):
            if var == name:
                return str(value)
        try:
            return self.bindings[name]
        except KeyError:
            raise PreprocessError(f"unbound macro '{name}'") from None

    def define(self, name, value):
        if name in self.bindings:
            raise PreprocessError(f"macro '{name}' is already defined")
        self.bindings[name] = value

    def push_loop(self, name, value):
        self.loop_vars.append((name, value))

    def pop_loop(self):
        self.loop_vars.pop()


class _IntArith:
    """Recursive-descent evaluator for ``+ - * /`` over integers."""

    _TOKEN = re.compile(r"\s*(?:(\d+)|(.))")

    def __init__(self, text):
        self.text = text
        self.toks = []
        for m in self._TOKEN.finditer(text):
            if m.group(1) is not None:
                self.toks.append(int(m.group(1)))
            elif m.group(2).strip():
                self.toks.append(m.group(2))
        self.pos = 0

    def _peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def _take(self):
        tok = self._peek()
        self.pos += 1
        return tok

    def evaluate(self):
        if not self.toks:
            raise PreprocessError(f"empty arithmetic expression {{{self.text}}}")
        value = self._sum()
        if self.pos != len(self.toks):
            raise PreprocessError(f"cannot evaluate {{{self.text}}}")
        return value

    def _sum(self):
        value = self._product()
        while self._peek() in ("+", "-"):
            if self._take() == "+":
                value += self._product()
            else:
                value -= self._product()
        return value

    def _product(self):
        value = self._unary()
        while self._peek() in ("*", "/"):
            op = self._take()
            rhs = self._unary()
            if op == "*":
                value *= rhs
            else:
                if rhs == 0:
                    raise PreprocessError(f"division by zero in {{{self.text}}}")
                value = Fraction(value, rhs)
                if value.denominator != 1:
                    raise PreprocessError(f"inexact division in {{{self.text}}}")
                value = int(value)
        return value

    def _unary(self):
        tok = self._peek()
        if tok == "-":
            self._take()
            return -self._unary()
        if tok == "+":
            self._take()
            return self._unary()
        return self._atom()

    def _atom(self):
        tok = self._take()
        if isinstance(tok, int):
            return tok
        if tok == "(":
            value = self._sum()
            if self._take() != ")":
                raise PreprocessError(f"missing ')' in {{{self.text}}}")
            return value
        raise PreprocessError(f"cannot evaluate {{{self.text}}}")


def substitute_text(text, env):
    """Replace macro references, then brace groups innermost first."""
    text = _MACRO_REF.sub(lambda m: env.lookup(m.group(1)), text)
    while True:
        new = _INNER_BRACE.sub(lambda m: str(_IntArith(m.group(1)).evaluate()), text)
        if new == text:
            return text
        text = new


def eval_brace_arith(expr, env):
    """Integer value of a brace group such as ``{'i'-3}``."""
    expr = expr.strip()
    if expr.startswith("{") and expr.endswith("}"):
        expr = expr[1:-1]
    return _IntArith(substitute_text(expr, env)).evaluate()


def _expand_run(run, env):
    parts = []
    for tok in run:
        if tok.kind == "macro":
            parts.append(env.lookup(tok.text))
        elif tok.kind == "brace":
            parts.append(str(eval_brace_arith(tok.text, env)))
        else:
            parts.append(tok.raw())
    relexed = tokenize("".join(parts), source=run[0].source, first_line=run[0].line)
    for tok in relexed:
        tok.line = run[0].line
    if relexed:
        relexed[0].glued = run[0].glued
    return relexed


def _find_enddo(tokens, start):
    depth = 0
    for j in range(start, len(tokens)):
        tok = tokens[j]
        if tok.kind != "preproc":
            continue
        word = tok.text.split(None, 1)[0].lower() if tok.text.strip() else ""
        if word == "do":
            depth += 1
        elif word == "enddo":
            if depth == 0:
                return j
            depth -= 1
    return -1


def _resolve_include(name, base_dir, include_path):
    candidates = []
    if os.path.isabs(name):
        candidates.append(name)
    else:
        if base_dir:
            candidates.append(os.path.join(base_dir, name))
        candidates.append(os.path.join(os.getcwd(), name))
        candidates.extend(os.path.join(d, name) for d in include_path)
    for path in candidates:
        if os.path.isfile(path):
            return os.path.realpath(path)
    return None


def preprocess(tokens, env=None, include_path=(), *, comment_char="*",
               base_dir=None, _stack=()):
    """Expand every preprocessor construct in ``tokens``.

    Returns a new token list containing no preproc, macro or brace tokens.
    """
    if env is None:
        env = MacroEnv()
    out = []
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok.kind == "preproc":
            try:
                i = _directive(tokens, i, env, include_path, comment_char,
                               base_dir, _stack, out)
            except PreprocessError as exc:
                raise exc.located(tok.source, tok.line)
            continue
        j = i
        while (j + 1 < len(tokens) and tokens[j + 1].glued
               and tokens[j + 1].kind != "preproc"
               and tokens[j + 1].line == tok.line):
            j += 1
        run = tokens[i:j + 1]
        if any(t.kind in ("macro", "brace") for t in run):
            try:
                expanded = _expand_run(run, env)
            except PreprocessError as exc:
                raise exc.located(tok.source, tok.line)
            statement_start = not out or out[-1].kind == "directive" or (
                out[-1].kind == "punct" and out[-1].text == ";")
            for k, new in enumerate(expanded):
                if new.kind == "keyword" and not (k == 0 and statement_start):
                    new.kind = "name"
                elif (new.kind == "name" and k == 0 and statement_start
                      and new.text.lower() in KEYWORDS):
                    new.kind = "keyword"
            out.extend(expanded)
        else:
            out.extend(run)
        i = j + 1
    return out


def _directive(tokens, i, env, include_path, comment_char, base_dir, stack, out):
    tok = tokens[i]
    parts = tok.text.split(None, 1)
    word = parts[0].lower() if parts else ""
    rest = parts[1].strip() if len(parts) > 1 else ""

    if word == "define":
        m = _DEFINE.match(rest)
        if not m:
            raise PreprocessError('malformed #define, expected #define NAME "value"')
        env.define(m.group(1), m.group(2))
        return i + 1

    if word == "do":
        m = _DO.match(rest)
        if not m:
            raise PreprocessError("malformed #do, expected #do var = first, last")
        var = m.group(1)
        first = _IntArith(substitute_text(m.group(2), env)).evaluate()
        last = _IntArith(substitute_text(m.group(3), env)).evaluate()
        end = _find_enddo(tokens, i + 1)
        if end < 0:
            raise PreprocessError("unterminated #do")
        body = tokens[i + 1:end]
        for value in range(first, last + 1):
            env.push_loop(var, value)
            try:
                out.extend(preprocess(body, env, include_path, comment_char=comment_char,
                                      base_dir=base_dir, _stack=stack))
            finally:
                env.pop_loop()
        return end + 1

    if word == "enddo":
        raise PreprocessError("#enddo without matching #do")

    if word == "include":
        name = substitute_text(rest, env).strip()
        if name.startswith("-"):
            name = name[1:].strip()
        if not name:
            raise PreprocessError("#include needs a file name")
        path = _resolve_include(name, base_dir, include_path)
        if path is None:
            raise PreprocessError(f"include file {name!r} not found")
        if path in stack:
            raise PreprocessError(f"include cycle through {name!r}")
        if len(stack) >= MAX_INCLUDE_DEPTH:
            raise PreprocessError(f"include depth exceeds {MAX_INCLUDE_DEPTH}")
        with open(path, encoding="ascii", errors="replace") as fh:
            included = tokenize_source(fh.read(), comment_char, source=path)
        out.extend(preprocess(included, env, include_path, comment_char=comment_char,
                              base_dir=os.path.dirname(path), _stack=stack + (path,)))
        return i + 1

    raise PreprocessError(f"unsupported preprocessor command #{word}")
