"""Canonical terms: exact coefficients, symbol powers, function factors.

A :class:`Term` is immutable and hashable.  Its ``symbols`` field is a
tuple of ``(symbol_id, exponent)`` pairs sorted by id with no zero
exponents; ``functions`` is a sorted tuple of :class:`FunctionApplication`
in which repeated applications stay separate factors.
"""

import sys
from fractions import Fraction
from typing import NamedTuple

from .errors import TermError

MAX_EXPONENT = 2**31 - 1

_END = (sys.maxsize,)


class SymbolArg(NamedTuple):
    """A function argument that is a bare symbol."""

    symbol: int


class FunctionApplication(NamedTuple):
    function: int
    args: tuple = ()


class Term(NamedTuple):
    coef: Fraction
    symbols: tuple = ()
    functions: tuple = ()

    @property
    def body(self):
        """The coefficient-free part; like terms share it."""
        return self.symbols, self.functions

    def with_coef(self, coef):
        return Term(coef, self.symbols, self.functions)


ONE = Term(Fraction(1))


class Declarations:
    """Symbol and function tables, numbered in declaration order.

    Bracket names are stored with their brackets and share the namespace
    with plain names.  Instances are never mutated; ``declare_*`` returns a
    new table.
    """

    def __init__(self, symbols=(), functions=()):
        self.symbol_names = tuple(symbols)
        self.function_names = tuple(functions)
        self.symbols = {name: i for i, name in enumerate(self.symbol_names)}
        self.functions = {name: i for i, name in enumerate(self.function_names)}

    def _check_new(self, names):
        seen = set()
        for name in names:
            if name in self.symbols or name in self.functions or name in seen:
                raise TermError(f"name {name!r} is already declared")
            seen.add(name)

    def declare_symbols(self, names):
        self._check_new(names)
        return Declarations(self.symbol_names + tuple(names), self.function_names)

    def declare_functions(self, names):
        self._check_new(names)
        return Declarations(self.symbol_names, self.function_names + tuple(names))

    def __repr__(self):
        return f"Declarations(symbols={list(self.symbol_names)}, functions={list(self.function_names)})"


# -- construction and arithmetic ----------------------------------------------


def normalize(coef, symbols=(), functions=(), decls=None):
    """Canonical term from raw factors, or ``None`` when the coefficient is 0.

    ``symbols`` may contain repeated or unsorted ``(id, exponent)`` pairs;
    exponents of equal ids are added and zero exponents dropped.
    """
    coef = Fraction(coef)
    if coef == 0:
        return None
    powers = {}
    for sym, exp in symbols:
        powers[sym] = powers.get(sym, 0) + exp
    merged = []
    for sym in sorted(powers):
        exp = powers[sym]
        if exp == 0:
            continue
        if abs(exp) > MAX_EXPONENT:
            name = decls.symbol_names[sym] if decls is not None else f"#{sym}"
            raise TermError(f"exponent of {name} exceeds {MAX_EXPONENT}")
        merged.append((sym, exp))
    return Term(coef, tuple(merged), tuple(sorted(functions, key=function_key)))


def multiply(a, b):
    """Product of two canonical terms (canonical, never zero)."""
    if not a.symbols:
        symbols = b.symbols
    elif not b.symbols:
        symbols = a.symbols
    else:
        powers = dict(a.symbols)
        for sym, exp in b.symbols:
            powers[sym] = powers.get(sym, 0) + exp
        symbols = []
        for sym in sorted(powers):
            exp = powers[sym]
            if exp:
                if abs(exp) > MAX_EXPONENT:
                    raise TermError(f"exponent exceeds {MAX_EXPONENT}")
                symbols.append((sym, exp))
        symbols = tuple(symbols)
    if not a.functions:
        functions = b.functions
    elif not b.functions:
        functions = a.functions
    else:
        functions = tuple(sorted(a.functions + b.functions, key=function_key))
    return Term(a.coef * b.coef, symbols, functions)


# -- ordering -----------------------------------------------------------------


def arg_key(arg):
    if isinstance(arg, SymbolArg):
        return (1, arg.symbol)
    if isinstance(arg, tuple):
        return (2, tuple(term_key(t) + (t.coef,) for t in arg))
    return (0, arg)


def function_key(fa):
    return (fa.function, tuple(arg_key(a) for a in fa.args) + (_END,))


def term_key(t):
    """Sort key: symbols by id with descending exponents, then functions.

    A shorter factor list sorts after any extension of it, so ``x^2``,
    ``x*y``, ``x`` and ``1`` come out in that order.
    """
    return (
        tuple((sym, -exp) for sym, exp in t.symbols) + (_END,),
        tuple(function_key(f) for f in t.functions) + (_END,),
    )


def compare(a, b):
    """-1, 0 or 1; zero exactly when ``a`` and ``b`` are like terms."""
    ka, kb = term_key(a), term_key(b)
    return (ka > kb) - (ka < kb)


# -- formatting ---------------------------------------------------------------


def format_coef(coef):
    if coef.denominator == 1:
        return str(coef.numerator)
    return f"{coef.numerator}/{coef.denominator}"


def format_arg(arg, decls):
    if isinstance(arg, SymbolArg):
        return decls.symbol_names[arg.symbol]
    if isinstance(arg, tuple):
        return format_sum(arg, decls)
    return str(arg)


def format_factors(t, decls):
    parts = []
    for sym, exp in t.symbols:
        name = decls.symbol_names[sym]
        parts.append(name if exp == 1 else f"{name}^{exp}")
    for fa in t.functions:
        name = decls.function_names[fa.function]
        if fa.args:
            parts.append(f"{name}({','.join(format_arg(a, decls) for a in fa.args)})")
        else:
            parts.append(name)
    return parts


def format_magnitude(t, decls):
    """The term without its sign."""
    factors = format_factors(t, decls)
    mag = abs(t.coef)
    if factors and mag == 1:
        return "*".join(factors)
    return "*".join([format_coef(mag)] + factors)


def format_term(t, decls, *, leading=True):
    """Render a term; non-leading terms get a spaced explicit sign."""
    body = format_magnitude(t, decls)
    if leading:
        return "-" + body if t.coef < 0 else body
    return (" - " if t.coef < 0 else " + ") + body


def format_sum(terms, decls):
    if not terms:
        return "0"
    return "".join(format_term(t, decls, leading=(i == 0)) for i, t in enumerate(terms))
