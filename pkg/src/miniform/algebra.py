"""Evaluation of expression trees into merged lists of terms."""

from fractions import Fraction

from .errors import ExecutionError, RewriteError
from .frontend.parser import BinOp, Call, Name, Neg, Num, Wildcard, tree_names
from .sorting import sort_merge
from .terms import ONE, FunctionApplication, SymbolArg, Term, multiply


class Scope:
    """What names mean while a tree is evaluated."""

    def __init__(self, decls, expressions=None, bindings=None):
        self.decls = decls
        self.expressions = expressions or {}
        self.bindings = bindings or {}


def constant(value):
    value = Fraction(value)
    return [Term(value)] if value else []


def as_constant(terms):
    """The value of a purely numeric sum, else ``None``."""
    if not terms:
        return Fraction(0)
    if len(terms) == 1 and not terms[0].symbols and not terms[0].functions:
        return terms[0].coef
    return None


def add(a, b):
    return sort_merge(list(a) + list(b))


def negate(terms):
    return [t.with_coef(-t.coef) for t in terms]


def mul(a, b):
    return sort_merge([multiply(x, y) for x in a for y in b])


def invert(terms):
    if len(terms) != 1 or terms[0].functions:
        raise ExecutionError("only a single term without functions can be inverted")
    t = terms[0]
    return [Term(1 / t.coef, tuple((s, -e) for s, e in t.symbols), ())]


def power(base, n):
    if n < 0:
        base, n = invert(base), -n
    result = [ONE]
    while n:
        if n & 1:
            result = mul(result, base)
        n >>= 1
        if n:
            base = mul(base, base)
    return result


def to_argument(terms):
    """Function argument for an evaluated sum: int, symbol or nested sum."""
    value = as_constant(terms)
    if value is not None and value.denominator == 1:
        return int(value)
    if (len(terms) == 1 and terms[0].coef == 1 and not terms[0].functions
            and len(terms[0].symbols) == 1 and terms[0].symbols[0][1] == 1):
        return SymbolArg(terms[0].symbols[0][0])
    return tuple(terms)


def evaluate(node, scope):
    """Expand ``node`` into a sorted, merged list of terms."""
    if isinstance(node, Num):
        return constant(node.value)
    if isinstance(node, Name):
        return _name(node.name, scope)
    if isinstance(node, Call):
        return [Term(Fraction(1), (), (_application(node, scope),))]
    if isinstance(node, Neg):
        return negate(evaluate(node.operand, scope))
    if isinstance(node, BinOp):
        left = evaluate(node.left, scope)
        right = evaluate(node.right, scope)
        if node.op == "+":
            return add(left, right)
        if node.op == "-":
            return add(left, negate(right))
        if node.op == "*":
            return mul(left, right)
        if node.op == "/":
            if not right:
                raise ExecutionError("division by zero")
            return mul(left, invert(right))
        if node.op == "^":
            n = as_constant(right)
            if n is None or n.denominator != 1:
                raise ExecutionError("exponent must be an integer")
            return power(left, int(n))
    if isinstance(node, Wildcard):
        raise ExecutionError(f"wildcard {node.name}? outside a pattern")
    raise ExecutionError(f"cannot evaluate {node!r}")


def _name(name, scope):
    if name in scope.bindings:
        return constant(scope.bindings[name])
    decls = scope.decls
    if name in decls.symbols:
        return [Term(Fraction(1), ((decls.symbols[name], 1),))]
    if name in scope.expressions:
        return list(scope.expressions[name])
    if name in decls.functions:
        return [Term(Fraction(1), (), (FunctionApplication(decls.functions[name]),))]
    raise ExecutionError(f"unknown name {name!r}")


def _application(node, scope):
    fid = scope.decls.functions.get(node.name)
    if fid is None:
        raise ExecutionError(f"{node.name!r} is not a declared function")
    args = []
    for arg in node.args:
        value = evaluate(arg, scope)
        if scope.bindings and tree_names(arg) & scope.bindings.keys():
            number = as_constant(value)
            if number is not None and number.denominator != 1:
                raise RewriteError(f"wildcard arithmetic in {node.name}(...) gives non-integer {number}")
        args.append(to_argument(value))
    return FunctionApplication(fid, tuple(args))
