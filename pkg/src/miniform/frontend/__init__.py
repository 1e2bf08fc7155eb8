"""Program text to modules: comments, tokens, macros, statements."""

import os

from .lexer import Token, strip_comments, tokenize, tokenize_source
from .parser import (BinOp, Call, IdentifyDef, LocalDef, ModuleUnit, Name, Neg, Num,
                     Statement, Wildcard, parse_expression, parse_modules)
from .preprocessor import MacroEnv, eval_brace_arith, preprocess

__all__ = [
    "Token", "strip_comments", "tokenize", "tokenize_source",
    "MacroEnv", "eval_brace_arith", "preprocess",
    "ModuleUnit", "Statement", "LocalDef", "IdentifyDef",
    "Num", "Name", "Wildcard", "Call", "Neg", "BinOp",
    "parse_expression", "parse_modules", "compile_text",
]


def compile_text(text, *, source=None, comment_char="*", include_path=(), env=None):
    """Run the whole frontend on one program text and return its modules."""
    base_dir = os.path.dirname(os.path.abspath(source)) if source else None
    tokens = tokenize_source(text, comment_char, source=source)
    tokens = preprocess(tokens, env if env is not None else MacroEnv(), include_path,
                        comment_char=comment_char, base_dir=base_dir)
    return parse_modules(tokens)
