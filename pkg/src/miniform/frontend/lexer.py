"""Comment stripping and tokenization of program text."""

from dataclasses import dataclass, field

from ..errors import LexError

# First words that open a statement.  Only the word at the start of a
# statement is classified as a keyword; elsewhere the same spelling is an
# ordinary (case-sensitive) name.
KEYWORDS = frozenset({
    "s", "symbol", "symbols",
    "f", "function", "functions", "cf", "cfunction", "cfunctions",
    "l", "local", "g", "global",
    "drop", "skip", "print",
    "nwrite", "write",
    "id", "identify",
    "repeat", "endrepeat",
})

OPERATORS = "+-*/^=?"
PUNCTUATION = "(),;"


@dataclass(eq=False)
class Token:
    """One lexical unit.

    ``glued`` records that no whitespace separated this token from the
    previous one on the same line; the preprocessor needs it to splice
    ``T'i'`` into a single name.
    """

    kind: str
    text: str
    line: int = 0
    source: str | None = field(default=None, repr=False)
    glued: bool = field(default=False, repr=False)

    def _key(self):
        if self.kind in ("keyword", "directive"):
            return self.kind, self.text.lower()
        return self.kind, self.text

    def __eq__(self, other):
        if not isinstance(other, Token):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def raw(self):
        """Source spelling, used when glued tokens are re-lexed."""
        if self.kind == "bracket":
            return f"[{self.text}]"
        if self.kind == "macro":
            return f"'{self.text}'"
        if self.kind == "brace":
            return "{" + self.text + "}"
        if self.kind == "string":
            return f'"{self.text}"'
        if self.kind == "directive":
            return "." + self.text
        if self.kind == "preproc":
            return "#" + self.text
        return self.text


def strip_comments(line, comment_char="*"):
    """Blank out ``line`` if it is a comment line.

    Only a comment character in the first column starts a comment; anywhere
    else ``*`` is multiplication.
    """
    if line.startswith(comment_char):
        return ""
    return line


def _scan_balanced(line, start, open_ch, close_ch, lineno, source, what):
    depth = 0
    i = start
    while i < len(line):
        ch = line[i]
        if ch == open_ch:
            depth += 1
        elif ch == close_ch:
            depth -= 1
            if depth == 0:
                return i
        i += 1
    raise LexError(f"unterminated {what}", source=source, line=lineno)


def tokenize(text, *, source=None, first_line=1):
    """Split comment-free program text into tokens.

    ``[...]`` groups become single bracket tokens, ``'name'`` becomes a
    macro token and ``{...}`` a brace token; a line whose first non-blank
    character is ``#`` becomes one preproc token holding the rest of the
    line.
    """
    tokens = []
    at_statement_start = True
    for offset, line in enumerate(text.split("\n")):
        lineno = first_line + offset
        stripped = line.lstrip(" \t")
        if stripped.startswith("#"):
            tokens.append(Token("preproc", stripped[1:].rstrip(), lineno, source))
            continue
        i = 0
        n = len(line)
        while i < n:
            ch = line[i]
            if ch in " \t\r\f\v":
                i += 1
                continue
            glued = i > 0 and line[i - 1] not in " \t\r\f\v"
            start = i
            if ch.isalpha():
                while i < n and line[i].isalnum():
                    i += 1
                word = line[start:i]
                kind = "name"
                if at_statement_start and word.lower() in KEYWORDS:
                    kind = "keyword"
                tok = Token(kind, word, lineno, source, glued)
            elif ch.isdigit():
                while i < n and line[i].isdigit():
                    i += 1
                tok = Token("number", line[start:i], lineno, source, glued)
            elif ch == "[":
                end = _scan_balanced(line, i, "[", "]", lineno, source, "bracket '['")
                tok = Token("bracket", line[i + 1:end], lineno, source, glued)
                i = end + 1
            elif ch == "{":
                end = _scan_balanced(line, i, "{", "}", lineno, source, "brace '{'")
                tok = Token("brace", line[i + 1:end], lineno, source, glued)
                i = end + 1
            elif ch == "'":
                end = line.find("'", i + 1)
                if end < 0:
                    raise LexError("unterminated macro reference", source=source, line=lineno)
                tok = Token("macro", line[i + 1:end], lineno, source, glued)
                i = end + 1
            elif ch == '"':
                end = line.find('"', i + 1)
                if end < 0:
                    raise LexError("unterminated string", source=source, line=lineno)
                tok = Token("string", line[i + 1:end], lineno, source, glued)
                i = end + 1
            elif ch == "." and i + 1 < n and line[i + 1].isalpha():
                i += 1
                while i < n and line[i].isalnum():
                    i += 1
                tok = Token("directive", line[start + 1:i], lineno, source, glued)
            elif ch in OPERATORS:
                i += 1
                tok = Token("operator", ch, lineno, source, glued)
            elif ch in PUNCTUATION:
                i += 1
                tok = Token("punct", ch, lineno, source, glued)
            else:
                raise LexError(f"illegal character {ch!r}", source=source, line=lineno)
            if tok.kind not in ("macro", "brace"):
                at_statement_start = tok.kind == "directive" or (tok.kind == "punct" and tok.text == ";")
            tokens.append(tok)
    return tokens


def tokenize_source(text, comment_char="*", *, source=None):
    """Strip comment lines, then tokenize, keeping line numbers intact."""
    lines = [strip_comments(line, comment_char) for line in text.split("\n")]
    return tokenize("\n".join(lines), source=source)
