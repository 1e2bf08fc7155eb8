"""Sorting and merging of term streams, in memory or through spill files.

Spill files hold one sorted run each.  Layout: a single version byte, then
records of ``<u32 little-endian length><payload>``; payload encodings are
produced by :func:`encode_term`.
"""

import heapq
import os
import struct
import tempfile
from fractions import Fraction

from .errors import SpillError, TermError
from .terms import FunctionApplication, SymbolArg, Term, term_key

SPILL_VERSION = 1

_U32 = struct.Struct("<I")
_I32 = struct.Struct("<i")
_U8 = struct.Struct("<B")


def sort_merge(terms):
    """Sorted list with like terms added and zero sums removed."""
    acc = {}
    for t in terms:
        body = (t.symbols, t.functions)
        if body in acc:
            acc[body] += t.coef
        else:
            acc[body] = t.coef
    out = [Term(c, s, f) for (s, f), c in acc.items() if c != 0]
    out.sort(key=term_key)
    return out


# -- binary encoding ----------------------------------------------------------


def _put_int(buf, value):
    size = (value.bit_length() + 8) // 8
    buf += _U32.pack(size)
    buf += value.to_bytes(size, "little", signed=True)


def _put_term(buf, t):
    _put_int(buf, t.coef.numerator)
    _put_int(buf, t.coef.denominator)
    buf += _U32.pack(len(t.symbols))
    for sym, exp in t.symbols:
        buf += _U32.pack(sym)
        buf += _I32.pack(exp)
    buf += _U32.pack(len(t.functions))
    for fa in t.functions:
        buf += _U32.pack(fa.function)
        buf += _U32.pack(len(fa.args))
        for arg in fa.args:
            if isinstance(arg, SymbolArg):
                buf += _U8.pack(1)
                buf += _U32.pack(arg.symbol)
            elif isinstance(arg, tuple):
                buf += _U8.pack(2)
                buf += _U32.pack(len(arg))
                for inner in arg:
                    _put_term(buf, inner)
            else:
                buf += _U8.pack(0)
                _put_int(buf, arg)


def encode_term(t):
    buf = bytearray()
    _put_term(buf, t)
    return bytes(buf)


class _Reader:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def unpack(self, st):
        (value,) = st.unpack_from(self.data, self.pos)
        self.pos += st.size
        return value

    def int(self):
        size = self.unpack(_U32)
        value = int.from_bytes(self.data[self.pos:self.pos + size], "little", signed=True)
        self.pos += size
        return value

    def term(self):
        num = self.int()
        den = self.int()
        symbols = tuple((self.unpack(_U32), self.unpack(_I32)) for _ in range(self.unpack(_U32)))
        functions = []
        for _ in range(self.unpack(_U32)):
            fid = self.unpack(_U32)
            args = []
            for _ in range(self.unpack(_U32)):
                tag = self.unpack(_U8)
                if tag == 0:
                    args.append(self.int())
                elif tag == 1:
                    args.append(SymbolArg(self.unpack(_U32)))
                else:
                    args.append(tuple(self.term() for _ in range(self.unpack(_U32))))
            functions.append(FunctionApplication(fid, tuple(args)))
        return Term(Fraction(num, den), symbols, tuple(functions))


def decode_term(data):
    reader = _Reader(data)
    t = reader.term()
    if reader.pos != len(data):
        raise ValueError("trailing bytes after term record")
    return t


def write_run(fh, terms):
    fh.write(_U8.pack(SPILL_VERSION))
    for t in terms:
        payload = encode_term(t)
        fh.write(_U32.pack(len(payload)))
        fh.write(payload)


def read_run(fh):
    """Yield the terms of one spill file in stored order."""
    head = fh.read(1)
    if not head or head[0] != SPILL_VERSION:
        raise SpillError("spill file has an unknown format version")
    while True:
        prefix = fh.read(4)
        if not prefix:
            return
        (size,) = _U32.unpack(prefix)
        yield decode_term(fh.read(size))


# -- spilling sort ------------------------------------------------------------


def _merge_sorted(runs):
    current_key = current = None
    coef = Fraction(0)
    for t in heapq.merge(*runs, key=term_key):
        body = (t.symbols, t.functions)
        if body == current_key:
            coef += t.coef
            continue
        if current is not None and coef != 0:
            yield current.with_coef(coef)
        current_key, current, coef = body, t, t.coef
    if current is not None and coef != 0:
        yield current.with_coef(coef)


def spill_sort(terms, settings, report=None):
    """Same result as :func:`sort_merge`, bounded by ``settings.small_size``.

    Whenever the buffered terms exceed ``small_size`` serialized bytes the
    buffer is sorted and written to a temporary file under
    ``settings.temp_dir``; the runs are k-way merged at the end and the
    files removed.  ``report``, if given, is a dict that receives
    ``generated``, ``bytes`` and ``spill_files``.
    """
    limit = settings.small_size
    max_term = settings.max_term_size
    buffer = []
    buffered = 0
    total_bytes = 0
    generated = 0
    paths = []
    try:
        for t in terms:
            size = len(encode_term(t)) + _U32.size
            if size > max_term:
                raise TermError(f"term of {size} bytes exceeds MaxTermSize {max_term}")
            generated += 1
            total_bytes += size
            buffer.append(t)
            buffered += size
            if buffered > limit:
                paths.append(_spill(sort_merge(buffer), settings.temp_dir))
                buffer, buffered = [], 0
        if report is not None:
            report["generated"] = generated
            report["bytes"] = total_bytes
            report["spill_files"] = list(paths)
        if not paths:
            return sort_merge(buffer)
        handles = [open(p, "rb") for p in paths]
        try:
            runs = [read_run(fh) for fh in handles]
            runs.append(iter(sort_merge(buffer)))
            return list(_merge_sorted(runs))
        finally:
            for fh in handles:
                fh.close()
    finally:
        for p in paths:
            try:
                os.remove(p)
            except OSError:
                pass


def _spill(run, temp_dir):
    try:
        fd, path = tempfile.mkstemp(prefix=f"miniform-{os.getpid()}-", suffix=".run", dir=temp_dir)
    except OSError as exc:
        raise SpillError(f"temporary directory {temp_dir!r} is not writable: {exc.strerror}") from None
    try:
        with os.fdopen(fd, "wb") as fh:
            write_run(fh, run)
    except BaseException:
        os.remove(path)
        raise
    return path
