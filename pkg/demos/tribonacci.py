"""Tribonacci numbers through the macro preprocessor.

The bundled program unrolls a ``#do`` loop into one module per value.  Each module
drops the oldest value, skips the two it still needs and defines the next
one, so at most three expressions are ever alive.  Run with
``python demos/tribonacci.py``.
"""

import io
import re

from miniform.frontend import compile_text
from miniform.programs import program_text
from miniform.runtime import run_text

source = program_text("example1.frm")
modules = compile_text(source)
print(f"{len(modules)} modules after preprocessing")

# how many expressions live at each module boundary
alive = []
out = io.StringIO()
status = run_text(source, out, on_module_end=lambda state: alive.append(len(state.expressions)))
print(f"exit status {status}, at most {max(alive)} expressions alive")

values = {int(n): int(v) for n, v in re.findall(r"\nT(\d+) =\n   (\d+);", out.getvalue())}
for n in (4, 5, 50, 99, 100):
    print(f"T{n} = {values[n]}")

# a plain loop agrees with every printed value
t = [0, 1, 1, 2]
while len(t) <= 100:
    t.append(t[-1] + t[-2] + t[-3])
assert all(values[n] == t[n] for n in range(4, 101))
print("all values agree with a direct recurrence")
