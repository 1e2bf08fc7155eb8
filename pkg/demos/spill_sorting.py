"""Sorting a term stream larger than the in-memory buffer.

With a tiny ``small_size`` the sorter writes sorted runs to temporary
files and merges them back.  The result is the same as sorting in memory
and no files are left behind.  Run with ``python demos/spill_sorting.py``.
"""

import os
import random
import tempfile
from fractions import Fraction

from miniform.settings import Settings
from miniform.sorting import sort_merge, spill_sort
from miniform.terms import Declarations, format_sum, normalize

decls = Declarations(["x", "y", "z"])
rng = random.Random(1)


def random_term():
    symbols = [(rng.randrange(3), rng.randint(0, 3)) for _ in range(2)]
    return normalize(Fraction(rng.randint(-5, 5) or 1), symbols)


stream = [random_term() for _ in range(2000)]

with tempfile.TemporaryDirectory() as temp:
    for small in (256, 4096, 16 * 1024 * 1024):
        report = {}
        result = spill_sort(iter(stream), Settings(temp_dir=temp, small_size=small), report)
        assert result == sort_merge(stream)
        assert not os.listdir(temp)
        print(f"SmallSize {small:>8}: {len(report['spill_files']):>3} run files, "
              f"{report['generated']} terms in, {len(result)} out, {report['bytes']} bytes")

print(format_sum(result[:4], decls), "...")
