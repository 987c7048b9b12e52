"""Sparse multi-index arithmetic and the coarse/fine block-matching relation.

A multi-index is a finite tuple of non-negative integers, canonically stored
with trailing zeros removed.  The empty tuple is the zero index.  Multi-indexes
select Hermite orders per increment slot of a uniform time grid; a fine-grid
index matches a coarse one when each coarse entry equals the sum of its block
of N1 fine entries.
"""

from __future__ import annotations

import itertools
import math
from typing import Iterator, Optional, Tuple

MultiIndex = Tuple[int, ...]


def canonical(entries) -> MultiIndex:
    """Trim trailing zeros and validate non-negative integer entries."""
    a = tuple(int(x) for x in entries)
    if any(x < 0 for x in a):
        raise ValueError(f"multi-index entries must be non-negative: {a}")
    while a and a[-1] == 0:
        a = a[:-1]
    return a


def length(a: MultiIndex) -> int:
    """Total degree |a| = sum of entries."""
    return sum(a)


def factorial(a: MultiIndex) -> int:
    """Product of entry factorials, prod_i a_i! (exact integer)."""
    out = 1
    for x in a:
        out *= math.factorial(x)
    return out


def log_factorial(a: MultiIndex) -> float:
    """log(prod_i a_i!), safe for |a| well beyond exact-float range."""
    return sum(math.lgamma(x + 1) for x in a)


def last_nonzero(a: MultiIndex) -> Optional[Tuple[int, int]]:
    """(position, value) of the last nonzero entry, 1-based; None for zero index."""
    a = canonical(a)
    if not a:
        return None
    return len(a), a[-1]


def coarsen(a_fine: MultiIndex, n0: int, n1: int) -> MultiIndex:
    """Block sums: a_i = sum of fine entries in ((i-1)*n1, i*n1]."""
    a_fine = canonical(a_fine)
    if len(a_fine) > n0 * n1:
        raise ValueError(
            f"fine index of length {len(a_fine)} exceeds {n0}*{n1} slots"
        )
    padded = a_fine + (0,) * (n0 * n1 - len(a_fine))
    return canonical(
        sum(padded[i * n1 : (i + 1) * n1]) for i in range(n0)
    )


def matches(a_fine: MultiIndex, a_coarse: MultiIndex, n0: int, n1: int) -> bool:
    """True iff the fine index block-sums to the coarse one."""
    a_coarse = canonical(a_coarse)
    if len(a_coarse) > n0:
        raise ValueError(f"coarse index of length {len(a_coarse)} exceeds {n0} slots")
    return coarsen(a_fine, n0, n1) == a_coarse


def compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    """All ways to write ``total`` as an ordered sum of ``parts`` non-negative ints."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    for cut in itertools.combinations(range(total + parts - 1), parts - 1):
        prev = -1
        out = []
        for c in cut:
            out.append(c - prev - 1)
            prev = c
        out.append(total + parts - 2 - prev)
        yield tuple(out)


def enumerate_matching(a_coarse: MultiIndex, n0: int, n1: int) -> Iterator[MultiIndex]:
    """All fine indexes on n0*n1 slots matching ``a_coarse``, each exactly once.

    Per-block compositions are combined as a product; the stream has
    prod_i C(a_i + n1 - 1, n1 - 1) elements.
    """
    a_coarse = canonical(a_coarse)
    if len(a_coarse) > n0:
        raise ValueError(f"coarse index of length {len(a_coarse)} exceeds {n0} slots")
    padded = a_coarse + (0,) * (n0 - len(a_coarse))
    per_block = [compositions(ai, n1) for ai in padded]
    for blocks in itertools.product(*per_block):
        yield canonical(itertools.chain.from_iterable(blocks))


def enumerate_upto(dimension: int, max_degree: int) -> Iterator[MultiIndex]:
    """All indexes with canonical length <= dimension and |a| <= max_degree.

    Graded lexicographic order: by total degree, then lexicographic on the
    padded tuple, so the output is deterministic.
    """
    for deg in range(max_degree + 1):
        seen = sorted(
            canonical(c) for c in compositions(deg, dimension)
        )
        for a in seen:
            yield a


def format_multiindex(a: MultiIndex) -> str:
    """Canonical textual form "a1,a2,...,ak"; the zero index prints as "()"."""
    a = canonical(a)
    if not a:
        return "()"
    return ",".join(str(x) for x in a)


def parse_multiindex(text: str) -> MultiIndex:
    """Inverse of :func:`format_multiindex`; accepts "" and "()" for zero."""
    text = text.strip()
    if text in ("", "()"):
        return ()
    return canonical(int(part) for part in text.split(","))
