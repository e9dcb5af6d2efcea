"""Set-partition enumeration in restricted-growth-string form.

A labeling ``a`` of ``n`` symbols is canonical when ``a[0] == 0`` and every
``a[i] <= max(a[:i]) + 1``. Canonical labelings with at most ``k`` distinct
values are in bijection with partitions of the symbols into at most ``k``
blocks, so enumerating them removes the ``k!`` relabeling redundancy.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np


@lru_cache(maxsize=None)
def stirling2(n: int, k: int) -> int:
    """Stirling number of the second kind S(n, k)."""
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    return k * stirling2(n - 1, k) + stirling2(n - 1, k - 1)


def count_labelings(n: int, max_blocks: int) -> int:
    """Number of canonical labelings of ``n`` symbols using at most ``max_blocks`` labels."""
    if n == 0:
        return 1
    return sum(stirling2(n, k) for k in range(1, min(n, max_blocks) + 1))


def bell(n: int) -> int:
    return count_labelings(n, n)


def labelings(n: int, max_blocks: int | None = None) -> Iterator[tuple[int, ...]]:
    """Yield canonical labelings of ``n`` symbols in lexicographic order."""
    if max_blocks is None:
        max_blocks = n
    if n == 0:
        yield ()
        return
    if max_blocks < 1:
        return
    a = [0] * n

    def rec(i: int, top: int) -> Iterator[tuple[int, ...]]:
        if i == n:
            yield tuple(a)
            return
        for v in range(min(top + 2, max_blocks)):
            a[i] = v
            yield from rec(i + 1, max(top, v))

    a[0] = 0
    yield from rec(1, 0)


def labeling_array(n: int, max_blocks: int | None = None) -> np.ndarray:
    """All canonical labelings stacked into an ``(count, n)`` integer array."""
    rows = list(labelings(n, max_blocks))
    return np.array(rows, dtype=np.intp).reshape(len(rows), n)


def canonicalize(codes: Sequence[int]) -> tuple[int, ...]:
    """Relabel ``codes`` by first occurrence."""
    seen: dict[int, int] = {}
    return tuple(seen.setdefault(int(c), len(seen)) for c in codes)


def is_refinement(fine: Sequence[int], coarse: Sequence[int]) -> bool:
    """True when every block of ``fine`` lies inside a block of ``coarse``.

    Equivalently ``coarse`` is a function of ``fine``.
    """
    image: dict[int, int] = {}
    for f, c in zip(fine, coarse):
        if image.setdefault(int(f), int(c)) != int(c):
            return False
    return True


def one_hot(codes: Sequence[int], levels: int) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.intp)
    out = np.zeros((codes.size, levels))
    out[np.arange(codes.size), codes] = 1.0
    return out
