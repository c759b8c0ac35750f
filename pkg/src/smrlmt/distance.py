"""Edit distance between page bodies and the page-equality criterion built on it.

``levenshtein`` uses the bit-vector formulation (Myers/Hyyro) with Python
integers as arbitrarily wide words, so one column update costs a handful of
big-int operations instead of a full DP row. Page bodies of a few KB compare
in milliseconds.
"""

from __future__ import annotations

from typing import Union

Text = Union[bytes, str]

DEFAULT_THRESHOLD = 0.05


def levenshtein(a: Text, b: Text) -> int:
    """Unit-cost edit distance (insert, delete, substitute)."""
    if isinstance(a, str):
        a = a.encode("utf-8")
    if isinstance(b, str):
        b = b.encode("utf-8")
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    m = len(b)
    if m == 0:
        return len(a)

    peq: dict[int, int] = {}
    for i, c in enumerate(b):
        peq[c] = peq.get(c, 0) | (1 << i)

    mask = (1 << m) - 1
    high = 1 << (m - 1)
    pv, mv, score = mask, 0, m
    for c in a:
        eq = peq.get(c, 0)
        xv = eq | mv
        xh = ((((eq & pv) + pv) & mask) ^ pv) | eq
        ph = (mv | ~(xh | pv)) & mask
        mh = pv & xh
        if ph & high:
            score += 1
        elif mh & high:
            score -= 1
        ph = ((ph << 1) | 1) & mask
        mh = (mh << 1) & mask
        pv = (mh | ~(xv | ph)) & mask
        mv = ph & xv
    return score


def page_equal(a: Text, b: Text, threshold: float = DEFAULT_THRESHOLD) -> bool:
    """True iff ``levenshtein(a, b) <= threshold * max(len(a), len(b))``."""
    if isinstance(a, str):
        a = a.encode("utf-8")
    if isinstance(b, str):
        b = b.encode("utf-8")
    limit = threshold * max(len(a), len(b))
    # length difference is a lower bound on the distance
    if abs(len(a) - len(b)) > limit:
        return False
    return levenshtein(a, b) <= limit
