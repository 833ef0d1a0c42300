"""Independent reference computations used by the tests.

Everything here recomputes expected values by a route disjoint from the
package internals: admissible-word arithmetic with math.comb parities, a
direct recursive count of admissible words, and a one-step lookup table for
the Dyer-Lashof rewriting.
"""

from __future__ import annotations

import math
from functools import lru_cache


def comb_odd(a: int, b: int) -> bool:
    return 0 <= b <= a and (math.comb(a, b) & 1) == 1


@lru_cache(maxsize=None)
def adem_word_nf(word: tuple):
    """Normal form of a composite of total squares in the full algebra."""
    for idx in range(len(word) - 1):
        a, b = word[idx], word[idx + 1]
        if a < 2 * b:
            acc = set()
            for c in range(0, a // 2 + 1):
                if comb_odd(b - c - 1, a - 2 * c):
                    repl = (a + b - c,) + ((c,) if c else ())
                    acc ^= adem_word_nf(word[:idx] + repl + word[idx + 2 :])
            return frozenset(acc)
    return frozenset([word])


def word_product(x: frozenset, y: frozenset) -> frozenset:
    """Product of two F2 sums of admissible words, renormalized."""
    acc = set()
    for w1 in x:
        for w2 in y:
            acc ^= adem_word_nf(w1 + w2)
    return frozenset(acc)


@lru_cache(maxsize=None)
def admissible_count(d: int, cap: int = -1) -> int:
    """Number of admissible words of degree d with first entry <= cap."""
    if d == 0:
        return 1
    if d < 0:
        return 0
    top = d if cap < 0 else min(cap, d)
    return sum(admissible_count(d - a, a // 2) for a in range(1, top + 1))


# One-step table for the homology Adem relation Q^r Q^t (r > 2t), built
# with its own binomial parity; two-adic convention only matters for a
# negative second argument, which the bounds below exclude.


@lru_cache(maxsize=None)
def dl_one_step(r: int, t: int):
    """Q^r Q^t as a sum of pairs (a, b); identity when already admissible."""
    if r <= 2 * t:
        return frozenset([(r, t)])
    out = set()
    for i in range((r + 1) // 2, r - t):
        if comb_odd(i - t - 1, 2 * i - r):
            pair = (r + t - i, i)
            out ^= {pair}
    return frozenset(out)


def dl_normalize_oracle(exps: tuple, bdeg: int, max_steps: int = 200000):
    """Iterate the one-step table plus the bottom rule to termination.

    Worklist rewriting, leftmost violating pair first, with multiset parity
    bookkeeping; structurally unlike the package's recursive normalizer.
    """
    pending = {tuple(exps): 1}
    done = {}
    steps = 0
    while pending:
        w, cnt = pending.popitem()
        if cnt % 2 == 0:
            continue
        steps += 1
        if steps > max_steps:
            raise RuntimeError("oracle rewriting did not terminate")
        # Bottom rule: an exponent below the degree of what follows kills
        # the word (degrees do not depend on admissibility).
        suffix = 0
        killed = False
        for j in range(len(w) - 1, -1, -1):
            if w[j] < bdeg + suffix:
                killed = True
                break
            suffix += w[j]
        if killed:
            continue
        for j in range(len(w) - 1):
            if w[j] > 2 * w[j + 1]:
                for (a, b) in dl_one_step(w[j], w[j + 1]):
                    w2 = w[:j] + (a, b) + w[j + 2 :]
                    pending[w2] = pending.get(w2, 0) + cnt
                break
        else:
            done[w] = done.get(w, 0) + cnt
    return frozenset(w for w, c in done.items() if c % 2)
