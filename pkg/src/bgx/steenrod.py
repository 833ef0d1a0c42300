"""The mod 2 Steenrod algebra in the Milnor basis.

A Milnor basis element Sq(r1,...,rk) is stored as a plain tuple of
nonnegative integers with no trailing zeros; the empty tuple is the unit.
Its degree is sum r_i (2^i - 1).  F2 sums of basis elements are frozensets
of profiles, wrapped in SteenrodElement when handed to users.

Also here: the sub-Hopf algebras the rest of the package can work over
(all of A on a degree window, the exterior algebras E(h) on the Milnor
primitives Q_0..Q_h, and A(1)), together with the change of basis from
Milnor elements to words in each algebra's preferred generators.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .errors import ContractViolation, SchemaViolation
from .f2 import BitMatrix, solve

__all__ = [
    "MilnorElt",
    "SteenrodElement",
    "AlgebraSpec",
    "binom2",
    "milnor_degree",
    "milnor_str",
    "parse_milnor",
    "milnor_basis",
    "milnor_product",
    "product_sets",
    "conjugation_sum",
    "bg_excess",
    "milnor_excess",
    "admissible_words",
    "milnor_to_composite",
    "subalgebra_basis",
    "action_words",
]

# A Milnor basis element is just its profile tuple.
MilnorElt = tuple


def binom2(m: int, i: int) -> int:
    """Coefficient of x^i in (1+x)^m over F2, for any integer m.

    For m >= 0 this is Lucas' theorem; for m < 0 the formal expansion gives
    binom2(-1, i) = 1 for all i >= 0.
    """
    if i < 0:
        return 0
    if m >= 0:
        return 1 if (m & i) == i else 0
    # binom(m, i) = (-1)^i binom(i - m - 1, i); the sign dies mod 2.
    t = i - m - 1
    return 1 if (t & i) == i else 0


def milnor_degree(p: MilnorElt) -> int:
    return sum(r * ((1 << (i + 1)) - 1) for i, r in enumerate(p))


def milnor_str(p: MilnorElt) -> str:
    return "Sq(%s)" % ",".join(str(r) for r in p)


def parse_milnor(s: str) -> MilnorElt:
    s = s.strip()
    if not (s.startswith("Sq(") and s.endswith(")")):
        raise SchemaViolation("cannot parse Milnor element %r" % s)
    inner = s[3:-1].strip()
    if not inner:
        return ()
    try:
        p = tuple(int(t) for t in inner.split(","))
    except ValueError:
        raise SchemaViolation("cannot parse Milnor element %r" % s)
    if any(r < 0 for r in p):
        raise SchemaViolation("negative entry in %r" % s)
    while p and p[-1] == 0:
        p = p[:-1]
    return p


def _canonical(profile) -> MilnorElt:
    p = list(profile)
    while p and p[-1] == 0:
        p.pop()
    return tuple(p)


@lru_cache(maxsize=None)
def milnor_basis(d: int):
    """All Milnor profiles of degree d, in decreasing lexicographic order."""
    if d < 0:
        return ()
    out = []

    def rec(remaining, slot, prefix):
        w = (1 << (slot + 1)) - 1
        if w > remaining:
            if remaining == 0:
                out.append(_canonical(prefix))
            return
        for r in range(remaining // w + 1):
            rec(remaining - r * w, slot + 1, prefix + [r])

    rec(d, 0, [])
    out.sort(reverse=True)
    return tuple(out)


@lru_cache(maxsize=None)
def milnor_product(a: MilnorElt, b: MilnorElt):
    """The product a.b in A, as a frozenset of Milnor profiles."""
    m, n = len(a), len(b)
    if m == 0:
        return frozenset([b])
    if n == 0:
        return frozenset([a])
    terms = set()
    # Milnor matrices X[i][j], i = 0..m, j = 0..n; X[i][0] and X[0][j] are
    # the leftovers of row/column sums, X[0][0] is unused.
    X = [[0] * (n + 1) for _ in range(m + 1)]
    col_rem = [0] + list(b)

    def emit():
        profile = []
        for l in range(1, m + n + 1):
            total = 0
            seen = 0
            for i in range(0, min(l, m) + 1):
                j = l - i
                if j > n or (i == 0 and j == 0):
                    continue
                x = X[i][j]
                if seen & x:
                    return
                seen |= x
                total += x
            profile.append(total)
        p = _canonical(profile)
        if p in terms:
            terms.discard(p)
        else:
            terms.add(p)

    def fill_row(i):
        if i > m:
            for j in range(1, n + 1):
                X[0][j] = col_rem[j]
            emit()
            return

        def choose(j, rem):
            if j > n:
                X[i][0] = rem
                fill_row(i + 1)
                return
            top = min(rem >> j, col_rem[j])
            for v in range(top + 1):
                X[i][j] = v
                col_rem[j] -= v
                choose(j + 1, rem - (v << j))
                col_rem[j] += v
            X[i][j] = 0

        choose(1, a[i - 1])

    fill_row(1)
    return frozenset(terms)


def product_sets(x, y):
    """Product of two F2 sums of Milnor elements (frozensets of profiles)."""
    acc = set()
    for p in x:
        for q in y:
            acc ^= milnor_product(p, q)
    return frozenset(acc)


@dataclass(frozen=True)
class SteenrodElement:
    """A homogeneous F2 sum of Milnor basis elements."""

    degree: int
    terms: frozenset

    def __post_init__(self):
        for p in self.terms:
            if milnor_degree(p) != self.degree:
                raise ContractViolation("mixed degrees in SteenrodElement")

    @staticmethod
    def from_terms(terms) -> "SteenrodElement":
        terms = frozenset(terms)
        d = milnor_degree(next(iter(terms))) if terms else 0
        return SteenrodElement(d, terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "SteenrodElement") -> "SteenrodElement":
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.degree != other.degree:
            raise ContractViolation("cannot add different degrees")
        return SteenrodElement(self.degree, self.terms ^ other.terms)

    def __mul__(self, other: "SteenrodElement") -> "SteenrodElement":
        acc = product_sets(self.terms, other.terms)
        return SteenrodElement(self.degree + other.degree, frozenset(acc))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(milnor_str(p) for p in sorted(self.terms, reverse=True))


def conjugation_sum(j: int) -> SteenrodElement:
    """chi(Sq^j): the sum of all Milnor basis elements of degree j."""
    return SteenrodElement(max(j, 0), frozenset(milnor_basis(j)))


def bg_excess(p: MilnorElt) -> int:
    """sum 2^i r_i over the profile; controls survival into G(n)."""
    return sum(r << (i + 1) for i, r in enumerate(p))


def milnor_excess(p: MilnorElt) -> int:
    """Standard Milnor excess: sum of the profile entries."""
    return sum(p)


@lru_cache(maxsize=None)
def admissible_words(d: int, cap: int = -1):
    """Admissible words (a1,...,ak), a_i >= 2 a_{i+1}, of total degree d.

    cap < 0 means no bound on the first letter.
    """
    if d == 0:
        return ((),)
    if d < 0:
        return ()
    out = []
    top = d if cap < 0 else min(cap, d)
    for a1 in range(top, 0, -1):
        for rest in admissible_words(d - a1, a1 // 2):
            out.append((a1,) + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def _word_expansion(word):
    """Expand a word of Sq exponents into the Milnor basis."""
    acc = frozenset([()])
    for a in word:
        acc = product_sets(acc, frozenset([(a,)]))
    return acc


@lru_cache(maxsize=None)
def _composite_table(d: int):
    words = admissible_words(d)
    basis = milnor_basis(d)
    index = {p: i for i, p in enumerate(basis)}
    # Rows = Milnor basis elements, columns = admissible words; solve picks a
    # word combination hitting a given basis element.
    rows = [0] * len(basis)
    for c, w in enumerate(words):
        for p in _word_expansion(w):
            rows[index[p]] |= 1 << c
    return words, BitMatrix(len(basis), len(words), tuple(rows)), index


@lru_cache(maxsize=None)
def milnor_to_composite(p: MilnorElt):
    """Write a Milnor basis element as an F2 sum of admissible Sq words.

    Returns a frozenset of words; each word is a tuple of Sq exponents to be
    applied left to right under a right action.
    """
    d = milnor_degree(p)
    words, mat, index = _composite_table(d)
    if p not in index:
        raise ContractViolation("%s is not a Milnor basis element" % milnor_str(p))
    x = solve(mat, 1 << index[p])
    if x is None:  # unreachable: the change of basis is invertible
        raise ContractViolation("no admissible expression for %s" % milnor_str(p))
    return frozenset(w for c, w in enumerate(words) if (x >> c) & 1)


@dataclass(frozen=True)
class AlgebraSpec:
    """Which algebra acts: all of A, E(h) = Lambda(Q_0..Q_h), or A(1)."""

    kind: str  # "A" | "E" | "A1"
    h: int = -1

    @staticmethod
    def full() -> "AlgebraSpec":
        return AlgebraSpec("A")

    @staticmethod
    def exterior(h: int) -> "AlgebraSpec":
        if h < 0:
            raise ContractViolation("E(h) needs h >= 0")
        return AlgebraSpec("E", h)

    @staticmethod
    def a1() -> "AlgebraSpec":
        return AlgebraSpec("A1")

    @staticmethod
    def from_name(name: str) -> "AlgebraSpec":
        if name == "A":
            return AlgebraSpec.full()
        if name == "A1":
            return AlgebraSpec.a1()
        if name.startswith("E") and name[1:].isdigit():
            return AlgebraSpec.exterior(int(name[1:]))
        raise SchemaViolation("unknown algebra %r" % name)

    @property
    def name(self) -> str:
        if self.kind == "A":
            return "A"
        if self.kind == "A1":
            return "A1"
        return "E%d" % self.h

    @property
    def is_full(self) -> bool:
        return self.kind == "A"

    def contains(self, p: MilnorElt) -> bool:
        if self.kind == "A":
            return True
        if self.kind == "E":
            return len(p) <= self.h + 1 and all(r <= 1 for r in p)
        return len(p) <= 2 and p[0:1] <= (3,) and p[1:2] <= (1,)

    def is_subalgebra_of(self, other: "AlgebraSpec") -> bool:
        if other.kind == "A":
            return True
        if other.kind == self.kind == "E":
            return self.h <= other.h
        if other.kind == "A1":
            return self == other or (self.kind == "E" and self.h == 0)
        return self == other

    def generators(self):
        """Generator profiles; module actions are stored on these."""
        if self.kind == "A":
            raise ContractViolation("full A has no finite generator list")
        if self.kind == "E":
            return tuple((0,) * i + (1,) for i in range(self.h + 1))
        return ((1,), (2,))

    def top_degree(self):
        if self.kind == "A":
            return None
        if self.kind == "E":
            return (1 << (self.h + 2)) - self.h - 3  # sum of 2^{i+1}-1
        return 6

    def gen_key(self, p: MilnorElt) -> str:
        """JSON key used for an action generator."""
        if self.kind == "E":
            return "Q%d" % (len(p) - 1)
        return "Sq%d" % p[0]

    def parse_gen_key(self, key: str) -> MilnorElt:
        if self.kind == "E":
            if not (key.startswith("Q") and key[1:].isdigit()):
                raise SchemaViolation("bad action key %r for %s" % (key, self.name))
            j = int(key[1:])
            if j > self.h:
                raise SchemaViolation("generator %r outside %s" % (key, self.name))
            return (0,) * j + (1,)
        if not (key.startswith("Sq") and key[2:].isdigit()):
            raise SchemaViolation("bad action key %r" % key)
        i = int(key[2:])
        if i < 1:
            raise SchemaViolation("action key %r has nonpositive degree" % key)
        p = (i,)
        if not self.contains(p):
            raise SchemaViolation("generator %r outside %s" % (key, self.name))
        return p


def subalgebra_basis(spec: AlgebraSpec, d: int):
    """Milnor basis elements of degree d lying in the subalgebra."""
    if spec.is_full:
        return milnor_basis(d)
    return tuple(p for p in milnor_basis(d) if spec.contains(p))


@lru_cache(maxsize=None)
def _gen_word_expansion(word):
    """Expand a word of generator profiles into the Milnor basis."""
    acc = frozenset([()])
    for g in word:
        acc = product_sets(acc, frozenset([g]))
    return acc


@lru_cache(maxsize=None)
def _a1_words(d: int):
    """All words in Sq1, Sq2 of total degree d (A(1) is tiny, this is fine)."""
    if d == 0:
        return ((),)
    out = []
    for g in ((1,), (2,)):
        gd = g[0]
        if gd <= d:
            for rest in _a1_words(d - gd):
                out.append((g,) + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def _a1_decomposition(p: MilnorElt):
    d = milnor_degree(p)
    words = _a1_words(d)
    basis = subalgebra_basis(AlgebraSpec.a1(), d)
    index = {q: i for i, q in enumerate(basis)}
    rows = [0] * len(basis)
    for c, w in enumerate(words):
        for q in _gen_word_expansion(w):
            rows[index[q]] |= 1 << c
    x = solve(BitMatrix(len(basis), len(words), tuple(rows)), 1 << index[p])
    if x is None:  # unreachable for elements of A(1)
        raise ContractViolation("%s is not a word in Sq1,Sq2" % milnor_str(p))
    return frozenset(w for c, w in enumerate(words) if (x >> c) & 1)


def action_words(spec: AlgebraSpec, p: MilnorElt):
    """Decompose a Milnor element of the algebra into generator words.

    Each word is a tuple of generator profiles, applied left to right under
    a right action.  Substituting the algebra product for concatenation
    recovers the element.
    """
    if not spec.contains(p):
        raise ContractViolation(
            "%s does not lie in %s" % (milnor_str(p), spec.name)
        )
    if spec.kind == "A":
        return frozenset(
            tuple((a,) for a in w) for w in milnor_to_composite(p)
        )
    if spec.kind == "E":
        # Sq(e1,...,ek) with entries in {0,1} is the ordered product of the
        # Milnor primitives marked by the profile.
        word = tuple((0,) * i + (1,) for i, e in enumerate(p) if e)
        return frozenset([word])
    return _a1_decomposition(p)
