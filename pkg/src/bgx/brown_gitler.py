"""The named modules and maps: G(n), stunted projective homology, the basic
short exact sequence, q(n,r), the extensions Q(n,r), Mahowald sequences,
p_m, and h_0.

G(n) is modelled on the Milnor basis: its degree-k piece has one basis
vector for each Milnor element of degree n-k whose excess is at most k,
with the right action given by Milnor multiplication followed by discarding
the terms that leave that range.  The degree-n generator iota_n corresponds
to the unit profile.
"""

from __future__ import annotations

import dataclasses
import os
from functools import lru_cache
from typing import Optional

from .errors import ContractViolation, DomainError
from .f2 import BitMatrix
from .amodule import (
    AModule,
    Element,
    ModuleMap,
    ShortExactSeq,
    build_map,
    f2_module,
    make_module,
    milnor_action,
    pullback_extension,
    suspend,
    tensor,
    tensor_pairs,
)
from .steenrod import (
    AlgebraSpec,
    binom2,
    milnor_basis,
    milnor_degree,
    milnor_excess,
    milnor_product,
    milnor_str,
    parse_milnor,
)

__all__ = [
    "default_window",
    "brown_gitler",
    "g_basis_profiles",
    "top_class",
    "stunted_projective",
    "basic_sequence",
    "p_map",
    "sq_mult_map",
    "mahowald_sequence",
    "q_map",
    "q_tilde",
    "q_extension",
    "h0_sequence",
    "g2_tensor_sequence",
    "map_from_top_class",
    "rename",
]

FULL_A = AlgebraSpec.full()


def default_window() -> int:
    """Default truncation window, overridable through BGX_WINDOW."""
    try:
        return int(os.environ.get("BGX_WINDOW", "24"))
    except ValueError:
        return 24


def rename(m: AModule, name: str) -> AModule:
    return dataclasses.replace(m, name=name)


@lru_cache(maxsize=None)
def g_basis_profiles(n: int):
    """Per-degree Milnor profiles indexing the basis of G(n)."""
    if n < 0:
        raise ContractViolation("G(n) needs n >= 0")
    out = {}
    for k in range(n + 1):
        profiles = tuple(
            p for p in milnor_basis(n - k) if milnor_excess(p) <= k
        )
        if profiles:
            out[k] = profiles
    return out


@lru_cache(maxsize=None)
def brown_gitler(n: int) -> AModule:
    """The free unstable right module on one degree-n class iota_n."""
    profiles = g_basis_profiles(n)
    labels = {k: [milnor_str(p) for p in ps] for k, ps in profiles.items()}
    index = {
        k: {p: i for i, p in enumerate(ps)} for k, ps in profiles.items()
    }
    action = {}
    for k, ps in profiles.items():
        for i in range(1, k - min(profiles) + 1):
            tgt = index.get(k - i)
            if tgt is None:
                continue
            rows = []
            for p in ps:
                bits = 0
                for q in milnor_product(p, (i,)):
                    if q in tgt:
                        bits |= 1 << tgt[q]
                rows.append(bits)
            action[((i,), k)] = BitMatrix(len(ps), len(tgt), tuple(rows))
    return make_module(FULL_A, labels, action, "G(%d)" % n)


def top_class(n: int) -> Element:
    """iota_n, the universal class in G(n)_n."""
    return Element(n, 1)


@lru_cache(maxsize=None)
def stunted_projective(k: int, dmax: int) -> AModule:
    """H of the stunted projective spectrum P_k, for k in {-1, 0, 1}.

    Basis t_j for k <= j <= dmax, with t_j.Sq^i = binom(j-i, i) t_{j-i}.
    The result is a truncation, recorded as such.
    """
    if k not in (-1, 0, 1):
        raise ContractViolation("stunted projective only built for k in {-1,0,1}")
    if dmax < k:
        raise ContractViolation("window below bottom cell")
    labels = {j: ["t%d" % j] for j in range(k, dmax + 1)}
    action = {}
    for j in range(k, dmax + 1):
        for i in range(1, j - k + 1):
            if binom2(j - i, i):
                action[((i,), j)] = BitMatrix(1, 1, (1,))
    return make_module(FULL_A, labels, action, "H(P%d)" % k, truncation=dmax)


def map_from_top_class(n: int, target: AModule, w: Element) -> ModuleMap:
    """The module map G(n) -> target classified by iota_n -> w.

    Exists whenever the target is unstable; each basis vector iota_n.u goes
    to w.u.
    """
    if w.degree != n:
        raise ContractViolation("classifying element must live in degree n")
    src = brown_gitler(n)
    profiles = g_basis_profiles(n)
    mats = {}
    for k, ps in profiles.items():
        rows = [milnor_action(target, w, p).bits for p in ps]
        mats[k] = BitMatrix(len(ps), target.dim(k), tuple(rows))
    return build_map(src, target, 0, mats, "from-top")


def basic_sequence(m: AModule, dmax: Optional[int] = None) -> ShortExactSeq:
    """0 -> S^-1 m -> m (x) H(P_-1) -> m (x) H(P_0) -> 0, truncated at dmax."""
    if dmax is None:
        dmax = default_window()
    dmax = max(dmax, m.dmax)  # the sub term is never truncated
    pm1 = stunted_projective(-1, max(dmax - m.dmin, -1))
    p0 = stunted_projective(0, max(dmax - m.dmin, 0))
    mid = tensor(m, pm1, dmax=dmax)
    quo = tensor(m, p0, dmax=dmax)
    sub = suspend(m, -1)
    inc = {}
    for d in sub.degrees():
        pairs = tensor_pairs(m, pm1, d)
        pos = {p: i for i, p in enumerate(pairs)}
        rows = []
        for i in range(m.dim(d + 1)):
            rows.append(1 << pos[(d + 1, i, 0)])  # y (x) t_-1
        inc[d] = BitMatrix(sub.dim(d), mid.dim(d), tuple(rows))
    prj = {}
    for d in mid.degrees():
        pairs = tensor_pairs(m, pm1, d)
        qpairs = {p: i for i, p in enumerate(tensor_pairs(m, p0, d))}
        rows = []
        for (da, i, j) in pairs:
            t_index = d - da  # P_k has one basis vector per degree
            rows.append(1 << qpairs[(da, i, j)] if t_index >= 0 else 0)
        prj[d] = BitMatrix(mid.dim(d), quo.dim(d), tuple(rows))
    return ShortExactSeq(
        build_map(sub, mid, 0, inc, "t-bottom"),
        build_map(mid, quo, 0, prj, "drop-t-1"),
    )


@lru_cache(maxsize=None)
def p_map(m: int) -> ModuleMap:
    """The nonzero map G(m+1) -> S G(m), iota_{m+1} -> s iota_m.

    Degreewise it is the excess quotient: a Milnor basis vector survives
    exactly when its excess allows it one degree lower.
    """
    src = brown_gitler(m + 1)
    tgt = suspend(brown_gitler(m), 1)
    src_profiles = g_basis_profiles(m + 1)
    tgt_profiles = g_basis_profiles(m)
    mats = {}
    for k, ps in src_profiles.items():
        tprof = tgt_profiles.get(k - 1, ())
        tpos = {p: i for i, p in enumerate(tprof)}
        rows = [1 << tpos[p] if p in tpos else 0 for p in ps]
        mats[k] = BitMatrix(len(ps), tgt.dim(k), tuple(rows))
    return build_map(src, tgt, 0, mats, "p%d" % m)


@lru_cache(maxsize=None)
def sq_mult_map(k: int, n: int) -> ModuleMap:
    """Right multiplication by Sq^k as a map G(n) -> G(n+k)."""
    src = brown_gitler(n)
    tgt = brown_gitler(n + k)
    tgt_profiles = g_basis_profiles(n + k)
    mats = {}
    for d, ps in g_basis_profiles(n).items():
        tpos = {p: i for i, p in enumerate(tgt_profiles.get(d, ()))}
        rows = []
        for p in ps:
            bits = 0
            for q in milnor_product((k,), p):
                if q in tpos:
                    bits |= 1 << tpos[q]
            rows.append(bits)
        mats[d] = BitMatrix(len(ps), tgt.dim(d), tuple(rows))
    return build_map(src, tgt, 0, mats, "Sq%d." % k)


@lru_cache(maxsize=None)
def mahowald_sequence(n: int) -> ShortExactSeq:
    """0 -> G(n) -> G(2n) -> S G(2n-1) -> 0."""
    if n < 1:
        raise ContractViolation("Mahowald sequence needs n >= 1")
    seq = ShortExactSeq(sq_mult_map(n, n), p_map(2 * n - 1))
    bad = seq.check()
    if bad:
        raise ContractViolation("Mahowald sequence failed exactness: %s" % bad)
    return seq


def _q_target(n: int, r: int, bottom: int):
    window = n + r + 1
    pk = stunted_projective(bottom, window)
    gn = brown_gitler(n)
    return tensor(gn, pk, dmax=window), gn, pk


@lru_cache(maxsize=None)
def q_map(n: int, r: int) -> ModuleMap:
    """G(n+r) -> G(n) (x) H(P_0), hitting the sum of all basis elements."""
    if n < 0 or r < 0:
        raise ContractViolation("q(n,r) needs n, r >= 0")
    target, _, _ = _q_target(n, r, 0)
    w = Element(n + r, (1 << target.dim(n + r)) - 1)
    f = map_from_top_class(n + r, target, w)
    return ModuleMap(f.source, f.target, 0, f.matrices, "q(%d,%d)" % (n, r))


@lru_cache(maxsize=None)
def q_tilde(n: int, r: int) -> ModuleMap:
    """The corestriction of q(n,r) through G(n) (x) H(P_1)."""
    if (n, r) in ((0, 0), (1, 0)):
        raise DomainError(
            "q~(%d,%d) does not exist: q(n,r) hits t_0 in the simple cases" % (n, r)
        )
    q = q_map(n, r)
    target, gn, _ = _q_target(n, r, 1)
    pk0 = stunted_projective(0, n + r + 1)
    pk1 = stunted_projective(1, n + r + 1)
    mats = {}
    for d, mat in q.matrices.items():
        pairs0 = tensor_pairs(gn, pk0, d)
        pos1 = {p: i for i, p in enumerate(tensor_pairs(gn, pk1, d))}
        rows = []
        for v in mat.data:
            out = 0
            for idx, (da, i, j) in enumerate(pairs0):
                if not (v >> idx) & 1:
                    continue
                key = (da, i, j)
                if key not in pos1:  # a t_0 component survived
                    raise DomainError(
                        "q(%d,%d) does not factor through H(P_1)" % (n, r)
                    )
                out |= 1 << pos1[key]
            rows.append(out)
        mats[d] = BitMatrix(mat.rows, target.dim(d), tuple(rows))
    return build_map(q.source, target, 0, mats, "q~(%d,%d)" % (n, r))


@lru_cache(maxsize=None)
def q_extension(n: int, r: int) -> ShortExactSeq:
    """Q(n,r): the pullback of the basic sequence of G(n) along q(n,r)."""
    base = basic_sequence(brown_gitler(n), n + r + 1)
    seq = pullback_extension(base, q_map(n, r))
    mid = rename(seq.mid, "Q(%d,%d)" % (n, r))
    return ShortExactSeq(
        ModuleMap(seq.sub, mid, 0, seq.inclusion.matrices, seq.inclusion.name),
        ModuleMap(mid, seq.quot, 0, seq.projection.matrices, seq.projection.name),
    )


@lru_cache(maxsize=None)
def h0_sequence() -> ShortExactSeq:
    """The nonsplit extension 0 -> S F2 -> G(2) -> S^2 F2 -> 0."""
    g2 = brown_gitler(2)
    sub = f2_module(FULL_A, 1, "SF2")
    quo = f2_module(FULL_A, 2, "S2F2")
    inc = build_map(sub, g2, 0, {1: [[1]]}, "incl")
    prj = build_map(g2, quo, 0, {2: [[1]]}, "proj")
    return ShortExactSeq(inc, prj)


def g2_tensor_sequence(m: AModule) -> ShortExactSeq:
    """0 -> S m -> G(2) (x) m -> S^2 m -> 0 from the cell structure of G(2).

    The inclusion sends s x to (iota_2 Sq^1) (x) x and the projection reads
    off the iota_2 component.
    """
    g2 = brown_gitler(2)
    mid = tensor(g2, m)
    sub = suspend(m, 1)
    quo = suspend(m, 2)
    # In G(2): degree 1 = iota_2 Sq^1, degree 2 = iota_2; both have index 0.
    inc = {}
    for d in sub.degrees():
        pairs = tensor_pairs(g2, m, d)
        pos = {p: i for i, p in enumerate(pairs)}
        rows = [1 << pos[(1, 0, i)] for i in range(m.dim(d - 1))]
        inc[d] = BitMatrix(sub.dim(d), mid.dim(d), tuple(rows))
    prj = {}
    for d in mid.degrees():
        pairs = tensor_pairs(g2, m, d)
        rows = []
        for (da, i, j) in pairs:
            rows.append(1 << j if da == 2 else 0)
        prj[d] = BitMatrix(mid.dim(d), quo.dim(d), tuple(rows))
    seq = ShortExactSeq(
        build_map(sub, mid, 0, inc, "cell1"), build_map(mid, quo, 0, prj, "cell2")
    )
    bad = seq.check()
    if bad:
        raise ContractViolation("G(2) tensor sequence not exact: %s" % bad)
    return seq


def profile_of_label(label: str):
    """G(n) labels are Milnor profiles; recover the tuple."""
    return parse_milnor(label)
