"""Free allowable Dyer-Lashof modules and the suspension complex.

A word Q^{i_1}...Q^{i_s} sigma^j(x) over a base module is kept in
admissible form (i_k <= 2 i_{k+1}) and allowable form (excess
i_1 - i_2 - ... - i_s at least the degree of sigma^j x); everything else is
rewritten by the Dyer-Lashof Adem relation

    Q^r Q^t = sum_i binom(i-t-1, 2i-r) Q^{r+t-i} Q^i        (r > 2t)

and the bottom rule Q^r y = 0 for r < |y|.  Steenrod squares act through the
Nishida relation

    (Q^r y) Sq^k = sum_i binom(r-k, k-2i) Q^{r-k+i} (y Sq^i),

with the everywhere-used two-adic binomial convention.

Suspensions are explicit decorations: a module value represents
Sigma^outer R_s(Sigma^inner base), so the chain-level bookkeeping of the
suspension comparison map and of the differential

    d(Q^I sigma^-1 x) = sum_{i>=0} Q^I Q^{i-1} (x Sq^i)

stays exact.  The complex whose weight-s term is Sigma R_s(Sigma^{s-1} m)
computes the derived functors of the maximal-unstable-submodule functor;
its degree-zero homology is that submodule itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Optional

from .errors import ContractViolation, WindowError
from .f2 import (
    BitMatrix,
    Subspace,
    echelon_insert,
    kernel_basis,
    reduce_vector,
    row_reduce,
)
from .amodule import (
    AModule,
    Element,
    ModuleMap,
    is_unstable,
    make_module,
    tensor_pairs,
)
from .steenrod import binom2

__all__ = [
    "DLWord",
    "FreeDLModule",
    "DLMap",
    "allowable_basis",
    "free_dl",
    "adem_normalize",
    "nishida_action",
    "mu_concat",
    "raw_differential",
    "steenrod_matrix",
    "to_amodule",
    "complex_bases",
    "differential",
    "complex_homology",
    "epsilon_map",
    "ls_dims",
    "rho_coset",
    "tilde_d0",
    "dl_pushforward",
    "word_str",
]

class DLWord(NamedTuple):
    exps: tuple  # (i_1, ..., i_s), outermost first
    base_degree: int  # degree of the base element inside the base module
    base_index: int


def _excess(exps) -> int:
    return exps[0] - sum(exps[1:]) if exps else 0


def _allowable(exps, beff: int) -> bool:
    return not exps or _excess(exps) >= beff


@lru_cache(maxsize=None)
def _prepend(r: int, w: tuple, beff: int):
    """Normal form of Q^r applied to the admissible allowable word (w, beff)."""
    deg = beff + sum(w)
    if r < deg:
        return frozenset()
    if not w or r <= 2 * w[0]:
        return frozenset([(r,) + w])
    t = w[0]
    acc = set()
    for i in range((r + 1) // 2, r - t):
        if binom2(i - t - 1, 2 * i - r):
            for u in _prepend(i, w[1:], beff):
                acc ^= _prepend(r + t - i, u, beff)
    return frozenset(acc)


@lru_cache(maxsize=None)
def adem_normalize(exps: tuple, beff: int):
    """Rewrite an arbitrary exponent sequence over a degree-beff base.

    Returns the F2 set of admissible allowable exponent tuples.  Idempotent:
    admissible allowable input comes straight back.
    """
    if not exps:
        return frozenset([()])
    acc = set()
    for w in adem_normalize(exps[1:], beff):
        acc ^= _prepend(exps[0], w, beff)
    return frozenset(acc)


@dataclass(frozen=True)
class FreeDLModule:
    """Sigma^outer R_s(Sigma^inner base), on a total degree window."""

    base: AModule
    s: int
    inner: int
    outer: int
    lo: int
    hi: int
    basis: dict  # degree -> tuple of DLWord
    index: dict  # degree -> {word: position}

    def dim(self, d: int) -> int:
        return len(self.basis.get(d, ()))

    def degrees(self):
        return sorted(d for d, ws in self.basis.items() if ws)

    def word_degree(self, w: DLWord) -> int:
        return self.outer + sum(w.exps) + self.inner + w.base_degree

    def locate(self, w: DLWord) -> int:
        return self.index[self.word_degree(w)][w]

    def same_shape(self, other: "FreeDLModule") -> bool:
        return (
            self.base is other.base
            and (self.s, self.inner, self.outer) == (other.s, other.inner, other.outer)
        )

    def element_str(self, d: int, bits: int) -> str:
        names = [
            word_str(w, self.base, self.inner)
            for i, w in enumerate(self.basis.get(d, ()))
            if (bits >> i) & 1
        ]
        return " + ".join(names) if names else "0"


def word_str(w: DLWord, base: AModule, inner: int) -> str:
    head = "".join("Q^%d " % i for i in w.exps)
    label = base.labels[w.base_degree][w.base_index]
    if inner:
        return "%ss^%d(%s)" % (head, inner, label)
    return "%s%s" % (head, label) if head else label


def free_dl(
    base: AModule, s: int, hi: int, inner: int = 0, outer: int = 0
) -> FreeDLModule:
    """Enumerate the admissible allowable basis up to total degree hi."""
    if s < 0:
        raise ContractViolation("weight must be nonnegative")
    words = {}

    def push(exps, beff):
        """Extend the suffix `exps` of effective degree beff to length s."""
        if len(exps) == s:
            yield exps
            return
        cur = beff + sum(exps)
        lo_i = cur  # allowability for the next outer exponent
        hi_i = hi - outer - cur
        if exps:
            hi_i = min(hi_i, 2 * exps[0])
        for i in range(lo_i, hi_i + 1):
            yield from push((i,) + exps, beff)

    for bd in range(base.dmin, base.dmax + 1):
        for bi in range(base.dim(bd)):
            beff = bd + inner
            for exps in push((), beff):
                w = DLWord(exps, bd, bi)
                d = outer + sum(exps) + inner + bd
                if d <= hi:
                    words.setdefault(d, []).append(w)
    basis = {}
    index = {}
    lo = hi
    for d, ws in words.items():
        ws.sort(key=lambda w: (w.base_degree, w.base_index, w.exps))
        basis[d] = tuple(ws)
        index[d] = {w: i for i, w in enumerate(ws)}
        lo = min(lo, d)
    return FreeDLModule(base, s, inner, outer, lo, hi, basis, index)


def allowable_basis(m: AModule, s: int, hi: int) -> FreeDLModule:
    """R_s(m) on a window; weight zero returns m's own basis."""
    return free_dl(m, s, hi)


@dataclass(frozen=True)
class DLMap:
    source: FreeDLModule
    target: FreeDLModule
    matrices: dict  # degree shift is encoded by aligned degrees below
    degree_shift: int = 0

    def matrix(self, d: int) -> BitMatrix:
        mat = self.matrices.get(d)
        if mat is not None:
            return mat
        return BitMatrix.zero(self.source.dim(d), self.target.dim(d + self.degree_shift))

    def is_zero(self) -> bool:
        return all(m.is_zero() for m in self.matrices.values())

    def compose(self, other: "DLMap") -> "DLMap":
        mats = {}
        for d in self.source.degrees():
            mats[d] = self.matrix(d).matmul(other.matrix(d + self.degree_shift))
        return DLMap(
            self.source, other.target, mats, self.degree_shift + other.degree_shift
        )


def _emit(F: FreeDLModule, exps, y: Element, out: dict):
    """Add Q^exps applied to base element y (degree in base) into out."""
    beff = y.degree + F.inner
    for nf in adem_normalize(tuple(exps), beff):
        d = F.outer + sum(nf) + F.inner + y.degree
        if d > F.hi:
            raise WindowError("normal form leaves the window at degree %d" % d)
        pos = F.index[d]
        bits = y.bits
        bi = 0
        while bits:
            if bits & 1:
                w = DLWord(nf, y.degree, bi)
                out[d] = out.get(d, 0) ^ (1 << pos[w])
            bits >>= 1
            bi += 1


def nishida_action(F: FreeDLModule, w: DLWord, k: int) -> dict:
    """(Q^I sigma^j x) Sq^k as {degree: bits} over F's basis at degree d-k."""
    out = {}
    base = F.base
    for exps, y in _nishida_terms(F, w.exps, Element(w.base_degree, 1 << w.base_index), k):
        if y.bits:
            _emit(F, exps, y, out)
    return out


def _nishida_terms(F: FreeDLModule, exps, y: Element, k: int):
    """Expand the Nishida relation recursively; yields (exps', element)."""
    if k == 0:
        yield exps, y
        return
    if not exps:
        out = Element(y.degree - k, 0)
        for i in range(F.base.dim(y.degree)):
            if (y.bits >> i) & 1:
                z = F.base.act_gen(Element(y.degree, 1 << i), (k,))
                out = Element(out.degree, out.bits ^ z.bits)
        if out.bits:
            yield (), out
        return
    r = exps[0]
    for i in range(0, k // 2 + 1):
        if not binom2(r - k, k - 2 * i):
            continue
        for sub_exps, z in _nishida_terms(F, exps[1:], y, i):
            if z.bits:
                yield (r - k + i,) + sub_exps, z


def steenrod_matrix(F: FreeDLModule, k: int, d: int) -> BitMatrix:
    rows = []
    for w in F.basis.get(d, ()):
        acc = nishida_action(F, w, k)
        rows.append(acc.get(d - k, 0))
    return BitMatrix(F.dim(d), F.dim(d - k), tuple(rows))


def to_amodule(F: FreeDLModule, name: Optional[str] = None) -> AModule:
    """Package a windowed free Dyer-Lashof module as a plain module."""
    labels = {
        d: [word_str(w, F.base, F.inner) for w in ws]
        for d, ws in F.basis.items()
        if ws
    }
    action = {}
    degs = F.degrees()
    if degs:
        span = degs[-1] - degs[0]
        for d in degs:
            for k in range(1, span + 1):
                if F.dim(d - k):
                    mat = steenrod_matrix(F, k, d)
                    if not mat.is_zero():
                        action[((k,), d)] = mat
    return make_module(
        F.base.algebra, labels, action, name or "R_%d(%s)" % (F.s, F.base.name)
    )


def mu_concat(prefix, F: FreeDLModule, x: Element, target: FreeDLModule) -> Element:
    """Concatenate outer exponents onto an element of F and renormalize."""
    if not (target.base is F.base and target.inner == F.inner):
        raise ContractViolation("mu needs matching base and inner suspension")
    if target.s != F.s + len(prefix):
        raise ContractViolation("mu target has wrong weight")
    out = {}
    for i, w in enumerate(F.basis.get(x.degree, ())):
        if (x.bits >> i) & 1:
            _emit(
                target,
                tuple(prefix) + w.exps,
                Element(w.base_degree, 1 << w.base_index),
                out,
            )
    d = x.degree + sum(prefix) + (target.outer - F.outer)
    return Element(d, out.get(d, 0))


def raw_differential(
    base: AModule, s: int, hi: int, inner: int = -1, outer: int = 0
):
    """d_s as a map R_s(Sigma^inner base) -> R_{s+1}(Sigma^{inner+1} base).

    The formula d(Q^I sigma^{-1} u) = sum_{i>=0} Q^I Q^{i-1}(u Sq^i) is read
    with u the once-more-suspended base element; the i = 0 term enters as
    Q^{-1} and dies by allowability whenever its base sits in degree >= 0.
    Total degree is preserved.
    """
    src = free_dl(base, s, hi, inner, outer)
    tgt = free_dl(base, s + 1, hi, inner + 1, outer)
    mats = {}
    for d, ws in src.basis.items():
        rows = []
        for w in ws:
            out = {}
            # i = 0 term: Q^{-1} on the suspended element itself.
            _emit(tgt, w.exps + (-1,), Element(w.base_degree, 1 << w.base_index), out)
            for i in range(1, w.base_degree - base.dmin + 1):
                y = base.act_gen(Element(w.base_degree, 1 << w.base_index), (i,))
                if y.bits:
                    _emit(tgt, w.exps + (i - 1,), y, out)
            rows.append(out.get(d, 0))
            for dd in out:
                if dd != d and out[dd]:
                    raise ContractViolation("differential failed to preserve degree")
        mats[d] = BitMatrix(len(ws), tgt.dim(d), tuple(rows))
    return DLMap(src, tgt, mats, 0)


def complex_bases(m: AModule, s: int, hi: int, extra: int = 0) -> FreeDLModule:
    """Weight-s term of the suspension complex of Sigma^extra m."""
    return free_dl(m, s, hi, inner=s - 1 + extra, outer=1)


def differential(m: AModule, s: int, hi: int, extra: int = 0) -> DLMap:
    """The complex differential out of weight s, on a degree window."""
    return raw_differential(m, s, hi, inner=s - 1 + extra, outer=1)


@dataclass(frozen=True)
class DLHomology:
    """ker/im data of the complex at one weight."""

    free: FreeDLModule
    dims: dict
    reps: dict  # degree -> tuple of coset representative bit vectors
    kernel: dict  # degree -> Subspace
    image: dict  # degree -> Subspace

    def coset_bits(self, d: int, bits: int) -> int:
        sp = self.image.get(d)
        return reduce_vector(bits, sp.basis.data) if sp else bits


def complex_homology(m: AModule, s: int, hi: int, extra: int = 0) -> DLHomology:
    """Homology of the suspension complex at weight s: the s-th derived
    functor of the maximal unstable submodule, degree by degree."""
    if m.truncation is not None and hi > m.truncation:
        raise WindowError("widen window: base module truncated below %d" % hi)
    d_out = differential(m, s, hi, extra)
    kernel = {}
    image = {}
    if s > 0:
        d_in = differential(m, s - 1, hi, extra)
        if not d_in.target.same_shape(d_out.source):
            raise ContractViolation("complex levels misaligned")
        for d in d_in.source.degrees():
            mat = d_in.matrix(d)
            _, _, rref = row_reduce(mat)
            rows = tuple(r for r in rref.data if r)
            image[d] = Subspace(d_out.source.dim(d), BitMatrix(len(rows), d_out.source.dim(d), rows))
    for d in d_out.source.degrees():
        kernel[d] = kernel_basis(d_out.matrix(d).transpose())
    dims = {}
    reps = {}
    for d in d_out.source.degrees():
        ker = kernel.get(d)
        img = image.get(d)
        kdim = ker.dim if ker else 0
        idim = img.dim if img else 0
        if kdim - idim:
            dims[d] = kdim - idim
        chosen = []
        seen = list(img.basis.data) if img else []
        for v in ker.vectors() if ker else ():
            if echelon_insert(seen, v):
                chosen.append(v)
        reps[d] = tuple(chosen)
    return DLHomology(d_out.source, dims, reps, kernel, image)


def epsilon_map(F: FreeDLModule, hi: Optional[int] = None) -> DLMap:
    """Sigma R_s(N) -> R_s(Sigma N): re-suspend each word, killing the ones
    whose excess no longer clears the suspended base degree."""
    tgt = free_dl(
        F.base, F.s, (hi if hi is not None else F.hi), F.inner + 1, F.outer - 1
    )
    mats = {}
    for d, ws in F.basis.items():
        rows = []
        for w in ws:
            if _allowable(w.exps, w.base_degree + F.inner + 1):
                rows.append(1 << tgt.locate(w))
            else:
                rows.append(0)
        mats[d] = BitMatrix(len(ws), tgt.dim(d), tuple(rows))
    return DLMap(F, tgt, mats, 0)


def ls_dims(m: AModule, s: int, hi: int):
    """Graded dimensions of the image of suspension on weight-s homology.

    Source: homology of the complex of Sigma^{-s} m; target: that of
    Sigma^{1-s} m, one degree up.
    """
    ha = complex_homology(m, s, hi, extra=-s)
    hb = complex_homology(m, s, hi + 1, extra=1 - s)
    out = {}
    for d in sorted(set(ha.kernel) | set(ha.dims)):
        ker = ha.kernel.get(d)
        if ker is None or ker.dim == 0:
            continue
        imgb = hb.image.get(d + 1)
        img_rows = list(imgb.basis.data) if imgb else []
        base_rank = len(img_rows)
        rows = list(img_rows)
        tgt_index = hb.free.index.get(d + 1, {})
        for v in ker.vectors():
            out_bits = 0
            for i, w in enumerate(ha.free.basis.get(d, ())):
                if not (v >> i) & 1:
                    continue
                if _allowable(w.exps, w.base_degree + ha.free.inner + 1):
                    out_bits |= 1 << tgt_index[w]
            rows.append(out_bits)
        width = max(hb.free.dim(d + 1), 1)
        rank = BitMatrix(len(rows), width, tuple(rows)).rank()
        if rank - base_rank:
            out[d] = rank - base_rank
    return out


@dataclass(frozen=True)
class Coset:
    free: FreeDLModule
    degree: int
    bits: int  # already reduced against the image

    def is_zero(self) -> bool:
        return self.bits == 0


def _c1_context(m: AModule, hi: int):
    """d_0 of the complex of Sigma^{-1} m, with its image subspaces."""
    d0 = differential(m, 0, hi, extra=-1)
    image = {}
    for d in d0.source.degrees():
        _, _, rref = row_reduce(d0.matrix(d))
        rows = tuple(r for r in rref.data if r)
        image[d] = Subspace(d0.target.dim(d), BitMatrix(len(rows), d0.target.dim(d), rows))
    return d0, image


def rho_coset(m: AModule, r: int, x: Element, hi: Optional[int] = None) -> Coset:
    """The class of sigma Q^r sigma^{-1} x in the cokernel of d_0.

    For unstable m this cokernel is the weight-one derived functor of the
    suspension complex of Sigma^{-1} m, where the extension classes live.
    """
    if not is_unstable(m):
        raise ContractViolation("rho classes need an unstable module")
    if hi is None:
        hi = max(r + x.degree, m.dmax) + 1
    d0, image = _c1_context(m, hi)
    C1 = d0.target  # FreeDL(m, 1, inner=-1, outer=1)
    out = {}
    bits = 0
    for i in range(m.dim(x.degree)):
        if (x.bits >> i) & 1:
            _emit(C1, (r,), Element(x.degree, 1 << i), out)
    d = r + x.degree
    bits = out.get(d, 0)
    img = image.get(d)
    if img:
        bits = reduce_vector(bits, img.basis.data)
    return Coset(C1, d, bits)


def tilde_d0(m: AModule, hi: int):
    """The comparison map m (x) H(P_-1) -> Sigma R_1(Sigma^-1 m).

    On x (x) t_r it is sum_i sigma Q^{r+i}(sigma^{-1}(x Sq^i)); restricted to
    the bottom cell it matches d_0 itself.
    Returns (matrices dict, source module, target FreeDLModule).
    """
    if not is_unstable(m):
        raise ContractViolation("tilde d_0 needs an unstable module")
    from .brown_gitler import stunted_projective
    from .amodule import tensor

    pm1 = stunted_projective(-1, hi - m.dmin)
    src = tensor(m, pm1, dmax=hi)
    tgt = free_dl(m, 1, hi, inner=-1, outer=1)
    mats = {}
    for d in src.degrees():
        pairs = tensor_pairs(m, pm1, d)
        rows = []
        for (da, i, j) in pairs:
            r = d - da  # the t-index
            out = {}
            x = Element(da, 1 << i)
            _emit(tgt, (r,), x, out)
            for k in range(1, da - m.dmin + 1):
                y = m.act_gen(x, (k,))
                if y.bits:
                    _emit(tgt, (r + k,), y, out)
            rows.append(out.get(d, 0))
        mats[d] = BitMatrix(len(pairs), tgt.dim(d), tuple(rows))
    return mats, src, tgt


def dl_pushforward(F: FreeDLModule, f: ModuleMap, G: FreeDLModule) -> DLMap:
    """The map R_s(f) induced by a degree-preserving module map."""
    if f.shift != 0:
        raise ContractViolation("pushforward needs a degree-preserving map")
    if not (F.s == G.s and F.inner == G.inner and F.outer == G.outer):
        raise ContractViolation("pushforward needs matching decorations")
    mats = {}
    for d, ws in F.basis.items():
        rows = []
        for w in ws:
            y = f.apply(Element(w.base_degree, 1 << w.base_index))
            out = {}
            if y.bits:
                _emit(G, w.exps, y, out)
            rows.append(out.get(d, 0))
        mats[d] = BitMatrix(len(ws), G.dim(d), tuple(rows))
    return DLMap(F, G, mats, 0)
