"""Finite graded right modules over an AlgebraSpec.

A module stores, per degree, a labelled basis and bit matrices for the
action of the algebra's generators (total squares Sq^i for all of A and for
A(1), the Milnor primitives Q_j for E(h)).  The action of a general Milnor
element is derived through the generator-word decomposition, so inputs only
ever have to supply the generator matrices.

Matrix convention throughout: rows = source basis, so a row vector maps
forward by XORing the rows its bits select.

Degrees fall under the right action: x.Sq^i lives in degree |x| - i.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .errors import ContractViolation, WindowError
from .f2 import (
    BitMatrix,
    Subspace,
    kernel_basis,
    member_coords,
    quotient_matrix,
    row_reduce,
    solve,
)
from .steenrod import (
    AlgebraSpec,
    SteenrodElement,
    action_words,
    binom2,
    milnor_degree,
    subalgebra_basis,
)

__all__ = [
    "Element",
    "AModule",
    "ModuleMap",
    "ShortExactSeq",
    "make_module",
    "zero_module",
    "f2_module",
    "validate_module",
    "milnor_action",
    "milnor_action_matrix",
    "tensor",
    "tensor_pairs",
    "suspend",
    "is_unstable",
    "omega_inf",
    "hom_space",
    "build_map",
    "compose_maps",
    "identity_map",
    "split_sequence",
    "pullback_extension",
    "pushout_extension",
    "extensions_equivalent",
    "transport_sub",
    "transport_quot",
    "restrict",
    "module_data_equal",
    "submodule",
    "quotient_module",
    "restrict_map",
    "restrict_seq",
]


class Element(NamedTuple):
    degree: int
    bits: int


@dataclass(frozen=True)
class AModule:
    algebra: AlgebraSpec
    dmin: int
    dmax: int
    dims: dict
    labels: dict
    action: dict  # (generator profile, source degree) -> BitMatrix
    name: str = "M"
    truncation: Optional[int] = None  # faithful for degrees <= truncation

    def dim(self, d: int) -> int:
        return self.dims.get(d, 0)

    @property
    def total_dim(self) -> int:
        return sum(self.dims.values())

    def degrees(self):
        return [d for d in range(self.dmin, self.dmax + 1) if self.dim(d)]

    def gen_matrix(self, gen, d: int) -> BitMatrix:
        m = self.action.get((gen, d))
        if m is not None:
            return m
        return BitMatrix.zero(self.dim(d), self.dim(d - milnor_degree(gen)))

    def act_gen(self, x: Element, gen) -> Element:
        target = x.degree - milnor_degree(gen)
        if x.bits == 0 or self.dim(target) == 0:
            return Element(target, 0)
        return Element(target, self.gen_matrix(gen, x.degree).apply(x.bits))

    def act_word(self, x: Element, word) -> Element:
        for g in word:
            x = self.act_gen(x, g)
            if x.bits == 0:
                return Element(x.degree, 0)
        return x

    def basis_element(self, d: int, i: int) -> Element:
        return Element(d, 1 << i)

    def label(self, d: int, i: int) -> str:
        return self.labels[d][i]

    def element_str(self, x: Element) -> str:
        if x.bits == 0:
            return "0"
        names = [
            self.labels[x.degree][i]
            for i in range(self.dim(x.degree))
            if (x.bits >> i) & 1
        ]
        return " + ".join(names)


def make_module(
    algebra: AlgebraSpec,
    labels: dict,
    action: dict,
    name: str = "M",
    truncation: Optional[int] = None,
) -> AModule:
    labels = {d: list(ls) for d, ls in labels.items() if ls}
    dims = {d: len(ls) for d, ls in labels.items()}
    if dims:
        dmin, dmax = min(dims), max(dims)
    else:
        dmin, dmax = 0, -1
    act = {}
    for (gen, d), mat in action.items():
        if not isinstance(mat, BitMatrix):
            mat = BitMatrix.from_lists(mat)
        src = dims.get(d, 0)
        tgt = dims.get(d - milnor_degree(gen), 0)
        if (mat.rows, mat.cols) != (src, tgt):
            raise ContractViolation(
                "action %s at degree %d has shape %dx%d, expected %dx%d"
                % (gen, d, mat.rows, mat.cols, src, tgt)
            )
        if not mat.is_zero():
            act[(gen, d)] = mat
    return AModule(algebra, dmin, dmax, dims, labels, act, name, truncation)


def zero_module(algebra: AlgebraSpec, name: str = "0") -> AModule:
    return make_module(algebra, {}, {}, name)


def f2_module(algebra: AlgebraSpec, degree: int = 0, name: Optional[str] = None) -> AModule:
    return make_module(
        algebra, {degree: ["1"]}, {}, name or ("F2[%d]" % degree)
    )


def _full_gens(m: AModule):
    """Generator profiles whose matrices can be nonzero on m."""
    if m.algebra.is_full:
        span = m.dmax - m.dmin
        return [(i,) for i in range(1, max(span, 0) + 1)]
    return [g for g in m.algebra.generators() if milnor_degree(g) <= m.dmax - m.dmin]


def milnor_action(m: AModule, x: Element, e) -> Element:
    """Apply a Milnor element (profile or SteenrodElement) on the right."""
    if isinstance(e, SteenrodElement):
        out = Element(x.degree - e.degree, 0)
        for p in e.terms:
            out = Element(out.degree, out.bits ^ milnor_action(m, x, p).bits)
        return out
    target = x.degree - milnor_degree(e)
    bits = 0
    for word in action_words(m.algebra, e):
        bits ^= m.act_word(x, word).bits
    return Element(target, bits)


def milnor_action_matrix(m: AModule, p, d: int) -> BitMatrix:
    """Matrix of x -> x.p on degree d."""
    rows = [milnor_action(m, Element(d, 1 << i), p).bits for i in range(m.dim(d))]
    return BitMatrix(m.dim(d), m.dim(d - milnor_degree(p)), tuple(rows))


def validate_module(m: AModule):
    """Check the module axioms; return None if fine, else a report string.

    For all of A this is the Adem consistency check; for E(h) the exterior
    relations; for A(1) the full 8x8 multiplication table of the algebra.
    """
    if m.algebra.is_full:
        return _validate_adem(m)
    if m.algebra.kind == "E":
        return _validate_exterior(m)
    return _validate_table(m)


def _validate_adem(m: AModule):
    span = m.dmax - m.dmin
    for d in range(m.dmin, m.dmax + 1):
        if not m.dim(d):
            continue
        for a in range(1, span + 1):
            for b in range(1, span + 1):
                if a >= 2 * b or a + b > d - m.dmin:
                    continue
                lhs = m.gen_matrix((a,), d).matmul(m.gen_matrix((b,), d - a))
                rhs = BitMatrix.zero(m.dim(d), m.dim(d - a - b))
                for c in range(0, a // 2 + 1):
                    if not binom2(b - c - 1, a - 2 * c):
                        continue
                    first = m.gen_matrix((a + b - c,), d)
                    if c == 0:
                        rhs = rhs.add(first)
                    else:
                        rhs = rhs.add(first.matmul(m.gen_matrix((c,), d - a - b + c)))
                if lhs.data != rhs.data:
                    for i in range(m.dim(d)):
                        if lhs.data[i] != rhs.data[i]:
                            return "Adem (a=%d,b=%d) fails at degree %d on %s" % (
                                a,
                                b,
                                d,
                                m.labels[d][i],
                            )
    return None


def _validate_exterior(m: AModule):
    gens = list(m.algebra.generators())
    for d in range(m.dmin, m.dmax + 1):
        if not m.dim(d):
            continue
        for gi in gens:
            sq = m.gen_matrix(gi, d).matmul(m.gen_matrix(gi, d - milnor_degree(gi)))
            if not sq.is_zero():
                return "Q%d squared is nonzero at degree %d" % (len(gi) - 1, d)
            for gj in gens:
                if gj <= gi:
                    continue
                ab = m.gen_matrix(gi, d).matmul(m.gen_matrix(gj, d - milnor_degree(gi)))
                ba = m.gen_matrix(gj, d).matmul(m.gen_matrix(gi, d - milnor_degree(gj)))
                if ab.data != ba.data:
                    return "Q%d and Q%d do not commute at degree %d" % (
                        len(gi) - 1,
                        len(gj) - 1,
                        d,
                    )
    return None


def _validate_table(m: AModule):
    spec = m.algebra
    top = spec.top_degree()
    basis = [p for e in range(top + 1) for p in subalgebra_basis(spec, e)]
    for d in range(m.dmin, m.dmax + 1):
        if not m.dim(d):
            continue
        for a in basis:
            da = milnor_degree(a)
            if da == 0:
                continue
            for b in basis:
                db = milnor_degree(b)
                if db == 0 or da + db > d - m.dmin:
                    continue
                lhs = milnor_action_matrix(m, a, d).matmul(
                    milnor_action_matrix(m, b, d - da)
                )
                rhs = BitMatrix.zero(m.dim(d), m.dim(d - da - db))
                if da + db <= top:
                    from .steenrod import milnor_product

                    for p in milnor_product(a, b):
                        rhs = rhs.add(milnor_action_matrix(m, p, d))
                if lhs.data != rhs.data:
                    return "product rule fails for %s.%s at degree %d" % (a, b, d)
    return None


def suspend(m: AModule, k: int) -> AModule:
    if k == 0:
        return m
    labels = {d + k: list(ls) for d, ls in m.labels.items()}
    action = {(g, d + k): mat for (g, d), mat in m.action.items()}
    trunc = None if m.truncation is None else m.truncation + k
    name = "S^%d(%s)" % (k, m.name) if k != 1 else "S(%s)" % m.name
    return make_module(m.algebra, labels, action, name, trunc)


def tensor_pairs(m: AModule, n: AModule, d: int):
    """Ordered basis of (m (x) n) in degree d, as (deg_in_m, i, j) triples."""
    out = []
    for da in range(m.dmin, m.dmax + 1):
        db = d - da
        if m.dim(da) and n.dim(db):
            for i in range(m.dim(da)):
                for j in range(n.dim(db)):
                    out.append((da, i, j))
    return out


def tensor(m: AModule, n: AModule, dmax: Optional[int] = None, name: Optional[str] = None) -> AModule:
    if m.algebra != n.algebra:
        raise ContractViolation("tensor factors live over different algebras")
    top = m.dmax + n.dmax
    trunc = None
    for f, other in ((m, n), (n, m)):
        if f.truncation is not None:
            t = f.truncation + other.dmin
            trunc = t if trunc is None else min(trunc, t)
    if dmax is not None:
        if trunc is not None and dmax > trunc:
            raise WindowError(
                "tensor window %d exceeds faithful range %d" % (dmax, trunc)
            )
        top = min(top, dmax)
        trunc = dmax
    labels = {}
    index = {}
    for d in range(m.dmin + n.dmin, top + 1):
        pairs = tensor_pairs(m, n, d)
        if not pairs:
            continue
        labels[d] = [
            "%s(x)%s" % (m.labels[da][i], n.labels[d - da][j]) for (da, i, j) in pairs
        ]
        index[d] = {p: k for k, p in enumerate(pairs)}
    action = {}
    gens = _gens_for_span(m.algebra, top - (m.dmin + n.dmin))
    for d in list(index):
        pairs = tensor_pairs(m, n, d)
        for g in gens:
            gd = milnor_degree(g)
            tgt = index.get(d - gd)
            if tgt is None:
                continue
            rows = []
            for (da, i, j) in pairs:
                db = d - da
                bits = 0
                for ia, ib in _comultiplication(m.algebra, g):
                    xa = (
                        Element(da, 1 << i)
                        if ia == ()
                        else milnor_action(m, Element(da, 1 << i), ia)
                    )
                    if xa.bits == 0:
                        continue
                    xb = (
                        Element(db, 1 << j)
                        if ib == ()
                        else milnor_action(n, Element(db, 1 << j), ib)
                    )
                    if xb.bits == 0:
                        continue
                    for a2 in range(m.dim(xa.degree)):
                        if not (xa.bits >> a2) & 1:
                            continue
                        for b2 in range(n.dim(xb.degree)):
                            if (xb.bits >> b2) & 1:
                                bits ^= 1 << tgt[(xa.degree, a2, b2)]
                rows.append(bits)
            action[(g, d)] = BitMatrix(len(pairs), len(tgt), tuple(rows))
    return make_module(
        m.algebra,
        labels,
        action,
        name or "%s(x)%s" % (m.name, n.name),
        trunc,
    )


def _gens_for_span(spec: AlgebraSpec, span: int):
    if spec.is_full:
        return [(i,) for i in range(1, max(span, 0) + 1)]
    return [g for g in spec.generators() if milnor_degree(g) <= span]


def _comultiplication(spec: AlgebraSpec, g):
    """Terms (a, b) with (x (x) y).g = sum x.a (x) y.b; () acts as identity."""
    if spec.kind == "E":
        return [(g, ()), ((), g)]
    k = g[0]
    out = []
    for i in range(k + 1):
        a = () if i == 0 else (i,)
        b = () if i == k else (k - i,)
        out.append((a, b))
    return out


def is_unstable(m: AModule) -> bool:
    """xSq^i = 0 whenever 2i > |x|, on every basis vector."""
    if not m.algebra.is_full:
        raise ContractViolation("instability is defined over the full algebra")
    for d in range(m.dmin, m.dmax + 1):
        if not m.dim(d):
            continue
        for i in range(max(d // 2 + 1, 1), d - m.dmin + 1):
            if not m.gen_matrix((i,), d).is_zero():
                return False
    return True


def submodule(m: AModule, spaces: dict, name: str):
    """Module structure on per-degree subspaces closed under the action.

    Returns (sub, inclusion).  spaces maps degree -> Subspace of m at that
    degree; degrees absent from the dict are taken to be zero.
    """
    labels = {}
    for d, sp in spaces.items():
        if sp.dim:
            labels[d] = ["%s[%d]" % (name, i) for i in range(sp.dim)]
    action = {}
    incl = {}
    for d, sp in spaces.items():
        if not sp.dim:
            continue
        incl[d] = sp.basis
        for g in _full_gens(m):
            gd = milnor_degree(g)
            tgt = spaces.get(d - gd)
            if tgt is None or not tgt.dim:
                continue
            rows = []
            for v in sp.vectors():
                y = m.gen_matrix(g, d).apply(v)
                c = member_coords(tgt, y)
                if c is None:
                    raise ContractViolation(
                        "subspaces not closed under the action at degree %d" % d
                    )
                rows.append(c)
            mat = BitMatrix(sp.dim, tgt.dim, tuple(rows))
            if not mat.is_zero():
                action[(g, d)] = mat
    sub = make_module(m.algebra, labels, action, name, m.truncation)
    inclusion = ModuleMap(sub, m, 0, incl, "incl")
    return sub, inclusion


def quotient_module(m: AModule, spaces: dict, name: str):
    """Quotient of m by per-degree subspaces closed under the action.

    Returns (quot, projection).
    """
    quots = {}
    reps = {}
    for d in m.degrees():
        sp = spaces.get(d)
        if sp is None:
            sp = Subspace(m.dim(d), BitMatrix(0, m.dim(d), ()))
        quots[d] = quotient_matrix(sp)
        pivots = {(r & -r).bit_length() - 1 for r in sp.basis.data}
        reps[d] = [j for j in range(m.dim(d)) if j not in pivots]
    labels = {}
    for d, q in quots.items():
        if q.cols:
            labels[d] = ["%s[%d]" % (name, i) for i in range(q.cols)]
    action = {}
    for d, q in quots.items():
        if not q.cols:
            continue
        for g in _full_gens(m):
            gd = milnor_degree(g)
            if d - gd not in quots or not quots[d - gd].cols:
                continue
            rows = []
            for j in reps[d]:
                y = m.gen_matrix(g, d).apply(1 << j)
                rows.append(quots[d - gd].apply(y))
            mat = BitMatrix(q.cols, quots[d - gd].cols, tuple(rows))
            if not mat.is_zero():
                action[(g, d)] = mat
    quot = make_module(m.algebra, labels, action, name, m.truncation)
    prj = {
        d: BitMatrix(
            m.dim(d), quots[d].cols, tuple(quots[d].apply(1 << i) for i in range(m.dim(d)))
        )
        for d in m.degrees()
    }
    return quot, ModuleMap(m, quot, 0, prj, "proj")


def omega_inf(m: AModule):
    """The maximal unstable submodule, with its witness inclusion."""
    if not m.algebra.is_full:
        raise ContractViolation("omega_inf is defined over the full algebra")
    spaces = {}
    for d in range(m.dmin, m.dmax + 1):
        if m.dim(d):
            _, _, rref = row_reduce(BitMatrix.identity(m.dim(d)))
            spaces[d] = Subspace(m.dim(d), rref)
    changed = True
    while changed:
        changed = False
        for d in sorted(spaces, reverse=True):
            sp = spaces[d]
            if not sp.dim:
                continue
            blocks = []
            for i in range(1, d - m.dmin + 1):
                mat = m.gen_matrix((i,), d)
                if mat.cols == 0:
                    continue
                if 2 * i > d:
                    blocks.append(mat)  # instability: image must vanish
                else:
                    tgt = spaces.get(d - i)
                    codim = (
                        quotient_matrix(tgt) if tgt is not None else None
                    )
                    if codim is None:
                        blocks.append(mat)
                    elif codim.cols:
                        blocks.append(mat.matmul(codim))
            if not blocks:
                continue
            # Constrain within the current subspace: rows = current basis.
            rows = []
            for v in sp.vectors():
                r = 0
                off = 0
                for b in blocks:
                    r |= b.apply(v) << off
                    off += b.cols
                rows.append(r)
            width = sum(b.cols for b in blocks)
            ker = kernel_basis(BitMatrix(sp.dim, width, tuple(rows)).transpose())
            if ker.dim != sp.dim:
                vecs = [
                    _combine(sp, c)
                    for c in ker.vectors()
                ]
                _, _, rref = row_reduce(
                    BitMatrix(len(vecs), sp.ambient_dim, tuple(vecs))
                )
                nz = tuple(r for r in rref.data if r)
                spaces[d] = Subspace(sp.ambient_dim, BitMatrix(len(nz), sp.ambient_dim, nz))
                changed = True
    spaces = {d: sp for d, sp in spaces.items() if sp.dim}
    return submodule(m, spaces, "O(%s)" % m.name)


def _combine(sp: Subspace, coeffs: int) -> int:
    v = 0
    for k, row in enumerate(sp.vectors()):
        if (coeffs >> k) & 1:
            v ^= row
    return v


@dataclass(frozen=True)
class ModuleMap:
    """A map of right modules; degree d of the source lands in d+shift."""

    source: AModule
    target: AModule
    shift: int
    matrices: dict  # source degree -> BitMatrix
    name: str = "f"

    def matrix(self, d: int) -> BitMatrix:
        mat = self.matrices.get(d)
        if mat is not None:
            return mat
        return BitMatrix.zero(self.source.dim(d), self.target.dim(d + self.shift))

    def apply(self, x: Element) -> Element:
        return Element(x.degree + self.shift, self.matrix(x.degree).apply(x.bits))

    def is_zero(self) -> bool:
        return all(m.is_zero() for m in self.matrices.values())

    def is_iso(self) -> bool:
        for d in range(
            min(self.source.dmin, self.target.dmin - self.shift),
            max(self.source.dmax, self.target.dmax - self.shift) + 1,
        ):
            if self.source.dim(d) != self.target.dim(d + self.shift):
                return False
            if self.matrix(d).rank() != self.source.dim(d):
                return False
        return True

    def inverse(self) -> "ModuleMap":
        if not self.is_iso():
            raise ContractViolation("cannot invert a non-isomorphism")
        mats = {}
        for d in range(self.source.dmin, self.source.dmax + 1):
            if not self.source.dim(d):
                continue
            fwd = self.matrix(d)
            rows = []
            for i in range(fwd.cols):
                x = solve(fwd.transpose(), 1 << i)
                rows.append(x)
            mats[d + self.shift] = BitMatrix(fwd.cols, fwd.rows, tuple(rows))
        return ModuleMap(
            self.target, self.source, -self.shift, mats, self.name + "^-1"
        )

    def check_commutes(self):
        """Return None if the map commutes with the action, else a report."""
        src, tgt = self.source, self.target
        if src.algebra != tgt.algebra:
            return "source and target algebras differ"
        for d in range(src.dmin, src.dmax + 1):
            if not src.dim(d):
                continue
            for g in _full_gens(src):
                gd = milnor_degree(g)
                lhs = src.gen_matrix(g, d).matmul(self.matrix(d - gd))
                rhs = self.matrix(d).matmul(tgt.gen_matrix(g, d + self.shift))
                if lhs.data != rhs.data:
                    return "does not commute with %s at degree %d" % (g, d)
        return None

    def suspend(self, k: int) -> "ModuleMap":
        return ModuleMap(
            suspend(self.source, k),
            suspend(self.target, k),
            self.shift,
            {d + k: mat for d, mat in self.matrices.items()},
            self.name,
        )


def build_map(source, target, shift, matrices, name="f") -> ModuleMap:
    mats = {}
    for d, mat in matrices.items():
        if not isinstance(mat, BitMatrix):
            mat = BitMatrix.from_lists(mat)
        if (mat.rows, mat.cols) != (source.dim(d), target.dim(d + shift)):
            raise ContractViolation("map matrix at degree %d has wrong shape" % d)
        if not mat.is_zero():
            mats[d] = mat
    return ModuleMap(source, target, shift, mats, name)


def identity_map(m: AModule) -> ModuleMap:
    return ModuleMap(
        m,
        m,
        0,
        {d: BitMatrix.identity(m.dim(d)) for d in m.degrees()},
        "id",
    )


def compose_maps(f: ModuleMap, g: ModuleMap) -> ModuleMap:
    """First f, then g."""
    mats = {}
    for d in range(f.source.dmin, f.source.dmax + 1):
        if f.source.dim(d):
            mats[d] = f.matrix(d).matmul(g.matrix(d + f.shift))
    return ModuleMap(
        f.source, g.target, f.shift + g.shift, mats, "%s;%s" % (f.name, g.name)
    )


def hom_space(n: AModule, m: AModule, shift: int = 0):
    """Basis of the F2 space of module maps n -> S^shift m.

    A returned map carries ModuleMap.shift = -shift: degree d of n lands in
    degree d - shift of m itself.
    """
    if n.algebra != m.algebra:
        raise ContractViolation("hom_space needs a common algebra")
    S = -shift
    var_index = {}
    shapes = {}
    for d in range(n.dmin, n.dmax + 1):
        r, c = n.dim(d), m.dim(d + S)
        if r and c:
            shapes[d] = (r, c)
            for i in range(r):
                for j in range(c):
                    var_index[(d, i, j)] = len(var_index)
    nvars = len(var_index)
    eq_rows = []

    def add_equation(coeffs):
        row = 0
        for v in coeffs:
            row ^= 1 << var_index[v]
        eq_rows.append(row)

    for d in range(n.dmin, n.dmax + 1):
        if not n.dim(d):
            continue
        for g in _full_gens(n):
            gd = milnor_degree(g)
            a = n.gen_matrix(g, d)
            b = m.gen_matrix(g, d + S)
            rows_out = n.dim(d)
            cols_out = m.dim(d - gd + S)
            if cols_out == 0:
                continue
            for i in range(rows_out):
                for j in range(cols_out):
                    coeffs = []
                    if (d - gd) in shapes:
                        for k in range(n.dim(d - gd)):
                            if a.entry(i, k):
                                coeffs.append((d - gd, k, j))
                    if d in shapes:
                        for k in range(m.dim(d + S)):
                            if b.entry(k, j):
                                coeffs.append((d, i, k))
                    if coeffs:
                        add_equation(coeffs)
    ker = kernel_basis(BitMatrix(len(eq_rows), nvars, tuple(eq_rows)))
    maps = []
    for v in ker.vectors():
        mats = {d: [0] * r for d, (r, c) in shapes.items()}
        for (d, i, j), k in var_index.items():
            if (v >> k) & 1:
                mats[d][i] |= 1 << j
        maps.append(
            ModuleMap(
                n,
                m,
                S,
                {
                    d: BitMatrix(shapes[d][0], shapes[d][1], tuple(rows))
                    for d, rows in mats.items()
                },
                "hom",
            )
        )
    return maps


@dataclass(frozen=True)
class ShortExactSeq:
    """0 -> sub -> mid -> quot -> 0 with degree-preserving maps."""

    inclusion: ModuleMap
    projection: ModuleMap

    @property
    def sub(self) -> AModule:
        return self.inclusion.source

    @property
    def mid(self) -> AModule:
        return self.inclusion.target

    @property
    def quot(self) -> AModule:
        return self.projection.target

    def check(self):
        """Return None when exact, else a report string."""
        if self.inclusion.target is not self.projection.source and not module_data_equal(
            self.inclusion.target, self.projection.source
        ):
            return "inclusion and projection do not share the middle"
        if self.inclusion.shift or self.projection.shift:
            return "sequence maps must preserve degree"
        for f in (self.inclusion, self.projection):
            bad = f.check_commutes()
            if bad:
                return bad
        lo = min(self.sub.dmin, self.mid.dmin, self.quot.dmin)
        hi = max(self.sub.dmax, self.mid.dmax, self.quot.dmax)
        for d in range(lo, hi + 1):
            a, b, c = self.sub.dim(d), self.mid.dim(d), self.quot.dim(d)
            inc = self.inclusion.matrix(d)
            prj = self.projection.matrix(d)
            if inc.rank() != a:
                return "inclusion not injective at degree %d" % d
            if prj.rank() != c:
                return "projection not surjective at degree %d" % d
            if a + c != b:
                return "dimensions not exact at degree %d" % d
            if not inc.matmul(prj).is_zero():
                return "composite nonzero at degree %d" % d
        return None

    def suspend(self, k: int) -> "ShortExactSeq":
        return ShortExactSeq(self.inclusion.suspend(k), self.projection.suspend(k))


def split_sequence(k: AModule, n: AModule, name: str = "split") -> ShortExactSeq:
    labels = {}
    for d in set(list(k.dims) + list(n.dims)):
        labels[d] = [
            "l.%s" % s for s in k.labels.get(d, [])
        ] + ["r.%s" % s for s in n.labels.get(d, [])]
    action = {}
    gens = set(_full_gens(k)) | set(_full_gens(n))
    for d in labels:
        for g in gens:
            gd = milnor_degree(g)
            if d - gd not in labels:
                continue
            rows = []
            koff = k.dim(d - gd)
            for i in range(k.dim(d)):
                rows.append(k.gen_matrix(g, d).row(i))
            for i in range(n.dim(d)):
                rows.append(n.gen_matrix(g, d).row(i) << koff)
            action[(g, d)] = BitMatrix(
                k.dim(d) + n.dim(d), k.dim(d - gd) + n.dim(d - gd), tuple(rows)
            )
    mid = make_module(k.algebra, labels, action, name)
    inc = {
        d: BitMatrix(
            k.dim(d),
            mid.dim(d),
            tuple(1 << i for i in range(k.dim(d))),
        )
        for d in k.degrees()
    }
    prj = {
        d: BitMatrix(
            mid.dim(d),
            n.dim(d),
            tuple(
                [0] * k.dim(d) + [1 << j for j in range(n.dim(d))]
            ),
        )
        for d in mid.degrees()
    }
    return ShortExactSeq(
        ModuleMap(k, mid, 0, inc, "incl"), ModuleMap(mid, n, 0, prj, "proj")
    )


def pullback_extension(e: ShortExactSeq, f: ModuleMap) -> ShortExactSeq:
    """Pull e back along f: N -> quot(e)."""
    if f.shift != 0 or not module_data_equal(f.target, e.quot):
        raise ContractViolation("pullback map must land in the quotient of e")
    X, N, K = e.mid, f.source, e.sub
    spaces = {}
    lo = min(X.dmin, N.dmin)
    hi = max(X.dmax, N.dmax)
    for d in range(lo, hi + 1):
        nx, nn = X.dim(d), N.dim(d)
        if nx + nn == 0:
            continue
        stacked = e.projection.matrix(d).stack(f.matrix(d))
        spaces[d] = kernel_basis(stacked.transpose())
    labels = {}
    for d, sp in spaces.items():
        if sp.dim:
            labels[d] = ["pb%d.%d" % (d, i) for i in range(sp.dim)]
    action = {}
    for d, sp in spaces.items():
        if not sp.dim:
            continue
        for g in _full_gens(X):
            gd = milnor_degree(g)
            tgt = spaces.get(d - gd)
            if tgt is None or not tgt.dim:
                continue
            nx = X.dim(d)
            rows = []
            for v in sp.vectors():
                xv = v & ((1 << nx) - 1)
                nv = v >> nx
                y = X.gen_matrix(g, d).apply(xv) | (
                    N.gen_matrix(g, d).apply(nv) << X.dim(d - gd)
                )
                c = member_coords(tgt, y)
                if c is None:
                    raise ContractViolation("pullback space not action-closed")
                rows.append(c)
            mat = BitMatrix(sp.dim, tgt.dim, tuple(rows))
            if not mat.is_zero():
                action[(g, d)] = mat
    mid = make_module(X.algebra, labels, action, "pullback")
    inc = {}
    for d in K.degrees():
        rows = []
        for i in range(K.dim(d)):
            v = e.inclusion.matrix(d).row(i)  # (i(k), 0)
            c = member_coords(spaces[d], v)
            if c is None:
                raise ContractViolation("kernel inclusion missed the pullback")
            rows.append(c)
        inc[d] = BitMatrix(K.dim(d), mid.dim(d), tuple(rows))
    prj = {}
    for d, sp in spaces.items():
        if not sp.dim:
            continue
        nx = X.dim(d)
        prj[d] = BitMatrix(
            sp.dim, N.dim(d), tuple(v >> nx for v in sp.vectors())
        )
    return ShortExactSeq(
        ModuleMap(K, mid, 0, inc, "incl"), ModuleMap(mid, N, 0, prj, "proj")
    )


def pushout_extension(e: ShortExactSeq, g: ModuleMap) -> ShortExactSeq:
    """Push e out along g: sub(e) -> W."""
    if g.shift != 0 or not module_data_equal(g.source, e.sub):
        raise ContractViolation("pushout map must start at the sub of e")
    K, X, W, N = e.sub, e.mid, g.target, e.quot
    rels = {}
    quots = {}
    lo = min(W.dmin, X.dmin)
    hi = max(W.dmax, X.dmax)
    for d in range(lo, hi + 1):
        nw, nx = W.dim(d), X.dim(d)
        if nw + nx == 0:
            continue
        rows = []
        for i in range(K.dim(d)):
            rows.append(
                g.matrix(d).row(i) | (e.inclusion.matrix(d).row(i) << nw)
            )
        _, _, rref = row_reduce(BitMatrix(K.dim(d), nw + nx, tuple(rows)))
        nz = tuple(r for r in rref.data if r)
        rel = Subspace(nw + nx, BitMatrix(len(nz), nw + nx, nz))
        rels[d] = rel
        quots[d] = quotient_matrix(rel)
    labels = {}
    for d, q in quots.items():
        if q.cols:
            labels[d] = ["po%d.%d" % (d, i) for i in range(q.cols)]
    # Representative of quotient basis element j: the ambient coordinate it
    # reads off (a non-pivot coordinate, so the section is exact).
    reps = {}
    for d, rel in rels.items():
        pivots = {(r & -r).bit_length() - 1 for r in rel.basis.data}
        reps[d] = [j for j in range(rel.ambient_dim) if j not in pivots]
    action = {}
    for d, q in quots.items():
        if not q.cols:
            continue
        for gp in _full_gens(X):
            gd = milnor_degree(gp)
            if d - gd not in quots or not quots[d - gd].cols:
                continue
            nw = W.dim(d)
            rows = []
            for j in reps[d]:
                if j < nw:
                    y = W.gen_matrix(gp, d).apply(1 << j)
                    amb = y
                else:
                    y = X.gen_matrix(gp, d).apply(1 << (j - nw))
                    amb = y << W.dim(d - gd)
                rows.append(quots[d - gd].apply(amb))
            mat = BitMatrix(q.cols, quots[d - gd].cols, tuple(rows))
            if not mat.is_zero():
                action[(gp, d)] = mat
    mid = make_module(X.algebra, labels, action, "pushout")
    inc = {}
    for d in W.degrees():
        if d not in quots:
            continue
        inc[d] = BitMatrix(
            W.dim(d),
            quots[d].cols,
            tuple(quots[d].apply(1 << i) for i in range(W.dim(d))),
        )
    prj = {}
    for d, q in quots.items():
        if not q.cols:
            continue
        nw = W.dim(d)
        rows = []
        for j in reps[d]:
            if j < nw:
                rows.append(0)
            else:
                rows.append(e.projection.matrix(d).row(j - nw))
        prj[d] = BitMatrix(q.cols, N.dim(d), tuple(rows))
    return ShortExactSeq(
        ModuleMap(W, mid, 0, inc, "incl"), ModuleMap(mid, N, 0, prj, "proj")
    )


def module_data_equal(a: AModule, b: AModule) -> bool:
    """Structural equality: same algebra, dims, and action matrices."""
    if a is b:
        return True
    if a.algebra != b.algebra:
        return False
    if {d: v for d, v in a.dims.items() if v} != {d: v for d, v in b.dims.items() if v}:
        return False
    keys = set(a.action) | set(b.action)
    for key in keys:
        g, d = key
        if a.gen_matrix(g, d).data != b.gen_matrix(g, d).data:
            return False
    return True


def extensions_equivalent(e1: ShortExactSeq, e2: ShortExactSeq) -> bool:
    """Is there a middle isomorphism commuting with both end maps?"""
    if not module_data_equal(e1.sub, e2.sub) or not module_data_equal(
        e1.quot, e2.quot
    ):
        raise ContractViolation("extensions do not share their end modules")
    X1, X2 = e1.mid, e2.mid
    if {d: v for d, v in X1.dims.items() if v} != {
        d: v for d, v in X2.dims.items() if v
    }:
        return False
    var_index = {}
    for d in X1.degrees():
        for i in range(X1.dim(d)):
            for j in range(X2.dim(d)):
                var_index[(d, i, j)] = len(var_index)
    rows = []
    rhs = []

    def equation(coeffs, value):
        row = 0
        for v in coeffs:
            row ^= 1 << var_index[v]
        rows.append(row)
        rhs.append(value)

    for d in X1.degrees():
        # end conditions
        inc1, inc2 = e1.inclusion.matrix(d), e2.inclusion.matrix(d)
        for i in range(e1.sub.dim(d)):
            for j in range(X2.dim(d)):
                coeffs = [
                    (d, k, j) for k in range(X1.dim(d)) if inc1.entry(i, k)
                ]
                equation(coeffs, inc2.entry(i, j))
        p1, p2 = e1.projection.matrix(d), e2.projection.matrix(d)
        for i in range(X1.dim(d)):
            for j in range(e1.quot.dim(d)):
                coeffs = [
                    (d, i, k) for k in range(X2.dim(d)) if p2.entry(k, j)
                ]
                equation(coeffs, p1.entry(i, j))
        # commuting with the action
        for g in _full_gens(X1):
            gd = milnor_degree(g)
            if not X1.dim(d - gd):
                continue
            a = X1.gen_matrix(g, d)
            b = X2.gen_matrix(g, d)
            for i in range(X1.dim(d)):
                for j in range(X2.dim(d - gd)):
                    coeffs = []
                    for k in range(X1.dim(d - gd)):
                        if a.entry(i, k):
                            coeffs.append((d - gd, k, j))
                    for k in range(X2.dim(d)):
                        if b.entry(k, j):
                            coeffs.append((d, i, k))
                    if coeffs:
                        equation(coeffs, 0)
    b = 0
    for i, v in enumerate(rhs):
        b |= v << i
    sol = solve(BitMatrix(len(rows), len(var_index), tuple(rows)), b)
    if sol is None:
        return False
    # Any solution is an isomorphism (five lemma); confirm rank anyway.
    for d in X1.degrees():
        mat_rows = [0] * X1.dim(d)
        for (dd, i, j), k in var_index.items():
            if dd == d and (sol >> k) & 1:
                mat_rows[i] |= 1 << j
        if BitMatrix(X1.dim(d), X2.dim(d), tuple(mat_rows)).rank() != X1.dim(d):
            return False
    return True


def transport_sub(e: ShortExactSeq, iso: ModuleMap) -> ShortExactSeq:
    """Replace sub(e) along an isomorphism new_sub -> sub(e)."""
    if not module_data_equal(iso.target, e.sub):
        raise ContractViolation("iso must land in the sub of e")
    return ShortExactSeq(compose_maps(iso, e.inclusion), e.projection)


def transport_quot(e: ShortExactSeq, iso: ModuleMap) -> ShortExactSeq:
    """Replace quot(e) along an isomorphism quot(e) -> new_quot."""
    if not module_data_equal(iso.source, e.quot):
        raise ContractViolation("iso must start at the quot of e")
    return ShortExactSeq(e.inclusion, compose_maps(e.projection, iso))


def restrict(m: AModule, spec: AlgebraSpec) -> AModule:
    """View m over a subalgebra; only subalgebra actions are kept."""
    if spec == m.algebra:
        return m
    if not spec.is_subalgebra_of(m.algebra):
        raise ContractViolation(
            "%s is not a subalgebra of %s" % (spec.name, m.algebra.name)
        )
    action = {}
    for g in spec.generators():
        gd = milnor_degree(g)
        for d in m.degrees():
            if not m.dim(d - gd):
                continue
            mat = milnor_action_matrix(m, g, d)
            if not mat.is_zero():
                action[(g, d)] = mat
    return make_module(
        spec,
        {d: list(ls) for d, ls in m.labels.items()},
        action,
        "%s|%s" % (m.name, spec.name),
        m.truncation,
    )


def restrict_map(f: ModuleMap, source: AModule, target: AModule) -> ModuleMap:
    """The same matrices viewed between restricted modules."""
    return ModuleMap(source, target, f.shift, dict(f.matrices), f.name)


def restrict_seq(e: ShortExactSeq, spec: AlgebraSpec) -> ShortExactSeq:
    sub = restrict(e.sub, spec)
    mid = restrict(e.mid, spec)
    quot = restrict(e.quot, spec)
    return ShortExactSeq(
        restrict_map(e.inclusion, sub, mid), restrict_map(e.projection, mid, quot)
    )
