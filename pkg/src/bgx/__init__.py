"""Exact mod-2 computations with free unstable modules over the Steenrod
algebra: the Milnor basis, the G(n) family with its extension classes
Q(n,r), free Dyer-Lashof modules with their suspension complex, and minimal
resolutions with the induced operations on bigraded Ext charts.
"""

from .errors import (
    BgxError,
    ContractViolation,
    DomainError,
    SchemaViolation,
    WindowError,
)
from .f2 import BitMatrix, Subspace, kernel_basis, row_reduce, solve
from .steenrod import (
    AlgebraSpec,
    MilnorElt,
    SteenrodElement,
    bg_excess,
    conjugation_sum,
    milnor_basis,
    milnor_excess,
    milnor_product,
    milnor_to_composite,
    subalgebra_basis,
)
from .amodule import (
    AModule,
    Element,
    ModuleMap,
    ShortExactSeq,
    extensions_equivalent,
    hom_space,
    is_unstable,
    make_module,
    milnor_action,
    omega_inf,
    pullback_extension,
    pushout_extension,
    restrict,
    suspend,
    tensor,
    validate_module,
)
from .brown_gitler import (
    basic_sequence,
    brown_gitler,
    h0_sequence,
    mahowald_sequence,
    p_map,
    q_extension,
    q_map,
    q_tilde,
    stunted_projective,
)
from .dyer_lashof import (
    DLWord,
    FreeDLModule,
    adem_normalize,
    allowable_basis,
    complex_homology,
    differential,
    epsilon_map,
    ls_dims,
    mu_concat,
    nishida_action,
    rho_coset,
    tilde_d0,
)
from .ext_engine import (
    ExtChart,
    FreeResolution,
    connecting_map,
    delta_m_on_hom,
    dl_generation_check,
    dl_on_ext,
    ext_chart,
    h0_on_ext,
    is_free_over,
    margolis_homology,
    minimal_resolution,
    sq_on_ext,
)
from .serialize import doc_to_module, dump_module, module_to_doc

__version__ = "0.1.0"
