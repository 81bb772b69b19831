"""entkit: structured mixed states, permutational criteria, and canonical witnesses.

The package builds mixed states of the form

    rho_p = (1 - p) * (x)_i (1 - P_i) / (D_i - 1)  +  p * (x)_i P_i

from a set of pure factor states, decides positivity under partial
transposition and realignment across any bipartite cut, locates the exact
PPT threshold in the mixing parameter, and constructs witnesses tailored to
the family, including tensor extensions that certify nondecomposability and
multipartite detectors that work on every cut at once.
"""

from .cuts import Bipartition, enumerate_cuts
from .tensor import (
    DEFAULT_DIM_CAP,
    DimensionCapExceeded,
    SpectrumReport,
    hermitian_spectrum,
    kron,
    kron_all,
    partial_trace,
    partial_transpose,
    permute_systems,
    projector,
    realign,
    swap_operator,
    trace_norm,
)
from .states import (
    EnsembleSpec,
    MixedState,
    PureFactorState,
    SchmidtDecomposition,
    build_named,
    build_rho_p,
    cut_major_matrix,
    ghz,
    max_ent,
    pure_state,
    random_product,
    random_pure,
    schmidt,
    schmidt_coefficients,
    schmidt_state,
    w_state,
)
from .criteria import (
    DistillabilityCertificate,
    PptThreshold,
    distillability_certificate,
    is_ppt,
    p_gamma_closed,
    p_gamma_exact,
    p_gamma_maxent,
    pt_spectrum,
    realignment_norm,
    realignment_norm_closed,
    realignment_norm_closed_printed,
    realignment_threshold_maxent,
    reduction_check,
)
from .witnesses import (
    EpsilonEstimate,
    NondecomposabilityReport,
    SeesawConfig,
    Witness,
    apply_map_from_witness,
    build_W_eps,
    build_W_gen,
    build_W_k,
    build_W_tilde,
    choi_operator,
    epsilon_estimate,
    epsilon_estimate_cut,
    expectation,
    max_overlap_schmidt_k,
    nondecomposability_certificate,
    nontrivial_predicate,
    product_expectation,
    sample_product_expectations,
    w1_ppt_bound_check,
)
from .multipartite import (
    CutReport,
    PptProfile,
    cut_report,
    design_ppt_profile,
    epsilon_tilde,
    multipartite_report,
)

__version__ = "0.1.0"
