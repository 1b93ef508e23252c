"""Single-strong-scale simulator compiler and verifier.

Turns a local Hamiltonian with arbitrarily varying coupling strengths into
a simulator with one strong energy scale, then certifies by exact
diagonalization and self-energy analysis that the simulator's low band
reproduces the rescaled target.
"""

from .bound_state import (
    BoundChainParams,
    ClockSpectrum,
    FamilySolution,
    OverlapReport,
    SolverError,
    amplification_ratio,
    ansatz_state,
    biased_clock,
    build_bound_chain,
    chain_spectrum,
    exact_overlap,
    predicted_overlap,
    solve_family,
    solve_params,
    unary_encode,
    unary_legal_indices,
    unary_terms,
)
from .gadget import (
    GadgetArtifact,
    LocalTerm,
    PolicyError,
    TargetHamiltonian,
    compile_gadget,
    coupling_term_op,
    decompose_involutions,
    default_strength,
    involution_basis,
    normalize_target,
    predicted_effective,
    restricted_block,
    structured_projector_pair,
)
from .operator_core import (
    Blocks,
    DimensionError,
    HermiticityError,
    MultipartiteOperator,
    ProjectorPair,
    SingularBlockError,
    SiteSystem,
    SpectralDecomposition,
    SpectralGapError,
    block_restrict,
    eigh,
    embed_local,
    ground_space_projector,
    schur_lower_right,
    spectral_norm,
)
from .perturbation import (
    BandDefect,
    BandSpec,
    BandWindow,
    ErrorBudget,
    Pert1Report,
    SelfEnergyProblem,
    SelfEnergyReport,
    SeriesDivergenceError,
    VerdictReport,
    band_defect,
    check_low_energy_approximation,
    closed_form_self_energy,
    exact_self_energy,
    find_band_window,
    pert1_compare,
    pert2_bound,
    resolvent,
    self_energy_report,
    series_error_bound,
    series_self_energy,
)
from .tiling import (
    TileSignature,
    build_tiling,
    ground_signatures,
    signature_projector,
    tiling_diagonal,
)

__version__ = "0.1.0"
