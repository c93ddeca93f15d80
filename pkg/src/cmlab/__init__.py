"""cmlab: compressed-mode laboratory for Schrodinger operators.

Computes sparsity-localized orthonormal modes of -1/2 Laplacian + V on a
bounded box and verifies, numerically, that their energies, induced matrix
spectra and spans converge to the low-energy eigenstructure as the
regularization weight fades.
"""

from .consistency import (
    AlignmentError,
    CoeffMatrix,
    SweepRecord,
    SweepReport,
    coefficients,
    column_mass_lemma_check,
    column_mass_suite,
    gap_bound_suite,
    gap_lower_bound,
    interaction_matrix,
    localization,
    mu_sweep,
    nu_spectrum,
    procrustes_align,
)
from .eigensolver import EigenSystem, EigensolverError, reference_eigenpairs, spectral_gap
from .grid import (
    DIRICHLET,
    PERIODIC,
    DiscreteFunction,
    Grid,
    GridMismatchError,
    inner_product,
    l1_norm,
    l2_norm,
)
from .hamiltonian import (
    FreeParticle,
    HamiltonianOperator,
    HarmonicWell,
    MultiWell,
    Potential,
    Tabulated,
    build_hamiltonian,
)
from .modes import ModeSet, RankDeficientError, orthonormalize
from .regularizer import L1Regularizer, Regularizer, ZeroRegularizer, make_regularizer
from .solver import (
    EigenInit,
    ModeInit,
    RandomOrthonormal,
    SolverConfig,
    SolverResult,
    mode_energies,
    objective,
    solve_cm,
    warm_started,
)

__version__ = "0.1.0"

__all__ = [
    "AlignmentError",
    "CoeffMatrix",
    "DIRICHLET",
    "DiscreteFunction",
    "EigenInit",
    "EigenSystem",
    "EigensolverError",
    "FreeParticle",
    "Grid",
    "GridMismatchError",
    "HamiltonianOperator",
    "HarmonicWell",
    "L1Regularizer",
    "ModeInit",
    "ModeSet",
    "MultiWell",
    "PERIODIC",
    "Potential",
    "RandomOrthonormal",
    "RankDeficientError",
    "Regularizer",
    "SolverConfig",
    "SolverResult",
    "SweepRecord",
    "SweepReport",
    "Tabulated",
    "ZeroRegularizer",
    "build_hamiltonian",
    "coefficients",
    "column_mass_lemma_check",
    "column_mass_suite",
    "gap_bound_suite",
    "gap_lower_bound",
    "inner_product",
    "interaction_matrix",
    "l1_norm",
    "l2_norm",
    "localization",
    "make_regularizer",
    "mode_energies",
    "mu_sweep",
    "nu_spectrum",
    "objective",
    "orthonormalize",
    "procrustes_align",
    "reference_eigenpairs",
    "solve_cm",
    "spectral_gap",
    "warm_started",
]
