"""Quantum state tomography of a single bosonic mode in a truncated Fock space."""

from . import errors
from .dynamics import EvolutionSpec, evolve, parameter_rotation_check, rotated_parameters
from .fock import (
    ANALYTIC,
    DEFAULT_DIM,
    RECONSTRUCTED,
    Tolerances,
    characteristic_function,
    coherent_ket,
    displacement_matrix,
    fidelity,
    psd_part,
    validate_density,
)
from .forward import (
    MarginalSlice,
    PhotonTomogram,
    PolarGrid,
    QuadratureSpec,
    SymplecticParams,
    Tomogram,
    homodyne_marginal,
    husimi_q,
    photon_marginal,
    sample_counts,
    symplectic_marginal,
    synthesize_homodyne,
    synthesize_photon,
    synthesize_symplectic,
    wigner,
)
from .inverse import (
    ReconstructionReport,
    decompose_symplectic,
    reconstruct_homodyne,
    reconstruct_photon,
    reconstruct_symplectic,
)
from .states import Coherent, EvenCat, Fock, Squeezed, parse_state, realize

__version__ = "0.1.0"
