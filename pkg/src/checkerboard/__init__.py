"""Lattice master equations for a two-direction walker and their continuum Dirac limit."""
from .backend import NAME as BACKEND
from .continuum import (
    ChiralField,
    ResidualReport,
    chiral_field,
    convergence_order,
    transport_residual,
    zzb_pde_residual,
)
from .gauge import FourPotential, SpinorField, dirac_with_potential, minimal_couple, position_space_residual
from .lattice import (
    CausalFieldPair,
    DirectedAmplitudeField,
    LatticeSpec,
    PathQuery,
    SingularSystemError,
    TransitionRates,
    Weight,
    causality_residual,
    consistent_pair,
    evolve_causal,
    evolve_simple,
    path_sum_amplitude,
    step_causal,
    step_simple,
)
from .spectral import MomentumPoint, dft_forward, dft_inverse, dirac_form, eig4

__version__ = "0.1.0"
