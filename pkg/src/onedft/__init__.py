"""One-particle density-functional toolkit in one dimension.

Ground states from the density alone (self-consistent nonlinear eigenproblem
or constrained energy minimization), the Riccati form of the density
equation, and the power family of potentials ``V_n`` with ground states
``~ rho_0**n`` and energies ``2n E_0``.
"""
from .densities import (
    Density,
    Wavefunction,
    density_from_wavefunction,
    log_derivative,
    normalize,
    wavefunction_from_density_power,
)
from .eigensolver import DiscreteHamiltonian, build_hamiltonian, ground_state, sturm_count
from .errors import (
    ConfigError,
    DegeneratePower,
    DomainMismatch,
    InvalidGrid,
    NoConvergence,
    NonPositiveIterate,
    NotNormalizable,
    OneDFTError,
    UnsanctionedIndex,
)
from .family import (
    CuspTerm,
    FamilyIndex,
    VerificationReport,
    appendix_b_residual,
    cusp_term,
    family_closed_form_from_v1,
    family_energy,
    family_potential,
    family_recursion_step,
    verify_family_member,
)
from .functionals import (
    NATURAL,
    PhysicalConstants,
    Potential,
    effective_potential,
    euler_residual,
    kinetic_energy,
    kinetic_energy_laplacian_form,
    potential_energy,
    total_energy,
)
from .grid import Grid1D, RealField, derivative, integrate, make_grid, second_derivative
from .riccati import density_from_logslope, riccati_residual
from .scf import ScfParams, SolveReport, default_initial_density, minimize_energy, scf_solve
from .systems import (
    Box,
    Delta,
    Oscillator,
    analytic_density,
    analytic_family_potential,
    analytic_ground_energy,
    analytic_potential,
    identity_mask,
    natural_grid,
    system_from_name,
    wall_margin_mask,
)

__version__ = "0.1.0"
