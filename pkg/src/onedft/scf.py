"""Ground-state solvers working on the density directly.

:func:`scf_solve` iterates the nonlinear eigenproblem

    [-(hbar^2/2m) d2/dx2 + V_eff(x; rho)] rho = 2 lambda rho,
    V_eff = 2V + (hbar^2/4m) (rho'/rho)^2,

whose eigenfunction *is* the density (normalized to unit integral, not unit
square integral), with linear density mixing.

:func:`minimize_energy` minimizes E[rho] over ``phi = sqrt(rho)`` on the unit
sphere ``int phi^2 = 1``.  It never touches V_eff, so the two solvers check
each other.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh, solve_banded

from .densities import DEFAULT_FLOOR, Density, normalize
from .eigensolver import DiscreteHamiltonian, build_hamiltonian, ground_state
from .errors import NoConvergence, NonPositiveIterate
from .functionals import NATURAL, PhysicalConstants, Potential, effective_potential
from .grid import RealField, integrate

log = logging.getLogger(__name__)

__all__ = [
    "ScfParams",
    "SolveReport",
    "default_initial_density",
    "scf_solve",
    "minimize_energy",
]


@dataclass(frozen=True)
class ScfParams:
    alpha: float = 0.5
    tol_density: float = 1e-8
    tol_lambda: float = 1e-9
    max_iter: int = 10_000
    # minimize_energy only
    method: str = "pcg"
    c_step: float = 0.25
    # consecutive iterations with a sign-changing eigenvector before giving up
    negative_patience: int = 5

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ValueError(f"mixing alpha must lie in (0, 1], got {self.alpha}")
        if not (self.tol_density > 0 and self.tol_lambda > 0):
            raise ValueError("tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.method not in ("pcg", "flow"):
            raise ValueError(f"unknown minimization method {self.method!r}")
        if not self.c_step > 0:
            raise ValueError("c_step must be positive")


@dataclass
class SolveReport:
    lam: float
    iterations: int
    residual_history: list[float]
    converged: bool
    solver: str = "scf"
    mu: float = math.nan
    energy_history: list[float] = field(default_factory=list)
    clamped_nodes: int = 0

    def as_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "iterations": self.iterations,
            "converged": self.converged,
            "solver": self.solver,
            "mu": None if math.isnan(self.mu) else self.mu,
            "clamped_nodes": self.clamped_nodes,
            "residual_history": list(self.residual_history),
        }


def _free_nodes(V: Potential) -> np.ndarray:
    free = ~V.walls
    free[0] = free[-1] = False
    return free


def default_initial_density(V: Potential) -> Density:
    """Gaussian centred on the grid with sigma = span/6, multiplied on every
    free segment by ``sin^2`` of the segment (zero at walls and grid ends).

    The sin^2 factor gives the guess the quadratic decay of a Dirichlet
    ground density at each wall.  Near a hard wall the linearized SCF map
    has multipliers arbitrarily close to 1 for perturbations that change the
    power-law decay, so a guess with the wrong decay converges very slowly.
    """
    g = V.grid
    x = g.x
    span = g.x_max - g.x_min
    mid = 0.5 * (g.x_min + g.x_max)
    gauss = np.exp(-0.5 * ((x - mid) / (span / 6)) ** 2)
    free = _free_nodes(V)
    profile = np.zeros(g.n_points)
    blocked = np.flatnonzero(~free)
    for a, b in zip(blocked[:-1], blocked[1:]):
        if b - a > 1:
            seg = slice(a + 1, b)
            profile[seg] = np.sin(np.pi * (x[seg] - x[a]) / (x[b] - x[a])) ** 2
    return normalize(RealField(g, gauss * profile))


def _check_init(rho: Density, V: Potential) -> None:
    if rho.grid != V.grid:
        raise ValueError("initial density and potential live on different grids")
    if np.any(rho.values[_free_nodes(V)] <= 0):
        raise ValueError("initial density must be strictly positive on interior nodes")


def scf_solve(
    V: Potential,
    rho_init: Density | None = None,
    params: ScfParams = ScfParams(),
    c: PhysicalConstants = NATURAL,
    *,
    strict: bool = False,
) -> tuple[Density, SolveReport]:
    """Self-consistent solution of the nonlinear density equation.

    Each iteration builds ``V_eff`` from the current density, takes the lowest
    eigenpair ``(mu, u)`` of ``-(hbar^2/2m) d2 + V_eff``, renormalizes ``u`` to
    unit integral and mixes it in with weight ``alpha``.  ``lambda = mu/2``.
    Converged when the L1 change of the density is below ``tol_density`` and
    the change of ``lambda`` below ``tol_lambda``.

    Returns ``converged=False`` in the report on hitting ``max_iter`` (raises
    NoConvergence instead when ``strict``).
    """
    rho = default_initial_density(V) if rho_init is None else rho_init
    _check_init(rho, V)
    floor = rho.floor
    g = V.grid
    history: list[float] = []
    lam_hist: list[float] = []
    lam_prev = math.nan
    clamped = 0
    negative_run = 0
    mu = math.nan
    converged = False
    k = 0
    for k in range(1, params.max_iter + 1):
        veff = effective_potential(rho, V, c)
        mu, u = ground_state(build_hamiltonian(veff, c=c))
        cand = np.array(u.values)
        neg = cand < 0
        if neg.any():
            clamped += int(neg.sum())
            if cand.min() < -1e-8 * cand.max():
                negative_run += 1
                if negative_run >= params.negative_patience:
                    raise NonPositiveIterate(
                        f"eigenvector changed sign in {negative_run} consecutive iterations"
                    )
            else:
                negative_run = 0
            cand[neg] = floor
        else:
            negative_run = 0
        cand /= integrate(RealField(g, cand))
        new = (1 - params.alpha) * rho.values + params.alpha * cand
        new_rho = normalize(RealField(g, new), floor)
        dl1 = integrate(RealField(g, np.abs(new_rho.values - rho.values)))
        lam = 0.5 * mu
        history.append(dl1)
        lam_hist.append(lam)
        rho = new_rho
        if dl1 < params.tol_density and abs(lam - lam_prev) < params.tol_lambda:
            converged = True
            break
        lam_prev = lam
    report = SolveReport(
        lam=0.5 * mu,
        iterations=k,
        residual_history=history,
        converged=converged,
        solver="scf",
        mu=mu,
        energy_history=lam_hist,
        clamped_nodes=clamped,
    )
    if not converged:
        log.warning("scf_solve: no convergence after %d iterations (last dL1=%.3e)", k, history[-1])
        if strict:
            raise NoConvergence("scf_solve did not converge", rho, report)
    return rho, report


def _kinetic_banded(H: DiscreteHamiltonian, c: PhysicalConstants, shift: float) -> np.ndarray:
    t = c.kinetic_prefactor / H.grid.h**2
    ab = np.zeros((3, H.size))
    ab[1] = 2 * t + shift
    coupled = H.offdiag != 0
    ab[0, 1:] = np.where(coupled, -t, 0.0)
    ab[2, :-1] = np.where(coupled, -t, 0.0)
    return ab


def minimize_energy(
    V: Potential,
    rho_init: Density | None = None,
    params: ScfParams = ScfParams(),
    c: PhysicalConstants = NATURAL,
    *,
    strict: bool = False,
) -> tuple[Density, SolveReport]:
    """Minimize the discrete energy over ``phi = sqrt(rho)`` with ``int phi^2 = 1``.

    ``method="pcg"`` (default): projected preconditioned descent.  The
    gradient residual ``H phi - lambda phi`` is preconditioned with
    ``(T + sigma)^-1`` and the next iterate is the energy minimizer over
    ``span{phi, P r, previous step}`` (Rayleigh-Ritz), so every accepted step
    lowers the energy.

    ``method="flow"``: plain imaginary-time gradient flow
    ``phi <- phi - tau H phi`` with ``tau = c_step h^2 (2m/hbar^2)``, followed
    by renormalization.  Stable but needs O(1/(tau*gap)) steps.

    ``lambda`` is the Rayleigh quotient ``int phi H phi dx``.
    """
    rho = default_initial_density(V) if rho_init is None else rho_init
    _check_init(rho, V)
    H = build_hamiltonian(V, c=c)
    g = V.grid
    h = g.h
    u = np.sqrt(rho.values[H.nodes])
    u /= np.linalg.norm(u)
    Hu = H.apply(u)
    lam = float(u @ Hu)
    energies = [lam]
    history: list[float] = []
    converged = False
    dens = u * u
    k = 0

    if params.method == "flow":
        tau = params.c_step * h**2 * (2 * c.mass / c.hbar**2)
        step = None
    else:
        sigma = max(abs(lam), c.kinetic_prefactor * (math.pi / (g.x_max - g.x_min)) ** 2)
        ab = _kinetic_banded(H, c, sigma)
        p = None

    for k in range(1, params.max_iter + 1):
        r = Hu - lam * u
        history.append(float(np.linalg.norm(r)))
        if params.method == "flow":
            u_new = u - tau * Hu
            u_new /= np.linalg.norm(u_new)
            Hu_new = H.apply(u_new)
            lam_new = float(u_new @ Hu_new)
        else:
            w = solve_banded((1, 1), ab, r)
            u_new, Hu_new, lam_new, p = _ritz_step(H, u, Hu, w, p)
        if u_new.sum() < 0:
            u_new, Hu_new = -u_new, -Hu_new
        dens_new = u_new * u_new
        # u is Euclidean-normalized; the L1 norm of rho = u^2/h on the grid
        dl1 = float(np.abs(dens_new - dens).sum())
        dlam = abs(lam_new - lam)
        u, Hu, lam, dens = u_new, Hu_new, lam_new, dens_new
        energies.append(lam)
        if dl1 < params.tol_density and dlam < params.tol_lambda:
            converged = True
            break

    phi = H.embed(u)
    rho_out = normalize(RealField(g, phi * phi), rho.floor)
    report = SolveReport(
        lam=lam,
        iterations=k,
        residual_history=history,
        converged=converged,
        solver=f"minimize/{params.method}",
        energy_history=energies,
    )
    if not converged:
        log.warning("minimize_energy: no convergence after %d iterations", k)
        if strict:
            raise NoConvergence("minimize_energy did not converge", rho_out, report)
    return rho_out, report


def _ritz_step(H, u, Hu, w, p):
    """Rayleigh-Ritz over span{u, w, p}; returns the new iterate and search direction."""
    cols = [u, w / np.linalg.norm(w)]
    if p is not None and np.linalg.norm(p) > 0:
        cols.append(p / np.linalg.norm(p))
    S = np.column_stack(cols)
    HS = np.column_stack([Hu] + [H.apply(s) for s in cols[1:]])
    A = S.T @ HS
    A = 0.5 * (A + A.T)
    B = S.T @ S
    # near-parallel directions make B singular; fall back to a smaller basis
    while S.shape[1] > 1 and np.linalg.cond(B) > 1e12:
        S, HS = S[:, :-1], HS[:, :-1]
        A, B = A[:-1, :-1], B[:-1, :-1]
    if S.shape[1] == 1:
        return u, Hu, float(u @ Hu), None
    theta, C = eigh(A, B)
    coef = C[:, 0]
    u_new = S @ coef
    Hu_new = HS @ coef
    nrm = np.linalg.norm(u_new)
    u_new, Hu_new = u_new / nrm, Hu_new / nrm
    p_new = (S[:, 1:] @ coef[1:]) / nrm
    return u_new, Hu_new, float(u_new @ Hu_new), p_new
