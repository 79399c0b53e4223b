"""Atomistic anti-plane crack on the square lattice: equilibria, supercell
convergence, corrector decay and the crack-geometry lattice Green's function."""

from .lattice import (X_HAT, Direction, DomainError, DomainMismatch, LatticeDomain,
                      ScalarField, Stencil, gradient, h1_norm, hessian_apply, stencil)
from .model import EnergyModel, energy, grad, hessian
from .potential import PairPotential, PotentialError, reference_potential, site_energy
from .predictor import g_hat, g_hat_lattice, omega, omega_star, u_hat
from .solver import (BreakdownError, IndefiniteHessian, NonConvergence, SolveReport,
                     lambda_min, newton)

__version__ = "0.1.0"

__all__ = [
    "X_HAT", "Direction", "DomainError", "DomainMismatch", "LatticeDomain", "ScalarField",
    "Stencil", "gradient", "h1_norm", "hessian_apply", "stencil",
    "EnergyModel", "energy", "grad", "hessian",
    "PairPotential", "PotentialError", "reference_potential", "site_energy",
    "g_hat", "g_hat_lattice", "omega", "omega_star", "u_hat",
    "BreakdownError", "IndefiniteHessian", "NonConvergence", "SolveReport",
    "lambda_min", "newton",
]
