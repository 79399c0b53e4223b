"""Energy-difference functional of the supercell crack problem.

The energy of a corrector ``u`` (zero outside the domain) is

    E(u) = sum_m V(Du_hat(m) + Du(m)) - V(Du_hat(m)),

and every term vanishes unless ``m`` or one of its neighbours carries a
nonzero ``u``.  Summing over bonds that touch the domain is therefore exact.
Bonds are handled undirected: bond ``(a, b)`` enters as
``phi(g) + phi(-g)`` with ``g = w(b) - w(a)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .lattice import LatticeDomain, ScalarField, assemble_bond_matrix
from .potential import PairPotential, reference_potential
from .predictor import omega_complex


def predictor_omega2(domain: LatticeDomain) -> np.ndarray:
    """``omega_2(p(l))`` on domain + halo; scale by ``eps`` to get ``u_hat``."""
    cached = getattr(domain, "_omega2_ext", None)
    if cached is None:
        cached = omega_complex(domain.ext_positions).imag
        domain._omega2_ext = cached
    return cached


@dataclass(frozen=True, eq=False)
class EnergyModel:
    domain: LatticeDomain
    eps: float = 0.0
    potential: PairPotential = None

    def __post_init__(self):
        if self.eps < 0:
            raise ValueError(f"eps must be nonnegative, got {self.eps}")
        if self.potential is None:
            object.__setattr__(self, "potential", reference_potential())

    @cached_property
    def u_hat(self) -> np.ndarray:
        """Predictor values on domain + halo."""
        return self.eps * predictor_omega2(self.domain)

    @cached_property
    def _bond_hat(self) -> np.ndarray:
        a, b = self.domain.bonds[:, 0], self.domain.bonds[:, 1]
        return self.u_hat[b] - self.u_hat[a]

    def bond_gradients(self, u: ScalarField) -> np.ndarray:
        """``D(u_hat + u)`` along each undirected bond."""
        if u.domain is not self.domain:
            raise ValueError("field and model live on different domains")
        w = u.extended()
        a, b = self.domain.bonds[:, 0], self.domain.bonds[:, 1]
        return self._bond_hat + (w[b] - w[a])


def energy(model: EnergyModel, u: ScalarField) -> float:
    phi = model.potential.phi
    g = model.bond_gradients(u)
    gh = model._bond_hat
    terms = (phi(g) - phi(gh)) + (phi(-g) - phi(-gh))
    return float(np.sum(terms))


def grad(model: EnergyModel, u: ScalarField) -> ScalarField:
    """First variation as a field: ``<grad, v>`` equals ``dE(u)[v]`` for all
    ``v`` supported in the domain."""
    dphi = model.potential.dphi
    dom = model.domain
    g = model.bond_gradients(u)
    f = dphi(g) - dphi(-g)
    a, b = dom.bonds[:, 0], dom.bonds[:, 1]
    r = np.bincount(b, weights=f, minlength=dom.n_ext)
    r -= np.bincount(a, weights=f, minlength=dom.n_ext)
    return ScalarField(dom, r[:dom.n_sites])


def hessian(model: EnergyModel, u: ScalarField) -> sp.csr_matrix:
    """Second variation as an exactly symmetric CSR matrix (sorted columns)."""
    ddphi = model.potential.ddphi
    g = model.bond_gradients(u)
    return assemble_bond_matrix(model.domain, ddphi(g) + ddphi(-g))


def gram_matrix(domain: LatticeDomain) -> sp.csr_matrix:
    """Gram matrix of the H^1 seminorm on the domain, ``v^T M v = |v|_{H^1}^2``."""
    return domain.laplacian
