"""Quick invariant suite used by ``antiplane check``."""

from __future__ import annotations

from typing import Callable, List, Tuple

import numpy as np

from .lattice import LatticeDomain, ScalarField, neighbour, stencil
from .model import EnergyModel, energy, grad, hessian
from .potential import PotentialError, check_potential, reference_potential
from .predictor import g_hat_sites

CheckResult = Tuple[str, bool, str]


def check_stencil_reciprocity(radius: float = 16) -> CheckResult:
    dom = LatticeDomain(radius)
    bad = 0
    for l in dom.ext_sites:
        m = (int(l[0]), int(l[1]))
        for rho in stencil(m).directions():
            if -rho not in stencil(neighbour(m, rho)):
                bad += 1
    on_cut = int(np.sum(dom.positions[:, 1] == 0))
    return ("stencil reciprocity", bad == 0 and on_cut == 0,
            f"{bad} non-reciprocal bonds, {on_cut} sites on the crack line")


def fd_errors(radius: float = 8, eps: float = 0.05, seed: int = 0,
              h: float = 1e-5) -> Tuple[float, float]:
    """Relative errors of the gradient and Hessian against central differences."""
    dom = LatticeDomain(radius)
    model = EnergyModel(dom, eps)
    rng = np.random.default_rng(seed)
    u = ScalarField(dom, 0.05 * rng.standard_normal(dom.n_sites))
    v = ScalarField(dom, rng.standard_normal(dom.n_sites))
    fd = (energy(model, u + h * v) - energy(model, u - h * v)) / (2 * h)
    an = float(np.dot(grad(model, u).values, v.values))
    g_err = abs(fd - an) / abs(an)
    fd_h = (grad(model, u + h * v).values - grad(model, u - h * v).values) / (2 * h)
    an_h = hessian(model, u) @ v.values
    h_err = float(np.linalg.norm(fd_h - an_h) / np.linalg.norm(an_h))
    return g_err, h_err


def check_fd_consistency() -> CheckResult:
    worst_g = worst_h = 0.0
    for radius in (8, 16):
        for eps in (0.0, 0.05):
            g, h = fd_errors(radius, eps)
            worst_g, worst_h = max(worst_g, g), max(worst_h, h)
    return ("FD gradient/Hessian", worst_g < 1e-6 and worst_h < 1e-5,
            f"gradient rel. err {worst_g:.2e}, Hessian rel. err {worst_h:.2e}")


def check_potential_contracts() -> CheckResult:
    try:
        check_potential(reference_potential())
    except PotentialError as exc:
        return ("phi contracts", False, str(exc))
    return ("phi contracts", True, "phi(0)=0, even, phi''(0)=1, derivatives consistent")


def check_ghat_symmetry(radius: float = 16, seed: int = 0) -> CheckResult:
    dom = LatticeDomain(radius)
    rng = np.random.default_rng(seed)
    pick = rng.integers(dom.n_sites, size=(50, 2))
    worst = 0.0
    for i, j in pick:
        m, s = dom.sites[i], dom.sites[j]
        worst = max(worst, abs(g_hat_sites([m], s)[0] - g_hat_sites([s], m)[0]))
    return ("G_hat symmetry", worst == 0.0, f"max |G_hat(m,s) - G_hat(s,m)| = {worst:.1e}")


CHECKS: List[Callable[[], CheckResult]] = [
    check_stencil_reciprocity,
    check_fd_consistency,
    check_potential_contracts,
    check_ghat_symmetry,
]


def run_checks() -> List[CheckResult]:
    return [check() for check in CHECKS]
