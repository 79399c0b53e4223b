"""Pair potentials for nearest-neighbour anti-plane bonds."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

ArrayFn = Callable[[np.ndarray], np.ndarray]

# sample points used when validating a potential
_SAMPLES = np.linspace(-2.0, 2.0, 161)


class PotentialError(ValueError):
    """A pair potential violates one of the required symmetry contracts."""


@dataclass(frozen=True)
class PairPotential:
    """Bond potential ``phi`` with analytic first and second derivatives.

    The model requires ``phi(0) = 0``, ``phi(-r) = phi(r)`` and
    ``phi''(0) = 1``.  These are checked on construction (together with
    finite-difference consistency of the derivatives) and a violation raises
    :class:`PotentialError`.
    """

    phi: ArrayFn
    dphi: ArrayFn
    ddphi: ArrayFn
    name: str = "custom"
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        if self.validate:
            check_potential(self)


def check_potential(pot: PairPotential, samples: np.ndarray = _SAMPLES,
                    rtol: float = 1e-6) -> None:
    r = np.asarray(samples, dtype=float)
    zero = np.zeros(1)
    if abs(float(pot.phi(zero)[0])) > 1e-14:
        raise PotentialError(f"{pot.name}: phi(0) = {pot.phi(zero)[0]!r}, expected 0")
    if abs(float(pot.ddphi(zero)[0]) - 1.0) > 1e-12:
        raise PotentialError(f"{pot.name}: phi''(0) = {pot.ddphi(zero)[0]!r}, expected 1")
    asym = np.max(np.abs(pot.phi(r) - pot.phi(-r)))
    if asym > 1e-14 * max(1.0, float(np.max(np.abs(pot.phi(r))))):
        raise PotentialError(f"{pot.name}: phi is not even (max |phi(r)-phi(-r)| = {asym:.3e})")
    h = 1e-5
    checks = (("phi'", pot.phi, pot.dphi), ("phi''", pot.dphi, pot.ddphi))
    for label, f, df in checks:
        fd = (f(r + h) - f(r - h)) / (2 * h)
        exact = df(r)
        err = np.abs(fd - exact) / np.maximum(1.0, np.abs(exact))
        if np.max(err) > rtol:
            k = int(np.argmax(err))
            raise PotentialError(
                f"{pot.name}: {label} inconsistent with finite differences at r={r[k]:.3f} "
                f"(rel. err {err[k]:.2e})")


def _ref_phi(r):
    r = np.asarray(r, dtype=float)
    return -np.expm1(-3.0 * r * r) / 6.0


def _ref_dphi(r):
    r = np.asarray(r, dtype=float)
    return r * np.exp(-3.0 * r * r)


def _ref_ddphi(r):
    r = np.asarray(r, dtype=float)
    r2 = r * r
    return (1.0 - 6.0 * r2) * np.exp(-3.0 * r2)


def reference_potential() -> PairPotential:
    """``phi(r) = (1 - exp(-3 r^2)) / 6``."""
    return PairPotential(_ref_phi, _ref_dphi, _ref_ddphi, name="gaussian")


def site_energy(pot: PairPotential, g) -> float:
    """``V(g) = sum_rho phi(g_rho)`` for a bond gradient ``g`` (erased
    components already zero, hence energy-neutral)."""
    return float(np.sum(pot.phi(np.asarray(g, dtype=float))))
