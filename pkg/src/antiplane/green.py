"""Lattice Green's function of the crack geometry by predictor-corrector.

``G(m, s) = G_hat(m, s) + G_bar(m, s)`` where ``G_hat`` is the continuum
Green's function of the slit plane sampled on the lattice and ``G_bar`` is a
lattice correction.  For each requested source ``s`` one linear problem is
solved for the corrector column ``G_tilde(., s)``, normalised to vanish at the
pinning site ``x_hat``; the symmetric correction is then

    G_bar(m, s) = G_tilde(m, s) + G_tilde(s, x_hat).

On a finite domain the corrector needs data on the halo.  Two choices are
offered:

``"zero"``
    the corrector vanishes outside the domain, i.e. the far field is exactly
    the continuum predictor.  Delta property holds on the whole domain but
    symmetry only up to an ``O(1/R)`` truncation error.
``"symmetric"`` (default)
    the halo trace of ``G(., s)`` is the discrete harmonic extension, in the
    source variable, of ``G_hat`` restricted to halo x halo.  It differs from
    the predictor by ``O(1/R)`` and makes ``G`` exactly symmetric, while the
    delta property still holds on the whole domain.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.special import roots_legendre

from .lattice import (X_HAT, Direction, DomainError, DomainMismatch, LatticeDomain, Site,
                      apply_hessian_ext, neighbour, stencil)
from .predictor import _g_hat_from_omega, g_hat_sites, omega_complex
from .lattice import position
from .solver import conjugate_gradient

BOUNDARY_MODES = ("symmetric", "zero")


class SourceOutsideDomain(DomainError):
    pass


class QuadratureNotConverged(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class GreenColumn:
    """Solved corrector column ``G_tilde(., s)`` on domain + halo.

    ``corrector`` is pinned so that its value at ``x_hat`` is zero; ``offset``
    is the constant that was subtracted to achieve that.
    """

    source: Site
    domain: LatticeDomain
    corrector: np.ndarray
    offset: float
    boundary: str

    def _ext(self, m: Site) -> int:
        i = self.domain.ext_index(m)
        if i < 0:
            raise DomainError(f"site {tuple(m)} is outside domain and halo")
        return i

    def corrector_at(self, m: Site) -> float:
        return float(self.corrector[self._ext(m)])

    def predictor_at(self, m: Site) -> float:
        return float(g_hat_sites([m], self.source)[0])

    @cached_property
    def predictor_ext(self) -> np.ndarray:
        return g_hat_sites(self.domain.ext_sites, self.source)

    def values_ext(self) -> np.ndarray:
        """``G_hat(., s) + G_tilde(., s)`` on domain + halo."""
        return self.predictor_ext + self.corrector

    def delta_residual(self) -> np.ndarray:
        """``H(G_hat + G_tilde)(., s)(m) - delta_{ms}`` for every domain site."""
        r = apply_hessian_ext(self.domain, self.values_ext())
        r[self.domain.index(self.source)] -= 1.0
        return r


def _as_site(s) -> Site:
    return (int(s[0]), int(s[1]))


def _solve(A, b, method, factor_cache):
    if method == "cg":
        return conjugate_gradient(A, b, rtol=1e-13, atol=1e-13).x
    if method == "direct":
        if "lu" not in factor_cache:
            factor_cache["lu"] = spla.splu(sp.csc_matrix(A))
        return factor_cache["lu"].solve(b)
    raise ValueError(f"unknown linear solver {method!r}")


def halo_predictor_matrix(domain: LatticeDomain) -> np.ndarray:
    """``G_hat(b, b')`` over halo x halo (zero diagonal)."""
    cached = getattr(domain, "_halo_ghat", None)
    if cached is None:
        w = omega_complex(position(domain.halo))
        with np.errstate(divide="ignore"):
            cached = _g_hat_from_omega(w[:, None], w[None, :])
        np.fill_diagonal(cached, 0.0)
        domain._halo_ghat = cached
    return cached


def solve_corrector(s: Site, domain: LatticeDomain, boundary: str = "symmetric",
                    linear_solver: str = "cg", _factor_cache=None) -> GreenColumn:
    """Corrector column for source ``s``.

    Solves ``A G_tilde = delta_s - H G_hat(., s)`` on the domain, where ``A``
    is the (eps = 0) lattice Hessian with the halo data of ``boundary``.
    """
    s = _as_site(s)
    if s not in domain:
        raise SourceOutsideDomain(f"source {s} is not in the domain (R={domain.radius})")
    if boundary not in BOUNDARY_MODES:
        raise ValueError(f"boundary must be one of {BOUNDARY_MODES}, got {boundary!r}")
    cache = {} if _factor_cache is None else _factor_cache
    A = domain.laplacian
    n = domain.n_sites
    ghat = g_hat_sites(domain.ext_sites, s)
    delta = np.zeros(n)
    delta[domain.index(s)] = 1.0
    if boundary == "zero":
        rhs = delta - apply_hessian_ext(domain, ghat)
        corr = np.concatenate([_solve(A, rhs, linear_solver, cache), np.zeros(domain.n_halo)])
    else:
        B = domain.halo_coupling
        g_dir = _solve(A, delta, linear_solver, cache)
        harmonic_measure = -(B.T @ g_dir)
        trace = halo_predictor_matrix(domain) @ harmonic_measure
        interior = g_dir + _solve(A, -(B @ trace), linear_solver, cache)
        corr = np.concatenate([interior, trace]) - ghat
    offset = float(corr[domain.index(X_HAT)])
    return GreenColumn(s, domain, corr - offset, offset, boundary)


def symmetrize(column_of: Callable[[Site], GreenColumn],
               xhat_column: GreenColumn) -> Callable[[Site, Site], float]:
    """``(m, s) -> G_tilde(m, s) + G_tilde(s, x_hat)``.

    ``column_of(s)`` must return the corrector column of source ``s`` on the
    same domain as ``xhat_column``.
    """
    if tuple(xhat_column.source) != X_HAT:
        raise ValueError("second argument must be the column of the pinning site")

    def g_bar(m: Site, s: Site) -> float:
        col = column_of(_as_site(s))
        if col.domain is not xhat_column.domain:
            raise DomainMismatch("columns were solved on different domains")
        return col.corrector_at(m) + xhat_column.corrector_at(s)

    return g_bar


class LatticeGreenFunction:
    """Lazily solved, LRU-cached crack Green's function on a fixed domain."""

    def __init__(self, domain: LatticeDomain, boundary: str = "symmetric",
                 linear_solver: str = "cg", cache_size: int = 256):
        if boundary not in BOUNDARY_MODES:
            raise ValueError(f"boundary must be one of {BOUNDARY_MODES}")
        self.domain = domain
        self.boundary = boundary
        self.linear_solver = linear_solver
        self.cache_size = cache_size
        self._columns: "OrderedDict[Site, GreenColumn]" = OrderedDict()
        self._factor_cache: dict = {}
        self._xhat = self.column(X_HAT)
        self._g_bar = symmetrize(self.column, self._xhat)

    def column(self, s: Site) -> GreenColumn:
        s = _as_site(s)
        col = self._columns.get(s)
        if col is not None:
            self._columns.move_to_end(s)
            return col
        col = solve_corrector(s, self.domain, self.boundary, self.linear_solver,
                              self._factor_cache)
        self._columns[s] = col
        if len(self._columns) > self.cache_size:
            self._columns.popitem(last=False)
        return col

    def predictor(self, m: Site, s: Site) -> float:
        return float(g_hat_sites([m], s)[0])

    def corrector(self, m: Site, s: Site) -> float:
        """Symmetrised correction ``G_bar(m, s)``."""
        return self._g_bar(m, s)

    def __call__(self, m: Site, s: Site) -> float:
        return self.predictor(m, s) + self.corrector(m, s)

    def column_values(self, s: Site) -> np.ndarray:
        """``G(., s)`` on domain + halo."""
        col = self.column(s)
        return col.values_ext() + self._xhat.corrector_at(s)

    def delta_residual(self, s: Site) -> np.ndarray:
        r = apply_hessian_ext(self.domain, self.column_values(s))
        r[self.domain.index(s)] -= 1.0
        return r

    def mixed_difference(self, l: Site, s: Site, rho: Direction, sigma: Direction) -> float:
        return mixed_difference(self, l, s, rho, sigma)


def mixed_difference(green: LatticeGreenFunction, l: Site, s: Site,
                     rho: Direction, sigma: Direction) -> float:
    """``G(l+rho, s+sigma) - G(l, s+sigma) - G(l+rho, s) + G(l, s)``."""
    l, s = _as_site(l), _as_site(s)
    rho, sigma = Direction(rho), Direction(sigma)
    if rho not in stencil(l):
        raise ValueError(f"direction {rho.name} is erased at {l}")
    if sigma not in stencil(s):
        raise ValueError(f"direction {sigma.name} is erased at {s}")
    lr, ss = neighbour(l, rho), neighbour(s, sigma)
    for site in (l, lr, s, ss):
        if site not in green.domain:
            raise DomainError(f"site {site} is not in the domain")
    col_s, col_ss = green.column(s), green.column(ss)
    # G_hat is evaluated directly; the s-only part of G_bar cancels in the l-difference
    return ((green.predictor(lr, ss) + col_ss.corrector_at(lr))
            - (green.predictor(l, ss) + col_ss.corrector_at(l))
            - (green.predictor(lr, s) + col_s.corrector_at(lr))
            + (green.predictor(l, s) + col_s.corrector_at(l)))


def decay_bound(l: Site, s: Site, delta: float = 0.1) -> float:
    """``(1 + |w_l| |w_s| |w_l - w_s|^(2 - delta))^-1`` with ``w = omega(p(.))``."""
    wl = omega_complex(position(l))
    ws = omega_complex(position(s))
    return float(1.0 / (1.0 + abs(wl) * abs(ws) * abs(wl - ws) ** (2.0 - delta)))


# -- homogeneous lattice Green's function -----------------------------------

def _reduced_integrand(k: np.ndarray, a1: int, a2: int) -> np.ndarray:
    # k2-integral done in closed form:
    #   int cos(n k2) / (c - cos k2) dk2 = 2 pi t^|n| / sqrt(c^2 - 1),
    #   c = 2 - cos k1,  t = c - sqrt(c^2 - 1)
    c = 2.0 - np.cos(k)
    root = math.sqrt(2.0) * np.sin(k / 2) * np.sqrt(3.0 - np.cos(k))
    t = c - root
    return (1.0 - np.cos(a1 * k) * t ** abs(a2)) / root


def _hom_zero_minus(a, tol: float, max_nodes: int) -> float:
    """``G_hom(0) - G_hom(a)``, refining Gauss-Legendre on (0, pi)."""
    a1, a2 = int(a[0]), int(a[1])
    if a1 == 0 and a2 == 0:
        return 0.0
    n = 16
    prev = None
    while n <= max_nodes:
        x, w = roots_legendre(n)
        k = 0.5 * math.pi * (x + 1.0)
        val = 0.5 * math.pi * float(np.dot(w, _reduced_integrand(k, a1, a2))) / (4.0 * math.pi)
        if prev is not None and abs(val - prev) < tol:
            return val
        prev = val
        n *= 2
    raise QuadratureNotConverged(
        f"G_hom(0) - G_hom({a1},{a2}) not converged to {tol:g} with {max_nodes} nodes")


def homogeneous_green_difference(a, b, tol: float = 1e-9, max_nodes: int = 1 << 14) -> float:
    """``G_hom(a) - G_hom(b)`` for the full-stencil operator (8 on the diagonal,
    -2 per neighbour), i.e. differences of
    ``(2 pi)^-2 int cos(k.m) / lam(k) dk`` with
    ``lam(k) = 2 sum_rho (1 - cos(k.rho))``."""
    return _hom_zero_minus(b, tol, max_nodes) - _hom_zero_minus(a, tol, max_nodes)


def sample_ray(green: LatticeGreenFunction, s: Site, start: Site, step: Tuple[int, int],
               count: int, rho: Direction = Direction.E1, sigma: Direction = Direction.E1,
               delta: float = 0.1):
    """Rows ``(l, s, G(l, s), D1 D2 G(l, s), bound)`` along ``start + k step``."""
    rows = []
    for k in range(count):
        l = (start[0] + k * step[0], start[1] + k * step[1])
        rows.append((l, _as_site(s), green(l, s),
                     green.mixed_difference(l, s, rho, sigma), decay_bound(l, s, delta)))
    return rows
