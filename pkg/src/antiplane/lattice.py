"""Geometry of the cracked square lattice.

Sites are integer pairs ``l = (l1, l2)`` sitting at physical position
``p(l) = l - (1/2, 1/2)``.  The crack tip is at the continuum origin and the
crack cut runs along the negative ``x1`` axis, so no site ever lies on it.
Bonds crossing the cut (between the two rows ``l2 = 0`` and ``l2 = 1`` with
``l1 <= 0``) are erased.

Fields on a finite domain are stored on the *extended* index set: the ``N``
domain sites first, then the halo (sites outside the domain that share an
active bond with it).  Any site further out never interacts with the domain.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Tuple

import numpy as np
import scipy.sparse as sp

Site = Tuple[int, int]

#: pinning site, the lattice site at continuum position (1/2, 1/2)
X_HAT: Site = (1, 1)


class Direction(enum.IntEnum):
    """Nearest-neighbour directions in a fixed enumeration order."""

    E1 = 0
    E2 = 1
    NEG_E1 = 2
    NEG_E2 = 3

    @property
    def vector(self) -> Site:
        return _VECTORS[self]

    def __neg__(self) -> "Direction":
        return Direction((self + 2) % 4)


_VECTORS = {
    Direction.E1: (1, 0),
    Direction.E2: (0, 1),
    Direction.NEG_E1: (-1, 0),
    Direction.NEG_E2: (0, -1),
}
DIRECTION_VECTORS = np.array([_VECTORS[d] for d in Direction], dtype=np.int64)


class Stencil(enum.IntFlag):
    """Crack-adapted direction set, one bit per :class:`Direction`."""

    E1 = 1 << Direction.E1
    E2 = 1 << Direction.E2
    NEG_E1 = 1 << Direction.NEG_E1
    NEG_E2 = 1 << Direction.NEG_E2
    FULL = 0b1111

    def __contains__(self, direction) -> bool:  # type: ignore[override]
        if isinstance(direction, Direction):
            return bool(self & (1 << direction))
        return enum.IntFlag.__contains__(self, direction)

    def directions(self) -> list:
        return [d for d in Direction if d in self]


class SiteClass(enum.IntEnum):
    INTERIOR = 0
    GAMMA_PLUS = 1
    GAMMA_MINUS = 2


def position(l) -> np.ndarray:
    """Physical position ``p(l)``; accepts a single site or an ``(..., 2)`` array."""
    return np.asarray(l, dtype=float) - 0.5


def classify(l: Site) -> SiteClass:
    l1, l2 = int(l[0]), int(l[1])
    if l1 <= 0:  # p1 < 0
        if l2 == 1:
            return SiteClass.GAMMA_PLUS
        if l2 == 0:
            return SiteClass.GAMMA_MINUS
    return SiteClass.INTERIOR


def stencil(m: Site) -> Stencil:
    """Direction set of site ``m``: full, minus ``-e2`` on the upper crack
    face, minus ``+e2`` on the lower one."""
    kind = classify(m)
    if kind is SiteClass.GAMMA_PLUS:
        return Stencil.FULL & ~Stencil.NEG_E2
    if kind is SiteClass.GAMMA_MINUS:
        return Stencil.FULL & ~Stencil.E2
    return Stencil.FULL


def neighbour(m: Site, rho: Direction) -> Site:
    v = _VECTORS[Direction(rho)]
    return (int(m[0]) + v[0], int(m[1]) + v[1])


def _stencil_masks(sites: np.ndarray) -> np.ndarray:
    """Boolean ``(K, 4)`` array, ``True`` where the direction is active."""
    mask = np.ones((len(sites), 4), dtype=bool)
    left = sites[:, 0] <= 0
    mask[left & (sites[:, 1] == 1), Direction.NEG_E2] = False
    mask[left & (sites[:, 1] == 0), Direction.E2] = False
    return mask


class DomainError(ValueError):
    """A site or field does not belong to the domain it is used with."""


class DomainMismatch(DomainError):
    pass


class LatticeDomain:
    """Lattice ball ``{l : |p(l)| <= R}`` with its one-ring halo.

    Immutable after construction.  Sites are ordered lexicographically by
    ``(l1, l2)``; ``index`` maps a site to its position in that order.
    """

    def __init__(self, radius: float):
        radius = float(radius)
        if not radius > 0:
            raise ValueError(f"radius must be positive, got {radius}")
        self.radius = radius
        n = int(math.ceil(radius)) + 1
        # lookup grid covers the domain plus one ring on each side
        self._lo = -n - 1
        size = 2 * n + 4
        g1, g2 = np.meshgrid(np.arange(self._lo, self._lo + size),
                             np.arange(self._lo, self._lo + size), indexing="ij")
        cand = np.stack([g1.ravel(), g2.ravel()], axis=1)
        p = cand - 0.5
        inside = p[:, 0] ** 2 + p[:, 1] ** 2 <= radius ** 2
        sites = cand[inside]
        self.sites = sites[np.lexsort((sites[:, 1], sites[:, 0]))]
        self.n_sites = len(self.sites)

        lookup = -np.ones((size, size), dtype=np.int64)
        lookup[self.sites[:, 0] - self._lo, self.sites[:, 1] - self._lo] = \
            np.arange(self.n_sites)

        # halo: active neighbours of domain sites that are not in the domain
        mask = _stencil_masks(self.sites)
        nbrs = self.sites[:, None, :] + DIRECTION_VECTORS[None, :, :]
        nb = nbrs[mask]
        outside = lookup[nb[:, 0] - self._lo, nb[:, 1] - self._lo] < 0
        halo = np.unique(nb[outside], axis=0)
        halo = halo[np.lexsort((halo[:, 1], halo[:, 0]))]
        self.halo = halo
        self.n_halo = len(halo)
        lookup[halo[:, 0] - self._lo, halo[:, 1] - self._lo] = \
            self.n_sites + np.arange(self.n_halo)
        self._lookup = lookup
        self.ext_sites = np.concatenate([self.sites, self.halo])
        self.n_ext = len(self.ext_sites)

        # neighbour table over extended sites; n_ext is the "far away" slot
        ext_mask = _stencil_masks(self.ext_sites)
        ext_nb = self.ext_sites[:, None, :] + DIRECTION_VECTORS[None, :, :]
        self.neighbours = self.lookup_array(ext_nb.reshape(-1, 2)).reshape(-1, 4)
        self.neighbours[self.neighbours < 0] = self.n_ext
        self.stencil_mask = ext_mask

        # undirected active bonds a -> a + rho, rho in {e1, e2}, touching the domain
        bonds = []
        for rho in (Direction.E1, Direction.E2):
            a = np.arange(self.n_ext)
            b = self.neighbours[:, rho]
            keep = ext_mask[:, rho] & (b < self.n_ext) & \
                ((a < self.n_sites) | (b < self.n_sites))
            bonds.append(np.stack([a[keep], b[keep]], axis=1))
        self.bonds = np.concatenate(bonds)

    # -- indexing -----------------------------------------------------------

    def lookup_array(self, sites) -> np.ndarray:
        """Extended indices of ``sites`` (``-1`` when not in domain or halo)."""
        sites = np.asarray(sites, dtype=np.int64).reshape(-1, 2)
        i = sites[:, 0] - self._lo
        j = sites[:, 1] - self._lo
        size = self._lookup.shape[0]
        ok = (i >= 0) & (i < size) & (j >= 0) & (j < size)
        out = -np.ones(len(sites), dtype=np.int64)
        out[ok] = self._lookup[i[ok], j[ok]]
        return out

    def ext_index(self, site: Site) -> int:
        """Extended index of a domain or halo site, ``-1`` otherwise."""
        return int(self.lookup_array([site])[0])

    def index(self, site: Site) -> int:
        i = self.ext_index(site)
        if not 0 <= i < self.n_sites:
            raise DomainError(f"site {tuple(site)} is not in the domain (R={self.radius})")
        return i

    def __contains__(self, site) -> bool:
        return 0 <= self.ext_index(site) < self.n_sites

    def in_extended(self, site: Site) -> bool:
        return self.ext_index(site) >= 0

    # -- geometry -----------------------------------------------------------

    @cached_property
    def positions(self) -> np.ndarray:
        return position(self.sites)

    @cached_property
    def ext_positions(self) -> np.ndarray:
        return position(self.ext_sites)

    @cached_property
    def classification(self) -> np.ndarray:
        """:class:`SiteClass` code per domain site."""
        out = np.full(self.n_sites, SiteClass.INTERIOR, dtype=np.int64)
        left = self.sites[:, 0] <= 0
        out[left & (self.sites[:, 1] == 1)] = SiteClass.GAMMA_PLUS
        out[left & (self.sites[:, 1] == 0)] = SiteClass.GAMMA_MINUS
        return out

    def distance_to_boundary(self) -> np.ndarray:
        """``R - |p(l)|`` per domain site."""
        return self.radius - np.hypot(self.positions[:, 0], self.positions[:, 1])

    @cached_property
    def laplacian(self) -> sp.csr_matrix:
        """Matrix of ``H`` restricted to fields vanishing outside the domain."""
        return assemble_bond_matrix(self, np.full(len(self.bonds), 2.0))

    @cached_property
    def halo_coupling(self) -> sp.csr_matrix:
        """``(N, N_halo)`` block of ``H`` coupling domain rows to halo values."""
        a, b = self.bonds[:, 0], self.bonds[:, 1]
        n = self.n_sites
        rows = np.concatenate([a[(a < n) & (b >= n)], b[(b < n) & (a >= n)]])
        cols = np.concatenate([b[(a < n) & (b >= n)], a[(b < n) & (a >= n)]]) - n
        data = np.full(len(rows), -2.0)
        return sp.csr_matrix((data, (rows, cols)), shape=(n, self.n_halo))

    def __repr__(self) -> str:
        return f"LatticeDomain(radius={self.radius}, n_sites={self.n_sites})"


def assemble_bond_matrix(domain: LatticeDomain, weights: np.ndarray) -> sp.csr_matrix:
    """Symmetric ``N x N`` matrix with bond ``(a, b)`` contributing ``+w`` to
    both diagonals and ``-w`` off-diagonal; rows/columns outside the domain
    are dropped.  Each off-diagonal entry comes from exactly one bond, so the
    result is exactly symmetric."""
    n = domain.n_sites
    a, b = domain.bonds[:, 0], domain.bonds[:, 1]
    both = (a < n) & (b < n)
    rows = np.concatenate([a[a < n], b[b < n], a[both], b[both]])
    cols = np.concatenate([a[a < n], b[b < n], b[both], a[both]])
    data = np.concatenate([weights[a < n], weights[b < n], -weights[both], -weights[both]])
    mat = sp.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()
    mat.sum_duplicates()
    mat.sort_indices()
    return mat


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Values on the domain sites; identically zero everywhere else."""

    domain: LatticeDomain
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.domain.n_sites,):
            raise DomainError(
                f"expected {self.domain.n_sites} values, got shape {values.shape}")
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, domain: LatticeDomain) -> "ScalarField":
        return cls(domain, np.zeros(domain.n_sites))

    @classmethod
    def indicator(cls, domain: LatticeDomain, site: Site, scale: float = 1.0):
        v = np.zeros(domain.n_sites)
        v[domain.index(site)] = scale
        return cls(domain, v)

    def __call__(self, site: Site) -> float:
        i = self.domain.ext_index(site)
        return float(self.values[i]) if 0 <= i < self.domain.n_sites else 0.0

    def extended(self) -> np.ndarray:
        """Values on domain + halo (zero on the halo)."""
        return np.concatenate([self.values, np.zeros(self.domain.n_halo)])

    def __add__(self, other: "ScalarField") -> "ScalarField":
        _check_same(self.domain, other.domain)
        return ScalarField(self.domain, self.values + other.values)

    def __sub__(self, other: "ScalarField") -> "ScalarField":
        _check_same(self.domain, other.domain)
        return ScalarField(self.domain, self.values - other.values)

    def __mul__(self, c: float) -> "ScalarField":
        return ScalarField(self.domain, self.values * c)

    __rmul__ = __mul__

    def __truediv__(self, c: float) -> "ScalarField":
        return ScalarField(self.domain, self.values / c)

    def __neg__(self) -> "ScalarField":
        return ScalarField(self.domain, -self.values)


def _check_same(d1: LatticeDomain, d2: LatticeDomain):
    if d1 is not d2 and (d1.radius != d2.radius):
        raise DomainMismatch(f"fields live on different domains: {d1} vs {d2}")


def gradient(u: ScalarField, m: Site) -> np.ndarray:
    """Crack-adapted discrete gradient ``Du(m)`` as a 4-vector; components for
    erased directions are exactly zero."""
    st = stencil(m)
    um = u(m)
    out = np.zeros(4)
    for rho in st.directions():
        out[rho] = u(neighbour(m, rho)) - um
    return out


def ext_gradients(domain: LatticeDomain, ext_values: np.ndarray) -> np.ndarray:
    """``Du`` at every extended site for values given on domain + halo.

    Sites beyond the halo are taken as zero, which is exact for fields in the
    zero-extended space and irrelevant for bonds touching the domain.
    """
    padded = np.append(np.asarray(ext_values, dtype=float), 0.0)
    diff = padded[domain.neighbours] - padded[:-1, None]
    return np.where(domain.stencil_mask, diff, 0.0)


def h1_norm(u: ScalarField) -> float:
    """``(sum_m |Du(m)|^2)^(1/2)``; each active bond is counted from both ends."""
    w = u.extended()
    a, b = u.domain.bonds[:, 0], u.domain.bonds[:, 1]
    d = w[b] - w[a]
    return math.sqrt(2.0 * float(np.dot(d, d)))


def apply_hessian_ext(domain: LatticeDomain, ext_values: np.ndarray) -> np.ndarray:
    """``Hu`` at domain sites for ``u`` given on domain + halo.

    ``Hu(m) = 2 * sum_{rho in R(m)} (u(m) - u(m + rho))``, the pointwise form of
    ``<Hu, v> = sum_m Du(m) . Dv(m)``.
    """
    w = np.asarray(ext_values, dtype=float)
    a, b = domain.bonds[:, 0], domain.bonds[:, 1]
    flux = 2.0 * (w[a] - w[b])
    out = np.bincount(a, weights=flux, minlength=domain.n_ext)
    out -= np.bincount(b, weights=flux, minlength=domain.n_ext)
    return out[:domain.n_sites]


def hessian_apply(u: ScalarField) -> ScalarField:
    """``Hu`` restricted to the domain (the part seen by test functions in it)."""
    return ScalarField(u.domain, apply_hessian_ext(u.domain, u.extended()))


def pair_product(u: ScalarField, v: ScalarField) -> float:
    """``sum_m Du(m) . Dv(m)``."""
    _check_same(u.domain, v.domain)
    a, b = u.domain.bonds[:, 0], u.domain.bonds[:, 1]
    wu, wv = u.extended(), v.extended()
    return 2.0 * float(np.dot(wu[b] - wu[a], wv[b] - wv[a]))


def iter_sites(domain: LatticeDomain) -> Iterable[Site]:
    for l in domain.sites:
        yield (int(l[0]), int(l[1]))
