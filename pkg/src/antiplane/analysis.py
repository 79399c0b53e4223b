"""Corrector decay rates, eps-linearity and supercell convergence studies."""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .lattice import DomainMismatch, LatticeDomain, ScalarField, ext_gradients, h1_norm
from .model import EnergyModel
from .solver import newton


class EmptyAnnulus(ValueError):
    """An annulus inside the fit window contains no lattice sites."""


def fit_slope(x, y) -> Tuple[float, float]:
    """Least-squares line through ``(log x, log y)``; returns (slope, intercept)."""
    lx, ly = np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float))
    slope, intercept = np.polyfit(lx, ly, 1)
    return float(slope), float(intercept)


@dataclass
class DecayReport:
    radii: np.ndarray
    envelope: np.ndarray
    slope: float
    intercept: float
    fit_window: Tuple[float, float]
    eps: Optional[float] = None

    def rows(self):
        return list(zip(self.radii.tolist(), self.envelope.tolist()))


def annulus_envelope(r, values, width: float = 1.0,
                     r_max: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Maximum of ``values`` over annuli ``[k w, (k+1) w)``; returns
    (annulus midpoints, maxima) for the nonempty annuli below ``r_max``."""
    r = np.asarray(r, dtype=float)
    values = np.asarray(values, dtype=float)
    if not width > 0:
        raise ValueError("annulus width must be positive")
    if r_max is not None:
        keep = r < r_max
        r, values = r[keep], values[keep]
    k = np.floor(r / width).astype(np.int64)
    nbins = int(k.max()) + 1 if len(k) else 0
    env = np.full(nbins, -np.inf)
    np.maximum.at(env, k, values)
    filled = np.isfinite(env)
    mids = (np.arange(nbins) + 0.5) * width
    return mids[filled], env[filled]


def envelope_report(r, values, width: float = 1.0,
                    fit_window: Tuple[float, float] = (5.0, np.inf),
                    eps: Optional[float] = None) -> DecayReport:
    lo, hi = fit_window
    if lo < 3:
        raise ValueError("fit window must start at r >= 3")
    mids, env = annulus_envelope(r, values, width)
    # every annulus whose midpoint falls inside the window must be populated
    k_lo = int(np.ceil(lo / width - 0.5))
    k_hi = int(np.floor(hi / width - 0.5)) if np.isfinite(hi) else int(mids[-1] / width)
    expected = (np.arange(k_lo, k_hi + 1) + 0.5) * width
    present = np.isin(np.round(expected / width, 6), np.round(mids / width, 6))
    if not np.all(present):
        missing = expected[~present][0]
        raise EmptyAnnulus(f"no sites in the annulus at r = {missing:g} (width {width:g})")
    sel = (mids >= lo) & (mids <= hi) & (env > 0)
    if sel.sum() < 2:
        raise EmptyAnnulus("fewer than two populated annuli in the fit window")
    slope, intercept = fit_slope(mids[sel], env[sel])
    return DecayReport(mids, env, slope, intercept, (lo, hi), eps)


def gradient_magnitudes(field: ScalarField) -> Tuple[np.ndarray, np.ndarray]:
    """(|p(l)|, |Du(l)|) at every domain site."""
    dom = field.domain
    g = ext_gradients(dom, field.extended())[:dom.n_sites]
    r = np.hypot(dom.positions[:, 0], dom.positions[:, 1])
    return r, np.sqrt(np.sum(g * g, axis=1))


def decay_envelope(field: ScalarField, annulus_width: float = 1.0,
                   fit_window: Optional[Tuple[float, float]] = None,
                   eps: Optional[float] = None) -> DecayReport:
    """Per-annulus maximum of ``|Du|`` and its log-log slope.

    The default fit window ``[5, R/2]`` skips the core and the region polluted
    by the artificial boundary.
    """
    if fit_window is None:
        fit_window = (5.0, field.domain.radius / 2)
    r, g = gradient_magnitudes(field)
    keep = r <= fit_window[1] + annulus_width
    return envelope_report(r[keep], g[keep], annulus_width, fit_window, eps)


def predictor_field(domain: LatticeDomain, eps: float = 1.0) -> ScalarField:
    """The crack predictor sampled on the domain (zero outside)."""
    return ScalarField(domain, EnergyModel(domain, eps).u_hat[:domain.n_sites])


def epsilon_collapse(fields: Sequence[Tuple[float, ScalarField]]) -> float:
    """Largest relative H^1 distance between the rescaled fields ``u(eps)/eps``."""
    fields = list(fields)
    if not fields:
        raise ValueError("need at least one field")
    dom = fields[0][1].domain
    for _, f in fields:
        if f.domain is not dom and f.domain.radius != dom.radius:
            raise DomainMismatch("all fields must live on the same domain")
    worst = 0.0
    for (e1, f1), (e2, f2) in itertools.permutations(fields, 2):
        a, b = f1 / e1, f2 / e2
        worst = max(worst, h1_norm(a - b) / h1_norm(a))
    return worst


def extend_by_zero(field: ScalarField, target: LatticeDomain) -> ScalarField:
    """Embed ``field`` into the larger domain ``target``."""
    idx = target.lookup_array(field.domain.sites)
    if np.any((idx < 0) | (idx >= target.n_sites)):
        raise DomainMismatch("target domain does not contain the field's domain")
    v = np.zeros(target.n_sites)
    v[idx] = field.values
    return ScalarField(target, v)


@dataclass
class ConvergenceReport:
    radii: List[float]
    errors: List[float]
    ref_radius: float
    slope: float
    eps: float
    iterations: List[int] = field(default_factory=list)
    note: str = ("reference is the finite solution at ref_radius; its own "
                 "truncation error is a lower-order bias")

    def rows(self):
        return list(zip(self.radii, self.errors))


def _solve(radius: float, eps: float, tol: float, linear_solver: str):
    rep = newton(EnergyModel(LatticeDomain(radius), eps), tol=tol,
                 linear_solver=linear_solver)
    return rep.final_field.values, rep.iterations


def convergence_study(radii: Sequence[float], eps: float, ref_radius: float,
                      tol: float = 1e-8, linear_solver: str = "cg",
                      workers: int = 1) -> ConvergenceReport:
    """H^1 error of supercell solutions against a large-radius reference."""
    radii = [float(r) for r in radii]
    if list(radii) != sorted(radii):
        raise ValueError("radii must be sorted")
    if ref_radius < 4 * max(radii):
        raise ValueError("ref_radius must be at least 4 * max(radii)")
    jobs = [float(ref_radius)] + sorted(set(radii))
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            out = list(pool.map(_solve, jobs, [eps] * len(jobs), [tol] * len(jobs),
                                [linear_solver] * len(jobs)))
    else:
        out = [_solve(r, eps, tol, linear_solver) for r in jobs]
    results = dict(zip(jobs, out))
    ref_dom = LatticeDomain(ref_radius)
    ref = ScalarField(ref_dom, results[float(ref_radius)][0])
    errors, iters = [], []
    for R in radii:
        vals, it = results[R]
        uR = extend_by_zero(ScalarField(LatticeDomain(R), vals), ref_dom)
        errors.append(h1_norm(uR - ref))
        iters.append(it)
    slope = fit_slope(radii, errors)[0] if len(set(radii)) > 1 else float("nan")
    return ConvergenceReport(radii, errors, float(ref_radius), slope, eps, iters)
