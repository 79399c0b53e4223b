"""Continuum far-field maps: the complex square root, the crack predictor and
the continuum Green's function of the slit plane."""

from __future__ import annotations

import math

import numpy as np

from .lattice import position

#: constant in front of the continuum Laplacian for the square lattice, where
#: ``H`` behaves like ``-2 * Laplacian``
C_LAMBDA = 2.0


class BranchCutError(ValueError):
    """Point lies on the crack cut ``{x1 <= 0, x2 = 0}``."""


def _as_points(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 2:
        raise ValueError(f"expected points with last axis of length 2, got shape {x.shape}")
    on_cut = (x[..., 1] == 0.0) & (x[..., 0] <= 0.0)
    if np.any(on_cut):
        bad = x[on_cut][0] if x.ndim > 1 else x
        raise BranchCutError(f"point {tuple(bad)} lies on the crack cut")
    return x


def omega_complex(x) -> np.ndarray:
    """``omega`` as a complex number; the principal square root of
    ``x1 + i x2`` with the angle taken in ``(-pi, pi]``."""
    x = _as_points(x)
    return np.sqrt(x[..., 0] + 1j * x[..., 1])


def omega(x) -> np.ndarray:
    """Complex square root map ``(sqrt(r) cos(theta/2), sqrt(r) sin(theta/2))``."""
    w = omega_complex(x)
    return np.stack([w.real, w.imag], axis=-1)


def omega_star(x) -> np.ndarray:
    """Reflection of ``omega(x)`` through the vertical axis."""
    w = omega(x)
    return np.stack([-w[..., 0], w[..., 1]], axis=-1)


def u_hat(x, eps: float) -> np.ndarray:
    """Crack predictor ``eps * omega_2(x)``."""
    if eps < 0:
        raise ValueError("loading parameter must be nonnegative")
    return eps * omega_complex(x).imag


def _g_hat_from_omega(wx, ws) -> np.ndarray:
    # |w_x - w_s| * |w_x - w*_s| with w*_s = -conj(w_s); written so that
    # swapping the arguments reproduces the value bit for bit
    a = np.abs(wx - ws)
    b = np.abs(wx + np.conj(ws))
    return -(np.log(a) + np.log(b)) / (2.0 * math.pi * C_LAMBDA)


def g_hat(x, s) -> np.ndarray:
    """Continuum Green's function of ``-2 Laplacian`` on the slit plane with
    zero Neumann data on the crack faces."""
    x = np.asarray(x, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(np.all(np.broadcast_to(x == s, np.broadcast_shapes(x.shape, s.shape)), axis=-1)):
        raise ValueError("g_hat is singular at x = s")
    return _g_hat_from_omega(omega_complex(x), omega_complex(s))


def g_hat_sites(ms, s) -> np.ndarray:
    """Lattice predictor ``G_hat(m, s)`` for an array of sites ``ms`` and one
    source ``s``; exactly zero on the diagonal."""
    ms = np.asarray(ms, dtype=np.int64).reshape(-1, 2)
    s = np.asarray(s, dtype=np.int64)
    same = np.all(ms == s, axis=1)
    wm = omega_complex(position(ms))
    ws = omega_complex(position(s))
    with np.errstate(divide="ignore"):
        out = _g_hat_from_omega(wm, ws)
    out[same] = 0.0
    return out


def g_hat_lattice(m, s) -> float:
    """``G_hat(p(m), p(s))`` for ``m != s`` and ``0`` on the diagonal."""
    return float(g_hat_sites([m], s)[0])
