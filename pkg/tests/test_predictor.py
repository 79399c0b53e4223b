import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from antiplane import LatticeDomain, g_hat, g_hat_lattice, omega, omega_star, u_hat
from antiplane.analysis import decay_envelope, predictor_field
from antiplane.lattice import position
from antiplane.predictor import BranchCutError, g_hat_sites, omega_complex

coord = st.floats(-50, 50, allow_nan=False).filter(lambda v: abs(v) > 1e-3)
point = st.tuples(coord, coord)


def test_omega_examples():
    np.testing.assert_allclose(omega([1.0, 0.0]), [1.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(omega([0.0, 1.0]), [math.sqrt(2) / 2] * 2, atol=1e-15)
    np.testing.assert_allclose(omega([-1.0, 1e-14]), [0.0, 1.0], atol=1e-7)
    np.testing.assert_allclose(omega([-1.0, -1e-14]), [0.0, -1.0], atol=1e-7)


def test_omega_star_examples():
    np.testing.assert_allclose(omega_star([1.0, 0.0]), [-1.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(omega_star([0.0, 1.0]), [-math.sqrt(2) / 2, math.sqrt(2) / 2],
                               atol=1e-15)


@pytest.mark.parametrize("x", [[-1.0, 0.0], [0.0, 0.0], [-3.5, 0.0]])
def test_branch_cut_rejected(x):
    with pytest.raises(BranchCutError):
        omega(x)


@given(point)
def test_omega_modulus_and_half_plane(x):
    w = omega(x)
    assert w[0] >= 0
    assert w[0] ** 2 + w[1] ** 2 == pytest.approx(math.hypot(*x), rel=1e-13)


@given(point, point)
def test_omega_star_identity(x, s):
    wx, ws = omega(x), omega(s)
    lhs = np.linalg.norm(wx - ws) * np.linalg.norm(wx - omega_star(s))
    rhs = np.linalg.norm(wx - ws) * np.linalg.norm(omega_star(x) - ws)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


def test_distance_factorisation_on_sites():
    dom = LatticeDomain(20)
    rng = np.random.default_rng(2)
    i, j = rng.integers(dom.n_sites, size=(2, 500))
    keep = i != j
    pm, ps = dom.positions[i[keep]], dom.positions[j[keep]]
    wm, ws = omega_complex(pm), omega_complex(ps)
    np.testing.assert_allclose(np.hypot(*(pm - ps).T), np.abs(wm - ws) * np.abs(wm + ws),
                               rtol=1e-12)


def test_omega_injective_on_sites():
    dom = LatticeDomain(24)
    w = omega_complex(dom.positions)
    d = np.abs(w[:, None] - w[None, :])
    np.fill_diagonal(d, np.inf)
    assert d.min() > 1e-12


def test_u_hat_examples():
    assert u_hat([3.0, 2.0], 0.0) == 0.0
    r, eps = 7.3, 0.02
    jump = u_hat([-r, 1e-300], eps) - u_hat([-r, -1e-300], eps)
    assert jump == pytest.approx(2 * eps * math.sqrt(r), rel=1e-12)
    with pytest.raises(ValueError):
        u_hat([1.0, 1.0], -1.0)


def _fd_laplacian(f, x, h=1e-3):
    x = np.asarray(x, dtype=float)
    e1, e2 = np.array([h, 0.0]), np.array([0.0, h])
    return (f(x + e1) + f(x - e1) + f(x + e2) + f(x - e2) - 4 * f(x)) / h ** 2


def test_u_hat_harmonic():
    eps = 0.3
    assert abs(_fd_laplacian(lambda y: u_hat(y, eps), [3.2, 1.7])) <= 1e-6 * eps


def test_u_hat_neumann_on_crack_faces():
    # d/dx2 of omega_2 vanishes on the faces {x1 < 0, x2 = +-0}
    h = 1e-6
    for x1 in (-0.7, -4.0):
        top = (u_hat([x1, 2 * h], 1.0) - u_hat([x1, h], 1.0)) / h
        assert abs(top) < 1e-4


@given(point, point)
def test_g_hat_symmetric_exactly(x, s):
    if x == s:
        return
    assert g_hat(x, s) == g_hat(s, x)


def test_g_hat_rejects_coincident_points():
    with pytest.raises(ValueError):
        g_hat([1.0, 2.0], [1.0, 2.0])


def test_g_hat_harmonic_off_source():
    s = [2.5, 1.5]
    for x in ([9.1, 4.2], [-6.0, 3.3], [-5.0, -7.0]):
        assert abs(_fd_laplacian(lambda y: g_hat(y, s), x)) < 1e-6


def test_g_hat_far_field_asymptotics():
    s = np.array([3.5, 2.5])
    x = 1e6 * np.array([math.cos(0.7), math.sin(0.7)])
    expected = -math.log(math.sqrt(1e6)) / (2 * math.pi)
    assert g_hat(x, s) == pytest.approx(expected, rel=1e-3)


def test_g_hat_lattice():
    assert g_hat_lattice((4, 3), (4, 3)) == 0.0
    m, s = (5, -2), (-3, 7)
    assert g_hat_lattice(m, s) == g_hat_lattice(s, m)
    assert g_hat_lattice(m, s) == float(g_hat(position(m), position(s)))
    a, b = (-5, 1), (-5, 0)
    np.testing.assert_allclose(position(a), [-5.5, 0.5])
    np.testing.assert_allclose(position(b), [-5.5, -0.5])
    sep = abs(omega_complex(position(a)) - omega_complex(position(b)))
    assert sep == pytest.approx(2 * math.sqrt(5.5), rel=1e-2)


def test_g_hat_sites_vectorised():
    ms = [(1, 1), (3, 4), (-2, 0)]
    out = g_hat_sites(ms, (3, 4))
    assert out[1] == 0.0
    assert out[0] == g_hat_lattice((1, 1), (3, 4))


def test_predictor_gradient_decays_like_sqrt():
    dom = LatticeDomain(64)
    rep = decay_envelope(predictor_field(dom, 1.0))
    assert abs(rep.slope + 0.5) <= 0.05
    # the fitted constant is stable across annuli
    sel = (rep.radii >= 5) & (rep.radii <= 32)
    c = rep.envelope[sel] * np.sqrt(rep.radii[sel])
    assert c.max() / c.min() < 1.5
