"""End-to-end acceptance suite.

Each test prints one ``PASS``/``FAIL`` line with the measured quantities, so
``pytest -v tests/test_acceptance.py`` doubles as a report.
"""

import numpy as np
import pytest

from antiplane import (EnergyModel, LatticeDomain, ScalarField, energy, hessian_apply,
                       lambda_min, newton)
from antiplane.analysis import (convergence_study, decay_envelope, epsilon_collapse,
                                fit_slope, predictor_field)
from antiplane.checks import fd_errors
from antiplane.green import LatticeGreenFunction, homogeneous_green_difference, sample_ray
from antiplane.lattice import SiteClass, position

SOURCE = (13, 9)  # p(s) = (12.5, 8.5)


@pytest.fixture
def report(capsys):
    def emit(label, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'}  [{label}] {detail}")
        return ok
    return emit


@pytest.fixture(scope="module")
def green48():
    return LatticeGreenFunction(LatticeDomain(48))


def test_1_corrector_decay_rate(report):
    dom = LatticeDomain(64)
    slopes = {}
    for eps in (1e-3, 1e-2, 1e-1):
        rep = newton(EnergyModel(dom, eps))
        slopes[eps] = decay_envelope(rep.final_field, eps=eps).slope
    ok = all(-1.7 <= s <= -1.3 for s in slopes.values())
    detail = ", ".join(f"eps={e:g}: {s:.4f}" for e, s in slopes.items())
    assert report("1 decay slope in [-1.7, -1.3], R=64", ok, detail)


def test_2_supercell_convergence_rate(report):
    rep = convergence_study([16, 32, 64], 0.01, 256)
    decreasing = all(a > b for a, b in zip(rep.errors, rep.errors[1:]))
    ok = -0.65 <= rep.slope <= -0.35 and decreasing
    errs = ", ".join(f"{e:.4e}" for e in rep.errors)
    assert report("2 convergence slope in [-0.65, -0.35], decreasing", ok,
                  f"slope {rep.slope:.4f}, errors [{errs}]")


def test_3_epsilon_linearity(report):
    dom = LatticeDomain(32)
    fields = [(e, newton(EnergyModel(dom, e)).final_field) for e in (1e-3, 1e-2)]
    dev = epsilon_collapse(fields)
    assert report("3 eps-collapse <= 2%, R=32", dev <= 0.02, f"deviation {dev:.3e}")


def test_4_stability(report):
    dom = LatticeDomain(32)
    lam0 = lambda_min(EnergyModel(dom, 0.0), ScalarField.zeros(dom))
    lams = {}
    for eps in (1e-3, 1e-2, 5e-2, 1e-1):
        model = EnergyModel(dom, eps)
        lams[eps] = lambda_min(model, newton(model).final_field)
    ok = lam0 == 1.0 and all(v > 0 for v in lams.values())
    detail = f"lambda(0) = {lam0!r}; " + ", ".join(f"eps={e:g}: {v:.6f}" for e, v in lams.items())
    assert report("4 lambda_min = 1 at eps=0, > 0 for eps <= 0.1, R=32", ok, detail)


def test_5_green_delta_property(report, green48):
    dom = green48.domain
    res = green48.delta_residual(SOURCE)
    far = dom.distance_to_boundary() >= 12
    worst = float(np.max(np.abs(res[far])))
    assert report("5 |HG(.,s) - delta| <= 1e-6, R=48", worst <= 1e-6,
                  f"max residual {worst:.3e} over {int(far.sum())} sites")


def test_6_green_symmetry(report, green48):
    dom = green48.domain
    inner = dom.sites[dom.distance_to_boundary() >= dom.radius / 4]
    rng = np.random.default_rng(2024)
    worst = 0.0
    for i, j in rng.choice(len(inner), size=(100, 2)):
        m, s = tuple(inner[i]), tuple(inner[j])
        a, b = green48(m, s), green48(s, m)
        worst = max(worst, abs(a - b) / max(1.0, abs(a)))
    assert report("6 Green symmetry <= 1e-6 relative, 100 pairs, R=48", worst <= 1e-6,
                  f"max relative asymmetry {worst:.3e}")


def test_7_mixed_difference_decay(report):
    dom = LatticeDomain(64)
    green = LatticeGreenFunction(dom)
    start = (SOURCE[0] + 2, SOURCE[1])
    count = 0
    while np.hypot(*position((start[0] + count, start[1]))) <= 0.75 * dom.radius:
        count += 1
    rows = sample_ray(green, SOURCE, start, (1, 0), count)
    md = np.array([abs(r[3]) for r in rows])
    bound = np.array([r[4] for r in rows])
    dist = np.array([np.hypot(*(position(r[0]) - position(SOURCE))) for r in rows])
    # C is fitted (least squares on log residuals) on the half of the ray
    # nearest the source; the far half must stay below C * bound
    half = len(rows) // 2
    C = float(np.exp(np.mean(np.log(md[:half] / bound[:half]))))
    below = bool(np.all(md[half:] <= C * bound[half:]))
    s_md = fit_slope(dist, md)[0]
    s_b = fit_slope(dist, bound)[0]
    ok = below and s_md <= s_b + 0.2
    assert report("7 |D1D2 G| <= C bound, slope <= bound slope + 0.2, R=64", ok,
                  f"C = {C:.4e}, far half below: {below}, slope {s_md:.3f} vs bound {s_b:.3f}")


def test_8_oracle_suite(report):
    results = []
    worst_g = worst_h = 0.0
    for R in (8, 16):
        for eps in (0.0, 0.05):
            g, h = fd_errors(R, eps)
            worst_g, worst_h = max(worst_g, g), max(worst_h, h)
    results.append(("FD", worst_g < 1e-6 and worst_h < 1e-5,
                    f"grad {worst_g:.1e}, hess {worst_h:.1e}"))

    dom = LatticeDomain(16)
    e0 = [energy(EnergyModel(dom, e), ScalarField.zeros(dom)) for e in (0.0, 0.01, 0.1)]
    results.append(("E(0)=0", all(v == 0.0 for v in e0), f"{e0}"))

    cls = dom.classification
    interior = tuple(dom.sites[np.argmax(cls == SiteClass.INTERIOR)])
    gplus = tuple(dom.sites[np.argmax(cls == SiteClass.GAMMA_PLUS)])
    gminus = tuple(dom.sites[np.argmax(cls == SiteClass.GAMMA_MINUS)])
    vals = [hessian_apply(ScalarField.indicator(dom, m))(m) for m in (interior, gplus, gminus)]
    results.append(("<H delta, delta>", vals == [8.0, 6.0, 6.0], f"{vals}"))

    hom = homogeneous_green_difference((0, 0), (1, 0))
    results.append(("G_hom(0)-G_hom(e1)", abs(hom - 0.125) <= 1e-8, f"{hom!r}"))

    slope = decay_envelope(predictor_field(LatticeDomain(64))).slope
    results.append(("predictor slope", abs(slope + 0.5) <= 0.05, f"{slope:.4f}"))

    ok = all(r[1] for r in results)
    detail = "; ".join(f"{name}: {'ok' if good else 'BAD'} ({d})" for name, good, d in results)
    assert report("8 oracle suite", ok, detail)
