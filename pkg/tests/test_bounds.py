from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from eigenbox import bounds
from eigenbox.assembly import C_P, KAPPA_CR, KAPPA_ECR, assemble
from eigenbox.bounds import GlbParameters
from eigenbox.eigensolve import solve_generalized
from eigenbox.mesh import build_square_mesh, uniform_red_refine
from eigenbox.potentials import harmonic, piecewise_constant, zero


def params(eps=0.0, epsp=0.0, epspp=0.0, delta=0.0, deltap=0.0, hmax=None, alpha_min=1.0):
    if hmax is None:
        hmax = np.sqrt(epspp) / KAPPA_ECR
    return GlbParameters(eps, epsp, epspp, delta, deltap, hmax, alpha_min)


positive = st.floats(1e-3, 1e4)
small = st.floats(0.0, 0.5)


def test_compute_params_uniform_zero_potential():
    m = build_square_mesh(0.5, 1)  # unit right-isosceles triangles, h = sqrt(2)
    p = bounds.compute_params(m, zero())
    assert np.isclose(p.eps, KAPPA_CR**2 * 2) and p.delta == 0 and p.deltap == 0
    assert np.isclose(p.epspp, 0.044402, atol=5e-7)
    assert np.isclose(p.epspp, p.epspp_global)
    assert p.epspp <= p.epsp and p.epspp <= p.eps


def test_compute_params_constant_potential():
    m = uniform_red_refine(build_square_mesh(1.0, 2))
    c = 3.0
    p = bounds.compute_params(m, piecewise_constant(np.full(m.nt, c), offset=0.0))
    assert np.isclose(p.delta, c * KAPPA_CR**2 * m.hmax**2)
    assert np.isclose(p.deltap, c * C_P**2 * m.hmax**2)


def test_compute_params_elementwise_products():
    # large h where V is small and small h where V is large: the max of the product is smaller
    m = build_square_mesh(8.0, 2)
    from eigenbox.mesh import nvb_refine
    m = nvb_refine(m, [0])
    p = bounds.compute_params(m, harmonic())
    h2 = m.diameters**2
    from eigenbox.potentials import elementwise_sup
    sup = elementwise_sup(harmonic(), m)
    assert np.isclose(p.delta, np.max(KAPPA_CR**2 * h2 * sup))
    assert p.delta <= KAPPA_CR**2 * m.hmax**2 * sup.max()


def test_glb_cr_examples():
    assert np.isclose(bounds.glb_cr(10.0, params(eps=0.01)), 10 / 1.1)
    assert bounds.glb_cr(10.0, params()) == 10.0
    p = params(eps=0.01, delta=0.1)
    val = bounds.glb_cr(10.0, p)
    assert np.isclose(val, 10 / 1.4, rtol=1e-14)
    alt = 10.0 / (1 + (np.sqrt(0.01) + np.sqrt(0.1 / 10.0)) ** 2 * 10.0)
    assert abs(val - alt) <= 1e-14 * val


@given(positive, small, small)
def test_glb_cr_two_forms_agree(lam, eps, delta):
    p = params(eps=eps, delta=delta)
    alt = lam / (1 + (np.sqrt(eps) + np.sqrt(delta / lam)) ** 2 * lam)
    assert np.isclose(bounds.glb_cr(lam, p), alt, rtol=1e-12)


def test_glb_mu():
    p = params(eps=0.01, delta=0.2)
    assert np.isclose(bounds.glb_mu(10.0, 10.0, p), bounds.glb_cr(10.0, p), rtol=1e-15)
    q = params(eps=0.01)
    assert np.isclose(bounds.glb_mu(10.0, 1.0, q), bounds.glb_cr(10.0, q))
    assert bounds.glb_mu(12.0, 2.0, p) < bounds.glb_cr(12.0, p)
    with pytest.raises(ValueError):
        bounds.glb_mu(1.0, 2.0, p)


@given(positive, st.floats(0.01, 1.0), small, small)
def test_glb_mu_below_glb_cr(lam, frac, eps, delta):
    p = params(eps=eps, delta=delta)
    assert bounds.glb_mu(lam, frac * lam, p) <= bounds.glb_cr(lam, p) * (1 + 1e-14)


def _grid_oracle(lam, epsp, deltap, n=10**6):
    s = np.linspace(1e-8, 1 - 1e-8, n)
    zeta = 1 + deltap / s - deltap - s
    return np.max(lam / (1 + deltap / s + epsp**2 * lam**2 / (zeta + epsp * lam)))


def test_glb_ecr_general_limits_and_grid():
    assert bounds.glb_ecr_general(10.0, params()) == 10.0
    p0 = params(epsp=0.01)
    assert np.isclose(bounds.glb_ecr_general(10.0, p0), bounds.glb_ecr_pwconst(10.0, p0), rtol=1e-12)
    p = params(epsp=0.01, deltap=0.05)
    val = bounds.glb_ecr_general(10.0, p)
    oracle = _grid_oracle(10.0, 0.01, 0.05)
    assert abs(val - oracle) <= 1e-10 * oracle
    assert val >= oracle * (1 - 1e-12)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 1e3), st.floats(1e-4, 0.2), st.floats(1e-4, 2.0))
def test_glb_ecr_general_matches_grid(lam, epsp, deltap):
    p = params(epsp=epsp, deltap=deltap)
    val = bounds.glb_ecr_general(lam, p)
    oracle = _grid_oracle(lam, epsp, deltap, n=200001)
    assert val >= oracle * (1 - 1e-10)
    assert val <= lam


def test_glb_ecr_small_deltap_approaches_pwconst_limit():
    lam, epsp = 25.0, 0.02
    lim = bounds.glb_ecr_pwconst(lam, params(epsp=epsp))
    deltap = 1e-12
    val = bounds.glb_ecr_general(lam, params(epsp=epsp, deltap=deltap))
    # the optimal s is of order sqrt(deltap), and so is the gap to the limit
    assert val <= lim
    assert lim - val <= 3 * np.sqrt(deltap) * lim


def test_glb_ecr_pwconst_example():
    assert bounds.glb_ecr_pwconst(10.0, params()) == 10.0
    lam, e = Fraction(10), Fraction(1, 100)
    exact = lam / (1 + e**2 * lam**2 / (1 + e * lam))
    assert np.isclose(bounds.glb_ecr_pwconst(10.0, params(epsp=0.01)), float(exact), rtol=1e-15)
    assert np.isclose(float(exact), 9.90990990990991)


def test_glb_rt():
    assert bounds.glb_rt(7.0, params()) == 7.0
    assert np.isclose(bounds.glb_rt(20.0, params(epsp=0.05)), 10.0)
    lam = np.linspace(0.1, 100, 500)
    assert np.all(np.diff(bounds.glb_rt(lam, params(epsp=0.05))) > 0)


def test_glb_mcr_and_cecr():
    assert bounds.glb_mcr(10.0, params(epspp=0.02)) == 10.0
    e1, e2, lam = Fraction(5, 100), Fraction(2, 100), Fraction(10)
    exact = lam / (1 + e1 * e2 * lam**2 / (1 + e2 * lam))
    assert np.isclose(bounds.glb_mcr(10.0, params(epsp=0.05, epspp=0.02)), float(exact), rtol=1e-15)
    assert np.isclose(float(exact), 9.23076923)
    assert bounds.glb_cecr(10.0, params()) == 10.0
    assert np.isclose(bounds.glb_cecr(10.0, params(epspp=0.02)), 10 / 1.2)


def test_mcr_cecr_ordering_flip():
    gap = C_P**2 - KAPPA_ECR**2
    for h in np.linspace(0.05, 3.0, 40):
        for lam in np.geomspace(0.1, 1e3, 40):
            p = params(epsp=C_P**2 * h**2, epspp=KAPPA_ECR**2 * h**2)
            cecr, mcr = bounds.glb_cecr(lam, p), bounds.glb_mcr(lam, p)
            crit = gap - 1.0 / (h**2 * lam)
            if abs(crit) > 1e-9:
                assert (cecr < mcr) == (crit < 0)


def test_glb_scr():
    p = params(epspp=0.01)
    assert bounds.glb_scr(50.0, p) == 50.0
    assert np.isclose(bounds.glb_scr(200.0, p), 1 / p.epspp_global)
    lam = 1 / p.epspp_global
    assert np.isclose(bounds.glb_scr(lam, p), lam)
    assert np.isclose(bounds.glb_scr(lam * (1 + 1e-9), p), lam, rtol=1e-8)


def test_glb_scr_uses_global_hmax():
    # elementwise eps'' smaller than the global one must not change the bound
    p = GlbParameters(0, 0, epspp=1e-6, delta=0, deltap=0, hmax=1.0)
    assert np.isclose(bounds.glb_scr(200.0, p), 1 / KAPPA_ECR**2)


def test_glb_scr_diffusion():
    p = params(epspp=0.01)
    assert bounds.glb_scr_diffusion(300.0, p) == bounds.glb_scr(300.0, p)
    q = params(epspp=0.01, alpha_min=4.0)
    lam = 2 / q.epspp_global
    assert np.isclose(bounds.glb_scr_diffusion(lam, q), lam)


def test_scr_constant_diffusion_scales_spectrum():
    m = uniform_red_refine(build_square_mesh(0.5, 2, center=(0.5, 0.5)))
    lam1 = solve_generalized(assemble("sCR", m, zero()), 3).eigenvalues
    lamc = solve_generalized(assemble("sCR", m, zero(), alpha=3.0), 3).eigenvalues
    assert np.allclose(lamc, 3.0 * lam1, rtol=1e-10)


def test_scr_diffusion_two_regions_below_conforming():
    m = uniform_red_refine(uniform_red_refine(build_square_mesh(0.5, 4, center=(0.5, 0.5))))
    alpha = np.where(m.centroids[:, 0] < 0.5, 1.0, 5.0)
    fine = uniform_red_refine(m)
    alpha_f = np.where(fine.centroids[:, 0] < 0.5, 1.0, 5.0)
    upper = solve_generalized(assemble("S1", fine, zero(), alpha=alpha_f), 1).eigenvalues[0]
    lam = solve_generalized(assemble("sCR", m, zero(), alpha=alpha), 1).eigenvalues[0]
    p = bounds.compute_params(m, zero(), alpha_min=alpha.min())
    glb = bounds.glb_scr_diffusion(lam, p)
    assert glb <= lam < upper
    with pytest.raises(ValueError):
        assemble("sCR", m, zero(), alpha=-alpha)


@given(positive, small, small, small, small)
def test_all_bounds_below_discrete_eigenvalue(lam, a, b, c, d):
    epspp = min(a, b)
    p = params(eps=a, epsp=b, epspp=epspp, delta=c, deltap=d)
    for f in (bounds.glb_cr, bounds.glb_ecr_pwconst, bounds.glb_rt, bounds.glb_mcr,
              bounds.glb_cecr, bounds.glb_scr, bounds.glb_ecr_general):
        assert f(lam, p) <= lam * (1 + 1e-15)
        assert f(lam, p) > 0
