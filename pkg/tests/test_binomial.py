import math

import mpmath as mp
import numpy as np
import pytest
from scipy.special import erfc, gammainc, gammaln

from bosongap.binomial import (
    AchievabilityParams,
    QuadratureError,
    default_phi_grid,
    epsilon_bin,
    epsilon_bin_theta,
    gaussian_tail,
    optimize_epsilon_bin,
    region_sweep,
)
from bosongap.nogo import epsilon_g_sigma

mp.mp.dps = 40


def theta_oracle(theta, D, g):
    # term by term in extended precision
    tot = mp.mpf(0)
    for j in range(2 * D + 2):
        tot += mp.sqrt(mp.binomial(2 * D + 1, j)) * (mp.mpf(theta) * g * j) ** (D + 1) / mp.factorial(D + 1)
    return tot / mp.mpf(2) ** D


def closed_form(sigma, g, D, phi):
    """Same bound via Gaussian moments: int_{-phi}^{phi} p |t|^m = (2 s^2)^{m/2} G((m+1)/2)/sqrt(pi) P((m+1)/2, phi^2/2s^2)."""
    K = epsilon_bin_theta(1.0, D, g)
    x = phi**2 / (2 * sigma**2)

    def moment(m):
        a = 0.5 * (m + 1)
        return math.exp(0.5 * m * math.log(2 * sigma**2) + gammaln(a) - 0.5 * math.log(math.pi)) * gammainc(a, x)

    return 0.5 * (K * moment(D + 1) + 2 * K * K * moment(2 * D + 2)) + erfc(phi / (sigma * math.sqrt(2)))


def test_theta_bound_examples():
    assert epsilon_bin_theta(0.0, 3, 5) == 0.0
    assert epsilon_bin_theta(-0.03, 4, 9) == epsilon_bin_theta(0.03, 4, 9)
    assert epsilon_bin_theta(0.05, 2, 9) == pytest.approx(float(theta_oracle(0.05, 2, 9)), rel=1e-13)


@pytest.mark.parametrize("D,g", [(2, 9), (10, 3), (40, 9), (50, 1)])
def test_theta_bound_matches_oracle(D, g):
    for th in (1e-4, 0.01, 0.2):
        assert epsilon_bin_theta(th, D, g) == pytest.approx(float(theta_oracle(th, D, g)), rel=1e-11)


def test_stirling_variant_is_larger():
    # (e x/n)^n / sqrt(2 pi n) >= x^n / n! by Stirling's lower bound on n!
    for D in (2, 5, 20):
        assert epsilon_bin_theta(0.01, D, 9, stirling=True) >= epsilon_bin_theta(0.01, D, 9)
        assert epsilon_bin_theta(0.01, D, 9, stirling=True) == pytest.approx(
            epsilon_bin_theta(0.01, D, 9), rel=0.1 / (D + 1))


def test_gaussian_tail_examples():
    assert gaussian_tail(1.0, 1.0) == pytest.approx(float(mp.erfc(1 / mp.sqrt(2))), rel=1e-14)
    assert abs(gaussian_tail(1.0, 1.0) - 0.317311) < 1e-6
    assert gaussian_tail(50.0, 1.0) == 0.0
    assert gaussian_tail(0.3, 0.2) > gaussian_tail(0.3, 0.1)
    # at phi = sigma / 2 the tail is erfc(1 / (2 sqrt 2)) = 0.617..., below 1
    assert gaussian_tail(0.5, 1.0) == pytest.approx(float(mp.erfc(1 / (2 * mp.sqrt(2)))), rel=1e-14)
    with pytest.raises(ValueError):
        gaussian_tail(0.0, 1.0)


@pytest.mark.parametrize("sigma,g,D", [(0.01, 9, 17), (0.02, 9, 9), (0.05, 3, 4), (0.003, 9, 50), (0.3, 2, 2)])
def test_epsilon_bin_matches_gamma_closed_form(sigma, g, D):
    for phi in default_phi_grid(sigma, 7):
        assert epsilon_bin(sigma, g, D, phi) == pytest.approx(closed_form(sigma, g, D, phi), rel=1e-9, abs=1e-300)


def test_epsilon_bin_limits():
    assert epsilon_bin(1e-6, 9, 2, 1e-5) < 1e-6
    s = 0.02
    for phi in default_phi_grid(s, 9):
        v = epsilon_bin(s, 9, 5, phi)
        assert v >= gaussian_tail(phi, s)
        assert epsilon_bin(2 * s, 9, 5, phi) > v


def test_epsilon_bin_interior_minimum_in_phi():
    s = 0.01
    phis = default_phi_grid(s, 60)
    vals = [epsilon_bin(s, 9, 17, p) for p in phis]
    i = int(np.argmin(vals))
    assert 0 < i < len(phis) - 1


def test_quadrature_error_raised():
    with pytest.raises(QuadratureError):
        epsilon_bin(0.05, 9, 40, 0.5, quad_nodes=2)


def test_params_validation():
    with pytest.raises(ValueError):
        AchievabilityParams(D_min=1)
    with pytest.raises(ValueError):
        AchievabilityParams(D_min=5, D_max=4)


def test_phi_grid_refines():
    coarse, fine = default_phi_grid(0.1, 20), default_phi_grid(0.1, 20, refine=2)
    assert np.allclose(fine[1::2], coarse)
    assert coarse[0] > 0.05 and coarse[-1] < 1.5


@pytest.mark.parametrize("sigma", [1e-4, 0.01, 0.05])
def test_optimum_matches_brute_force(sigma):
    params = AchievabilityParams(D_max=30, phi_points=25)
    opt = optimize_epsilon_bin(sigma, 9, params)
    phis = default_phi_grid(sigma, 25)
    grid = np.array([[closed_form(sigma, 9, D, p) for p in phis] for D in params.D_range])
    a, b = np.unravel_index(np.argmin(grid), grid.shape)
    assert opt.eps == pytest.approx(grid[a, b], rel=1e-8)
    assert opt.eps <= opt.grid.min() * (1 + 1e-15)
    # several (D, phi) can tie to rounding; compare values, not just indices
    assert closed_form(sigma, 9, opt.D_opt, opt.phi_opt) == pytest.approx(grid[a, b], rel=1e-7)


def test_tiny_sigma_prefers_larger_D():
    # at sigma = 1e-4 every D gives a tiny bound and the largest powers win
    opt = optimize_epsilon_bin(1e-4, 9)
    assert opt.D_opt > 2 and opt.eps < 1e-30


def test_region_sweep():
    sig = np.geomspace(1e-3, 0.3, 12)
    rows = region_sweep(9, sig)
    assert len(rows) == len(sig)
    eps = np.array([r["eps_bin_raw"] for r in rows])
    assert np.all(np.isfinite(eps)) and np.all(eps > 0)
    assert np.all(np.diff(eps) >= 0)
    for r in rows:
        assert r["eps_nogo"] == pytest.approx(epsilon_g_sigma(9, r["sigma"]).value, abs=1e-12)
        assert r["eps_bin_clipped"] == min(r["eps_bin_raw"], 1.0)
        # achievable error can never beat the no-go bound
        assert r["eps_bin_raw"] >= r["eps_nogo"]


def test_region_sweep_parallel_matches_serial():
    sig = [0.005, 0.02, 0.1]
    assert region_sweep(9, sig, jobs=2) == region_sweep(9, sig, jobs=1)
