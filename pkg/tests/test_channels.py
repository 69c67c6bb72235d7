import math

import numpy as np
import pytest

from bosongap.channels import (
    amp_damp_kraus,
    apply_kraus,
    dephase_apply,
    dephase_by_quadrature,
    dephasing_mask,
    mix_apply,
    qubit_dephasing_apply,
    recovery_kraus,
)
from bosongap.fock import HermitianOperator, TruncationConfig, basis_state

from conftest import random_hermitian


def proj(k, trunc):
    v = basis_state(k, trunc).amplitudes
    return HermitianOperator(np.outer(v, v.conj()), trunc)


def test_dephasing_examples(rng):
    t = TruncationConfig(4)
    diag = HermitianOperator(np.diag(rng.random(5)), t)
    assert np.array_equal(dephase_apply(diag, 0.7).entries, diag.entries)
    m = np.zeros((5, 5))
    m[0, 1] = m[1, 0] = 1
    out = dephase_apply(HermitianOperator(m, t), 1.0).entries
    assert out[0, 1] == pytest.approx(math.exp(-0.5))
    rho = HermitianOperator(random_hermitian(rng, 5), t)
    assert np.array_equal(dephase_apply(rho, 0.0).entries, rho.entries)
    with pytest.raises(ValueError):
        dephase_apply(rho, -1.0)


def test_mask_is_per_mode_product():
    t2 = TruncationConfig(3, modes=2)
    t1 = TruncationConfig(3)
    m1 = dephasing_mask(t1, 0.4)
    assert np.allclose(dephasing_mask(t2, 0.4), np.kron(m1, m1), atol=1e-15)


def test_quadrature_examples(rng):
    t = TruncationConfig(4)
    diag = HermitianOperator(np.diag(rng.random(5)), t)
    assert np.allclose(dephase_by_quadrature(diag, 0.5).entries, diag.entries, atol=1e-12)
    m = np.zeros((5, 5))
    m[0, 1] = m[1, 0] = 1
    out = dephase_by_quadrature(HermitianOperator(m, t), 1.0, quad_nodes=64).entries
    assert abs(out[0, 1] - math.exp(-0.5)) < 1e-8
    rho = HermitianOperator(random_hermitian(rng, 5), t)
    assert np.allclose(dephase_by_quadrature(rho, 0.0).entries, rho.entries, atol=1e-14)


@pytest.mark.parametrize("sigma", [0.05, 0.3, 1.0, 3.0])
def test_quadrature_matches_mask_two_modes(rng, sigma):
    t = TruncationConfig(6, modes=2)
    rho = HermitianOperator(random_hermitian(rng, t.dim), t)
    a = dephase_apply(rho, sigma).entries
    b = dephase_by_quadrature(rho, sigma).entries
    assert np.abs(a - b).max() < 1e-8


def test_amp_damp_examples():
    t = TruncationConfig(5)
    ch = amp_damp_kraus(0.0, t)
    assert len(ch) == 1 and np.array_equal(ch.kraus[0], np.eye(6))
    out = apply_kraus(amp_damp_kraus(1.0, t), proj(3, t)).entries
    assert np.allclose(out, proj(0, t).entries)
    A1 = amp_damp_kraus(0.2, t).kraus[1]
    assert A1[0, 1] == pytest.approx(math.sqrt(0.2))
    out = apply_kraus(amp_damp_kraus(0.5, t), proj(1, t)).entries
    assert np.allclose(out, 0.5 * proj(0, t).entries + 0.5 * proj(1, t).entries)
    with pytest.raises(ValueError):
        amp_damp_kraus(1.5, t)
    with pytest.raises(ValueError, match="per mode"):
        amp_damp_kraus(0.1, TruncationConfig(2, modes=2))


def test_amp_damp_photon_statistics():
    # oracle: loss of m photons at rate gamma is Binomial(m, gamma)
    from scipy.stats import binom

    t = TruncationConfig(8)
    out = apply_kraus(amp_damp_kraus(0.3, t), proj(8, t)).entries
    assert np.allclose(np.diag(out).real[::-1], binom.pmf(np.arange(9), 8, 0.3), atol=1e-14)


def test_apply_kraus_identity(rng):
    t = TruncationConfig(4)
    rho = HermitianOperator(random_hermitian(rng, 5), t)
    assert np.allclose(apply_kraus(amp_damp_kraus(0.0, t), rho).entries, rho.entries)


def test_mix_apply(rng):
    t = TruncationConfig(4)
    rho = HermitianOperator(random_hermitian(rng, 5), t)
    assert np.allclose(mix_apply(rho, 1.0, 0.5, 0.3).entries, dephase_apply(rho, 0.5).entries)
    damp = apply_kraus(amp_damp_kraus(0.3, t), rho).entries
    assert np.allclose(mix_apply(rho, 0.0, 0.5, 0.3).entries, damp)
    diag = HermitianOperator(np.diag(rng.random(5)), t)
    assert np.allclose(mix_apply(diag, 0.5, 0.8, 0.0).entries, diag.entries)


def test_recovery_examples():
    t = TruncationConfig(6)
    R = recovery_kraus(1, t)
    assert len(R) == 1
    assert np.array_equal(R.kraus[0], np.diag([0, 1, 1, 1, 1, 1, 1]))
    R1 = recovery_kraus(2, t).kraus[1]
    assert np.array_equal(R1 @ basis_state(3, t).amplitudes, basis_state(4, t).amplitudes)
    assert len(recovery_kraus(3, t)) == 3
    with pytest.raises(ValueError, match="too small"):
        recovery_kraus(4, t)


def test_recovery_boundary_not_complete():
    # |n_max> is not of the form kg - j with kg <= n_max when g does not divide n_max + 1
    t = TruncationConfig(7)
    R = recovery_kraus(3, t)
    assert R.completeness_defect() < 1e-15
    assert R.completeness_defect(span=range(8)) == pytest.approx(1.0)


def test_qubit_dephasing():
    rho = np.array([[0.5, 1.0], [1.0, 0.5]])
    assert np.array_equal(qubit_dephasing_apply(rho, 0.0), rho)
    assert np.allclose(qubit_dephasing_apply(rho, 0.5), np.diag([0.5, 0.5]))
    assert qubit_dephasing_apply(rho, 0.1)[0, 1] == pytest.approx(0.8)
