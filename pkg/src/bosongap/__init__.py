"""Bounds, channels and codes for gapped bosonic error correction under dephasing."""
from .binomial import AchievabilityParams, QuadratureError, epsilon_bin, optimize_epsilon_bin, region_sweep
from .capacity import capacity_sweep, effective_dephasing, hashing_rate, q_from_gamma, p_from_sigma
from .channels import amp_damp_kraus, dephase_apply, dephase_by_quadrature, recovery_kraus
from .codes import (ErrorSet, GapAssumptionError, GappedCode, binomial_codewords, build_A_matrix,
                    kernel_code, kl_check, ladder_error_set, make_gapped_code)
from .fock import FockVector, HermitianOperator, TruncationConfig, trace_norm
from .nogo import epsilon_g_sigma, epsilon_geometric, g_sigma_thres, lattice_sum, sigma_thres, verify_lemma4

__version__ = "0.1.0"

__all__ = [
    "AchievabilityParams",
    "QuadratureError",
    "epsilon_bin",
    "optimize_epsilon_bin",
    "region_sweep",
    "capacity_sweep",
    "effective_dephasing",
    "hashing_rate",
    "q_from_gamma",
    "p_from_sigma",
    "amp_damp_kraus",
    "dephase_apply",
    "dephase_by_quadrature",
    "recovery_kraus",
    "ErrorSet",
    "GapAssumptionError",
    "GappedCode",
    "binomial_codewords",
    "build_A_matrix",
    "kernel_code",
    "kl_check",
    "ladder_error_set",
    "make_gapped_code",
    "FockVector",
    "HermitianOperator",
    "TruncationConfig",
    "trace_norm",
    "epsilon_g_sigma",
    "epsilon_geometric",
    "g_sigma_thres",
    "lattice_sum",
    "sigma_thres",
    "verify_lemma4",
]
