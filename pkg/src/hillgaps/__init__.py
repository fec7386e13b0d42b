"""Spectral gaps of Hill operators ``-y'' + q y`` with 1-periodic real ``q``.

A Fourier-Galerkin eigensolver supplies reference eigenvalue pairs; the
asymptotic estimators reproduce them from Fourier coefficients alone.
"""
from .asymptotics import (AsymptoticEstimate, SeriesParams, a1_closed, a_partial, a_term,
                          b_partial, b_term, condition_check, e_recursion, eig_first_order,
                          eig_second_order, eigenfunction_model, gap_first_order, gap_order_m,
                          gap_second_order)
from .errors import (ConvergenceError, GuardError, HillGapsError, InsufficientResolution,
                     NumericalFailure, PairingError, PhaseUndefined)
from .experiment import (DecayFit, ExperimentConfig, GapReportRow, emit_report, fit_decay_rate,
                         load_report, run_gap_experiment)
from .galerkin import (ANTIPERIODIC, PERIODIC, GalerkinConfig, SpectralPair, SpectralPairTable,
                       antiperiodic_pairs, band_structure, build_operator_matrix, convergence_check,
                       eigenvector_overlap, gap_table, hermitian_eigen, periodic_pairs)
from .kronig_penney import (KPParams, kp_derived, kp_gap_leading, kp_make, kp_potential, kp_qk,
                            kp_rate_classify)
from .potential import (DerivedCoeffTable, FourierTable, PiecewiseConstant, Sampled, TrigPoly,
                        antiderivative, derived_coeffs, evaluate, fourier_coeff, fourier_coeffs,
                        fourier_table, normalize_mean_zero)

__version__ = "0.1.0"
