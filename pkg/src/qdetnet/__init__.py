"""Discrete-outcome detection networks: probes, measurements, verification.

A network of N qubit detectors is prepared in a joint probe state; at most
one detector picks up a phase kick from the environment.  This package
builds the optimal or near-optimal probes and measurements for deciding
which detector fired (or whether any did), evaluates every probability both
in closed form and by explicit Born-rule computation, and cross-validates
the two against brute-force full-space oracles.
"""

from .linalg import (Ket, DenseOperator, EigenDecomposition, kron,
                     apply_site_unitary, hermitian_eig, trace_norm,
                     inv_sqrt_on_support, gram)
from .network import (PhaseChannel, ProbeSpec, HypothesisEnsemble,
                      TriangleCoefficients, build_probe, hypothesis_states,
                      symmetric_overlap_closed, separable_overlap_closed,
                      minimize_two_detector_overlap, one_or_none_overlaps,
                      equivalent_phase)
from .strategies import (Povm, DiscriminationReport, ReportParams, PgmScalars,
                         min_error_two_detector, unambiguous_two_detector,
                         one_or_none, small_theta_sensitivity,
                         pgm_symmetric_scalars, pgm_symmetric,
                         unambiguous_symmetric, pgm_with_null, pgm_numeric,
                         pgm_success_from_gram, null_added_success_closed,
                         equal_overlap_success, asymptotic_success,
                         guessing_baseline)
from .verify import (VerificationRecord, VerificationGrid, GRID_PRESETS,
                     validate_povm, numeric_probabilities,
                     resolve_separable_success_reading,
                     verify_null_state_relation, probe_search,
                     run_verification_suite)

__version__ = "0.1.0"

__all__ = [
    "Ket", "DenseOperator", "EigenDecomposition", "kron", "apply_site_unitary",
    "hermitian_eig", "trace_norm", "inv_sqrt_on_support", "gram",
    "PhaseChannel", "ProbeSpec", "HypothesisEnsemble", "TriangleCoefficients",
    "build_probe", "hypothesis_states", "symmetric_overlap_closed",
    "separable_overlap_closed", "minimize_two_detector_overlap",
    "one_or_none_overlaps", "equivalent_phase",
    "Povm", "DiscriminationReport", "ReportParams", "PgmScalars",
    "min_error_two_detector", "unambiguous_two_detector", "one_or_none",
    "small_theta_sensitivity", "pgm_symmetric_scalars", "pgm_symmetric",
    "unambiguous_symmetric", "pgm_with_null", "pgm_numeric",
    "pgm_success_from_gram", "null_added_success_closed",
    "equal_overlap_success", "asymptotic_success", "guessing_baseline",
    "VerificationRecord", "VerificationGrid", "GRID_PRESETS", "validate_povm",
    "numeric_probabilities", "resolve_separable_success_reading",
    "verify_null_state_relation", "probe_search", "run_verification_suite",
]
