"""The verification layer itself: records, fault injection, probe search."""

import math

import numpy as np
import pytest

from qdetnet.linalg import DenseOperator, Ket
from qdetnet.network import PhaseChannel, ProbeSpec, build_probe, hypothesis_states
from qdetnet.strategies import (Povm, min_error_two_detector,
                                unambiguous_two_detector, pgm_symmetric)
from qdetnet.verify import (VerificationRecord, VerificationGrid, GRID_PRESETS,
                            validate_povm, numeric_probabilities,
                            resolve_separable_success_reading,
                            verify_null_state_relation, probe_search,
                            run_verification_suite, _pgm_success_full)


class TestValidatePovm:
    def test_projector_pair_passes(self):
        _, povm = min_error_two_detector(0.3)
        records = validate_povm(povm, 4)
        assert len(records) == len(povm.elements) + 1
        assert all(r.passed for r in records)

    def test_unambiguous_failure_element_positive(self):
        _, povm = unambiguous_two_detector(math.pi / 8)
        records = validate_povm(povm, 4)
        assert all(r.passed for r in records)
        failure_rec = records[2]
        assert failure_rec.observed >= -1e-10

    def test_scaled_element_fails_completeness(self):
        _, povm = min_error_two_detector(0.3)
        scaled = Povm(elements=(
            DenseOperator(1.01 * povm.elements[0].mat, hermitian=True, positive=True),
        ) + povm.elements[1:])
        records = validate_povm(scaled, 4)
        completeness = [r for r in records if r.check_name == "povm_completeness"]
        assert len(completeness) == 1 and not completeness[0].passed

    def test_failures_are_records_not_errors(self):
        bad = Povm(elements=(DenseOperator(0.5 * np.eye(2), hermitian=True, positive=True),))
        records = validate_povm(bad, 2)
        assert any(not r.passed for r in records)


class TestNumericProbabilities:
    def test_identity_maps_to_prior(self):
        probe = build_probe(ProbeSpec.separable(2))
        ens = hypothesis_states(probe, PhaseChannel(0.3))
        povm = Povm(elements=(DenseOperator.identity(4),))
        success, failure, error = numeric_probabilities(ens, povm, (1,))
        assert success == pytest.approx(0.5, abs=1e-12)
        assert failure == pytest.approx(0.0, abs=1e-12)
        assert error == pytest.approx(0.5, abs=1e-12)

    def test_orthogonal_case_perfect(self):
        theta = math.pi / 4
        _, povm = min_error_two_detector(theta)
        ens = hypothesis_states(build_probe(ProbeSpec.two_detector_optimal()),
                                PhaseChannel(theta))
        success, failure, error = numeric_probabilities(ens, povm, (0, 1, None))
        assert success == pytest.approx(1.0, abs=1e-12)
        assert error == pytest.approx(0.0, abs=1e-12)

    def test_sums_to_one(self):
        theta = 0.3
        _, povm = pgm_symmetric(6, theta)
        probe = build_probe(ProbeSpec.symmetric(6, 3))
        ens = hypothesis_states(probe, PhaseChannel(theta))
        success, failure, error = numeric_probabilities(
            ens, povm, tuple(range(6)) + (None,))
        assert success + failure + error == pytest.approx(1.0, abs=1e-10)

    def test_pgm_oracle_matches_closed_form_n6(self):
        theta = 0.3
        report, povm = pgm_symmetric(6, theta)
        ens = hypothesis_states(build_probe(ProbeSpec.symmetric(6, 3)),
                                PhaseChannel(theta))
        success, _, _ = numeric_probabilities(ens, povm, tuple(range(6)) + (None,))
        assert success == pytest.approx(report.closed_form_success, abs=1e-9)

    def test_map_length_mismatch(self):
        _, povm = min_error_two_detector(0.3)
        ens = hypothesis_states(build_probe(ProbeSpec.two_detector_optimal()),
                                PhaseChannel(0.3))
        with pytest.raises(ValueError):
            numeric_probabilities(ens, povm, (0, 1))

    def test_basis_independence(self):
        theta = 0.5
        _, povm = min_error_two_detector(theta)
        ens = hypothesis_states(build_probe(ProbeSpec.two_detector_optimal()),
                                PhaseChannel(theta))
        base = numeric_probabilities(ens, povm, (0, 1, None))
        rng = np.random.default_rng(4)
        a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        q, r = np.linalg.qr(a)
        q = q * (np.diag(r) / np.abs(np.diag(r)))
        rot_states = tuple(Ket(q @ s.amplitudes) for s in ens.states)
        from qdetnet.network import HypothesisEnsemble
        rot_ens = HypothesisEnsemble(states=rot_states, priors=ens.priors)
        rot_povm = Povm(elements=tuple(
            DenseOperator(q @ e.mat @ q.conj().T, hermitian=True, positive=True)
            for e in povm.elements))
        rot = numeric_probabilities(rot_ens, rot_povm, (0, 1, None))
        for x, y in zip(base, rot):
            assert x == pytest.approx(y, abs=1e-10)


class TestSeparableReading:
    @pytest.mark.parametrize("n,theta", [(2, math.pi / 4), (2, 0.3), (4, 0.5),
                                         (6, 0.5), (3, 0.4)])
    def test_sum_reading_matches_oracle(self, n, theta):
        record = resolve_separable_success_reading(n, theta)
        assert record.passed
        assert "sum-of-lines" in record.note or n == 2

    def test_n2_equals_two_detector_display(self):
        theta = 0.37
        record = resolve_separable_success_reading(2, theta)
        display = 0.5 * (1 + (1 / math.sqrt(2)) * math.sqrt(
            math.sin(2 * theta) ** 2 + 0.5 * (1 - math.cos(2 * theta)) ** 2))
        assert record.observed == pytest.approx(display, abs=1e-12)

    def test_spot_value(self):
        record = resolve_separable_success_reading(2, math.pi / 4)
        assert record.observed == pytest.approx(0.9330127, abs=5e-8)
        assert record.expected == pytest.approx(0.9330127, abs=5e-8)

    def test_literal_reading_rejected_beyond_two(self):
        """For N > 2 the two readings differ; only the sum matches."""
        from qdetnet.verify import _separable_success_readings
        n, theta = 6, 0.5
        plus_reading, literal_reading = _separable_success_readings(n, theta)
        ens_success = resolve_separable_success_reading(n, theta).expected
        assert abs(plus_reading - ens_success) <= 1e-9
        assert abs(literal_reading - ens_success) > 1e-3


class TestNullStateRelation:
    @pytest.mark.parametrize("n", (2, 4, 6))
    @pytest.mark.parametrize("theta", (0.2, 0.5))
    def test_relation_holds(self, n, theta):
        records = verify_null_state_relation(n, theta)
        assert len(records) == 2
        coincide, capture = records
        assert coincide.passed and coincide.observed == pytest.approx(1.0, abs=1e-10)
        assert capture.passed and capture.observed == pytest.approx(1.0, abs=1e-9)

    def test_boundary_phase(self):
        records = verify_null_state_relation(2, math.pi / 4)
        assert all(r.passed for r in records)

    @pytest.mark.parametrize("n", (8, 10))
    def test_larger_networks(self, n):
        records = verify_null_state_relation(n, 0.3)
        assert all(r.passed for r in records)

    def test_odd_n_rejected(self):
        with pytest.raises(ValueError):
            verify_null_state_relation(3, 0.3)


class TestProbeSearch:
    def test_which_detector_never_beats_analytic(self):
        record = probe_search(2, math.pi / 8, "which_detector_pairwise",
                              budget=40, seed=7)
        assert record.passed
        assert record.observed <= 1e-6  # excess over the analytic optimum

    def test_one_or_none_uniform_is_optimal(self):
        record = probe_search(2, math.pi / 8, "one_or_none_overlap",
                              budget=40, seed=7)
        assert record.passed
        assert abs(record.observed - abs(math.cos(math.pi / 8))) <= 1e-4

    def test_orthogonality_reachable_at_max_phase(self):
        record = probe_search(2, math.pi / 4, "which_detector_pairwise",
                              budget=30, seed=3)
        assert record.passed
        assert "1.000000" in record.note

    def test_exploratory_three_detectors(self):
        record = probe_search(3, 0.4, "which_detector_pairwise", budget=5, seed=1)
        assert record.passed
        assert "exploratory" in record.note

    def test_zero_budget_rejected(self):
        with pytest.raises(ValueError):
            probe_search(2, 0.3, "which_detector_pairwise", budget=0)

    def test_deterministic(self):
        a = probe_search(2, 0.3, "one_or_none_overlap", budget=10, seed=5)
        b = probe_search(2, 0.3, "one_or_none_overlap", budget=10, seed=5)
        assert a == b


class TestSuite:
    def test_quick_grid_all_pass(self):
        records = run_verification_suite(GRID_PRESETS["quick"])
        assert records
        assert all(r.passed for r in records)

    def test_deterministic_ordering(self):
        a = run_verification_suite(GRID_PRESETS["quick"])
        b = run_verification_suite(GRID_PRESETS["quick"])
        assert a == b
        keys = [(r.check_name, r.param_str()) for r in a]
        assert keys == sorted(keys)

    def test_odd_n_produces_skip_record(self):
        grid = VerificationGrid(thetas=(0.3,), detector_counts=(3,),
                                null_priors=(0.5,))
        records = run_verification_suite(grid)
        skips = [r for r in records if r.skipped]
        assert skips and all("odd N" in r.note for r in skips)
        assert all(r.passed for r in records)

    def test_zero_tolerance_injection_fails(self):
        grid = VerificationGrid(thetas=(0.3,), detector_counts=(2,),
                                null_priors=(0.5,))
        records = run_verification_suite(grid, comparison_tol=0.0)
        assert any(not r.passed for r in records)

    def test_full_space_oracle_agrees_with_gram_path(self):
        from qdetnet.strategies import pgm_success_from_gram
        theta, n = 0.4, 6
        ens = hypothesis_states(build_probe(ProbeSpec.symmetric(n, 3)),
                                PhaseChannel(theta))
        full = _pgm_success_full(list(ens.states), ens.priors)
        g = np.array([[a.inner(b) for b in ens.states] for a in ens.states])
        assert full == pytest.approx(pgm_success_from_gram(g, ens.priors), abs=1e-9)


class TestRecordSemantics:
    def test_compare_pass_iff_within_tolerance(self):
        rec = VerificationRecord.compare("x", {"a": 1}, 1.0, 1.0 + 5e-10, 1e-9)
        assert rec.passed
        rec = VerificationRecord.compare("x", {"a": 1}, 1.0, 1.0 + 5e-9, 1e-9)
        assert not rec.passed

    def test_skip_record(self):
        rec = VerificationRecord.skip("x", {"n": 3}, "odd N unsupported")
        assert rec.passed and rec.skipped
