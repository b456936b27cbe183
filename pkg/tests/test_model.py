import math

import numpy as np
import pytest

from retrolind import (
    DensityOperator,
    IntegratorConfig,
    LindbladModel,
    Pom,
    PreparationEnsemble,
    Scenario,
    dagger,
    plus_minus_ensemble,
    two_level_decay_model,
    validate_scenario,
    validate_scenario_data,
)
from retrolind.atom import demo_scenario

EXCITED_PROJECTOR = np.diag([1.0, 0.0]).astype(complex)
PLUS = np.full((2, 2), 0.5, dtype=complex)
MINUS = np.array([[0.5, -0.5], [-0.5, 0.5]], dtype=complex)


class TestTwoLevelDecayModel:
    def test_jump_operator_square_is_excited_projector(self):
        """dagger(A) A must equal (gamma/2)|e><e| up to a couple of ulp."""
        for gamma in (1.0, 0.1, 2.5, 17.0):
            model = two_level_decay_model(gamma)
            (a,) = model.jump_ops
            np.testing.assert_allclose(
                dagger(a) @ a, (gamma / 2.0) * EXCITED_PROJECTOR, rtol=1e-15, atol=0
            )

    def test_free_hamiltonian_is_zero(self):
        model = two_level_decay_model(2.0)
        np.testing.assert_array_equal(model.hamiltonian, np.zeros((2, 2)))

    def test_lowering_structure(self):
        model = two_level_decay_model(8.0)
        (a,) = model.jump_ops
        np.testing.assert_allclose(a, [[0, 0], [2, 0]], atol=0)

    def test_rejects_nonpositive_rate(self):
        with pytest.raises(ValueError):
            two_level_decay_model(0.0)
        with pytest.raises(ValueError):
            two_level_decay_model(-1.0)


class TestPlusMinusEnsemble:
    def test_priors_and_labels(self):
        ens = plus_minus_ensemble()
        assert ens.priors == (0.5, 0.5)
        assert ens.labels == ("+", "-")

    def test_states_are_superposition_projectors(self):
        ens = plus_minus_ensemble()
        np.testing.assert_array_equal(ens.states[0].op, PLUS)
        np.testing.assert_array_equal(ens.states[1].op, MINUS)

    def test_prior_weighted_sum_is_half_identity(self):
        ens = plus_minus_ensemble()
        total = sum(p * st.op for p, st in zip(ens.priors, ens.states))
        np.testing.assert_allclose(total, np.eye(2) / 2.0, atol=1e-15)


class TestLindbladModel:
    def test_closed_system_allowed(self):
        model = LindbladModel(2, np.diag([1.0, -1.0]).astype(complex))
        assert model.jump_ops == ()

    def test_rejects_non_hermitian_hamiltonian(self):
        with pytest.raises(ValueError, match="Hermitian"):
            LindbladModel(2, np.array([[0, 1], [0, 0]], dtype=complex))

    def test_rejects_jump_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            LindbladModel(2, np.zeros((2, 2)), (np.zeros((3, 3)),))

    def test_rejects_non_finite(self):
        h = np.zeros((2, 2), dtype=complex)
        h[0, 0] = np.inf
        with pytest.raises(ValueError, match="finite"):
            LindbladModel(2, h)

    def test_arrays_frozen(self):
        model = two_level_decay_model(1.0)
        with pytest.raises(ValueError):
            model.hamiltonian[0, 0] = 1.0


class TestDensityOperator:
    def test_valid(self):
        rho = DensityOperator(PLUS)
        assert rho.dim == 2

    def test_rejects_wrong_trace(self):
        with pytest.raises(ValueError, match="trace"):
            DensityOperator(1.1 * PLUS)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError, match="Hermitian"):
            DensityOperator(np.array([[0.5, 0.5], [-0.5, 0.5]], dtype=complex))

    def test_rejects_negative_eigenvalue(self):
        with pytest.raises(ValueError, match="positive"):
            DensityOperator(np.diag([1.5, -0.5]).astype(complex))

    def test_tolerance_overrides(self):
        slightly_off = PLUS * (1.0 + 5e-9)
        with pytest.raises(ValueError):
            DensityOperator(slightly_off)
        DensityOperator(slightly_off, trace_tol=1e-7)


class TestPom:
    def test_complete_pair(self):
        pom = Pom((PLUS, MINUS), ("+", "-"))
        assert len(pom) == 2 and pom.dim == 2

    def test_single_projector_is_incomplete(self):
        with pytest.raises(ValueError, match="sum to the identity"):
            Pom((PLUS,), ("+",))

    def test_duplicate_labels_rejected(self):
        with pytest.raises(ValueError, match="unique"):
            Pom((PLUS, MINUS), ("+", "+"))

    def test_label_count_must_match(self):
        with pytest.raises(ValueError, match="labels"):
            Pom((PLUS, MINUS), ("+",))

    def test_negative_element_rejected(self):
        too_big = 1.5 * PLUS
        rest = np.eye(2) - too_big
        with pytest.raises(ValueError, match="positive"):
            Pom((too_big, rest), ("a", "b"))


class TestPreparationEnsemble:
    def test_priors_stored_as_given(self):
        ens = PreparationEnsemble(
            (0.25, 0.75), (DensityOperator(PLUS), DensityOperator(MINUS)), ("a", "b")
        )
        assert ens.priors == (0.25, 0.75)

    def test_rejects_bad_prior_sum(self):
        with pytest.raises(ValueError, match="sum"):
            PreparationEnsemble(
                (0.6, 0.6), (DensityOperator(PLUS), DensityOperator(MINUS)), ("a", "b")
            )

    def test_rejects_negative_prior(self):
        with pytest.raises(ValueError, match=">= 0"):
            PreparationEnsemble(
                (-0.5, 1.5), (DensityOperator(PLUS), DensityOperator(MINUS)), ("a", "b")
            )


class TestScenario:
    def test_measurement_before_preparation_rejected(self):
        with pytest.raises(ValueError, match="precedes"):
            demo = demo_scenario(1.0, 1.0)
            Scenario(demo.model, demo.ensemble, demo.pom, t_p=2.0, t_m=1.0)

    def test_zero_window_allowed(self):
        demo = demo_scenario(1.0, 1.0)
        same_time = Scenario(demo.model, demo.ensemble, demo.pom, t_p=3.0, t_m=3.0)
        assert same_time.duration == 0.0

    def test_duration(self):
        assert demo_scenario(1.0, 2.5).duration == 2.5


class TestIntegratorConfig:
    def test_defaults(self):
        config = IntegratorConfig()
        assert config.steps_per_unit_time == 1000
        assert config.record_every == 10

    def test_rejects_non_positive(self):
        with pytest.raises(ValueError):
            IntegratorConfig(steps_per_unit_time=0)
        with pytest.raises(ValueError):
            IntegratorConfig(record_every=0)


class TestValidateScenario:
    def test_well_formed_scenario_is_clean(self):
        report = validate_scenario(demo_scenario(1.0, 1.0))
        assert report.ok
        assert report.lines() == []

    def test_raw_data_report_names_prior_deviation(self):
        """Priors of 0.6/0.6 must be reported as a 0.2 deviation, not raised."""
        demo = demo_scenario(1.0, 1.0)
        report = validate_scenario_data(
            2,
            demo.model.hamiltonian,
            demo.model.jump_ops,
            [0.6, 0.6],
            [st.op for st in demo.ensemble.states],
            demo.ensemble.labels,
            demo.pom.elements,
            demo.pom.labels,
            0.0,
            1.0,
        )
        assert not report.ok
        (issue,) = report.issues
        assert issue.field == "ensemble.priors"
        assert issue.deviation == pytest.approx(0.2)

    def test_raw_data_report_flags_incomplete_pom(self):
        demo = demo_scenario(1.0, 1.0)
        report = validate_scenario_data(
            2,
            demo.model.hamiltonian,
            demo.model.jump_ops,
            [1.0],
            [PLUS],
            ("+",),
            [PLUS],
            ("+",),
            0.0,
            1.0,
        )
        assert any("sum to the identity" in line for line in report.lines())
        deviations = [i.deviation for i in report.issues if "identity" in i.message]
        assert deviations[0] == pytest.approx(0.5)

    def test_collects_multiple_issues(self):
        demo = demo_scenario(1.0, 1.0)
        report = validate_scenario_data(
            2,
            demo.model.hamiltonian,
            demo.model.jump_ops,
            [0.7, 0.7],
            [st.op for st in demo.ensemble.states],
            demo.ensemble.labels,
            demo.pom.elements,
            demo.pom.labels,
            5.0,
            1.0,
            record_every=0,
        )
        fields = {issue.field for issue in report.issues}
        assert {"ensemble.priors", "scenario", "integrator.record_every"} <= fields

    def test_non_finite_time_flagged(self):
        demo = demo_scenario(1.0, 1.0)
        report = validate_scenario_data(
            2,
            demo.model.hamiltonian,
            demo.model.jump_ops,
            demo.ensemble.priors,
            [st.op for st in demo.ensemble.states],
            demo.ensemble.labels,
            demo.pom.elements,
            demo.pom.labels,
            0.0,
            math.inf,
        )
        assert any("finite" in line for line in report.lines())
