import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from conftest import random_density_matrix
from dynamics import (
    SolveMethod,
    closed_form_denominator,
    closed_form_elements,
    coherence_phases,
    propagate,
    raman_derivative,
    stationary_states,
    steady_state,
    steady_state_closed_form,
)
from errors import DegenerateSteadyState, OutOfValidityRegime
from model import DensityMatrix, SystemParams


class TestPropagate:
    def test_free_decay_of_excited_state(self):
        params = SystemParams(gamma=0.9, omega_c=0.0, omega_p=0.0)
        trajectory = propagate(DensityMatrix.basis(1), params, tau_end=5.0, n_points=51)
        for tau, rho in trajectory:
            assert rho.populations[0] == pytest.approx(math.exp(-1.9 * tau), abs=1e-8)
        assert len(trajectory) == 51
        assert trajectory.taus[-1] == pytest.approx(5.0)

    def test_steady_state_is_a_fixed_point(self, off_resonance_params):
        rho_ss = steady_state(off_resonance_params).rho
        trajectory = propagate(rho_ss, off_resonance_params, tau_end=20.0, n_points=11)
        for _, rho in trajectory:
            assert rho.distance(rho_ss) <= 1e-9

    def test_relaxes_to_dark_state(self, reference_params):
        final = propagate(DensityMatrix.basis(3), reference_params, tau_end=200.0, n_points=2).final
        assert final.distance(steady_state(reference_params).rho) <= 1e-8

    def test_rk45_is_accepted(self, reference_params):
        trajectory = propagate(DensityMatrix.basis(2), reference_params, tau_end=1.0, method="RK45")
        assert trajectory.final.populations.sum() == pytest.approx(1.0)

    @pytest.mark.parametrize("kwargs", [{"tau_end": 0.0}, {"tau_end": 1.0, "method": "LSODA"}])
    def test_rejects_bad_arguments(self, reference_params, kwargs):
        with pytest.raises(ValueError):
            propagate(DensityMatrix.basis(1), reference_params, **kwargs)

    def test_random_initial_states_converge_together(self, rng):
        params = SystemParams(gamma=0.9, omega_c=0.56, omega_p=0.5, delta_p=0.8)
        finals = stationary_states(params, [random_density_matrix(rng) for _ in range(5)], tau_end=300.0)
        for a, b in itertools.combinations(finals, 2):
            assert a.distance(b) <= 1e-7

    @pytest.mark.slow
    @settings(max_examples=1000, deadline=None)
    @given(
        gamma=st.floats(0.1, 3.0),
        omega_c=st.floats(0.0, 2.0),
        omega_p=st.floats(0.0, 2.0),
        delta_p=st.floats(-3.0, 3.0),
        nbar=st.floats(0.0, 0.5),
        seed=st.integers(0, 2 ** 31),
    )
    def test_emitted_states_are_physical(self, gamma, omega_c, omega_p, delta_p, nbar, seed):
        params = SystemParams(gamma=gamma, omega_c=omega_c, omega_p=omega_p, delta_p=delta_p, nbar12=nbar, nbar13=nbar)
        rho0 = random_density_matrix(np.random.default_rng(seed))
        # every state is validated by DensityMatrix at tol on construction
        trajectory = propagate(rho0, params, tau_end=5.0, n_points=11)
        assert trajectory.final.min_eigenvalue() >= -1e-10


class TestSteadyState:
    def test_dark_state_at_two_photon_resonance(self, reference_params):
        steady = steady_state(reference_params)
        rho = steady.rho
        xi2 = 1.12 ** 2
        assert steady.method is SolveMethod.NULL_SPACE
        assert steady.residual <= 1e-10
        assert abs(rho.populations[0]) <= 1e-12
        assert rho.populations[1] == pytest.approx(1 / (1 + xi2), abs=1e-10)
        assert rho.populations[2] == pytest.approx(xi2 / (1 + xi2), abs=1e-10)
        assert rho.real_part(2, 3) == pytest.approx(-1.12 / (1 + xi2), abs=1e-10)
        assert rho.real_part(2, 3) == pytest.approx(-0.49680, abs=1e-5)
        for i, j in ((1, 2), (1, 3)):
            assert abs(rho.coherence(i, j)) <= 1e-10
        assert abs(rho.imag_part(2, 3)) <= 1e-10

    def test_equal_drives_give_symmetric_dark_state(self):
        rho = steady_state(SystemParams(gamma=1.0, omega_c=0.7, omega_p=0.7)).rho
        assert_allclose(rho.populations, [0.0, 0.5, 0.5], atol=1e-10)
        assert rho.real_part(2, 3) == pytest.approx(-0.5, abs=1e-10)

    def test_undriven_probe_pumps_into_level_three(self):
        rho = steady_state(SystemParams(omega_c=0.5, omega_p=0.0)).rho
        assert rho.populations[2] == pytest.approx(1.0, abs=1e-10)

    def test_no_drive_is_degenerate(self):
        with pytest.raises(DegenerateSteadyState) as info:
            steady_state(SystemParams(omega_c=0.0, omega_p=0.0))
        assert info.value.rank < 8

    def test_thermal_photons_populate_excited_state(self):
        rho = steady_state(SystemParams(omega_c=0.0, omega_p=0.0, nbar12=0.2, nbar13=0.2)).rho
        # detailed balance with equal occupations: rho11/rho22 = rho11/rho33 = n/(n+1)
        assert rho.populations[0] / rho.populations[1] == pytest.approx(0.2 / 1.2, rel=1e-10)
        assert rho.populations[0] / rho.populations[2] == pytest.approx(0.2 / 1.2, rel=1e-10)

    @settings(max_examples=60, deadline=None)
    @given(
        gamma=st.floats(0.1, 10.0),
        omega_c=st.floats(0.05, 5.0),
        omega_p=st.floats(0.05, 5.0),
        delta_p=st.floats(-3.0, 3.0),
    )
    def test_unique_and_positive(self, gamma, omega_c, omega_p, delta_p):
        steady = steady_state(SystemParams(gamma=gamma, omega_c=omega_c, omega_p=omega_p, delta_p=delta_p))
        assert steady.rho.min_eigenvalue() >= -1e-10


class TestClosedForm:
    def test_matches_null_space_on_detuning_grid(self, reference_params):
        for delta_p in np.linspace(-3, 3, 50):
            params = reference_params.replace(delta_p=float(delta_p))
            closed = steady_state_closed_form(params)
            assert closed.method is SolveMethod.CLOSED_FORM
            assert closed.rho.distance(steady_state(params).rho) <= 1e-10

    def test_probe_coherence_vanishes_at_resonance(self, reference_params):
        rho = steady_state_closed_form(reference_params).rho
        assert rho.coherence(1, 3) == 0

    def test_parity_of_probe_coherence(self, reference_params):
        plus = steady_state_closed_form(reference_params.replace(delta_p=0.8)).rho
        minus = steady_state_closed_form(reference_params.replace(delta_p=-0.8)).rho
        assert minus.real_part(1, 3) == pytest.approx(-plus.real_part(1, 3), rel=1e-12)
        assert minus.imag_part(1, 3) == pytest.approx(plus.imag_part(1, 3), rel=1e-12)

    def test_populations_sum_to_one(self, rng):
        for _ in range(20):
            params = SystemParams(
                gamma=float(rng.uniform(0.1, 5)),
                omega_c=float(rng.uniform(0.05, 3)),
                omega_p=float(rng.uniform(0.05, 3)),
                delta_p=float(rng.uniform(-3, 3)),
            )
            e = closed_form_elements(params)
            assert e["rho11"] + e["rho22"] + e["rho33"] == pytest.approx(1.0, abs=1e-12)

    def test_denominator_at_resonance(self, reference_params):
        c2, p2, g = 0.56 ** 2, 0.25, 0.9
        assert closed_form_denominator(reference_params) == pytest.approx(4 * (c2 + p2) ** 2 * (c2 + g * p2))

    @pytest.mark.parametrize(
        "changes",
        [{"delta_c": 0.1}, {"nbar12": 0.1}, {"omega_p": 0.0}],
    )
    def test_outside_regime(self, reference_params, changes):
        with pytest.raises(OutOfValidityRegime):
            steady_state_closed_form(reference_params.replace(**changes))


class TestRamanDerivative:
    def test_equal_drives(self):
        result = raman_derivative(SystemParams(omega_c=0.5, omega_p=0.5))
        assert result.analytic == pytest.approx(0.5, rel=1e-12)
        assert result.numeric == pytest.approx(0.5, rel=1e-6)
        assert result.value == result.analytic

    def test_numeric_agrees_with_analytic(self, reference_params):
        result = raman_derivative(reference_params)
        assert result.numeric == pytest.approx(result.analytic, rel=1e-6)

    def test_vanishes_for_strong_control(self):
        weak = raman_derivative(SystemParams(omega_c=0.5, omega_p=0.5)).value
        strong = raman_derivative(SystemParams(omega_c=50.0, omega_p=0.5)).value
        assert strong < 1e-3 < weak

    def test_off_resonance_has_no_analytic_value(self, off_resonance_params):
        result = raman_derivative(off_resonance_params)
        assert result.analytic is None
        assert result.value == result.numeric
        assert result.delta_p == 1.5


def test_coherence_phases_of_dark_state(reference_params):
    phases = coherence_phases(steady_state_closed_form(reference_params).rho)
    assert abs(phases["theta23"]) == pytest.approx(math.pi)
    assert set(phases) == {"theta12", "theta13", "theta23"}
