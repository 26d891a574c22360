import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from conftest import random_density_matrix
from dressed import (
    LABELS,
    autler_townes_doublet,
    dark_state_overlap,
    dipole_sum_13,
    dressed_eigensystem,
    effective_hamiltonian,
    fix_phase,
    interference_amplitude,
    numeric_eigensystem,
    rotating_frame_hamiltonian,
)
from dynamics import steady_state
from errors import PreconditionViolated
from model import DensityMatrix, SystemParams


def same_ray(u, v):
    return abs(abs(np.vdot(u, v)) - 1) <= 1e-10


class TestHamiltonian:
    @pytest.mark.parametrize("t", [0.0, 0.3, 1.7, 12.5, 100.0])
    def test_rotating_frame_removes_time_dependence(self, t):
        params = SystemParams(omega_c=0.56, omega_p=0.5, delta_p=0.3, delta_c=-0.2)
        h = rotating_frame_hamiltonian(params, t, omega_13=40.0, omega_12=3.0)
        assert_allclose(h, effective_hamiltonian(params), atol=1e-10)

    def test_effective_hamiltonian_entries(self):
        h = effective_hamiltonian(SystemParams(omega_c=0.56, omega_p=0.5, delta_p=0.3, delta_c=0.1))
        assert h[0, 0] == pytest.approx(-0.3)
        assert h[1, 1] == pytest.approx(-0.2)
        assert h[2, 2] == 0
        assert h[0, 1] == h[1, 0] == -0.56
        assert h[0, 2] == h[2, 0] == -0.5
        assert h[1, 2] == 0


class TestDressedEigensystem:
    def test_requires_equal_detunings(self):
        with pytest.raises(PreconditionViolated):
            dressed_eigensystem(SystemParams(delta_p=0.3, delta_c=0.1))

    def test_dark_state_has_zero_energy(self):
        params = SystemParams(omega_c=0.56, omega_p=0.5, delta_p=0.4, delta_c=0.4)
        dark = dressed_eigensystem(params).state("0")
        assert_allclose(effective_hamiltonian(params) @ dark, 0, atol=1e-14)
        assert dark[0] == 0

    def test_equal_drives_on_resonance(self):
        params = SystemParams(omega_c=0.5, omega_p=0.5)
        system = dressed_eigensystem(params)
        omega = math.hypot(0.5, 0.5)
        assert system.mixing_theta == pytest.approx(math.pi / 4)
        assert system.mixing_phi == pytest.approx(math.pi / 4)
        assert system.eigenvalues["+"] == pytest.approx(omega)
        assert system.eigenvalues["-"] == pytest.approx(-omega)

    def test_strong_control_limit(self):
        params = SystemParams(omega_c=500.0, omega_p=0.5)
        system = dressed_eigensystem(params)
        assert system.eigenvalues["+"] == pytest.approx(500.0, rel=1e-5)
        assert system.eigenvalues["-"] == pytest.approx(-500.0, rel=1e-5)
        expected = np.array([-1, 1, 0]) / math.sqrt(2)
        assert_allclose(system.state("+"), expected, atol=1e-3)
        assert_allclose(abs(system.state("0")), [0, 0, 1], atol=1e-3)

    @settings(max_examples=60, deadline=None)
    @given(
        omega_c=st.floats(0.01, 10.0),
        omega_p=st.floats(0.01, 10.0),
        delta=st.floats(-5.0, 5.0),
    )
    def test_orthonormal_eigenvectors(self, omega_c, omega_p, delta):
        params = SystemParams(omega_c=omega_c, omega_p=omega_p, delta_p=delta, delta_c=delta)
        system = dressed_eigensystem(params)
        basis = np.column_stack([system.state(label) for label in LABELS])
        assert_allclose(basis.conj().T @ basis, np.eye(3), atol=1e-12)
        scale = max(1.0, omega_c, omega_p, abs(delta))
        for label, residual in system.residuals(effective_hamiltonian(params)).items():
            assert residual <= 1e-10 * scale, label

    @pytest.mark.parametrize("delta", [-1.3, 0.0, 0.4, 2.0])
    def test_agrees_with_numeric_diagonalisation(self, delta):
        params = SystemParams(omega_c=0.56, omega_p=0.5, delta_p=delta, delta_c=delta)
        system = dressed_eigensystem(params)
        values, vectors = numeric_eigensystem(params)
        by_energy = sorted(LABELS, key=lambda label: system.eigenvalues[label])
        assert_allclose([system.eigenvalues[label] for label in by_energy], values, atol=1e-12)
        for k, label in enumerate(by_energy):
            assert same_ray(vectors[:, k], system.state(label))


class TestSpectroscopy:
    def test_autler_townes_doublet(self):
        assert autler_townes_doublet(SystemParams(omega_c=2.5)) == (-2.5, 2.5)

    def test_interference_vanishes_at_resonance(self, reference_params):
        assert interference_amplitude(reference_params) == pytest.approx(0.0, abs=1e-12)

    def test_interference_off_resonance(self, reference_params):
        plus = interference_amplitude(reference_params.replace(delta_p=0.8))
        minus = interference_amplitude(reference_params.replace(delta_p=-0.8))
        assert plus > 1e-3
        assert plus == pytest.approx(minus, rel=1e-10)

    def test_interference_outside_closed_form_regime(self):
        params = SystemParams(delta_p=0.8, delta_c=0.2, nbar12=0.1, nbar13=0.1)
        assert interference_amplitude(params) > 0

    def test_dipole_sum_vanishes_on_resonance(self):
        system = dressed_eigensystem(SystemParams(omega_c=0.56, omega_p=0.5))
        assert abs(dipole_sum_13(system)) <= 1e-14

    def test_dipole_sum_detuned(self):
        system = dressed_eigensystem(SystemParams(omega_c=0.56, omega_p=0.5, delta_p=0.7, delta_c=0.7))
        assert abs(dipole_sum_13(system, d13=2.0)) > 0


class TestDarkStateOverlap:
    def test_steady_state_is_dark(self, reference_params):
        rho = steady_state(reference_params).rho
        assert dark_state_overlap(rho, reference_params) == pytest.approx(1.0, abs=1e-10)

    def test_excited_state_is_bright(self, reference_params):
        assert dark_state_overlap(DensityMatrix.basis(1), reference_params) == 0.0

    def test_ground_state_overlap(self, reference_params):
        theta = math.atan2(0.5, 0.56)
        overlap = dark_state_overlap(DensityMatrix.basis(3), reference_params)
        assert overlap == pytest.approx(math.cos(theta) ** 2)

    def test_dressed_populations_sum_to_one(self, rng, reference_params):
        params = reference_params.replace(delta_p=0.4, delta_c=0.4)
        system = dressed_eigensystem(params)
        for rank in (1, 2, 3):
            rho = random_density_matrix(rng, rank=rank)
            bright = sum(
                float(np.real(system.state(label).conj() @ rho.rho @ system.state(label))) for label in ("+", "-")
            )
            assert dark_state_overlap(rho, params) + bright == pytest.approx(1.0, abs=1e-12)


class TestFixPhase:
    def test_largest_component_real_positive(self, rng):
        for _ in range(10):
            v = rng.normal(size=3) + 1j * rng.normal(size=3)
            fixed = fix_phase(v)
            k = int(np.argmax(np.abs(fixed)))
            assert fixed[k].imag == pytest.approx(0.0, abs=1e-14)
            assert fixed[k].real > 0
            assert same_ray(fixed / np.linalg.norm(fixed), v / np.linalg.norm(v))
