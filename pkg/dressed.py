"""
Dressed-state picture of the driven Lambda system.

In the rotating frame the atom-field Hamiltonian is

    H_eff = -delta_p |1><1| - (delta_p - delta_c) |2><2|
            - (omega_p |1><3| + omega_c |1><2| + h.c.)

For equal detunings delta_p = delta_c = delta it has a dark state
|0> = cos(theta)|3> - sin(theta)|2> with zero energy and two bright
states |+->, mixtures of |1> and B = cos(theta)|2> + sin(theta)|3>:

    |+> = cos(phi) B - sin(phi)|1>,  E+ = (-delta + R)/2
    |-> = sin(phi) B + cos(phi)|1>,  E- = (-delta - R)/2

with tan(theta) = omega_p/omega_c, tan(2 phi) = 2 Omega/delta,
Omega^2 = omega_c^2 + omega_p^2 and R = sqrt(delta^2 + 4 Omega^2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from dynamics import steady_state, steady_state_closed_form
from errors import PreconditionViolated
from model import DensityMatrix, SystemParams

EQUAL_DETUNING_TOL = 1e-12
LABELS = ("0", "-", "+")


@dataclass(frozen=True, eq=False)
class DressedSystem:
    """Eigenvalues in hbar*gamma_13 units, eigenvectors in the (|1>, |2>, |3>) basis."""

    eigenvalues: Dict[str, float]
    eigenvectors: Dict[str, np.ndarray]
    mixing_theta: float
    mixing_phi: float

    def state(self, label: str) -> np.ndarray:
        return self.eigenvectors[label].copy()

    def residuals(self, hamiltonian: np.ndarray) -> Dict[str, float]:
        return {
            label: float(np.linalg.norm(hamiltonian @ v - self.eigenvalues[label] * v))
            for label, v in self.eigenvectors.items()
        }


def effective_hamiltonian(params: SystemParams) -> np.ndarray:
    h = np.zeros((3, 3), dtype=complex)
    h[0, 0] = -params.delta_p
    h[1, 1] = -(params.delta_p - params.delta_c)
    h[0, 1] = h[1, 0] = -params.omega_c
    h[0, 2] = h[2, 0] = -params.omega_p
    return h


def rotating_frame_hamiltonian(params: SystemParams, t: float, omega_13: float, omega_12: float) -> np.ndarray:
    """
    U^H H U - i U^H dU/dt for the laboratory Hamiltonian at time t.

    omega_13 and omega_12 are the transition frequencies (gamma_13 units);
    the fields oscillate at omega_p = omega_13 + delta_p and
    omega_c = omega_12 + delta_c, and U = diag(e^{-i omega_p t},
    e^{-i (omega_p - omega_c) t}, 1).
    """
    w_p = omega_13 + params.delta_p
    w_c = omega_12 + params.delta_c

    h_lab = np.diag([omega_13, omega_13 - omega_12, 0.0]).astype(complex)
    h_lab[0, 1] = -params.omega_c * np.exp(-1j * w_c * t)
    h_lab[0, 2] = -params.omega_p * np.exp(-1j * w_p * t)
    h_lab[1, 0] = np.conj(h_lab[0, 1])
    h_lab[2, 0] = np.conj(h_lab[0, 2])

    generator = np.diag([w_p, w_p - w_c, 0.0])
    u = np.diag(np.exp(-1j * np.diag(generator) * t))
    u_dot = -1j * generator @ u
    return u.conj().T @ h_lab @ u - 1j * u.conj().T @ u_dot


def _require_equal_detunings(params: SystemParams) -> None:
    if abs(params.delta_p - params.delta_c) > EQUAL_DETUNING_TOL:
        raise PreconditionViolated(
            f"dressed closed forms need delta_p == delta_c, got {params.delta_p} and {params.delta_c}"
        )


def dressed_eigensystem(params: SystemParams) -> DressedSystem:
    _require_equal_detunings(params)
    delta = params.delta_p
    omega = math.hypot(params.omega_c, params.omega_p)
    root = math.sqrt(delta * delta + 4 * omega * omega)
    theta = math.atan2(params.omega_p, params.omega_c)
    phi = 0.5 * math.atan2(2 * omega, delta)

    one = np.array([1, 0, 0], dtype=complex)
    bright = np.array([0, math.cos(theta), math.sin(theta)], dtype=complex)
    dark = np.array([0, -math.sin(theta), math.cos(theta)], dtype=complex)

    return DressedSystem(
        eigenvalues={"0": 0.0, "-": 0.5 * (-delta - root), "+": 0.5 * (-delta + root)},
        eigenvectors={
            "0": dark,
            "-": math.sin(phi) * bright + math.cos(phi) * one,
            "+": math.cos(phi) * bright - math.sin(phi) * one,
        },
        mixing_theta=theta,
        mixing_phi=phi,
    )


def fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate the global phase so that the largest-magnitude component is real and positive."""
    k = int(np.argmax(np.abs(v)))
    return v * (abs(v[k]) / v[k])


def numeric_eigensystem(params: SystemParams) -> Tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and phase-fixed eigenvectors (columns) of H_eff."""
    values, vectors = np.linalg.eigh(effective_hamiltonian(params))
    vectors = np.column_stack([fix_phase(vectors[:, k]) for k in range(3)])
    return values, vectors


def _steady_rho(params: SystemParams) -> DensityMatrix:
    if params.delta_c == 0 and not params.has_thermal_photons and params.omega_c > 0 and params.omega_p > 0:
        return steady_state_closed_form(params).rho
    return steady_state(params).rho


def interference_amplitude(params: SystemParams) -> float:
    """|rho12 + rho13| of the steady state; vanishes at two-photon resonance."""
    rho = _steady_rho(params)
    return abs(rho.coherence(1, 2) + rho.coherence(1, 3))


def dark_state_overlap(rho: DensityMatrix, params: SystemParams) -> float:
    """<0|rho|0> with |0> the dark state of H_eff."""
    dark = dressed_eigensystem(params).state("0")
    return float(np.real(dark.conj() @ rho.rho @ dark))


def autler_townes_doublet(params: SystemParams) -> Tuple[float, float]:
    """Probe detunings of the two absorption peaks split by the control field."""
    return -params.omega_c, params.omega_c


def dipole_sum_13(system: DressedSystem, d13: float = 1.0, d12: float = 1.0) -> complex:
    """
    <3|d|+> + <3|d|-> for the dipole pattern of a Lambda system
    (d13 and d12 nonzero, d32 = 0).
    """
    dipole = np.zeros((3, 3), dtype=complex)
    dipole[0, 2] = dipole[2, 0] = d13
    dipole[0, 1] = dipole[1, 0] = d12
    bra3 = np.array([0, 0, 1], dtype=complex)
    return complex(bra3 @ dipole @ system.state("+") + bra3 @ dipole @ system.state("-"))
