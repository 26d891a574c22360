"""
Optical response of a medium of Lambda atoms to the probe field.

Atomic quantities come from dynamics (gamma_13 units); conversion to
laboratory units happens here, in Gaussian units as the susceptibility
formulas are written (lengths in cm, dipoles in statC*cm). Velocities are
reported in m/s, intensities in mW/cm^2.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, Iterable, List, Optional, Tuple

from scipy import constants

from dynamics import raman_derivative, steady_state, steady_state_closed_form
from errors import InvalidParams, LinearizationViolated, OutOfValidityRegime, VelocityOutOfRange
from fcs import fano_resonance
from model import SystemParams

logger = logging.getLogger(__name__)

C_LIGHT = constants.c  # m/s
C_CGS = constants.c * 1e2  # cm/s
H_CGS = constants.h * 1e7  # erg s
HBAR_CGS = constants.hbar * 1e7  # erg s
ERG_PER_S_CM2_PER_MW_CM2 = 1e4

LINEARIZATION_LIMIT = 0.1
WAVELENGTH_RTOL = 1e-3
RESONANCE_TOL = 1e-12


@dataclass(frozen=True)
class MediumParams:
    """
    Atomic vapor probed on the 1<->3 transition.

    n_density: atoms per cm^3; dipole_13: |d_13| in statC*cm; gamma13_si: s^-1;
    lambda_p: probe wavelength in cm; omega_p_scaled: probe carrier frequency
    over gamma_13; omega_p_rabi: probe Rabi frequency in gamma_13 units.
    n_d_pinned / calN_pinned override the derived N_d and calN when published
    values are used.
    """

    n_density: float
    dipole_13: float
    gamma13_si: float
    omega_p_rabi: float
    lambda_p: Optional[float] = None
    omega_p_scaled: Optional[float] = None
    n_d_pinned: Optional[float] = None
    calN_pinned: Optional[float] = None

    def __post_init__(self) -> None:
        for name in ("n_density", "dipole_13", "gamma13_si", "omega_p_rabi"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value) or value <= 0:
                raise InvalidParams(f"{name} must be a positive number, got {value!r}")
        for name in ("lambda_p", "omega_p_scaled", "n_d_pinned", "calN_pinned"):
            value = getattr(self, name)
            if value is not None and (not math.isfinite(value) or value <= 0):
                raise InvalidParams(f"{name} must be positive when given, got {value!r}")
        if self.lambda_p is None and self.omega_p_scaled is None:
            raise InvalidParams("either lambda_p or omega_p_scaled is required")
        if self.lambda_p is not None and self.omega_p_scaled is not None:
            derived = self._omega_from_wavelength()
            if abs(self.omega_p_scaled - derived) > WAVELENGTH_RTOL * derived:
                raise InvalidParams(
                    f"omega_p_scaled={self.omega_p_scaled:.6g} disagrees with 2 pi c/(lambda_p gamma13) = {derived:.6g}"
                )

    def _omega_from_wavelength(self) -> float:
        return 2 * math.pi * C_CGS / (self.lambda_p * self.gamma13_si)

    @property
    def omega_p_dimless(self) -> float:
        if self.omega_p_scaled is not None:
            return self.omega_p_scaled
        return self._omega_from_wavelength()

    @property
    def omega_p_si(self) -> float:
        """Probe carrier angular frequency in rad/s."""
        return self.omega_p_dimless * self.gamma13_si

    @property
    def n_d(self) -> float:
        """N |d_13|^2 / (hbar Omega_p gamma_13)."""
        if self.n_d_pinned is not None:
            return self.n_d_pinned
        return self.n_density * self.dipole_13 ** 2 / (HBAR_CGS * self.omega_p_rabi * self.gamma13_si)

    @property
    def calN(self) -> float:
        """2 pi N_d omega_p / Omega_p."""
        if self.calN_pinned is not None:
            return self.calN_pinned
        return 2 * math.pi * self.n_d * self.omega_p_dimless / self.omega_p_rabi

    @property
    def vg_min(self) -> float:
        return C_LIGHT / (1 + self.calN / 4)

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class Susceptibility:
    chi: complex
    eta: float
    alpha: float  # 1/cm
    beta: float  # 1/cm
    phase_velocity: float  # m/s


@dataclass(frozen=True)
class TransparencyWindow:
    width: float
    cpt_advisory: bool


@dataclass(frozen=True)
class OpticalResponse:
    chi: complex
    eta: float
    alpha: float
    v_g: float
    delta_window: float
    phase_velocity: float
    beta: float
    cpt_advisory: bool


@dataclass(frozen=True)
class TradeoffPoint:
    xi: float
    v_g: float
    fano: float
    branch: str


def _in_closed_form_regime(params: SystemParams) -> bool:
    return (
        params.delta_c == 0
        and not params.has_thermal_photons
        and params.omega_c > 0
        and params.omega_p > 0
    )


def _check_probe(params: SystemParams, medium: MediumParams) -> None:
    if abs(params.omega_p - medium.omega_p_rabi) > 1e-12 * max(1.0, medium.omega_p_rabi):
        raise OutOfValidityRegime(
            f"system omega_p={params.omega_p} differs from the medium's probe Rabi frequency {medium.omega_p_rabi}"
        )


def susceptibility_from_coherence(
    rho13: complex, medium: MediumParams, limit: float = LINEARIZATION_LIMIT
) -> Susceptibility:
    """
    chi = N_d rho13 with the derived refractive index and absorption.

    limit bounds |4 pi chi| for the linearized index; pass math.inf to
    evaluate a dense medium anyway.
    """
    chi = medium.n_d * complex(rho13)
    magnitude = 4 * math.pi * abs(chi)
    if magnitude >= limit:
        raise LinearizationViolated(
            f"|4 pi chi| = {magnitude:.3g} >= {limit}; refractive index cannot be linearized",
            chi_magnitude=magnitude,
        )
    eta = 1 + 2 * math.pi * chi.real
    k0 = medium.omega_p_si / C_CGS
    return Susceptibility(
        chi=chi,
        eta=eta,
        alpha=k0 * 4 * math.pi * chi.imag,
        beta=k0 * eta,
        phase_velocity=C_LIGHT / eta,
    )


def susceptibility(
    params: SystemParams, medium: MediumParams, limit: float = LINEARIZATION_LIMIT
) -> Susceptibility:
    """
    Linear susceptibility of the probe transition. Uses the closed-form
    coherences when delta_c = 0 and nbar = 0, the null-space solve otherwise.
    """
    if _in_closed_form_regime(params):
        rho = steady_state_closed_form(params).rho
    else:
        rho = steady_state(params).rho
    return susceptibility_from_coherence(rho.coherence(1, 3), medium, limit)


def group_velocity_resonant(params: SystemParams, medium: MediumParams) -> float:
    """v_g = c/[1 + calN (rho23^R)^2] at two-photon resonance."""
    _check_probe(params, medium)
    if not _in_closed_form_regime(params):
        raise OutOfValidityRegime("resonant group velocity needs delta_c = 0, nbar = 0 and both fields on")
    rho23_re = steady_state_closed_form(params.replace(delta_p=0.0)).rho.real_part(2, 3)
    return C_LIGHT / (1 + medium.calN * rho23_re ** 2)


def group_velocity_general(params: SystemParams, medium: MediumParams) -> float:
    """
    v_g = c/[1 + 2 pi N_d rho13^R + calN Omega_p d rho13^R/d delta_p], with
    the numeric Raman derivative (2 pi omega_p N_d = calN Omega_p).
    """
    _check_probe(params, medium)
    rho13_re = steady_state(params).rho.real_part(1, 3)
    derivative = raman_derivative(params).numeric
    denominator = 1 + 2 * math.pi * medium.n_d * rho13_re + medium.calN * medium.omega_p_rabi * derivative
    v_g = C_LIGHT / denominator
    if not 0 < v_g <= C_LIGHT:
        logger.warning(f"anomalous dispersion: v_g = {v_g:.6g} m/s at delta_p={params.delta_p}")
    return v_g


def group_velocity(params: SystemParams, medium: MediumParams) -> float:
    """Group velocity in m/s; the resonant formula is used at two-photon resonance."""
    if abs(params.delta_p) <= RESONANCE_TOL and _in_closed_form_regime(params):
        return group_velocity_resonant(params, medium)
    return group_velocity_general(params, medium)


def velocity_from_xi(xi: float, medium: MediumParams) -> float:
    """Resonant group velocity as a function of xi: c/[1 + calN/(xi + 1/xi)^2]."""
    if xi <= 0:
        raise InvalidParams(f"xi must be > 0, got {xi}")
    return C_LIGHT / (1 + medium.calN / (xi + 1 / xi) ** 2)


def xi_from_vg(v_g: float, medium: MediumParams) -> Tuple[float, float]:
    """
    The two Rabi ratios (xi_plus >= 1, xi_minus <= 1) giving group velocity
    v_g at resonance; xi_plus * xi_minus = 1.
    """
    v_min = medium.vg_min
    if not (v_min * (1 - 1e-12) <= v_g < C_LIGHT):
        raise VelocityOutOfRange(f"v_g={v_g!r} m/s outside [{v_min:.6g}, {C_LIGHT:.9g}) m/s")
    s = medium.calN / (C_LIGHT / v_g - 1)
    xi_plus = 0.5 * (math.sqrt(s) + math.sqrt(max(s - 4, 0.0)))
    return xi_plus, 1 / xi_plus


def tradeoff_curve(medium: MediumParams, gamma: float, xi_grid: Iterable[float]) -> List[TradeoffPoint]:
    """Resonant (xi, v_g, F) points; xi >= 1 is the upper branch, xi < 1 the lower."""
    points = []
    for xi in xi_grid:
        xi = float(xi)
        points.append(
            TradeoffPoint(
                xi=xi,
                v_g=velocity_from_xi(xi, medium),
                fano=fano_resonance(gamma, xi),
                branch="upper" if xi >= 1 else "lower",
            )
        )
    return points


def transparency_window(params: SystemParams) -> TransparencyWindow:
    """Delta_p = Omega_p (xi^2 + 1)^2 / xi^2; flagged as CPT-like for xi < 1."""
    if params.omega_c <= 0 or params.omega_p <= 0:
        raise OutOfValidityRegime("transparency window needs omega_c, omega_p > 0")
    xi = params.xi()
    width = params.omega_p * (xi * xi + 1) ** 2 / (xi * xi)
    advisory = xi < 1
    if advisory:
        logger.info(f"xi={xi:.4g} < 1: coherent population trapping regime, window width is formal")
    return TransparencyWindow(width=width, cpt_advisory=advisory)


def optical_response(params: SystemParams, medium: MediumParams) -> OpticalResponse:
    chi = susceptibility(params, medium)
    window = transparency_window(params)
    return OpticalResponse(
        chi=chi.chi,
        eta=chi.eta,
        alpha=chi.alpha,
        v_g=group_velocity(params, medium),
        delta_window=window.width,
        phase_velocity=chi.phase_velocity,
        beta=chi.beta,
        cpt_advisory=window.cpt_advisory,
    )


def intensity_from_rabi(omega_rabi: float, gamma_ij_si: float, wavelength: float) -> float:
    """
    Mean laser intensity (mW/cm^2) for a Rabi frequency given in units of
    gamma_ij: I = 2 pi h c Omega^2 / (3 gamma_ij lambda^3), wavelength in cm.
    """
    if omega_rabi < 0 or gamma_ij_si <= 0 or wavelength <= 0:
        raise InvalidParams("intensity_from_rabi needs omega_rabi >= 0 and positive gamma, wavelength")
    omega = omega_rabi * gamma_ij_si
    intensity = 2 * math.pi * H_CGS * C_CGS * omega ** 2 / (3 * gamma_ij_si * wavelength ** 3)
    return intensity / ERG_PER_S_CM2_PER_MW_CM2


def rabi_from_intensity(intensity: float, gamma_ij_si: float, wavelength: float) -> float:
    if intensity < 0 or gamma_ij_si <= 0 or wavelength <= 0:
        raise InvalidParams("rabi_from_intensity needs intensity >= 0 and positive gamma, wavelength")
    intensity_cgs = intensity * ERG_PER_S_CM2_PER_MW_CM2
    omega = math.sqrt(intensity_cgs * 3 * gamma_ij_si * wavelength ** 3 / (2 * math.pi * H_CGS * C_CGS))
    return omega / gamma_ij_si


def field_amplitude_from_intensity(intensity: float) -> float:
    """Field amplitude zeta (statV/cm) from <I> = c zeta^2 / 8 pi, intensity in mW/cm^2."""
    return math.sqrt(8 * math.pi * intensity * ERG_PER_S_CM2_PER_MW_CM2 / C_CGS)


def spontaneous_decay_rate(omega_si: float, dipole: float) -> float:
    """4 omega^3 |d|^2 / (3 hbar c^3) in s^-1 (omega in rad/s, dipole in statC*cm)."""
    return 4 * omega_si ** 3 * dipole ** 2 / (3 * HBAR_CGS * C_CGS ** 3)
