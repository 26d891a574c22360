"""
Full counting statistics of the net number of photons emitted by the Lambda
system.

The counting field z dresses the emission (e^z) and thermal absorption
(e^-z) jumps of the generator. The coefficients a_n(z) of the secular
polynomial det(lambda I - L(z)) are obtained by the Faddeev-LeVerrier
recursion run in truncated Taylor (jet) arithmetic, which gives a_n, a_n'
and a_n'' at z = 0 in one pass. Implicit differentiation of
sum_n a_n(z) lambda_0(z)^n = 0 then yields

    J = -a0'/a1
    D = -(a0'' + 2 a1' J + 2 a2 J^2)/a1
    F = D/J

n_resolved_oracle() integrates the count-resolved master equation as an
independent brute-force check, and lambda0_track() follows the dominant
root numerically for finite-difference validation.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from dynamics import SteadyState, closed_form_denominator, steady_state, steady_state_closed_form
from errors import (
    DegenerateZeroEigenvalue,
    NewtonNonConvergence,
    OutOfValidityRegime,
    StepSizeUnderflow,
    TruncationTooSmall,
)
from model import (
    DensityMatrix,
    SystemParams,
    build_counting_liouvillian,
    liouvillian_at,
    liouvillian_parts,
)

logger = logging.getLogger(__name__)

DIM = 9
A1_MIN = 1e-12
CURRENT_MIN = 1e-12
TWO_PHOTON_TOL = 1e-9
TRACE_WARN = 1e12
IMAG_RTOL = 1e-9
NEWTON_MAX_ITER = 100
TRACK_STEP = 0.01
BOUNDARY_MAX = 1e-10


class CumulantMethod(str, Enum):
    SECULAR_FORMULA = "SecularFormula"
    CLOSED_FORM = "ClosedForm"
    CLOSED_FORM_LIMIT = "ClosedFormLimit"
    JET_LIMIT = "JetLimit"
    N_RESOLVED_ORACLE = "NResolvedOracle"
    UNDEFINED = "Undefined"


def _jet_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Product of two matrix jets (Leibniz rule), both shaped (k, n, n)."""
    out = np.zeros_like(a)
    for m in range(a.shape[0]):
        for j in range(m + 1):
            out[m] += math.comb(m, j) * (a[j] @ b[m - j])
    return out


def _faddeev_leverrier(jet: np.ndarray) -> Tuple[np.ndarray, float]:
    """
    Monic characteristic-polynomial coefficients of a matrix jet.

    Returns (coeffs, max_trace) where coeffs[n] is the jet of the
    coefficient of lambda^n, shaped (n + 1, k).
    """
    k, n, _ = jet.shape
    identity = np.eye(n, dtype=complex)
    coeffs = np.zeros((n + 1, k), dtype=complex)
    coeffs[n, 0] = 1.0
    m = np.zeros_like(jet)
    max_trace = 0.0
    for step in range(1, n + 1):
        m = _jet_matmul(jet, m) + coeffs[n - step + 1][:, None, None] * identity
        am = _jet_matmul(jet, m)
        traces = np.trace(am, axis1=1, axis2=2)
        max_trace = max(max_trace, float(np.max(np.abs(traces))))
        coeffs[n - step] = -traces / step
    return coeffs, max_trace


@dataclass(frozen=True, eq=False)
class CharPolyJets:
    """
    a[n] = (a_n(0), a_n'(0), a_n''(0)) for the monic polynomial
    det(lambda I - L(z)), n = 0..9.
    """

    a: np.ndarray
    warnings: Tuple[str, ...] = ()

    def value(self, n: int) -> complex:
        return complex(self.a[n, 0])

    def first(self, n: int) -> complex:
        return complex(self.a[n, 1])

    def second(self, n: int) -> complex:
        return complex(self.a[n, 2])

    def real(self) -> np.ndarray:
        return self.a.real.copy()


def char_poly_jets(params: SystemParams) -> CharPolyJets:
    jet = build_counting_liouvillian(params, order=2).m.copy()
    coeffs, max_trace = _faddeev_leverrier(jet)

    warnings = []
    if max_trace > TRACE_WARN:
        msg = f"Faddeev-LeVerrier intermediate trace {max_trace:.3e} exceeds {TRACE_WARN:.0e}"
        logger.warning(msg)
        warnings.append(msg)

    scale = float(np.max(np.abs(coeffs[:, 0])))
    imag_limit = IMAG_RTOL * np.abs(coeffs) + 1e-12 * scale
    if np.any(np.abs(coeffs.imag) > imag_limit):
        worst = float(np.max(np.abs(coeffs.imag)))
        msg = f"secular coefficients have imaginary parts up to {worst:.3e}; using real parts"
        logger.warning(msg)
        warnings.append(msg)
    return CharPolyJets(a=coeffs, warnings=tuple(warnings))


def char_poly_at(params: SystemParams, z: complex) -> np.ndarray:
    """Coefficients a_n(z) (lambda^n order) of det(lambda I - L(z))."""
    coeffs, _ = _faddeev_leverrier(liouvillian_at(params, z)[np.newaxis])
    return coeffs[:, 0]


def secular_coefficients_closed_form(params: SystemParams) -> Dict[str, float]:
    """
    Closed forms of a0', a0'', a1, a1', a2 at z = 0 for delta_c = 0 and no
    thermal photons, in the monic convention used by char_poly_jets.
    """
    if params.delta_c != 0 or params.has_thermal_photons:
        raise OutOfValidityRegime("secular closed forms need delta_c = 0 and nbar = 0")
    g = params.gamma
    c2, p2 = params.omega_c ** 2, params.omega_p ** 2
    d2 = params.delta_p ** 2
    d4 = d2 * d2
    g1 = g + 1

    a0 = g1 ** 3 * c2 * p2 * d2
    a1 = -g1 * (
        c2 * d4
        + (g1 * c2 * (g + 8 * p2 + 1) - 8 * c2 * c2 + g * g1 ** 2 * p2) * d2 / 4
        + (c2 + p2) ** 2 * (c2 + g * p2)
    )
    a1_d1 = g1 * (
        g * c2 * d4
        + (g * c2 * (g1 ** 2 - 8 * c2) + g1 * p2 * (20 * c2 + g + 1)) * d2 / 4
        + (c2 + p2) ** 2 * (g * c2 + p2)
    )
    a2 = (
        -4 * (8 * (g + 2) * c2 + g1 ** 3) * d4
        + (
            64 * (g + 2) * c2 * c2
            - 8 * c2 * (3 * g1 ** 2 + 4 * (6 * g + 7) * p2)
            - g1 * (g1 ** 4 + 8 * (4 * g + 1) * g1 * p2 + 16 * p2 * p2)
        )
        * d2
        - 4
        * (c2 + p2)
        * (
            8 * (g + 2) * c2 * c2
            + g1 * c2 * (g1 * (g + 5) + 24 * p2)
            + 8 * (2 * g + 1) * p2 * p2
            + g1 ** 2 * (5 * g + 1) * p2
        )
    ) / 16
    # printed expressions follow det(L - lambda I); flip to the monic sign
    return {"a0_d1": -a0, "a0_d2": -a0, "a1": -a1, "a1_d1": -a1_d1, "a2": -a2}


@dataclass(frozen=True)
class ChannelCurrents:
    """
    Net photon currents through the 1<->2 and 1<->3 channels, from the
    population balance and from the current-coherence relation.
    """

    j12: float
    j13: float
    j12_coherence: float
    j13_coherence: float

    @property
    def total(self) -> float:
        return self.j12 + self.j13

    @property
    def residual(self) -> float:
        return max(abs(self.j12 - self.j12_coherence), abs(self.j13 - self.j13_coherence))


def channel_currents(steady: SteadyState, params: SystemParams) -> ChannelCurrents:
    rho = steady.rho
    p1, p2, p3 = rho.populations
    g = params.gamma
    return ChannelCurrents(
        j12=g * (params.nbar12 + 1) * p1 - g * params.nbar12 * p2,
        j13=(params.nbar13 + 1) * p1 - params.nbar13 * p3,
        j12_coherence=2 * params.omega_c * rho.imag_part(1, 2),
        j13_coherence=2 * params.omega_p * rho.imag_part(1, 3),
    )


@dataclass(frozen=True)
class CumulantResult:
    j_ph: float
    d_ph: float
    fano: float
    j12: float
    j13: float
    method: CumulantMethod
    residual: float = 0.0
    warnings: Tuple[str, ...] = field(default=())


def _coth_half(calA: float) -> float:
    if math.isinf(calA):
        return 1.0
    return 1.0 / math.tanh(calA / 2)


def fano_resonance(gamma: float, xi: float, calA: float = math.inf) -> float:
    """Fano factor at two-photon resonance: coth(A/2) [1 + 2(1 + gamma xi^2)/(gamma + xi^2)]."""
    x2 = xi * xi
    return _coth_half(calA) * (1 + 2 * (1 + gamma * x2) / (gamma + x2))


def cumulants_secular(params: SystemParams, steady: Optional[SteadyState] = None) -> CumulantResult:
    """
    Current, diffusion and Fano factor from the secular-polynomial jets.

    At two-photon resonance without thermal photons J and D vanish and F is
    taken from its exact limit: the closed form for delta_c = 0, otherwise
    1 - 2 a1'/a1 (a0' and a0'' coincide when nothing is absorbed).

    steady may carry a null-space steady state already solved for params.

    Raises:
        DegenerateZeroEigenvalue: |a1(0)| <= 1e-12.
    """
    jets = char_poly_jets(params)
    a = jets.real()
    a1 = a[1, 0]
    if abs(a1) <= A1_MIN:
        raise DegenerateZeroEigenvalue(f"|a1(0)| = {abs(a1):.3e} for {params}", a1=jets.value(1))

    j = -a[0, 1] / a1
    d = -(a[0, 2] + 2 * a[1, 1] * j + 2 * a[2, 0] * j * j) / a1

    if steady is None:
        steady = steady_state(params)
    currents = channel_currents(steady, params)

    two_photon = abs(params.delta_p - params.delta_c) <= TWO_PHOTON_TOL and not params.has_thermal_photons
    if two_photon and params.delta_c == 0 and params.omega_c > 0 and params.omega_p > 0:
        fano = fano_resonance(params.gamma, params.xi())
        method = CumulantMethod.CLOSED_FORM_LIMIT
    elif two_photon:
        fano = 1 - 2 * a[1, 1] / a1
        method = CumulantMethod.JET_LIMIT
    elif abs(j) > CURRENT_MIN:
        fano = d / j
        method = CumulantMethod.SECULAR_FORMULA
    elif not params.has_thermal_photons:
        fano = 1 - 2 * a[1, 1] / a1 + 2 * a[2, 0] * a[0, 1] / (a1 * a1)
        method = CumulantMethod.JET_LIMIT
    else:
        logger.warning(f"Fano factor undefined: |J| = {abs(j):.3e} with thermal photons for {params}")
        fano = math.nan
        method = CumulantMethod.UNDEFINED

    if method is not CumulantMethod.SECULAR_FORMULA:
        logger.debug(f"resonance-limit Fano factor ({method.value}) for {params}")
    return CumulantResult(
        j_ph=j,
        d_ph=d,
        fano=fano,
        j12=currents.j12,
        j13=currents.j13,
        method=method,
        residual=steady.residual,
        warnings=jets.warnings,
    )


def coherence_sums(rho: DensityMatrix) -> Tuple[float, float]:
    """(R, I) = (2 sum (rho_ij^R)^2, 6 sum (rho_ij^I)^2) over the pairs i < j."""
    pairs = ((1, 2), (1, 3), (2, 3))
    real_sum = 2 * sum(rho.real_part(i, j) ** 2 for i, j in pairs)
    imag_sum = 6 * sum(rho.imag_part(i, j) ** 2 for i, j in pairs)
    return real_sum, imag_sum


def q_factor(params: SystemParams) -> float:
    """
    Correction q = 2 q_n / q_d to the Fano factor, q_d being the square of
    the closed-form steady-state denominator.
    """
    if params.delta_c != 0 or params.has_thermal_photons:
        raise OutOfValidityRegime(
            f"q factor needs delta_c = 0 and nbar = 0, got delta_c={params.delta_c}, "
            f"nbar12={params.nbar12}, nbar13={params.nbar13}"
        )
    g = params.gamma
    c2, p2 = params.omega_c ** 2, params.omega_p ** 2
    d2 = params.delta_p ** 2
    g1 = g + 1

    t8 = 16 * g * c2 ** 2 * d2 ** 4
    t6 = -8 * g * c2 * (8 * c2 ** 2 - (g1 ** 2 + 2 * p2) * c2 + g1 ** 2 * p2) * d2 ** 3
    t4 = (
        96 * g * c2 ** 4
        - 16 * g * c2 ** 3 * (g1 ** 2 - (g + 2) * p2)
        + g1 * c2 ** 2 * (g * g1 ** 3 + 4 * g * g1 * p2 - 32 * p2 ** 2)
        - 2 * g * c2 * p2 * (g1 ** 4 + 6 * g1 ** 2 * p2 + 16 * p2 ** 2)
        + g * g1 ** 4 * p2 ** 2
    ) * d2 ** 2
    t2 = -4 * (
        16 * g * c2 ** 5
        - 2 * g * c2 ** 4 * (g1 ** 2 - 2 * (2 * g + 7) * p2)
        + c2 ** 3 * p2 * (g * (-(g ** 3) + 3 * g + 2) + 4 * (3 * g ** 2 + g + 1) * p2)
        + 2 * c2 ** 2 * p2 ** 2 * ((g ** 2 + g + 1) * g1 ** 2 + 2 * ((g - 3) * g + 1) * p2)
        + c2 * p2 ** 3 * (g * (g * (2 * g + 3) - 4 * p2) - 1)
        - 2 * g * g1 ** 2 * p2 ** 4
    ) * d2
    t0 = 16 * (c2 + p2) ** 2 * (c2 + g * p2) * (g * c2 ** 3 + 2 * g * c2 ** 2 * p2 + 2 * c2 * p2 ** 2 + p2 ** 3)

    q_d = closed_form_denominator(params) ** 2
    return 2 * (t8 + t6 + t4 + t2 + t0) / q_d


def q_factor_resonant(gamma: float, xi: float) -> float:
    """q at delta_p = 0: 2(gamma xi^6 + 2 gamma xi^4 + 2 xi^2 + 1)/[(xi^2 + 1)^2 (xi^2 + gamma)]."""
    x2 = xi * xi
    return 2 * (gamma * x2 ** 3 + 2 * gamma * x2 ** 2 + 2 * x2 + 1) / ((x2 + 1) ** 2 * (x2 + gamma))


def fano_closed_form(params: SystemParams) -> float:
    """
    F = coth(A/2) [1 + R - I + q] for equal level gaps.

    The bracket uses the closed-form steady state without thermal photons;
    temperature only enters through coth(A/2).
    """
    if params.nbar12 != params.nbar13:
        raise OutOfValidityRegime(
            f"closed-form Fano factor needs equal gaps (nbar12 == nbar13), got {params.nbar12}, {params.nbar13}"
        )
    if params.delta_c != 0:
        raise OutOfValidityRegime(f"closed-form Fano factor needs delta_c = 0, got {params.delta_c}")
    cold = params.replace(nbar12=0.0, nbar13=0.0, equal_gaps=False)
    rho = steady_state_closed_form(cold).rho
    real_sum, imag_sum = coherence_sums(rho)
    return _coth_half(params.calA) * (1 + real_sum - imag_sum + q_factor(cold))


def _newton_root(coeffs: np.ndarray, start: complex, z: float) -> complex:
    poly = coeffs[::-1]
    dpoly = np.polyder(poly)
    lam = complex(start)
    for _ in range(NEWTON_MAX_ITER):
        step = np.polyval(poly, lam) / np.polyval(dpoly, lam)
        lam -= step
        if abs(step) <= 1e-13 * max(1.0, abs(lam)):
            return lam
    raise NewtonNonConvergence(
        f"Newton iteration for lambda_0 did not converge at z={z}", z=z, iterations=NEWTON_MAX_ITER
    )


def lambda0_track(params: SystemParams, z: float) -> complex:
    """
    Root lambda_0(z) of sum_n a_n(z) lambda^n that vanishes at z = 0,
    followed by Newton continuation in steps of at most 0.01 in z.
    """
    if abs(z) > 0.1:
        raise ValueError(f"lambda0_track needs |z| <= 0.1, got {z}")
    steps = max(1, math.ceil(abs(z) / TRACK_STEP))
    lam = 0j
    for zk in np.linspace(0.0, z, steps + 1)[1:]:
        lam = _newton_root(char_poly_at(params, zk), lam, float(zk))
    return lam


@dataclass(frozen=True, eq=False)
class OracleResult:
    taus: np.ndarray
    mean: np.ndarray
    var: np.ndarray
    norm: np.ndarray
    j_slope: float
    d_slope: float
    boundary_mass: float
    n_min: int
    n_max: int

    @property
    def fano(self) -> float:
        return self.d_slope / self.j_slope if abs(self.j_slope) > CURRENT_MIN else math.nan

    @property
    def norm_error(self) -> float:
        return float(np.max(np.abs(self.norm - 1.0)))


def n_resolved_oracle(
    params: SystemParams,
    tau_end: float = 200.0,
    n_max: int = 64,
    rho0: Optional[DensityMatrix] = None,
    n_samples: int = 401,
    rtol: float = 1e-9,
    atol: float = 1e-13,
) -> OracleResult:
    """
    Integrate the count-resolved master equation

        d rho(n)/d tau = L0 rho(n) + Lplus rho(n-1) + Lminus rho(n+1)

    on 2*n_max + 1 count slots, starting with rho0 (default: the steady
    state) at n = 0. Without thermal photons the count cannot decrease and
    the slots cover n = 0..2*n_max, otherwise n = -n_max..n_max.

    Raises:
        TruncationTooSmall: probability at an open window edge exceeds 1e-10.
    """
    if tau_end <= 0:
        raise ValueError(f"tau_end must be > 0, got {tau_end}")
    if rho0 is None:
        rho0 = steady_state(params).rho

    l0, plus, minus = liouvillian_parts(params)
    absorbing = params.has_thermal_photons
    n_slots = 2 * n_max + 1
    n_min = -n_max if absorbing else 0
    counts = np.arange(n_min, n_min + n_slots, dtype=float)

    l0_t, plus_t, minus_t = l0.T.copy(), plus.T.copy(), minus.T.copy()

    def rhs(_t: float, y: np.ndarray) -> np.ndarray:
        r = y.reshape(n_slots, DIM)
        out = r @ l0_t
        out[1:] += r[:-1] @ plus_t
        out[:-1] += r[1:] @ minus_t
        return out.reshape(-1)

    y0 = np.zeros((n_slots, DIM), dtype=complex)
    y0[-n_min] = rho0.to_vector()
    taus = np.linspace(0.0, tau_end, n_samples)

    sol = solve_ivp(rhs, (0.0, tau_end), y0.reshape(-1), method="DOP853", t_eval=taus, rtol=rtol, atol=atol)
    if sol.status == -1:
        tau = float(sol.t[-1]) if sol.t.size else 0.0
        raise StepSizeUnderflow(f"n-resolved integration stopped at tau={tau:.6g}: {sol.message}", tau=tau)

    states = sol.y.T.reshape(len(sol.t), n_slots, DIM)
    prob = (states[:, :, 0] + states[:, :, 4] + states[:, :, 8]).real
    norm = prob.sum(axis=1)
    mean = prob @ counts
    var = prob @ counts ** 2 - mean ** 2

    edge = prob[:, -1].copy()
    if absorbing:
        edge += prob[:, 0]
    boundary_mass = float(np.max(edge))
    if boundary_mass > BOUNDARY_MAX:
        raise TruncationTooSmall(
            f"probability {boundary_mass:.3e} reached the edge of the count window (n_max={n_max})",
            boundary_mass=boundary_mass,
            n_max=n_max,
        )

    late = sol.t >= tau_end / 2
    j_slope = float(np.polyfit(sol.t[late], mean[late], 1)[0])
    d_slope = float(np.polyfit(sol.t[late], var[late], 1)[0])
    logger.info(
        f"n-resolved oracle: J={j_slope:.8g}, D={d_slope:.8g}, boundary mass {boundary_mass:.2e}, "
        f"max norm error {float(np.max(np.abs(norm - 1))):.2e}"
    )
    return OracleResult(
        taus=np.asarray(sol.t),
        mean=mean,
        var=var,
        norm=norm,
        j_slope=j_slope,
        d_slope=d_slope,
        boundary_mass=boundary_mass,
        n_min=n_min,
        n_max=n_min + n_slots - 1,
    )
