"""
Time evolution and steady states of the Lambda-system master equation.

propagate() integrates d rho/d tau = L rho with scipy's adaptive Runge-Kutta
solvers; steady_state() solves L rho = 0 with the trace constraint in place
of the rho11 row; steady_state_closed_form() evaluates the analytic
stationary coherences available for delta_c = 0 and no thermal photons.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np
import scipy.linalg
from scipy.integrate import solve_ivp

from errors import DegenerateSteadyState, OutOfValidityRegime, StepSizeUnderflow
from model import R11, TRACE_ROW, DensityMatrix, SystemParams, build_liouvillian

logger = logging.getLogger(__name__)

RANK_RTOL = 1e-10
RESIDUAL_TOL = 1e-10
RAMAN_STEP = 1e-4
RAMAN_AGREEMENT = 1e-6
RESONANCE_TOL = 1e-12


class SolveMethod(str, Enum):
    NULL_SPACE = "NullSpace"
    CLOSED_FORM = "ClosedForm"


@dataclass(frozen=True, eq=False)
class SteadyState:
    rho: DensityMatrix
    method: SolveMethod
    residual: float


@dataclass(frozen=True, eq=False)
class Trajectory:
    taus: np.ndarray
    states: Tuple[DensityMatrix, ...]

    def __iter__(self) -> Iterator[Tuple[float, DensityMatrix]]:
        return iter(zip(self.taus.tolist(), self.states))

    def __len__(self) -> int:
        return len(self.states)

    @property
    def final(self) -> DensityMatrix:
        return self.states[-1]


@dataclass(frozen=True)
class RamanDerivative:
    """
    d rho13^R / d delta_p. analytic is (rho23^R)^2/omega_p, only available
    at two-photon resonance with delta_c = 0 and nbar = 0.
    """

    delta_p: float
    numeric: float
    analytic: Optional[float] = None

    @property
    def value(self) -> float:
        return self.analytic if self.analytic is not None else self.numeric


def _residual(params: SystemParams, rho: np.ndarray) -> float:
    lv = build_liouvillian(params).matrix
    return float(np.max(np.abs(lv @ rho.reshape(9))))


def propagate(
    rho0: DensityMatrix,
    params: SystemParams,
    tau_end: float,
    tol: float = 1e-10,
    rtol: float = 1e-9,
    atol: float = 1e-12,
    n_points: int = 201,
    method: str = "DOP853",
) -> Trajectory:
    """
    Integrate the 9-component master equation from tau = 0 to tau_end.

    Args:
        rho0: initial state (rotating frame)
        params: system parameters
        tau_end: final time in 1/gamma_13 units (> 0)
        tol: tolerance for the density-matrix checks on every emitted state
        rtol, atol: step-size controller tolerances
        n_points: number of equally spaced output times, tau_end included
        method: explicit scipy Runge-Kutta method (RK45 or DOP853)

    Raises:
        StepSizeUnderflow: the controller could not make progress.
    """
    if tau_end <= 0:
        raise ValueError(f"tau_end must be > 0, got {tau_end}")
    if method not in ("RK45", "DOP853"):
        raise ValueError(f"method must be an explicit Runge-Kutta scheme (RK45, DOP853), got {method}")

    lv = build_liouvillian(params).matrix
    t_eval = np.linspace(0.0, tau_end, max(n_points, 2))

    sol = solve_ivp(
        lambda _t, y: lv @ y,
        (0.0, tau_end),
        rho0.to_vector(),
        method=method,
        t_eval=t_eval,
        rtol=rtol,
        atol=atol,
    )
    if sol.status == -1:
        tau = float(sol.t[-1]) if sol.t.size else 0.0
        raise StepSizeUnderflow(f"integration stopped at tau={tau:.6g}: {sol.message}", tau=tau)

    states = tuple(
        DensityMatrix.from_vector(sol.y[:, k], atol=tol, psd_atol=tol) for k in range(sol.y.shape[1])
    )
    logger.debug(f"propagate: {len(states)} states to tau={tau_end}, nfev={sol.nfev}")
    return Trajectory(taus=np.asarray(sol.t), states=states)


def steady_state(params: SystemParams) -> SteadyState:
    """
    Null-space steady state: the rho11 row of L is replaced by the trace row
    and the system is solved against e_1.

    Raises:
        DegenerateSteadyState: numerical rank of L below 8.
    """
    lv = build_liouvillian(params).matrix
    sv = scipy.linalg.svdvals(lv)
    rank = int(np.sum(sv > RANK_RTOL * sv[0])) if sv[0] > 0 else 0
    if rank < 8:
        raise DegenerateSteadyState(
            f"generator rank {rank} < 8, steady state is not unique for {params}", rank=rank
        )

    augmented = lv.copy()
    augmented[R11] = TRACE_ROW
    rhs = np.zeros(9, dtype=complex)
    rhs[R11] = 1.0
    try:
        v = scipy.linalg.solve(augmented, rhs)
    except np.linalg.LinAlgError as exc:
        raise DegenerateSteadyState(f"augmented generator is singular for {params}", rank=rank) from exc

    rho = v.reshape(3, 3)
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    residual = _residual(params, rho)
    if residual > RESIDUAL_TOL:
        logger.warning(f"steady-state residual {residual:.3e} exceeds {RESIDUAL_TOL:g} for {params}")
    return SteadyState(DensityMatrix(rho), SolveMethod.NULL_SPACE, residual)


def _require_closed_form_regime(params: SystemParams) -> None:
    if params.delta_c != 0 or params.has_thermal_photons:
        raise OutOfValidityRegime(
            f"closed forms need delta_c = 0 and nbar12 = nbar13 = 0, got delta_c={params.delta_c}, "
            f"nbar12={params.nbar12}, nbar13={params.nbar13}"
        )
    if params.omega_c <= 0 or params.omega_p <= 0:
        raise OutOfValidityRegime(
            f"closed forms need omega_c, omega_p > 0, got {params.omega_c}, {params.omega_p}"
        )


def closed_form_denominator(params: SystemParams) -> float:
    """Common denominator of the closed-form stationary density matrix."""
    _require_closed_form_regime(params)
    g = params.gamma
    c2, p2 = params.omega_c ** 2, params.omega_p ** 2
    d2 = params.delta_p ** 2
    return (
        4 * c2 * d2 * d2
        + (g * (g + 1) ** 2 * p2 + (g + 1) * (g + 1 + 8 * p2) * c2 - 8 * c2 * c2) * d2
        + 4 * (c2 + p2) ** 2 * (c2 + g * p2)
    )


def closed_form_elements(params: SystemParams) -> Dict[str, float]:
    """Populations and real/imaginary coherence parts (i < j) in closed form."""
    g = params.gamma
    wc, wp, d = params.omega_c, params.omega_p, params.delta_p
    c2, p2, d2 = wc * wc, wp * wp, d * d
    den = closed_form_denominator(params)
    s = (c2 + p2) * (c2 + g * p2)

    return {
        "rho11": 4 * (g + 1) * c2 * p2 * d2 / den,
        "rho22": p2 * (g * ((g + 1) ** 2 + 4 * c2) * d2 + 4 * s) / den,
        "rho33": c2 * (4 * d2 * d2 + ((g + 1) ** 2 - 8 * c2 + 4 * p2) * d2 + 4 * s) / den,
        "rho12_re": -4 * wc * p2 * (c2 + g * p2) * d / den,
        "rho12_im": 2 * g * (g + 1) * wc * p2 * d2 / den,
        "rho13_re": 4 * c2 * wp * (c2 + g * p2 - d2) * d / den,
        "rho13_im": 2 * (g + 1) * c2 * wp * d2 / den,
        "rho23_re": 4 * wc * wp * (c2 * d2 - s) / den,
        "rho23_im": -2 * (g + 1) * (c2 + g * p2) * wc * wp * d / den,
    }


def steady_state_closed_form(params: SystemParams) -> SteadyState:
    """
    Analytic steady state for delta_c = 0, nbar12 = nbar13 = 0 and both
    Rabi frequencies nonzero.
    """
    _require_closed_form_regime(params)
    e = closed_form_elements(params)
    r12 = complex(e["rho12_re"], e["rho12_im"])
    r13 = complex(e["rho13_re"], e["rho13_im"])
    r23 = complex(e["rho23_re"], e["rho23_im"])
    rho = np.array(
        [
            [e["rho11"], r12, r13],
            [r12.conjugate(), e["rho22"], r23],
            [r13.conjugate(), r23.conjugate(), e["rho33"]],
        ],
        dtype=complex,
    )
    return SteadyState(DensityMatrix(rho), SolveMethod.CLOSED_FORM, _residual(params, rho))


def _rho13_real(params: SystemParams) -> float:
    return steady_state(params).rho.real_part(1, 3)


def _central_difference(params: SystemParams, h: float) -> float:
    up = _rho13_real(params.replace(delta_p=params.delta_p + h))
    down = _rho13_real(params.replace(delta_p=params.delta_p - h))
    return (up - down) / (2 * h)


def raman_derivative(params: SystemParams, h: float = RAMAN_STEP) -> RamanDerivative:
    """
    d rho13^R / d delta_p, taken at fixed omega_13.

    The numeric value is a central difference with one Richardson level and
    works for any parameters with a unique steady state. At two-photon
    resonance (delta_c = 0, nbar = 0) the analytic value (rho23^R)^2/omega_p
    is returned alongside.
    """
    coarse = _central_difference(params, h)
    fine = _central_difference(params, h / 2)
    numeric = (4 * fine - coarse) / 3

    analytic = None
    at_resonance = abs(params.delta_p) <= RESONANCE_TOL and params.delta_c == 0
    if at_resonance and not params.has_thermal_photons and params.omega_p > 0 and params.omega_c > 0:
        rho23_re = steady_state_closed_form(params.replace(delta_p=0.0)).rho.real_part(2, 3)
        analytic = rho23_re ** 2 / params.omega_p
        if abs(numeric - analytic) > RAMAN_AGREEMENT * abs(analytic):
            logger.warning(
                f"Raman derivative mismatch at resonance: numeric={numeric:.12g}, analytic={analytic:.12g}"
            )

    return RamanDerivative(delta_p=params.delta_p, numeric=numeric, analytic=analytic)


def coherence_phases(rho: DensityMatrix) -> Dict[str, float]:
    """Phase angles theta_ij = atan2(rho_ij^I, rho_ij^R) for i < j."""
    phases = {}
    for i, j in ((1, 2), (1, 3), (2, 3)):
        c = rho.coherence(i, j)
        phases[f"theta{i}{j}"] = math.atan2(c.imag, c.real)
    return phases


def stationary_states(params: SystemParams, initial: List[DensityMatrix], tau_end: float = 300.0) -> List[DensityMatrix]:
    """Final states of propagate() from several initial states."""
    return [propagate(rho0, params, tau_end, n_points=2).final for rho0 in initial]
