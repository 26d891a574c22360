"""
Parameters, states and the rotating-frame Lindblad generator of the driven
Lambda system.

Levels: |1> is the excited state, |2> and |3> are the ground states. The
control field (Rabi frequency omega_c) drives 1<->2, the probe (omega_p)
drives 1<->3. Every rate and detuning is measured in units of gamma_13, and
time tau in units of 1/gamma_13.

Density matrices are vectorized row-major in the order
    (rho11, rho12, rho13, rho21, rho22, rho23, rho31, rho32, rho33)
which is also the row/column order of every 9x9 superoperator built here.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, Tuple

import numpy as np

from errors import InvalidParams, InvalidState

# StateVector9 indices
R11, R12, R13, R21, R22, R23, R31, R32, R33 = range(9)
POPULATION_INDICES = (R11, R22, R33)
# rho_ij -> rho_ji
CONJ_INDEX = np.array([R11, R21, R31, R12, R22, R32, R13, R23, R33])
TRACE_ROW = np.array([1, 0, 0, 0, 1, 0, 0, 0, 1], dtype=complex)

# A 9-component complex array in the order above.
StateVector9 = np.ndarray

EQUAL_GAP_TOL = 1e-12
# acos(r) loses half the digits near r = +-1 (degenerate pair, pure states)
TRIG_DEGENERACY_TOL = 1e-6


def thermal_occupation(calA: float) -> float:
    """Bose factor 1/(e^A - 1) for A = beta*hbar*omega_0; zero for A = inf."""
    if calA <= 0:
        raise InvalidParams(f"calA must be > 0, got {calA}")
    if math.isinf(calA):
        return 0.0
    return 1.0 / math.expm1(calA)


@dataclass(frozen=True)
class SystemParams:
    """
    Physical parameters of the Lambda system in gamma_13 units.

    gamma is the branching ratio gamma_12/gamma_13. calA only enters the
    equal-gap closed forms (through coth(calA/2) and the Bose factor); the
    generator itself reads nbar12/nbar13 directly.
    """

    gamma: float = 0.9
    omega_c: float = 0.56
    omega_p: float = 0.5
    delta_c: float = 0.0
    delta_p: float = 0.0
    nbar12: float = 0.0
    nbar13: float = 0.0
    calA: float = math.inf
    equal_gaps: bool = False

    def __post_init__(self) -> None:
        for name in ("gamma", "omega_c", "omega_p", "delta_c", "delta_p", "nbar12", "nbar13"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise InvalidParams(f"{name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise InvalidParams(f"{name} must be finite, got {value}")
        if self.gamma <= 0:
            raise InvalidParams(f"gamma must be > 0, got {self.gamma}")
        if self.omega_c < 0 or self.omega_p < 0:
            raise InvalidParams(
                f"Rabi frequencies must be >= 0, got omega_c={self.omega_c}, omega_p={self.omega_p}"
            )
        if self.nbar12 < 0 or self.nbar13 < 0:
            raise InvalidParams(
                f"thermal occupations must be >= 0, got nbar12={self.nbar12}, nbar13={self.nbar13}"
            )
        if not isinstance(self.calA, (int, float)) or isinstance(self.calA, bool):
            raise InvalidParams(f"calA must be a real number, got {self.calA!r}")
        if math.isnan(self.calA) or self.calA <= 0:
            raise InvalidParams(f"calA must be > 0, got {self.calA}")
        if not isinstance(self.equal_gaps, bool):
            raise InvalidParams(f"equal_gaps must be true or false, got {self.equal_gaps!r}")
        if self.equal_gaps:
            nbar = thermal_occupation(self.calA)
            if abs(self.nbar12 - nbar) > EQUAL_GAP_TOL or abs(self.nbar13 - nbar) > EQUAL_GAP_TOL:
                raise InvalidParams(
                    f"equal_gaps requires nbar12 == nbar13 == {nbar:.6g} for calA={self.calA}, "
                    f"got nbar12={self.nbar12}, nbar13={self.nbar13}"
                )

    @classmethod
    def with_equal_gaps(cls, calA: float, **fields: Any) -> "SystemParams":
        nbar = thermal_occupation(calA)
        return cls(nbar12=nbar, nbar13=nbar, calA=calA, equal_gaps=True, **fields)

    def xi(self) -> float:
        """Ratio omega_c/omega_p."""
        if self.omega_p <= 0:
            raise InvalidParams("xi = omega_c/omega_p is undefined for omega_p = 0")
        return self.omega_c / self.omega_p

    def replace(self, **changes: Any) -> "SystemParams":
        return replace(self, **changes)

    @property
    def has_thermal_photons(self) -> bool:
        return self.nbar12 > 0 or self.nbar13 > 0

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


def hermitian3_eigenvalues(matrix: np.ndarray) -> Tuple[float, float, float]:
    """
    Eigenvalues of a 3x3 Hermitian matrix, largest first, by the
    trigonometric solution of the characteristic cubic.

    Near a degenerate pair (|r| close to 1) the acos root is only accurate
    to about sqrt(eps); those matrices go through eigvalsh instead.
    """
    a = 0.5 * (np.asarray(matrix, dtype=complex) + np.asarray(matrix, dtype=complex).conj().T)
    off = abs(a[0, 1]) ** 2 + abs(a[0, 2]) ** 2 + abs(a[1, 2]) ** 2
    diag = a.diagonal().real
    if off == 0.0:
        e = sorted(diag.tolist(), reverse=True)
        return e[0], e[1], e[2]

    q = diag.sum() / 3.0
    p2 = float(((diag - q) ** 2).sum() + 2.0 * off)
    p = math.sqrt(p2 / 6.0)
    b = (a - q * np.eye(3)) / p
    r = float(np.linalg.det(b).real) / 2.0
    if abs(r) > 1.0 - TRIG_DEGENERACY_TOL:
        e = np.linalg.eigvalsh(a)
        return float(e[2]), float(e[1]), float(e[0])
    r = min(1.0, max(-1.0, r))
    phi = math.acos(r) / 3.0

    e1 = q + 2.0 * p * math.cos(phi)
    e3 = q + 2.0 * p * math.cos(phi + 2.0 * math.pi / 3.0)
    e2 = 3.0 * q - e1 - e3
    return e1, e2, e3


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """
    3x3 density matrix in the (|1>, |2>, |3>) basis.

    Validated on construction: Hermitian and unit trace within atol,
    smallest eigenvalue >= -psd_atol.
    """

    rho: np.ndarray
    atol: float = field(default=1e-12, repr=False)
    psd_atol: float = field(default=1e-10, repr=False)

    def __post_init__(self) -> None:
        rho = np.array(self.rho, dtype=complex)
        if rho.shape != (3, 3):
            raise InvalidState(f"density matrix must be 3x3, got shape {rho.shape}")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)
        self.check()

    def check(self) -> None:
        hermiticity = float(np.max(np.abs(self.rho - self.rho.conj().T)))
        trace_error = abs(complex(np.trace(self.rho)) - 1.0)
        min_eig = self.min_eigenvalue()
        if hermiticity > self.atol or trace_error > self.atol or min_eig < -self.psd_atol:
            raise InvalidState(
                f"invalid density matrix: |rho - rho^H| = {hermiticity:.3e}, "
                f"|Tr rho - 1| = {trace_error:.3e}, min eigenvalue = {min_eig:.3e}",
                hermiticity=hermiticity,
                trace_error=trace_error,
                min_eigenvalue=min_eig,
            )

    @classmethod
    def from_vector(cls, v: StateVector9, atol: float = 1e-12, psd_atol: float = 1e-10) -> "DensityMatrix":
        v = np.asarray(v, dtype=complex)
        if v.shape != (9,):
            raise InvalidState(f"state vector must have 9 components, got shape {v.shape}")
        return cls(v.reshape(3, 3), atol=atol, psd_atol=psd_atol)

    @classmethod
    def basis(cls, level: int) -> "DensityMatrix":
        """Projector |level><level| with level in {1, 2, 3}."""
        if level not in (1, 2, 3):
            raise InvalidState(f"level must be 1, 2 or 3, got {level}")
        rho = np.zeros((3, 3), dtype=complex)
        rho[level - 1, level - 1] = 1.0
        return cls(rho)

    @classmethod
    def from_ket(cls, psi: np.ndarray) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    def to_vector(self) -> StateVector9:
        return self.rho.reshape(9).copy()

    @property
    def populations(self) -> np.ndarray:
        return self.rho.diagonal().real.copy()

    def coherence(self, i: int, j: int) -> complex:
        """rho_ij with 1-based level labels."""
        return complex(self.rho[i - 1, j - 1])

    def real_part(self, i: int, j: int) -> float:
        return self.coherence(i, j).real

    def imag_part(self, i: int, j: int) -> float:
        return self.coherence(i, j).imag

    def min_eigenvalue(self) -> float:
        return hermitian3_eigenvalues(self.rho)[2]

    def distance(self, other: "DensityMatrix") -> float:
        return float(np.max(np.abs(self.rho - other.rho)))


@dataclass(frozen=True, eq=False)
class Superoperator:
    """
    9x9 generator, optionally carried as a jet in the counting field z.

    m has shape (z_order + 1, 9, 9): m[0] is the value at z = 0, m[1] the
    first z-derivative and m[2] the second.
    """

    m: np.ndarray
    z_order: int = 0

    def __post_init__(self) -> None:
        m = np.array(self.m, dtype=complex)
        if m.ndim == 2:
            m = m[np.newaxis]
        if m.shape != (self.z_order + 1, 9, 9):
            raise ValueError(f"expected shape {(self.z_order + 1, 9, 9)}, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    @property
    def matrix(self) -> np.ndarray:
        return self.m[0]

    def jet(self, row: int, col: int) -> np.ndarray:
        return self.m[:, row, col].copy()

    def apply(self, v: StateVector9) -> StateVector9:
        return self.m[0] @ np.asarray(v, dtype=complex)


def liouvillian_parts(params: SystemParams) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Split the generator as L(z) = L0 + e^z Lplus + e^-z Lminus.

    Lplus holds the two emission entries (rho22 and rho33 rows fed from
    rho11), Lminus the two thermal absorption entries (rho11 row fed from
    rho22 and rho33).
    """
    g = params.gamma
    wc, wp = params.omega_c, params.omega_p
    dc, dp = params.delta_c, params.delta_p
    n12, n13 = params.nbar12, params.nbar13

    a2 = 0.5 * (g * (2 * n12 + 1) + (n13 + 1))
    a3 = 0.5 * (g * (n12 + 1) + (2 * n13 + 1))
    a6 = 0.5 * (g * n12 + n13)

    lv = np.zeros((9, 9), dtype=complex)

    lv[R22, R11] = g * (n12 + 1)
    lv[R22, R12] = 1j * wc
    lv[R22, R21] = -1j * wc
    lv[R22, R22] = -g * n12

    lv[R33, R11] = n13 + 1
    lv[R33, R13] = 1j * wp
    lv[R33, R31] = -1j * wp
    lv[R33, R33] = -n13

    # trace conservation fixes the rho11 row
    lv[R11] = -(lv[R22] + lv[R33])

    lv[R12, R11] = -1j * wc
    lv[R12, R12] = 1j * dc - a2
    lv[R12, R22] = 1j * wc
    lv[R12, R32] = 1j * wp

    lv[R13, R11] = -1j * wp
    lv[R13, R13] = 1j * dp - a3
    lv[R13, R23] = 1j * wc
    lv[R13, R33] = 1j * wp

    lv[R23, R13] = 1j * wc
    lv[R23, R21] = -1j * wp
    lv[R23, R23] = 1j * (dp - dc) - a6

    for row in (R12, R13, R23):
        lv[CONJ_INDEX[row], CONJ_INDEX] = lv[row].conj()

    plus = np.zeros((9, 9), dtype=complex)
    minus = np.zeros((9, 9), dtype=complex)
    for row, col in ((R22, R11), (R33, R11)):
        plus[row, col] = lv[row, col]
    for row, col in ((R11, R22), (R11, R33)):
        minus[row, col] = lv[row, col]

    return lv - plus - minus, plus, minus


def build_liouvillian(params: SystemParams) -> Superoperator:
    l0, plus, minus = liouvillian_parts(params)
    return Superoperator(l0 + plus + minus, z_order=0)


def build_counting_liouvillian(params: SystemParams, order: int = 2) -> Superoperator:
    """Jet of L(z) at z = 0 up to the given order; e^{+-z} has jet (1, +-1, 1)."""
    if order not in (0, 1, 2):
        raise ValueError(f"order must be 0, 1 or 2, got {order}")
    l0, plus, minus = liouvillian_parts(params)
    jets = [l0 + plus + minus, plus - minus, plus + minus]
    return Superoperator(np.stack(jets[: order + 1]), z_order=order)


def liouvillian_at(params: SystemParams, z: complex) -> np.ndarray:
    """L(z) with the counting field substituted directly."""
    l0, plus, minus = liouvillian_parts(params)
    return l0 + np.exp(z) * plus + np.exp(-z) * minus


def _frame_phases(t: float, omega_c: float, omega_p: float) -> np.ndarray:
    return np.exp(-1j * np.array([omega_p, omega_p - omega_c, 0.0]) * t)


def frame_transform(rho_rot: DensityMatrix, t: float, omega_c: float, omega_p: float) -> DensityMatrix:
    """
    Rotating frame -> stationary frame at time t (1/gamma_13 units).

    rho12 picks up e^{-i omega_c t}, rho13 e^{-i omega_p t} and rho23
    e^{-i (omega_p - omega_c) t}; populations are unchanged.
    """
    u = _frame_phases(t, omega_c, omega_p)
    rho = u[:, None] * rho_rot.rho * u.conj()[None, :]
    return DensityMatrix(rho, atol=rho_rot.atol, psd_atol=rho_rot.psd_atol)


def inverse_frame_transform(rho: DensityMatrix, t: float, omega_c: float, omega_p: float) -> DensityMatrix:
    u = _frame_phases(t, omega_c, omega_p)
    rho_rot = u.conj()[:, None] * rho.rho * u[None, :]
    return DensityMatrix(rho_rot, atol=rho.atol, psd_atol=rho.psd_atol)
