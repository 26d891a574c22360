
import numpy as np
import pytest

from model import DensityMatrix, SystemParams


@pytest.fixture
def reference_params():
    """gamma = 0.9, omega_c = 0.56, omega_p = 0.5 with both fields on resonance."""
    return SystemParams(gamma=0.9, omega_c=0.56, omega_p=0.5, delta_c=0.0, delta_p=0.0)


@pytest.fixture
def off_resonance_params():
    return SystemParams(gamma=0.9, omega_c=0.56, omega_p=0.5, delta_c=0.0, delta_p=1.5)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_density_matrix(rng, rank=3):
    """Random full-rank (or lower-rank) state from a Wishart-like construction."""
    g = rng.normal(size=(3, rank)) + 1j * rng.normal(size=(3, rank))
    rho = g @ g.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho / np.trace(rho).real)


def random_params(rng, delta_c=None, nbar=False):
    return SystemParams(
        gamma=float(rng.uniform(0.1, 3.0)),
        omega_c=float(rng.uniform(0.05, 2.0)),
        omega_p=float(rng.uniform(0.05, 2.0)),
        delta_c=float(rng.uniform(-1, 1)) if delta_c is None else delta_c,
        delta_p=float(rng.uniform(-3, 3)),
        nbar12=float(rng.uniform(0, 0.5)) if nbar else 0.0,
        nbar13=float(rng.uniform(0, 0.5)) if nbar else 0.0,
    )


def rel_err(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


