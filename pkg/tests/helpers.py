"""Truncated Fock-space oracles used across test modules.

Everything here is built from ladder matrices alone so expected values
never come from the code under test.
"""
import math

import numpy as np


def annihilator(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1.0, dim)), 1)


def coherent_vec(alpha: complex, dim: int) -> np.ndarray:
    n = np.arange(dim)
    logfact = np.cumsum(np.log(np.maximum(n, 1)))
    amps = np.exp(-0.5 * abs(alpha) ** 2 + n * np.log(complex(alpha))
                  - 0.5 * logfact) if alpha != 0 else np.eye(dim)[0] * 1.0
    return np.asarray(amps, dtype=complex)


def squeezed_vec(r: float, dim: int) -> np.ndarray:
    vec = np.zeros(dim, dtype=complex)
    for n in range(dim // 2):
        vec[2 * n] = ((-math.tanh(r)) ** n
                      * math.sqrt(math.factorial(2 * n))
                      / (2 ** n * math.factorial(n)))
    return vec / math.sqrt(math.cosh(r))


def state_moment(vec: np.ndarray, j: int, k: int) -> complex:
    """<psi| a^dag^k a^j |psi> for a pure state vector."""
    a = annihilator(len(vec))
    left = np.linalg.matrix_power(a, k) @ vec
    right = np.linalg.matrix_power(a, j) @ vec
    return complex(np.vdot(left, right))


def density_moment(rho: np.ndarray, j: int, k: int) -> complex:
    """Tr[rho a^dag^k a^j]."""
    a = annihilator(rho.shape[0])
    op = np.linalg.matrix_power(a.conj().T, k) @ np.linalg.matrix_power(a, j)
    return complex(np.trace(rho @ op))


def thermal_density(nbar: float, dim: int) -> np.ndarray:
    n = np.arange(dim)
    p = (nbar / (1.0 + nbar)) ** n / (1.0 + nbar)
    return np.diag(p)


def loss_kraus(eta_intensity: float, dim: int) -> list[np.ndarray]:
    """Kraus operators of the lossy bosonic channel with intensity
    transmissivity eta_intensity."""
    ops = []
    for q in range(dim):
        mat = np.zeros((dim, dim))
        for n in range(q, dim):
            mat[n - q, n] = math.sqrt(
                math.comb(n, q) * eta_intensity ** (n - q)
                * (1.0 - eta_intensity) ** q)
        ops.append(mat)
    return ops
