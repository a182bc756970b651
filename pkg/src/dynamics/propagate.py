#!/usr/bin/env python3
"""
Krylov Propagation
ψ(t) = exp(-iHt)ψ0 by Arnoldi projection with full reorthogonalization,
a small dense matrix exponential and adaptive substeps.
"""

import math
from typing import List, Sequence, Tuple

import numpy as np
from scipy import sparse
from scipy.linalg import expm

from src.core.exceptions import ConfigurationError, NumericalError
from src.utils.logger import logger

from .hamiltonian import SparseHamiltonian

# Per-step residual tolerance
KRYLOV_TOL = 1e-10

# Allowed drift of ‖ψ(t)‖ from 1
NORM_DRIFT = 1e-8

KRYLOV_DIM = 30

# Step halvings before a step is declared failed
_MAX_HALVINGS = 50

# Relative size of a subdiagonal entry that signals an invariant subspace
_BREAKDOWN = 1e-14


def _arnoldi(matrix: sparse.csr_matrix, v: np.ndarray, m: int) -> Tuple[np.ndarray, np.ndarray, float, int]:
    """
    Orthonormal Krylov basis V and projection T = V*HV of dimension <= m.

    Returns:
        (V, T, h_next, dim): h_next is the norm of the residual direction, 0 on breakdown
    """
    n = len(v)
    V = np.zeros((n, m + 1), dtype=complex)
    T = np.zeros((m + 1, m), dtype=complex)
    beta = np.linalg.norm(v)
    V[:, 0] = v / beta
    scale = max(1.0, abs(matrix.diagonal()).max(initial=0.0))
    for j in range(m):
        w = matrix @ V[:, j]
        # two Gram-Schmidt passes keep V orthonormal to rounding
        for _ in range(2):
            coefficients = V[:, :j + 1].conj().T @ w
            w = w - V[:, :j + 1] @ coefficients
            T[:j + 1, j] += coefficients
        T[j + 1, j] = np.linalg.norm(w)
        if T[j + 1, j].real <= _BREAKDOWN * scale:
            return V[:, :j + 1], T[:j + 1, :j + 1], 0.0, j + 1
        V[:, j + 1] = w / T[j + 1, j]
    return V[:, :m], T[:m, :m], float(T[m, m - 1].real), m


def _step(matrix: sparse.csr_matrix, psi: np.ndarray, dt: float, tol: float,
          m: int) -> Tuple[np.ndarray, float]:
    """
    Advance by at most dt with the residual estimate below tol.

    Returns:
        (ψ, taken): the new state and the time step actually taken
    """
    beta = np.linalg.norm(psi)
    V, T, h_next, dim = _arnoldi(matrix, psi, m)
    e1 = np.zeros(dim, dtype=complex)
    e1[0] = 1.0
    error = math.inf
    for _ in range(_MAX_HALVINGS):
        small = expm(-1j * dt * T) @ e1
        # Saad's estimate: residual weight carried by the last Krylov direction
        error = beta * h_next * abs(small[-1])
        if error <= tol:
            return beta * (V @ small), dt
        dt *= 0.5
    raise NumericalError(f"Krylov step did not reach tolerance {tol:g} (estimate {error:.3g})",
                         achieved=error)


def propagate(H: SparseHamiltonian, psi0: np.ndarray, times: Sequence[float],
              tol: float = KRYLOV_TOL, krylov_dim: int = KRYLOV_DIM) -> List[np.ndarray]:
    """
    ψ(t) = exp(-iHt)ψ0 at each requested time.

    Args:
        H: Hermitian sparse Hamiltonian
        psi0: Normalized initial coefficient vector
        times: Nonnegative, nondecreasing output times
        tol: Per-step residual tolerance
        krylov_dim: Largest Krylov subspace dimension

    Returns:
        List[np.ndarray]: One coefficient vector per time

    Raises:
        ConfigurationError: If ψ0 is not normalized or times are not ordered
        NumericalError: If a step fails or the norm drifts by more than 1e-8
    """
    psi0 = np.asarray(psi0, dtype=complex)
    times = [float(t) for t in times]
    if psi0.shape != (H.size,):
        raise ConfigurationError(f"Initial vector of shape {psi0.shape} for a matrix of size {H.size}")
    if abs(np.linalg.norm(psi0) - 1.0) > NORM_DRIFT:
        raise ConfigurationError(f"Initial vector is not normalized: ‖ψ0‖ = {np.linalg.norm(psi0)!r}")
    if any(t < 0.0 for t in times) or any(b < a for a, b in zip(times, times[1:])):
        raise ConfigurationError(f"Times must be nonnegative and nondecreasing: {times}")

    if H.is_diagonal:
        diagonal = H.diagonal().real
        return [np.exp(-1j * diagonal * t) * psi0 for t in times]

    matrix = H.to_csr()
    m = max(1, min(krylov_dim, H.size))
    psi = psi0.copy()
    now = 0.0
    step = times[-1] if times else 0.0
    steps = 0
    out = []
    for t in times:
        while now < t:
            dt = min(step, t - now)
            psi, taken = _step(matrix, psi, dt, tol, m)
            now = t if taken == t - now else now + taken
            # grow again after a clean step
            step = taken if taken < dt else max(step, 2.0 * taken)
            steps += 1
        drift = abs(np.linalg.norm(psi) - 1.0)
        if drift > NORM_DRIFT:
            raise NumericalError(f"Norm drift {drift:.3g} at t={t:g} exceeds {NORM_DRIFT:g}", achieved=drift)
        out.append(psi.copy())
    logger.debug(f"Propagated size {H.size} to t={times[-1] if times else 0:g} in {steps} Krylov steps")
    return out
