"""Reproducible random instances.

Positive definite matrices are Q diag(exp(u)) Q* with u uniform in
[-2, 2] and Q Haar-random unitary (orthogonal in the real case), so
condition numbers stay below e^4 and solver tests remain well posed.
"""

from __future__ import annotations

import numpy as np


def haar_unitary(n: int, rng: np.random.Generator, complex_: bool = True) -> np.ndarray:
    """Haar-distributed unitary (or orthogonal) matrix via QR."""
    Z = rng.normal(size=(n, n))
    if complex_:
        Z = Z + 1j * rng.normal(size=(n, n))
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R)
    return Q * (d / np.abs(d))


def random_pd(n: int, rng: np.random.Generator, complex_: bool = True) -> np.ndarray:
    """Random well-conditioned positive definite matrix."""
    Q = haar_unitary(n, rng, complex_)
    u = rng.uniform(-2.0, 2.0, size=n)
    M = (Q * np.exp(u)) @ Q.conj().T
    return (M + M.conj().T) / 2


def random_matrix(n: int, m: int, rng: np.random.Generator, complex_: bool = True) -> np.ndarray:
    """Random dense n x m matrix with standard normal entries."""
    K = rng.normal(size=(n, m))
    if complex_:
        K = K + 1j * rng.normal(size=(n, m))
    return K


def random_density(n: int, rng: np.random.Generator, complex_: bool = True) -> np.ndarray:
    """Random density matrix (PD, unit trace)."""
    M = random_pd(n, rng, complex_)
    return M / np.trace(M).real
