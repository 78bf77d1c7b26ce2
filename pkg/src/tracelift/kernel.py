"""Dense Hermitian linear algebra and the numerical reference oracles.

Everything here works on plain complex numpy arrays.  ``HermitianMatrix``
is a thin validated wrapper used at API boundaries (JSON input, model
data); the oracles accept either the wrapper or a raw array.

All fractional powers go through an eigendecomposition; ``pd_tol`` is
relative to the largest eigenvalue magnitude.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    DimensionMismatch,
    DomainError,
    IoError,
    NotPositiveDefinite,
)

PD_TOL = 1e-10
IMAG_TOL = 1e-9


def _as_array(A) -> np.ndarray:
    if isinstance(A, HermitianMatrix):
        return A.mat
    return np.asarray(A, dtype=complex)


def hermitize(M) -> np.ndarray:
    """Return the Hermitian part (M + M*) / 2 as a complex array."""
    M = _as_array(M)
    return (M + M.conj().T) / 2


def real_trace(value: complex, tol: float = IMAG_TOL) -> float:
    """Discard the imaginary part of a trace that must be real."""
    if abs(value.imag) >= tol * (1 + abs(value.real)):
        raise DomainError(f"trace has non-negligible imaginary part {value.imag}")
    return float(value.real)


@dataclass(frozen=True)
class HermitianMatrix:
    """A dense n x n complex Hermitian matrix.

    The constructor symmetrizes its input, so ``mat`` is exactly
    Hermitian by construction.
    """

    mat: np.ndarray

    def __init__(self, entries):
        M = np.asarray(entries, dtype=complex)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise DimensionMismatch(f"expected a square matrix, got shape {M.shape}")
        object.__setattr__(self, "mat", (M + M.conj().T) / 2)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def min_eig(self) -> float:
        return float(np.linalg.eigvalsh(self.mat)[0])

    def is_psd(self, tol: float = PD_TOL) -> bool:
        return self.min_eig() >= -tol

    def is_pd(self, tol: float = PD_TOL) -> bool:
        return self.min_eig() >= tol

    @classmethod
    def from_json(cls, doc) -> "HermitianMatrix":
        """Build from ``{"dim": n, "re": [[...]], "im": [[...]]}``.

        ``im`` is optional and defaults to zero.  ``doc`` may be a dict,
        a JSON string or a file path.
        """
        if isinstance(doc, str):
            try:
                with open(doc) as fh:
                    doc = json.load(fh)
            except OSError as exc:
                raise IoError(str(exc)) from exc
        n = int(doc["dim"])
        re = np.asarray(doc["re"], dtype=float)
        im = np.asarray(doc.get("im", np.zeros((n, n))), dtype=float)
        if re.shape != (n, n) or im.shape != (n, n):
            raise DimensionMismatch(
                f"matrix entries do not match declared dim {n}: {re.shape}, {im.shape}"
            )
        return cls(re + 1j * im)

    def to_json(self) -> dict:
        doc = {"dim": self.dim, "re": self.mat.real.tolist()}
        if np.any(self.mat.imag != 0):
            doc["im"] = self.mat.imag.tolist()
        return doc


@dataclass(frozen=True)
class RationalExponent:
    """A reduced fraction p/q in [-1, 2] driving every construction."""

    p: int
    q: int

    def __init__(self, p: int, q: int = 1):
        if q == 0:
            raise DomainError("zero denominator")
        f = Fraction(p, q)
        if not (-1 <= f <= 2):
            raise DomainError(f"exponent {f} outside the representable range [-1, 2]")
        object.__setattr__(self, "p", f.numerator)
        object.__setattr__(self, "q", f.denominator)

    @classmethod
    def parse(cls, text: str) -> "RationalExponent":
        """Parse a 'p/q' or integer string; decimals are rejected."""
        parts = text.strip().split("/")
        try:
            if len(parts) == 1:
                return cls(int(parts[0]))
            if len(parts) == 2:
                return cls(int(parts[0]), int(parts[1]))
        except ValueError:
            pass
        raise DomainError(f"cannot parse rational exponent {text!r} (use p/q)")

    @classmethod
    def from_fraction(cls, f: Fraction) -> "RationalExponent":
        return cls(f.numerator, f.denominator)

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.p, self.q)

    @property
    def concave_range(self) -> bool:
        return 0 <= self.fraction <= 1

    @property
    def convex_range(self) -> bool:
        f = self.fraction
        return -1 <= f <= 0 or 1 <= f <= 2

    def __float__(self) -> float:
        return self.p / self.q

    def __str__(self) -> str:
        return f"{self.p}/{self.q}" if self.q != 1 else str(self.p)


def _eigh_pd(A: np.ndarray, pd_tol: float):
    w, U = np.linalg.eigh(A)
    scale = max(abs(w[0]), abs(w[-1]), 1e-300)
    if w[0] <= pd_tol * scale:
        raise NotPositiveDefinite(
            f"matrix is not positive definite (min eig {w[0]:.3e}, max {scale:.3e})"
        )
    return w, U


def herm_power(A, t: float, pd_tol: float = PD_TOL) -> np.ndarray:
    """Fractional power A^t of a Hermitian positive definite matrix."""
    A = hermitize(A)
    w, U = _eigh_pd(A, pd_tol)
    return hermitize(U @ np.diag(w ** float(t)) @ U.conj().T)


def herm_log(A, pd_tol: float = PD_TOL) -> np.ndarray:
    """Matrix logarithm of a Hermitian positive definite matrix."""
    A = hermitize(A)
    w, U = _eigh_pd(A, pd_tol)
    return hermitize(U @ np.diag(np.log(w)) @ U.conj().T)


def geometric_mean(A, B, t: float, pd_tol: float = PD_TOL) -> np.ndarray:
    """t-weighted geometric mean A^{1/2} (A^{-1/2} B A^{-1/2})^t A^{1/2}."""
    A = hermitize(A)
    B = hermitize(B)
    if A.shape != B.shape:
        raise DimensionMismatch(f"shapes {A.shape} and {B.shape} differ")
    w, U = _eigh_pd(A, pd_tol)
    Ah = U @ np.diag(np.sqrt(w)) @ U.conj().T
    Aih = U @ np.diag(1 / np.sqrt(w)) @ U.conj().T
    mid = herm_power(Aih @ B @ Aih, t, pd_tol)
    return hermitize(Ah @ mid @ Ah)


def kron(A, B) -> np.ndarray:
    """Kronecker product with [A (x) B]_{(i,k)(j,l)} = A_ij B_kl."""
    return np.kron(np.asarray(A, dtype=complex), np.asarray(B, dtype=complex))


def vec_rows(K) -> np.ndarray:
    """Concatenate the rows of K into one column vector."""
    return np.asarray(K, dtype=complex).reshape(-1, 1)


def lieb_value(K, A, B, t: float, pd_tol: float = PD_TOL) -> float:
    """tr[K* A^{1-t} K B^t] for PD A (n x n), PD B (m x m), K n x m."""
    K = np.asarray(K, dtype=complex)
    A = hermitize(A)
    B = hermitize(B)
    if K.shape != (A.shape[0], B.shape[0]):
        raise DimensionMismatch(
            f"K has shape {K.shape}, expected {(A.shape[0], B.shape[0])}"
        )
    Ap = herm_power(A, 1 - t, pd_tol)
    Bp = herm_power(B, t, pd_tol)
    return real_trace(np.trace(K.conj().T @ Ap @ K @ Bp))


def tsallis_entropy(A, t: float, pd_tol: float = PD_TOL) -> float:
    """Tsallis entropy (1/t) tr[A^{1-t} - A] for t in (0, 1]."""
    if not 0 < t <= 1:
        raise DomainError(f"Tsallis parameter t={t} outside (0, 1]")
    A = hermitize(A)
    _eigh_pd(A, pd_tol)
    return real_trace(np.trace(herm_power(A, 1 - t, pd_tol) - A)) / t


def tsallis_rel_entropy(A, B, t: float, pd_tol: float = PD_TOL) -> float:
    """Tsallis relative entropy (1/t) tr[A - A^{1-t} B^t] for t in (0, 1]."""
    if not 0 < t <= 1:
        raise DomainError(f"Tsallis parameter t={t} outside (0, 1]")
    A = hermitize(A)
    B = hermitize(B)
    if A.shape != B.shape:
        raise DimensionMismatch(f"shapes {A.shape} and {B.shape} differ")
    n = A.shape[0]
    return (real_trace(np.trace(A)) - lieb_value(np.eye(n), A, B, t, pd_tol)) / t


def von_neumann_entropy(A, pd_tol: float = PD_TOL) -> float:
    """-tr[A log A] via eigendecomposition."""
    return -real_trace(np.trace(hermitize(A) @ herm_log(A, pd_tol)))


def quantum_rel_entropy(A, B, pd_tol: float = PD_TOL) -> float:
    """tr[A (log A - log B)] via eigendecomposition."""
    A = hermitize(A)
    return real_trace(np.trace(A @ (herm_log(A, pd_tol) - herm_log(B, pd_tol))))


def upsilon_value(K, A, t: float, pd_tol: float = PD_TOL) -> float:
    """tr[(K* A^t K)^{1/t}] for PD A and t != 0.

    K* A^t K must be positive definite (K full column rank); a singular
    product raises NotPositiveDefinite rather than falling back to a
    pseudo-inverse.
    """
    if t == 0:
        raise DomainError("t = 0 is not in the domain")
    K = np.asarray(K, dtype=complex)
    A = hermitize(A)
    if K.shape[0] != A.shape[0]:
        raise DimensionMismatch(f"K has {K.shape[0]} rows, A is {A.shape[0]} x {A.shape[0]}")
    M = hermitize(K.conj().T @ herm_power(A, t, pd_tol) @ K)
    return real_trace(np.trace(herm_power(M, 1 / t, pd_tol)))


def fidelity_value(A, B, pd_tol: float = PD_TOL) -> float:
    """tr[(A^{1/2} B A^{1/2})^{1/2}] for PD A, B of equal dimension."""
    A = hermitize(A)
    B = hermitize(B)
    if A.shape != B.shape:
        raise DimensionMismatch(f"shapes {A.shape} and {B.shape} differ")
    Ah = herm_power(A, 0.5, pd_tol)
    return real_trace(np.trace(herm_power(Ah @ B @ Ah, 0.5, pd_tol)))


def floor_log2(q: int) -> int:
    """Largest l with 2^l <= q."""
    if q < 1:
        raise DomainError(f"positive integer expected, got {q}")
    return q.bit_length() - 1


def is_power_of_two(q: int) -> bool:
    return q >= 1 and q & (q - 1) == 0


def binary_expansion(p: int, ell: int) -> list:
    """Bits m_1..m_ell of p/2^ell with m_1 the least significant bit.

    Requires p odd and p < 2^ell, so m_1 = 1 always holds.
    """
    if p <= 0 or p % 2 == 0 or p >= 2**ell:
        raise DomainError(f"need odd p with p < 2^ell, got p={p}, ell={ell}")
    return [(p >> (i - 1)) & 1 for i in range(1, ell + 1)]
