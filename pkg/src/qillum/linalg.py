"""Dense complex-matrix kernel.

Matrices are plain 2-D ``numpy`` arrays.  Composite indices are row-major
with the leftmost tensor factor varying slowest, so an operator on
``control ⊗ A ⊗ B`` is indexed ``(c * dA + a) * dB + b``.
"""
from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .errors import DimensionError, NumericalHealthError, ParameterError

HERMITIAN_TOL = 1e-10
DEFAULT_CLAMP = 1e-12


class EigDecomposition(NamedTuple):
    eigenvalues: np.ndarray   # real, ascending
    eigenvectors: np.ndarray  # unitary, columns


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(a, b)


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol)


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def partial_trace(m: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    ``dims`` lists the subsystem dimensions, leftmost slowest.  The kept
    subsystems stay in their original order.
    """
    dims = [int(d) for d in dims]
    total = int(np.prod(dims))
    if m.shape != (total, total):
        raise DimensionError(f"matrix of shape {m.shape} does not match dims {dims}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise DimensionError(f"keep indices {keep} out of range for {len(dims)} subsystems")

    n = len(dims)
    t = m.reshape(dims + dims)
    traced = [i for i in range(n) if i not in keep]
    # contract traced axes pairwise, highest first so remaining axis numbers stay valid
    for offset, i in enumerate(sorted(traced, reverse=True)):
        cur_n = n - offset
        t = np.trace(t, axis1=i, axis2=i + cur_n)
    d_keep = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(d_keep, d_keep)


def herm_eig(m: np.ndarray, tol: float = HERMITIAN_TOL) -> EigDecomposition:
    scale = max(1.0, float(np.max(np.abs(m), initial=0.0)))
    if not is_hermitian(m, tol * scale):
        raise NumericalHealthError(
            f"herm_eig needs a Hermitian matrix; max|M - M^dag| = "
            f"{np.max(np.abs(m - m.conj().T)):.3e}"
        )
    h = 0.5 * (m + m.conj().T)
    w, v = np.linalg.eigh(h)
    return EigDecomposition(w, v)


def clamp_threshold(eigenvalues: np.ndarray, clamp: float) -> float:
    # absolute for matrices of norm <= 1 (all density blocks here), relative above
    top = float(np.max(np.abs(eigenvalues), initial=0.0))
    return clamp * max(1.0, top)


def powered_eigenvalues(w: np.ndarray, s: float, clamp: float = DEFAULT_CLAMP) -> np.ndarray:
    """``w**s`` with the support convention ``0**s := 0`` (also at ``s == 0``).

    Raises if any eigenvalue is more negative than the clamp allows.
    """
    thr = clamp_threshold(w, clamp)
    if w.size and w[0] < -thr:
        raise NumericalHealthError(
            f"matrix is not positive semidefinite: smallest eigenvalue {w[0]:.3e} < -{thr:.1e}"
        )
    out = np.zeros_like(w, dtype=float)
    support = w > thr
    out[support] = w[support] ** s
    return out


def mat_pow_s(m: np.ndarray, s: float, clamp: float = DEFAULT_CLAMP) -> np.ndarray:
    """Fractional power of a PSD matrix, restricted to its numerical support."""
    if not 0.0 <= s <= 1.0:
        raise ParameterError(f"exponent s must lie in [0, 1], got {s}")
    w, v = herm_eig(m)
    return (v * powered_eigenvalues(w, s, clamp)) @ v.conj().T


def trace_norm_half(m: np.ndarray) -> float:
    """Half the sum of singular values, i.e. ``tr|A| / 2``."""
    if is_hermitian(m, 1e-13):
        w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
        return 0.5 * float(np.sum(np.abs(w)))
    return 0.5 * float(np.sum(np.linalg.svd(m, compute_uv=False)))


def spectral_norm(m: np.ndarray) -> float:
    if m.size == 0:
        return 0.0
    return float(np.linalg.svd(m, compute_uv=False)[0])
