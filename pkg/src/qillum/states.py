"""Truncated Fock-space states: the photon-subtracted two-mode squeezed
probe, thermal states and the control qubit."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalHealthError, ParameterError, SolverError
from .linalg import is_hermitian, partial_trace

LAMBDA_MAX = 0.999
NT_TOL = 1e-10


@dataclass(frozen=True)
class StatePrepParams:
    lam: float
    dim: int
    renormalize: bool = True

    def __post_init__(self):
        if not 0.0 <= self.lam < 1.0:
            raise ParameterError(f"squeezing parameter must satisfy 0 <= lambda < 1, got {self.lam}")
        if self.dim < 1:
            raise ParameterError(f"truncation dimension must be positive, got {self.dim}")


@dataclass(frozen=True)
class BipartiteState:
    """Density operator on A ⊗ B in the Fock basis (A index slowest)."""

    dim_a: int
    dim_b: int
    matrix: np.ndarray

    def __post_init__(self):
        n = self.dim_a * self.dim_b
        if self.matrix.shape != (n, n):
            raise ParameterError(f"matrix shape {self.matrix.shape} != ({n}, {n})")

    def validate(self, tol: float = 1e-10, clamp: float = 1e-12) -> None:
        m = self.matrix
        if not is_hermitian(m, 1e-12):
            raise NumericalHealthError("state is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > tol:
            raise NumericalHealthError(f"state trace {tr!r} differs from 1")
        lo = np.linalg.eigvalsh(m)[0]
        if lo < -clamp:
            raise NumericalHealthError(f"state has negative eigenvalue {lo:.3e}")

    def reduced_a(self) -> np.ndarray:
        return partial_trace(self.matrix, [self.dim_a, self.dim_b], keep=[0])

    def reduced_b(self) -> np.ndarray:
        return partial_trace(self.matrix, [self.dim_a, self.dim_b], keep=[1])


def pstmss_coefficients(params: StatePrepParams) -> np.ndarray:
    lam = params.lam
    n = np.arange(params.dim, dtype=float)
    c = (1 - lam**2) ** 1.5 * (n + 1) * lam**n / np.sqrt(1 + lam**2)
    if params.renormalize:
        c = c / np.linalg.norm(c)
    return c


def pstmss_state(params: StatePrepParams) -> BipartiteState:
    d = params.dim
    c = pstmss_coefficients(params)
    psi = np.zeros(d * d, dtype=complex)
    psi[np.arange(d) * (d + 1)] = c  # |n>_A |n>_B sits at n*d + n
    return BipartiteState(d, d, np.outer(psi, psi.conj()))


def mean_photon_A(state: BipartiteState) -> float:
    diag = np.diag(state.reduced_a()).real
    return float(np.dot(np.arange(state.dim_a), diag))


def _mean_photon_for(lam: float, dim: int) -> float:
    # diagonal state: skip building the D^2 x D^2 projector
    c = pstmss_coefficients(StatePrepParams(lam, dim, True))
    return float(np.dot(np.arange(dim), c**2))


def solve_lambda_for_Nt(nt_target: float, dim: int, tol: float = NT_TOL) -> float:
    """Bisection for the squeezing parameter whose truncated, renormalised
    probe has ``<n_A> = nt_target``."""
    if nt_target < 0:
        raise ParameterError(f"target mean photon number must be >= 0, got {nt_target}")
    if nt_target == 0:
        return 0.0
    lo, hi = 0.0, LAMBDA_MAX
    if _mean_photon_for(hi, dim) < nt_target:
        raise SolverError(
            f"N_t = {nt_target} not reachable with lambda <= {LAMBDA_MAX} at D = {dim}"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = _mean_photon_for(mid, dim)
        if abs(val - nt_target) <= tol * 1e-2:
            return mid
        if val < nt_target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-16:
            break
    mid = 0.5 * (lo + hi)
    if abs(_mean_photon_for(mid, dim) - nt_target) > tol:
        raise SolverError(f"bisection for N_t = {nt_target} did not reach tolerance {tol}")
    return mid


def thermal_weights(n_mean: float, dim: int) -> np.ndarray:
    """Raw Bose-Einstein populations ``N^r / (N+1)^(r+1)`` for r < dim."""
    if n_mean < 0:
        raise ParameterError(f"thermal mean photon number must be >= 0, got {n_mean}")
    r = np.arange(dim, dtype=float)
    x = n_mean / (n_mean + 1.0)
    return x**r / (n_mean + 1.0)


def thermal_state(n_mean: float, dim: int, renormalize: bool = True) -> np.ndarray:
    w = thermal_weights(n_mean, dim)
    if renormalize:
        w = w / w.sum()
    return np.diag(w).astype(complex)


def vacuum(dim: int) -> np.ndarray:
    v = np.zeros((dim, dim), dtype=complex)
    v[0, 0] = 1.0
    return v


def control_plus() -> np.ndarray:
    return np.full((2, 2), 0.5, dtype=complex)


def probe_state(nt: float, dim: int) -> BipartiteState:
    """PSTMSS probe with the truncated mean photon number fixed to ``nt``."""
    lam = solve_lambda_for_Nt(nt, dim)
    return pstmss_state(StatePrepParams(lam, dim, True))


__all__ = [
    "BipartiteState",
    "StatePrepParams",
    "control_plus",
    "mean_photon_A",
    "probe_state",
    "pstmss_coefficients",
    "pstmss_state",
    "solve_lambda_for_Nt",
    "thermal_state",
    "thermal_weights",
    "vacuum",
]
