"""Quantum Chernoff quantities.

``Q_s(rho, rho') = Tr(rho^s rho'^(1-s))`` is convex in ``s``.  Each pair of
matrices is diagonalised once; afterwards a single ``Q_s`` evaluation costs
one matrix-vector product:

    Q_s = sum_ij a_i^s |<u_i|v_j>|^2 b_j^(1-s)
"""
from __future__ import annotations

import math
from typing import Callable, NamedTuple

import numpy as np

from .errors import ParameterError
from .linalg import DEFAULT_CLAMP, herm_eig, powered_eigenvalues, trace_norm_half

GRID_POINTS = 21
DEFAULT_TOL_S = 1e-6
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class ChernoffResult(NamedTuple):
    s_star: float
    q_min: float
    epsilon: float
    evaluations: int


def _neg_log(q: float) -> float:
    return math.inf if q <= 0.0 else -math.log(q)


class SpectralPair:
    """Cached eigen-data for ``s -> Tr(rho^s rho'^(1-s))``."""

    def __init__(self, rho: np.ndarray, rho_prime: np.ndarray, clamp: float = DEFAULT_CLAMP):
        if rho.shape != rho_prime.shape:
            raise ParameterError(f"shape mismatch {rho.shape} vs {rho_prime.shape}")
        ea = herm_eig(rho)
        eb = herm_eig(rho_prime)
        self.a = ea.eigenvalues
        self.b = eb.eigenvalues
        self.clamp = clamp
        self.overlap = np.abs(ea.eigenvectors.conj().T @ eb.eigenvectors) ** 2
        # surface negativity errors at construction time
        powered_eigenvalues(self.a, 1.0, clamp)
        powered_eigenvalues(self.b, 1.0, clamp)

    def __call__(self, s: float) -> float:
        if not 0.0 <= s <= 1.0:
            raise ParameterError(f"s must lie in [0, 1], got {s}")
        left = powered_eigenvalues(self.a, s, self.clamp)
        right = powered_eigenvalues(self.b, 1.0 - s, self.clamp)
        return float(left @ self.overlap @ right)


def q_s(rho: np.ndarray, rho_prime: np.ndarray, s: float, clamp: float = DEFAULT_CLAMP) -> float:
    return SpectralPair(rho, rho_prime, clamp)(s)


def minimize_convex_01(f: Callable[[float], float], tol_s: float = DEFAULT_TOL_S) -> tuple[float, float, int]:
    """Minimise a convex function on [0, 1]: uniform grid scan to bracket,
    then golden-section search.  Returns ``(s_star, f_min, evaluations)``."""
    grid = np.linspace(0.0, 1.0, GRID_POINTS)
    values = [f(float(s)) for s in grid]
    n_eval = len(values)
    k = int(np.argmin(values))
    best_s, best_f = float(grid[k]), values[k]

    lo = float(grid[max(k - 1, 0)])
    hi = float(grid[min(k + 1, GRID_POINTS - 1)])
    x1 = hi - INV_PHI * (hi - lo)
    x2 = lo + INV_PHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    n_eval += 2
    while hi - lo > tol_s:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - INV_PHI * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + INV_PHI * (hi - lo)
            f2 = f(x2)
        n_eval += 1
        for x, fx in ((x1, f1), (x2, f2)):
            if fx < best_f:
                best_s, best_f = x, fx
    return best_s, best_f, n_eval


def q_min(
    rho: np.ndarray, rho_prime: np.ndarray, tol_s: float = DEFAULT_TOL_S, clamp: float = DEFAULT_CLAMP
) -> ChernoffResult:
    pair = SpectralPair(rho, rho_prime, clamp)
    s, q, n = minimize_convex_01(pair, tol_s)
    return ChernoffResult(s, q, _neg_log(q), n)


def block_q_function(cs_eta, cs_0, clamp: float = DEFAULT_CLAMP) -> Callable[[float], float]:
    """``s -> Q_s`` of two block-diagonal controlled states, evaluated as the
    sum over the |+> and |-> blocks (each carries weight 1/2)."""
    if cs_eta.rho_qi.shape != cs_0.rho_qi.shape:
        raise ParameterError("controlled states have different dimensions")
    if cs_eta.gamma != cs_0.gamma:
        raise ParameterError(f"gamma mismatch: {cs_eta.gamma} vs {cs_0.gamma}")
    plus_eta, minus_eta = cs_eta.blocks()
    plus_0, minus_0 = cs_0.blocks()
    plus = SpectralPair(plus_eta, plus_0, clamp)
    minus = SpectralPair(minus_eta, minus_0, clamp)
    return lambda s: plus(s) + minus(s)


def epsilon_blocks(cs_eta, cs_0, tol_s: float = DEFAULT_TOL_S, clamp: float = DEFAULT_CLAMP) -> ChernoffResult:
    f = block_q_function(cs_eta, cs_0, clamp)
    s, q, n = minimize_convex_01(f, tol_s)
    return ChernoffResult(s, q, _neg_log(q), n)


def helstrom_single_copy(rho: np.ndarray, rho_prime: np.ndarray) -> float:
    """Minimum error probability for one copy with equal priors,
    ``(1 - tr|rho - rho'| / 2) / 2``."""
    return 0.5 * (1.0 - trace_norm_half(rho - rho_prime))


def g_s_deviation(
    rho: np.ndarray,
    rho_prime: np.ndarray,
    sigma: np.ndarray,
    sigma_prime: np.ndarray,
    s: float,
    clamp: float = DEFAULT_CLAMP,
) -> float:
    """Drop in ``Q_s`` caused by the interference terms ``sigma``, ``sigma'``."""
    base = q_s(rho, rho_prime, s, clamp)
    plus = q_s(rho + sigma, rho_prime + sigma_prime, s, clamp)
    minus = q_s(rho - sigma, rho_prime - sigma_prime, s, clamp)
    return base - 0.5 * plus - 0.5 * minus


def qcb_error_bound(epsilon: float, copies: int = 1, convention: str = "paper") -> float:
    """Chernoff-type upper bound on the M-copy error probability.

    ``"paper"``: ``exp(-M eps / 2)``; ``"standard"``: ``exp(-M eps) / 2``.
    """
    if copies < 1:
        raise ParameterError(f"copy count must be >= 1, got {copies}")
    if epsilon < 0:
        raise ParameterError(f"Chernoff exponent must be >= 0, got {epsilon}")
    if convention == "paper":
        return math.exp(-0.5 * copies * epsilon)
    if convention == "standard":
        return 0.5 * math.exp(-copies * epsilon)
    raise ParameterError(f"unknown bound convention {convention!r}")

