"""Loss and thermal-reflectivity channels on the probe mode A of A ⊗ B.

The closed forms are the canonical implementation.  They are linear, so they
act equally well on the non-Hermitian operands ``K_j rho K_i^dag`` that show up
inside the interference terms.  The Kraus forms exist for cross-validation
and for building controlled (superposed) channels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.linalg import expm

from .errors import DimensionError, ParameterError
from .linalg import partial_trace, spectral_norm
from .states import thermal_state, thermal_weights, vacuum


def _check_prob(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ParameterError(f"{name} must lie in [0, 1], got {value}")


def split_dims(x: np.ndarray, dims: Sequence[int] | None = None) -> tuple[int, int]:
    if dims is None:
        d = math.isqrt(x.shape[0])
        if d * d != x.shape[0]:
            raise DimensionError(f"cannot infer square A⊗B dims from shape {x.shape}")
        return d, d
    da, db = int(dims[0]), int(dims[1])
    if x.shape != (da * db, da * db):
        raise DimensionError(f"operand shape {x.shape} does not match dims ({da}, {db})")
    return da, db


def apply_on_a(left: np.ndarray, x: np.ndarray, right: np.ndarray, dim_b: int) -> np.ndarray:
    """``(L ⊗ I_B) x (R ⊗ I_B)^dag`` without forming the Kronecker products."""
    da = left.shape[0]
    n = da * dim_b
    t = (left @ x.reshape(da, -1)).reshape(da, dim_b, da, dim_b)
    t = np.matmul(t.transpose(0, 1, 3, 2), right.conj().T).transpose(0, 1, 3, 2)
    return t.reshape(n, n)


def sandwich(k: np.ndarray, x: np.ndarray, dim_b: int) -> np.ndarray:
    return apply_on_a(k, x, k, dim_b)


# -- closed forms -----------------------------------------------------------

def apply_loss_closed(p: float, x: np.ndarray, dims: Sequence[int] | None = None) -> np.ndarray:
    """``p x + (1-p) |0><0|_A ⊗ Tr_A x``."""
    _check_prob("survival probability p", p)
    da, db = split_dims(x, dims)
    if p == 1.0:
        return x.copy()
    reduced_b = partial_trace(x, [da, db], keep=[1])
    return p * x + (1.0 - p) * np.kron(vacuum(da), reduced_b)


def thermal_reflect_closed(
    eta: float,
    n_mean: float,
    x: np.ndarray,
    dims: Sequence[int] | None = None,
    renormalize: bool = True,
) -> np.ndarray:
    """``eta x + (1-eta) rho_th ⊗ Tr_A x`` for target reflectivity ``eta``."""
    _check_prob("reflectivity eta", eta)
    da, db = split_dims(x, dims)
    if eta == 1.0:
        return x.copy()
    reduced_b = partial_trace(x, [da, db], keep=[1])
    return eta * x + (1.0 - eta) * np.kron(thermal_state(n_mean, da, renormalize), reduced_b)


# -- Kraus forms ------------------------------------------------------------

@dataclass(frozen=True)
class KrausChannel:
    """Kraus operators acting on mode A (implicit ``⊗ I_B`` on the ancilla)."""

    operators: tuple[np.ndarray, ...]
    label: str
    index: tuple[tuple, ...] = field(default=())

    def __len__(self) -> int:
        return len(self.operators)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0] if self.operators else 0

    def completeness(self) -> np.ndarray:
        return sum(k.conj().T @ k for k in self.operators)

    def apply(self, x: np.ndarray, dim_b: int) -> np.ndarray:
        out = np.zeros_like(x, dtype=complex)
        for k in self.operators:
            out += sandwich(k, x, dim_b)
        return out


class CPTPReport(NamedTuple):
    passed: bool
    deviation: float


def loss_kraus(p: float, dim: int) -> KrausChannel:
    """``K_0 = sqrt(p) I`` and ``K_n = sqrt(1-p) |0><n-1|`` for ``1 <= n <= dim``."""
    _check_prob("survival probability p", p)
    ops = [math.sqrt(p) * np.eye(dim, dtype=complex)]
    for n in range(1, dim + 1):
        k = np.zeros((dim, dim), dtype=complex)
        k[0, n - 1] = math.sqrt(1.0 - p)
        ops.append(k)
    return KrausChannel(tuple(ops), f"loss(p={p})", tuple((n,) for n in range(dim + 1)))


def beam_splitter_unitary(eta: float, dim_a: int, dim_e: int) -> np.ndarray:
    """Truncated ``exp{theta (a_A a_E^dag - a_A^dag a_E)}`` with
    ``theta = arctan sqrt((1-eta)/eta)``; A is the slow factor."""
    if not 0.0 < eta <= 1.0:
        raise ParameterError(
            f"beam-splitter dilation needs 0 < eta <= 1 (got {eta}); use the closed form at eta = 0"
        )
    theta = math.atan(math.sqrt((1.0 - eta) / eta))
    a_a = np.diag(np.sqrt(np.arange(1, dim_a, dtype=float)), 1)
    a_e = np.diag(np.sqrt(np.arange(1, dim_e, dtype=float)), 1)
    gen = np.kron(a_a, a_e.T) - np.kron(a_a.T, a_e)
    return expm(theta * gen).astype(complex)


def thermal_kraus(
    eta: float,
    n_mean: float,
    dim: int,
    r_max: int | None = None,
    dilation: str = "exchange",
    renormalize: bool = False,
) -> KrausChannel:
    """Kraus operators ``K_{jr}`` of the thermal-reflectivity channel, labelled
    by environment output ``j`` and thermal input ``r < r_max``.

    ``dilation="exchange"``: the environment is the thermal mode plus a coin
    prepared in ``sqrt(eta)|keep> + sqrt(1-eta)|swap>``; the coin decides
    whether A is left alone or exchanged with the thermal mode.  Tracing out
    reproduces ``thermal_reflect_closed`` up to the thermal tail beyond
    ``r_max``.  Labels are ``(coin, j, r)``.

    ``dilation="beam_splitter"``: ``K_{jr} = sqrt(w_r) <j|_E V_AE |r>_E`` with
    the truncated beam-splitter unitary.  This is the physical attenuator;
    it transmits coherences with amplitude ``sqrt(eta)`` rather than
    ``eta`` and so only matches the closed form on diagonal, at-most-one-photon
    inputs with ``N = 0``.  Labels are ``(j, r)``.

    With ``renormalize`` the thermal weights are rescaled to sum to one, which
    makes the exchange dilation reproduce the (renormalised) closed form
    exactly instead of up to the tail ``(N/(N+1))**r_max``.
    """
    _check_prob("reflectivity eta", eta)
    r_max = dim if r_max is None else int(r_max)
    if not 1 <= r_max <= dim:
        raise ParameterError(f"r_max must lie in [1, {dim}], got {r_max}")
    w = thermal_weights(n_mean, r_max)
    if renormalize:
        w = w / w.sum()
    ops: list[np.ndarray] = []
    labels: list[tuple] = []

    if dilation == "exchange":
        eye = np.eye(dim, dtype=complex)
        for r in range(r_max):
            if w[r] > 0.0 and eta > 0.0:
                ops.append(math.sqrt(eta * w[r]) * eye)
                labels.append(("keep", r, r))
        for r in range(r_max):
            if w[r] == 0.0 or eta == 1.0:
                continue
            amp = math.sqrt((1.0 - eta) * w[r])
            for j in range(dim):
                k = np.zeros((dim, dim), dtype=complex)
                k[r, j] = amp
                ops.append(k)
                labels.append(("swap", j, r))
    elif dilation == "beam_splitter":
        v = beam_splitter_unitary(eta, dim, dim).reshape(dim, dim, dim, dim)  # [a', e', a, e]
        for j in range(dim):
            for r in range(r_max):
                if w[r] == 0.0:
                    continue
                ops.append(math.sqrt(w[r]) * v[:, j, :, r])
                labels.append((j, r))
    else:
        raise ParameterError(f"unknown dilation {dilation!r}")
    return KrausChannel(tuple(ops), f"thermal(eta={eta}, N={n_mean}, {dilation})", tuple(labels))


def cptp_check(ch: KrausChannel, tol: float = 1e-10) -> CPTPReport:
    """Spectral-norm distance of ``sum K^dag K`` from the identity."""
    if len(ch) == 0:
        return CPTPReport(False, math.inf)
    dev = spectral_norm(ch.completeness() - np.eye(ch.dim))
    return CPTPReport(dev <= tol, dev)
