"""Output states of standard QI and of the controlled-superposition protocols.

Every superposed protocol produces, in the control basis {|0>, |1>},

    1/2 [[rho_qi, gamma*sigma], [gamma*sigma, rho_qi]]

so a protocol is fully described by its interference term ``sigma``.  The
canonical ``sigma`` constructions use the closed-form channels; the
``build_W_*`` / ``output_via_W`` path rebuilds the full controlled output
from composite Kraus operators and is kept as an independent check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .channels import (
    apply_loss_closed,
    apply_on_a,
    loss_kraus,
    thermal_kraus,
    thermal_reflect_closed,
)
from .errors import NumericalHealthError, ParameterError
from .linalg import DEFAULT_CLAMP, clamp_threshold, is_hermitian, partial_trace
from .states import probe_state, vacuum

PROTOCOLS = ("qi", "ico", "psde", "dco")


@dataclass(frozen=True)
class ProtocolParams:
    eta: float = 0.1
    n_thermal: float = 0.5
    p: float = 0.8
    dim: int = 10
    nt: float = 0.01
    gamma: float = 1.0
    beta_bitflip: float = 1.0

    def __post_init__(self):
        for name in ("eta", "p", "beta_bitflip"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ParameterError(f"{name} must lie in [0, 1], got {v}")
        if not -1.0 <= self.gamma <= 1.0:
            raise ParameterError(f"gamma must lie in [-1, 1], got {self.gamma}")
        if self.n_thermal < 0:
            raise ParameterError(f"thermal mean photon number must be >= 0, got {self.n_thermal}")
        if self.nt < 0:
            raise ParameterError(f"N_t must be >= 0, got {self.nt}")
        if self.dim < 2:
            raise ParameterError(f"truncation dimension must be >= 2, got {self.dim}")

    @classmethod
    def from_phase_flip(cls, beta_phase: float, **kw) -> "ProtocolParams":
        """Phase-flip no-error probability ``beta`` maps to ``gamma = 2 beta - 1``."""
        return cls(gamma=2.0 * beta_phase - 1.0, **kw)


@lru_cache(maxsize=64)
def _probe_matrix(nt: float, dim: int) -> np.ndarray:
    m = probe_state(nt, dim).matrix
    m.setflags(write=False)
    return m


def input_state(params: ProtocolParams) -> np.ndarray:
    return _probe_matrix(params.nt, params.dim)


# -- diagonal block ---------------------------------------------------------

def qi_output(params: ProtocolParams, eta_actual: float, rho: np.ndarray | None = None) -> np.ndarray:
    """Loss, then the target, then loss again."""
    rho = input_state(params) if rho is None else rho
    x = apply_loss_closed(params.p, rho)
    x = thermal_reflect_closed(eta_actual, params.n_thermal, x)
    return apply_loss_closed(params.p, x)


# -- interference terms -----------------------------------------------------

def _loss_ops(params: ProtocolParams) -> tuple[np.ndarray, ...]:
    return loss_kraus(params.p, params.dim).operators


def _nonzero(ops: Sequence[np.ndarray]) -> list[np.ndarray]:
    return [k for k in ops if np.any(k)]


def _check_hermitian(sigma: np.ndarray, what: str, tol: float = 1e-10) -> np.ndarray:
    if not is_hermitian(sigma, tol):
        dev = np.max(np.abs(sigma - sigma.conj().T))
        raise NumericalHealthError(f"{what} is not Hermitian (max deviation {dev:.2e})")
    return sigma


def sigma_ico(params: ProtocolParams, eta_actual: float, rho: np.ndarray | None = None) -> np.ndarray:
    """``sum_ij K_i E_eta(K_j rho K_i^dag) K_j^dag`` with the shared loss set."""
    rho = input_state(params) if rho is None else rho
    d = params.dim
    ks = _nonzero(_loss_ops(params))
    out = np.zeros_like(rho, dtype=complex)
    for ki in ks:
        for kj in ks:
            inner = apply_on_a(kj, rho, ki, d)
            inner = thermal_reflect_closed(eta_actual, params.n_thermal, inner)
            out += apply_on_a(ki, inner, kj, d)
    return _check_hermitian(out, "sigma_ico")


def sigma_psde(params: ProtocolParams, eta_actual: float, rho: np.ndarray | None = None) -> np.ndarray:
    # disjoint vacuum environments leave only the no-loss branch: p^2 E_eta(rho)
    rho = input_state(params) if rho is None else rho
    return params.p**2 * thermal_reflect_closed(eta_actual, params.n_thermal, rho)


def sigma_dco(
    params: ProtocolParams,
    eta_actual: float,
    rho: np.ndarray | None = None,
    path: str = "superoperator",
    dilation: str = "exchange",
    renormalize: bool = False,
) -> np.ndarray:
    """Interference term of definite order with a controlled D<->F swap.

    The two branches carry ``K_i K_jk K_l`` and ``K_l K_jk K_i``.  With
    ``path="superoperator"`` the target sum over ``jk`` is folded into the
    closed-form channel; ``path="kraus"`` keeps the explicit thermal Kraus
    operators (truncation-limited).
    """
    rho = input_state(params) if rho is None else rho
    d = params.dim
    ks = _nonzero(_loss_ops(params))
    out = np.zeros_like(rho, dtype=complex)
    if path == "superoperator":
        for kl in ks:          # first loss element acting on branch 0
            for ki in ks:      # last loss element acting on branch 0
                inner = apply_on_a(kl, rho, ki, d)
                inner = thermal_reflect_closed(eta_actual, params.n_thermal, inner)
                out += apply_on_a(ki, inner, kl, d)
    elif path == "kraus":
        tk = thermal_kraus(
            eta_actual, params.n_thermal, d, dilation=dilation, renormalize=renormalize
        ).operators
        for kl in ks:
            for ki in ks:
                inner = apply_on_a(kl, rho, ki, d)
                acc = np.zeros_like(inner)
                for e in tk:
                    acc += apply_on_a(e, inner, e, d)
                out += apply_on_a(ki, acc, kl, d)
    else:
        raise ParameterError(f"unknown sigma_dco path {path!r}")
    return _check_hermitian(out, "sigma_dco")


SIGMA_BUILDERS = {"ico": sigma_ico, "psde": sigma_psde, "dco": sigma_dco}


def sigma_for(protocol: str, params: ProtocolParams, eta_actual: float) -> np.ndarray:
    try:
        builder = SIGMA_BUILDERS[protocol]
    except KeyError:
        raise ParameterError(f"no interference term for protocol {protocol!r}") from None
    return builder(params, eta_actual)


# -- controlled output ------------------------------------------------------

def _check_psd(m: np.ndarray, what: str, clamp: float) -> None:
    w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    if w[0] < -clamp_threshold(w, clamp):
        raise NumericalHealthError(f"{what} is not positive semidefinite (min eigenvalue {w[0]:.3e})")


@dataclass(frozen=True)
class ControlledState:
    """``1/2 [[rho_qi, gamma sigma], [gamma sigma, rho_qi]]`` in the control basis."""

    rho_qi: np.ndarray
    sigma: np.ndarray
    gamma: float = 1.0

    @property
    def dim(self) -> int:
        return self.rho_qi.shape[0]

    def blocks(self) -> tuple[np.ndarray, np.ndarray]:
        """Half-weighted blocks ``(rho ± gamma sigma) / 2`` in the |±> basis."""
        gs = self.gamma * self.sigma
        return 0.5 * (self.rho_qi + gs), 0.5 * (self.rho_qi - gs)

    def full_matrix(self) -> np.ndarray:
        gs = self.gamma * self.sigma
        return 0.5 * np.block([[self.rho_qi, gs], [gs.conj().T, self.rho_qi]])

    def validate(self, clamp: float = DEFAULT_CLAMP) -> None:
        if not is_hermitian(self.rho_qi, 1e-10):
            raise NumericalHealthError("diagonal block is not Hermitian")
        if abs(np.trace(self.rho_qi).real - 1.0) > 1e-10:
            raise NumericalHealthError("diagonal block does not have unit trace")
        _check_hermitian(self.sigma, "interference term")
        plus, minus = self.blocks()
        _check_psd(plus, "block (rho + gamma sigma)/2", clamp)
        _check_psd(minus, "block (rho - gamma sigma)/2", clamp)


def assemble_controlled(
    rho_qi: np.ndarray, sigma: np.ndarray, gamma: float = 1.0, clamp: float = DEFAULT_CLAMP
) -> ControlledState:
    if not -1.0 <= gamma <= 1.0:
        raise ParameterError(f"gamma must lie in [-1, 1], got {gamma}")
    cs = ControlledState(rho_qi, sigma, float(gamma))
    cs.validate(clamp)
    return cs


def controlled_output(protocol: str, params: ProtocolParams, eta_actual: float) -> ControlledState:
    """Controlled output of ``protocol`` under hypothesis ``eta_actual``,
    with phase-flip coherence ``params.gamma`` and bit-flip ``params.beta_bitflip``."""
    rho = qi_output(params, eta_actual)
    sigma = sigma_for(protocol, params, eta_actual)
    cs = assemble_controlled(rho, sigma, params.gamma)
    if params.beta_bitflip < 1.0:
        cs = apply_bitflip(cs, params.beta_bitflip, params.dim)
    return cs


# -- composite Kraus (W) operators ------------------------------------------

@dataclass(frozen=True)
class ControlledKraus:
    """``|0><0| ⊗ branch0 ⊗ I_B + |1><1| ⊗ branch1 ⊗ I_B``; branches act on A."""

    branch0: np.ndarray
    branch1: np.ndarray
    label: tuple = ()

    def matrix(self, dim_b: int) -> np.ndarray:
        eye_b = np.eye(dim_b)
        p0 = np.diag([1.0, 0.0])
        p1 = np.diag([0.0, 1.0])
        return np.kron(p0, np.kron(self.branch0, eye_b)) + np.kron(p1, np.kron(self.branch1, eye_b))


def build_W_ico(
    params: ProtocolParams,
    eta_actual: float,
    r_max: int | None = None,
    dilation: str = "exchange",
    renormalize: bool = False,
) -> list[ControlledKraus]:
    """Branch 0 runs D, E, F; branch 1 runs F, E, D through the same environments."""
    ks = loss_kraus(params.p, params.dim).operators
    tk = thermal_kraus(eta_actual, params.n_thermal, params.dim, r_max, dilation, renormalize)
    ws = []
    for i, kf in enumerate(ks):
        for l, kd in enumerate(ks):
            if not (np.any(kf) and np.any(kd)):
                continue
            for lab, e in zip(tk.index, tk.operators):
                ws.append(ControlledKraus(kf @ e @ kd, kd @ e @ kf, (i, lab, l)))
    return ws


def build_W_psde(
    params: ProtocolParams,
    eta_actual: float,
    r_max: int | None = None,
    dilation: str = "exchange",
    renormalize: bool = False,
) -> list[ControlledKraus]:
    """Branch 0 runs D, E, Y; branch 1 runs F, E, X.  A branch only
    contributes when the other branch's private loss environments stay in vacuum."""
    ks = loss_kraus(params.p, params.dim).operators
    tk = thermal_kraus(eta_actual, params.n_thermal, params.dim, r_max, dilation, renormalize)
    zero = np.zeros_like(ks[0])
    n = len(ks)
    ws = []
    for i in range(n):
        for ip in range(n):
            for l in range(n):
                for lp in range(n):
                    on0 = ip == 0 and lp == 0
                    on1 = i == 0 and l == 0
                    if not (on0 or on1):
                        continue
                    if not ((on0 and np.any(ks[i]) and np.any(ks[l]))
                            or (on1 and np.any(ks[ip]) and np.any(ks[lp]))):
                        continue
                    for lab, e in zip(tk.index, tk.operators):
                        b0 = ks[i] @ e @ ks[l] if on0 else zero
                        b1 = ks[ip] @ e @ ks[lp] if on1 else zero
                        ws.append(ControlledKraus(b0, b1, (i, ip, lab, l, lp)))
    return ws


def control_blocks(full: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    n = full.shape[0] // 2
    return full[:n, :n], full[:n, n:], full[n:, :n], full[n:, n:]


def output_via_W(ws: Sequence[ControlledKraus], state: np.ndarray, dim_b: int) -> np.ndarray:
    """``sum_W W state W^dag`` for a state on control ⊗ A ⊗ B."""
    blocks = control_blocks(state)
    x = {(0, 0): blocks[0], (0, 1): blocks[1], (1, 0): blocks[2], (1, 1): blocks[3]}
    out = {key: np.zeros_like(val, dtype=complex) for key, val in x.items()}
    for w in ws:
        br = (w.branch0, w.branch1)
        for (a, b), xab in x.items():
            if np.any(br[a]) and np.any(br[b]):
                out[a, b] += apply_on_a(br[a], xab, br[b], dim_b)
    return np.block([[out[0, 0], out[0, 1]], [out[1, 0], out[1, 1]]])


def initial_controlled_state(params: ProtocolParams) -> np.ndarray:
    from .states import control_plus

    return np.kron(control_plus(), input_state(params))


# -- control-qubit bit flips ------------------------------------------------

def bitflip_error_state(rho_qi: np.ndarray, sigma: np.ndarray, dim_a: int | None = None) -> ControlledState:
    """Error branch of a bit-flipped control: the probe exits the unmeasured
    port, leaving ``|0><0|_A`` with the ancilla marginals of both blocks."""
    if dim_a is None:
        dim_a = math.isqrt(rho_qi.shape[0])
    dim_b = rho_qi.shape[0] // dim_a
    vac = vacuum(dim_a)
    rho_b = partial_trace(rho_qi, [dim_a, dim_b], keep=[1])
    sigma_b = partial_trace(sigma, [dim_a, dim_b], keep=[1])
    return ControlledState(np.kron(vac, rho_b), np.kron(vac, sigma_b), 1.0)


def apply_bitflip(cs: ControlledState, beta: float, dim_a: int | None = None) -> ControlledState:
    """``beta * cs + (1 - beta) * err`` folded back into a ``gamma = 1`` state."""
    if not 0.0 <= beta <= 1.0:
        raise ParameterError(f"bit-flip beta must lie in [0, 1], got {beta}")
    err = bitflip_error_state(cs.rho_qi, cs.gamma * cs.sigma, dim_a)
    rho = beta * cs.rho_qi + (1.0 - beta) * err.rho_qi
    sigma = beta * cs.gamma * cs.sigma + (1.0 - beta) * err.sigma
    return ControlledState(rho, sigma, 1.0)
