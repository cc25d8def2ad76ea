"""Acceptance checks, one function per criterion.

Each check returns a :class:`CheckResult`; nothing here raises on a failed
criterion, so ``qillum verify`` and the test suite can print every line.
Sweeps shared by several checks are computed once through :class:`Sweeps`.
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .channels import (
    apply_loss_closed,
    cptp_check,
    loss_kraus,
    thermal_kraus,
    thermal_reflect_closed,
)
from .chernoff import (
    SpectralPair,
    g_s_deviation,
    helstrom_single_copy,
    minimize_convex_01,
    q_min,
    q_s,
    qcb_error_bound,
)
from .experiments import SweepSpec, exponents, format_csv, run_sweep, COLUMNS
from .protocols import (
    ProtocolParams,
    apply_bitflip,
    assemble_controlled,
    build_W_ico,
    build_W_psde,
    control_blocks,
    initial_controlled_state,
    input_state,
    output_via_W,
    qi_output,
    sigma_dco,
    sigma_ico,
    sigma_psde,
)
from .states import StatePrepParams, pstmss_state, thermal_state

CONVERGENCE_BUDGET_S = 120.0
NORM_RATIO_BUDGET_S = 60.0
PROTOCOL_KEYS = ("qi", "psde", "ico")


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] criterion {self.number:2d} {self.name}: {self.detail}"


@dataclass
class Sweeps:
    """Lazily computed sweep rows shared between checks."""

    jobs: int = 1
    _rows: dict = field(default_factory=dict)
    _elapsed: dict = field(default_factory=dict)

    def rows(self, figure: str, **overrides) -> list[dict]:
        key = (figure, tuple(sorted(overrides.items())))
        if key not in self._rows:
            base = ProtocolParams(**overrides)
            if figure == "gamma-sweep" and "eta" not in overrides:
                base = replace(base, eta=0.05)
            t0 = time.perf_counter()
            self._rows[key] = run_sweep(SweepSpec(figure, base, jobs=self.jobs))
            self._elapsed[key] = time.perf_counter() - t0
        return self._rows[key]

    def elapsed(self, figure: str, **overrides) -> float:
        self.rows(figure, **overrides)
        return self._elapsed[(figure, tuple(sorted(overrides.items())))]


def _fmt(x: float) -> str:
    return f"{x:.3g}"


# -- 1 ----------------------------------------------------------------------

def check_convergence(sweeps: Sweeps) -> CheckResult:
    rows = {r["dim"]: r for r in sweeps.rows("convergence")}
    elapsed = sweeps.elapsed("convergence")
    changes = {
        k: abs(rows[10][f"epsilon_{k}"] - rows[14][f"epsilon_{k}"]) / rows[10][f"epsilon_{k}"]
        for k in PROTOCOL_KEYS
    }
    worst = max(changes.values())
    ok = worst < 0.01 and elapsed < CONVERGENCE_BUDGET_S
    detail = ", ".join(f"{k} {_fmt(v)}" for k, v in changes.items())
    return CheckResult(1, "convergence D=10 vs D=14", ok,
                       f"rel change {detail} (< 1e-2); sweep {elapsed:.1f}s (< {CONVERGENCE_BUDGET_S:.0f}s, jobs={sweeps.jobs})")


# -- 2 ----------------------------------------------------------------------

def check_norm_ratio(sweeps: Sweeps) -> CheckResult:
    rows = sweeps.rows("norm-ratio")
    elapsed = sweeps.elapsed("norm-ratio")
    at_09 = [r["ratio"] for r in rows if r["p"] == 0.9]
    in_band = all(0.75 <= x <= 0.85 for x in at_09)
    below_one = all(r["ratio"] < 1.0 for r in rows)
    monotone = True
    for eta in sorted({r["eta"] for r in rows}):
        series = [r["ratio"] for r in rows if r["eta"] == eta]  # rows sorted by (eta, p)
        monotone &= all(b >= a - 1e-12 for a, b in zip(series, series[1:]))
    spread = max(
        max(r["ratio"] for r in rows if r["p"] == p) - min(r["ratio"] for r in rows if r["p"] == p)
        for p in {r["p"] for r in rows}
    )
    ok = in_band and below_one and monotone and spread < 0.02 and elapsed < NORM_RATIO_BUDGET_S
    return CheckResult(2, "spectral-norm ratio", ok,
                       f"ratio(p=0.9) {[round(x, 4) for x in at_09]} in [0.75, 0.85]: {in_band}; "
                       f"all < 1: {below_one}; nondecreasing in p: {monotone}; "
                       f"eta spread {_fmt(spread)} (< 0.02); {elapsed:.1f}s (< {NORM_RATIO_BUDGET_S:.0f}s)")


# -- 3 ----------------------------------------------------------------------

def check_advantage(sweeps: Sweeps) -> CheckResult:
    rows = sweeps.rows("eps-vs-p") + sweeps.rows("eps-vs-eta")
    worst = min(min(r["epsilon_ico"], r["epsilon_psde"]) - r["epsilon_qi"] for r in rows)
    return CheckResult(3, "advantage over QI", worst >= -1e-9,
                       f"min(eps_u - eps_qi) = {_fmt(worst)} over {len(rows)} points (>= -1e-9)")


# -- 4 ----------------------------------------------------------------------

def check_ico_vs_psde(sweeps: Sweeps) -> CheckResult:
    rows = [r for r in sweeps.rows("eps-vs-p") if r["p"] <= 0.6 + 1e-12]
    worst = min(r["epsilon_ico"] - r["epsilon_psde"] for r in rows)
    return CheckResult(4, "ICO >= PS-DE for p <= 0.6", worst >= -1e-9,
                       f"min(eps_ico - eps_psde) = {_fmt(worst)} over {len(rows)} points (>= -1e-9)")


# -- 5 ----------------------------------------------------------------------

def check_eta_monotone(sweeps: Sweeps) -> CheckResult:
    rows = sweeps.rows("eps-vs-eta")
    worst_step = math.inf
    worst_zero = 0.0
    for p in sorted({r["p"] for r in rows}):
        series = [r for r in rows if r["p"] == p]  # sorted by eta
        for k in PROTOCOL_KEYS:
            vals = [r[f"epsilon_{k}"] for r in series]
            worst_step = min(worst_step, *(b - a for a, b in zip(vals, vals[1:])))
            if series[0]["eta"] == 0.0:
                worst_zero = max(worst_zero, abs(vals[0]))
    has_zero = any(r["eta"] == 0.0 for r in rows)
    ok = worst_step >= -1e-9 and has_zero and worst_zero <= 1e-10
    return CheckResult(5, "monotone in eta", ok,
                       f"min step {_fmt(worst_step)} (>= -1e-9); |eps(eta=0)| max {_fmt(worst_zero)} (<= 1e-10)")


# -- 6 ----------------------------------------------------------------------

def check_gamma_monotone(sweeps: Sweeps) -> CheckResult:
    rows = sweeps.rows("gamma-sweep")
    vals = [r["epsilon_ico"] for r in rows]
    worst_step = min(b - a for a, b in zip(vals, vals[1:]))
    at_zero = [r["rel_improvement_ico"] for r in rows if r["gamma"] == 0.0]
    ok = worst_step >= -1e-9 and bool(at_zero) and abs(at_zero[0]) <= 1e-9
    return CheckResult(6, "monotone in gamma", ok,
                       f"min step {_fmt(worst_step)} (>= -1e-9); rel improvement at gamma=0 "
                       f"{_fmt(at_zero[0]) if at_zero else 'missing'} (|.| <= 1e-9)")


# -- 7 ----------------------------------------------------------------------

def check_structural(sweeps: Sweeps) -> CheckResult:
    base = ProtocolParams()
    r0 = exponents(replace(base, gamma=0.0))
    gamma0 = max(abs(r0["epsilon_ico"] - r0["epsilon_qi"]), abs(r0["epsilon_psde"] - r0["epsilon_qi"]))

    p1 = 0.0
    for eta in (0.01, 0.05, 0.1):
        r = exponents(replace(base, p=1.0, eta=eta))
        e = [r[f"epsilon_{k}"] for k in PROTOCOL_KEYS]
        p1 = max(p1, max(e) - min(e))

    rho = input_state(base)
    psde = np.max(np.abs(sigma_psde(base, base.eta) - base.p**2 * thermal_reflect_closed(base.eta, base.n_thermal, rho)))
    ico = sigma_ico(base, base.eta)
    dco = np.max(np.abs(sigma_dco(base, base.eta) - ico))
    # independent route: explicit thermal Kraus sum with normalised weights
    dco_kraus = np.max(np.abs(sigma_dco(base, base.eta, path="kraus", renormalize=True) - ico))

    ok = gamma0 <= 1e-10 and p1 <= 1e-9 and psde <= 1e-14 and dco <= 1e-12 and dco_kraus <= 1e-12
    return CheckResult(7, "structural identities", ok,
                       f"gamma=0 {_fmt(gamma0)} (<= 1e-10); p=1 spread {_fmt(p1)} (<= 1e-9); "
                       f"sigma_psde {_fmt(psde)} (<= 1e-14); sigma_dco {_fmt(dco)}, "
                       f"kraus path {_fmt(dco_kraus)} (<= 1e-12)")


# -- 8 ----------------------------------------------------------------------

W_PARAMS = ProtocolParams(eta=0.1, n_thermal=0.5, p=0.8, dim=8)


def w_block_deviation(builder: Callable, sigma_builder: Callable, params: ProtocolParams = W_PARAMS,
                      **kw) -> float:
    """Largest spectral-norm distance between the W-operator output blocks and
    the closed-form ``(rho_qi/2, sigma/2)``."""
    out = output_via_W(builder(params, params.eta, **kw), initial_controlled_state(params), params.dim)
    b00, b01, b10, b11 = control_blocks(out)
    rho = qi_output(params, params.eta)
    sigma = sigma_builder(params, params.eta)
    diffs = [b00 - rho / 2, b11 - rho / 2, b01 - sigma / 2, b10 - sigma.conj().T / 2]
    return max(float(np.linalg.norm(d, 2)) for d in diffs)


def check_w_operator(sweeps: Sweeps) -> CheckResult:
    ico = w_block_deviation(build_W_ico, sigma_ico)
    psde = w_block_deviation(build_W_psde, sigma_psde)
    ok = ico <= 5e-3 and psde <= 5e-3
    return CheckResult(8, "W-operator cross-validation (D=8)", ok,
                       f"max block deviation ICO {_fmt(ico)}, PS-DE {_fmt(psde)} (<= 5e-3)")


# -- 9 ----------------------------------------------------------------------

def _protocol_instances() -> list[tuple[str, ProtocolParams]]:
    out = []
    for p, eta, gamma in itertools.product((0.3, 0.8, 1.0), (0.01, 0.1), (0.5, 1.0)):
        out.append((f"p={p} eta={eta} gamma={gamma}", ProtocolParams(p=p, eta=eta, gamma=gamma, dim=6)))
    return out


def check_chernoff_oracles(sweeps: Sweeps) -> CheckResult:
    rng = np.random.default_rng(20240601)
    scalar_err = 0.0
    grid_err = 0.0
    dense = np.linspace(0.0, 1.0, 10_000)
    for n in (2, 5, 17):
        a = rng.random(n)
        b = rng.random(n)
        a[0] = 0.0  # exercise the 0^s convention
        a /= a.sum()
        b /= b.sum()
        for s in (0.0, 0.1, 0.37, 0.5, 0.9, 1.0):
            oracle = sum(x**s * y ** (1 - s) for x, y in zip(a, b) if x > 0 and y > 0)
            scalar_err = max(scalar_err, abs(q_s(np.diag(a), np.diag(b), s) - oracle))
        mask = (a > 0) & (b > 0)
        curve = (a[mask][None, :] ** dense[:, None] * b[mask][None, :] ** (1 - dense[:, None])).sum(axis=1)
        grid_err = max(grid_err, abs(q_min(np.diag(a), np.diag(b)).q_min - curve.min()))

    helstrom_slack = math.inf
    g_min = math.inf
    dq_slack = math.inf
    for _, params in _protocol_instances():
        rho_eta, rho_0 = qi_output(params, params.eta), qi_output(params, 0.0)
        qi = q_min(rho_eta, rho_0)
        for builder in (sigma_ico, sigma_psde):
            s_eta = params.gamma * builder(params, params.eta)
            s_0 = params.gamma * builder(params, 0.0)
            cs_eta = assemble_controlled(rho_eta, s_eta)
            cs_0 = assemble_controlled(rho_0, s_0)
            plus = SpectralPair(*(c.blocks()[0] for c in (cs_eta, cs_0)))
            minus = SpectralPair(*(c.blocks()[1] for c in (cs_eta, cs_0)))
            s_u, q_u, _ = minimize_convex_01(lambda s: plus(s) + minus(s))
            eps_u = -math.log(q_u)
            h = helstrom_single_copy(cs_eta.full_matrix(), cs_0.full_matrix())
            bound = min(qcb_error_bound(eps_u, 1, "paper"), qcb_error_bound(eps_u, 1, "standard"))
            helstrom_slack = min(helstrom_slack, bound - h)
            for s in np.linspace(0.1, 0.9, 9):
                g_min = min(g_min, g_s_deviation(rho_eta, rho_0, s_eta, s_0, float(s)))
            g_star = g_s_deviation(rho_eta, rho_0, s_eta, s_0, s_u)
            dq_slack = min(dq_slack, g_star - (qi.q_min - q_u))
        h_qi = helstrom_single_copy(rho_eta, rho_0)
        helstrom_slack = min(helstrom_slack, min(qcb_error_bound(qi.epsilon, 1, c) for c in ("paper", "standard")) - h_qi)

    ok = scalar_err <= 1e-10 and grid_err <= 1e-8 and helstrom_slack >= 0.0 and g_min >= -1e-9 and dq_slack >= -1e-9
    return CheckResult(9, "Chernoff oracle suite", ok,
                       f"q_s vs scalar {_fmt(scalar_err)} (<= 1e-10); q_min vs dense grid {_fmt(grid_err)} "
                       f"(<= 1e-8); min(bound - Helstrom) {_fmt(helstrom_slack)} (>= 0); "
                       f"min g_s {_fmt(g_min)} (>= -1e-9); min(g_s* - dQ) {_fmt(dq_slack)} (>= -1e-9)")


# -- 10 ---------------------------------------------------------------------

def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ g.conj().T
    return m / np.trace(m).real


def _state_defect(m: np.ndarray) -> float:
    """max(|Tr m - 1|, -lambda_min, Hermiticity defect)."""
    herm = float(np.max(np.abs(m - m.conj().T)))
    lo = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])
    return max(abs(np.trace(m).real - 1.0), -lo, herm)


def check_validity(sweeps: Sweeps) -> CheckResult:
    rng = np.random.default_rng(7)
    inputs = [random_density(16, rng), random_density(16, rng, rank=1),
              pstmss_state(StatePrepParams(0.3, 4)).matrix]
    channel_defect = 0.0
    for x in inputs:
        for p in (0.0, 0.35, 1.0):
            channel_defect = max(channel_defect, _state_defect(apply_loss_closed(p, x)))
            channel_defect = max(channel_defect, _state_defect(loss_kraus(p, 4).apply(x, 4)))
        for eta, n in ((0.0, 0.5), (0.1, 0.5), (0.7, 2.0), (1.0, 0.0)):
            channel_defect = max(channel_defect, _state_defect(thermal_reflect_closed(eta, n, x)))
            channel_defect = max(channel_defect, _state_defect(thermal_kraus(eta, n, 4, renormalize=True).apply(x, 4)))

    loss_dev = max(cptp_check(loss_kraus(p, d)).deviation for p in (0.0, 0.1, 0.5, 0.8, 1.0) for d in (2, 5, 10))

    state_defect = 0.0
    for lam, d in itertools.product((0.0, 0.05, 0.5, 0.9), (2, 6, 10)):
        state_defect = max(state_defect, _state_defect(pstmss_state(StatePrepParams(lam, d)).matrix))
    for n in (0.0, 0.5, 3.0):
        state_defect = max(state_defect, _state_defect(thermal_state(n, 10)))
    for p, eta, gamma, beta in ((0.8, 0.1, 1.0, 1.0), (0.3, 0.05, 0.5, 1.0), (0.8, 0.1, 1.0, 0.7)):
        params = ProtocolParams(p=p, eta=eta, gamma=gamma, dim=6)
        rho = qi_output(params, eta)
        state_defect = max(state_defect, _state_defect(rho))
        for builder in (sigma_ico, sigma_psde):
            cs = assemble_controlled(rho, builder(params, eta), gamma)
            if beta < 1.0:
                cs = apply_bitflip(cs, beta, params.dim)
            state_defect = max(state_defect, _state_defect(cs.full_matrix()))

    deterministic = _determinism_probe()
    ok = channel_defect <= 1e-10 and loss_dev <= 1e-14 and state_defect <= 1e-10 and deterministic
    return CheckResult(10, "channel and state validity", ok,
                       f"channel output defect {_fmt(channel_defect)} (<= 1e-10); loss completeness "
                       f"{_fmt(loss_dev)} (<= 1e-14); state defect {_fmt(state_defect)} (<= 1e-10); "
                       f"byte-identical rerun (serial and 2 workers): {deterministic}")


def _determinism_probe() -> bool:
    spec = SweepSpec("eps-vs-p", ProtocolParams(dim=6), {"eta": [0.05, 0.1], "p": [0.3, 0.8]})
    cols = COLUMNS["eps-vs-p"]
    first = format_csv(run_sweep(spec), cols)
    second = format_csv(run_sweep(spec), cols)
    parallel = format_csv(run_sweep(replace(spec, jobs=2)), cols)
    return first == second == parallel


CHECKS = (
    check_convergence,
    check_norm_ratio,
    check_advantage,
    check_ico_vs_psde,
    check_eta_monotone,
    check_gamma_monotone,
    check_structural,
    check_w_operator,
    check_chernoff_oracles,
    check_validity,
)


def run_all(jobs: int = 1, echo: Callable[[str], None] | None = None) -> list[CheckResult]:
    sweeps = Sweeps(jobs=jobs)
    results = []
    for check in CHECKS:
        res = check(sweeps)
        results.append(res)
        if echo is not None:
            echo(res.line())
    return results
