"""Parameter sweeps behind the figures, and their CSV output.

Every grid point is a pure function of its parameters, so points are farmed
out to a process pool and re-sorted before writing.  No randomness enters
anywhere; identical configs give byte-identical CSV files.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .chernoff import DEFAULT_TOL_S, epsilon_blocks, q_min
from .errors import ParameterError
from .linalg import spectral_norm
from .protocols import (
    ProtocolParams,
    apply_bitflip,
    assemble_controlled,
    qi_output,
    sigma_ico,
    sigma_psde,
)

FIGURES = ("convergence", "norm-ratio", "eps-vs-p", "eps-vs-eta", "gamma-sweep")

COLUMNS = {
    "convergence": [
        "dim", "eta", "thermal_n", "p", "nt",
        "epsilon_qi", "epsilon_psde", "epsilon_ico",
        "s_star_qi", "s_star_psde", "s_star_ico",
        "rel_change_qi", "rel_change_psde", "rel_change_ico",
    ],
    "norm-ratio": [
        "eta", "p", "dim", "thermal_n", "nt",
        "sigma_norm_psde", "sigma_norm_ico", "ratio",
    ],
    "eps-vs-p": [
        "eta", "p", "dim", "thermal_n", "nt",
        "epsilon_qi", "epsilon_psde", "epsilon_ico",
        "s_star_qi", "s_star_psde", "s_star_ico",
    ],
    "eps-vs-eta": [
        "p", "eta", "dim", "thermal_n", "nt",
        "epsilon_qi", "epsilon_psde", "epsilon_ico",
        "s_star_qi", "s_star_psde", "s_star_ico",
    ],
    "gamma-sweep": [
        "gamma", "eta", "p", "dim", "thermal_n", "nt",
        "epsilon_qi", "epsilon_ico", "epsilon_psde",
        "rel_improvement_ico", "rel_improvement_psde",
    ],
}

COLUMN_HELP = {
    "dim": "truncation dimension D per mode",
    "eta": "target reflectivity",
    "thermal_n": "thermal mean photon number N",
    "p": "survival probability of every loss channel",
    "nt": "mean photon number of the probe mode",
    "gamma": "control-qubit decoherence coefficient",
    "epsilon_qi": "Chernoff exponent of standard QI",
    "epsilon_psde": "Chernoff exponent of path superposition, disjoint environments",
    "epsilon_ico": "Chernoff exponent of indefinite causal order",
    "s_star_qi": "minimising s for QI",
    "s_star_psde": "minimising s for PS-DE",
    "s_star_ico": "minimising s for ICO",
    "rel_change_qi": "|eps(D) - eps(D+2)| / eps(D) for QI (blank if D+2 not in grid)",
    "rel_change_psde": "same, PS-DE",
    "rel_change_ico": "same, ICO",
    "sigma_norm_psde": "spectral norm of the PS-DE interference term (target present)",
    "sigma_norm_ico": "spectral norm of the ICO interference term (target present)",
    "ratio": "sigma_norm_psde / sigma_norm_ico",
    "rel_improvement_ico": "(eps_ico - eps_qi) / eps_qi",
    "rel_improvement_psde": "(eps_psde - eps_qi) / eps_qi",
}

ASSUMPTIONS = (
    "thermal_n and nt are not given for every figure; unspecified values inherit "
    "the convergence-figure settings (N = 0.5, N_t = 0.01)",
    "squeezing parameter solved so the truncated, renormalised probe has mean photon number nt",
)


def columns_help(figure: str) -> str:
    return "\n".join(f"  {c:<22s} {COLUMN_HELP[c]}" for c in COLUMNS[figure])


@dataclass
class SweepSpec:
    figure: str
    base: ProtocolParams = field(default_factory=ProtocolParams)
    grids: dict[str, list[float]] = field(default_factory=dict)
    tol_s: float = DEFAULT_TOL_S
    jobs: int = 1

    def __post_init__(self):
        if self.figure not in FIGURES:
            raise ParameterError(f"unknown figure {self.figure!r}; expected one of {FIGURES}")
        for name, values in self.grids.items():
            if not values:
                raise ParameterError(f"grid {name!r} is empty")
        if self.jobs < 1:
            raise ParameterError(f"jobs must be >= 1, got {self.jobs}")


DEFAULT_GRIDS = {
    "convergence": {"dim": [4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16]},
    "norm-ratio": {"eta": [0.01, 0.05, 0.1], "p": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]},
    "eps-vs-p": {
        "eta": [0.01, 0.05, 0.1],
        "p": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99, 1.0],
    },
    "eps-vs-eta": {
        "p": [0.2, 0.5, 0.8],
        "eta": [0.0, 0.01, 0.02, 0.03, 0.05, 0.07, 0.1, 0.15, 0.2, 0.3],
    },
    "gamma-sweep": {"gamma": [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]},
}

# grid axis order == row sort order
GRID_AXES = {
    "convergence": ("dim",),
    "norm-ratio": ("eta", "p"),
    "eps-vs-p": ("eta", "p"),
    "eps-vs-eta": ("p", "eta"),
    "gamma-sweep": ("gamma",),
}

# per-figure values for fixed parameters, applied before user overrides
FIGURE_DEFAULTS = {
    "gamma-sweep": {"eta": 0.05},
}


# -- single-point evaluators ------------------------------------------------

def exponents(params: ProtocolParams, tol_s: float = DEFAULT_TOL_S) -> dict[str, float]:
    """Chernoff exponents of QI, PS-DE and ICO at one parameter point."""
    rho_eta = qi_output(params, params.eta)
    rho_0 = qi_output(params, 0.0)
    qi = q_min(rho_eta, rho_0, tol_s)
    row = {"epsilon_qi": qi.epsilon, "s_star_qi": qi.s_star}
    for name, builder in (("psde", sigma_psde), ("ico", sigma_ico)):
        cs_eta = assemble_controlled(rho_eta, builder(params, params.eta), params.gamma)
        cs_0 = assemble_controlled(rho_0, builder(params, 0.0), params.gamma)
        if params.beta_bitflip < 1.0:
            cs_eta = apply_bitflip(cs_eta, params.beta_bitflip, params.dim)
            cs_0 = apply_bitflip(cs_0, params.beta_bitflip, params.dim)
        res = epsilon_blocks(cs_eta, cs_0, tol_s)
        row[f"epsilon_{name}"] = res.epsilon
        row[f"s_star_{name}"] = res.s_star
    return row


def sigma_norms(params: ProtocolParams) -> dict[str, float]:
    n_ps = spectral_norm(sigma_psde(params, params.eta))
    n_ico = spectral_norm(sigma_ico(params, params.eta))
    return {"sigma_norm_psde": n_ps, "sigma_norm_ico": n_ico, "ratio": n_ps / n_ico}


def _point_inputs(params: ProtocolParams) -> dict[str, float]:
    return {"eta": params.eta, "p": params.p, "dim": params.dim,
            "thermal_n": params.n_thermal, "nt": params.nt, "gamma": params.gamma}


def _eval_exponents(args: tuple[ProtocolParams, float]) -> dict[str, float]:
    params, tol_s = args
    return {**_point_inputs(params), **exponents(params, tol_s)}


def _eval_norms(args: tuple[ProtocolParams, float]) -> dict[str, float]:
    params, _ = args
    return {**_point_inputs(params), **sigma_norms(params)}


def _grid_points(spec: SweepSpec) -> list[ProtocolParams]:
    axes = GRID_AXES[spec.figure]
    grids = {**DEFAULT_GRIDS[spec.figure], **spec.grids}
    points = [spec.base]
    for axis in axes:
        points = [
            replace(pt, **{axis: int(v) if axis == "dim" else float(v)})
            for pt in points
            for v in grids[axis]
        ]
    return points


def _evaluate(fn: Callable, points: Sequence[ProtocolParams], tol_s: float, jobs: int) -> list[dict]:
    args = [(pt, tol_s) for pt in points]
    if jobs == 1 or len(args) <= 1:
        return [fn(a) for a in args]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, args))


def _sorted(rows: list[dict], figure: str) -> list[dict]:
    axes = GRID_AXES[figure]
    return sorted(rows, key=lambda r: tuple(r[a] for a in axes))


# -- sweeps -----------------------------------------------------------------

def run_convergence(spec: SweepSpec) -> list[dict]:
    rows = _sorted(_evaluate(_eval_exponents, _grid_points(spec), spec.tol_s, spec.jobs), spec.figure)
    by_dim = {r["dim"]: r for r in rows}
    for r in rows:
        nxt = by_dim.get(r["dim"] + 2)
        for proto in ("qi", "psde", "ico"):
            key = f"epsilon_{proto}"
            if nxt is None or r[key] == 0.0:
                r[f"rel_change_{proto}"] = None
            else:
                r[f"rel_change_{proto}"] = abs(r[key] - nxt[key]) / r[key]
    return rows


def run_norm_ratio(spec: SweepSpec) -> list[dict]:
    return _sorted(_evaluate(_eval_norms, _grid_points(spec), spec.tol_s, spec.jobs), spec.figure)


def run_p_sweep(spec: SweepSpec) -> list[dict]:
    return _sorted(_evaluate(_eval_exponents, _grid_points(spec), spec.tol_s, spec.jobs), spec.figure)


def run_eta_sweep(spec: SweepSpec) -> list[dict]:
    return _sorted(_evaluate(_eval_exponents, _grid_points(spec), spec.tol_s, spec.jobs), spec.figure)


def run_gamma_sweep(spec: SweepSpec) -> list[dict]:
    rows = _sorted(_evaluate(_eval_exponents, _grid_points(spec), spec.tol_s, spec.jobs), spec.figure)
    for r in rows:
        for proto in ("ico", "psde"):
            r[f"rel_improvement_{proto}"] = (r[f"epsilon_{proto}"] - r["epsilon_qi"]) / r["epsilon_qi"]
    return rows


RUNNERS = {
    "convergence": run_convergence,
    "norm-ratio": run_norm_ratio,
    "eps-vs-p": run_p_sweep,
    "eps-vs-eta": run_eta_sweep,
    "gamma-sweep": run_gamma_sweep,
}


def run_sweep(spec: SweepSpec) -> list[dict]:
    return RUNNERS[spec.figure](spec)


# -- CSV --------------------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    v = float(value)
    if not math.isfinite(v):
        raise ParameterError(f"refusing to write non-finite value {v!r}")
    # exponents of identical hypotheses come out as -0.0 or -1e-16 from rounding
    if v == 0.0 or (v < 0.0 and v > -1e-12):
        v = 0.0
    return f"{v:.12g}"


def format_csv(rows: Iterable[dict], columns: Sequence[str], comments: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def emit_csv(rows: Iterable[dict], path: str | Path, columns: Sequence[str], comments: Sequence[str] = ()) -> Path:
    path = Path(path)
    text = format_csv(rows, columns, comments)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def sweep_comments(spec: SweepSpec) -> list[str]:
    b = spec.base
    fixed = {"eta": b.eta, "thermal_n": b.n_thermal, "p": b.p, "dim": b.dim, "nt": b.nt,
             "gamma": b.gamma, "beta_bitflip": b.beta_bitflip}
    swept = GRID_AXES[spec.figure]
    lines = [
        f"figure: {spec.figure}",
        "fixed: " + " ".join(f"{k}={v}" for k, v in fixed.items() if k not in swept)
        + f" tol_s={spec.tol_s}",
    ]
    for axis in GRID_AXES[spec.figure]:
        values = {**DEFAULT_GRIDS[spec.figure], **spec.grids}[axis]
        lines.append(f"grid {axis}: " + ",".join(_fmt(v) for v in values))
    lines.extend(f"assumption: {a}" for a in ASSUMPTIONS)
    return lines
