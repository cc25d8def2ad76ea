"""Plain ``key = value`` run configuration.

Lines starting with ``#`` and blank lines are ignored.  Scalars set the fixed
protocol parameters; ``*_grid`` keys take comma-separated lists and replace a
figure's default grid for that axis.  Example::

    eta = 0.1
    thermal_n = 0.5
    p_grid = 0.1, 0.5, 0.9
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .chernoff import DEFAULT_TOL_S
from .errors import ParameterError
from .protocols import ProtocolParams

# config key -> ProtocolParams field
PARAM_KEYS = {
    "eta": "eta",
    "thermal_n": "n_thermal",
    "p": "p",
    "nt": "nt",
    "dim": "dim",
    "gamma": "gamma",
    "beta_bitflip": "beta_bitflip",
}
GRID_KEYS = {"dim_grid": "dim", "eta_grid": "eta", "p_grid": "p", "gamma_grid": "gamma"}
RUN_KEYS = ("tol_s", "jobs")


@dataclass
class RunConfig:
    params: ProtocolParams = field(default_factory=ProtocolParams)
    grids: dict[str, list[float]] = field(default_factory=dict)
    tol_s: float = DEFAULT_TOL_S
    jobs: int = 1

    def with_params(self, **updates) -> "RunConfig":
        """Copy with config-key updates, e.g. ``with_params(thermal_n=1.0)``."""
        fields_ = {PARAM_KEYS[k]: v for k, v in updates.items()}
        return replace(self, params=replace(self.params, **fields_), grids=dict(self.grids))


def _parse_scalar(key: str, raw: str):
    try:
        if key in ("dim", "jobs"):
            return int(raw)
        return float(raw)
    except ValueError:
        raise ParameterError(f"config key {key!r}: cannot parse {raw!r} as a number") from None


def _parse_grid(key: str, raw: str) -> list[float]:
    axis = GRID_KEYS[key]
    items = [x.strip() for x in raw.split(",") if x.strip()]
    if not items:
        raise ParameterError(f"config key {key!r}: empty grid")
    return [_parse_scalar(axis, x) for x in items]


def parse_config_text(text: str, base: RunConfig | None = None) -> RunConfig:
    cfg = base or RunConfig()
    params: dict[str, object] = {}
    grids = dict(cfg.grids)
    run = {"tol_s": cfg.tol_s, "jobs": cfg.jobs}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"config line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key in PARAM_KEYS:
            params[PARAM_KEYS[key]] = _parse_scalar(key, raw)
        elif key in GRID_KEYS:
            grids[GRID_KEYS[key]] = _parse_grid(key, raw)
        elif key in RUN_KEYS:
            run[key] = _parse_scalar(key, raw)
        else:
            known = sorted([*PARAM_KEYS, *GRID_KEYS, *RUN_KEYS])
            raise ParameterError(f"config line {lineno}: unknown key {key!r} (known: {', '.join(known)})")
    return RunConfig(replace(cfg.params, **params), grids, float(run["tol_s"]), int(run["jobs"]))


def load_config(path: str | Path, base: RunConfig | None = None) -> RunConfig:
    # OSError propagates; the CLI maps it to the I/O exit code
    text = Path(path).read_text(encoding="utf-8")
    return parse_config_text(text, base)


def format_config(cfg: RunConfig, grids: dict[str, list[float]] | None = None) -> str:
    """Render ``cfg`` back into the config-file syntax (round-trips through
    ``parse_config_text``)."""
    by_field = {f.name: getattr(cfg.params, f.name) for f in fields(cfg.params)}
    lines = [f"{key} = {by_field[fname]}" for key, fname in PARAM_KEYS.items()]
    lines += [f"tol_s = {cfg.tol_s}", f"jobs = {cfg.jobs}"]
    merged = {**(grids or {}), **cfg.grids}
    for key, axis in GRID_KEYS.items():
        if axis in merged:
            lines.append(f"{key} = " + ", ".join(str(v) for v in merged[axis]))
    return "\n".join(lines) + "\n"
