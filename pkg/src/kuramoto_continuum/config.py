"""JSON run configuration shared by every CLI subcommand."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

from .density import InitialDensity, density_from_spec

DEFAULTS: dict[str, Any] = {
    "k": 1.0,
    "T": 10.0,
    "dt": 1e-3,
    "N": 256,
    "M": 256,
    "output_times": [],
    "out_dir": "out",
    "mass_tol": 1e-6,
    "invariant_tol": 1e-6,
    "node_offset": 0.5,
    "seed": 0,
    # picard
    "picard_tol": 1e-5,
    "max_iter": 30,
    "picard_M": 128,
    "dt_out": 0.02,
    "picard_dt": None,
    # critical-angle
    "tol": 1e-4,
    "horizon": 20.0,
    "probes": 16,
    # bands
    "band_times": [],
    "trace": None,
    # compare-oracle
    "gate": None,
    "oracle_dt": None,
}


class ConfigError(ValueError):
    """Schema violations, one message per offending field."""

    def __init__(self, problems: list[str]) -> None:
        self.problems = list(problems)
        super().__init__("invalid config: " + "; ".join(self.problems))


@dataclass(frozen=True)
class RunConfig:
    density: dict
    k: float = DEFAULTS["k"]
    T: float = DEFAULTS["T"]
    dt: float = DEFAULTS["dt"]
    N: int = DEFAULTS["N"]
    M: int = DEFAULTS["M"]
    output_times: tuple = ()
    out_dir: str = DEFAULTS["out_dir"]
    mass_tol: float = DEFAULTS["mass_tol"]
    invariant_tol: float = DEFAULTS["invariant_tol"]
    node_offset: float = DEFAULTS["node_offset"]
    seed: int = DEFAULTS["seed"]
    picard_tol: float = DEFAULTS["picard_tol"]
    max_iter: int = DEFAULTS["max_iter"]
    picard_M: int = DEFAULTS["picard_M"]
    dt_out: float = DEFAULTS["dt_out"]
    picard_dt: float | None = None
    tol: float = DEFAULTS["tol"]
    horizon: float = DEFAULTS["horizon"]
    probes: int = DEFAULTS["probes"]
    band_times: tuple = ()
    trace: str | None = None
    gate: float | None = None
    oracle_dt: float | None = None
    applied_defaults: tuple = field(default=(), compare=False, repr=False)

    def initial_density(self) -> InitialDensity:
        return density_from_spec(self.density)

    def to_dict(self) -> dict:
        out = asdict(self)
        out.pop("applied_defaults")
        out["output_times"] = list(self.output_times)
        out["band_times"] = list(self.band_times)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _positive(name: str, v, problems: list[str], *, integer: bool = False, allow_zero: bool = False) -> None:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or (isinstance(v, float) and not math.isfinite(v)):
        problems.append(f"{name}: expected a finite number, got {v!r}")
        return
    if integer and int(v) != v:
        problems.append(f"{name}: expected an integer, got {v!r}")
    elif v < 0 or (v == 0 and not allow_zero):
        problems.append(f"{name}: must be {'non-negative' if allow_zero else 'positive'}, got {v!r}")


def _times(name: str, v, problems: list[str]) -> tuple:
    if not isinstance(v, (list, tuple)):
        problems.append(f"{name}: expected a list of times, got {v!r}")
        return ()
    for t in v:
        _positive(f"{name}[]", t, problems, allow_zero=True)
    return tuple(float(t) for t in v if isinstance(t, (int, float)) and not isinstance(t, bool))


def config_from_dict(raw: dict, base_dir: Path | None = None) -> RunConfig:
    """Validate a raw mapping and fill defaults.

    Raises:
        ConfigError: listing every invalid field.
    """
    if not isinstance(raw, dict):
        raise ConfigError(["top level: expected a JSON object"])
    problems: list[str] = []
    known = {f.name for f in fields(RunConfig)} - {"applied_defaults"}
    for key in sorted(set(raw) - known):
        problems.append(f"{key}: unknown field")
    if "density" not in raw:
        problems.append("density: required")
    merged = {}
    applied = []
    for key, default in DEFAULTS.items():
        if key in raw:
            merged[key] = raw[key]
        else:
            merged[key] = default
            applied.append(key)

    for key in ("k", "T", "dt", "mass_tol", "invariant_tol", "picard_tol", "dt_out", "tol", "horizon"):
        _positive(key, merged[key], problems)
    for key in ("N", "max_iter", "probes"):
        _positive(key, merged[key], problems, integer=True)
    for key in ("M", "picard_M"):
        before = len(problems)
        _positive(key, merged[key], problems, integer=True)
        if len(problems) == before and merged[key] < 8:
            problems.append(f"{key}: must be >= 8, got {merged[key]!r}")
    _positive("seed", merged["seed"], problems, integer=True, allow_zero=True)
    for key in ("picard_dt", "gate", "oracle_dt"):
        if merged[key] is not None:
            _positive(key, merged[key], problems)
    if isinstance(merged["node_offset"], bool) or not isinstance(merged["node_offset"], (int, float)) or not 0 <= merged["node_offset"] < 1:
        problems.append(f"node_offset: must lie in [0, 1), got {merged['node_offset']!r}")
    if not isinstance(merged["out_dir"], str) or not merged["out_dir"]:
        problems.append(f"out_dir: expected a non-empty path string, got {merged['out_dir']!r}")
    if merged["trace"] is not None and not isinstance(merged["trace"], str):
        problems.append(f"trace: expected a path string, got {merged['trace']!r}")
    out_times = _times("output_times", merged["output_times"], problems)
    band_times = _times("band_times", merged["band_times"], problems)
    T = merged["T"]
    if isinstance(T, (int, float)) and any(t > T for t in out_times):
        problems.append(f"output_times: every time must lie in [0, T={T}]")

    density = raw.get("density")
    if density is not None:
        try:
            density_from_spec(density)
        except (ValueError, TypeError) as exc:
            problems.append(f"density: {exc}")
    if problems:
        raise ConfigError(problems)

    trace = merged["trace"]
    if trace is not None and base_dir is not None and not Path(trace).is_absolute():
        trace = str(base_dir / trace)
    return RunConfig(
        density=dict(density),
        k=float(merged["k"]),
        T=float(merged["T"]),
        dt=float(merged["dt"]),
        N=int(merged["N"]),
        M=int(merged["M"]),
        output_times=out_times,
        out_dir=merged["out_dir"],
        mass_tol=float(merged["mass_tol"]),
        invariant_tol=float(merged["invariant_tol"]),
        node_offset=float(merged["node_offset"]),
        seed=int(merged["seed"]),
        picard_tol=float(merged["picard_tol"]),
        max_iter=int(merged["max_iter"]),
        picard_M=int(merged["picard_M"]),
        dt_out=float(merged["dt_out"]),
        picard_dt=None if merged["picard_dt"] is None else float(merged["picard_dt"]),
        tol=float(merged["tol"]),
        horizon=float(merged["horizon"]),
        probes=int(merged["probes"]),
        band_times=band_times,
        trace=trace,
        gate=None if merged["gate"] is None else float(merged["gate"]),
        oracle_dt=None if merged["oracle_dt"] is None else float(merged["oracle_dt"]),
        applied_defaults=tuple(applied),
    )


def load_config(path: str | Path) -> RunConfig:
    """Read and validate a JSON config file.

    Raises:
        ConfigError: on unreadable files, malformed JSON or schema violations.
    """
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError([f"config: cannot read {p}: {exc.strerror}"]) from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"config: malformed JSON at line {exc.lineno}: {exc.msg}"]) from exc
    return config_from_dict(raw, base_dir=p.parent)


def save_config(config: RunConfig, path: str | Path) -> None:
    Path(path).write_text(config.to_json() + "\n")
