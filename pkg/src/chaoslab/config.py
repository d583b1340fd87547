"""Flat key = value experiment configuration.

Config files are plain text, one ``key = value`` per line, ``#`` comments,
diff-friendly.  CLI flags override file values by the same names.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace

from .kernels import HurstPair, QuadratureConfig

__all__ = ["ExperimentConfig", "parse_config_file", "load_config"]

ENV_OUT_DIR = "CHAOSLAB_OUT"


@dataclass(frozen=True)
class ExperimentConfig:
    h1: float = 0.8
    h2: float = 0.8
    n_grid: tuple = (4, 8, 16, 32, 64, 128)
    sample_count: int = 1_000_000
    seed: int = 20240
    tv_method: str = "histogram"          # histogram | kde
    bins: int = 200
    bandwidth: str = "auto"
    c_grid: tuple = (0.05, 0.1, 0.2, 0.4)
    u_grid: tuple = ()                    # empty: anchor automatically at the tail floor
    ks_n: int = 64
    ks_count: int = 100_000
    reduction_cells: int = 512
    bootstrap_resamples: int = 200
    threads: int = 1
    out_dir: str = ""
    # quadrature knobs
    truncation_left: float = -50.0
    panels_per_unit: int = 64
    grading_exponent: float = 3.0
    nodes_per_panel: int = 16
    abs_tol: float = 1e-6
    rel_tol: float = 1e-8

    def __post_init__(self):
        if len(self.n_grid) >= 2:
            if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
                raise ValueError("n_grid must be strictly increasing")
        if self.tv_method not in ("histogram", "kde"):
            raise ValueError(f"unknown tv_method {self.tv_method!r}")
        if self.sample_count < 1 or self.ks_count < 1:
            raise ValueError("sample counts must be positive")

    @property
    def hurst(self) -> HurstPair:
        return HurstPair(self.h1, self.h2)

    @property
    def quadrature(self) -> QuadratureConfig:
        return QuadratureConfig(
            truncation_left=self.truncation_left,
            panels_per_unit=self.panels_per_unit,
            grading_exponent=self.grading_exponent,
            nodes_per_panel=self.nodes_per_panel,
            abs_tol=self.abs_tol,
            rel_tol=self.rel_tol,
        )

    @property
    def output_dir(self) -> str:
        return self.out_dir or os.environ.get(ENV_OUT_DIR, ".")

    def as_items(self):
        """(key, value) pairs for CSV header echoes, tuples comma-joined."""
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(str(x) for x in v)
            out.append((f.name, v))
        return out


_TUPLE_INT = {"n_grid"}
_TUPLE_FLOAT = {"c_grid", "u_grid"}
_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _coerce(key: str, raw: str):
    if key in _TUPLE_INT:
        return tuple(int(x) for x in raw.split(",") if x.strip())
    if key in _TUPLE_FLOAT:
        return tuple(float(x) for x in raw.split(",") if x.strip())
    current = ExperimentConfig()
    ref = getattr(current, key)
    if isinstance(ref, bool):
        return raw.strip().lower() in ("1", "true", "yes", "on")
    if isinstance(ref, int):
        return int(raw)
    if isinstance(ref, float):
        return float(raw)
    return raw.strip()


def parse_config_file(path: str) -> dict:
    """Read ``key = value`` lines; unknown keys are rejected loudly."""
    out = {}
    known = set(_FIELD_TYPES)
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            if "=" not in body:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, raw = (s.strip() for s in body.split("=", 1))
            if key not in known:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = _coerce(key, raw)
    return out


def load_config(path: str | None = None, **overrides) -> ExperimentConfig:
    """File values first, then keyword overrides (CLI flags)."""
    values = parse_config_file(path) if path else {}
    for k, v in overrides.items():
        if v is not None:
            values[k] = v
    return replace(ExperimentConfig(), **values)
