"""Sectioned key = value configuration with line/column-accurate errors.

Format::

    # comment
    [section]
    key = value

Unknown sections and keys, duplicate keys, malformed lines and values that
violate module preconditions are all rejected before anything runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

from .geometry import bf_bound

__all__ = ["ConfigError", "Config", "parse_config", "load_config", "SCHEMA"]


class ConfigError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0, source: str = "<config>"):
        self.message = message
        self.line = line
        self.col = col
        self.source = source
        super().__init__(f"{source}:{line}:{col}: {message}")


# ---------------------------------------------------------------------------
# Value parsers
# ---------------------------------------------------------------------------

def _int(lo: Optional[int] = None, hi: Optional[int] = None):
    def p(s: str) -> int:
        try:
            v = int(s)
        except ValueError:
            raise ValueError(f"expected an integer, got {s!r}") from None
        if lo is not None and v < lo:
            raise ValueError(f"must be >= {lo} (got {v})")
        if hi is not None and v > hi:
            raise ValueError(f"must be <= {hi} (got {v})")
        return v
    return p


def _float(lo: Optional[float] = None, hi: Optional[float] = None, strict_lo: bool = False,
           allow_inf: bool = False):
    def p(s: str) -> float:
        try:
            v = float(s)
        except ValueError:
            raise ValueError(f"expected a number, got {s!r}") from None
        if math.isnan(v) or (math.isinf(v) and not allow_inf):
            raise ValueError(f"must be finite (got {s!r})")
        if lo is not None and (v <= lo if strict_lo else v < lo):
            raise ValueError(f"must be {'>' if strict_lo else '>='} {lo} (got {v})")
        if hi is not None and v > hi:
            raise ValueError(f"must be <= {hi} (got {v})")
        return v
    return p


def _choice(*opts: str):
    def p(s: str) -> str:
        if s not in opts:
            raise ValueError(f"must be one of {', '.join(opts)} (got {s!r})")
        return s
    return p


def _float_list(s: str) -> List[float]:
    out = []
    for part in s.split(","):
        part = part.strip()
        if not part:
            continue
        out.append(_float()(part))
    return out


def _str_list(*opts: str):
    def p(s: str) -> List[str]:
        items = [a.strip() for a in s.split(",") if a.strip()]
        for a in items:
            if opts and a not in opts:
                raise ValueError(f"unknown entry {a!r}; allowed: {', '.join(opts)}")
        return items
    return p


def _bool(s: str) -> bool:
    low = s.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {s!r}")


def _str(s: str) -> str:
    return s


_POS = _float(0.0, strict_lo=True)

SCHEMA: Dict[str, Dict[str, Tuple[Callable[[str], Any], Any]]] = {
    "model": {
        "family": (_choice("FlatSlab", "ExactAdSCollar", "PerturbedSlab"), "FlatSlab"),
        "n": (_int(3, 8), 3),
        "a0": (_float(), -1.0),
        "a2": (_float(), 0.0),
        "ct0": (_float(), 0.0),
        "ct1": (_float(), 0.0),
        "b_curv": (_float(), 0.0),
    },
    "integrator": {
        "rel_tol": (_POS, 1e-10),
        "abs_tol": (_POS, 1e-12),
        "max_step": (_float(0.0, strict_lo=True, allow_inf=True), math.inf),
        "x_event_tol": (_POS, 1e-10),
        "glancing_tol": (_POS, 1e-6),
        "max_events": (_int(0), 100),
        "s_max": (_POS, 10.0),
        "x_max": (_POS, 1.0),
        "t_max": (_float(), None),
        "sample_step": (_POS, 0.01),
    },
    "grid": {
        "nx": (_int(8, 1 << 14), 128),
        "ny": (_int(1, 1 << 14), 1),
        "m": (_int(2), 2),
        "cfl": (_float(0.0, 0.5, strict_lo=True), 0.5),
        "ly": (_POS, 1.0),
        "closure": (_choice("IndicialExtrapolation", "HomogeneousWall"), "IndicialExtrapolation"),
        "closure_order": (_int(1, 2), 2),
        "t0": (_float(), 0.0),
        "t_end": (_POS, 2.0),
        "forcing_center": (_float(0.0, 1.0), 0.5),
        "forcing_width": (_POS, 0.08),
        "forcing_duration": (_POS, 0.5),
        "window_min": (_float(0.0, 1.0), 0.1),
        "window_max": (_float(0.0, 1.0), 1.0),
        "hardy_cells": (_int(10), 10_000),
    },
    "spectral": {
        "lambda": (_float(), 0.0),
        "lambda_im": (_float(), 0.0),
        "omegas": (_float_list, [0.5, 1.0, 2.0]),
        "ks": (_float_list, [0.0]),
        "n_modes": (_int(1, 1000), 5),
        "sigma_max": (_POS, 200.0),
    },
    "experiment": {
        "ids": (_str_list("wavepacket", "bf_scan", "scattering", "convergence"), ["convergence"]),
        "seed": (_int(0), 0),
        "workers": (_int(1, 256), 1),
        "quick": (_bool, False),
    },
    "output": {
        "directory": (_str, "results"),
        "formats": (_str_list("csv", "json", "svg"), ["csv", "json", "svg"]),
    },
}

# Experiment overrides: "[experiment] wavepacket.nx = 256" style keys.
_OVERRIDE_KEYS = {
    "wavepacket": {"nx": _int(32), "ny": _int(32), "width_cells": _POS, "wavelength_cells": _POS,
                   "angle_deg": _float(0.0, 90.0), "x_source": _POS, "y_source": _float(0.0, 1.0),
                   "source_duration": _POS, "t_end": _POS, "max_deviation_cells": _POS,
                   "exclusion_widths": _float(0.0)},
    "bf_scan": {"t_end": _POS, "m": _int(2), "growth_bound": _POS, "unstable_growth": _POS,
                "lambdas": _float_list},
    "scattering": {"n": _int(3, 8), "lam": _float(), "omegas": _float_list, "ks": _float_list},
    "convergence": {"n": _int(3, 8), "lam": _float(), "base_nx": _int(16), "levels": _int(3, 6),
                    "t_end": _POS, "closure_order": _int(1, 2)},
}


@dataclass
class Config:
    values: Dict[str, Dict[str, Any]]
    locations: Dict[Tuple[str, str], Tuple[int, int]] = field(default_factory=dict)
    overrides: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    sections_present: Tuple[str, ...] = ()
    source: str = "<config>"

    def get(self, section: str, key: str):
        return self.values[section][key]

    def __getitem__(self, section: str) -> Dict[str, Any]:
        return self.values[section]

    def snapshot(self) -> dict:
        out = {s: dict(v) for s, v in self.values.items()}
        out["overrides"] = {k: dict(v) for k, v in self.overrides.items()}
        return out


def _defaults() -> Dict[str, Dict[str, Any]]:
    return {s: {k: (list(d) if isinstance(d, list) else d) for k, (_, d) in keys.items()}
            for s, keys in SCHEMA.items()}


def parse_config(text: str, source: str = "<config>") -> Config:
    values = _defaults()
    loc: Dict[Tuple[str, str], Tuple[int, int]] = {}
    overrides: Dict[str, Dict[str, Any]] = {}
    present: List[str] = []
    section: Optional[str] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r\n")
        stripped = line.strip()
        if not stripped or stripped[0] in "#;":
            continue
        indent = len(line) - len(line.lstrip())
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise ConfigError("unterminated section header", lineno, indent + 1, source)
            name = stripped[1:-1].strip()
            if name not in SCHEMA:
                raise ConfigError(f"unknown section [{name}]; expected one of "
                                  f"{', '.join('[' + s + ']' for s in SCHEMA)}",
                                  lineno, indent + 2, source)
            if name in present:
                raise ConfigError(f"duplicate section [{name}]", lineno, indent + 1, source)
            present.append(name)
            section = name
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", lineno, indent + 1, source)
        if section is None:
            raise ConfigError("key outside of any section", lineno, indent + 1, source)
        eq = line.index("=")
        key = line[:eq].strip()
        vstart = eq + 1
        while vstart < len(line) and line[vstart] == " ":
            vstart += 1
        value = line[eq + 1:].strip()
        # strip trailing inline comments
        for marker in (" #", " ;"):
            if marker in value:
                value = value[:value.index(marker)].rstrip()
        kcol = indent + 1
        vcol = vstart + 1
        if not key:
            raise ConfigError("empty key", lineno, kcol, source)
        if (section, key) in loc:
            raise ConfigError(f"duplicate key {key!r} in [{section}]", lineno, kcol, source)
        if section == "experiment" and "." in key:
            exp, _, sub = key.partition(".")
            if exp not in _OVERRIDE_KEYS or sub not in _OVERRIDE_KEYS[exp]:
                raise ConfigError(f"unknown override {key!r}", lineno, kcol, source)
            try:
                overrides.setdefault(exp, {})[sub] = _OVERRIDE_KEYS[exp][sub](value)
            except ValueError as exc:
                raise ConfigError(f"[{section}] {key}: {exc}", lineno, vcol, source) from None
            loc[(section, key)] = (lineno, vcol)
            continue
        if key not in SCHEMA[section]:
            raise ConfigError(f"unknown key {key!r} in [{section}]; allowed: "
                              f"{', '.join(sorted(SCHEMA[section]))}", lineno, kcol, source)
        parser = SCHEMA[section][key][0]
        try:
            values[section][key] = parser(value)
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key}: {exc}", lineno, vcol, source) from None
        loc[(section, key)] = (lineno, vcol)
    cfg = Config(values, loc, overrides, tuple(present), source)
    _cross_validate(cfg)
    return cfg


def _where(cfg: Config, section: str, key: str) -> Tuple[int, int]:
    return cfg.locations.get((section, key), (0, 0))


def _cross_validate(cfg: Config) -> None:
    v = cfg.values
    n = v["model"]["n"]
    lam = v["spectral"]["lambda"]
    fam = v["model"]["family"]
    if fam != "PerturbedSlab":
        for k in ("a0", "a2", "ct0", "ct1", "b_curv"):
            if (("model", k) in cfg.locations):
                line, col = _where(cfg, "model", k)
                raise ConfigError(f"[model] {k} only applies to family PerturbedSlab", line, col,
                                  cfg.source)
    if v["model"]["a0"] >= 0:
        line, col = _where(cfg, "model", "a0")
        raise ConfigError("[model] a0 must be negative (A(0) < 0 keeps the boundary timelike)",
                          line, col, cfg.source)
    if "grid" in cfg.sections_present:
        g = v["grid"]
        if g["m"] + 2 >= g["nx"]:
            line, col = _where(cfg, "grid", "m")
            raise ConfigError("[grid] m must leave at least 3 interior cells (m + 2 < nx)",
                              line, col, cfg.source)
        if g["window_min"] >= g["window_max"]:
            line, col = _where(cfg, "grid", "window_min")
            raise ConfigError("[grid] window_min must be < window_max", line, col, cfg.source)
        if g["closure"] == "IndicialExtrapolation":
            bound = bf_bound(n)
            if v["spectral"]["lambda_im"] != 0.0:
                line, col = _where(cfg, "spectral", "lambda_im")
                raise ConfigError("evolution requires real lambda (lambda_im must be 0)",
                                  line, col, cfg.source)
            if lam >= bound:
                line, col = _where(cfg, "spectral", "lambda")
                raise ConfigError(
                    f"[spectral] lambda = {lam!r} >= (n-1)^2/4 = {bound!r}: the "
                    f"IndicialExtrapolation closure requires lambda below the "
                    f"Breitenlohner-Freedman bound (use closure = HomogeneousWall for a probe)",
                    line, col, cfg.source)
        if fam != "FlatSlab":
            line, col = _where(cfg, "model", "family")
            raise ConfigError("[grid] evolution is implemented for family FlatSlab only",
                              line, col, cfg.source)


def load_config(path) -> Config:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror or exc}", 0, 0, str(p)) from None
    except UnicodeDecodeError as exc:
        raise ConfigError(f"config is not valid UTF-8: {exc.reason}", 0, 0, str(p)) from None
    return parse_config(text, str(p))
