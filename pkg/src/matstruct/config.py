"""Run configuration read from a TOML file.

Example::

    [model]
    family = "example"      # V(m) = m, g(m) = m / kappa, tau(m) = ln(m + alpha)
    kappa = 2.0
    alpha = 4.0
    delta = 6.0
    gamma = 6.0

    [initial]
    preset = "bump"
    b = 0.5

    [grid]
    M = 128
    dt = "auto"

    [run]
    T = 20.0
    dump = [0.0, 5.0, 10.0, 20.0]

Unknown sections or keys are errors.  :meth:`RunConfig.effective` returns the
full configuration with every default filled in.
"""
from __future__ import annotations

import itertools
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .model import InitialData, ModelSpec, data_from_dict, example_family

OUT_ENV = "MATSTRUCT_OUT"

EXAMPLE_KEYS = {"kappa": 2.0, "alpha": 4.0, "delta": 0.1, "gamma": 0.2, "beta0": 1.0, "theta": 1.0, "n": 2.0}
CUSTOM_KEYS = {"velocity", "delay", "division", "reentry", "delta", "gamma", "alpha_pi"}
SECTIONS = {
    "model": None,
    "initial": None,
    "grid": {"M": 128, "dt": "auto"},
    "run": {"T": 20.0, "dump": None, "out": "out"},
    "analysis": {"b": None, "simulate_immature": False},
    "sweep": {"params": {}},
}


class ConfigError(ValueError):
    """The configuration file is malformed or has unknown entries."""


def _reject_unknown(section: str, given: dict, allowed) -> None:
    extra = sorted(set(given) - set(allowed))
    if extra:
        raise ConfigError(f"unknown key(s) in [{section}]: {', '.join(extra)}")


def _model_section(d: dict) -> dict:
    d = dict(d)
    fam = d.setdefault("family", "example")
    if fam == "example":
        _reject_unknown("model", d, set(EXAMPLE_KEYS) | {"family"})
        return {**{"family": "example"}, **EXAMPLE_KEYS, **d}
    if fam == "custom":
        _reject_unknown("model", d, CUSTOM_KEYS | {"family"})
        missing = {"velocity", "delay", "division", "reentry"} - set(d)
        if missing:
            raise ConfigError(f"[model] custom family needs: {', '.join(sorted(missing))}")
        return d
    raise ConfigError(f"[model] unknown family {fam!r} (use 'example' or 'custom')")


def build_spec(model: dict) -> ModelSpec:
    d = dict(model)
    fam = d.pop("family")
    if fam == "example":
        return example_family(**{k: float(v) for k, v in d.items()})
    return ModelSpec.from_dict(d)


def build_data(initial: dict) -> InitialData:
    try:
        return data_from_dict(initial)
    except TypeError as exc:
        raise ConfigError(f"[initial] {exc}") from None


@dataclass
class RunConfig:
    model: dict
    initial: dict
    M: int = 128
    dt: float | None = None
    T: float = 20.0
    dump: list | str | None = None
    out: str = "out"
    b: float | None = None
    simulate_immature: bool = False
    sweep: dict = field(default_factory=dict)
    source: str | None = None

    @classmethod
    def from_dict(cls, raw: dict, source: str | None = None) -> "RunConfig":
        _reject_unknown("top level", raw, SECTIONS)
        for name, defaults in SECTIONS.items():
            if defaults is not None and name in raw:
                if not isinstance(raw[name], dict):
                    raise ConfigError(f"[{name}] must be a table")
                _reject_unknown(name, raw[name], defaults)
        model = _model_section(raw.get("model", {}))
        initial = dict(raw.get("initial", {"preset": "constant"}))
        grid = {**SECTIONS["grid"], **raw.get("grid", {})}
        run = {**SECTIONS["run"], **raw.get("run", {})}
        ana = {**SECTIONS["analysis"], **raw.get("analysis", {})}
        sweep = dict(raw.get("sweep", {}).get("params", {}))
        for k, v in sweep.items():
            if model["family"] != "example" or k not in EXAMPLE_KEYS:
                raise ConfigError(f"[sweep.params] can only vary example-family parameters, got {k!r}")
            if not isinstance(v, list) or not v:
                raise ConfigError(f"[sweep.params] {k} must be a non-empty list")
        dt = grid["dt"]
        if dt != "auto" and not (isinstance(dt, (int, float)) and dt > 0):
            raise ConfigError("[grid] dt must be a positive number or 'auto'")
        M = grid["M"]
        if not isinstance(M, int) or M < 8:
            raise ConfigError("[grid] M must be an integer >= 8")
        T = float(run["T"])
        if not T > 0:
            raise ConfigError("[run] T must be positive")
        dump = run["dump"]
        if dump is not None and dump != "all" and not (isinstance(dump, list) and all(isinstance(x, (int, float)) for x in dump)):
            raise ConfigError("[run] dump must be a list of times or 'all'")
        return cls(model, initial, M, None if dt == "auto" else float(dt), T, dump, str(run["out"]),
                   None if ana["b"] is None else float(ana["b"]), bool(ana["simulate_immature"]), sweep, source)

    @classmethod
    def load(cls, path) -> "RunConfig":
        p = Path(path)
        try:
            with p.open("rb") as fh:
                raw = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{p}: {exc}") from None
        return cls.from_dict(raw, str(p))

    def spec(self) -> ModelSpec:
        return build_spec(self.model)

    def data(self) -> InitialData:
        return build_data(self.initial)

    def dump_times(self):
        return [0.0, self.T] if self.dump is None else self.dump

    def out_dir(self, override: str | None = None) -> Path:
        return Path(override or os.environ.get(OUT_ENV) or self.out)

    def effective(self) -> dict:
        return {
            "model": self.model,
            "initial": {**self.initial, **self.data().source},
            "grid": {"M": self.M, "dt": "auto" if self.dt is None else self.dt},
            "run": {"T": self.T, "dump": self.dump_times(), "out": self.out},
            "analysis": {"b": self.b, "simulate_immature": self.simulate_immature},
            "sweep": {"params": self.sweep},
        }

    def sweep_points(self) -> list[dict]:
        """Cartesian product of the sweep lists, as model sections."""
        if not self.sweep:
            return [dict(self.model)]
        keys = sorted(self.sweep)
        return [{**self.model, **dict(zip(keys, combo))} for combo in itertools.product(*(self.sweep[k] for k in keys))]
