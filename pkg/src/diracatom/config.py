"""
JSON run and sweep documents.

A run document is a single JSON object::

    {
      "model_kind": "TransformedLiteral",       # Full | TransformedLiteral | TransformedExact | Baseline2
      "coupling": "AlphaE",                     # AlphaE | SigmaE | None        (default AlphaE)
      "integrator": "ExpMidpoint",              # ExpMidpoint | RK4 | Magnus2   (default ExpMidpoint)
      "params": {"hbar": 1, "c": 1, "mass": 0, "omega": 0, "mu": 1,
                 "momentum": [0, 0, 0], "gamma": null, "omega_a": null},
      "field": {"kind": "static", "amplitude": [0, 0, 1]},
      "initial_state": [[0, 0], [1, 0], [0, 0], [0, 0]],   # (re, im) pairs
      "t0": 0, "t1": 31.4, "dt": 0.001, "sample_stride": 10,
      "output_prefix": "rabi",
      "seed": 0,
      "polarization_axis": "z",                 # Baseline2 only; inferred from the field if absent
      "frequency_signal": "auto"                # pop1..pop4, pop_upper, pop_lower, pop_radiant, ...
    }

Only ``model_kind``, ``t1`` and ``dt`` are required. Field kinds are
``zero``, ``static`` (amplitude), ``cosine`` (amplitude, nu, phase=0) and
``gaussian`` (amplitude, nu, phase=0, center, width). A sweep document is a
run document plus ``"sweep": {"axis": "field.amplitude.z", "values": [...]}``.
Unknown keys anywhere are errors.
"""
from __future__ import annotations

import copy
import json
import re
from dataclasses import dataclass
from typing import Any, Union

import numpy as np

from diracatom.algebra import Axis
from diracatom.dynamics import EvolutionProblem, IntegratorKind
from diracatom.model import (
    CosineField,
    CouplingKind,
    GaussianPulse,
    ModelKind,
    PhysicalParams,
    StaticField,
    ZeroField,
    infer_axis,
)


class ConfigError(ValueError):
    """A config document failed to parse or validate."""


_TOP_KEYS = {
    "model_kind", "coupling", "integrator", "params", "field", "initial_state",
    "t0", "t1", "dt", "sample_stride", "output_prefix", "seed",
    "polarization_axis", "frequency_signal", "sweep",
}
_PARAM_DEFAULTS = {
    "hbar": 1.0, "c": 1.0, "mass": 0.0, "omega": 0.0, "mu": 1.0,
    "momentum": [0.0, 0.0, 0.0], "gamma": None, "omega_a": None,
}
_FIELD_KEYS = {
    "zero": {},
    "static": {"amplitude": None},
    "cosine": {"amplitude": None, "nu": None, "phase": 0.0},
    "gaussian": {"amplitude": None, "nu": None, "phase": 0.0, "center": None, "width": None},
}
_SIGNALS = {
    "auto", "pop1", "pop2", "pop3", "pop4", "pop_upper", "pop_lower",
    "pop_radiant", "pop_absorptive",
}
_VECTOR_INDEX = {"x": 0, "y": 1, "z": 2}


def _number(value, where: str, allow_none: bool = False):
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _unknown(given: dict, allowed, where: str) -> None:
    extra = sorted(set(given) - set(allowed))
    if extra:
        raise ConfigError(f"{where}: unknown key {extra[0]!r}")


def _enum(cls, value, where: str):
    try:
        return cls(value)
    except ValueError:
        names = ", ".join(m.value for m in cls)
        raise ConfigError(f"{where}: invalid name {value!r} (expected one of {names})") from None


def _vector(value, where: str) -> list[float]:
    if not isinstance(value, list) or len(value) != 3:
        raise ConfigError(f"{where}: expected a list of 3 numbers, got {value!r}")
    return [_number(v, f"{where}[{i}]") for i, v in enumerate(value)]


@dataclass(frozen=True)
class RunConfig:
    """A fully resolved run; ``document`` holds every key with defaults filled in."""

    document: dict

    @property
    def model_kind(self) -> ModelKind:
        return ModelKind(self.document["model_kind"])

    @property
    def coupling(self) -> CouplingKind:
        return CouplingKind(self.document["coupling"])

    @property
    def output_prefix(self) -> str:
        return self.document["output_prefix"]

    @property
    def frequency_signal(self) -> str:
        return self.document["frequency_signal"]

    @property
    def params(self) -> PhysicalParams:
        p = self.document["params"]
        return PhysicalParams(**{**p, "momentum": tuple(p["momentum"])})

    @property
    def field(self):
        f = dict(self.document["field"])
        kind = f.pop("kind")
        if "amplitude" in f:
            f["amplitude"] = tuple(f["amplitude"])
        return {
            "zero": ZeroField,
            "static": StaticField,
            "cosine": CosineField,
            "gaussian": GaussianPulse,
        }[kind](**f)

    @property
    def initial_state(self) -> np.ndarray:
        return np.array([complex(re, im) for re, im in self.document["initial_state"]])

    def to_problem(self) -> EvolutionProblem:
        d = self.document
        return EvolutionProblem(
            model_kind=self.model_kind,
            params=self.params,
            initial_state=self.initial_state,
            t0=d["t0"],
            t1=d["t1"],
            dt=d["dt"],
            coupling=self.coupling,
            field=self.field,
            integrator=IntegratorKind(d["integrator"]),
            sample_stride=d["sample_stride"],
            polarization_axis=d["polarization_axis"],
        )

    def to_dict(self) -> dict:
        return copy.deepcopy(self.document)


@dataclass(frozen=True)
class SweepConfig:
    base: RunConfig
    axis: str
    values: tuple[float, ...]

    def run_for(self, index: int) -> RunConfig:
        """The base run with the sweep axis set to ``values[index]``."""
        doc = self.base.to_dict()
        _set_path(doc, self.axis, self.values[index])
        doc["output_prefix"] = f"{self.base.output_prefix}_{index}"
        return resolve_run(doc)

    def to_dict(self) -> dict:
        doc = self.base.to_dict()
        doc["sweep"] = {"axis": self.axis, "values": list(self.values)}
        return doc


def _split_path(path: str) -> list:
    parts: list = []
    for part in path.split("."):
        if part in _VECTOR_INDEX and parts and parts[-1] in ("amplitude", "momentum"):
            parts.append(_VECTOR_INDEX[part])
        else:
            parts.append(part)
    return parts


def _get_path(doc: dict, path: str):
    node: Any = doc
    for part in _split_path(path):
        try:
            node = node[part]
        except (KeyError, IndexError, TypeError):
            raise ConfigError(f"sweep.axis: {path!r} does not name a config value") from None
    return node


def _set_path(doc: dict, path: str, value) -> None:
    parts = _split_path(path)
    node: Any = doc
    for part in parts[:-1]:
        node = node[part]
    node[parts[-1]] = value


def _resolve_field(raw, where: str = "field") -> dict:
    if raw is None:
        return {"kind": "zero"}
    if not isinstance(raw, dict):
        raise ConfigError(f"{where}: expected an object")
    kind = raw.get("kind")
    if kind not in _FIELD_KEYS:
        raise ConfigError(f"{where}.kind: invalid name {kind!r} (expected one of {', '.join(_FIELD_KEYS)})")
    keys = _FIELD_KEYS[kind]
    _unknown(raw, set(keys) | {"kind"}, where)
    out = {"kind": kind}
    for key, default in keys.items():
        if key not in raw and default is None:
            raise ConfigError(f"{where}.{key}: required for field kind {kind!r}")
        value = raw.get(key, default)
        out[key] = _vector(value, f"{where}.{key}") if key == "amplitude" else _number(value, f"{where}.{key}")
    return out


def _resolve_state(raw, dimension: int) -> list[list[float]]:
    if raw is None:
        # lowest level: component 3 of the four-component spinor, c_lower of the baseline
        ground = [[0.0, 0.0] for _ in range(dimension)]
        ground[2 if dimension == 4 else 1] = [1.0, 0.0]
        return ground
    if not isinstance(raw, list):
        raise ConfigError("initial_state: expected a list of [re, im] pairs")
    if len(raw) != dimension:
        raise ConfigError(
            f"initial_state: component count mismatch ({len(raw)} given, model needs {dimension})"
        )
    out = []
    for i, pair in enumerate(raw):
        if isinstance(pair, list) and len(pair) == 2:
            out.append([_number(pair[0], f"initial_state[{i}][0]"), _number(pair[1], f"initial_state[{i}][1]")])
        else:
            out.append([_number(pair, f"initial_state[{i}]"), 0.0])
    if not any(re or im for re, im in out):
        raise ConfigError("initial_state: state must be nonzero")
    return out


def resolve_run(raw: dict) -> RunConfig:
    """Validate a run document and fill in every default."""
    if not isinstance(raw, dict):
        raise ConfigError("document: expected a JSON object")
    _unknown(raw, _TOP_KEYS - {"sweep"}, "document")
    for key in ("model_kind", "t1", "dt"):
        if key not in raw:
            raise ConfigError(f"{key}: required key missing")

    model_kind = _enum(ModelKind, raw["model_kind"], "model_kind")
    doc: dict = {"model_kind": model_kind.value}
    doc["coupling"] = _enum(CouplingKind, raw.get("coupling", "AlphaE"), "coupling").value
    doc["integrator"] = _enum(IntegratorKind, raw.get("integrator", "ExpMidpoint"), "integrator").value

    params_raw = raw.get("params", {})
    if not isinstance(params_raw, dict):
        raise ConfigError("params: expected an object")
    _unknown(params_raw, _PARAM_DEFAULTS, "params")
    params = {}
    for key, default in _PARAM_DEFAULTS.items():
        value = params_raw.get(key, default)
        if key == "momentum":
            params[key] = _vector(value, "params.momentum")
        else:
            params[key] = _number(value, f"params.{key}", allow_none=key in ("gamma", "omega_a"))
    try:
        PhysicalParams(**{**params, "momentum": tuple(params["momentum"])})
    except ValueError as exc:
        raise ConfigError(f"params: {exc}") from None
    doc["params"] = params

    doc["field"] = _resolve_field(raw.get("field"))
    doc["initial_state"] = _resolve_state(raw.get("initial_state"), model_kind.dimension)
    doc["t0"] = _number(raw.get("t0", 0.0), "t0")
    doc["t1"] = _number(raw["t1"], "t1")
    doc["dt"] = _number(raw["dt"], "dt")
    if doc["dt"] <= 0:
        raise ConfigError(f"dt: must be > 0, got {doc['dt']}")
    if doc["t1"] <= doc["t0"]:
        raise ConfigError(f"t1: must exceed t0 ({doc['t0']}), got {doc['t1']}")
    stride = raw.get("sample_stride", 1)
    if isinstance(stride, bool) or not isinstance(stride, int) or stride < 1:
        raise ConfigError(f"sample_stride: expected a positive integer, got {stride!r}")
    doc["sample_stride"] = stride
    prefix = raw.get("output_prefix", "run")
    if not isinstance(prefix, str) or not prefix:
        raise ConfigError("output_prefix: expected a non-empty string")
    doc["output_prefix"] = prefix
    seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError(f"seed: expected an unsigned integer, got {seed!r}")
    doc["seed"] = seed
    signal = raw.get("frequency_signal", "auto")
    if signal not in _SIGNALS:
        raise ConfigError(f"frequency_signal: invalid name {signal!r}")
    doc["frequency_signal"] = signal

    axis = raw.get("polarization_axis")
    if axis is not None:
        axis = _enum(Axis, axis, "polarization_axis").value
    doc["polarization_axis"] = axis

    config = RunConfig(doc)
    try:
        field = config.field
        if model_kind is ModelKind.BASELINE2:
            if params["omega_a"] is None:
                raise ConfigError("params.omega_a: required for model_kind Baseline2")
            if axis is None:
                doc["polarization_axis"] = infer_axis(field).value
        config.to_problem()
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(_field_hint(str(exc))) from None
    return config


def _field_hint(message: str) -> str:
    head = re.split(r"[ =]", message, maxsplit=1)[0]
    if head in ("amplitude", "nu", "width"):
        return f"field.{head}: {message}"
    if head in ("dt", "t0", "t1", "sample_stride", "initial_state"):
        return f"{head}: {message}"
    return message


def resolve(raw: dict) -> Union[RunConfig, SweepConfig]:
    if not isinstance(raw, dict):
        raise ConfigError("document: expected a JSON object")
    if "sweep" not in raw:
        return resolve_run(raw)
    sweep = raw["sweep"]
    base_raw = {k: v for k, v in raw.items() if k != "sweep"}
    base = resolve_run(base_raw)
    if not isinstance(sweep, dict):
        raise ConfigError("sweep: expected an object")
    _unknown(sweep, {"axis", "values"}, "sweep")
    axis = sweep.get("axis")
    if not isinstance(axis, str):
        raise ConfigError("sweep.axis: expected a dotted parameter path")
    target = _get_path(base.document, axis)
    numeric_slots = {"params.gamma", "params.omega_a"}
    if isinstance(target, bool) or not (isinstance(target, (int, float)) or axis in numeric_slots):
        raise ConfigError(f"sweep.axis: {axis!r} does not name a numeric scalar")
    if axis == "sample_stride" or axis == "seed":
        raise ConfigError(f"sweep.axis: {axis!r} is not a physical parameter")
    values = sweep.get("values")
    if not isinstance(values, list) or not values:
        raise ConfigError("sweep.values: expected a non-empty list of numbers")
    values = tuple(_number(v, f"sweep.values[{i}]") for i, v in enumerate(values))
    config = SweepConfig(base, axis, values)
    for i in range(len(values)):
        try:
            config.run_for(i)
        except ConfigError as exc:
            raise ConfigError(f"sweep.values[{i}]: {exc}") from None
    return config


def parse_config(text: str) -> Union[RunConfig, SweepConfig]:
    """Parse and validate a JSON document into a run or sweep config.

    Syntax errors report line and column; semantic errors name the key path.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return resolve(raw)
