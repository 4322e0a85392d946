"""Declarative scenario files: schema validation and object construction.

A scenario is one JSON document describing a run end to end; the CLI never
takes physics parameters as loose flags, so figures and tables regenerate
byte-for-byte from committed files.  Unknown keys anywhere are rejected.

Schema (version 1)
------------------
::

    {
      "version": 1,
      "coupling": {"gamma_x": f, "gamma_y": f, "gamma_z": f?},
      "field": {"kind": "ramp", "alpha": f, "applied_to": s?}
             | {"kind": "constant", "omega1": f, "omega2": f?}
             | {"kind": "oscillating", "amplitude": f, "frequency": f}
             | {"kind": "noisy_ramp", "alpha": f, "noise_strength_G": f,
                "seed": i?, "applied_to": s?}
             | {"kind": "tabulated", "times": [f], "omega1_values": [f],
                "omega2_values": [f]},
      "initial_state": "--" | "-+" | "+-" | "++"
                     | "spin2_x_plus" | "spin1_x_plus"
                     | {"amplitudes": [[re, im] x 4]},
      "window": {"tau_i": f, "tau_f": f, "n_points": i?, "dense_tail": b?},
      "engine": "numeric" | "exact" | "both",
      "outputs": ["populations" | "concurrence" | "amplitudes" | "norm"],
      "tolerance": f?,
      "noise": {"n_realizations": i, "n_steps": i?}?,
      "decay": {"xi_1": f, "xi_2": f}?
    }

``spin2_x_plus`` is |+> x (|+> + |->)/sqrt(2) (sweep flips spin 1 through
the coupling); ``spin1_x_plus`` is the mirrored preparation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigurationError
from .model import (
    Constant,
    CouplingTensor,
    DecayRates,
    FieldProtocol,
    NoisyRamp,
    Oscillating,
    Ramp,
    Tabulated,
)
from .propagation import TwoQubitState, Window

SCHEMA_VERSION = 1

_SQRT_HALF = math.sqrt(0.5)

INITIAL_STATE_PRESETS = {
    "--": [0, 0, 0, 1],
    "-+": [0, 0, 1, 0],
    "+-": [0, 1, 0, 0],
    "++": [1, 0, 0, 0],
    "spin2_x_plus": [_SQRT_HALF, _SQRT_HALF, 0, 0],
    "spin1_x_plus": [_SQRT_HALF, 0, _SQRT_HALF, 0],
}

OUTPUT_KINDS = ("populations", "concurrence", "amplitudes", "norm")


@dataclass(frozen=True)
class ScenarioFile:
    """Validated scenario document."""

    version: int
    coupling: CouplingTensor
    field: FieldProtocol
    initial_state: TwoQubitState
    window: Window
    engine: str
    outputs: tuple[str, ...]
    tolerance: float
    noise_realizations: Optional[int] = None
    noise_steps: Optional[int] = None
    decay: Optional[DecayRates] = None


def _require_keys(obj: dict, path: str, required: tuple[str, ...], optional: tuple[str, ...] = ()):
    if not isinstance(obj, dict):
        raise ConfigurationError(f"{path}: expected an object")
    unknown = set(obj) - set(required) - set(optional)
    if unknown:
        raise ConfigurationError(f"{path}: unknown keys {sorted(unknown)}")
    missing = [k for k in required if k not in obj]
    if missing:
        raise ConfigurationError(f"{path}: missing keys {missing}")


def _number(obj: dict, path: str, key: str, default=None):
    if key not in obj:
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigurationError(f"{path}.{key}: expected a number, got {v!r}")
    return float(v)


def _integer(obj: dict, path: str, key: str, default=None):
    if key not in obj:
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigurationError(f"{path}.{key}: expected an integer, got {v!r}")
    return v


def _parse_field(obj: dict) -> FieldProtocol:
    _require_keys(obj, "field", ("kind",),
                  ("alpha", "applied_to", "omega1", "omega2", "amplitude", "frequency",
                   "noise_strength_G", "seed", "times", "omega1_values", "omega2_values"))
    kind = obj["kind"]
    if kind == "ramp":
        _require_keys(obj, "field(ramp)", ("kind", "alpha"), ("applied_to",))
        return Ramp(alpha=_number(obj, "field", "alpha"),
                    applied_to=obj.get("applied_to", "spin1"))
    if kind == "constant":
        _require_keys(obj, "field(constant)", ("kind", "omega1"), ("omega2",))
        return Constant(omega1=_number(obj, "field", "omega1"),
                        omega2=_number(obj, "field", "omega2", 0.0))
    if kind == "oscillating":
        _require_keys(obj, "field(oscillating)", ("kind", "amplitude", "frequency"))
        return Oscillating(amplitude=_number(obj, "field", "amplitude"),
                           frequency=_number(obj, "field", "frequency"))
    if kind == "noisy_ramp":
        _require_keys(obj, "field(noisy_ramp)", ("kind", "alpha", "noise_strength_G"),
                      ("seed", "applied_to"))
        return NoisyRamp(alpha=_number(obj, "field", "alpha"),
                         noise_strength_G=_number(obj, "field", "noise_strength_G"),
                         seed=_integer(obj, "field", "seed", 0),
                         applied_to=obj.get("applied_to", "both_homogeneous"))
    if kind == "tabulated":
        _require_keys(obj, "field(tabulated)", ("kind", "times", "omega1_values", "omega2_values"))
        return Tabulated(times=tuple(obj["times"]),
                         omega1_values=tuple(obj["omega1_values"]),
                         omega2_values=tuple(obj["omega2_values"]))
    raise ConfigurationError(f"field.kind: unknown protocol {kind!r}")


def _parse_initial_state(value) -> TwoQubitState:
    if isinstance(value, str):
        if value not in INITIAL_STATE_PRESETS:
            raise ConfigurationError(
                f"initial_state: unknown preset {value!r}; "
                f"expected one of {sorted(INITIAL_STATE_PRESETS)} or explicit amplitudes"
            )
        return TwoQubitState.from_amplitudes(INITIAL_STATE_PRESETS[value])
    _require_keys(value, "initial_state", ("amplitudes",))
    amps = value["amplitudes"]
    if not (isinstance(amps, list) and len(amps) == 4
            and all(isinstance(a, list) and len(a) == 2 for a in amps)):
        raise ConfigurationError("initial_state.amplitudes: expected four [re, im] pairs")
    vec = np.array([complex(a[0], a[1]) for a in amps])
    norm = np.linalg.norm(vec)
    if norm < 1e-12:
        raise ConfigurationError("initial_state.amplitudes: zero vector")
    return TwoQubitState.from_amplitudes(vec / norm)


def _parse_window(obj: dict) -> Window:
    _require_keys(obj, "window", ("tau_i", "tau_f"), ("n_points", "dense_tail"))
    tau_i = _number(obj, "window", "tau_i")
    tau_f = _number(obj, "window", "tau_f")
    n_points = _integer(obj, "window", "n_points", 2001)
    if obj.get("dense_tail", False):
        return Window.with_dense_tail(tau_i, tau_f, n_points)
    return Window.uniform(tau_i, tau_f, n_points)


def parse_scenario(doc: dict) -> ScenarioFile:
    """Validate a decoded scenario document and build the run objects."""
    _require_keys(doc, "scenario",
                  ("version", "coupling", "field", "initial_state", "window", "engine", "outputs"),
                  ("tolerance", "noise", "decay"))
    if doc["version"] != SCHEMA_VERSION:
        raise ConfigurationError(
            f"version: expected {SCHEMA_VERSION}, got {doc['version']!r}"
        )
    cobj = doc["coupling"]
    _require_keys(cobj, "coupling", ("gamma_x", "gamma_y"), ("gamma_z",))
    coupling = CouplingTensor(
        gamma_x=_number(cobj, "coupling", "gamma_x"),
        gamma_y=_number(cobj, "coupling", "gamma_y"),
        gamma_z=_number(cobj, "coupling", "gamma_z", 0.0),
    )
    field = _parse_field(doc["field"])
    initial = _parse_initial_state(doc["initial_state"])
    window = _parse_window(doc["window"])

    engine = doc["engine"]
    if engine not in ("numeric", "exact", "both"):
        raise ConfigurationError(f"engine: expected numeric/exact/both, got {engine!r}")
    if engine in ("exact", "both") and not isinstance(field, Ramp):
        raise ConfigurationError("engine: the exact engine requires a pure ramp field")

    outputs = doc["outputs"]
    if not isinstance(outputs, list) or any(o not in OUTPUT_KINDS for o in outputs):
        raise ConfigurationError(f"outputs: expected a list drawn from {OUTPUT_KINDS}")

    tolerance = _number(doc, "scenario", "tolerance", 1e-10)

    noise_realizations = noise_steps = None
    if "noise" in doc:
        nobj = doc["noise"]
        _require_keys(nobj, "noise", ("n_realizations",), ("n_steps",))
        noise_realizations = _integer(nobj, "noise", "n_realizations")
        noise_steps = _integer(nobj, "noise", "n_steps")

    decay = None
    if "decay" in doc:
        dobj = doc["decay"]
        _require_keys(dobj, "decay", ("xi_1", "xi_2"))
        decay = DecayRates(xi_1=_number(dobj, "decay", "xi_1"),
                           xi_2=_number(dobj, "decay", "xi_2"))

    return ScenarioFile(
        version=doc["version"], coupling=coupling, field=field, initial_state=initial,
        window=window, engine=engine, outputs=tuple(outputs), tolerance=tolerance,
        noise_realizations=noise_realizations, noise_steps=noise_steps, decay=decay,
    )


def load_scenario(path: str) -> ScenarioFile:
    """Read and validate a scenario file; errors carry the offending key path."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ConfigurationError(f"scenario file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON ({exc.msg})")
    return parse_scenario(doc)
