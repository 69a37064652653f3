"""JSON setup documents and deterministic number formatting.

Complex numbers are always written as ``[re, im]`` pairs and floats with 17
significant digits, so every emitted document re-parses to identical values.

Setup document (``schema: 1``)::

    {
      "schema": 1,
      "dimension": 2,
      "psi": [[0.7071067811865476, 0.0], [0.7071067811865476, 0.0]],
      "phi": [[0.7071067811865476, 0.0], [-0.7071067811865476, 0.0]],
      "amplitudes": null,
      "hamiltonian": "zero",
      "time": 0.0,
      "tau": null,
      "observable": [1.0, 0.0],
      "meter": {"width": 1.0, "coupling": 1.0},
      "seed": 0
    }

``amplitudes`` may replace ``psi``/``phi`` to specify path amplitudes directly;
``hamiltonian`` is ``"zero"`` or a row-major matrix of ``[re, im]`` pairs.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import HermitianOperator, Observable, PathSet, PureState, path_amplitudes
from .errors import ValidationError
from .pointer import MeasurementSetup, MeterConfig

__all__ = [
    "SCHEMA",
    "SetupDocument",
    "load_setup",
    "parse_setup",
    "dumps",
    "format_float",
    "write_csv",
]

SCHEMA = 1


def format_float(x: float) -> str:
    text = format(float(x), ".17g")
    if text.lstrip("-").isdigit():
        text += ".0"
    return text


def _complex_pair(value, where: str) -> complex:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(float(value), 0.0)
    if (
        isinstance(value, (list, tuple))
        and len(value) == 2
        and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)
    ):
        return complex(float(value[0]), float(value[1]))
    raise ValidationError(f"field {where}: expected a [re, im] pair, got {value!r}")


def _complex_list(value, where: str) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise ValidationError(f"field {where}: expected a non-empty list of [re, im] pairs")
    return np.array([_complex_pair(v, f"{where}[{i}]") for i, v in enumerate(value)])


def _real(value, where: str, default=None, positive=False) -> float | None:
    if value is None:
        if default is None:
            raise ValidationError(f"field {where}: required")
        return default
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"field {where}: expected a number, got {value!r}")
    v = float(value)
    if not math.isfinite(v) or (positive and v <= 0):
        raise ValidationError(f"field {where}: must be {'positive and ' if positive else ''}finite")
    return v


def _pairs(c: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in c]


@dataclass(frozen=True, eq=False)
class SetupDocument:
    dimension: int
    psi: PureState | None = None
    phi: PureState | None = None
    amplitudes: PathSet | None = None
    hamiltonian: HermitianOperator | None = None
    time: float = 0.0
    tau: float | None = None
    observable: Observable | None = None
    width: float | None = None
    coupling: float = 1.0
    seed: int = 0

    @property
    def h(self) -> HermitianOperator:
        return self.hamiltonian if self.hamiltonian is not None else HermitianOperator.zero(self.dimension)

    def require_states(self) -> tuple[PureState, PureState]:
        if self.psi is None or self.phi is None:
            raise ValidationError("field psi/phi: this command needs initial and final states")
        return self.psi, self.phi

    def require_observable(self) -> Observable:
        if self.observable is None:
            raise ValidationError("field observable: required")
        return self.observable

    def paths(self) -> PathSet:
        if self.amplitudes is not None:
            return self.amplitudes
        psi, phi = self.require_states()
        return path_amplitudes(psi, phi, self.h, self.time, self.tau)

    def meter(self) -> MeterConfig:
        if self.width is None:
            raise ValidationError("field meter.width: required")
        return MeterConfig(self.width, self.require_observable(), self.coupling)

    def measurement(self) -> MeasurementSetup:
        return MeasurementSetup(self.paths(), self.meter())

    def to_obj(self) -> dict:
        h = self.hamiltonian
        return {
            "schema": SCHEMA,
            "dimension": self.dimension,
            "psi": None if self.psi is None else _pairs(self.psi.coeffs),
            "phi": None if self.phi is None else _pairs(self.phi.coeffs),
            "amplitudes": None if self.amplitudes is None else _pairs(self.amplitudes.amplitudes),
            "hamiltonian": "zero" if h is None or h.is_zero else [_pairs(r) for r in h.matrix],
            "time": self.time,
            "tau": self.tau,
            "observable": None if self.observable is None else [float(b) for b in self.observable.eigenvalues],
            "meter": {"width": self.width, "coupling": self.coupling},
            "seed": self.seed,
        }

    def __eq__(self, other):
        if not isinstance(other, SetupDocument):
            return NotImplemented
        return dumps(self.to_obj()) == dumps(other.to_obj())


def parse_setup(obj) -> SetupDocument:
    """Validate a decoded JSON object; errors name the offending field."""
    if not isinstance(obj, dict):
        raise ValidationError("setup document must be a JSON object")
    schema = obj.get("schema", SCHEMA)
    if schema != SCHEMA:
        raise ValidationError(f"field schema: unsupported version {schema!r}")
    known = {"schema", "dimension", "psi", "phi", "amplitudes", "hamiltonian", "time", "tau",
             "observable", "meter", "seed"}
    extra = sorted(set(obj) - known)
    if extra:
        raise ValidationError(f"field {extra[0]}: unknown field")

    def state(key):
        if obj.get(key) is None:
            return None
        c = _complex_list(obj[key], key)
        try:
            return PureState(c)
        except ValidationError as exc:
            raise ValidationError(f"field {key}: {exc}") from None

    psi, phi = state("psi"), state("phi")
    amps = None
    if obj.get("amplitudes") is not None:
        amps = PathSet(_complex_list(obj["amplitudes"], "amplitudes"))
        if psi is not None or phi is not None:
            raise ValidationError("field amplitudes: give either amplitudes or psi/phi, not both")

    dims = {x.d for x in (psi, phi, amps) if x is not None}
    dimension = obj.get("dimension")
    if dimension is None:
        if len(dims) != 1:
            raise ValidationError("field dimension: required (cannot infer)")
        dimension = dims.pop()
    if isinstance(dimension, bool) or not isinstance(dimension, int) or dimension < 2:
        raise ValidationError(f"field dimension: expected an integer >= 2, got {dimension!r}")
    for key, x in (("psi", psi), ("phi", phi), ("amplitudes", amps)):
        if x is not None and x.d != dimension:
            raise ValidationError(f"field {key}: length {x.d} does not match dimension {dimension}")

    hraw = obj.get("hamiltonian", "zero")
    if hraw is None or hraw == "zero":
        h = None
    else:
        if not isinstance(hraw, list) or len(hraw) != dimension:
            raise ValidationError(f"field hamiltonian: expected \"zero\" or {dimension} rows")
        rows = [_complex_list(r, f"hamiltonian[{i}]") for i, r in enumerate(hraw)]
        if any(r.size != dimension for r in rows):
            raise ValidationError(f"field hamiltonian: every row needs {dimension} entries")
        try:
            h = HermitianOperator(np.array(rows))
        except ValidationError as exc:
            raise ValidationError(f"field hamiltonian: {exc}") from None

    time = _real(obj.get("time"), "time", default=0.0)
    tau = None if obj.get("tau") is None else _real(obj["tau"], "tau")

    obs = None
    if obj.get("observable") is not None:
        raw = obj["observable"]
        if not isinstance(raw, list) or len(raw) != dimension:
            raise ValidationError(f"field observable: expected {dimension} real eigenvalues")
        obs = Observable([_real(b, f"observable[{i}]") for i, b in enumerate(raw)])

    meter = obj.get("meter") or {}
    if not isinstance(meter, dict):
        raise ValidationError("field meter: expected an object")
    width = None if meter.get("width") is None else _real(meter["width"], "meter.width", positive=True)
    coupling = _real(meter.get("coupling"), "meter.coupling", default=1.0)

    seed = obj.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ValidationError(f"field seed: expected an unsigned 64-bit integer, got {seed!r}")

    return SetupDocument(dimension, psi, phi, amps, h, time, tau, obs, width, coupling, seed)


def load_setup(path) -> SetupDocument:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read setup file {path}: {exc.strerror}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return parse_setup(obj)


def _plain(obj):
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.complexfloating, complex)):
        z = complex(obj)
        return [z.real, z.imag]
    if isinstance(obj, np.ndarray):
        return [_plain(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(x) for x in obj]
    return obj


def _emit(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(x, (list, dict)) for x in obj):
            return "[" + ", ".join(_emit(x, indent, level + 1) for x in obj) + "]"
        return "[\n" + ",\n".join(pad + _emit(x, indent, level + 1) for x in obj) + "\n" + end + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = (pad + json.dumps(k) + ": " + _emit(v, indent, level + 1) for k, v in obj.items())
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """Deterministic JSON text; floats carry 17 significant digits, complex -> [re, im]."""
    return _emit(_plain(obj), indent, 0)


def write_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else format_float(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()
