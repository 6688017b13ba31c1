"""JSON configuration, report serialisation and atomic file output.

Config values:

* complex scalar: a number or a pair ``[re, im]``;
* matrix: a list of rows, each entry a number or ``[re, im]``; a bare scalar
  is accepted for ``1 x 1`` blocks.

Every parse error is a :class:`ConfigError` carrying the dotted field path.
"""
import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, QstabError
from .model import PerturbationBounds, build_plant, kerr_plant

__all__ = [
    "AnalysisConfig",
    "parse_config",
    "load_config",
    "example_config",
    "plant_to_dict",
    "complex_to_json",
    "matrix_to_json",
    "atomic_write_text",
    "write_json",
    "write_csv",
    "json_dumps",
]

PLANT_FIELDS = ("M1", "M2", "N1", "N2", "E1", "E2")


def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def parse_complex(value, path):
    if _is_number(value):
        out = complex(value)
    elif isinstance(value, list) and len(value) == 2 and all(_is_number(x) for x in value):
        out = complex(value[0], value[1])
    else:
        raise ConfigError(path, f"expected a number or [re, im], got {value!r}")
    if not (math.isfinite(out.real) and math.isfinite(out.imag)):
        raise ConfigError(path, "value is not finite")
    return out


def parse_matrix(value, path):
    if _is_number(value) or (isinstance(value, list) and len(value) == 2
                             and all(_is_number(x) for x in value)):
        return np.array([[parse_complex(value, path)]])
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise ConfigError(path, "expected a matrix (list of rows) or a scalar")
    width = len(value[0])
    rows = []
    for i, row in enumerate(value):
        if len(row) != width or width == 0:
            raise ConfigError(f"{path}[{i}]", f"row has length {len(row)}, expected {width}")
        rows.append([parse_complex(x, f"{path}[{i}][{j}]") for j, x in enumerate(row)])
    return np.array(rows, dtype=complex)


def complex_to_json(z):
    z = complex(z)
    return z.real if z.imag == 0 else [z.real, z.imag]


def matrix_to_json(A):
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    if A.shape == (1, 1):
        return complex_to_json(A[0, 0])
    return [[complex_to_json(x) for x in row] for row in A]


def _section(doc, name, path=None):
    path = name if path is None else path
    sec = doc.get(name, {})
    if sec is None:
        sec = {}
    if not isinstance(sec, dict):
        raise ConfigError(path, "expected an object")
    return sec


def _num(sec, key, path, default=None, positive=False, nonneg=False, integer=False, allow_null=False):
    if key not in sec or (sec[key] is None and allow_null):
        if default is None and not allow_null:
            raise ConfigError(f"{path}.{key}", "missing required field")
        return default
    v = sec[key]
    if not _is_number(v) or not math.isfinite(v):
        raise ConfigError(f"{path}.{key}", f"expected a number, got {v!r}")
    if integer:
        if int(v) != v:
            raise ConfigError(f"{path}.{key}", f"expected an integer, got {v!r}")
        v = int(v)
    if positive and not v > 0:
        raise ConfigError(f"{path}.{key}", f"must be > 0, got {v!r}")
    if nonneg and not v >= 0:
        raise ConfigError(f"{path}.{key}", f"must be >= 0, got {v!r}")
    return v


@dataclass(frozen=True)
class PopovOptions:
    theta_max: float = None
    theta_steps: int = 200
    per_decade: int = 400


@dataclass(frozen=True)
class CertifyOptions:
    theta: float = None
    convention: str = "realization"
    p1_lo: float = 1e-4
    p1_hi: float = 1e2
    p1_steps: int = 61
    ratio_max: float = 0.9
    ratio_steps: int = 7


@dataclass(frozen=True)
class VerifyOptions:
    dim: int = 24
    P: tuple = (0.1, 0.0)
    theta: float = 1.0
    saturation: float = 4.0
    order: int = 4
    membership_dim: int = 24
    random_instances: int = 5


@dataclass(frozen=True)
class SimulationOptions:
    dim: int = 30
    hamiltonian: str = "saturated"
    saturation: float = 4.0
    order: int = 4
    t_end: float = 3.0
    dt: float = None
    initial: dict = field(default_factory=lambda: {"kind": "fock", "n": 1})
    method: str = "rk4"
    record_every: int = 1


@dataclass(frozen=True)
class AnalysisConfig:
    plant: object
    bounds: PerturbationBounds
    popov: PopovOptions = PopovOptions()
    certify: CertifyOptions = CertifyOptions()
    verify: VerifyOptions = VerifyOptions()
    simulation: SimulationOptions = SimulationOptions()
    output: str = None


def _parse_plant(doc):
    if "plant" not in doc:
        raise ConfigError("plant", "missing required section")
    sec = _section(doc, "plant")
    arrays = {}
    for name in PLANT_FIELDS:
        if name not in sec:
            raise ConfigError(f"plant.{name}", "missing required field")
        arrays[name] = parse_matrix(sec[name], f"plant.{name}")
    try:
        return build_plant(**arrays)
    except QstabError as exc:
        raise ConfigError("plant", str(exc)) from exc


def _parse_bounds(doc):
    if "bounds" not in doc:
        raise ConfigError("bounds", "missing required section")
    sec = _section(doc, "bounds")
    p = "bounds"
    return PerturbationBounds(
        gamma=_num(sec, "gamma", p, positive=True),
        beta=_num(sec, "beta", p, 1.0, positive=True),
        delta1=_num(sec, "delta1", p, 0.0, nonneg=True),
        delta2=_num(sec, "delta2", p, 0.0, nonneg=True),
        delta3=_num(sec, "delta3", p, 0.0, nonneg=True),
    )


def _choice(sec, key, path, options, default):
    v = sec.get(key, default)
    if v not in options:
        raise ConfigError(f"{path}.{key}", f"must be one of {options}, got {v!r}")
    return v


def _parse_initial(sec, path):
    init = sec.get("initial", {"kind": "fock", "n": 1})
    if not isinstance(init, dict):
        raise ConfigError(path, "expected an object")
    kind = _choice(init, "kind", path, ("fock", "coherent", "thermal"), "fock")
    if kind == "fock":
        return {"kind": kind, "n": _num(init, "n", path, 1, nonneg=True, integer=True)}
    if kind == "coherent":
        if "alpha" not in init:
            raise ConfigError(f"{path}.alpha", "missing required field")
        alpha = parse_complex(init["alpha"], f"{path}.alpha")
        return {"kind": kind, "alpha": complex_to_json(alpha)}
    return {"kind": kind, "nbar": _num(init, "nbar", path, nonneg=True)}


def parse_config(doc):
    """Build an :class:`AnalysisConfig` from a decoded JSON document."""
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "expected a JSON object")
    plant = _parse_plant(doc)
    bounds = _parse_bounds(doc)
    s = _section(doc, "popov")
    popov = PopovOptions(
        theta_max=_num(s, "theta_max", "popov", None, positive=True, allow_null=True),
        theta_steps=_num(s, "theta_steps", "popov", 200, positive=True, integer=True),
        per_decade=_num(s, "per_decade", "popov", 400, positive=True, integer=True),
    )
    s = _section(doc, "certify")
    certify = CertifyOptions(
        theta=_num(s, "theta", "certify", None, nonneg=True, allow_null=True),
        convention=_choice(s, "convention", "certify", ("realization", "lyapunov"), "realization"),
        p1_lo=_num(s, "p1_lo", "certify", 1e-4, positive=True),
        p1_hi=_num(s, "p1_hi", "certify", 1e2, positive=True),
        p1_steps=_num(s, "p1_steps", "certify", 61, positive=True, integer=True),
        ratio_max=_num(s, "ratio_max", "certify", 0.9, positive=True),
        ratio_steps=_num(s, "ratio_steps", "certify", 7, positive=True, integer=True),
    )
    if not certify.ratio_max < 1:
        raise ConfigError("certify.ratio_max", "must be < 1 to keep P positive definite")
    s = _section(doc, "verify")
    Pv = s.get("P", [0.1, 0.0])
    if not isinstance(Pv, list) or len(Pv) != 2:
        raise ConfigError("verify.P", "expected [p1, p2] with p2 a complex scalar")
    verify = VerifyOptions(
        dim=_num(s, "dim", "verify", 24, positive=True, integer=True),
        P=(parse_complex(Pv[0], "verify.P[0]").real, parse_complex(Pv[1], "verify.P[1]")),
        theta=_num(s, "theta", "verify", 1.0, nonneg=True),
        saturation=_num(s, "saturation", "verify", 4.0, positive=True),
        order=_num(s, "order", "verify", 4, positive=True, integer=True),
        membership_dim=_num(s, "membership_dim", "verify", 24, positive=True, integer=True),
        random_instances=_num(s, "random_instances", "verify", 5, nonneg=True, integer=True),
    )
    s = _section(doc, "simulation")
    sim = SimulationOptions(
        dim=_num(s, "dim", "simulation", 30, positive=True, integer=True),
        hamiltonian=_choice(s, "hamiltonian", "simulation", ("none", "kerr", "saturated"), "saturated"),
        saturation=_num(s, "saturation", "simulation", 4.0, positive=True),
        order=_num(s, "order", "simulation", 4, positive=True, integer=True),
        t_end=_num(s, "t_end", "simulation", 3.0, positive=True),
        dt=_num(s, "dt", "simulation", None, positive=True, allow_null=True),
        initial=_parse_initial(s, "simulation.initial"),
        method=_choice(s, "method", "simulation", ("rk4", "expm"), "rk4"),
        record_every=_num(s, "record_every", "simulation", 1, positive=True, integer=True),
    )
    out = doc.get("output")
    if out is not None and not isinstance(out, str):
        raise ConfigError("output", "expected a directory path string")
    return AnalysisConfig(plant, bounds, popov, certify, verify, sim, out)


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON: {exc}") from exc
    return parse_config(doc)


def plant_to_dict(plant):
    return {
        "M1": matrix_to_json(plant.M.b1),
        "M2": matrix_to_json(plant.M.b2),
        "N1": matrix_to_json(plant.N1),
        "N2": matrix_to_json(plant.N2),
        "E1": matrix_to_json(plant.E1),
        "E2": matrix_to_json(plant.E2),
    }


def example_config(name="kerr", kappa=2.0, gamma=0.1):
    """Template document; ``kerr`` is the Kerr cavity with ``z = a^*``."""
    if name != "kerr":
        raise ConfigError("--example", f"unknown example {name!r}")
    return {
        "plant": plant_to_dict(kerr_plant(kappa)),
        "bounds": {"gamma": gamma, "beta": 1.0, "delta1": 0.0, "delta2": 0.0, "delta3": 0.0},
        "popov": {"theta_max": None, "theta_steps": 200, "per_decade": 400},
        "certify": {"theta": 1.0, "convention": "realization"},
        "verify": {"dim": 24, "P": [0.1, 0.0], "theta": 1.0, "saturation": 4.0, "order": 4,
                   "membership_dim": 24, "random_instances": 5},
        "simulation": {"dim": 30, "hamiltonian": "saturated", "saturation": 4.0, "order": 4,
                       "t_end": 3.0, "dt": None, "initial": {"kind": "fock", "n": 1},
                       "method": "rk4", "record_every": 1},
    }


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (complex, np.complexfloating)):
        return [_clean(obj.real), _clean(obj.imag)]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def json_dumps(obj):
    """Deterministic JSON: sorted keys, non-finite floats as ``null``."""
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def atomic_write_text(path, text):
    """Write via a temporary file in the same directory, then rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj):
    atomic_write_text(path, json_dumps(obj))


def _fmt(v):
    return "%.17g" % v


def write_csv(path, header, rows):
    """Locale-independent CSV: '.' decimals, ``%.17g`` numbers, '\\n' line ends."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(float(v)) for v in row])
    atomic_write_text(path, buf.getvalue())
