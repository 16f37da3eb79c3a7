"""Run configuration: ``key = value`` files merged with command-line flags."""

import ast
import math
import operator
import os
from dataclasses import dataclass, field, fields, replace

from ..errors import ConfigError
from ..model import AnisotropyVector, parameterize_lambda, parameterize_theta

SOLVERS = ("exact", "dtwa", "dmft", "cdmft", "pair", "sy", "do-protocol", "oracle-ising")
ANISOTROPY_KEYS = ("lambda", "theta", "g")
METHODS = ("auto", "dense", "krylov")
PLANES = ("XY", "YZ", "ZX")
VALID_AXES = ("X", "Y", "Z", "Ramsey")


def _positive_int(key, text):
    try:
        v = int(text)
    except (TypeError, ValueError):
        raise ConfigError(key, f"expected an integer, got {text!r}") from None
    if v < 1:
        raise ConfigError(key, f"must be positive, got {v}")
    return v


def _int(key, text):
    try:
        return int(text)
    except (TypeError, ValueError):
        raise ConfigError(key, f"expected an integer, got {text!r}") from None


def _float(key, text):
    try:
        v = float(text)
    except (TypeError, ValueError):
        raise ConfigError(key, f"expected a number, got {text!r}") from None
    if math.isnan(v):
        raise ConfigError(key, "must not be NaN")
    return v


def _positive_float(key, text):
    v = _float(key, text)
    if not (v > 0 and math.isfinite(v)):
        raise ConfigError(key, f"must be positive and finite, got {v}")
    return v


def _optional_positive_float(key, text):
    if text is None or str(text).strip().lower() in ("", "none"):
        return None
    return _positive_float(key, text)


def _triple(key, text):
    if isinstance(text, (tuple, list)):
        parts = list(text)
    else:
        parts = str(text).strip().strip("()[]").split(",")
    if len(parts) != 3:
        raise ConfigError(key, f"expected three comma-separated numbers, got {text!r}")
    return tuple(_float(key, p) for p in parts)


def _choice(options):
    def conv(key, text):
        v = str(text).strip()
        for o in options:
            if v.lower() == o.lower():
                return o
        raise ConfigError(key, f"expected one of {', '.join(options)}, got {text!r}")
    return conv


def _axes(key, text):
    if isinstance(text, (tuple, list)):
        items = list(text)
    else:
        raw = str(text).replace(" ", "")
        items = raw.split(",") if "," in raw else (
            [raw] if raw.lower() == "ramsey" else list(raw))
    out = []
    for item in items:
        match = [a for a in VALID_AXES if a.lower() == str(item).lower()]
        if not match:
            raise ConfigError(key, f"unknown axis {item!r}")
        if match[0] not in out:
            out.append(match[0])
    if not out:
        raise ConfigError(key, "no axes given")
    return tuple(out)


def _str(key, text):
    v = str(text).strip()
    if not v:
        raise ConfigError(key, "must not be empty")
    return v


def _box(key, text):
    if text is None or str(text).strip().lower() in ("", "none"):
        return None
    if str(text).strip().lower() in ("inf", "open"):
        return math.inf
    return _positive_float(key, text)


# key -> converter; every key is also a command-line flag (--key, dashes allowed)
CONVERTERS = {
    "solver": _choice(SOLVERS),
    "n": _positive_int,
    "m": _positive_int,
    "n_t": _positive_int,
    "n_noise": _positive_int,
    "n_samples": _positive_int,
    "n_disorder": _positive_int,
    "lambda": _float,
    "theta": _float,
    "g": _triple,
    "t_max": _positive_float,
    "n_points": _positive_int,
    "r_min": _optional_positive_float,
    "j0_cluster": _positive_float,
    "seed": _int,
    "output": _str,
    "axes": _axes,
    "method": _choice(METHODS),
    "max_step": _positive_float,
    "tol": _positive_float,
    "max_iter": _positive_int,
    "w_tau": _float,
    "plane": _choice(PLANES),
    "c_min": _positive_float,
    "geometry": _str,
    "box_length": _box,
}


@dataclass(frozen=True)
class RunConfig:
    solver: str
    anisotropy: tuple  # (form, value) with form in lambda | theta | g
    n: int = 2
    m: int = 100
    n_t: int = 2000
    n_noise: int = 1000
    n_samples: int = 100_000
    n_disorder: int = 10_000
    t_max: float = 2.0
    n_points: int = 41
    r_min: float | None = None
    j0_cluster: float = 1.75
    seed: int = 0
    output: str = "dxl-run"
    axes: tuple = ("X", "Y", "Z")
    method: str = "auto"
    max_step: float = 0.01
    tol: float = 1e-2
    max_iter: int = 50
    w_tau: float = 1.6 * math.pi
    plane: str = "XY"
    c_min: float = 0.2
    geometry: str | None = None
    box_length: float | None = None

    @property
    def g(self):
        form, value = self.anisotropy
        if form == "lambda":
            return parameterize_lambda(value)
        if form == "theta":
            return parameterize_theta(value)
        return AnisotropyVector(*value)

    def with_anisotropy(self, form, value):
        return replace(self, anisotropy=(form, value))

    def echo(self):
        """``key = value`` lines that parse back to this config."""
        lines = [f"solver = {self.solver}"]
        form, value = self.anisotropy
        lines.append(f"{form} = {_format(value)}")
        for f in fields(self):
            if f.name in ("solver", "anisotropy"):
                continue
            v = getattr(self, f.name)
            if v is None:
                continue
            lines.append(f"{f.name} = {_format(v)}")
        return "\n".join(lines) + "\n"


def _format(v):
    if isinstance(v, tuple):
        return ",".join(_format(x) for x in v)
    if isinstance(v, float):
        return "inf" if math.isinf(v) else repr(v)
    return str(v)


def read_config_file(path):
    """Raw ``{key: text}`` from a ``key = value`` file; ``#`` starts a comment."""
    if not os.path.isfile(path):
        raise ConfigError("config", f"file not found: {path}")
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError("config", f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_").lower()
            if key in out:
                raise ConfigError(key, f"{path}:{lineno}: duplicate key")
            out[key] = value
    return out


def parse_config(path=None, flags=None):
    """Validated RunConfig from an optional file and a flag mapping.

    Flags override file entries key by key.  An anisotropy given on the
    command line replaces any anisotropy form from the file; within one
    source at most one of lambda, theta and g may appear.
    """
    file_values = read_config_file(path) if path else {}
    flag_values = {k.replace("-", "_").lower(): v for k, v in (flags or {}).items()
                   if v is not None}
    for source in (file_values, flag_values):
        unknown = sorted(set(source) - set(CONVERTERS))
        if unknown:
            raise ConfigError(unknown[0], "unknown configuration key")
        given = [k for k in ANISOTROPY_KEYS if k in source]
        if len(given) > 1:
            raise ConfigError(given[1], f"conflicts with {given[0]}; give exactly one anisotropy")
    merged = dict(file_values)
    if any(k in flag_values for k in ANISOTROPY_KEYS):
        for k in ANISOTROPY_KEYS:
            merged.pop(k, None)
    merged.update(flag_values)

    values = {k: CONVERTERS[k](k, v) for k, v in merged.items()}
    if "solver" not in values:
        raise ConfigError("solver", "required")
    solver = values.pop("solver")
    aniso = [k for k in ANISOTROPY_KEYS if k in values]
    if aniso:
        form = aniso[0]
        anisotropy = (form, values.pop(form))
    elif solver == "oracle-ising":
        anisotropy = ("g", (0.0, 0.0, 1.0))
    else:
        raise ConfigError("anisotropy", "exactly one of lambda, theta or g is required")
    if solver == "oracle-ising" and AnisotropyVector(*_oracle_g(anisotropy)).as_tuple()[:2] != (0.0, 0.0):
        raise ConfigError("anisotropy", "the Ising oracle only applies to g = (0, 0, g_z)")
    if "w_tau" in values and values["w_tau"] < 0:
        raise ConfigError("w_tau", "must be non-negative")
    if values.get("n_points", 2) < 2:
        raise ConfigError("n_points", "need at least two time points")
    cfg = RunConfig(solver=solver, anisotropy=anisotropy, **values)
    cfg.g  # validate finiteness
    return cfg


def _oracle_g(anisotropy):
    form, value = anisotropy
    if form == "lambda":
        return parameterize_lambda(value).as_tuple()
    if form == "theta":
        return parameterize_theta(value).as_tuple()
    return value


@dataclass(frozen=True)
class SweepSpec:
    parameter: str  # lambda | theta
    values: tuple
    axes: tuple = ("X", "Y", "Z")
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.parameter not in ("lambda", "theta"):
            raise ConfigError("parameter", "sweep parameter must be lambda or theta")
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ConfigError("values", "sweep grid is empty")
        diffs = [b - a for a, b in zip(vals, vals[1:])]
        if not (all(d > 0 for d in diffs) or all(d < 0 for d in diffs)):
            raise ConfigError("values", "sweep grid must be strictly monotone")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "axes", _axes("axes", self.axes))

    def point_config(self, base, k):
        """RunConfig for grid point ``k`` (overrides apply to every point)."""
        cfg = replace(base, axes=self.axes, **self.overrides)
        return cfg.with_anisotropy(self.parameter, self.values[k])


def parse_grid(text):
    """Comma-separated numbers; entries may use ``pi`` (e.g. ``-pi/4``, ``3*pi/4``)."""
    out = []
    for item in str(text).split(","):
        item = item.strip()
        if not item:
            continue
        try:
            out.append(float(_safe_eval(item)))
        except (ValueError, SyntaxError, ZeroDivisionError):
            raise ConfigError("values", f"cannot parse grid value {item!r}") from None
    return out


_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
        ast.Div: operator.truediv, ast.USub: operator.neg, ast.UAdd: operator.pos}


def _safe_eval(expr):
    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return node.value
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        raise ValueError(expr)

    return ev(ast.parse(expr, mode="eval"))
