"""Run configuration: TOML text <-> validated RunConfig.

Grammar: TOML (sections in brackets, ``key = value``, arrays in brackets).
Complex numbers are written as a real number or a ``[re, im]`` pair.

    command = "trace"            # solve-local | newton | trace | foliate | solve-nd | nonsqueeze | check
    N = 32                       # truncation degree
    tol = 1e-8                   # certificate tolerance
    seed = 0

    [field]      kind, n, a0, r0, rho_in, rho_out, linear, pattern_seed
    [torus]      R, t = [...], convention
    [anchor]     p = [...], a, b = [...], v = [...]
    [continuation] dt0, dt_min, dt_max, max_steps, max_newton, secant, eta, scale
    [local]      lam, lam0, max_iter, use_chart, W = [...]
    [foliation]  count, rho, eval_nr, eval_nt
    [nonsqueeze] r, R, map, angle, squeeze, shift = [...]
"""

import dataclasses
from dataclasses import dataclass, field as dc_field

import tomli
import tomli_w

from .errors import ConfigError

COMMANDS = ("solve-local", "newton", "trace", "foliate", "solve-nd", "nonsqueeze", "check")
FIELD_KINDS = ("zero", "bump", "lower_triangular", "calibrated")


@dataclass(frozen=True)
class FieldConfig:
    kind: str = "zero"
    n: int = 2
    a0: float = 0.5
    r0: float = 0.1
    rho_in: float = 2.0
    rho_out: float = 3.0
    linear: float = 0.05
    pattern_seed: int = 7


@dataclass(frozen=True)
class TorusConfig:
    R: float = 1.0
    t: tuple = ()
    convention: str = "squared"


@dataclass(frozen=True)
class AnchorConfig:
    p: tuple = ()
    a: complex = 0j
    b: tuple = ()
    v: tuple = ()


@dataclass(frozen=True)
class ContinuationConfig:
    dt0: float = 0.25
    dt_min: float = 1e-6
    dt_max: float = 0.5
    max_steps: int = 200
    max_newton: int = 8
    secant: bool = True
    eta: float = -1.0  # negative: default rule
    scale: float = 1.0  # field scale used by the single-shot newton command


@dataclass(frozen=True)
class LocalConfig:
    lam: float = 1.0
    lam0: float = 0.3
    max_iter: int = 40
    use_chart: bool = False
    W: tuple = ()  # holomorphic W(zeta) = sum_k W[j][k] zeta^k per component; empty: anchored problem


@dataclass(frozen=True)
class FoliationConfig:
    count: int = 16
    rho: float = 1.0
    eval_nr: int = 17
    eval_nt: int = 64


@dataclass(frozen=True)
class NonsqueezeConfig:
    r: float = 0.9
    R: float = 1.0
    map: str = "rotation"  # identity | rotation | squeeze
    angle: float = 0.6
    squeeze: float = 0.95
    shift: tuple = ()


@dataclass(frozen=True)
class RunConfig:
    command: str = "check"
    N: int = 32
    tol: float = 1e-8
    seed: int = 0
    field: FieldConfig = dc_field(default_factory=FieldConfig)
    torus: TorusConfig = dc_field(default_factory=TorusConfig)
    anchor: AnchorConfig = dc_field(default_factory=AnchorConfig)
    continuation: ContinuationConfig = dc_field(default_factory=ContinuationConfig)
    local: LocalConfig = dc_field(default_factory=LocalConfig)
    foliation: FoliationConfig = dc_field(default_factory=FoliationConfig)
    nonsqueeze: NonsqueezeConfig = dc_field(default_factory=NonsqueezeConfig)


SECTIONS = {
    "field": FieldConfig,
    "torus": TorusConfig,
    "anchor": AnchorConfig,
    "continuation": ContinuationConfig,
    "local": LocalConfig,
    "foliation": FoliationConfig,
    "nonsqueeze": NonsqueezeConfig,
}


def _complex(key, v):
    if isinstance(v, bool):
        raise ConfigError(f"{key}: expected a number")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
        return complex(v[0], v[1])
    raise ConfigError(f"{key}: expected a number or [re, im] pair, got {v!r}")


def _coerce(key, default, v):
    if isinstance(default, bool):
        if not isinstance(v, bool):
            raise ConfigError(f"{key}: expected true/false")
        return v
    if isinstance(default, int):
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(f"{key}: expected an integer")
        return v
    if isinstance(default, float):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{key}: expected a number")
        return float(v)
    if isinstance(default, complex):
        return _complex(key, v)
    if isinstance(default, str):
        if not isinstance(v, str):
            raise ConfigError(f"{key}: expected a string")
        return v
    if isinstance(default, tuple):
        if not isinstance(v, list):
            raise ConfigError(f"{key}: expected an array")
        return tuple(v)
    raise ConfigError(f"{key}: unsupported value")


def _build(cls, data, prefix):
    names = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(names))
    if unknown:
        raise ConfigError(f"unknown key {prefix}{unknown[0]}")
    values = {}
    defaults = cls()
    for name, v in data.items():
        key = prefix + name
        if name in SECTIONS and prefix == "":
            if not isinstance(v, dict):
                raise ConfigError(f"{key}: expected a [{name}] section")
            values[name] = _build(SECTIONS[name], v, name + ".")
        else:
            values[name] = _coerce(key, getattr(defaults, name), v)
    return cls(**values)


def _complex_list(key, items):
    return tuple(_complex(f"{key}[{i}]", x) for i, x in enumerate(items))


def _check(cond, key, message):
    if not cond:
        raise ConfigError(f"{key}: {message}")


def validate(cfg):
    """Range rules; returns a normalised copy (complex arrays parsed)."""
    _check(cfg.command in COMMANDS, "command", f"must be one of {', '.join(COMMANDS)}")
    _check(2 <= cfg.N <= 64, "N", "truncation degree must lie in [2, 64]")
    _check(0 < cfg.tol < 1, "tol", "tolerance must lie in (0, 1)")
    _check(0 <= cfg.seed < 2**64, "seed", "seed must be an unsigned 64-bit integer")
    f = cfg.field
    _check(f.kind in FIELD_KINDS, "field.kind", f"must be one of {', '.join(FIELD_KINDS)}")
    _check(1 <= f.n <= 6, "field.n", "dimension must lie in [1, 6]")
    _check(0 <= f.a0 < 1, "field.a0", f"taming bound a0 = {f.a0} must lie in [0, 1)")
    _check(f.r0 >= 0, "field.r0", "support radius must be non-negative")
    _check(0 < f.rho_in < f.rho_out, "field.rho_in", "cutoff radii must satisfy 0 < rho_in < rho_out")
    _check(f.linear >= 0, "field.linear", "must be non-negative")
    _check(f.pattern_seed >= 0, "field.pattern_seed", "must be non-negative")
    t = cfg.torus
    _check(t.R > 0, "torus.R", "radius must be positive")
    _check(t.convention in ("squared", "radius"), "torus.convention", "must be 'squared' or 'radius'")
    for i, x in enumerate(t.t):
        _check(isinstance(x, (int, float)) and not isinstance(x, bool) and x > 0, f"torus.t[{i}]",
               "radii must be positive numbers")
    torus = dataclasses.replace(t, t=tuple(float(x) for x in t.t))
    an = cfg.anchor
    anchor = dataclasses.replace(an, p=_complex_list("anchor.p", an.p), b=_complex_list("anchor.b", an.b),
                                 v=_complex_list("anchor.v", an.v))
    c = cfg.continuation
    _check(0 < c.dt_min <= c.dt0 <= 1, "continuation.dt0", "need 0 < dt_min <= dt0 <= 1")
    _check(c.dt0 <= c.dt_max <= 1, "continuation.dt_max", "need dt0 <= dt_max <= 1")
    _check(1 <= c.max_steps <= 100000, "continuation.max_steps", "must lie in [1, 100000]")
    _check(1 <= c.max_newton <= 50, "continuation.max_newton", "must lie in [1, 50]")
    _check(0 <= c.scale <= 1, "continuation.scale", "must lie in [0, 1]")
    lo = cfg.local
    _check(0 < lo.lam <= 1e6, "local.lam", "must be positive")
    _check(0 < lo.lam0 < 1, "local.lam0", "must lie in (0, 1)")
    _check(1 <= lo.max_iter <= 10000, "local.max_iter", "must lie in [1, 10000]")
    W = []
    for j, comp in enumerate(lo.W):
        _check(isinstance(comp, list), f"local.W[{j}]", "each component is an array of coefficients")
        W.append(_complex_list(f"local.W[{j}]", comp))
    local = dataclasses.replace(lo, W=tuple(W))
    fo = cfg.foliation
    _check(2 <= fo.count <= 256, "foliation.count", "must lie in [2, 256]")
    _check(fo.rho > 0, "foliation.rho", "must be positive")
    _check(fo.eval_nr >= 2 and fo.eval_nt >= 4, "foliation.eval_nr", "evaluation grid too small")
    ns = cfg.nonsqueeze
    _check(ns.r > 0 and ns.R > 0, "nonsqueeze.r", "radii must be positive")
    _check(ns.map in ("identity", "rotation", "squeeze"), "nonsqueeze.map",
           "must be identity, rotation or squeeze")
    _check(ns.squeeze > 0, "nonsqueeze.squeeze", "must be positive")
    nons = dataclasses.replace(ns, shift=_complex_list("nonsqueeze.shift", ns.shift))
    return dataclasses.replace(cfg, torus=torus, anchor=anchor, local=local, nonsqueeze=nons)


def parse_config(text):
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"syntax error: {exc}") from exc
    return validate(_build(RunConfig, data, ""))


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _plain(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, tuple):
        return [_plain(x) for x in v]
    return v


def to_dict(cfg):
    out = {}
    for f in dataclasses.fields(cfg):
        v = getattr(cfg, f.name)
        out[f.name] = to_dict(v) if dataclasses.is_dataclass(v) else _plain(v)
    return out


def render_config(cfg):
    """TOML text with every value explicit (defaults included)."""
    return tomli_w.dumps(to_dict(cfg))
