"""Experiment configuration: YAML parsing, validation, and the describe view.

Field names follow the normative schema; see README for a full example. All
randomness derives from the master seed, so identical configs yield
byte-identical outputs.
"""

import math
from dataclasses import dataclass, field

import yaml

from .errors import ConfigError
from .lattice import LatticeSpacing
from .schemes import GGPolicy, make_zoom_state, required_rate
from .sources import SourceKind, SourceSpec, validate_spec

KINDS = ("DeltaMod", "GoodmanGersho", "ZoomControl", "CustomScheme")

_REQUIRED = object()


def _get(mapping, path, expected, default=_REQUIRED):
    node = mapping
    parts = path.split(".")
    for i, part in enumerate(parts):
        if not isinstance(node, dict) or part not in node:
            if default is _REQUIRED:
                raise ConfigError(path, "missing required field")
            return default
        node = node[part]
    if expected is float and isinstance(node, int) and not isinstance(node, bool):
        node = float(node)
    if expected is not None and not isinstance(node, expected):
        raise ConfigError(path, f"expected {getattr(expected, '__name__', expected)}, "
                                f"got {type(node).__name__}")
    return node


@dataclass
class DiagnosticsConfig:
    m_grid: list = field(default_factory=lambda: [1.0, 2.0, 5.0, 10.0, 20.0])
    tight_threshold: float = 0.05
    functionals: list = field(default_factory=lambda: [
        "indicator_abs_le:5", "tanh", "indicator_nonneg"])
    initials: list = field(default_factory=lambda: [-5.0, 0.0, 5.0])
    shifts: list = field(default_factory=lambda: [0, 1000])
    se_multiplier: float = 3.0
    abs_floor: float = 0.01
    ams_window: int = 3
    ams_trajs: int = 16
    ams_horizon: int | None = None
    run_ams: bool = True
    run_ergodicity: bool = True


@dataclass
class ExperimentConfig:
    kind: str
    seed: int
    source: SourceSpec | None
    scheme: dict
    n_trajs: int
    horizon: int
    burn_in: int | None
    diagnostics: DiagnosticsConfig
    out_dir: str


def _parse_source(raw, master_seed):
    kind_name = _get(raw, "source.kind", str).lower()
    try:
        kind = SourceKind(kind_name)
    except ValueError:
        raise ConfigError("source.kind", f"must be one of iid/ar/ma, got {kind_name!r}")
    coeffs = _get(raw, "source.coefficients", list, [])
    spec = SourceSpec(
        kind=kind,
        coefficients=tuple(coeffs),
        noise_std=_get(raw, "source.noise_std", float, 1.0),
        mean_shift=_get(raw, "source.mean_shift", float, 0.0),
        seed=_get(raw, "source.seed", int, master_seed),
    )
    try:
        return validate_spec(spec)
    except Exception as exc:
        raise ConfigError("source", str(exc))


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ConfigError("kind", "missing required field")
    return parse_config(raw)


def parse_config(raw: dict) -> ExperimentConfig:
    kind = _get(raw, "kind", str)
    if kind not in KINDS:
        raise ConfigError("kind", f"must be one of {KINDS}, got {kind!r}")
    seed = _get(raw, "seed", int)
    source = None
    if kind != "ZoomControl":
        source = _parse_source(raw, seed)

    scheme = _get(raw, "scheme", dict, {})
    scheme = dict(scheme)
    _validate_scheme(kind, scheme)

    diag_raw = _get(raw, "diagnostics", dict, {})
    diag = DiagnosticsConfig()
    for name in ("m_grid", "functionals", "initials", "shifts"):
        if name in diag_raw:
            value = _get(diag_raw, name, list)
            if not value:
                raise ConfigError(f"diagnostics.{name}", "must be nonempty")
            setattr(diag, name, value)
    for name, typ in (("tight_threshold", float), ("se_multiplier", float),
                      ("abs_floor", float), ("ams_window", int),
                      ("ams_trajs", int), ("ams_horizon", int),
                      ("run_ams", bool), ("run_ergodicity", bool)):
        if name in diag_raw:
            setattr(diag, name, _get(diag_raw, name, typ))
    if list(diag.m_grid) != sorted(diag.m_grid):
        raise ConfigError("diagnostics.m_grid", "must be ascending")

    n_trajs = _get(raw, "ensemble.n_trajs", int, 256)
    horizon = _get(raw, "ensemble.horizon", int, 100_000)
    burn_in = _get(raw, "ensemble.burn_in", int, None)
    if n_trajs < 1:
        raise ConfigError("ensemble.n_trajs", "must be >= 1")
    if horizon < 1:
        raise ConfigError("ensemble.horizon", "must be >= 1")

    return ExperimentConfig(kind=kind, seed=seed, source=source, scheme=scheme,
                            n_trajs=n_trajs, horizon=horizon, burn_in=burn_in,
                            diagnostics=diag,
                            out_dir=_get(raw, "out_dir", str, "quantstab-out"))


def _validate_scheme(kind, scheme):
    """Kind-specific scheme validation; fills derived defaults in place."""
    try:
        if kind == "DeltaMod":
            if "m" not in scheme:
                _raise("scheme.m")
            m = float(scheme["m"])
            if m <= 0:
                raise ConfigError("scheme.m", "must be positive")
            scheme["m"] = m
            scheme.setdefault("s0", 0.0)
        elif kind == "GoodmanGersho":
            policy = gg_policy_from(scheme)
            scheme["_policy"] = policy
        elif kind == "ZoomControl":
            state, notes = zoom_state_from(scheme)
            scheme["_zoom"] = state
            scheme["_notes"] = notes
        elif kind == "CustomScheme":
            if "c" not in scheme:
                _raise("scheme.c")
            scheme["c"] = float(scheme["c"])
            scheme.setdefault("d", 0.0)
            scheme.setdefault("s0", 0.0)
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError("scheme", str(exc))


def _raise(path):
    raise ConfigError(path, "missing required field")


def gg_policy_from(scheme):
    thresholds = scheme.get("thresholds") or _raise("scheme.thresholds")
    log_steps = scheme.get("log_steps") or _raise("scheme.log_steps")
    lattice = scheme.get("lattice", {})
    spacing = LatticeSpacing(int(lattice.get("p", 1)), int(lattice.get("q", 1)))
    return GGPolicy(thresholds=tuple(thresholds), log_steps=tuple(log_steps),
                    spacing=spacing,
                    require_coprime=bool(scheme.get("require_coprime", False)))


def zoom_state_from(scheme):
    for name in ("a", "b"):
        if name not in scheme:
            _raise(f"scheme.{name}")
    a = float(scheme["a"])
    b = float(scheme["b"])
    k_min, threshold = required_rate(a)
    K = int(scheme.get("K", k_min))
    lattice = scheme.get("lattice", {})
    spacing = LatticeSpacing(int(lattice.get("p", 1)), int(lattice.get("q", 1)))
    L = float(scheme.get("L", 1.0))
    state, notes = make_zoom_state(
        a=a, b=b, K=K,
        alpha=float(scheme.get("alpha", 0.5)),
        zoom_out=float(scheme.get("zoom_out", abs(a) + abs(a))),
        L=L, delta0=float(scheme.get("delta0", L)), spacing=spacing)
    scheme.setdefault("noise_std", 1.0)
    scheme.setdefault("x0", 0.0)
    if math.log2(K + 1) <= threshold:
        notes.append(f"rate log2(K+1) = {math.log2(K + 1):.4f} does not exceed the "
                     f"stabilizability threshold log2(ceil|a|+1) = {threshold:.4f}; "
                     "the rate theorem predicts instability")
    return state, notes


def describe(config: ExperimentConfig) -> str:
    """Resolved parameters and derived quantities, without executing."""
    lines = [f"kind = {config.kind}", f"seed = {config.seed}"]
    if config.source is not None:
        src = config.source
        lines += [f"source.kind = {src.kind.value}",
                  f"source.coefficients = {list(src.coefficients)}",
                  f"source.noise_std = {src.noise_std}",
                  f"source.mean_shift = {src.mean_shift}",
                  f"source.seed = {src.seed}"]
    lines += [f"ensemble.n_trajs = {config.n_trajs}",
              f"ensemble.horizon = {config.horizon}"]

    if config.kind == "DeltaMod":
        lines += [f"scheme.m = {config.scheme['m']}",
                  f"scheme.s0 = {config.scheme['s0']}"]
    elif config.kind == "GoodmanGersho":
        policy = config.scheme["_policy"]
        lines += [f"scheme.thresholds = {list(policy.thresholds)}",
                  f"scheme.log_steps = {list(policy.log_steps)}",
                  f"scheme.q2_values = {list(policy.q2_values())}",
                  f"scheme.lattice = 2^({policy.spacing.p}/{policy.spacing.q})",
                  f"scheme.coprime = {policy.coprime}"]
        if not policy.coprime:
            gcd = math.gcd(*[abs(s) for s in policy.log_steps if s != 0])
            lines.append(f"warning: log steps share gcd {gcd}; lattice coverage is partial")
    elif config.kind == "ZoomControl":
        zoom = config.scheme["_zoom"]
        k_min, threshold = required_rate(zoom.a)
        lines += [f"scheme.a = {zoom.a}", f"scheme.b = {zoom.b}",
                  f"scheme.K = {zoom.K}",
                  f"scheme.rate = log2(K+1) = {math.log2(zoom.K + 1):.6f}",
                  f"R_threshold = log2(ceil|a|+1) = {threshold:.6f}",
                  f"K_min = {k_min}",
                  f"scheme.alpha = {zoom.alpha} (lattice step {zoom.zoom_in_step})",
                  f"scheme.zoom_out = {zoom.zoom_out} (lattice step {zoom.zoom_out_step})",
                  f"scheme.L = {zoom.L}",
                  f"scheme.coprime = {zoom.coprime}"]
        for note in config.scheme.get("_notes", []):
            lines.append(f"note: {note}")
    elif config.kind == "CustomScheme":
        lines += [f"scheme.c = {config.scheme['c']}",
                  f"scheme.d = {config.scheme['d']}"]

    diag = config.diagnostics
    lines += [f"diagnostics.m_grid = {list(diag.m_grid)}",
              f"diagnostics.functionals = {list(diag.functionals)}",
              f"diagnostics.initials = {list(diag.initials)}",
              f"diagnostics.shifts = {list(diag.shifts)}",
              f"diagnostics.se_multiplier = {diag.se_multiplier}",
              f"diagnostics.abs_floor = {diag.abs_floor}"]
    return "\n".join(lines)
