"""Line-oriented run configuration.

Format: one ``section.key = value`` per line; ``#`` starts a comment. Lists
are comma separated (optionally in brackets). Unknown and duplicate keys are
errors, and so are values outside their domain.

    params.mu = 1.0
    grid.nx = 128
    initial.kind = gaussian_bump
    initial.center = 0.5, 0.5
    run.exponents = 1.5, 2, 3
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import ConfigError
from .mms import DT_LAWS, MMSConfig, TrigManufactured
from .model import Grid2D, ModelParams
from .spatial_ops import FACE_MODES, StencilConfig
from .stepper import StepperConfig

INITIAL_KINDS = ("constant", "gaussian_bump", "file")


def _nonneg(x):
    return x >= 0


def _pos(x):
    return x > 0


def _ge3(x):
    return x >= 3


def _choice(*allowed):
    def check(x):
        return x in allowed
    check.allowed = allowed
    return check


# key -> (type, default, validator, domain description)
SCHEMA = {
    "params.chi": (float, 1.0, _nonneg, ">= 0"),
    "params.xi": (float, 1.0, _nonneg, ">= 0"),
    "params.mu": (float, 1.0, _nonneg, ">= 0"),
    "params.eta": (float, 1.0, _nonneg, ">= 0"),
    "params.tau": (float, 1.0, _pos, "> 0"),
    "grid.nx": (int, 64, _ge3, ">= 3"),
    "grid.ny": (int, 64, _ge3, ">= 3"),
    "grid.lx": (float, 1.0, _pos, "> 0"),
    "grid.ly": (float, 1.0, _pos, "> 0"),
    "grid.x0": (float, 0.0, None, ""),
    "grid.y0": (float, 0.0, None, ""),
    "stepper.dt_init": (float, 0.05, _pos, "> 0"),
    "stepper.dt_min": (float, 1e-9, _pos, "> 0"),
    "stepper.cfl_safety": (float, 0.5, lambda x: 0 < x <= 1, "in (0, 1]"),
    "stepper.cg_rel_tol": (float, 1e-10, _pos, "> 0"),
    "stepper.cg_max_iter": (int, 500, _pos, "> 0"),
    "stepper.positivity_mode": (str, "clamp_report", _choice("clamp_report", "reject"), "clamp_report|reject"),
    "stepper.w_update": (str, "exact_logistic", _choice("explicit", "exact_logistic"), "explicit|exact_logistic"),
    "stepper.v_source": (str, "fresh_u", _choice("lagged_u", "fresh_u"), "lagged_u|fresh_u"),
    "stepper.preconditioner": (str, "dct", _choice("none", "jacobi", "dct"), "none|jacobi|dct"),
    "stepper.blowup_threshold": (float, 1e6, _pos, "> 0"),
    "stencil.face_averaging": (str, "upwind", _choice(*FACE_MODES), "|".join(FACE_MODES)),
    "initial.kind": (str, "gaussian_bump", _choice(*INITIAL_KINDS), "|".join(INITIAL_KINDS)),
    "initial.u": (float, 1.0, _nonneg, ">= 0"),
    "initial.v": (float, 0.5, _nonneg, ">= 0"),
    "initial.w": (float, 0.8, _nonneg, ">= 0"),
    "initial.center": (list, None, lambda x: len(x) == 2, "two coordinates"),
    "initial.width": (float, 0.15, _pos, "> 0"),
    "initial.path": (str, None, None, ""),
    "initial.perturbation": (float, 0.0, _nonneg, ">= 0"),
    "initial.modes": (int, 4, _pos, "> 0"),
    "run.t_end": (float, 1.0, _pos, "> 0"),
    "run.sample_every": (float, None, _pos, "> 0"),
    "run.exponents": (list, [2.0], lambda xs: len(xs) > 0 and all(x > 1 for x in xs), "all > 1"),
    "run.output_dir": (str, "out", None, ""),
    "run.seed": (int, 0, None, ""),
    "run.solve_transformed": (bool, False, None, ""),
    "run.snapshot_times": (list, [], lambda xs: all(x >= 0 for x in xs), "all >= 0"),
    "mms.levels": (list, ["32x32", "64x64", "128x128"], lambda xs: len(xs) >= 3, "at least 3 levels"),
    "mms.dt_law": (str, "proportional_to_h2", _choice(*DT_LAWS), "|".join(DT_LAWS)),
    "mms.dt_factor": (float, 1.0, _pos, "> 0"),
    "mms.t_end": (float, 0.5, _pos, "> 0"),
    "mms.min_slope": (float, None, None, ""),
    "mms.fields": (str, TrigManufactured.name, _choice(TrigManufactured.name), TrigManufactured.name),
    "lemma.delta": (float, 2.0, lambda x: x >= 1, ">= 1"),
    "lemma.C7": (float, 1.0, _pos, "> 0"),
    "lemma.C_gamma": (float, 1.0, _pos, "> 0"),
    "lemma.rho": (float, None, lambda x: x >= 1, ">= 1"),
}

LIST_ITEM_TYPES = {"mms.levels": str}


@dataclass(frozen=True)
class InitialData:
    kind: str = "gaussian_bump"
    u: float = 1.0
    v: float = 0.5
    w: float = 0.8
    center: Optional[tuple] = None
    width: float = 0.15
    path: Optional[str] = None
    perturbation: float = 0.0
    modes: int = 4


@dataclass(frozen=True)
class LemmaInputs:
    delta: float = 2.0
    C7: float = 1.0
    C_gamma: float = 1.0
    rho: Optional[float] = None


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams = field(default_factory=ModelParams)
    grid: Grid2D = field(default_factory=lambda: Grid2D.unit_square(64))
    stepper: StepperConfig = field(default_factory=StepperConfig)
    stencil: StencilConfig = field(default_factory=StencilConfig)
    initial: InitialData = field(default_factory=InitialData)
    t_end: float = 1.0
    sample_every: float = 0.1
    exponents: tuple = (2.0,)
    output_dir: str = "out"
    seed: int = 0
    solve_transformed: bool = False
    snapshot_times: tuple = ()
    mms: Optional[MMSConfig] = None
    lemma: LemmaInputs = field(default_factory=LemmaInputs)
    values: dict = field(default_factory=dict, compare=False, repr=False)


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0].strip()


def _convert(key: str, typ, text: str, lineno: int):
    text = text.strip()
    where = f"line {lineno}: {key}"
    if typ is bool:
        low = text.lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        raise ConfigError(f"{where}: expected a boolean, got {text!r}")
    if typ is list:
        body = text[1:-1] if text.startswith("[") and text.endswith("]") else text
        items = [t.strip() for t in body.split(",") if t.strip()]
        item_type = LIST_ITEM_TYPES.get(key, float)
        try:
            return [item_type(t.strip("'\"")) for t in items]
        except ValueError:
            raise ConfigError(f"{where}: expected a list of {item_type.__name__}, got {text!r}") from None
    if typ is str:
        return text.strip("'\"")
    try:
        val = typ(text)
    except ValueError:
        raise ConfigError(f"{where}: expected {typ.__name__}, got {text!r}") from None
    if typ is float and not math.isfinite(val):
        raise ConfigError(f"{where}: value must be finite, got {text!r}")
    return val


def parse_pairs(text: str, source: str = "<config>") -> dict:
    """Split config text into {key: (raw value, line number)}; syntax and duplicate checks only."""
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}: syntax error on line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or " " in key or "." not in key:
            raise ConfigError(f"{source}: syntax error on line {lineno}: bad key {key!r}")
        if not value:
            raise ConfigError(f"{source}: syntax error on line {lineno}: missing value for {key}")
        if key in seen:
            raise ConfigError(f"{source}: duplicate key {key} on lines {seen[key][1]} and {lineno} is ambiguous")
        seen[key] = (value, lineno)
    return seen


def _parse_level(token: str):
    parts = token.lower().split("x")
    try:
        dims = [int(float(p)) for p in parts]
    except ValueError:
        raise ConfigError(f"mms.levels: bad grid level {token!r}") from None
    if len(dims) == 1:
        dims = dims * 2
    if len(dims) != 2 or min(dims) < 3:
        raise ConfigError(f"mms.levels: bad grid level {token!r}")
    return tuple(dims)


def build_config(pairs: dict, overrides: Optional[dict] = None) -> RunConfig:
    """Validate raw pairs, apply defaults and overrides, and assemble a RunConfig."""
    merged = dict(pairs)
    for key, value in (overrides or {}).items():
        merged[key] = (value, 0)
    values = {}
    for key, (raw, lineno) in merged.items():
        if key not in SCHEMA:
            where = f"line {lineno}" if lineno else "command line"
            raise ConfigError(f"unknown key {key} ({where})")
        typ, _, check, domain = SCHEMA[key]
        val = _convert(key, typ, raw, lineno)
        if check is not None and not check(val):
            raise ConfigError(f"invalid value for {key}: {raw!r} (must be {domain})")
        values[key] = val
    for key, (_, default, _, _) in SCHEMA.items():
        values.setdefault(key, default)
    return _assemble(values)


def _assemble(v: dict) -> RunConfig:
    try:
        params = ModelParams(v["params.chi"], v["params.xi"], v["params.mu"], v["params.eta"], v["params.tau"])
        grid = Grid2D.from_extent(v["grid.nx"], v["grid.ny"], v["grid.lx"], v["grid.ly"],
                                  (v["grid.x0"], v["grid.y0"]))
        stepper = StepperConfig(
            dt_init=v["stepper.dt_init"], dt_min=v["stepper.dt_min"], cfl_safety=v["stepper.cfl_safety"],
            cg_rel_tol=v["stepper.cg_rel_tol"], cg_max_iter=v["stepper.cg_max_iter"],
            positivity_mode=v["stepper.positivity_mode"], w_update=v["stepper.w_update"],
            v_source=v["stepper.v_source"], preconditioner=v["stepper.preconditioner"],
            blowup_threshold=v["stepper.blowup_threshold"])
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    stencil = StencilConfig(v["stencil.face_averaging"])
    if v["initial.kind"] == "file" and not v["initial.path"]:
        raise ConfigError("initial.path is required when initial.kind = file")
    center = tuple(v["initial.center"]) if v["initial.center"] is not None else None
    initial = InitialData(v["initial.kind"], v["initial.u"], v["initial.v"], v["initial.w"], center,
                          v["initial.width"], v["initial.path"], v["initial.perturbation"], v["initial.modes"])
    t_end = v["run.t_end"]
    sample_every = v["run.sample_every"] if v["run.sample_every"] is not None else t_end / 10
    if sample_every > t_end:
        raise ConfigError(f"invalid value for run.sample_every: {sample_every} (must be in (0, run.t_end])")
    mms = MMSConfig(
        grid_levels=tuple(_parse_level(tok) for tok in v["mms.levels"]),
        dt_law=v["mms.dt_law"], manufactured_fields=v["mms.fields"], dt_factor=v["mms.dt_factor"],
        t_end=v["mms.t_end"], min_slope=v["mms.min_slope"], params=params, stencil=stencil,
        stepper=stepper, transformed=v["run.solve_transformed"])
    lemma = LemmaInputs(v["lemma.delta"], v["lemma.C7"], v["lemma.C_gamma"], v["lemma.rho"])
    return RunConfig(params, grid, stepper, stencil, initial, t_end, sample_every,
                     tuple(sorted(v["run.exponents"])), v["run.output_dir"], v["run.seed"],
                     v["run.solve_transformed"], tuple(sorted(v["run.snapshot_times"])), mms, lemma, dict(v))


def parse_config(text: str, overrides: Optional[dict] = None, source: str = "<config>") -> RunConfig:
    return build_config(parse_pairs(text, source), overrides)


def load_config(path, overrides: Optional[dict] = None) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, overrides, str(path))
