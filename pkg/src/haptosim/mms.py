"""Manufactured-solution convergence driver on the unit square.

Manufactured fields, with φ = cos(πx)cos(πy)e^{-t}:

    u* = 2 + φ,   v* = 2 + φ/2,   w* = (2 + φ)/4

All three have zero normal derivative on the walls of [0, 1]² and stay
above 1/4, so the forcing below is the only thing driving the discrete run
towards them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import Grid2D, ModelParams, State
from .spatial_ops import StencilConfig
from .stepper import OK, StepperConfig, run

DT_LAWS = ("fixed", "proportional_to_h", "proportional_to_h2")
PI = math.pi


class TrigManufactured:
    """The built-in trigonometric triple and its exact forcing on one grid."""

    name = "trig_cosine"

    def __init__(self, g: Grid2D, params: ModelParams):
        X, Y = g.centers()
        self.params = params
        self.cc = np.cos(PI * X) * np.cos(PI * Y)
        self.sc = np.sin(PI * X) * np.cos(PI * Y)
        self.cs = np.cos(PI * X) * np.sin(PI * Y)
        self.grad_cc_sq = PI ** 2 * (self.sc ** 2 + self.cs ** 2)
        self._cache = {}

    def fields(self, t: float):
        phi = self.cc * math.exp(-t)
        return 2.0 + phi, 2.0 + 0.5 * phi, 0.25 * (2.0 + phi)

    def state(self, t: float) -> State:
        u, v, w = self.fields(t)
        return State(u, v, w, t)

    def forcing(self, t: float) -> dict:
        """Residual of each equation at the manufactured solution."""
        if t not in self._cache:
            if len(self._cache) > 2:
                self._cache.pop(next(iter(self._cache)))
            self._cache[t] = self._forcing(t)
        return self._cache[t]

    def _forcing(self, t: float) -> dict:
        p = self.params
        e = math.exp(-t)
        phi = self.cc * e
        grad_phi_sq = (e * e) * self.grad_cc_sq
        u, v, w = self.fields(t)
        u_t, v_t, w_t = -phi, -0.5 * phi, -0.25 * phi
        lap_u, lap_v = -2 * PI ** 2 * phi, -PI ** 2 * phi
        div_u_grad_v = 0.5 * grad_phi_sq - PI ** 2 * phi * u
        div_u_grad_w = 0.25 * grad_phi_sq - 0.5 * PI ** 2 * phi * u
        f_u = u_t - lap_u + p.chi * div_u_grad_v + p.xi * div_u_grad_w - p.mu * u * (1 - u - w)
        f_v = v_t - (lap_v - v + u) / p.tau
        f_w = w_t + v * w - p.eta * w * (1 - u - w)
        ew = np.exp(-p.xi * w)
        # a = u e^{-ξw} obeys a_t = e^{-ξw} u_t - ξ a w_t, so forcings transform linearly
        f_a = ew * f_u - p.xi * (u * ew) * f_w
        return {"u": f_u, "v": f_v, "w": f_w, "a": f_a}


@dataclass(frozen=True)
class MMSConfig:
    grid_levels: tuple = ((32, 32), (64, 64), (128, 128))
    dt_law: str = "proportional_to_h2"
    manufactured_fields: str = TrigManufactured.name
    dt_factor: float = 1.0
    t_end: float = 0.5
    min_slope: float = None
    params: ModelParams = field(default_factory=ModelParams)
    stencil: StencilConfig = field(default_factory=lambda: StencilConfig("central"))
    stepper: StepperConfig = field(default_factory=StepperConfig)
    transformed: bool = False

    def __post_init__(self):
        if len(self.grid_levels) < 3:
            raise ValueError("need at least 3 grid levels for a slope fit")
        if self.dt_law not in DT_LAWS:
            raise ValueError(f"dt_law must be one of {DT_LAWS}, got {self.dt_law!r}")
        if self.manufactured_fields != TrigManufactured.name:
            raise ValueError(f"unknown manufactured fields {self.manufactured_fields!r}")

    @property
    def slope_threshold(self) -> float:
        if self.min_slope is not None:
            return self.min_slope
        return 1.9 if self.dt_law == "proportional_to_h2" else 0.9

    def dt_for(self, h: float) -> float:
        if self.dt_law == "fixed":
            return self.dt_factor
        if self.dt_law == "proportional_to_h":
            return self.dt_factor * h
        return self.dt_factor * h * h


@dataclass
class MMSLevel:
    nx: int
    ny: int
    h: float
    dt: float
    steps: int
    err_u: float
    err_v: float
    err_w: float
    status: str


@dataclass
class MMSTable:
    levels: list
    slopes: dict
    threshold: float

    @property
    def passed(self) -> bool:
        return all(s >= self.threshold for s in self.slopes.values())

    def format(self) -> str:
        lines = [f"{'nx':>5} {'ny':>5} {'h':>10} {'dt':>10} {'steps':>6} "
                 f"{'L2 err u':>11} {'L2 err v':>11} {'L2 err w':>11}"]
        for lv in self.levels:
            lines.append(f"{lv.nx:5d} {lv.ny:5d} {lv.h:10.3e} {lv.dt:10.3e} {lv.steps:6d} "
                         f"{lv.err_u:11.4e} {lv.err_v:11.4e} {lv.err_w:11.4e}")
        lines.append("slopes: " + ", ".join(f"{k}={v:.3f}" for k, v in self.slopes.items())
                     + f"  (threshold {self.threshold:g}) -> {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def fitted_slope(h, err) -> float:
    """Least-squares slope of log(err) against log(h)."""
    return float(np.polyfit(np.log(h), np.log(err), 1)[0])


def l2_error(f, exact, g: Grid2D) -> float:
    return math.sqrt(g.integrate((f - exact) ** 2))


def run_level(cfg: MMSConfig, nx: int, ny: int) -> MMSLevel:
    g = Grid2D(nx, ny, 1.0 / nx, 1.0 / ny)
    mf = TrigManufactured(g, cfg.params)
    h = max(g.hx, g.hy)
    dt = cfg.dt_for(h)
    n_steps = max(1, int(round(cfg.t_end / dt)))
    dt = cfg.t_end / n_steps
    res = run(mf.state(0.0), cfg.params, g, cfg.stepper, cfg.stencil, cfg.t_end, cfg.t_end,
              transformed=cfg.transformed, forcing=mf.forcing, fixed_dt=dt)
    u, v, w = mf.fields(res.state.t)
    return MMSLevel(nx, ny, h, dt, res.steps, l2_error(res.state.u, u, g), l2_error(res.state.v, v, g),
                    l2_error(res.state.w, w, g), res.status)


def run_mms(cfg: MMSConfig) -> MMSTable:
    levels = [run_level(cfg, nx, ny) for nx, ny in cfg.grid_levels]
    hs = [lv.h for lv in levels]
    slopes = {}
    for name in ("u", "v", "w"):
        errs = [getattr(lv, f"err_{name}") for lv in levels]
        if any(lv.status != OK for lv in levels) or not all(e > 0 and math.isfinite(e) for e in errs):
            slopes[name] = float("nan")
        else:
            slopes[name] = fitted_slope(hs, errs)
    return MMSTable(levels, slopes, cfg.slope_threshold)
