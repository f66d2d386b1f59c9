"""First-order IMEX time stepping.

One step updates w, then v, then u. Diffusion is implicit (preconditioned CG),
taxis and reaction are explicit, and w is advanced pointwise, either with the
closed-form logistic solution (frozen u, v) or forward Euler.

The same structure is available for the transformed unknown a = u e^{-ξw},
whose diffusion e^{-ξw}∇·(e^{ξw}∇a) is discretised with face coefficients
equal to the arithmetic mean of e^{ξw} on the two neighbouring cells.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .diagnostics import DiagnosticsRecord, compute_diagnostics, grad_l5
from .errors import ConfigError
from .linalg import HelmholtzDCT, pcg
from .model import Grid2D, ModelParams, State
from .spatial_ops import StencilConfig, face_means, laplacian_neumann, gradient_neumann, taxis_div, \
    weighted_laplacian

log = logging.getLogger(__name__)

EPS = 1e-30

OK = "ok"
BLOWUP = "blowup_suspected"
UNDERFLOW = "dt_underflow"


@dataclass(frozen=True)
class StepperConfig:
    dt_init: float = 0.05
    dt_min: float = 1e-9
    cfl_safety: float = 0.5
    cg_rel_tol: float = 1e-10
    cg_max_iter: int = 500
    positivity_mode: str = "clamp_report"
    w_update: str = "exact_logistic"
    v_source: str = "fresh_u"
    preconditioner: str = "dct"
    blowup_threshold: float = 1e6

    def __post_init__(self):
        if not (self.dt_init > 0 and self.dt_min > 0):
            raise ConfigError("dt_init and dt_min must be positive")
        if self.dt_min > self.dt_init:
            raise ConfigError(f"dt_min={self.dt_min} exceeds dt_init={self.dt_init}")
        if not (0 < self.cfl_safety <= 1):
            raise ConfigError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
        if not (self.cg_rel_tol > 0 and self.cg_max_iter > 0 and self.blowup_threshold > 0):
            raise ConfigError("tolerances, iteration caps and thresholds must be positive")
        choices = {
            "positivity_mode": ("clamp_report", "reject"),
            "w_update": ("explicit", "exact_logistic"),
            "v_source": ("lagged_u", "fresh_u"),
            "preconditioner": ("none", "jacobi", "dct"),
        }
        for name, allowed in choices.items():
            if getattr(self, name) not in allowed:
                raise ConfigError(f"{name} must be one of {allowed}, got {getattr(self, name)!r}")


@dataclass
class StepOutcome:
    state: State
    dt_used: float
    cg_iters: tuple
    clamped_cells: int
    status: str


# Forcing: callable t -> dict with arrays under "u", "v", "w" and, for the
# transformed path, "a". Only the manufactured-solution driver uses it.
Forcing = Optional[Callable[[float], dict]]


def logistic_w(w, u, v, eta: float, dt: float):
    """Exact solution at time dt of w' = w(α - ηw) with α = η(1 - u) - v frozen.

    w(dt) = w0 / (e^{-α dt} + η w0 (1 - e^{-α dt}) / α); the denominator is
    positive for w0 >= 0, so w stays in [0, max(w0, α/η)].

    Evaluated with e^{-|α| dt} only, so nothing overflows for large |α| dt.
    """
    alpha = eta * (1.0 - u) - v
    s = np.abs(alpha) * dt
    decay = np.exp(-s)
    with np.errstate(divide="ignore", invalid="ignore"):
        # (1 - e^{-|α| dt}) / |α|, continuous through α = 0
        q = np.where(s > 1e-12, -np.expm1(-s) / np.where(alpha == 0, 1.0, np.abs(alpha)), dt)
    growing = alpha > 0
    num = np.where(growing, w, w * decay)
    den = np.where(growing, decay, 1.0) + eta * w * q
    return num / den


def _w_update(s: State, p: ModelParams, dt: float, mode: str):
    if mode == "exact_logistic":
        return logistic_w(s.w, s.u, s.v, p.eta, dt)
    return s.w + dt * (-s.v * s.w + p.eta * s.w * (1.0 - s.u - s.w))


def _weighted_diag(g: Grid2D, kx, ky):
    """Diagonal of -∇·(k∇) on the grid: sum of adjacent interior-face coefficients over h²."""
    d = np.zeros(g.shape)
    d[:, :-1] += kx / g.hx ** 2
    d[:, 1:] += kx / g.hx ** 2
    d[:-1, :] += ky / g.hy ** 2
    d[1:, :] += ky / g.hy ** 2
    return d


def _precond(cfg: StepperConfig, g: Grid2D, c0, c1):
    if cfg.preconditioner == "dct":
        return HelmholtzDCT(g, c0, c1)
    if cfg.preconditioner == "jacobi":
        ny, nx = g.shape
        diag = c0 + c1 * _weighted_diag(g, np.ones((ny, nx - 1)), np.ones((ny - 1, nx)))
        return lambda r: r / diag
    return None


def solve_helmholtz(rhs, x0, c0: float, c1: float, g: Grid2D, cfg: StepperConfig):
    """Solve (c0 I - c1 Δ_h) x = rhs by CG; mass-consistent to roundoff."""
    def apply(x):
        return c0 * x - c1 * laplacian_neumann(x, g)
    pre = _precond(cfg, g, c0, c1)
    return pcg(apply, rhs, x0, cfg.cg_rel_tol, cfg.cg_max_iter, pre, ones_image=np.full(g.shape, c0))


def _solve_v(v_old, u_src, p: ModelParams, g: Grid2D, cfg: StepperConfig, dt: float, f_v=None):
    r = dt / p.tau
    rhs = v_old + r * u_src
    if f_v is not None:
        rhs = rhs + dt * f_v
    return solve_helmholtz(rhs, v_old, 1.0 + r, r, g, cfg)


def _apply_positivity(u, v, w, mode):
    neg = (u < 0) | (v < 0) | (w < 0)
    count = int(np.count_nonzero(neg))
    if count and mode == "clamp_report":
        u, v, w = np.maximum(u, 0.0), np.maximum(v, 0.0), np.maximum(w, 0.0)
    return u, v, w, count


def _attempt_primitive(s, p, g, cfg, stencil, dt, forcing):
    f_new = forcing(s.t + dt) if forcing is not None else None
    w1 = _w_update(s, p, dt, cfg.w_update)
    if forcing is not None:
        w1 = w1 + dt * forcing(s.t)["w"]
    v1, it_v = _solve_v(s.v, s.u, p, g, cfg, dt, None if f_new is None else f_new["v"])
    rhs = s.u + dt * (-taxis_div(s.u, v1, p.chi, g, stencil) - taxis_div(s.u, w1, p.xi, g, stencil)
                      + p.mu * s.u * (1.0 - s.u - w1))
    if f_new is not None:
        rhs = rhs + dt * f_new["u"]
    u1, it_u = solve_helmholtz(rhs, s.u, 1.0, dt, g, cfg)
    if cfg.v_source == "fresh_u":
        v1, it_v2 = _solve_v(s.v, u1, p, g, cfg, dt, None if f_new is None else f_new["v"])
        it_v += it_v2
    return u1, v1, w1, (it_u, it_v)


def _attempt_transformed(s, p, g, cfg, stencil, dt, forcing):
    f_new = forcing(s.t + dt) if forcing is not None else None
    a0 = s.u * np.exp(-p.xi * s.w)
    w1 = _w_update(s, p, dt, cfg.w_update)
    if forcing is not None:
        w1 = w1 + dt * forcing(s.t)["w"]
    v1, it_v = _solve_v(s.v, s.u, p, g, cfg, dt, None if f_new is None else f_new["v"])

    ew = np.exp(p.xi * w1)
    kx, ky = face_means(ew)
    # transformed kinetics at the old level: ξavw + a(μ - ξηw)(1 - u - w)
    reac = p.xi * a0 * s.v * s.w + a0 * (p.mu - p.xi * p.eta * s.w) * (1.0 - s.u - s.w)
    if f_new is not None:
        reac = reac + f_new["a"]
    # multiplied through by e^{ξw} so the implicit operator is symmetric
    rhs = ew * a0 + dt * (ew * reac - taxis_div(ew * a0, v1, p.chi, g, stencil))

    def apply(x):
        return ew * x - dt * weighted_laplacian(x, kx, ky, g)

    ew_mean = float(np.mean(ew))
    if cfg.preconditioner == "dct":
        pre = HelmholtzDCT(g, 1.0, dt, scale=ew_mean)
    elif cfg.preconditioner == "jacobi":
        d = ew + dt * _weighted_diag(g, kx, ky)
        pre = lambda r: r / d  # noqa: E731
    else:
        pre = None
    a1, it_a = pcg(apply, rhs, a0, cfg.cg_rel_tol, cfg.cg_max_iter, pre, ones_image=ew)
    u1 = a1 * ew
    if cfg.v_source == "fresh_u":
        v1, it_v2 = _solve_v(s.v, u1, p, g, cfg, dt, None if f_new is None else f_new["v"])
        it_v += it_v2
    return u1, v1, w1, (it_a, it_v)


def step(s: State, p: ModelParams, g: Grid2D, cfg: StepperConfig, stencil: StencilConfig,
         dt: Optional[float] = None, forcing: Forcing = None, transformed: bool = False) -> StepOutcome:
    """Advance one IMEX Euler step; in reject mode dt is halved until no cell goes negative."""
    g.check(s.u, s.v, s.w)
    dt = cfg.dt_init if dt is None else float(dt)
    attempt = _attempt_transformed if transformed else _attempt_primitive
    while True:
        with np.errstate(over="ignore", invalid="ignore"):
            u1, v1, w1, iters = attempt(s, p, g, cfg, stencil, dt, forcing)
        new = State(u1, v1, w1, s.t + dt)
        if not new.is_finite():
            return StepOutcome(new, dt, iters, 0, BLOWUP)
        u1, v1, w1, count = _apply_positivity(u1, v1, w1, cfg.positivity_mode)
        if count and cfg.positivity_mode == "reject":
            dt *= 0.5
            if dt < cfg.dt_min:
                return StepOutcome(s, dt, iters, count, UNDERFLOW)
            continue
        if count:
            log.debug("t=%g: clamped %d negative cells", s.t, count)
        return StepOutcome(State(u1, v1, w1, s.t + dt), dt, iters, count, OK)


def stable_dt(s: State, p: ModelParams, g: Grid2D, cfg: StepperConfig) -> float:
    """CFL-type bound for the explicit taxis and reaction parts, clamped to [dt_min, dt_init]."""
    vx, vy = gradient_neumann(s.v, g)
    wx, wy = gradient_neumann(s.w, g)
    speed = p.chi * np.sqrt(vx * vx + vy * vy) + p.xi * np.sqrt(wx * wx + wy * wy)
    u_inf = float(np.max(np.abs(s.u)))
    v_inf = float(np.max(np.abs(s.v)))
    w_inf = float(np.max(np.abs(s.w)))
    limits = (
        g.h_min / (float(np.max(speed)) + EPS),
        1.0 / (p.mu * (1.0 + 2.0 * u_inf + w_inf) + EPS),
        1.0 / (v_inf + p.eta * (1.0 + u_inf + 2.0 * w_inf) + EPS),
    )
    dt = cfg.cfl_safety * min(limits)
    return min(max(dt, cfg.dt_min), cfg.dt_init)


def detect_blowup(d: DiagnosticsRecord, threshold: float) -> bool:
    """True iff ||a||_inf + ||∇w||_{L^5} exceeds ``threshold`` or anything monitored is non-finite."""
    vals = [d.linf_a, d.grad_w_l5, d.linf_u, d.linf_v, d.mass_u, d.l2_v_sq, d.grad_v_l2_sq]
    vals += list(d.lp_a.values()) + list(d.energy_p.values())
    if not d.finite or not all(math.isfinite(x) for x in vals):
        return True
    return d.linf_a + d.grad_w_l5 > threshold


def blowup_indicator(s: State, p: ModelParams, g: Grid2D) -> float:
    """||a||_inf + ||∇w||_{L^5}; cheaper than a full diagnostics record."""
    with np.errstate(over="ignore", invalid="ignore"):
        a_inf = float(np.max(np.abs(s.u * np.exp(-p.xi * s.w))))
        return a_inf + grad_l5(s.w, g)


@dataclass
class RunResult:
    state: State
    records: list
    status: str
    steps: int = 0
    clamped_total: int = 0
    max_blowup_indicator: float = 0.0


def run(initial: State, p: ModelParams, g: Grid2D, cfg: StepperConfig, stencil: StencilConfig,
        t_end: float, sample_every: float, exponents=(2.0,), transformed: bool = False,
        forcing: Forcing = None, fixed_dt: Optional[float] = None,
        on_step: Optional[Callable[[State, StepOutcome], None]] = None,
        on_sample: Optional[Callable[[State, DiagnosticsRecord], None]] = None) -> RunResult:
    """Step from ``initial`` to ``t_end``, sampling diagnostics at t0 and every ``sample_every``.

    ``on_step(previous, outcome)`` sees every accepted step and
    ``on_sample(state, record)`` every recorded sample.

    Steps are shortened to land on sample times and on ``t_end``. The loop
    stops early if the step reports blow-up or dt underflow, or if the
    blow-up indicator crosses ``cfg.blowup_threshold``.
    """
    if not t_end > initial.t:
        raise ValueError(f"t_end={t_end} must exceed initial time {initial.t}")
    if not sample_every > 0:
        raise ValueError("sample_every must be positive")
    t0 = initial.t
    s = initial
    clamped = 0
    records = [compute_diagnostics(s, p, g, exponents, clamped)]
    max_ind = records[0].blowup_indicator
    if on_sample is not None:
        on_sample(s, records[0])
    if detect_blowup(records[0], cfg.blowup_threshold):
        return RunResult(s, records, BLOWUP, 0, 0, max_ind)
    k = 1
    n_steps = 0
    status = OK
    t_tol = 1e-12 * max(1.0, abs(t_end))
    while t_end - s.t > t_tol:
        next_sample = min(t0 + k * sample_every, t_end)
        dt = fixed_dt if fixed_dt is not None else stable_dt(s, p, g, cfg)
        dt = min(dt, next_sample - s.t)
        out = step(s, p, g, cfg, stencil, dt, forcing, transformed)
        n_steps += 1
        if out.status != OK:
            status = out.status
            clamped += out.clamped_cells
            records.append(compute_diagnostics(out.state, p, g, exponents, clamped))
            s = out.state
            break
        if on_step is not None:
            on_step(s, out)
        clamped += out.clamped_cells
        s = out.state
        ind = blowup_indicator(s, p, g)
        max_ind = max(max_ind, ind)
        hit_sample = next_sample - s.t <= t_tol
        if hit_sample or not math.isfinite(ind) or ind > cfg.blowup_threshold:
            if hit_sample:
                s = State(s.u, s.v, s.w, next_sample)
                k += 1
            rec = compute_diagnostics(s, p, g, exponents, clamped)
            records.append(rec)
            if on_sample is not None:
                on_sample(s, rec)
            if detect_blowup(rec, cfg.blowup_threshold):
                status = BLOWUP
                break
    return RunResult(s, records, status, n_steps, clamped, max_ind)
