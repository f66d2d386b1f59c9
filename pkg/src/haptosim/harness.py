"""Run orchestration and file output: single runs, parameter sweeps, lemma reports."""

from __future__ import annotations

import csv
import io
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .config import RunConfig
from .errors import ConfigError, HaptosimError, InvalidInitialData
from .lemma_toolkit import LemmaConstants, feasible_p0, h_min, rho_of
from .model import Grid2D, State
from .stepper import BLOWUP, OK, UNDERFLOW, run

log = logging.getLogger(__name__)

EXIT_CODES = {OK: 0, BLOWUP: 2, UNDERFLOW: 3}
EXIT_ERROR = 1
SWEEP_AXES = ("mu", "chi", "xi", "eta")
SNAPSHOT_FIELDS = ("u", "v", "w")


# ---------------------------------------------------------------- initial data

def cosine_series(g: Grid2D, rng: np.random.Generator, modes: int) -> np.ndarray:
    """Smooth Neumann-compatible field in [0, 1] from seeded cosine coefficients."""
    X, Y = g.centers()
    lx, ly = g.extent
    sx = (X - g.origin[0]) / lx
    sy = (Y - g.origin[1]) / ly
    field = np.zeros(g.shape)
    for k in range(modes + 1):
        for m in range(modes + 1):
            if k == m == 0:
                continue
            coef = rng.normal() / (1.0 + k * k + m * m)
            field += coef * np.cos(np.pi * k * sx) * np.cos(np.pi * m * sy)
    scale = np.max(np.abs(field))
    if scale > 0:
        field /= scale
    return 0.5 * (1.0 + field)


def make_initial_state(cfg: RunConfig) -> State:
    g = cfg.grid
    ini = cfg.initial
    if ini.kind == "constant":
        s = State.constant(g, ini.u, ini.v, ini.w)
    elif ini.kind == "gaussian_bump":
        X, Y = g.centers()
        lx, ly = g.extent
        cx, cy = ini.center if ini.center is not None else (g.origin[0] + lx / 2, g.origin[1] + ly / 2)
        bump = np.exp(-((X - cx) ** 2 + (Y - cy) ** 2) / (2.0 * ini.width ** 2))
        s = State(ini.u * bump, ini.v * bump, ini.w * bump)
    elif ini.kind == "file":
        s = read_snapshot(ini.path, g)
    else:
        raise ConfigError(f"unknown initial.kind {ini.kind!r}")
    if ini.perturbation > 0:
        rng = np.random.default_rng(cfg.seed)
        fields = [f + ini.perturbation * cosine_series(g, rng, ini.modes) for f in (s.u, s.v, s.w)]
        s = State(*fields, s.t)
    if not s.is_finite():
        raise InvalidInitialData("initial data contains non-finite values")
    for name in SNAPSHOT_FIELDS:
        if np.any(getattr(s, name) < 0):
            raise InvalidInitialData(f"initial {name} has negative entries")
    return s


# ---------------------------------------------------------------- snapshots

def snapshot_name(t: float) -> str:
    return f"snapshot_{t:.6g}"


def write_snapshot(directory, s: State, g: Grid2D) -> Path:
    """Raw little-endian float64, fields u, v, w stacked, each row-major (ny, nx).

    The sidecar ``.hdr`` holds ``key = value`` lines: nx, ny, hx, hy, t, fields.
    """
    directory = Path(directory)
    base = directory / snapshot_name(s.t)
    data = np.stack([s.u, s.v, s.w]).astype("<f8")
    _sibling(base, ".f64").write_bytes(data.tobytes(order="C"))
    header = (f"nx = {g.nx}\nny = {g.ny}\nhx = {g.hx!r}\nhy = {g.hy!r}\nt = {s.t!r}\n"
              f"fields = {','.join(SNAPSHOT_FIELDS)}\n")
    _sibling(base, ".hdr").write_text(header)
    return _sibling(base, ".f64")


def _sibling(path: Path, ext: str) -> Path:
    # names like snapshot_0.25 contain a dot, so Path.with_suffix would eat the time
    stem = path.name[:-4] if path.name.endswith((".f64", ".hdr")) else path.name
    return path.with_name(stem + ext)


def read_snapshot(path, g: Grid2D = None) -> State:
    path = Path(path)
    hdr_path = _sibling(path, ".hdr")
    try:
        meta = dict(
            (k.strip(), v.strip()) for k, v in
            (line.split("=", 1) for line in hdr_path.read_text().splitlines() if "=" in line))
        raw = _sibling(path, ".f64").read_bytes()
    except OSError as exc:
        raise InvalidInitialData(f"cannot read snapshot {path}: {exc.strerror}") from None
    nx, ny = int(meta["nx"]), int(meta["ny"])
    fields = meta.get("fields", "u,v,w").split(",")
    data = np.frombuffer(raw, dtype="<f8").reshape(len(fields), ny, nx).astype(float)
    if g is not None and (g.nx, g.ny) != (nx, ny):
        raise InvalidInitialData(f"snapshot {path} is {nx}x{ny}, config grid is {g.nx}x{g.ny}")
    by_name = dict(zip(fields, data))
    return State(by_name["u"], by_name["v"], by_name["w"], float(meta.get("t", 0.0)))


# ---------------------------------------------------------------- single run

@dataclass
class RunReport:
    status: str
    exit_code: int
    output_dir: Path
    records: list
    final_state: State
    rho: float
    steps: int
    clamped_total: int
    max_blowup_indicator: float

    @property
    def final_linf_u(self) -> float:
        return float(np.max(np.abs(self.final_state.u)))


def diagnostics_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if records:
        writer.writerow(records[0].csv_header())
    for rec in records:
        writer.writerow(rec.csv_row())
    return buf.getvalue()


def _report_text(cfg: RunConfig, rep: RunReport) -> str:
    recs = rep.records
    lines = [
        f"status = {rep.status}",
        f"exit_code = {rep.exit_code}",
        f"t_final = {rep.final_state.t!r}",
        f"steps = {rep.steps}",
        f"formulation = {'transformed' if cfg.solve_transformed else 'primitive'}",
        f"rho = {rep.rho!r}",
        f"clamped_cells_total = {rep.clamped_total}",
        f"max_linf_u = {max(r.linf_u for r in recs)!r}",
        f"max_linf_v = {max(r.linf_v for r in recs)!r}",
        f"max_linf_a = {max(r.linf_a for r in recs)!r}",
        f"max_grad_w_l5 = {max(r.grad_w_l5 for r in recs)!r}",
        f"max_mass_u = {max(r.mass_u for r in recs)!r}",
        f"max_l2_v_sq = {max(r.l2_v_sq for r in recs)!r}",
        f"max_grad_v_l2_sq = {max(r.grad_v_l2_sq for r in recs)!r}",
        f"max_blowup_indicator = {rep.max_blowup_indicator!r}",
        f"w_min_final = {float(np.min(rep.final_state.w))!r}",
        f"w_max_final = {float(np.max(rep.final_state.w))!r}",
    ]
    return "\n".join(lines) + "\n"


def simulate(cfg: RunConfig, on_step=None):
    """Run the configured trajectory without touching the filesystem."""
    s0 = make_initial_state(cfg)
    result = run(s0, cfg.params, cfg.grid, cfg.stepper, cfg.stencil, cfg.t_end, cfg.sample_every,
                 cfg.exponents, transformed=cfg.solve_transformed, on_step=on_step)
    return s0, result


def run_simulation(cfg: RunConfig, write: bool = True) -> RunReport:
    """Execute one run; write diagnostics.csv, snapshots and report.txt into cfg.output_dir."""
    s0 = make_initial_state(cfg)
    out = Path(cfg.output_dir)
    snapshots = list(cfg.snapshot_times)
    if write:
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise HaptosimError(f"cannot create output directory {out}: {exc.strerror}") from None

    def on_sample(state, record):
        while snapshots and record.t >= snapshots[0] - 1e-12:
            snapshots.pop(0)
            if write:
                write_snapshot(out, state, cfg.grid)

    result = run(s0, cfg.params, cfg.grid, cfg.stepper, cfg.stencil, cfg.t_end, cfg.sample_every,
                 cfg.exponents, transformed=cfg.solve_transformed, on_sample=on_sample)
    rep = RunReport(result.status, EXIT_CODES[result.status], out, result.records, result.state,
                    rho_of(s0.w), result.steps, result.clamped_total, result.max_blowup_indicator)
    if write:
        try:
            (out / "diagnostics.csv").write_text(diagnostics_csv(result.records))
            write_snapshot(out, result.state, cfg.grid)
            (out / "report.txt").write_text(_report_text(cfg, rep))
        except OSError as exc:
            raise HaptosimError(f"cannot write to {exc.filename}: {exc.strerror}") from None
    return rep


# ---------------------------------------------------------------- sweeps

@dataclass
class SweepRow:
    value: float
    status: str
    final_linf_u: float
    max_blowup_indicator: float
    error: str = ""


def _sweep_job(args):
    cfg, axis, value, idx = args
    sub = replace(cfg, params=cfg.params.with_value(axis, value),
                  output_dir=str(Path(cfg.output_dir) / f"{axis}_{idx:03d}"))
    if sub.mms is not None:
        sub = replace(sub, mms=replace(sub.mms, params=sub.params))
    try:
        rep = run_simulation(sub)
    except (HaptosimError, ValueError) as exc:
        return SweepRow(value, "error", float("nan"), float("nan"), str(exc))
    return SweepRow(value, rep.status, rep.final_linf_u, rep.max_blowup_indicator)


def sweep_workers(n_jobs: int) -> int:
    cap = os.environ.get("HAPTOSIM_THREADS")
    limit = int(cap) if cap and cap.isdigit() and int(cap) > 0 else (os.cpu_count() or 1)
    return max(1, min(limit, n_jobs))


def run_sweep(base: RunConfig, axis: str, values) -> list:
    """Independent runs over one parameter axis; writes sweep.csv into base.output_dir."""
    if axis not in SWEEP_AXES:
        raise ConfigError(f"sweep axis must be one of {SWEEP_AXES}, got {axis!r}")
    values = [float(x) for x in values]
    if not all(np.isfinite(values)):
        raise ConfigError("sweep values must be finite")
    jobs = [(base, axis, val, i) for i, val in enumerate(values)]
    workers = sweep_workers(len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_job, jobs))
    else:
        rows = [_sweep_job(job) for job in jobs]
    out = Path(base.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["value", "status", "final_linf_u", "max_blowup_indicator"])
    for row in rows:
        writer.writerow([repr(row.value), row.status, repr(row.final_linf_u), repr(row.max_blowup_indicator)])
    (out / "sweep.csv").write_text(buf.getvalue())
    return rows


# ---------------------------------------------------------------- lemma report

def lemma_report(cfg: RunConfig) -> dict:
    """Key-value summary of ρ, the H(y) minimisation and the feasible exponent."""
    li = cfg.lemma
    p = cfg.params
    rho = li.rho if li.rho is not None else rho_of(make_initial_state(cfg).w)
    consts = LemmaConstants(delta=li.delta, chi=p.chi, xi=p.xi, C7=li.C7, C_delta_plus_1=li.C_gamma,
                            eta=p.eta, mu=p.mu, rho=rho)
    out = {"rho": rho, "delta": li.delta, "chi": p.chi, "xi": p.xi, "C7": li.C7, "C_gamma": li.C_gamma}
    try:
        hm = h_min(consts)
        out.update(a1=hm.a1, y_star=hm.y_star, h_min=hm.h_min, h_min_oracle=hm.h_min_oracle,
                   stated_closed_form=hm.paper_formula_value,
                   closed_form_with_weight=hm.weighted_formula_value)
    except (HaptosimError, ValueError) as exc:
        out["h_min"] = f"unavailable ({exc})"
    if p.mu > 0:
        fp = feasible_p0(consts, lambda gamma: li.C_gamma)
        out.update(p0=fp.p0 if fp else "none", g_p0=fp.g_p0 if fp else "none",
                   g_at_1=fp.g_at_1 if fp else "none")
    else:
        out["p0"] = "infeasible (mu <= 0)"
    return out
