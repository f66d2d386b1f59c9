"""Parameters, grid, state and pointwise kinetics of the chemotaxis-haptotaxis system.

    u_t = Δu - χ∇·(u∇v) - ξ∇·(u∇w) + μu(1 - u - w)
    τ v_t = Δv - v + u
    w_t = -vw + ηw(1 - u - w)

with zero-flux boundary conditions. ``u`` is the cancer-cell density, ``v`` the
matrix-degrading enzyme and ``w`` the (non-diffusible) healthy tissue.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import GridMismatch, InvalidState


@dataclass(frozen=True)
class ModelParams:
    chi: float = 1.0
    xi: float = 1.0
    mu: float = 1.0
    eta: float = 1.0
    tau: float = 1.0

    def __post_init__(self):
        for name in ("chi", "xi", "mu", "eta", "tau"):
            val = getattr(self, name)
            if not math.isfinite(val):
                raise ValueError(f"{name} must be finite, got {val!r}")
            if val < 0:
                raise ValueError(f"{name} must be nonnegative, got {val!r}")
        if self.tau <= 0:
            raise ValueError(f"tau must be positive, got {self.tau!r}")

    def with_value(self, name: str, value: float) -> "ModelParams":
        return replace(self, **{name: float(value)})


@dataclass(frozen=True)
class Grid2D:
    """Uniform cell-centred grid on [x0, x0 + nx*hx] x [y0, y0 + ny*hy].

    Fields are arrays of shape ``(ny, nx)``; axis 0 is y, axis 1 is x.
    """

    nx: int
    ny: int
    hx: float
    hy: float
    origin: tuple = (0.0, 0.0)

    def __post_init__(self):
        if self.nx < 3 or self.ny < 3:
            raise ValueError(f"need nx, ny >= 3, got ({self.nx}, {self.ny})")
        if not (self.hx > 0 and self.hy > 0):
            raise ValueError(f"spacings must be positive, got ({self.hx}, {self.hy})")

    @classmethod
    def unit_square(cls, n: int) -> "Grid2D":
        return cls(n, n, 1.0 / n, 1.0 / n)

    @classmethod
    def from_extent(cls, nx: int, ny: int, lx: float, ly: float, origin=(0.0, 0.0)) -> "Grid2D":
        return cls(nx, ny, lx / nx, ly / ny, tuple(origin))

    @property
    def shape(self) -> tuple:
        return (self.ny, self.nx)

    @property
    def cell_area(self) -> float:
        return self.hx * self.hy

    @property
    def area(self) -> float:
        return self.nx * self.ny * self.cell_area

    @property
    def h_min(self) -> float:
        return min(self.hx, self.hy)

    @property
    def extent(self) -> tuple:
        return (self.nx * self.hx, self.ny * self.hy)

    def centers(self):
        """Return (X, Y) arrays of cell-centre coordinates."""
        x = self.origin[0] + (np.arange(self.nx) + 0.5) * self.hx
        y = self.origin[1] + (np.arange(self.ny) + 0.5) * self.hy
        return np.meshgrid(x, y)

    def check(self, *fields) -> None:
        for f in fields:
            if np.shape(f) != self.shape:
                raise GridMismatch(f"field of shape {np.shape(f)} is not on grid {self.shape}")

    def integrate(self, f) -> float:
        """Midpoint rule: cell sum times cell area."""
        return float(np.sum(f) * self.cell_area)


@dataclass(frozen=True)
class State:
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    t: float = 0.0

    @classmethod
    def constant(cls, grid: Grid2D, u: float, v: float, w: float, t: float = 0.0) -> "State":
        return cls(np.full(grid.shape, float(u)), np.full(grid.shape, float(v)),
                   np.full(grid.shape, float(w)), t)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.v))
                    and np.all(np.isfinite(self.w)))

    def copy(self) -> "State":
        return State(self.u.copy(), self.v.copy(), self.w.copy(), self.t)


@dataclass(frozen=True)
class SteadyState:
    """Spatially homogeneous zero of the kinetics.

    ``family`` is None for an isolated state; otherwise it describes the
    one-parameter family the (representative) values belong to.
    """

    u: float
    v: float
    w: float
    family: Optional[str] = field(default=None, compare=False)

    def as_tuple(self) -> tuple:
        return (self.u, self.v, self.w)

    def to_state(self, grid: Grid2D, t: float = 0.0) -> State:
        return State.constant(grid, self.u, self.v, self.w, t)


def _require_finite(*arrays) -> None:
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise InvalidState("non-finite values in state")


def reaction_terms(s: State, p: ModelParams):
    """Pointwise kinetics (f_u, f_v, f_w); f_v already carries the 1/τ factor."""
    u, v, w = np.asarray(s.u, float), np.asarray(s.v, float), np.asarray(s.w, float)
    if not (u.shape == v.shape == w.shape):
        raise GridMismatch("u, v, w do not share a grid")
    _require_finite(u, v, w)
    f_u = p.mu * u * (1.0 - u - w)
    f_v = (u - v) / p.tau
    f_w = -v * w + p.eta * w * (1.0 - u - w)
    return f_u, f_v, f_w


def transform_to_a(s: State, p: ModelParams) -> np.ndarray:
    """a = u exp(-ξ w)."""
    _require_finite(s.u, s.w)
    return s.u * np.exp(-p.xi * s.w)


def transform_from_a(a, w, p: ModelParams) -> np.ndarray:
    """Inverse of :func:`transform_to_a`: u = a exp(ξ w)."""
    a = np.asarray(a, float)
    w = np.asarray(w, float)
    _require_finite(a, w)
    return a * np.exp(p.xi * w)


def homogeneous_steady_states(p: ModelParams) -> list:
    """Spatially constant steady states of the kinetics.

    For μ > 0 and η > 0 these are exactly (0,0,0), (0,0,1), (1,1,0). Degenerate
    rates produce continua; those come back as flagged representatives.
    """
    if p.mu > 0 and p.eta > 0:
        return [SteadyState(0.0, 0.0, 0.0), SteadyState(0.0, 0.0, 1.0), SteadyState(1.0, 1.0, 0.0)]
    if p.mu > 0:
        # η = 0: -vw = 0 with v = u = 0 leaves w free
        return [SteadyState(0.0, 0.0, 0.0, family="(0, 0, c) for any c >= 0"),
                SteadyState(1.0, 1.0, 0.0)]
    if p.eta > 0:
        return [SteadyState(0.0, 0.0, 0.0, family="(c, c, 0) for any c >= 0"),
                SteadyState(0.0, 0.0, 1.0,
                            family="(c, c, 1 - c(1 + 1/eta)) for 0 <= c <= eta/(1 + eta)")]
    return [SteadyState(0.0, 0.0, 0.0, family="(c, c, 0) for any c >= 0"),
            SteadyState(0.0, 0.0, 0.0, family="(0, 0, c) for any c >= 0")]
