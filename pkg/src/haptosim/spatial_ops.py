"""Finite-volume operators on a cell-centred grid with zero-flux boundaries.

Every operator is built from differences across interior faces. Boundary
faces carry zero flux, which is the same as reflecting the field into a
mirror ghost cell. Divergence-form outputs therefore telescope to zero
over the domain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .model import Grid2D

FACE_MODES = ("upwind", "central")


@dataclass(frozen=True)
class StencilConfig:
    face_averaging: str = "upwind"

    def __post_init__(self):
        if self.face_averaging not in FACE_MODES:
            raise ConfigError(f"unknown face_averaging {self.face_averaging!r}; expected one of {FACE_MODES}")


def face_differences(f, g: Grid2D):
    """Normal derivatives on interior faces: (∂x on x-faces, ∂y on y-faces).

    Shapes are (ny, nx-1) and (ny-1, nx).
    """
    g.check(f)
    return (f[:, 1:] - f[:, :-1]) / g.hx, (f[1:, :] - f[:-1, :]) / g.hy


def face_means(f):
    """Arithmetic mean of the two neighbours on each interior face."""
    return 0.5 * (f[:, 1:] + f[:, :-1]), 0.5 * (f[1:, :] + f[:-1, :])


def divergence_of_face_fluxes(fx, fy, g: Grid2D):
    """Cell divergence of interior-face fluxes; boundary fluxes are zero."""
    out = np.empty(g.shape)
    out[:, :-1] = fx
    out[:, -1] = 0.0
    out[:, 1:] -= fx
    if g.hx != 1.0:
        out *= 1.0 / g.hx
    fy = fy * (1.0 / g.hy)
    out[:-1, :] += fy
    out[1:, :] -= fy
    return out


def laplacian_neumann(f, g: Grid2D):
    """Five-point Laplacian with mirror ghost cells."""
    f = np.asarray(f, dtype=float)
    fx, fy = face_differences(f, g)
    return divergence_of_face_fluxes(fx, fy, g)


def weighted_laplacian(f, kx, ky, g: Grid2D):
    """∇·(k∇f) with face coefficients ``kx`` (x-faces) and ``ky`` (y-faces)."""
    fx, fy = face_differences(f, g)
    return divergence_of_face_fluxes(kx * fx, ky * fy, g)


def gradient_neumann(f, g: Grid2D):
    """Cell-centred gradient (gx, gy).

    Centred differences in the interior. On boundary cells the outer face
    has zero normal derivative, so the cell value is half the inner face
    difference (the mirror-ghost centred difference).
    """
    f = np.asarray(f, dtype=float)
    fx, fy = face_differences(f, g)
    ny, nx = g.shape
    gx = np.zeros((ny, nx))
    gx[:, :-1] += fx
    gx[:, 1:] += fx
    gy = np.zeros((ny, nx))
    gy[:-1, :] += fy
    gy[1:, :] += fy
    return 0.5 * gx, 0.5 * gy


def _face_carrier(c_lo, c_hi, velocity, mode):
    if mode == "upwind":
        return np.where(velocity > 0, c_lo, c_hi)
    if mode == "central":
        return 0.5 * (c_lo + c_hi)
    raise ConfigError(f"unknown face_averaging {mode!r}")


def taxis_fluxes(carrier, potential, coeff: float, g: Grid2D, cfg: StencilConfig = StencilConfig()):
    """Face fluxes coeff * carrier_face * ∂potential on interior faces."""
    carrier = np.asarray(carrier, dtype=float)
    g.check(carrier, potential)
    mode = getattr(cfg, "face_averaging", cfg)
    px, py = face_differences(np.asarray(potential, dtype=float), g)
    vx = coeff * px
    vy = coeff * py
    cx = _face_carrier(carrier[:, :-1], carrier[:, 1:], vx, mode)
    cy = _face_carrier(carrier[:-1, :], carrier[1:, :], vy, mode)
    return cx * vx, cy * vy


def taxis_div(carrier, potential, coeff: float, g: Grid2D, cfg: StencilConfig = StencilConfig()):
    """∇·(coeff * carrier * ∇potential), conservative and zero-flux at the walls.

    In upwind mode the carrier is taken from the cell the flux leaves, so an
    explicit update with a CFL-limited step cannot create negative density.
    """
    fx, fy = taxis_fluxes(carrier, potential, coeff, g, cfg)
    return divergence_of_face_fluxes(fx, fy, g)
