"""Matrix-free preconditioned conjugate gradient for the implicit diffusion solves."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy import fft

from .errors import LinearSolveFailure
from .model import Grid2D


@lru_cache(maxsize=16)
def neumann_laplacian_eigenvalues(g: Grid2D) -> np.ndarray:
    """Eigenvalues of the mirror-ghost five-point Laplacian, laid out like DCT-II coefficients."""
    kx = np.arange(g.nx)
    ky = np.arange(g.ny)
    lx = -(2.0 / g.hx * np.sin(np.pi * kx / (2 * g.nx))) ** 2
    ly = -(2.0 / g.hy * np.sin(np.pi * ky / (2 * g.ny))) ** 2
    lam = ly[:, None] + lx[None, :]
    lam.setflags(write=False)
    return lam


class HelmholtzDCT:
    """Exact inverse of (c0 I - c1 Δ_h) via the type-II cosine transform.

    Used as a CG preconditioner: exact for the constant-coefficient operators,
    spectrally equivalent for the exponentially weighted one.
    """

    def __init__(self, g: Grid2D, c0: float, c1: float, scale: float = 1.0):
        self.symbol = scale * (c0 - c1 * neumann_laplacian_eigenvalues(g))

    def __call__(self, r):
        return fft.idctn(fft.dctn(r, type=2, norm="ortho") / self.symbol, type=2, norm="ortho")


def pcg(apply_a, b, x0=None, rtol=1e-10, max_iter=500, precond=None, ones_image=None):
    """Solve A x = b for symmetric positive definite A, given as a callable.

    Stops when ||b - A x|| <= rtol * ||b||. If ``ones_image`` (= A applied to
    the constant field) is given, a final constant shift zeroes the sum of the
    residual, so the solve conserves mass to roundoff.

    Returns (x, iterations). Raises LinearSolveFailure on non-convergence.
    """
    b = np.asarray(b, dtype=float)
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros_like(b), 0
    target = rtol * bnorm
    r = b - apply_a(x)
    it = 0
    if np.linalg.norm(r) > target:
        z = precond(r) if precond is not None else r
        d = z.copy()
        rz = np.vdot(r, z)
        while True:
            if it >= max_iter:
                raise LinearSolveFailure(
                    f"CG did not reach rtol={rtol:g} in {max_iter} iterations "
                    f"(residual {np.linalg.norm(r) / bnorm:.3e})")
            ad = apply_a(d)
            alpha = rz / np.vdot(d, ad)
            x += alpha * d
            r -= alpha * ad
            it += 1
            if np.linalg.norm(r) <= target:
                break
            z = precond(r) if precond is not None else r
            rz_new = np.vdot(r, z)
            d = z + (rz_new / rz) * d
            rz = rz_new
    if ones_image is not None:
        x += np.sum(r) / np.sum(ones_image)
    return x, it
