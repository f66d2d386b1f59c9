import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from haptosim.errors import ConfigError, GridMismatch
from haptosim.model import Grid2D
from haptosim.spatial_ops import (StencilConfig, gradient_neumann, laplacian_neumann, taxis_div,
                                  weighted_laplacian)

PI = math.pi
UPWIND = StencilConfig("upwind")
CENTRAL = StencilConfig("central")


def cell_inner(f, h, g):
    return float(np.sum(f * h)) * g.cell_area


@st.composite
def grid_and_rng(draw):
    nx = draw(st.integers(3, 24))
    ny = draw(st.integers(3, 24))
    lx = draw(st.floats(0.2, 5.0))
    ly = draw(st.floats(0.2, 5.0))
    seed = draw(st.integers(0, 2 ** 32 - 1))
    return Grid2D.from_extent(nx, ny, lx, ly), np.random.default_rng(seed)


def rand_field(g, rng, scale=1.0):
    return scale * rng.standard_normal(g.shape)


# ---------------------------------------------------------------- examples

def test_constant_laplacian_is_zero():
    g = Grid2D.unit_square(16)
    assert np.all(laplacian_neumann(np.full(g.shape, 3.7), g) == 0)


def test_quadratic_interior_is_exact():
    g = Grid2D.from_extent(20, 12, 2.0, 1.0)
    X, _ = g.centers()
    lap = laplacian_neumann(X ** 2, g)
    assert np.allclose(lap[:, 1:-1], 2.0, rtol=0, atol=1e-10)


def test_cosine_laplacian_second_order():
    errs = []
    for n in (16, 32, 64, 128):
        g = Grid2D.unit_square(n)
        X, Y = g.centers()
        f = np.cos(PI * X) * np.cos(PI * Y)
        errs.append(math.sqrt(g.integrate((laplacian_neumann(f, g) + 2 * PI ** 2 * f) ** 2)))
    ratios = [errs[i] / errs[i + 1] for i in range(3)]
    assert all(3.5 <= r <= 4.5 for r in ratios), ratios


def test_gradient_examples():
    g = Grid2D.from_extent(16, 10, 1.0, 2.0)
    gx, gy = gradient_neumann(np.full(g.shape, 2.0), g)
    assert np.all(gx == 0) and np.all(gy == 0)
    X, _ = g.centers()
    gx, gy = gradient_neumann(3 * X, g)
    assert np.allclose(gx[:, 1:-1], 3.0, atol=1e-12) and np.all(gy == 0)


def test_gradient_cosine_second_order_interior():
    errs = []
    for n in (32, 64, 128):
        g = Grid2D.unit_square(n)
        X, _ = g.centers()
        gx, _ = gradient_neumann(np.cos(PI * X), g)
        errs.append(np.max(np.abs(gx + PI * np.sin(PI * X))[:, 1:-1]))
    assert 3.5 <= errs[0] / errs[1] <= 4.5 and 3.5 <= errs[1] / errs[2] <= 4.5


def test_taxis_constant_potential_is_zero():
    g = Grid2D.unit_square(12)
    c = np.random.default_rng(1).random(g.shape)
    for cfg in (UPWIND, CENTRAL):
        assert np.all(taxis_div(c, np.full(g.shape, 0.3), 2.0, g, cfg) == 0)


def test_taxis_constant_carrier_matches_laplacian():
    g = Grid2D.from_extent(17, 9, 1.3, 0.7)
    phi = np.random.default_rng(2).standard_normal(g.shape)
    got = taxis_div(np.full(g.shape, 2.5), phi, 1.0, g, CENTRAL)
    want = 2.5 * laplacian_neumann(phi, g)
    assert np.max(np.abs(got - want)) <= 1e-13 * np.max(np.abs(want))


def _taxis_errors(cfg):
    errs = []
    for n in (32, 64, 128):
        g = Grid2D.unit_square(n)
        X, Y = g.centers()
        phi = np.cos(PI * X) * np.cos(PI * Y)
        c = 2 + phi
        # ∇·(c∇φ) = ∇c·∇φ + cΔφ with c = 2 + φ
        grad_sq = PI ** 2 * ((np.sin(PI * X) * np.cos(PI * Y)) ** 2 + (np.cos(PI * X) * np.sin(PI * Y)) ** 2)
        exact = grad_sq - 2 * PI ** 2 * phi * c
        errs.append(math.sqrt(g.integrate((taxis_div(c, phi, 1.0, g, cfg) - exact) ** 2)))
    return [errs[0] / errs[1], errs[1] / errs[2]]


def test_taxis_central_second_order():
    assert all(3.5 <= r <= 4.5 for r in _taxis_errors(CENTRAL))


def test_taxis_upwind_first_order():
    assert all(1.8 <= r <= 2.2 for r in _taxis_errors(UPWIND))


def test_unknown_mode_and_mismatch():
    with pytest.raises(ConfigError):
        StencilConfig("donor")
    g = Grid2D.unit_square(8)
    with pytest.raises(GridMismatch):
        laplacian_neumann(np.zeros((8, 9)), g)
    with pytest.raises(GridMismatch):
        taxis_div(np.zeros(g.shape), np.zeros((4, 4)), 1.0, g)


# ---------------------------------------------------------------- properties (50 random fields each)

@given(grid_and_rng())
def test_laplacian_conserves(gr):
    g, rng = gr
    f = rand_field(g, rng)
    assert abs(g.integrate(laplacian_neumann(f, g))) <= 1e-12 * np.max(np.abs(f)) * g.area


@given(grid_and_rng(), st.sampled_from(["upwind", "central"]), st.floats(0, 10))
def test_taxis_conserves(gr, mode, coeff):
    g, rng = gr
    c = np.abs(rand_field(g, rng))
    phi = rand_field(g, rng)
    out = taxis_div(c, phi, coeff, g, StencilConfig(mode))
    scale = (1 + coeff) * np.max(c) * np.max(np.abs(phi)) * g.area
    assert abs(g.integrate(out)) <= 1e-12 * scale


@given(grid_and_rng())
def test_weighted_laplacian_conserves(gr):
    g, rng = gr
    f = rand_field(g, rng)
    k = np.exp(rand_field(g, rng))
    kx = 0.5 * (k[:, 1:] + k[:, :-1])
    ky = 0.5 * (k[1:, :] + k[:-1, :])
    out = weighted_laplacian(f, kx, ky, g)
    assert abs(g.integrate(out)) <= 1e-12 * np.max(np.abs(f)) * np.max(k) * g.area


@given(grid_and_rng())
def test_laplacian_symmetric(gr):
    g, rng = gr
    f, h = rand_field(g, rng), rand_field(g, rng)
    lhs = cell_inner(laplacian_neumann(f, g), h, g)
    rhs = cell_inner(f, laplacian_neumann(h, g), g)
    norm = _stiff(g) * math.sqrt(cell_inner(f, f, g) * cell_inner(h, h, g))
    assert abs(lhs - rhs) <= 1e-12 * norm


@given(grid_and_rng())
def test_laplacian_negative_semidefinite(gr):
    g, rng = gr
    f = rand_field(g, rng)
    q = cell_inner(laplacian_neumann(f, g), f, g)
    assert q / (_stiff(g) * cell_inner(f, f, g)) <= 1e-12


@given(grid_and_rng())
def test_weighted_laplacian_symmetric_nsd(gr):
    g, rng = gr
    f, h = rand_field(g, rng), rand_field(g, rng)
    k = np.exp(rand_field(g, rng))
    kx = 0.5 * (k[:, 1:] + k[:, :-1])
    ky = 0.5 * (k[1:, :] + k[:-1, :])
    L = lambda x: weighted_laplacian(x, kx, ky, g)  # noqa: E731
    norm = np.max(k) * _stiff(g) * math.sqrt(cell_inner(f, f, g) * cell_inner(h, h, g))
    assert abs(cell_inner(L(f), h, g) - cell_inner(f, L(h), g)) <= 1e-12 * norm
    assert cell_inner(L(f), f, g) <= 1e-12 * norm


def _stiff(g):
    # spectral radius scale of the 5-point operator, used to normalise tolerances
    return 4.0 / g.hx ** 2 + 4.0 / g.hy ** 2
