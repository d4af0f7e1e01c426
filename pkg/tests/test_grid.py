import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vof2d.grid import (RefinementParams, StructuredGrid, build_levels, check_balance,
                        enforce_leaves, flag_refinement, interface_at_finest, remesh,
                        remesh_interval)
from vof2d.scenarios import init_circle


def test_grid_geometry():
    g = StructuredGrid(8, 4, 2.0, 1.0)
    assert g.h == 0.25 and g.shape == (8, 4) and g.cell_volume == 0.0625
    X, Y = g.centers()
    assert X[0, 0] == 0.125 and Y[0, 3] == 0.875
    assert g.refined(2).shape == (16, 8)


def test_grid_rejects_bad_shapes():
    with pytest.raises(ValueError):
        StructuredGrid(8, 8, 1.0, 2.0)
    with pytest.raises(ValueError):
        StructuredGrid(2, 2, 1.0, 1.0)


def test_params_validation():
    with pytest.raises(ValueError):
        RefinementParams(W=3)
    with pytest.raises(ValueError):
        RefinementParams(eps_vof=0.7)


@pytest.mark.parametrize("W,sigma,N", [(4, 0.5, 1), (6, 0.5, 3), (10, 0.25, 15), (4, 1.0, 1), (8, 0.5, 5)])
def test_remesh_interval(W, sigma, N):
    assert remesh_interval(W, sigma) == N


@given(st.integers(4, 40), st.floats(0.05, 1.0))
def test_remesh_interval_bound(W, sigma):
    N = remesh_interval(W, sigma)
    assert N >= 1
    bound = (W - 2) / (2 * sigma)
    if bound > 1:
        assert N < bound


def test_remesh_interval_errors():
    with pytest.raises(ValueError):
        remesh_interval(4, 0.0)
    with pytest.raises(ValueError):
        remesh_interval(2, 0.5)


def test_flags_cover_interface_and_jumps():
    f = np.zeros((8, 8))
    f[:, :4] = 1.0          # sharp jump between rows 3 and 4, no mixed cell
    flags = flag_refinement(f, RefinementParams())
    assert flags[:, 2:6].all() and not flags[:, :2].any() and not flags[:, 6:].any()


def test_levels_balanced_and_finest_at_interface():
    g = StructuredGrid(64, 64, 1.0, 1.0)
    f = init_circle(g, (0.4, 0.55), 0.2)
    p = RefinementParams(L_max=3)
    level = build_levels(flag_refinement(f, p), 3)
    assert check_balance(level)
    assert interface_at_finest(f, level, 3, p.eps_vof)
    assert level.min() == 0


def test_enforce_leaves_is_idempotent_and_conservative():
    rng = np.random.default_rng(1)
    f = rng.uniform(size=(16, 16))
    level = np.zeros((16, 16), dtype=np.int8)
    level[:8, :8] = 2
    total = f.sum()
    enforce_leaves(f, level, 2)
    once = f.copy()
    enforce_leaves(f, level, 2)
    assert np.array_equal(f, once)
    assert abs(f.sum() - total) <= 1e-12
    assert np.all(f[8:12, 8:12] == f[8, 8])


def test_remesh_conserves_and_keeps_interface_fine():
    g = StructuredGrid(64, 64, 1.0, 1.0)
    p = RefinementParams(L_max=2)
    f = init_circle(g, (0.5, 0.5), 0.23)
    level = np.full(f.shape, 2, dtype=np.int8)
    f1, lev1 = remesh(f, level, p)
    assert abs(f1.sum() - f.sum()) <= 1e-12 * f.sum()
    assert interface_at_finest(f1, lev1, 2, p.eps_vof)
    # moving the circle and remeshing again refines fresh cells geometrically
    f2 = init_circle(g, (0.52, 0.5), 0.23)
    enforce_leaves(f2, lev1, 2)
    f3, lev3 = remesh(f2, lev1, p)
    assert abs(f3.sum() - f2.sum()) <= 1e-12 * f2.sum()
    assert check_balance(lev3)
    assert f3.min() >= 0 and f3.max() <= 1


def test_remesh_without_refinement_levels_is_identity():
    f = np.full((8, 8), 0.25)
    out, lev = remesh(f, np.zeros((8, 8), dtype=np.int8), RefinementParams(L_max=0))
    assert np.array_equal(out, f) and not lev.any()
