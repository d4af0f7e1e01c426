import math

import numpy as np
import pytest

from vof2d.grid import StructuredGrid
from vof2d.stokes import StaggeredFlow
from vof2d.thermal import (TemperatureField, ThermalSolver, advance_temperature, bdf2_coefficients,
                           top_heat_flux)


def test_bdf2_coefficients():
    assert bdf2_coefficients(1.0, 1.0) == pytest.approx((1.5, -2.0, 0.5))
    assert bdf2_coefficients(0.5) == (2.0, -2.0, 0.0)
    a, b, c = bdf2_coefficients(0.3, 0.7)
    assert a + b + c == pytest.approx(0.0, abs=1e-14)        # constants are exact
    assert -b * 0.3 - c * 1.0 == pytest.approx(1.0)           # linear functions are exact
    with pytest.raises(ValueError):
        bdf2_coefficients(0.0)


def test_conductive_profile_is_steady():
    g = StructuredGrid(24, 8, 3.0, 1.0)
    _, Y = g.centers()
    F = TemperatureField(1.0 - Y)
    for dt in (1e-3, 1e-3, 2e-3):
        F = advance_temperature(F, None, dt, g)
    assert np.abs(F.T - (1.0 - Y)).max() <= 1e-12
    assert top_heat_flux(F.T, g) == pytest.approx(1.0, abs=1e-12)


def test_mode_decay_rate_second_order_in_time():
    g = StructuredGrid(4, 64, 1 / 16, 1.0)
    _, Y = g.centers()
    s = ThermalSolver(g, tol=1e-13)

    def err(n):
        F = TemperatureField(np.sin(math.pi * Y), T_bottom=0.0, T_top=0.0)
        dt = 0.05 / n
        for _ in range(n):
            F = s.advance(F, None, dt)
        # compare with the semi-discrete decay of the same grid mode
        lam = 4 / g.h**2 * math.sin(math.pi * g.h / 2) ** 2
        return np.abs(F.T - np.exp(-lam * 0.05) * np.sin(math.pi * Y)).max()

    e1, e2 = err(20), err(40)
    assert 1.7 <= math.log2(e1 / e2) <= 2.3


def test_zero_step_is_identity():
    g = StructuredGrid(4, 4, 1.0, 1.0)
    F = TemperatureField(np.full((4, 4), 0.3))
    assert ThermalSolver(g).advance(F, None, 0.0) is F


def test_upwind_keeps_bounds_under_strong_flow():
    g = StructuredGrid(32, 32, 1.0, 1.0)
    X, Y = g.centers()
    psi_u = StaggeredFlow.zeros(g)
    xf, yc = g.x_faces()
    Xu, Yu = np.meshgrid(xf, yc, indexing="ij")
    psi_u.u[:] = 500 * np.sin(math.pi * Xu) * np.cos(math.pi * Yu)
    xc, yf = g.y_faces()
    Xv, Yv = np.meshgrid(xc, yf, indexing="ij")
    psi_u.v[:] = -500 * np.cos(math.pi * Xv) * np.sin(math.pi * Yv)
    F = TemperatureField((Y < 0.5).astype(float))
    s = ThermalSolver(g)
    F = s.advance(F, psi_u, 1e-3)      # backward Euler step: an M-matrix
    assert F.T.min() >= -1e-12 and F.T.max() <= 1 + 1e-12
