import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vof2d.coupling import (Simulation, block_mean, dg_q1_face_values, fluxes_from_stream_function,
                            impes_step, project_dg_q1, refine_stream_function, stream_function)
from vof2d.grid import StructuredGrid
from vof2d.plic import InterfaceLine
from vof2d.scenarios import build, default_config
from vof2d.stokes import StokesSolver


def small_flow():
    g = StructuredGrid(12, 8, 1.5, 1.0)
    X, Y = g.centers()
    b = np.exp(-20 * ((X - 0.6) ** 2 + (Y - 0.4) ** 2))
    return g, StokesSolver(g).solve(b)


def test_stream_function_reproduces_coarse_fluxes():
    g, flow = small_flow()
    psi = stream_function(flow, g.h)
    U, V = fluxes_from_stream_function(psi)
    scale = flow.max_speed() * g.h
    assert np.abs(U - flow.u * g.h).max() <= 1e-13 * scale
    assert np.abs(V - flow.v * g.h).max() <= 1e-13 * scale


@pytest.mark.parametrize("k", [2, 4])
def test_refined_fluxes_divergence_free_and_consistent(k):
    g, flow = small_flow()
    psi = stream_function(flow, g.h)
    U, V = fluxes_from_stream_function(refine_stream_function(psi, k))
    scale = flow.max_speed() * g.h
    div = np.diff(U, axis=0) + np.diff(V, axis=1)
    assert np.abs(div).max() <= 1e-15 * scale * k
    assert np.all(U[0] == 0) and np.all(U[-1] == 0) and np.all(V[:, 0] == 0) and np.all(V[:, -1] == 0)
    # fine faces along one coarse face carry the coarse face flux
    Uc = U[::k, :].reshape(g.nx + 1, g.ny, k).sum(axis=2)
    assert np.abs(Uc - flow.u * g.h).max() <= 1e-13 * scale


def test_refine_identity_and_vertices():
    psi = np.arange(12.0).reshape(4, 3)
    assert refine_stream_function(psi, 1) is psi
    r = refine_stream_function(psi, 2)
    assert np.array_equal(r[::2, ::2], psi)
    assert r[1, 1] == pytest.approx(psi[:2, :2].mean())


def test_dg_q1_known_corners():
    c = project_dg_q1(0.5, InterfaceLine((0.0, 1.0), 0.0))
    assert c == pytest.approx((1.0, 1.0, 0.0, 0.0))
    s = 1 / math.sqrt(2)
    c = project_dg_q1(0.25, InterfaceLine((s, s), -0.1))
    assert c == pytest.approx((0.5, 0.25, 0.25, 0.0))
    assert project_dg_q1(1.0, None) == (1.0, 1.0, 1.0, 1.0)


@given(st.floats(1e-5, 1 - 1e-5), st.floats(0, 2 * math.pi))
def test_dg_q1_bounded_and_mean_preserving(f, theta):
    line = InterfaceLine((math.cos(theta), math.sin(theta)), 0.0)
    c = project_dg_q1(f, line)
    assert min(c) >= -1e-15 and max(c) <= 1 + 1e-15
    assert sum(c) / 4 == pytest.approx(f, abs=1e-14)
    # composition decreases along the normal
    n = line.normal
    slope = (c[1] + c[3] - c[0] - c[2]) * n[0] + (c[2] + c[3] - c[0] - c[1]) * n[1]
    assert slope <= 1e-14


def test_dg_q1_face_values_of_flat_layer():
    C = np.zeros((4, 6))
    C[:, :2] = 1.0
    C[:, 2] = 0.5
    south, north = dg_q1_face_values(C)
    assert np.allclose(south[:, 2], 1.0) and np.allclose(north[:, 2], 0.0)
    assert np.array_equal(south[:, 0], C[:, 0])


def test_block_mean():
    f = np.arange(16.0).reshape(4, 4)
    assert block_mean(f, 2).tolist() == [[2.5, 4.5], [10.5, 12.5]]


def make_sim(**kw):
    cfg = default_config("stratified", nx=24, ny=8, Lx=3.0, amr_levels=1, dt_max=1e-4, **kw)
    return Simulation(build(cfg))


def test_zero_step_is_identity():
    sim = make_sim(B=0.5)
    f0 = sim.state.f.copy()
    T0 = sim.state.T.T.copy()
    impes_step(sim, 0.0)
    assert np.array_equal(sim.state.f, f0) and np.array_equal(sim.state.T.T, T0)
    assert sim.state.step == 0


def test_coupled_steps_conserve_and_stay_bounded():
    sim = make_sim(B=0.5)
    m0 = sim.total_c1()
    for _ in range(15):
        sim.step()
        d = sim.diagnostics()
        assert d["min_f"] >= -1e-10 and d["max_f"] <= 1 + 1e-10
        assert d["amr_ok"] == 1
    assert abs(sim.total_c1() - m0) <= 1e-12 * m0
    assert sim.state.flow_new is not None and sim.state.T.dt_prev > 0


def test_dgq1_buoyancy_runs_and_conserves():
    sim = make_sim(B=0.5, buoyancy="dgq1")
    m0 = sim.total_c1()
    for _ in range(5):
        sim.step()
    assert abs(sim.total_c1() - m0) <= 1e-12 * m0


def test_time_step_respects_cfl_and_outputs():
    sim = make_sim(B=0.0)
    dt = sim.step(t_stop=3e-5)
    assert dt <= 3e-5 + 1e-20
    d = sim.diagnostics()
    assert d["max_u"] * dt <= sim.cfg.sigma * sim.vgrid.h * (1 + 1e-12) or dt == pytest.approx(3e-5)


def test_prescribed_run_hits_end_time_exactly():
    sim = Simulation(build(default_config("rotate_circle", nx=16, ny=16, t_end=0.25)))
    sim.run()
    assert sim.state.t == 0.25
