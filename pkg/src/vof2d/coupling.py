"""IMPES time stepping and the composition views used by the buoyancy."""
from dataclasses import dataclass, field
import math

import numpy as np

from .advect import BoundednessError, CFLError, SweepStats, strang_step
from .elvira import reconstruct_field
from .grid import enforce_leaves, interface_at_finest, remesh, remesh_interval
from .stokes import StaggeredFlow, StokesSolver, assemble_buoyancy
from .thermal import TemperatureField, ThermalSolver, top_heat_flux

MAX_RETRIES = 3


def project_dg_q1(f, line=None, eps=1e-6):
    """Corner values ``(C00, C10, C01, C11)`` of the bounded linear view.

    ``C(x) = f + s g . (x - x_c)`` with ``g = -n / |n|_1`` and the largest
    ``s`` that keeps every corner in [0, 1].  Corners are ordered
    (x=0, y=0), (1, 0), (0, 1), (1, 1).
    """
    if line is None or not eps < f < 1 - eps:
        return (f, f, f, f)
    nx, ny = line.normal
    l1 = abs(nx) + abs(ny)
    gx, gy = -nx / l1, -ny / l1
    s = 2.0 * min(f, 1.0 - f)
    return tuple(f + s * (gx * (cx - 0.5) + gy * (cy - 0.5))
                 for cx, cy in ((0, 0), (1, 0), (0, 1), (1, 1)))


def dg_q1_face_values(C, eps=1e-6):
    """DG-Q1 values of the base-cell composition at cell face midpoints.

    Returns ``(south, north)`` arrays: the view of each cell evaluated at the
    midpoint of its bottom and top face.
    """
    has, nrm, d = reconstruct_field(C, eps)
    l1 = np.abs(nrm[..., 0]) + np.abs(nrm[..., 1])
    l1 = np.where(has, l1, 1.0)
    gy = np.where(has, -nrm[..., 1] / l1, 0.0)
    s = 2.0 * np.minimum(C, 1.0 - C)
    half = 0.5 * s * gy
    return C - half, C + half


def stream_function(flow, h):
    """Vertex stream function with ``u h = dpsi`` along y, zero on the walls."""
    nx1, ny = flow.u.shape
    psi = np.zeros((nx1, ny + 1))
    psi[:, 1:] = np.cumsum(flow.u * h, axis=1)
    psi[:, -1] = 0.0
    psi[0, :] = 0.0
    psi[-1, :] = 0.0
    return psi


def refine_stream_function(psi, k):
    """Bilinear interpolation of vertex values onto a k-times finer lattice."""
    if k == 1:
        return psi
    # bilinear = linear along x, then linear along y
    w = np.arange(k) / k
    n0, n1 = psi.shape
    a = psi[:-1, None, :] * (1 - w)[None, :, None] + psi[1:, None, :] * w[None, :, None]
    px = np.concatenate([a.reshape((n0 - 1) * k, n1), psi[-1:, :]], axis=0)
    b = px[:, :-1, None] * (1 - w)[None, None, :] + px[:, 1:, None] * w[None, None, :]
    return np.concatenate([b.reshape(px.shape[0], (n1 - 1) * k), px[:, -1:]], axis=1)


def fluxes_from_stream_function(psi):
    """Face volume rates: ``U = dpsi`` along y, ``V = -dpsi`` along x."""
    return np.diff(psi, axis=1), -np.diff(psi, axis=0)


def block_mean(f, k):
    if k == 1:
        return f.copy()
    n0, n1 = f.shape
    return f.reshape(n0 // k, k, n1 // k, k).mean(axis=(1, 3))


@dataclass
class SimulationState:
    t: float
    step: int
    f: np.ndarray
    T: TemperatureField = None
    flow_old: StaggeredFlow = None
    flow_new: StaggeredFlow = None
    level: np.ndarray = None
    stats: SweepStats = field(default_factory=SweepStats)
    inflow: float = 0.0
    amr_ok: bool = True


class Simulation:
    """Owns the solvers and advances a run descriptor step by step."""

    def __init__(self, desc):
        self.desc = desc
        cfg = desc.config
        self.cfg = cfg
        self.grid = desc.grid
        self.vgrid = desc.vof_grid
        self.k = self.vgrid.nx // self.grid.nx
        self.eps = cfg.eps_vof
        self.amr = desc.amr
        self.N = remesh_interval(cfg.band_width, cfg.sigma) if self.amr else None
        phys = desc.physics
        self.stokes = None
        self.thermal = None
        if desc.coupled:
            self.stokes = StokesSolver(self.grid, phys.get("viscosity", 1.0),
                                       cfg.stokes_tol, cfg.stokes_max_iter, cfg.stokes_method)
            if phys.get("thermal"):
                self.thermal = ThermalSolver(self.grid, tol=cfg.thermal_tol)
        f0 = np.array(desc.f0, dtype=float)
        level = None
        if self.amr:
            level = np.full(f0.shape, self.amr.L_max, dtype=np.int8)
            f0, level = remesh(f0, level, self.amr)
        T = TemperatureField(np.array(desc.T0, dtype=float)) if desc.T0 is not None else None
        self.state = SimulationState(0.0, 0, f0, T, level=level)
        self.total0 = self.total_c1()
        self._dt_fixed = None
        if not desc.coupled:
            vmax = desc.velocity.max_speed(self.vgrid, 0.0)
            dt = cfg.sigma * self.vgrid.h / vmax if vmax > 0 else cfg.t_end
            n = max(1, math.ceil(cfg.t_end / dt - 1e-9))
            self._dt_fixed = cfg.t_end / n
            self.n_steps = n

    # ---------------------------------------------------------------- views
    def composition(self):
        return block_mean(self.state.f, self.k)

    def total_c1(self):
        return float(np.sum(self.state.f)) * self.vgrid.cell_volume

    def buoyancy_flow(self, T, f):
        phys = self.desc.physics
        C = block_mean(f, self.k)
        if phys["mode"] == "boussinesq":
            Tc = T.T if T is not None else None
            if self.cfg.buoyancy == "dgq1":
                return self._solve_dgq1(Tc, C, phys["Ra"], phys["Ra"] * phys["B"])
            return self.stokes.solve(assemble_buoyancy(Tc, C, phys["Ra"], phys["B"]))
        if self.cfg.buoyancy == "dgq1":
            return self._solve_dgq1(None, C, 0.0, phys["scale"])
        return self.stokes.solve(phys["scale"] * C)

    def _solve_dgq1(self, T, C, Ra, cscale):
        south, north = dg_q1_face_values(C, self.eps)
        # face value: average of the two cells' linear views at the shared face
        Cf = 0.5 * (north[:, :-1] + south[:, 1:])
        b = cscale * Cf
        if T is not None:
            b = b - Ra * 0.5 * (T[:, 1:] + T[:, :-1])
        return self.stokes.solve_forces(None, -b)

    # ---------------------------------------------------------------- steps
    def next_dt(self, flow_new, flow_old, t_stop):
        cfg = self.cfg
        if self._dt_fixed is not None:
            return min(self._dt_fixed, t_stop - self.state.t)
        vmax = flow_new.max_speed()
        if flow_old is not None:
            vmax = max(vmax, flow_old.averaged(flow_new).max_speed())
        dt = cfg.sigma * self.vgrid.h / vmax if vmax > 0 else cfg.dt_max
        dt = min(dt, cfg.dt_max, t_stop - self.state.t)
        # avoid a sliver step before an output time
        rest = t_stop - self.state.t - dt
        if 0 < rest < 0.05 * dt:
            dt = 0.5 * (t_stop - self.state.t)
        return dt

    def step(self, t_stop=None):
        """One IMPES step (or one prescribed-flow step); returns dt used."""
        st = self.state
        t_stop = self.cfg.t_end if t_stop is None else t_stop
        if self.desc.coupled:
            flow_new = self.buoyancy_flow(st.T, st.f)
            flow_old = st.flow_new if st.flow_new is not None else flow_new
        else:
            flow_new = flow_old = None
        dt = self.next_dt(flow_new, flow_old if st.flow_new is not None else None, t_stop)
        for attempt in range(MAX_RETRIES + 1):
            try:
                self._advance(flow_old, flow_new, dt)
                return dt
            except (CFLError, BoundednessError):
                if attempt == MAX_RETRIES or self._dt_fixed is not None:
                    raise
                dt *= 0.5
        return dt

    def _advance(self, flow_old, flow_new, dt):
        st = self.state
        stats = SweepStats()
        if dt == 0:
            return
        if self.desc.coupled:
            T_new = st.T
            if self.thermal is not None:
                T_new = self.thermal.advance(st.T, flow_new, dt)
            psi = 0.5 * (stream_function(flow_old, self.grid.h) + stream_function(flow_new, self.grid.h))
            U, V = fluxes_from_stream_function(refine_stream_function(psi, self.k))
            f_new = strang_step(st.f, dt * U, dt * V, st.step, self.vgrid, self.desc.boundary,
                                st.t, dt, self.eps, self.cfg.correction, stats=stats)
        else:
            T_new = None
            U, V = self.desc.velocity.face_fluxes(self.vgrid, st.t + 0.5 * dt, dt)
            f_new = strang_step(st.f, U, V, st.step, self.vgrid, self.desc.boundary,
                                st.t, dt, self.eps, self.cfg.correction, stats=stats)
        level = st.level
        amr_ok = True
        if self.amr:
            L = self.amr.L_max
            enforce_leaves(f_new, level, L)
            amr_ok = interface_at_finest(f_new, level, L, self.eps)
        st.f = f_new
        st.T = T_new
        st.flow_old = flow_old
        st.flow_new = flow_new
        st.t = st.t + dt
        st.step += 1
        st.stats = stats
        st.inflow += stats.inflow
        st.amr_ok = amr_ok
        if self.amr and st.step % self.N == 0:
            st.f, st.level = remesh(st.f, level, self.amr)

    def run(self, observer=None, output_times=()):
        """Advance to ``t_end``; ``observer(sim, kind)`` sees every step."""
        cfg = self.cfg
        outs = sorted(t for t in output_times if 0 < t <= cfg.t_end)
        if observer:
            observer(self, "init")
        while True:
            st = self.state
            if self._dt_fixed is not None:
                if st.step >= self.n_steps:
                    break
                t_stop = cfg.t_end
            else:
                if st.t >= cfg.t_end * (1 - 1e-12):
                    break
                pending = [t for t in outs if t > st.t * (1 + 1e-12)]
                t_stop = pending[0] if pending else cfg.t_end
            self.step(t_stop)
            if self._dt_fixed is not None and self.state.step == self.n_steps:
                self.state.t = cfg.t_end
            if observer:
                observer(self, "step")
            hit = [t for t in outs if abs(self.state.t - t) <= 1e-12 * max(1.0, t)]
            if hit and observer:
                observer(self, "output")
        return self.state

    # ----------------------------------------------------------- diagnostics
    def diagnostics(self):
        st = self.state
        f = st.f
        vmax = st.flow_new.max_speed() if st.flow_new is not None else (
            self.desc.velocity.max_speed(self.vgrid, st.t) if self.desc.velocity else 0.0)
        nu = top_heat_flux(st.T.T, self.grid, st.T.T_top) if st.T is not None else 0.0
        iface = int(np.count_nonzero((f > self.eps) & (f < 1 - self.eps)))
        l1 = ""
        if self.desc.exact is not None:
            l1 = float(np.sum(np.abs(self.desc.exact(st.t) - f))) * self.vgrid.cell_volume
        return {
            "time": st.t,
            "step": st.step,
            "total_c1": self.total_c1(),
            "min_f": st.stats.fmin if st.step else float(f.min()),
            "max_f": st.stats.fmax if st.step else float(f.max()),
            "max_u": vmax,
            "nusselt": nu,
            "interface_cells": iface,
            "l1_error": l1,
            "c1_inflow": st.inflow,
            "amr_ok": int(st.amr_ok),
        }


def impes_step(sim, dt):
    """Advance ``sim`` by exactly ``dt`` (no CFL control, no retries)."""
    st = sim.state
    if dt == 0:
        return st
    flow_new = sim.buoyancy_flow(st.T, st.f)
    flow_old = st.flow_new if st.flow_new is not None else flow_new
    sim._advance(flow_old, flow_new, dt)
    return sim.state
