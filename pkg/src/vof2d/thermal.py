"""Implicit BDF2 advection-diffusion of the cell-centered temperature.

Walls: ``T = T_bottom`` at ``y = y0``, ``T = T_top`` at ``y = y0 + Ly`` and
insulated side walls.  Advection is first-order upwind with the face
velocities of the current flow.
"""
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


class ThermalSolveError(RuntimeError):
    pass


@dataclass
class TemperatureField:
    T: np.ndarray
    T_prev: np.ndarray = None
    dt_prev: float = None
    T_bottom: float = 1.0
    T_top: float = 0.0


def bdf2_coefficients(dt_new, dt_old=None):
    """Variable-step BDF2 weights ``(a, b, c)`` of ``T^{k+1}, T^k, T^{k-1}``.

    Without history (``dt_old`` is ``None`` or infinite) this is backward Euler.
    """
    if dt_new <= 0:
        raise ValueError("time step must be positive")
    if dt_old is None or np.isinf(dt_old):
        return 1.0 / dt_new, -1.0 / dt_new, 0.0
    if dt_old <= 0:
        raise ValueError("previous time step must be positive")
    s = dt_new + dt_old
    return (2 * dt_new + dt_old) / (dt_new * s), -s / (dt_new * dt_old), dt_new / (dt_old * s)


def _index(nx, ny):
    return np.arange(nx * ny).reshape(nx, ny)


def diffusion_operator(grid):
    """``(L, g)`` with ``L T + g`` the discrete Laplacian for unit wall values.

    ``g`` is split into bottom and top parts so that any Dirichlet values can
    be applied: the boundary term is ``T_bottom * g[0] + T_top * g[1]``.
    """
    nx, ny, h = grid.nx, grid.ny, grid.h
    ex = np.ones(nx)
    dx = sp.diags([ex[:-1], -2 * ex, ex[:-1]], [-1, 0, 1], format="lil")
    dx[0, 0] = -1.0
    dx[-1, -1] = -1.0
    ey = np.ones(ny)
    dy = sp.diags([ey[:-1], -2 * ey, ey[:-1]], [-1, 0, 1], format="lil")
    # Dirichlet by linear extrapolation: ghost = 2 T_wall - T_first
    dy[0, 0] = -3.0
    dy[-1, -1] = -3.0
    L = (sp.kron(dx.tocsr(), sp.identity(ny)) + sp.kron(sp.identity(nx), dy.tocsr())) / h**2
    gb = np.zeros((nx, ny))
    gt = np.zeros((nx, ny))
    gb[:, 0] = 2.0 / h**2
    gt[:, -1] = 2.0 / h**2
    return L.tocsr(), (gb.ravel(), gt.ravel())


def upwind_operator(grid, flow):
    """Sparse matrix of the first-order upwind ``u . grad T``."""
    nx, ny, h = grid.nx, grid.ny, grid.h
    idx = _index(nx, ny)
    u, v = flow.u, flow.v
    rows, cols, vals = [], [], []

    def add(mask_w, c, nb):
        w = mask_w / h
        sel = w > 0
        rows.append(c[sel])
        cols.append(c[sel])
        vals.append(w[sel])
        rows.append(c[sel])
        cols.append(nb[sel])
        vals.append(-w[sel])

    # inflow through the west face of cells 1..nx-1, east face of 0..nx-2
    add(np.maximum(u[1:-1, :], 0.0), idx[1:, :], idx[:-1, :])
    add(np.maximum(-u[1:-1, :], 0.0), idx[:-1, :], idx[1:, :])
    add(np.maximum(v[:, 1:-1], 0.0), idx[:, 1:], idx[:, :-1])
    add(np.maximum(-v[:, 1:-1], 0.0), idx[:, :-1], idx[:, 1:])
    n = nx * ny
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(n, n))


class ThermalSolver:
    def __init__(self, grid, kappa=1.0, tol=1e-10, max_iter=5):
        self.grid = grid
        self.kappa = kappa
        self.tol = tol
        self.max_iter = max_iter
        self.L, self.g = diffusion_operator(grid)
        self.I = sp.identity(grid.nx * grid.ny, format="csr")

    def advance(self, field, flow, dt):
        """New ``TemperatureField`` after one implicit step of size ``dt``."""
        if dt == 0:
            return field
        a, b, c = bdf2_coefficients(dt, field.dt_prev if field.T_prev is not None else None)
        T0 = field.T.ravel()
        rhs = -b * T0 + self.kappa * (field.T_bottom * self.g[0] + field.T_top * self.g[1])
        if c:
            rhs = rhs - c * field.T_prev.ravel()
        M = a * self.I - self.kappa * self.L
        if flow is not None:
            M = M + upwind_operator(self.grid, flow)
        M = M.tocsr()
        ref = max(float(np.max(np.abs(rhs))), 1e-300)
        x = self._krylov(M, rhs, T0, ref)
        if x is None:
            x = self._direct(M, rhs, ref)
        return TemperatureField(x.reshape(field.T.shape), field.T, dt, field.T_bottom, field.T_top)


    def _krylov(self, M, rhs, x0, ref):
        # the implicit matrix is strongly diagonally dominant for the step
        # sizes the CFL condition allows, so Jacobi-preconditioned BiCGSTAB
        # converges in a handful of iterations
        dinv = 1.0 / M.diagonal()
        P = spla.LinearOperator(M.shape, matvec=lambda r: dinv * r)
        x, info = spla.bicgstab(M, rhs, x0=x0, rtol=0.1 * self.tol, atol=0.0, M=P, maxiter=500)
        if info != 0:
            return None
        if float(np.max(np.abs(rhs - M @ x))) > self.tol * ref:
            return None
        return x

    def _direct(self, M, rhs, ref):
        lu = spla.splu(M.tocsc())
        x = lu.solve(rhs)
        for _ in range(self.max_iter):
            r = rhs - M @ x
            if float(np.max(np.abs(r))) <= self.tol * ref:
                return x
            x = x + lu.solve(r)
        if float(np.max(np.abs(rhs - M @ x))) > self.tol * ref:
            raise ThermalSolveError("temperature solve did not reach tolerance")
        return x


def advance_temperature(field, flow, dt, grid, tol=1e-10):
    return ThermalSolver(grid, tol=tol).advance(field, flow, dt)


def top_heat_flux(T, grid, T_top=0.0):
    """Mean conductive flux out of the top wall, ``-dT/dy`` averaged over x."""
    return float(np.mean((T[:, -1] - T_top) / (0.5 * grid.h)))
