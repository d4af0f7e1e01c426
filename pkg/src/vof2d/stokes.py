"""Staggered (MAC) Stokes solver with free-slip walls and constant viscosity.

Velocities live on faces: ``u[i, j]`` on the vertical face at ``x0 + i h``,
``v[i, j]`` on the horizontal face at ``y0 + j h``; the pressure is cell
centered.  Gravity points along ``(0, -1)`` and the scalar buoyancy ``b``
enters the vertical momentum equation as ``-b``.
"""
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy import fft


DIV_TOL = 1e-13


class StokesConvergenceError(RuntimeError):
    pass


@dataclass
class StaggeredFlow:
    u: np.ndarray
    v: np.ndarray
    P: np.ndarray

    @classmethod
    def zeros(cls, grid):
        return cls(np.zeros((grid.nx + 1, grid.ny)), np.zeros((grid.nx, grid.ny + 1)),
                   np.zeros(grid.shape))

    def divergence(self, h):
        return (np.diff(self.u, axis=0) + np.diff(self.v, axis=1)) / h

    def max_speed(self):
        return float(max(np.max(np.abs(self.u)), np.max(np.abs(self.v))))

    def averaged(self, other):
        return StaggeredFlow(0.5 * (self.u + other.u), 0.5 * (self.v + other.v),
                             0.5 * (self.P + other.P))

    def scaled(self, a):
        return StaggeredFlow(a * self.u, a * self.v, a * self.P)


def assemble_buoyancy(T, C, Ra, B):
    """Cell buoyancy ``-Ra T + Ra B C``; either field may be ``None``."""
    b = 0.0
    if T is not None:
        b = b - Ra * np.asarray(T, dtype=float)
    if C is not None:
        b = b + Ra * B * np.asarray(C, dtype=float)
    return np.asarray(b, dtype=float)


def _lap1d(n, neumann):
    # second difference on n unknowns; neumann ends mirror the end value,
    # otherwise the neighbour beyond the end is a known zero
    main = -2.0 * np.ones(n)
    if neumann:
        main[0] += 1.0
        main[-1] += 1.0
    off = np.ones(n - 1)
    return sp.diags([off, main, off], [-1, 0, 1], format="csr")


def _diff(n):
    # (n+1) x n forward difference with zero rows at both ends removed:
    # maps n cell values to the n-1 interior faces
    return sp.diags([-np.ones(n - 1), np.ones(n - 1)], [0, 1], shape=(n - 1, n), format="csr")


METHODS = ("spectral", "lu")


class StokesSolver:
    """Stokes solver for one grid.

    ``method="spectral"`` eliminates the pressure with the discrete curl and
    solves the resulting biharmonic problem for the vertex stream function
    with sine transforms; free-slip walls make the wall vorticity vanish, so
    both Poisson factors are diagonal in that basis.  ``method="lu"`` factors
    the full saddle-point matrix once.  Either way the residual of the
    assembled MAC system is checked and corrected by iterative refinement.
    """

    def __init__(self, grid, viscosity=1.0, tol=1e-9, max_iter=10, method="spectral"):
        if tol <= 0:
            raise ValueError("tolerance must be positive")
        if method not in METHODS:
            raise ValueError(f"unknown Stokes method {method!r}")
        self.method = method
        self.grid = grid
        self.viscosity = float(viscosity)
        self.tol = tol
        self.max_iter = max_iter
        nx, ny = grid.nx, grid.ny
        self.scale = grid.Ly
        h = grid.h / self.scale
        self.hn = h
        Ix, Iy = sp.identity(nx, format="csr"), sp.identity(ny, format="csr")
        Ixm, Iym = sp.identity(nx - 1, format="csr"), sp.identity(ny - 1, format="csr")
        # u unknowns: interior vertical faces, index (i-1)*ny + j
        Au = -(sp.kron(_lap1d(nx - 1, False), Iy) + sp.kron(Ixm, _lap1d(ny, True))) / h**2
        Av = -(sp.kron(_lap1d(nx, True), Iym) + sp.kron(Ix, _lap1d(ny - 1, False))) / h**2
        Gx = sp.kron(_diff(nx), Iy) / h
        Gy = sp.kron(Ix, _diff(ny)) / h
        self.nu = Au.shape[0]
        self.nv = Av.shape[0]
        self.npr = nx * ny
        A = sp.bmat([[Au, None, Gx], [None, Av, Gy], [Gx.T, Gy.T, None]], format="csr")
        self.A = A
        # pin one pressure: its continuity row is implied by the others
        pin = self.nu + self.nv
        Ap = A.tolil()
        Ap[pin, :] = 0.0
        Ap[pin, pin] = 1.0
        self.pin = pin
        if method == "lu":
            lu = spla.splu(Ap.tocsc())
            self._inverse = lu.solve
        else:
            lx = (2 - 2 * np.cos(np.pi * np.arange(1, nx) / nx)) / h**2
            ly = (2 - 2 * np.cos(np.pi * np.arange(1, ny) / ny)) / h**2
            self._lam = lx[:, None] + ly[None, :]
            self._inverse = self._spectral

    def solve(self, b):
        """Flow driven by the cell buoyancy ``b``."""
        nx, ny = self.grid.nx, self.grid.ny
        b = np.broadcast_to(np.asarray(b, dtype=float), (nx, ny))
        return self.solve_forces(None, -0.5 * (b[:, 1:] + b[:, :-1]))

    def solve_forces(self, fx, fy):
        """Flow for body forces given on the interior u and v faces."""
        rhs = np.zeros(self.nu + self.nv + self.npr)
        c = self.scale**2 / self.viscosity
        if fx is not None:
            rhs[:self.nu] = np.asarray(fx, dtype=float).ravel() * c
        if fy is not None:
            rhs[self.nu:self.nu + self.nv] = np.asarray(fy, dtype=float).ravel() * c
        ref = max(np.max(np.abs(rhs)), 1e-300)
        nm = self.nu + self.nv
        work = rhs.copy()
        work[self.pin] = 0.0
        x = self._inverse(work)
        history = []
        for _ in range(self.max_iter + 1):
            r = rhs - self.A @ x
            mom = float(np.max(np.abs(r[:nm]))) / ref
            # continuity rows hold -div; judge them against the velocity scale
            umax = max(float(np.max(np.abs(x[:nm]))), 1e-300)
            div = float(np.max(np.abs(r[nm:]))) * self.hn / umax
            history.append((mom, div))
            if not np.any(rhs) or (mom <= self.tol and div <= DIV_TOL):
                break
            r[self.pin] = 0.0
            x = x + self._inverse(r)
        else:
            raise StokesConvergenceError(f"Stokes residuals {history} above tol {self.tol}")
        self.history = history
        return self._unpack(x)

    def _spectral(self, rhs):
        # momentum part of rhs only; the result is divergence free by construction
        nx, ny, h = self.grid.nx, self.grid.ny, self.hn
        FX = np.zeros((nx + 1, ny))
        FY = np.zeros((nx, ny + 1))
        FX[1:-1, :] = rhs[:self.nu].reshape(nx - 1, ny)
        FY[:, 1:-1] = rhs[self.nu:self.nu + self.nv].reshape(nx, ny - 1)
        curl = np.diff(FX[1:-1, :], axis=1) / h - np.diff(FY[:, 1:-1], axis=0) / h
        c_hat = fft.dstn(curl, type=1)
        # -lap(omega) = curl and lap(psi) = omega, omega = psi = 0 on the walls
        omega = np.zeros((nx + 1, ny + 1))
        psi = np.zeros((nx + 1, ny + 1))
        omega[1:-1, 1:-1] = fft.idstn(c_hat / self._lam, type=1)
        psi[1:-1, 1:-1] = fft.idstn(-c_hat / self._lam**2, type=1)
        u = np.diff(psi, axis=1) / h
        v = -np.diff(psi, axis=0) / h
        # pressure from the momentum equations, integrated along x = 0 then along x
        dPx = FX + np.diff(omega, axis=1) / h
        dPy = FY - np.diff(omega, axis=0) / h
        P = np.zeros((nx, ny))
        P[0, 1:] = np.cumsum(dPy[0, 1:-1]) * h
        P[1:, :] = P[0, :] + np.cumsum(dPx[1:-1, :], axis=0) * h
        x = np.empty(self.nu + self.nv + self.npr)
        x[:self.nu] = u[1:-1, :].ravel()
        x[self.nu:self.nu + self.nv] = v[:, 1:-1].ravel()
        P = P.ravel()
        x[self.nu + self.nv:] = P - P[self.pin - self.nu - self.nv]
        return x

    def _unpack(self, x):
        nx, ny = self.grid.nx, self.grid.ny
        u = np.zeros((nx + 1, ny))
        v = np.zeros((nx, ny + 1))
        u[1:-1, :] = x[:self.nu].reshape(nx - 1, ny)
        v[:, 1:-1] = x[self.nu:self.nu + self.nv].reshape(nx, ny - 1)
        P = x[self.nu + self.nv:].reshape(nx, ny)
        P = (P - P.mean()) * self.viscosity / self.scale
        return StaggeredFlow(u, v, P)


def solve_stokes(b, grid, viscosity=1.0, tol=1e-9, max_iter=10, method="spectral"):
    return StokesSolver(grid, viscosity, tol, max_iter, method).solve(b)
