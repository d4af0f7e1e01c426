"""Benchmark set-ups: exact initial fractions, prescribed flows, run descriptors."""
from dataclasses import dataclass, field, fields, replace
import math

import numpy as np

from .advect import GhostBoundary, WallBoundary
from .grid import RefinementParams, StructuredGrid
from .plic import fractions_on_grid

KINDS = ("translate_line", "rotate_circle", "van_keken", "sinking_box", "stratified")
SECONDS_PER_MYR = 1e6 * 365.25 * 86400.0


@dataclass
class ScenarioConfig:
    kind: str = "translate_line"
    nx: int = 16
    ny: int = 16
    Lx: float = 1.0
    Ly: float = 1.0
    sigma: float = 0.5
    t_end: float = 1.0
    output_times: tuple = ()
    dt_max: float = math.inf
    # translate_line / rotate_circle
    velocity: tuple = (-0.25, -0.24)
    omega: float = math.pi
    circle_center: tuple = (0.625, 0.5)
    circle_radius: float = 0.125
    rotation_center: tuple = (0.5, 0.5)
    # thermochemical
    Ra: float = 1e5
    B: float = 0.0
    A: float = 0.05
    k: float = 1.5
    rab: float = 1.0
    # sinking box, SI units
    rho0: float = 3200.0
    rho1: float = 3300.0
    mu: float = 1e21
    gravity: float = 9.8
    length: float = 500e3
    # AMR
    amr_levels: int = 0
    eps_vof: float = 1e-6
    band_width: int = 4
    amr_uniform: bool = False
    # solvers
    stokes_tol: float = 1e-9
    stokes_max_iter: int = 10
    stokes_method: str = "spectral"
    thermal_tol: float = 1e-10
    buoyancy: str = "p0"
    correction: str = "heaviside"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown scenario {self.kind!r}")
        if not 0 < self.sigma <= 1:
            raise ValueError("CFL number must lie in (0, 1]")
        if self.Ra <= 0:
            raise ValueError("Ra must be positive")
        if self.B < 0:
            raise ValueError("B must be nonnegative")
        if self.kind == "stratified" and not 0 <= self.A <= 0.05:
            raise ValueError("perturbation amplitude A must lie in [0, 0.05] to keep 0 <= T <= 1")
        if self.buoyancy not in ("p0", "dgq1"):
            raise ValueError("buoyancy must be 'p0' or 'dgq1'")
        if self.stokes_method not in ("spectral", "lu"):
            raise ValueError("stokes_method must be 'spectral' or 'lu'")
        if self.correction not in ("explicit", "heaviside"):
            raise ValueError("correction must be 'explicit' or 'heaviside'")


DEFAULTS = {
    "translate_line": dict(nx=16, ny=16, t_end=1.0),
    "rotate_circle": dict(nx=16, ny=16, t_end=2.0),
    "van_keken": dict(nx=117, ny=128, Lx=117 / 128, Ly=1.0, t_end=2000.0,
                      output_times=(2000.0,), dt_max=10.0),
    "sinking_box": dict(nx=64, ny=64, Lx=500e3, Ly=500e3, t_end=9.81 * SECONDS_PER_MYR,
                        output_times=(9.81 * SECONDS_PER_MYR,), amr_levels=2),
    "stratified": dict(nx=192, ny=64, Lx=3.0, Ly=1.0, t_end=2.36e-2,
                       output_times=(1.97e-2, 2.36e-2), amr_levels=2, dt_max=1e-4),
}


def default_config(kind, **overrides):
    base = dict(DEFAULTS[kind])
    base.update(overrides)
    return ScenarioConfig(kind=kind, **base)


def config_field_names():
    return [f.name for f in fields(ScenarioConfig)]


@dataclass
class PrescribedVelocity:
    """Closed-form (u, v)(x, y, t)."""
    u: object
    v: object

    def face_fluxes(self, grid, t, dt):
        xf, yc = grid.x_faces()
        X, Y = np.meshgrid(xf, yc, indexing="ij")
        U = dt * self.u(X, Y, t) * grid.h
        xc, yf = grid.y_faces()
        X, Y = np.meshgrid(xc, yf, indexing="ij")
        V = dt * self.v(X, Y, t) * grid.h
        return U, V

    def max_speed(self, grid, t):
        xf, yc = grid.x_faces()
        X, Y = np.meshgrid(xf, yc, indexing="ij")
        um = np.max(np.abs(self.u(X, Y, t)))
        xc, yf = grid.y_faces()
        X, Y = np.meshgrid(xc, yf, indexing="ij")
        vm = np.max(np.abs(self.v(X, Y, t)))
        return float(max(um, vm))


def constant_velocity(ux, uy):
    return PrescribedVelocity(lambda x, y, t: np.full(np.shape(x), ux),
                              lambda x, y, t: np.full(np.shape(x), uy))


def rotation_velocity(omega, center):
    cx, cy = center
    return PrescribedVelocity(lambda x, y, t: -omega * (y - cy),
                              lambda x, y, t: omega * (x - cx))


# ---------------------------------------------------------------- initial data

def init_halfplane(grid, normal, offset):
    """Exact fractions of ``{x : n . x < offset}`` (n a unit vector)."""
    X, Y = grid.centers()
    return fractions_on_grid(normal[0], normal[1], offset, X, Y, grid.h)


def _seg_integrals(p, q, r):
    # antiderivative of sqrt(r^2 - x^2); atan2 of the same s keeps the two
    # terms consistent near x = +-r, where asin(x / r) loses accuracy
    def P(x):
        s = math.sqrt(max((r - x) * (r + x), 0.0))
        return 0.5 * (x * s + r * r * math.atan2(x, s))
    return P(q) - P(p)


def _quadrant_area(x, y, r):
    # area of the disk of radius r at the origin with X <= x and Y <= y
    if y <= -r or x <= -r:
        return 0.0
    xt = min(x, r)
    if y >= r:
        return 2.0 * _seg_integrals(-r, xt, r)
    a = math.sqrt(r * r - y * y)
    total = 0.0
    if y >= 0:
        hi = min(xt, -a)
        if hi > -r:
            total += 2.0 * _seg_integrals(-r, hi, r)
    lo, hi = -a, min(xt, a)
    if hi > lo:
        total += y * (hi - lo) + _seg_integrals(lo, hi, r)
    if y >= 0 and xt > a:
        total += 2.0 * _seg_integrals(a, xt, r)
    return total


def circle_cell_area(cx, cy, r, x0, y0, x1, y1):
    """Exact area of the disk intersected with an axis-aligned rectangle."""
    dx = max(x0 - cx, 0.0, cx - x1)
    dy = max(y0 - cy, 0.0, cy - y1)
    if dx * dx + dy * dy >= r * r:
        return 0.0
    far = max((x0 - cx) ** 2, (x1 - cx) ** 2) + max((y0 - cy) ** 2, (y1 - cy) ** 2)
    if far <= r * r:
        return (x1 - x0) * (y1 - y0)
    a, b, c, d = x0 - cx, x1 - cx, y0 - cy, y1 - cy
    return (_quadrant_area(b, d, r) - _quadrant_area(a, d, r)
            - _quadrant_area(b, c, r) + _quadrant_area(a, c, r))


def init_circle(grid, center, radius):
    """Exact disk fractions; the disk must not touch the boundary."""
    cx, cy = center
    if (cx - radius <= grid.x0 or cx + radius >= grid.x0 + grid.Lx
            or cy - radius <= grid.y0 or cy + radius >= grid.y0 + grid.Ly):
        raise ValueError("circle touches the domain boundary")
    h = grid.h
    f = np.zeros(grid.shape)
    i0 = max(int((cx - radius - grid.x0) / h) - 1, 0)
    i1 = min(int((cx + radius - grid.x0) / h) + 2, grid.nx)
    j0 = max(int((cy - radius - grid.y0) / h) - 1, 0)
    j1 = min(int((cy + radius - grid.y0) / h) + 2, grid.ny)
    for i in range(i0, i1):
        x0 = grid.x0 + i * h
        for j in range(j0, j1):
            y0 = grid.y0 + j * h
            f[i, j] = circle_cell_area(cx, cy, radius, x0, y0, x0 + h, y0 + h) / (h * h)
    return f


def init_rectangle(grid, rect):
    """Exact fractions of the rectangle ``(x0, y0, x1, y1)``."""
    rx0, ry0, rx1, ry1 = rect
    h = grid.h
    xe = grid.x0 + np.arange(grid.nx + 1) * h
    ye = grid.y0 + np.arange(grid.ny + 1) * h
    wx = np.clip(np.minimum(xe[1:], rx1) - np.maximum(xe[:-1], rx0), 0.0, None) / h
    wy = np.clip(np.minimum(ye[1:], ry1) - np.maximum(ye[:-1], ry0), 0.0, None) / h
    return np.outer(wx, wy)


def init_cosine_layer(grid, base, amp, width):
    """Fractions of the region above ``y = base + amp cos(pi x / width)``."""
    h = grid.h
    xe = grid.x0 + np.arange(grid.nx + 1) * h
    ye = grid.y0 + np.arange(grid.ny + 1) * h
    kx = math.pi / width

    def G(x):
        return base * x + amp * np.sin(kx * x) / kx

    def x_at(y):
        # g decreases on [0, width]; invert with clipping to the row range
        c = np.clip((y - base) / amp, -1.0, 1.0)
        return np.arccos(c) / kx

    below = np.zeros(grid.shape)
    a, b = xe[:-1], xe[1:]
    for j in range(grid.ny):
        y0, y1 = ye[j], ye[j + 1]
        # clip(g, y0, y1) - y0 integrated over each [a, b]
        xa = np.clip(x_at(y1), a, b)   # g >= y1 left of xa
        xb = np.clip(x_at(y0), a, b)   # g <= y0 right of xb
        area = (y1 - y0) * (xa - a) + (G(xb) - G(xa)) - y0 * (xb - xa)
        below[:, j] = area / (h * h)
    return 1.0 - below


def stratified_temperature(X, Y, A, k):
    T = np.full(np.shape(X), 0.5)
    lo = Y <= 0.1
    hi = Y >= 0.9
    w = 2.0 * k * math.pi / 3.0
    T[lo] = (1 - 5 * Y[lo]) + A * np.sin(10 * math.pi * Y[lo]) * (1 - np.cos(w * X[lo]))
    T[hi] = (5 - 5 * Y[hi]) + A * np.sin(10 * math.pi * Y[hi]) * (1 - np.cos(w * X[hi] + math.pi))
    return T


# ------------------------------------------------------------ run descriptors

@dataclass
class RunDescriptor:
    config: ScenarioConfig
    grid: StructuredGrid
    vof_grid: StructuredGrid
    f0: np.ndarray
    boundary: object
    velocity: PrescribedVelocity = None
    exact: object = None
    T0: np.ndarray = None
    amr: RefinementParams = None
    physics: dict = field(default_factory=dict)

    @property
    def coupled(self):
        return self.velocity is None


def _grids(cfg):
    grid = StructuredGrid(cfg.nx, cfg.ny, cfg.Lx, cfg.Ly)
    k = 2 ** cfg.amr_levels
    amr = None
    if cfg.amr_levels > 0 and not cfg.amr_uniform:
        amr = RefinementParams(cfg.eps_vof, cfg.band_width, cfg.amr_levels)
    return grid, grid.refined(k), amr


def scenario_translate(cfg):
    grid, vgrid, _ = _grids(cfg)
    ux, uy = cfg.velocity
    s = 1.0 / math.sqrt(2.0)
    n = (-s, -s)        # composition 1 lies above y = 1 - x

    def offset(tx, ty):
        return n[0] * (0.5 + ux * tx) + n[1] * (0.5 + uy * ty)

    def fill(X, Y, tx, ty):
        return fractions_on_grid(n[0], n[1], offset(tx, ty), X, Y, vgrid.h)

    def exact(t):
        return init_halfplane(vgrid, n, offset(t, t))

    return RunDescriptor(cfg, grid, vgrid, exact(0.0), GhostBoundary(vgrid, fill),
                         velocity=constant_velocity(ux, uy), exact=exact)


def scenario_rotate(cfg):
    grid, vgrid, _ = _grids(cfg)
    cx, cy = cfg.rotation_center
    px, py = cfg.circle_center
    w = cfg.omega

    def exact(t):
        c, s = math.cos(w * t), math.sin(w * t)
        q = (cx + c * (px - cx) - s * (py - cy), cy + s * (px - cx) + c * (py - cy))
        return init_circle(vgrid, q, cfg.circle_radius)

    def fill(X, Y, tx, ty):
        return np.zeros(np.shape(X))

    return RunDescriptor(cfg, grid, vgrid, exact(0.0), GhostBoundary(vgrid, fill),
                         velocity=rotation_velocity(w, cfg.rotation_center), exact=exact)


def scenario_van_keken(cfg):
    grid, vgrid, amr = _grids(cfg)
    f0 = init_cosine_layer(vgrid, 0.2, 0.02, cfg.Lx)
    phys = dict(mode="composition", scale=cfg.rab, viscosity=1.0, thermal=False)
    return RunDescriptor(cfg, grid, vgrid, f0, WallBoundary(), amr=amr, physics=phys)


def scenario_sinking_box(cfg):
    grid, vgrid, amr = _grids(cfg)
    L = cfg.Lx
    f0 = init_rectangle(vgrid, (0.4 * L, 0.7 * L, 0.6 * L, 0.9 * L))
    phys = dict(mode="composition", scale=(cfg.rho1 - cfg.rho0) * cfg.gravity,
                viscosity=cfg.mu, thermal=False)
    return RunDescriptor(cfg, grid, vgrid, f0, WallBoundary(), amr=amr, physics=phys)


def scenario_stratified(cfg):
    grid, vgrid, amr = _grids(cfg)
    f0 = init_rectangle(vgrid, (0.0, 0.0, cfg.Lx, 0.5 * cfg.Ly))
    X, Y = grid.centers()
    T0 = stratified_temperature(X, Y, cfg.A, cfg.k)
    phys = dict(mode="boussinesq", Ra=cfg.Ra, B=cfg.B, viscosity=1.0, thermal=True)
    return RunDescriptor(cfg, grid, vgrid, f0, WallBoundary(), T0=T0, amr=amr, physics=phys)


BUILDERS = {
    "translate_line": scenario_translate,
    "rotate_circle": scenario_rotate,
    "van_keken": scenario_van_keken,
    "sinking_box": scenario_sinking_box,
    "stratified": scenario_stratified,
}


def build(cfg):
    return BUILDERS[cfg.kind](cfg)


def with_resolution(cfg, nx, ny=None):
    return replace(cfg, nx=nx, ny=nx if ny is None else ny)
