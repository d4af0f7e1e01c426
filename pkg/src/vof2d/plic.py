"""Unit-cell PLIC geometry.

An interface line in the unit cell is ``n . (x - x_c) = d`` with ``x_c`` the
cell center and ``n`` pointing away from composition 1.  Composition 1 fills
the half-plane ``n . (x - x_c) < d``, so the volume fraction grows with ``d``.

The scalar kernels are compiled with numba and accept any nonzero normal:
the fraction only depends on ``d / |n|_1`` and on the ratio of the normal
components, so a normal and its distance may be rescaled together.
"""
from dataclasses import dataclass
import math

import numpy as np
from numba import njit


@dataclass(frozen=True)
class InterfaceLine:
    normal: tuple
    d: float

    def __post_init__(self):
        nx, ny = self.normal
        if abs(math.hypot(nx, ny) - 1.0) > 1e-12:
            raise ValueError("interface normal must have unit length")


@njit(cache=True)
def frac_nd(nx, ny, d):
    ax = abs(nx)
    ay = abs(ny)
    s = ax + ay
    db = d / s
    if db >= 0.5:
        return 1.0
    if db <= -0.5:
        return 0.0
    m = min(ax, ay) / s
    if db < m - 0.5:
        t = db + 0.5
        return t * t / (2.0 * m * (1.0 - m))
    if db > 0.5 - m:
        t = 0.5 - db
        return 1.0 - t * t / (2.0 * m * (1.0 - m))
    return 0.5 + db / (1.0 - m)


@njit(cache=True)
def dist_nf(nx, ny, f):
    ax = abs(nx)
    ay = abs(ny)
    s = ax + ay
    if f <= 0.0:
        return -0.5 * s
    if f >= 1.0:
        return 0.5 * s
    m = min(ax, ay) / s
    w = 2.0 * m * (1.0 - m)
    fc = 0.5 * m / (1.0 - m)
    if f < fc:
        db = -0.5 + math.sqrt(w * f)
    elif f > 1.0 - fc:
        db = 0.5 - math.sqrt(w * (1.0 - f))
    else:
        db = (f - 0.5) * (1.0 - m)
    return db * s


@njit(cache=True)
def flux_frac_nd(nx, ny, d, kx, ky, r):
    # C1 fraction of the strip of relative width r next to the face with
    # outward normal (kx, ky); the strip is mapped back onto the unit square
    if r <= 0.0:
        return 0.0
    nk = nx * kx + ny * ky
    ix = nx + (r - 1.0) * nk * kx
    iy = ny + (r - 1.0) * nk * ky
    di = d - 0.5 * (1.0 - r) * nk
    return frac_nd(ix, iy, di)


def _check_normal(n):
    nx, ny = float(n[0]), float(n[1])
    if nx == 0.0 and ny == 0.0:
        raise ValueError("zero interface normal")
    return nx, ny


def volume_fraction(n, d):
    """Area fraction of the unit cell on the composition-1 side of the line."""
    nx, ny = _check_normal(n)
    return frac_nd(nx, ny, float(d))


def distance_from_fraction(n, f):
    """Invert :func:`volume_fraction` for ``d`` in closed form."""
    nx, ny = _check_normal(n)
    if not 0.0 <= f <= 1.0:
        raise ValueError(f"fraction {f} outside [0, 1]")
    return dist_nf(nx, ny, float(f))


def flux_interface_remap(line, n_k, v_flux, v_cell):
    """Line seen by the unit square that the flux strip is stretched onto.

    The strip is the part of the cell within ``v_flux / v_cell`` of the face
    with outward normal ``n_k``.  Returns a unit-normal ``InterfaceLine``.
    """
    if v_flux < 0 or v_flux > v_cell:
        raise ValueError("flux volume must lie in [0, V_e]")
    if v_flux == 0:
        raise ValueError("empty flux region has no interface")
    r = v_flux / v_cell
    nx, ny = line.normal
    kx, ky = n_k
    nk = nx * kx + ny * ky
    ix = nx + (r - 1.0) * nk * kx
    iy = ny + (r - 1.0) * nk * ky
    di = line.d - 0.5 * (1.0 - r) * nk
    s = math.hypot(ix, iy)
    return InterfaceLine((ix / s, iy / s), di / s)


def flux_c1_volume(line, n_k, v_flux, v_cell):
    """C1 volume inside the flux strip; ``line=None`` marks a saturated cell."""
    if v_flux < 0 or v_flux > v_cell:
        raise ValueError("flux volume must lie in [0, V_e]")
    if v_flux == 0:
        return 0.0
    if isinstance(line, (int, float)):
        return float(line) * v_flux
    nx, ny = line.normal
    return flux_frac_nd(nx, ny, line.d, n_k[0], n_k[1], v_flux / v_cell) * v_flux


def _clip(poly, nx, ny, c):
    # keep the part with nx*x + ny*y <= c
    out = []
    k = len(poly)
    for i in range(k):
        p = poly[i]
        q = poly[(i + 1) % k]
        sp = nx * p[0] + ny * p[1] - c
        sq = nx * q[0] + ny * q[1] - c
        if sp <= 0:
            out.append(p)
        if (sp < 0 < sq) or (sq < 0 < sp):
            t = sp / (sp - sq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return out


def _shoelace(poly):
    a = 0.0
    for i in range(len(poly)):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % len(poly)]
        a += x1 * y2 - x2 * y1
    return abs(a) / 2


def clip_area_oracle(line, rect):
    """C1 area inside ``rect = (x0, y0, x1, y1)`` by polygon clipping.

    Coordinates are unit-cell coordinates with the origin at the lower-left
    corner.  Only meant for tests.
    """
    x0, y0, x1, y1 = rect
    if x1 <= x0 or y1 <= y0:
        return 0.0
    nx, ny = line.normal
    c = line.d + 0.5 * (nx + ny)
    poly = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    poly = _clip(poly, nx, ny, c)
    if len(poly) < 3:
        return 0.0
    return _shoelace(poly)


def flux_strip(n_k, r):
    """Rectangle of the flux strip of relative width ``r`` in unit coords."""
    kx, ky = n_k
    if kx == 1:
        return (1 - r, 0.0, 1.0, 1.0)
    if kx == -1:
        return (0.0, 0.0, r, 1.0)
    if ky == 1:
        return (0.0, 1 - r, 1.0, 1.0)
    return (0.0, 0.0, 1.0, r)


def fractions_on_grid(nx, ny, d0, xc, yc, h):
    """Exact fractions of the half-plane ``n . (x - p) < d0`` on many cells.

    ``d0`` is the line offset ``n . p`` in physical units and ``xc, yc`` are
    arrays of cell centers; ``n`` must be a unit vector.
    """
    d = (d0 - nx * xc - ny * yc) / h
    out = np.empty(np.shape(d))
    _fill_fractions(nx, ny, np.ravel(d), out.reshape(-1))
    return out


@njit(cache=True)
def _fill_fractions(nx, ny, d, out):
    for i in range(d.size):
        out[i] = frac_nd(nx, ny, d[i])
