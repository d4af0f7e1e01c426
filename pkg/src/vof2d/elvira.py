"""ELVIRA reconstruction on 3x3 blocks.

Arrays are indexed ``[i, j]`` with ``i`` along x and ``j`` along y, so a
stencil ``s[a, b]`` holds the cell at offset ``(a - 1, b - 1)`` from the
center.  Column sums add along y, row sums along x.
"""
from dataclasses import dataclass
import math

import numpy as np
from numba import njit, prange

from .plic import InterfaceLine, dist_nf, frac_nd

SOURCES = ("x-left", "x-centered", "x-right", "y-left", "y-centered", "y-right")


@dataclass(frozen=True)
class CandidateSlope:
    value: float
    source: str


def column_row_sums(s):
    s = np.asarray(s, dtype=float)
    S = s.sum(axis=1)
    R = s.sum(axis=0)
    return (S[0], S[1], S[2], R[0], R[1], R[2])


def candidate_slopes(sums):
    s0, s1, s2, r0, r1, r2 = sums
    vals = (s1 - s0, 0.5 * (s2 - s0), s2 - s1, r1 - r0, 0.5 * (r2 - r0), r2 - r1)
    return [CandidateSlope(v, src) for v, src in zip(vals, SOURCES)]


@njit(cache=True)
def _candidate_normal(k, slope, sign):
    # x-family: height as a function of x, C1 below (sign=1) or above;
    # y-family: width as a function of y, C1 left (sign=1) or right
    if k < 3:
        nx, ny = -slope, sign
    else:
        nx, ny = sign, -slope
    r = math.sqrt(nx * nx + ny * ny)
    return nx / r, ny / r


@njit(cache=True)
def _block_error(s, nx, ny, d):
    e = 0.0
    for a in range(3):
        for b in range(3):
            ft = frac_nd(nx, ny, d - nx * (a - 1) - ny * (b - 1))
            e += (s[a, b] - ft) ** 2
    return e


@njit(cache=True)
def elvira_kernel(s, fc):
    S0 = s[0, 0] + s[0, 1] + s[0, 2]
    S1 = s[1, 0] + s[1, 1] + s[1, 2]
    S2 = s[2, 0] + s[2, 1] + s[2, 2]
    R0 = s[0, 0] + s[1, 0] + s[2, 0]
    R1 = s[0, 1] + s[1, 1] + s[2, 1]
    R2 = s[0, 2] + s[1, 2] + s[2, 2]
    slopes = (S1 - S0, 0.5 * (S2 - S0), S2 - S1, R1 - R0, 0.5 * (R2 - R0), R2 - R1)
    best = np.inf
    bx = 0.0
    by = 1.0
    bd = 0.0
    for k in range(6):
        for sign in (1.0, -1.0):
            nx, ny = _candidate_normal(k, slopes[k], sign)
            d = dist_nf(nx, ny, fc)
            e = _block_error(s, nx, ny, d)
            if e < best:
                best = e
                bx = nx
                by = ny
                bd = d
    return bx, by, bd


def reconstruct_cell(s, f_center, eps=1e-6):
    """Best ELVIRA line for the center of stencil ``s``."""
    if not eps < f_center < 1 - eps:
        raise ValueError(f"center fraction {f_center} has no interface")
    s = np.ascontiguousarray(s, dtype=float)
    nx, ny, d = elvira_kernel(s, float(f_center))
    return InterfaceLine((nx, ny), d)


@njit(cache=True, parallel=True)
def recon_padded(fp, g, eps, nrm, dist, has):
    # reconstruct every cell of fp that has a full 3x3 neighborhood and lies
    # within g - 1 layers of ghosts; results share the padded indexing
    mx, my = fp.shape
    for i in prange(1, mx - 1):
        for j in range(1, my - 1):
            f = fp[i, j]
            if eps < f < 1.0 - eps:
                nx, ny, d = elvira_kernel(fp[i - 1:i + 2, j - 1:j + 2], f)
                nrm[i, j, 0] = nx
                nrm[i, j, 1] = ny
                dist[i, j] = d
                has[i, j] = True
            else:
                has[i, j] = False


def pad_reflect(f, g=1):
    return np.pad(f, g, mode="symmetric")


def reconstruct_field(f, eps=1e-6, padded=None):
    """Lines for every interface cell of ``f``.

    Ghost fractions come from reflection across the domain boundary unless a
    one-layer padded array is supplied.  Returns ``(has, normals, d)`` with
    ``has`` a boolean mask over the cells of ``f``.
    """
    f = np.asarray(f, dtype=float)
    fp = pad_reflect(f, 1) if padded is None else np.ascontiguousarray(padded, dtype=float)
    if fp.shape != (f.shape[0] + 2, f.shape[1] + 2):
        raise ValueError("padded field must carry one ghost layer")
    nrm = np.zeros(fp.shape + (2,))
    dist = np.zeros(fp.shape)
    has = np.zeros(fp.shape, dtype=np.bool_)
    recon_padded(fp, 1, float(eps), nrm, dist, has)
    return has[1:-1, 1:-1], nrm[1:-1, 1:-1], dist[1:-1, 1:-1]


def implied_fractions(line):
    """Fractions the line implies on the 3x3 block around its cell."""
    nx, ny = line.normal
    out = np.empty((3, 3))
    for a in range(3):
        for b in range(3):
            out[a, b] = frac_nd(nx, ny, line.d - nx * (a - 1) - ny * (b - 1))
    return out
