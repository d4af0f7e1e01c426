"""Structured grids of square cells and interface-band refinement.

The refined composition lives on the finest level.  A refinement map stores,
for every finest-level cell, the level of the leaf that contains it; leaves
coarser than the finest level are aligned blocks whose fine cells all carry
the same value.
"""
from dataclasses import dataclass, field
import math

import numpy as np
from numba import njit

from .elvira import elvira_kernel
from .plic import frac_nd


@dataclass(frozen=True)
class StructuredGrid:
    nx: int
    ny: int
    Lx: float = 1.0
    Ly: float = 1.0
    x0: float = 0.0
    y0: float = 0.0

    def __post_init__(self):
        if self.nx < 3 or self.ny < 3:
            raise ValueError("grid needs at least 3x3 cells")
        hx, hy = self.Lx / self.nx, self.Ly / self.ny
        if abs(hx - hy) > 1e-14 * hx:
            raise ValueError(f"cells are not square: {hx} vs {hy}")

    @property
    def h(self):
        return self.Lx / self.nx

    @property
    def shape(self):
        return (self.nx, self.ny)

    @property
    def cell_volume(self):
        return self.h * self.h

    def centers(self):
        h = self.h
        xc = self.x0 + (np.arange(self.nx) + 0.5) * h
        yc = self.y0 + (np.arange(self.ny) + 0.5) * h
        return np.meshgrid(xc, yc, indexing="ij")

    def x_faces(self):
        h = self.h
        return self.x0 + np.arange(self.nx + 1) * h, self.y0 + (np.arange(self.ny) + 0.5) * h

    def y_faces(self):
        h = self.h
        return self.x0 + (np.arange(self.nx) + 0.5) * h, self.y0 + np.arange(self.ny + 1) * h

    def refined(self, k):
        return StructuredGrid(self.nx * k, self.ny * k, self.Lx, self.Ly, self.x0, self.y0)


@dataclass(frozen=True)
class RefinementParams:
    eps_vof: float = 1e-6
    W: int = 4
    L_max: int = 2

    def __post_init__(self):
        if not 0 < self.eps_vof < 0.5:
            raise ValueError("eps_vof must lie in (0, 0.5)")
        if self.W < 4:
            raise ValueError("band width W must be at least 4")
        if self.L_max < 0:
            raise ValueError("L_max must be nonnegative")


@dataclass
class RefinementMap:
    level: np.ndarray
    L_max: int
    W: int
    N: int
    remeshes: int = field(default=0)


def flag_refinement(f, params):
    """Boolean mask of cells that must sit on the finest level."""
    f = np.asarray(f, dtype=float)
    eps = params.eps_vof
    p1 = (f > eps) & (f < 1 - eps)
    jx = np.abs(np.diff(f, axis=0)) > eps
    jy = np.abs(np.diff(f, axis=1)) > eps
    p1[:-1, :] |= jx
    p1[1:, :] |= jx
    p1[:, :-1] |= jy
    p1[:, 1:] |= jy
    out = p1.copy()
    # vertex neighbors: dilate with a 3x3 block
    out[1:, :] |= p1[:-1, :]
    out[:-1, :] |= p1[1:, :]
    tmp = out.copy()
    out[:, 1:] |= tmp[:, :-1]
    out[:, :-1] |= tmp[:, 1:]
    return out


def remesh_interval(W, sigma):
    """Largest N >= 1 with N < (W - 2) / (2 sigma), else 1."""
    if sigma <= 0:
        raise ValueError("CFL number must be positive")
    if W < 4:
        raise ValueError("band width W must be at least 4")
    bound = (W - 2) / (2 * sigma)
    n = math.ceil(bound) - 1
    return max(n, 1)


def _block_any(a, k):
    n0, n1 = a.shape
    return a.reshape(n0 // k, k, n1 // k, k).any(axis=(1, 3))


def _expand(a, k):
    return np.repeat(np.repeat(a, k, axis=0), k, axis=1)


def leaf_levels(refined, L):
    level = np.zeros(tuple(2 * s for s in refined[L - 1].shape), dtype=np.int8)
    for lv in range(L):
        level += _expand(refined[lv], 2 ** (L - lv)).astype(np.int8)
    return level


def _balance_violations(level):
    dx = level[1:, :].astype(int) - level[:-1, :]
    dy = level[:, 1:].astype(int) - level[:, :-1]
    low = np.zeros(level.shape, dtype=bool)
    low[:-1, :] |= dx >= 2
    low[1:, :] |= dx <= -2
    low[:, :-1] |= dy >= 2
    low[:, 1:] |= dy <= -2
    return low


def build_levels(flags, L):
    """Leaf level per finest cell for the flagged set, 2:1 balanced."""
    flags = np.asarray(flags, dtype=bool)
    if L == 0:
        return np.zeros(flags.shape, dtype=np.int8)
    n0, n1 = flags.shape
    k = 2 ** L
    if n0 % k or n1 % k:
        raise ValueError("fine grid not divisible by the refinement factor")
    refined = [None] * L
    need = flags
    for lv in range(L - 1, -1, -1):
        need = _block_any(need, 2)
        refined[lv] = need
    while True:
        level = leaf_levels(refined, L)
        low = _balance_violations(level)
        if not low.any():
            return level
        for lv in range(L - 1):
            sel = low & (level == lv)
            if sel.any():
                refined[lv] = refined[lv] | _block_any(sel, 2 ** (L - lv))


def check_balance(level):
    return not _balance_violations(np.asarray(level)).any()


def interface_at_finest(f, level, L, eps):
    iface = (f > eps) & (f < 1 - eps)
    return bool(np.all(level[iface] == L))


def enforce_leaves(f, level, L):
    """Average the fine values inside every coarse leaf (in place).

    Uniform blocks are left untouched so repeated calls are bitwise no-ops.
    """
    if L > 0:
        _enforce_leaves(f, np.ascontiguousarray(level, dtype=np.int8), L)
    return f


@njit(cache=True)
def _enforce_leaves(f, level, L):
    n0, n1 = f.shape
    for lv in range(L):
        k = 2 ** (L - lv)
        for I in range(0, n0, k):
            for J in range(0, n1, k):
                if level[I, J] != lv:
                    continue
                v = f[I, J]
                uniform = True
                s = 0.0
                for a in range(I, I + k):
                    for b in range(J, J + k):
                        s += f[a, b]
                        if f[a, b] != v:
                            uniform = False
                if not uniform:
                    m = s / (k * k)
                    for a in range(I, I + k):
                        for b in range(J, J + k):
                            f[a, b] = m


def _prolong_leaf(f, fine_old, I0, J0, ko, level, L, eps):
    # geometric refinement of the old leaf whose fine block starts at (I0, J0)
    v = fine_old[I0, J0]
    if not eps < v < 1 - eps:
        return
    n0, n1 = f.shape
    s = np.empty((3, 3))
    for a in range(3):
        for b in range(3):
            i = I0 + (a - 1) * ko
            j = J0 + (b - 1) * ko
            # reflection across the wall gives the leaf itself
            if i < 0 or i >= n0:
                i = I0
            if j < 0 or j >= n1:
                j = J0
            s[a, b] = fine_old[i:i + ko, j:j + ko].mean()
    s[1, 1] = v
    nx, ny, d = elvira_kernel(s, v)
    for I in range(I0, I0 + ko):
        for J in range(J0, J0 + ko):
            kn = 2 ** (L - level[I, J])
            ia = I - (I - I0) % kn
            ja = J - (J - J0) % kn
            # new leaf center relative to the old leaf, in old-leaf units
            cx = (ia - I0 + 0.5 * kn) / ko - 0.5
            cy = (ja - J0 + 0.5 * kn) / ko - 0.5
            f[I, J] = frac_nd(nx, ny, (ko / kn) * (d - nx * cx - ny * cy))


def remesh(f, old_level, params):
    """Re-flag, rebuild the level map and transfer fractions.

    Refined leaves get child fractions from the parent's PLIC line; coarsened
    leaves get the conservative mean of their fine cells.
    """
    L = params.L_max
    flags = flag_refinement(f, params)
    new_level = build_levels(flags, L)
    out = f.copy()
    up = new_level > old_level
    if up.any():
        done = np.zeros(f.shape, dtype=bool)
        for I, J in zip(*np.nonzero(up)):
            if done[I, J]:
                continue
            ko = 2 ** (L - old_level[I, J])
            I0, J0 = I - I % ko, J - J % ko
            done[I0:I0 + ko, J0:J0 + ko] = True
            _prolong_leaf(out, f, I0, J0, ko, new_level, L, params.eps_vof)
    enforce_leaves(out, new_level, L)
    return out, new_level
