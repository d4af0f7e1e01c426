"""Run diagnostics, convergence tables and plain-text output."""
import csv
import math
import os
from dataclasses import asdict, dataclass, fields

import numpy as np
from scipy import ndimage

from .elvira import reconstruct_field

FIELDS_HEADER = ("x", "y", "f", "T", "level")


def l1_error(f, f_exact, cell_volume):
    f, f_exact = np.asarray(f), np.asarray(f_exact)
    if f.shape != f_exact.shape:
        raise ValueError(f"grid mismatch: {f.shape} vs {f_exact.shape}")
    return float(np.sum(np.abs(f - f_exact))) * cell_volume


def convergence_table(hs, errors):
    """Rows ``(h, error, rate)``; the first rate is ``None``.

    A pair of zero errors has rate ``"exact"``; a zero following a nonzero
    error gives ``inf``.
    """
    rows = []
    for i, (h, e) in enumerate(zip(hs, errors)):
        rate = None
        if i > 0:
            h0, e0 = hs[i - 1], errors[i - 1]
            if e0 == 0 and e == 0:
                rate = "exact"
            elif e == 0:
                rate = math.inf
            elif e0 == 0:
                rate = -math.inf
            else:
                rate = math.log(e0 / e) / math.log(h0 / h)
        rows.append((h, e, rate))
    return rows


def interface_segments(f, grid, eps=1e-6):
    """PLIC segments ``(x1, y1, x2, y2)`` of every mixed cell, physical units."""
    has, nrm, d = reconstruct_field(f, eps)
    X, Y = grid.centers()
    h = grid.h
    segs = []
    for i, j in zip(*np.nonzero(has)):
        nx, ny = nrm[i, j]
        dd = d[i, j]
        pts = []
        for s in (-0.5, 0.5):
            if ny != 0:
                y = (dd - nx * s) / ny
                if -0.5 <= y <= 0.5:
                    pts.append((s, y))
            if nx != 0:
                x = (dd - ny * s) / nx
                if -0.5 <= x <= 0.5:
                    pts.append((x, s))
        if len(pts) < 2:
            continue
        # extreme points along the tangent
        t = [p[0] * -ny + p[1] * nx for p in pts]
        a, b = pts[int(np.argmin(t))], pts[int(np.argmax(t))]
        segs.append((X[i, j] + a[0] * h, Y[i, j] + a[1] * h, X[i, j] + b[0] * h, Y[i, j] + b[1] * h))
    return np.array(segs, dtype=float).reshape(-1, 4)


def interface_extent(f, grid, eps=1e-6):
    """``(y_min, y_max)`` over all interface segment endpoints."""
    segs = interface_segments(f, grid, eps)
    if len(segs) == 0:
        return (math.nan, math.nan)
    ys = np.concatenate([segs[:, 1], segs[:, 3]])
    return float(ys.min()), float(ys.max())


def centroid(f, grid, weight=None):
    """Centroid of the C1 region (or of ``weight`` if given)."""
    w = np.asarray(f if weight is None else weight, dtype=float)
    X, Y = grid.centers()
    m = w.sum()
    if m == 0:
        return (math.nan, math.nan)
    return float((w * X).sum() / m), float((w * Y).sum() / m)


def component_count(mask):
    """Number of 4-connected components of a boolean mask."""
    _, n = ndimage.label(np.asarray(mask, dtype=bool))
    return int(n)


def sign_runs(values, tol=0.0):
    """Number of same-sign runs in a 1-D sequence, ignoring ``|v| <= tol``."""
    signs = [1 if v > 0 else -1 for v in values if abs(v) > tol]
    if not signs:
        return 0
    return 1 + sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def convection_cells(flow, grid, rel_tol=1e-3):
    """Count convection cells from sign changes of v along mid-height.

    Neighbouring cells share a rising or sinking limb, so ``n`` cells side by
    side give ``n + 1`` runs of one sign, i.e. ``n`` sign changes.
    """
    v = flow.v[:, grid.ny // 2]
    tol = rel_tol * float(np.max(np.abs(v))) if v.size else 0.0
    return max(sign_runs(v, tol) - 1, 0)


@dataclass
class DiagnosticsRecord:
    time: float
    step: int
    total_c1: float
    min_f: float
    max_f: float
    max_u: float
    nusselt: float
    interface_cells: int
    l1_error: object = ""
    c1_inflow: float = 0.0
    amr_ok: int = 1


def record_names():
    return [f.name for f in fields(DiagnosticsRecord)]


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


class DiagnosticsWriter:
    """Append-only CSV of per-step records; floats are written round-trip exact."""

    def __init__(self, path):
        self.path = path
        self._fh = open(path, "w", newline="")
        self._w = csv.writer(self._fh, lineterminator="\n")
        self._w.writerow(record_names())

    def write(self, rec):
        if isinstance(rec, dict):
            rec = DiagnosticsRecord(**rec)
        self._w.writerow([_fmt(v) for v in asdict(rec).values()])

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_diagnostics(path):
    """Rows of a diagnostics CSV as dicts of floats (ints for ``step``)."""
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rec = {}
            for k, v in row.items():
                if v == "":
                    rec[k] = None
                elif k in ("step", "interface_cells", "amr_ok"):
                    rec[k] = int(v)
                else:
                    rec[k] = float(v)
            out.append(rec)
    return out


def write_pgm(path, a, lo=0.0, hi=1.0):
    """Binary greyscale image, row 0 at the top (y increasing upward)."""
    a = np.asarray(a, dtype=float)
    span = hi - lo if hi > lo else 1.0
    img = np.clip((a - lo) / span, 0.0, 1.0)
    img = np.round(255 * img).astype(np.uint8).T[::-1]
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (img.shape[1], img.shape[0]))
        fh.write(img.tobytes())


def write_snapshot(out_dir, tag, sim):
    """Fields CSV, interface polyline and a greyscale image of ``f``."""
    os.makedirs(out_dir, exist_ok=True)
    st = sim.state
    vg = sim.vgrid
    X, Y = vg.centers()
    k = sim.k
    T = st.T.T if st.T is not None else None
    Tf = np.repeat(np.repeat(T, k, axis=0), k, axis=1) if T is not None else np.full(X.shape, np.nan)
    lev = st.level if st.level is not None else np.zeros(X.shape, dtype=int)
    paths = {}
    p = os.path.join(out_dir, f"fields_{tag}.csv")
    data = np.column_stack([X.ravel(), Y.ravel(), st.f.ravel(), Tf.ravel(), lev.ravel()])
    np.savetxt(p, data, fmt=["%.17g", "%.17g", "%.17g", "%.17g", "%d"], delimiter=",",
               header=",".join(FIELDS_HEADER), comments="")
    paths["fields"] = p
    p = os.path.join(out_dir, f"interface_{tag}.csv")
    np.savetxt(p, interface_segments(st.f, vg, sim.eps), fmt="%.17g", delimiter=",",
               header="x1,y1,x2,y2", comments="")
    paths["interface"] = p
    p = os.path.join(out_dir, f"f_{tag}.pgm")
    write_pgm(p, st.f)
    paths["image"] = p
    if T is not None:
        p = os.path.join(out_dir, f"T_{tag}.pgm")
        write_pgm(p, st.T.T)
        paths["image_T"] = p
    return paths


def read_fields(path):
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
