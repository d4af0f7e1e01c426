import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vof2d.elvira import (SOURCES, candidate_slopes, column_row_sums, implied_fractions,
                          reconstruct_cell, reconstruct_field)
from vof2d.plic import InterfaceLine, clip_area_oracle


def block_from_line(n, c):
    """3x3 fractions of the half-plane n . x < c (x relative to the block center) by clipping."""
    s = np.empty((3, 3))
    for a in range(3):
        for b in range(3):
            # shift the line into the unit cell of (a, b)
            d = c - n[0] * (a - 1) - n[1] * (b - 1)
            s[a, b] = clip_area_oracle(InterfaceLine(n, d), (0, 0, 1, 1))
    return s


def test_sums_and_slopes():
    s = np.array([[0, 0, 0], [0.5, 0.5, 0.5], [1, 1, 1]], dtype=float)
    sums = column_row_sums(s)
    assert sums == (0.0, 1.5, 3.0, 1.5, 1.5, 1.5)
    slopes = candidate_slopes(sums)
    assert [c.source for c in slopes] == list(SOURCES)
    assert [c.value for c in slopes] == [1.5, 1.5, 1.5, 0.0, 0.0, 0.0]


def test_vertical_interface():
    # C1 on the right half of the middle column and everything right of it
    s = np.array([[0, 0, 0], [0.5, 0.5, 0.5], [1, 1, 1]], dtype=float)
    line = reconstruct_cell(s, 0.5)
    assert line.normal == pytest.approx((-1.0, 0.0), abs=1e-15)
    assert line.d == pytest.approx(0.0, abs=1e-15)


def test_saturated_center_rejected():
    with pytest.raises(ValueError):
        reconstruct_cell(np.ones((3, 3)), 1.0)


def test_exact_for_random_lines():
    rng = np.random.default_rng(3)
    checked = 0
    while checked < 300:
        n = (math.cos(t := rng.uniform(0, 2 * math.pi)), math.sin(t))
        s = block_from_line(n, rng.uniform(-0.4, 0.4))
        if not 1e-6 < s[1, 1] < 1 - 1e-6:
            continue
        line = reconstruct_cell(s, s[1, 1])
        assert np.max(np.abs(implied_fractions(line) - s)) <= 1e-12
        checked += 1


@given(st.floats(0, 2 * math.pi), st.floats(-0.45, 0.45))
def test_reconstruction_reproduces_center(theta, c):
    n = (math.cos(theta), math.sin(theta))
    s = block_from_line(n, c)
    if not 1e-6 < s[1, 1] < 1 - 1e-6:
        return
    line = reconstruct_cell(s, s[1, 1])
    assert abs(implied_fractions(line)[1, 1] - s[1, 1]) <= 1e-12


def test_field_reconstruction_marks_only_mixed_cells():
    f = np.zeros((6, 5))
    f[:, :2] = 1.0
    f[:, 2] = 0.3
    has, nrm, d = reconstruct_field(f)
    assert has[:, 2].all() and not has[:, [0, 1, 3, 4]].any()
    # flat layer, C1 below: normal points up
    assert np.allclose(nrm[has], [0.0, 1.0], atol=1e-15)


def test_reflection_at_walls():
    # a layer touching the wall is still reconstructed as flat in the corner cells
    f = np.zeros((4, 4))
    f[:, 0] = 1.0
    f[:, 1] = 0.25
    has, nrm, d = reconstruct_field(f)
    assert np.allclose(nrm[0, 1], [0.0, 1.0], atol=1e-15)
    assert np.allclose(nrm[3, 1], [0.0, 1.0], atol=1e-15)
