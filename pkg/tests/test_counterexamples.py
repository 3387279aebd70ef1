"""Blocked frames without brackets and the small-partial-sum tight frame."""

from fractions import Fraction

import numpy as np
import pytest

from frame_extract.counterexamples import (
    basis_subfamily,
    block_layout,
    bracket_diagnostics,
    bracketless_frame,
    casazza_christensen_frame,
    cc_partial_sum_sq,
    completeness_check,
    either_or_basis,
    midpoint_bracket,
)
from frame_extract.frame_core import frame_bounds


def test_block_layout_exact_integers():
    lay = block_layout(4)
    assert lay.total_vectors == 10
    assert lay.ambient_dim == 7
    assert [list(b) for b in lay.blocks] == [[0], [1, 2], [3, 4, 5], [6, 7, 8, 9]]
    assert lay.anchors == (0, 0, 1, 3)
    assert [list(i) for i in lay.intervals] == [[0], [0, 1], [1, 2, 3], [3, 4, 5, 6]]
    assert lay.block_of(0) == 1
    assert lay.block_of(9) == 4
    with pytest.raises(ValueError):
        lay.block_of(10)
    with pytest.raises(ValueError):
        block_layout(1)
    # consecutive intervals share exactly their boundary coordinate
    for n in range(2, 5):
        prev, cur = lay.coord_interval(n - 1), lay.coord_interval(n)
        shared = set(prev) & set(cur)
        if n == 2:
            assert shared == {0}
        else:
            assert shared == {prev[-1]} == {cur[0]}


def test_embed_places_rows_on_the_interval():
    lay = block_layout(5)
    out = lay.embed(3, np.eye(3))
    assert out.shape == (3, lay.ambient_dim)
    start = lay.anchor(3)
    assert np.array_equal(out[:, start : start + 3], np.eye(3))
    assert np.count_nonzero(out[:, : start]) == 0
    assert np.count_nonzero(out[:, start + 3 :]) == 0
    with pytest.raises(ValueError):
        lay.embed(3, np.eye(4))


def test_either_or_basis_is_orthonormal():
    for n in (2, 3, 6, 11, 40):
        z = either_or_basis(n)
        assert z.shape == (n, n)
        assert np.max(np.abs(z @ z.T - np.eye(n))) < 1e-10
    with pytest.raises(ValueError):
        either_or_basis(1)


def test_either_or_basis_half_span_closeness():
    # at n = 100 the 4 / sqrt(n) bound is far from vacuous
    n = 100
    z = either_or_basis(n)
    bound = 4.0 / np.sqrt(n)
    e1, en = np.eye(n)[0], np.eye(n)[-1]
    for j0 in range(1, n + 1):
        if j0 < n / 2.0:
            rows = z[j0 - 1 :]  # 1-based j >= j0
            witness = e1
        else:
            rows = z[: j0 - 1]  # 1-based j < j0
            witness = en
        q, _ = np.linalg.qr(rows.T)
        dist = np.linalg.norm(witness - q @ (q.T @ witness))
        assert dist <= bound + 1e-9


def test_bracketless_frame_operator_is_exactly_diagonal():
    frame, lay = bracketless_frame(6)
    op = frame.frame_operator()
    diag = np.diag(op).copy()
    off = op - np.diag(diag)
    assert np.max(np.abs(off)) < 1e-12
    # anchors of intervals 3.. are the doubled coordinates; interval 2
    # shares coordinate 0 with interval 1
    doubled = sorted({0} | {lay.anchor(n) for n in range(3, 7)})
    for c in range(lay.ambient_dim):
        want = 2.0 if c in doubled else 1.0
        assert abs(diag[c] - want) < 1e-12
    assert len(doubled) == 5
    b = frame_bounds(frame)
    assert abs(b.lower - 1.0) < 1e-12
    assert abs(b.upper - 2.0) < 1e-12


def test_completeness_counts_and_rank():
    frame, lay = bracketless_frame(6)
    full = completeness_check(frame, lay, range(lay.total_vectors))
    assert full.complete
    assert full.rank == lay.ambient_dim
    assert full.block_counts == (1, 2, 3, 4, 5, 6)
    assert full.violations == ()

    # dropping 3 indices from one block always destroys completeness
    for n in range(3, 7):
        blk = list(lay.index_block(n))
        keep = [j for j in range(lay.total_vectors) if j not in set(blk[:3])]
        rep = completeness_check(frame, lay, keep)
        assert not rep.complete
        assert n in rep.violations

    with pytest.raises(ValueError):
        completeness_check(frame, lay, [lay.total_vectors])


def test_basis_subfamily_is_a_basis():
    for n_blocks in (4, 6, 12):
        frame, lay = bracketless_frame(n_blocks)
        sel = basis_subfamily(lay)
        assert len(sel) == lay.ambient_dim  # complete + right size = basis
        rep = completeness_check(frame, lay, sel)
        assert rep.complete
        assert rep.block_counts == tuple(
            n - (1 if n >= 2 else 0) for n in range(1, n_blocks + 1)
        )


def test_bracket_diagnostics_witness_close_to_both_sides():
    frame, lay = bracketless_frame(10)
    sel = basis_subfamily(lay)
    for n in (4, 7, 8):
        j0 = midpoint_bracket(lay, n)
        d = bracket_diagnostics(frame, lay, sel, n, j0)
        assert d.block == n
        assert d.bracket_point == j0
        assert d.witness_coord in (lay.anchor(n), lay.anchor(n + 1))
        bound = 4.0 / np.sqrt(n)
        assert d.dist_head <= bound + 1e-9
        assert d.dist_tail <= bound + 1e-9
        assert d.projection_norm_lb >= 1.0
        assert 0.0 <= d.min_principal_angle <= np.pi / 2.0
        assert np.isfinite(d.projection_norm_lb)


def test_full_family_cut_spans_intersect():
    # the full family is overcomplete: head and tail spans of a midpoint
    # cut share directions, so the oblique-projection bound degenerates;
    # this is exactly why diagnostics run over a basis subfamily
    frame, lay = bracketless_frame(8)
    d = bracket_diagnostics(frame, lay, range(lay.total_vectors), 4, midpoint_bracket(lay, 4))
    assert d.projection_norm_lb > 1e6


def test_bracket_diagnostics_validation():
    frame, lay = bracketless_frame(6)
    full = range(lay.total_vectors)
    with pytest.raises(ValueError):
        bracket_diagnostics(frame, lay, full, 1, 0)  # block out of range
    with pytest.raises(ValueError):
        bracket_diagnostics(frame, lay, full, 5, 0)  # 0 is not in block 5
    j0 = midpoint_bracket(lay, 4)
    blk4 = list(lay.index_block(4))
    gutted = [j for j in full if j not in set(blk4[:3])]
    with pytest.raises(ValueError):
        bracket_diagnostics(frame, lay, gutted, 4, j0)  # incomplete selection
    with pytest.raises(ValueError):
        bracket_diagnostics(frame, lay, range(j0, lay.total_vectors), 4, j0)  # empty head


def test_midpoint_bracket_indices():
    lay = block_layout(6)
    assert midpoint_bracket(lay, 4) == list(lay.index_block(4))[2]
    assert midpoint_bracket(lay, 5) == list(lay.index_block(5))[2]


def test_cc_frame_identity_operator_and_norm_floor():
    for n in (2, 5, 12, 30):
        f = casazza_christensen_frame(n)
        assert f.size == n + 1
        assert np.max(np.abs(f.frame_operator() - np.eye(n))) < 1e-12
        assert np.all(f.norms() >= 0.5)
    with pytest.raises(ValueError):
        casazza_christensen_frame(1)


def test_cc_partial_sums_match_closed_form():
    for n in (4, 9, 16):
        f = casazza_christensen_frame(n)
        for k in range(n + 1):
            s = f.vectors[:k].sum(axis=0)
            want = cc_partial_sum_sq(n, k)
            assert want == Fraction(k * (n - k), n)
            assert abs(float(s @ s) - float(want)) < 1e-12
    with pytest.raises(ValueError):
        cc_partial_sum_sq(4, 5)
    with pytest.raises(ValueError):
        cc_partial_sum_sq(4, -1)
