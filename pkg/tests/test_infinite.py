"""Streamed frames: greedy scan, stability, and tail certificates."""

import math

import numpy as np
import pytest

from frame_extract.infinite_frames import (
    FrameSequence,
    GreedySelection,
    greedy_subsequence,
    stability_check,
    tail_certificate,
    tail_index,
    theta,
)


def duplicated_basis_stream():
    rows = []
    for j in range(4):
        e = np.zeros(4)
        e[j] = 1.0
        rows.extend([e, e])
    return FrameSequence.from_vectors(rows)


def test_greedy_skips_repeats_frozen_indices():
    sel = greedy_subsequence(duplicated_basis_stream(), terms=4, scan_limit=100)
    assert sel.indices == (0, 2, 4, 6)
    assert sel.status == "complete"
    assert sel.scanned == 7
    assert sel.distances == (1.0, 1.0, 1.0, 1.0)
    assert np.array_equal(sel.vectors, np.eye(4))


def test_greedy_one_pass_stream_can_run_out():
    seq = FrameSequence.from_vectors([np.array([1.0, 0.0]), np.array([1.0, 0.0])])
    sel = greedy_subsequence(seq, terms=2, scan_limit=100)
    assert sel.status == "threshold_unattainable"
    assert sel.indices == (0,)
    assert sel.scanned == 2


def test_greedy_cyclic_stream_stops_at_scan_limit():
    seq = FrameSequence.from_vectors([np.eye(2)[0], np.eye(2)[1]], cyclic=True)
    sel = greedy_subsequence(seq, terms=3, scan_limit=50)
    assert sel.status == "threshold_unattainable"
    assert sel.indices == (0, 1)
    assert sel.scanned == 50


def test_greedy_skips_zero_vectors():
    seq = FrameSequence.from_vectors([np.zeros(3), np.eye(3)[0], np.zeros(3), np.eye(3)[1]])
    sel = greedy_subsequence(seq, terms=2, scan_limit=10)
    assert sel.indices == (1, 3)
    assert sel.status == "complete"


def test_greedy_pads_growing_dimensions():
    seq = FrameSequence.from_vectors([np.array([1.0]), np.array([0.0, 1.0]), np.array([0.0, 0.0, 1.0])])
    sel = greedy_subsequence(seq, terms=3, scan_limit=10)
    assert sel.indices == (0, 1, 2)
    assert sel.vectors.shape == (3, 3)
    assert np.array_equal(sel.vectors, np.eye(3))


def test_greedy_validation():
    seq = duplicated_basis_stream()
    with pytest.raises(ValueError):
        greedy_subsequence(seq, terms=0, scan_limit=10)
    with pytest.raises(ValueError):
        greedy_subsequence(seq, terms=2, scan_limit=0)
    with pytest.raises(ValueError):
        FrameSequence.from_vectors([])


def test_projected_basis_stream_keeps_thresholds_attainable():
    seq = FrameSequence.projected_basis(200, 40, seed=0)
    sel = greedy_subsequence(seq, terms=5, scan_limit=10000)
    assert sel.status == "complete"
    for pos, d in enumerate(sel.distances, start=1):
        assert d > 1.0 - 2.0 ** (-2 * pos)
    with pytest.raises(ValueError):
        FrameSequence.projected_basis(10, 6)
    with pytest.raises(ValueError):
        FrameSequence.projected_basis(10, 0)


def test_theta_measures_worst_distance():
    e = np.eye(3)
    assert abs(theta([e[0]], [e[1]]) - 1.0) < 1e-12
    assert theta([e[0]], [e[0], e[1]]) < 1e-12
    mixed = np.array([1.0, 1.0, 0.0]) / math.sqrt(2.0)
    assert abs(theta([mixed, e[2]], [e[0]]) - 1.0) < 1e-12
    # no basis vectors: the distance to the zero span is the norm itself
    assert abs(theta([e[0]], []) - 1.0) < 1e-12
    with pytest.raises(ValueError):
        theta([2.0 * e[0]], [e[1]])
    with pytest.raises(ValueError):
        theta([], [e[0]])


def make_selection(vectors, distances):
    arr = np.asarray(vectors, dtype=float)
    return GreedySelection(
        indices=tuple(range(arr.shape[0])),
        vectors=arr,
        distances=tuple(distances),
        status="complete",
        scanned=arr.shape[0],
        terms_requested=arr.shape[0],
    )


def test_stability_flags_large_inner_products():
    z2 = np.array([[1.0, 0.0], [0.3, math.sqrt(0.91)]])
    res = stability_check(make_selection(z2, (1.0, math.sqrt(0.91))))
    assert not res.ok
    assert res.violations == ((0, 1),)  # term 2 needs inner product < 2^-3
    assert res.violations_at_or_after(2) == ((0, 1),)
    assert res.violations_at_or_after(3) == ()
    assert abs(res.certificate.constant - math.sqrt(13.0 / 7.0)) < 1e-12


def test_stability_accepts_orthonormal_terms():
    res = stability_check(make_selection(np.eye(4), (1.0,) * 4))
    assert res.ok
    assert res.violations == ()
    assert abs(res.certificate.constant - 1.0) < 1e-12
    with pytest.raises(ValueError):
        stability_check(make_selection(np.zeros((0, 1)), ()))


def test_tail_certificate_bounds_and_validation():
    sel = make_selection(np.eye(4), (1.0,) * 4)
    assert abs(tail_certificate(sel, 0).constant - 1.0) < 1e-12
    assert abs(tail_certificate(sel, 3).constant - 1.0) < 1e-12
    with pytest.raises(ValueError):
        tail_certificate(sel, 4)
    with pytest.raises(ValueError):
        tail_certificate(sel, -1)


def test_tail_index_drops_exactly_the_bad_head():
    # third term at distance sqrt(3)/2: certificate factor exactly 3
    sel = make_selection(np.eye(3), (1.0, 1.0, math.sqrt(3.0) / 2.0))
    k0, prod = tail_index(sel, 0.9)  # bound 10 admits the whole selection
    assert k0 == 0
    assert abs(prod - 3.0) < 1e-12
    k0, prod = tail_index(sel, 0.5)  # bound 2 forces dropping all three
    assert (k0, prod) == (3, 1.0)
    with pytest.raises(ValueError):
        tail_index(sel, 0.0)


def test_greedy_selection_round_trips_through_dict():
    sel = greedy_subsequence(duplicated_basis_stream(), terms=3, scan_limit=100)
    back = GreedySelection.from_dict(sel.to_dict())
    assert back.indices == sel.indices
    assert back.distances == sel.distances
    assert back.status == sel.status
    assert back.scanned == sel.scanned
    assert back.terms_requested == sel.terms_requested
    assert np.array_equal(back.vectors, sel.vectors)
