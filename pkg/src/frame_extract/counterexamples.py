"""Structured frames that defeat bracketed-basis and subsequence extraction.

Two constructions:

* :func:`bracketless_frame` builds a frame out of blocks of rotated
  orthonormal bases placed on overlapping coordinate intervals.  Every
  complete subfamily must take nearly all of every block, yet cutting the
  family anywhere inside a large block leaves a witness coordinate vector
  close to both halves, so the oblique projections associated with any
  bracket points blow up like sqrt(n).  :func:`bracket_diagnostics`
  measures that blow-up.

* :func:`casazza_christensen_frame` is a tight frame of nearly-equal-norm
  vectors whose first n elements sum to something small; subfamilies that
  drop only the last element become badly conditioned as n grows.

Indices and coordinates are 0-based throughout the public API; block
numbers n keep their natural 1-based meaning (block n has n vectors).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._linalg import numerical_rank, orthonormal_columns, singular_values
from .frame_core import Frame

__all__ = [
    "BlockLayout",
    "CompletenessReport",
    "BracketDiagnostics",
    "block_layout",
    "either_or_basis",
    "bracketless_frame",
    "basis_subfamily",
    "completeness_check",
    "bracket_diagnostics",
    "midpoint_bracket",
    "casazza_christensen_frame",
    "cc_partial_sum_sq",
]


@dataclass(frozen=True)
class BlockLayout:
    """Index blocks and coordinate intervals of the blocked frame.

    Block n (1-based, n = 1..n_blocks) owns the vector indices
    ``blocks[n-1]`` (0-based, consecutive, |block n| = n) and the
    coordinate interval ``intervals[n-1]`` (0-based, |interval| = n).
    Consecutive intervals overlap in exactly one coordinate: the first
    coordinate ``anchors[n-1]`` of interval n equals the last coordinate
    of interval n-1 (for n >= 3; intervals 1 and 2 both start at 0).
    """

    n_blocks: int
    blocks: tuple[range, ...]
    intervals: tuple[range, ...]
    anchors: tuple[int, ...]
    ambient_dim: int

    @property
    def total_vectors(self) -> int:
        return self.n_blocks * (self.n_blocks + 1) // 2

    def index_block(self, n: int) -> range:
        """0-based vector indices of block n (1-based n)."""
        return self.blocks[n - 1]

    def coord_interval(self, n: int) -> range:
        """0-based coordinates of interval n (1-based n)."""
        return self.intervals[n - 1]

    def anchor(self, n: int) -> int:
        """0-based first coordinate of interval n."""
        return self.anchors[n - 1]

    def block_of(self, index: int) -> int:
        """1-based block number owning global vector index ``index``."""
        for n, blk in enumerate(self.blocks, start=1):
            if index in blk:
                return n
        raise ValueError(f"index {index} outside the layout")

    def embed(self, n: int, vectors: np.ndarray) -> np.ndarray:
        """Place rows-as-vectors of length n onto interval n (shift embedding)."""
        vecs = np.atleast_2d(np.asarray(vectors, dtype=float))
        if vecs.shape[1] != n:
            raise ValueError(f"expected vectors of length {n}")
        out = np.zeros((vecs.shape[0], self.ambient_dim))
        start = self.anchor(n)
        out[:, start : start + n] = vecs
        return out


def block_layout(n_blocks: int) -> BlockLayout:
    """Exact integer layout: blocks partition the indices, intervals chain.

    Interval n starts at coordinate (n-2)(n-1)/2 for n >= 2 (0-based) and
    interval 1 coincides with the start of interval 2, so each interval
    shares exactly its first coordinate with the previous one.
    """
    if n_blocks < 2:
        raise ValueError("need at least 2 blocks")
    blocks = []
    start = 0
    for n in range(1, n_blocks + 1):
        blocks.append(range(start, start + n))
        start += n
    anchors = [0]
    for n in range(2, n_blocks + 1):
        anchors.append((n - 2) * (n - 1) // 2)
    intervals = [range(a, a + n) for n, a in enumerate(anchors, start=1)]
    ambient = intervals[-1][-1] + 1
    return BlockLayout(
        n_blocks=n_blocks,
        blocks=tuple(blocks),
        intervals=tuple(intervals),
        anchors=tuple(anchors),
        ambient_dim=ambient,
    )


def _half_indicators(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Unit vectors uniform on the last and first ceil(n/2) coordinates."""
    half = (n + 1) // 2
    v = np.zeros(n)
    v[n - half :] = 1.0 / np.sqrt(half)
    w = np.zeros(n)
    w[:half] = 1.0 / np.sqrt(half)
    return v, w


def either_or_basis(n: int) -> np.ndarray:
    """Orthonormal vectors z_1..z_n of R^n with two engineered closeness facts.

    The basis is U e_j for an orthogonal U sending the last-half indicator
    v to e_1 and (the part of) the first-half indicator w (orthogonal to
    v) to e_n.  Consequences, verified exhaustively in the test suite for
    every index set J missing at most two elements (1-based j below):

    * dist(e_1, span{z_j : j in J, j >= j0}) <= 4 / sqrt(n) for j0 < n/2;
    * dist(e_n, span{z_j : j in J, j < j0}) <= 4 / sqrt(n) for j0 >= n/2.

    So no matter where the family is cut, one coordinate direction is
    nearly captured by the far half.  Rows are returned z_j = row j.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    v, w = _half_indicators(n)
    candidates = [v, w] + [np.eye(n)[j] for j in range(n)]
    rows: list[np.ndarray] = []
    for cand in candidates:
        resid = cand.copy()
        for q in rows:
            resid -= np.dot(q, resid) * q
        # re-orthogonalize once; plain Gram-Schmidt drifts at this length
        for q in rows:
            resid -= np.dot(q, resid) * q
        norm = np.linalg.norm(resid)
        if norm > 1e-10:
            rows.append(resid / norm)
        if len(rows) == n:
            break
    if len(rows) != n:
        raise RuntimeError("internal error: completion did not reach full rank")
    # U maps v to e_1 and the orthonormalized w to e_n
    u = np.vstack([rows[0]] + rows[2:] + [rows[1]])
    return u.T  # row j is z_j = U e_j


def bracketless_frame(n_blocks: int) -> tuple[Frame, BlockLayout]:
    """Assemble the blocked frame: block n is either_or_basis(n) on interval n.

    The per-block images are orthonormal inside their own interval, so the
    frame operator is exactly diagonal with entries 1 (plain coordinates)
    and 2 (the n_blocks - 1 shared coordinates); frame bounds are (1, 2).
    """
    layout = block_layout(n_blocks)
    vectors = np.zeros((layout.total_vectors, layout.ambient_dim))
    for n in range(1, n_blocks + 1):
        z = np.array([[1.0]]) if n == 1 else either_or_basis(n)
        vectors[list(layout.index_block(n))] = layout.embed(n, z)
    return Frame(dim=layout.ambient_dim, vectors=vectors), layout


def basis_subfamily(layout: BlockLayout) -> tuple[int, ...]:
    """Canonical basis-sized subfamily: drop the last index of each block n >= 2.

    The blocked frame is overcomplete by exactly n_blocks - 1 vectors, so
    any subfamily that is both complete and minimal has this size.  With
    the full family, the spans on either side of any cut intersect and
    every oblique-projection bound degenerates to infinity; bracket
    diagnostics are therefore taken over a basis, where head and tail
    spans are complementary.  This particular choice keeps n - 1 >= n - 2
    indices in every block and is verified complete (hence a basis) by
    :func:`completeness_check` wherever it is consumed.
    """
    drop = {layout.index_block(n)[-1] for n in range(2, layout.n_blocks + 1)}
    return tuple(j for j in range(layout.total_vectors) if j not in drop)


@dataclass(frozen=True)
class CompletenessReport:
    """Span test of a subfamily plus per-block bookkeeping.

    ``complete`` is the rank test; ``block_counts[n-1]`` = how many
    indices of block n were selected; ``violations`` lists blocks keeping
    fewer than n - 2 of their n indices, which already forces
    incompleteness.
    """

    complete: bool
    rank: int
    ambient_dim: int
    block_counts: tuple[int, ...]
    violations: tuple[int, ...]


def completeness_check(frame: Frame, layout: BlockLayout, selected) -> CompletenessReport:
    """Do the selected vectors span the ambient space?  (rank test, rtol 1e-10)"""
    sel = sorted(set(int(j) for j in selected))
    if sel and (sel[0] < 0 or sel[-1] >= layout.total_vectors):
        raise ValueError("selected indices outside the layout")
    counts = []
    violations = []
    chosen = set(sel)
    for n in range(1, layout.n_blocks + 1):
        count = sum(1 for j in layout.index_block(n) if j in chosen)
        counts.append(count)
        if count < n - 2:
            violations.append(n)
    rank = numerical_rank(frame.vectors[sel].T) if sel else 0
    return CompletenessReport(
        complete=rank == layout.ambient_dim,
        rank=rank,
        ambient_dim=layout.ambient_dim,
        block_counts=tuple(counts),
        violations=tuple(violations),
    )


@dataclass(frozen=True)
class BracketDiagnostics:
    """How badly a cut at ``bracket_point`` fails to split the family.

    The witness coordinate vector is close to both the span F of the
    selected vectors before the cut (``dist_head``) and the span E from
    the cut on (``dist_tail``).  ``projection_norm_lb`` = 1 / sin of the
    smallest principal angle between E and F, a lower bound for the norm
    of the projection onto E along F.
    """

    block: int
    bracket_point: int
    witness_coord: int
    dist_head: float
    dist_tail: float
    min_principal_angle: float
    projection_norm_lb: float

    def to_dict(self) -> dict:
        return {
            "block": self.block,
            "bracket_point": self.bracket_point,
            "witness_coord": self.witness_coord,
            "dist_head": self.dist_head,
            "dist_tail": self.dist_tail,
            "min_principal_angle": self.min_principal_angle,
            "projection_norm_lb": self.projection_norm_lb,
        }


def midpoint_bracket(layout: BlockLayout, n: int) -> int:
    """Global 0-based index of the middle element of block n."""
    blk = layout.index_block(n)
    return blk[len(blk) // 2]


def bracket_diagnostics(
    frame: Frame,
    layout: BlockLayout,
    selected,
    n: int,
    j0: int,
) -> BracketDiagnostics:
    """Witness distances and principal angle for a cut at ``j0`` inside block n.

    Requires a complete selection, 2 <= n <= n_blocks - 2 (both adjacent
    blocks must exist inside the truncation), and j0 in block n with
    selected vectors on both sides of the cut.  The witness is the anchor
    coordinate of interval n when the cut sits in the first half of the
    block, else the anchor of interval n + 1.
    """
    if not 2 <= n <= layout.n_blocks - 2:
        raise ValueError(f"block must satisfy 2 <= n <= {layout.n_blocks - 2}, got {n}")
    blk = layout.index_block(n)
    if j0 not in blk:
        raise ValueError(f"bracket point {j0} is not in block {n}")
    report = completeness_check(frame, layout, selected)
    if not report.complete:
        raise ValueError("diagnostics require a complete selection")
    sel = sorted(set(int(j) for j in selected))
    head = [j for j in sel if j < j0]
    tail = [j for j in sel if j >= j0]
    if not head or not tail:
        raise ValueError("bracket point leaves an empty side")

    position = (j0 - blk[0]) + 1  # 1-based position inside the block
    witness_coord = layout.anchor(n) if position < n / 2.0 else layout.anchor(n + 1)
    e_w = np.zeros(layout.ambient_dim)
    e_w[witness_coord] = 1.0

    q_head = orthonormal_columns(frame.vectors[head].T)
    q_tail = orthonormal_columns(frame.vectors[tail].T)
    dist_head = float(np.linalg.norm(e_w - q_head @ (q_head.T @ e_w)))
    dist_tail = float(np.linalg.norm(e_w - q_tail @ (q_tail.T @ e_w)))

    cross = q_tail.T @ q_head
    top = float(singular_values(cross)[0]) if cross.size else 0.0
    cos_angle = min(max(top, 0.0), 1.0)
    angle = float(np.arccos(cos_angle))
    sin_angle = float(np.sqrt(max(1.0 - cos_angle * cos_angle, 0.0)))
    lb = float("inf") if sin_angle == 0.0 else 1.0 / sin_angle
    return BracketDiagnostics(
        block=n,
        bracket_point=j0,
        witness_coord=witness_coord,
        dist_head=dist_head,
        dist_tail=dist_tail,
        min_principal_angle=angle,
        projection_norm_lb=lb,
    )


def casazza_christensen_frame(n: int) -> Frame:
    """Tight frame of n + 1 vectors in R^n with a tiny leading partial sum.

    x_j = e_j - (1/n) sum_i e_i for j < n+1 and x_last = n^(-1/2) sum_i e_i.
    The frame operator is exactly the identity, every norm is at least
    1/2, yet the sum of the first k vectors has squared norm k (n - k) / n
    (see :func:`cc_partial_sum_sq`), so the family minus its last element
    degrades as n grows.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    ones = np.ones((n, n)) / n
    vectors = np.vstack([np.eye(n) - ones, np.ones((1, n)) / np.sqrt(n)])
    return Frame(dim=n, vectors=vectors)


def cc_partial_sum_sq(n: int, k: int) -> Fraction:
    """Exact squared norm k (n - k) / n of the sum of the first k vectors."""
    if not 0 <= k <= n:
        raise ValueError(f"k must lie in [0, {n}], got {k}")
    return Fraction(k * (n - k), n)
