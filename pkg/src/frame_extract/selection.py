"""Subset selection with certified singular-value objectives.

Three classical selection principles are implemented, each in two modes:
an exact exhaustive search used automatically when the enumeration fits
under ``SelectionConfig.exhaustive_limit``, and a deterministic greedy
stand-in used beyond it.  Every returned selection carries the achieved
objective value, recomputed from scratch on the final subset so callers
can re-certify it independently.

* :func:`lunin_select` picks a fixed number of columns minimizing the top
  singular value of the chosen submatrix (norm-minimizing restriction).
* :func:`bt_select` grows a set of unit columns keeping the bottom
  singular value above a target (restricted invertibility).
* :func:`kt_select` shrinks the restriction of a norm-one, zero-diagonal
  matrix until its operator norm falls below c5 * sqrt(delta), keeping at
  least max(1, floor(delta * n / 4)) indices (norm-of-restriction decay).

All tie-breaks are lexicographic: enumeration is in lexicographic order
with strict improvement, and greedy steps take the lowest eligible index.
Results are therefore bit-reproducible across runs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ._linalg import (
    argmin_top_downdate,
    batched_operator_norm,
    batched_sigma_max_from_gram,
    batched_sigma_min_from_gram,
    gram_submatrices,
    as_matrix,
    sigma_max,
    sigma_min,
)

__all__ = [
    "SelectionConfig",
    "SubsetSelection",
    "lunin_select",
    "bt_select",
    "kt_select",
    "brute_force_subset_oracle",
]

_CHUNK = 4096


@dataclass(frozen=True)
class SelectionConfig:
    """Calibration constants and search limits shared by the selectors.

    c1    scale bound used by callers to judge norm-minimizing selections.
    c2    fraction of delta used as the invertibility target downstream.
    c5    multiplier in the kt stopping target c5 * sqrt(delta).
    exhaustive_limit    max number of candidate subsets an exact search may
                        enumerate before falling back to greedy.
    """

    c1: float = 2.0
    c2: float = 0.1
    c5: float = 2.0
    exhaustive_limit: int = 2_000_000

    def __post_init__(self):
        if self.c1 <= 0 or self.c2 <= 0 or self.c5 <= 0:
            raise ValueError("calibration constants must be positive")
        if self.exhaustive_limit < 1:
            raise ValueError("exhaustive_limit must be >= 1")


@dataclass(frozen=True)
class SubsetSelection:
    """Chosen indices (ascending), achieved objective, and how they were found.

    ``bound_met`` reports whether the selector's own stopping target was
    reached (None for selectors without one).  ``achieved_value`` is always
    recomputed from the final subset with a fresh decomposition.

    ``order`` is the in-process addition order for forward-greedy
    selections (None elsewhere); prefixes of it are themselves greedy
    selections, which lets callers shrink a selection without redoing the
    search.  It is deliberately left out of :meth:`to_dict`.
    """

    indices: tuple[int, ...]
    achieved_value: float
    method: str
    bound_met: bool | None = None
    order: tuple[int, ...] | None = None

    @property
    def size(self) -> int:
        return len(self.indices)

    def to_dict(self) -> dict:
        out = {
            "indices": list(self.indices),
            "achieved_value": self.achieved_value,
            "method": self.method,
        }
        if self.bound_met is not None:
            out["bound_met"] = self.bound_met
        return out


def _index_chunks(m: int, k: int, chunk: int = _CHUNK):
    """Size-k subsets of range(m) in lexicographic order, as index arrays."""
    combos = itertools.combinations(range(m), k)
    while True:
        block = list(itertools.islice(combos, chunk))
        if not block:
            return
        yield np.asarray(block, dtype=np.intp)


def _drop_one_index_rows(active: np.ndarray) -> np.ndarray:
    """Row c = active with position c removed; shape (s, s-1)."""
    s = active.size
    rows = np.empty((s, s - 1), dtype=np.intp)
    for c in range(s):
        rows[c, :c] = active[:c]
        rows[c, c:] = active[c + 1 :]
    return rows


def _scan_min(gram_or_mat: np.ndarray, m: int, k: int, value_fn) -> tuple[np.ndarray, float]:
    """Lexicographically-first minimizer of value_fn over all size-k subsets."""
    best_idx = None
    best_val = np.inf
    for batch in _index_chunks(m, k):
        vals = value_fn(gram_or_mat, batch)
        pos = int(np.argmin(vals))
        if vals[pos] < best_val:
            best_val = float(vals[pos])
            best_idx = batch[pos].copy()
    return best_idx, best_val


def _scan_max(gram: np.ndarray, m: int, k: int, value_fn) -> tuple[np.ndarray, float]:
    best_idx = None
    best_val = -np.inf
    for batch in _index_chunks(m, k):
        vals = value_fn(gram, batch)
        pos = int(np.argmax(vals))
        if vals[pos] > best_val:
            best_val = float(vals[pos])
            best_idx = batch[pos].copy()
    return best_idx, best_val


def _gram_sigma_max(gram: np.ndarray, batch: np.ndarray) -> np.ndarray:
    return batched_sigma_max_from_gram(gram_submatrices(gram, batch))


def _gram_sigma_min(gram: np.ndarray, batch: np.ndarray) -> np.ndarray:
    return batched_sigma_min_from_gram(gram_submatrices(gram, batch))


def _restricted_norms(mat: np.ndarray, batch: np.ndarray) -> np.ndarray:
    return batched_operator_norm(mat[batch[:, :, None], batch[:, None, :]])


def _backward_drop_choice(w: np.ndarray, u: np.ndarray) -> int:
    """Row whose removal minimizes the top eigenvalue of the operator.

    ``w`` is the ascending spectrum of the current operator and row j of
    ``u`` holds the eigenbasis coordinates of vector j.  Each removal root
    is bracketed between the top two eigenvalues; when that bracket has
    collapsed to a few ulp every removal ties at fp precision and the
    first row is dropped (the lexicographic tie policy).  Otherwise a
    shared bisection locates the smallest root and returns the first row
    attaining it within solver precision.
    """
    n = w.size
    tol = 4.0 * np.finfo(float).eps * max(abs(w[-1]), abs(w[0]), 1e-300)
    if n < 2 or w[-1] - w[-2] <= tol:
        return 0
    return argmin_top_downdate(w, u * u)


def lunin_select(columns, target_size: int, cfg: SelectionConfig | None = None) -> SubsetSelection:
    """Select ``target_size`` vectors minimizing the top singular value.

    Exhaustive (exact, lexicographic tie-break) when C(m, target_size) fits
    under the config limit; otherwise greedy backward elimination, removing
    at each round the vector whose removal leaves the smallest top singular
    value.  Every candidate value is recomputed from the freshly rebuilt
    frame operator each round; the per-candidate top eigenvalue comes from
    an exact rank-one downdate of its eigendecomposition, machine-precision
    equal to a dense eigensolve but an order of magnitude cheaper.
    """
    cfg = cfg or SelectionConfig()
    vecs = as_matrix(columns)
    m = vecs.shape[0]
    if not 1 <= target_size <= m:
        raise ValueError(f"target_size must be in [1, {m}], got {target_size}")

    if math.comb(m, target_size) <= cfg.exhaustive_limit:
        gram = vecs @ vecs.T
        gram = (gram + gram.T) / 2.0
        best_idx, _ = _scan_min(gram, m, target_size, _gram_sigma_max)
        idx = tuple(int(i) for i in best_idx)
        return SubsetSelection(idx, sigma_max(vecs[list(idx)].T), "exhaustive")

    active = np.arange(m, dtype=np.intp)
    while active.size > target_size:
        cand = vecs[active]
        op = cand.T @ cand  # frame operator rebuilt fresh each round
        if op.shape[0] == 1:
            drop = int(np.argmin(op[0, 0] - cand[:, 0] ** 2))
        else:
            w, v = np.linalg.eigh(op)
            drop = _backward_drop_choice(w, cand @ v)
        active = np.delete(active, drop)
    idx = tuple(int(i) for i in active)
    return SubsetSelection(idx, sigma_max(vecs[list(idx)].T), "greedy")


def bt_select(columns, min_sv_target: float, cfg: SelectionConfig | None = None) -> SubsetSelection:
    """Select unit vectors whose restriction stays well-invertible.

    Finds a subset whose bottom singular value is at least
    ``min_sv_target``.  When 2^m - 1 candidate subsets fit under the config
    limit the maximum-cardinality feasible subset is found exactly
    (scanning cardinalities downward, lexicographically-first feasible).
    Otherwise the subset is grown greedily, adding at each round the vector
    that maximizes the resulting bottom singular value, until no candidate
    keeps it at or above the target.  An empty selection (achieved 0.0)
    means even a single vector misses the target.
    """
    cfg = cfg or SelectionConfig()
    vecs = as_matrix(columns)
    m = vecs.shape[0]
    if min_sv_target <= 0:
        raise ValueError("min_sv_target must be positive")
    norms = np.linalg.norm(vecs, axis=1)
    if np.max(np.abs(norms - 1.0)) > 1e-8:
        raise ValueError("bt_select requires unit-norm vectors (within 1e-8)")

    gram = vecs @ vecs.T
    gram = (gram + gram.T) / 2.0

    if m < 63 and 2**m - 1 <= cfg.exhaustive_limit:
        for k in range(m, 0, -1):
            found = None
            for batch in _index_chunks(m, k):
                vals = _gram_sigma_min(gram, batch)
                hits = np.flatnonzero(vals >= min_sv_target)
                if hits.size:
                    found = batch[hits[0]]
                    break
            if found is not None:
                idx = tuple(int(i) for i in found)
                return SubsetSelection(
                    idx, sigma_min(vecs[list(idx)].T), "exhaustive", bound_met=True
                )
        return SubsetSelection((), 0.0, "exhaustive", bound_met=False)

    selected: list[int] = []
    while True:
        cand = np.array([j for j in range(m) if j not in set(selected)], dtype=np.intp)
        if cand.size == 0:
            break
        t = len(selected)
        stack = np.empty((cand.size, t + 1, t + 1))
        if t:
            sel = np.asarray(selected, dtype=np.intp)
            stack[:, :t, :t] = gram[np.ix_(sel, sel)][None, :, :]
            border = gram[np.ix_(sel, cand)]  # (t, candidates)
            stack[:, :t, t] = border.T
            stack[:, t, :t] = border.T
        stack[:, t, t] = gram[cand, cand]
        vals = batched_sigma_min_from_gram(stack)
        pos = int(np.argmax(vals))  # first maximum: lowest candidate index
        if vals[pos] < min_sv_target:
            break
        selected.append(int(cand[pos]))
    if not selected:
        return SubsetSelection((), 0.0, "greedy", bound_met=False)
    achieved = sigma_min(vecs[sorted(selected)].T)
    return SubsetSelection(
        tuple(sorted(selected)),
        achieved,
        "greedy",
        bound_met=True,
        order=tuple(selected),
    )


def kt_select(
    t,
    delta: float,
    cfg: SelectionConfig | None = None,
    norm_target: float | None = None,
) -> SubsetSelection:
    """Shrink the restriction norm of a zero-diagonal, norm-one matrix.

    Returns indices sigma with ||T restricted to sigma|| at or below the
    stopping target (``norm_target``, default c5 * sqrt(delta)) whenever
    that is reachable without going below the cardinality floor
    max(1, floor(delta * n / 4)); ``bound_met`` records whether the target
    was actually reached.  Exhaustive mode returns the largest cardinality
    whose best restriction meets the target (minimum-norm subset at that
    cardinality, lexicographic tie-break), falling back to the minimum-norm
    subset at the floor.
    """
    cfg = cfg or SelectionConfig()
    mat = np.asarray(t, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("t must be a square matrix")
    n = mat.shape[0]
    if n < 1:
        raise ValueError("t must be at least 1 x 1")
    if not np.all(np.isfinite(mat)):
        raise ValueError("t contains non-finite entries")
    if np.max(np.abs(np.diag(mat))) > 1e-12:
        raise ValueError("t must have zero diagonal (within 1e-12)")
    if not (1.0 / n <= delta < 1.0):
        raise ValueError(f"delta must lie in [1/n, 1), got {delta}")

    total_norm = sigma_max(mat)
    if norm_target is None:
        norm_target = cfg.c5 * math.sqrt(delta)
    s_min = max(1, int(math.floor(delta * n / 4.0 + 1e-12)))

    if total_norm == 0.0:
        return SubsetSelection(tuple(range(n)), 0.0, "exhaustive", bound_met=True)
    if abs(total_norm - 1.0) > 1e-6:
        raise ValueError(
            f"t must have operator norm 1 (within 1e-6), got {total_norm:.8g}; "
            "normalize before calling"
        )

    if n < 63 and 2**n - 1 <= cfg.exhaustive_limit:
        floor_best: tuple[np.ndarray, float] | None = None
        for k in range(n, s_min - 1, -1):
            best_idx, best_val = _scan_min(mat, n, k, _restricted_norms)
            if best_val <= norm_target:
                idx = tuple(int(i) for i in best_idx)
                achieved = sigma_max(mat[np.ix_(idx, idx)])
                return SubsetSelection(idx, achieved, "exhaustive", bound_met=True)
            floor_best = (best_idx, best_val)
        idx = tuple(int(i) for i in floor_best[0])
        achieved = sigma_max(mat[np.ix_(idx, idx)])
        return SubsetSelection(idx, achieved, "exhaustive", bound_met=False)

    active = np.arange(n, dtype=np.intp)
    current = total_norm
    while current > norm_target and active.size > s_min:
        rows = _drop_one_index_rows(active)
        vals = _restricted_norms(mat, rows)
        pos = int(np.argmin(vals))  # first minimum: lowest active index
        current = float(vals[pos])
        active = np.delete(active, pos)
    idx = tuple(int(i) for i in active)
    achieved = sigma_max(mat[np.ix_(idx, idx)])
    return SubsetSelection(idx, achieved, "greedy", bound_met=achieved <= norm_target + 1e-12)


def brute_force_subset_oracle(
    data,
    size: int,
    objective: str,
    cfg: SelectionConfig | None = None,
) -> SubsetSelection:
    """Exact optimum over all size-``size`` subsets, for cross-checking.

    ``objective`` is one of ``min_sigma_max`` / ``max_sigma_min`` (``data``
    is then a system of vectors, rows-as-vectors) or
    ``min_restricted_norm`` (``data`` is a square matrix and principal
    submatrices are compared).  Raises when the enumeration would exceed
    the config limit; this is an oracle, not a fallback.
    """
    cfg = cfg or SelectionConfig()
    if objective not in ("min_sigma_max", "max_sigma_min", "min_restricted_norm"):
        raise ValueError(f"unknown objective {objective!r}")

    if objective == "min_restricted_norm":
        mat = np.asarray(data, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("min_restricted_norm needs a square matrix")
        m = mat.shape[0]
    else:
        vecs = as_matrix(data)
        m = vecs.shape[0]
    if not 1 <= size <= m:
        raise ValueError(f"size must be in [1, {m}], got {size}")
    count = math.comb(m, size)
    if count > cfg.exhaustive_limit:
        raise ValueError(
            f"{count} subsets exceed exhaustive_limit={cfg.exhaustive_limit}"
        )

    if objective == "min_restricted_norm":
        best_idx, _ = _scan_min(mat, m, size, _restricted_norms)
        idx = tuple(int(i) for i in best_idx)
        return SubsetSelection(idx, sigma_max(mat[np.ix_(idx, idx)]), "exhaustive")

    gram = vecs @ vecs.T
    gram = (gram + gram.T) / 2.0
    if objective == "min_sigma_max":
        best_idx, _ = _scan_min(gram, m, size, _gram_sigma_max)
        idx = tuple(int(i) for i in best_idx)
        return SubsetSelection(idx, sigma_max(vecs[list(idx)].T), "exhaustive")
    best_idx, _ = _scan_max(gram, m, size, _gram_sigma_min)
    idx = tuple(int(i) for i in best_idx)
    # bottom singular value of the synthesis map R^size -> R^n: a subset
    # larger than the dimension is dependent and scores 0 outright
    sub = vecs[list(idx)]
    achieved = 0.0 if sub.shape[0] > sub.shape[1] else sigma_min(sub.T)
    return SubsetSelection(idx, achieved, "exhaustive")
