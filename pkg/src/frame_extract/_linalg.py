"""Shared dense linear-algebra helpers.

Conventions used throughout the package:

* a *system* of m vectors in R^n is stored rows-as-vectors, shape (m, n);
* the *synthesis matrix* of a system is its transpose, shape (n, m), so
  singular values of the synthesis matrix are the quantities certified
  everywhere else in the package;
* orthonormal bases of subspaces are stored columns-as-vectors.
"""

from __future__ import annotations

import numpy as np

# Relative rank cutoff for orthonormalization and rank tests.
RANK_RTOL = 1e-10


def as_matrix(vectors) -> np.ndarray:
    """Coerce a sequence of equal-length vectors to a float array, rows-as-vectors.

    A single vector becomes a 1-row matrix.  An empty sequence is rejected
    because no ambient dimension can be inferred from it.
    """
    arr = np.asarray(vectors, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-d array of vectors, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError("empty vector system")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector system contains non-finite entries")
    return arr


def singular_values(a: np.ndarray) -> np.ndarray:
    """Singular values of ``a`` in descending order."""
    return np.linalg.svd(a, compute_uv=False)


def sigma_max(a: np.ndarray) -> float:
    if a.size == 0:
        return 0.0
    return float(singular_values(a)[0])


def sigma_min(a: np.ndarray) -> float:
    """Smallest of the min(shape) singular values (0.0 for an empty matrix)."""
    if a.size == 0:
        return 0.0
    return float(singular_values(a)[-1])


def orthonormal_columns(a: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis of the column span of ``a``, columns-as-vectors.

    SVD-based so near-dependent columns are handled stably; the numerical
    rank is cut at ``rtol`` times the top singular value.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValueError("expected a matrix")
    if a.size == 0:
        return np.zeros((a.shape[0], 0))
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    if s.size == 0 or s[0] <= 0.0:
        return np.zeros((a.shape[0], 0))
    rank = int(np.count_nonzero(s > rtol * s[0]))
    return u[:, :rank]


def residuals(system: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Components of each row of ``system`` orthogonal to span(``basis``).

    ``basis`` must have orthonormal columns; shape (m, n) in, (m, n) out.
    """
    if basis.shape[1] == 0:
        return np.array(system, copy=True)
    return system - (system @ basis) @ basis.T


def residual_norms(system: np.ndarray, basis: np.ndarray) -> np.ndarray:
    return np.linalg.norm(residuals(system, basis), axis=1)


def numerical_rank(a: np.ndarray, rtol: float = RANK_RTOL) -> int:
    if a.size == 0:
        return 0
    s = singular_values(a)
    if s[0] <= 0.0:
        return 0
    return int(np.count_nonzero(s > rtol * s[0]))


def gram_submatrices(gram: np.ndarray, index_batch: np.ndarray) -> np.ndarray:
    """Stack of principal submatrices gram[idx, idx] for each row of indices.

    ``index_batch`` has shape (batch, k); the result has shape (batch, k, k).
    """
    return gram[index_batch[:, :, None], index_batch[:, None, :]]


def batched_sigma_max_from_gram(grams: np.ndarray) -> np.ndarray:
    """sqrt of the top eigenvalue of each stacked Gram matrix."""
    w = np.linalg.eigvalsh(grams)
    return np.sqrt(np.clip(w[..., -1], 0.0, None))


def batched_sigma_min_from_gram(grams: np.ndarray) -> np.ndarray:
    """sqrt of the bottom eigenvalue of each stacked Gram matrix."""
    w = np.linalg.eigvalsh(grams)
    return np.sqrt(np.clip(w[..., 0], 0.0, None))


def batched_operator_norm(mats: np.ndarray) -> np.ndarray:
    """Top singular value of each matrix in a stack (general square matrices)."""
    if mats.shape[-1] == 0:
        return np.zeros(mats.shape[:-2])
    return np.linalg.svd(mats, compute_uv=False)[..., 0]


def downdate_eigenvalues(eigvals: np.ndarray, coords: np.ndarray, level: int = -1) -> np.ndarray:
    """One eigenvalue of diag(w) - u u^T for each row u of ``coords``.

    ``eigvals`` is the ascending spectrum w of a symmetric matrix and each
    row of ``coords`` holds the coordinates of one subtracted vector in the
    eigenbasis.  ``level`` picks which eigenvalue (ascending index, default
    the largest; any value in 1..n-1).  The answer is the root of the
    characteristic equation 1 = sum_i u_i^2 / (w_i - mu) that interlacing
    confines to [w[level-1], w[level]].  A safeguarded Newton iteration
    (bisection fallback) resolves the root to machine precision, so results
    agree with eigvalsh on the assembled matrices up to roundoff while
    avoiding one dense eigensolve per row.
    """
    w = np.asarray(eigvals, dtype=float)
    usq = np.asarray(coords, dtype=float) ** 2
    n = w.size
    if usq.ndim != 2 or usq.shape[1] != n:
        raise ValueError("coords must have one column per eigenvalue")
    if n == 1:
        return w[0] - usq[:, 0]
    level = level % n
    if level < 1:
        raise ValueError("level 0 (bottom eigenvalue) has no finite bracket")
    rows = usq.shape[0]
    lo = np.full(rows, w[level - 1])
    hi = np.full(rows, w[level])
    mu = 0.5 * (lo + hi)
    # Signed stand-ins for exact pole hits: inside the bracket, gaps to
    # poles at or above ``level`` are nonnegative, the rest nonpositive.
    guard = np.full(n, -1e-300)
    guard[level:] = 1e-300
    done_width = 4.0 * np.finfo(float).eps * max(abs(w[level]), abs(w[level - 1]), 1e-300)
    stag = 2.0 * np.finfo(float).eps
    out = np.empty(rows)
    pos = np.arange(rows)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for _ in range(64):
            gaps = w[None, :] - mu[:, None]
            gaps = np.where(gaps == 0.0, guard[None, :], gaps)
            terms = usq / gaps
            f = 1.0 - terms.sum(axis=1)
            above = f > 0.0  # root lies to the right of mu
            lo = np.where(above, mu, lo)
            hi = np.where(above, hi, mu)
            slope = (terms / gaps).sum(axis=1)  # = -f'
            newton = mu + f / slope
            ok = np.isfinite(newton) & (newton > lo) & (newton < hi)
            new_mu = np.where(ok, newton, 0.5 * (lo + hi))
            # A candidate is resolved when its bracket has collapsed or the
            # Newton step stalled at roundoff (quadratic convergence means
            # a stalled accepted step sits on the root).
            conv = (hi - lo <= done_width) | (np.abs(new_mu - mu) <= stag * np.abs(new_mu))
            mu = new_mu
            if conv.any():
                out[pos[conv]] = np.clip(mu[conv], lo[conv], hi[conv])
                keep = ~conv
                if not keep.any():
                    return out
                pos, mu, lo, hi, usq = pos[keep], mu[keep], lo[keep], hi[keep], usq[keep]
    out[pos] = np.clip(mu, lo, hi)
    return out


def argmin_top_downdate(eigvals: np.ndarray, sq_coords: np.ndarray) -> int:
    """Row of ``sq_coords`` minimizing the top eigenvalue of diag(w) - u u^T.

    Same setting as :func:`downdate_eigenvalues` at the top level, but only
    the argmin over rows is wanted, so no root is solved per row.  Each
    row's secular function f_j(mu) = 1 - sum_i usq_ji / (w_i - mu) is
    strictly decreasing between the top two eigenvalues, so its sign at a
    shared probe separates rows with roots below the probe from those
    above.  Bisecting the shared bracket with one matrix-vector product
    per step narrows it to adjacent floats and returns the first row whose
    root lies in the final bracket.  Rows tied at working precision (all
    of them, when no row moves the top eigenvalue) resolve to the lowest
    index, matching the lexicographic tie policy.
    """
    w = np.asarray(eigvals, dtype=float)
    usq = np.asarray(sq_coords, dtype=float)
    lo = float(w[-2])
    hi = float(w[-1])
    win = None
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for _ in range(64):
            mu = 0.5 * (lo + hi)
            if mu <= lo or mu >= hi:
                break
            f = 1.0 - usq @ (1.0 / (w - mu))
            neg = f <= 0.0
            if neg.any():
                hi = mu
                win = neg
            else:
                lo = mu
    return 0 if win is None else int(np.argmax(win))
