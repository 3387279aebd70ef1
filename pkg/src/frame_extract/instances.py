"""Seeded random test instances.

All generators use numpy's default PCG64 bit generator seeded explicitly,
so a (kind, size, seed) triple pins the instance bit-for-bit on any
platform with IEEE-754 doubles.  QR-derived objects are sign-canonicalized
(R's diagonal made nonnegative) to remove the one remaining convention
freedom.
"""

from __future__ import annotations

import numpy as np

from .frame_core import Frame

__all__ = [
    "random_tight_frame",
    "random_valid_frame",
    "random_unit_vectors",
    "random_projection",
]


def _qr_canonical(a: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(a)
    signs = np.sign(np.diag(r))
    signs[signs == 0.0] = 1.0
    return q * signs


def random_tight_frame(n: int, m: int, seed: int) -> Frame:
    """Frame of m vectors in R^n with bounds exactly A = B = 1 (up to QR roundoff)."""
    if m < n:
        raise ValueError("a tight frame needs m >= n vectors")
    rng = np.random.default_rng(seed)
    q = _qr_canonical(rng.standard_normal((m, n)))  # orthonormal columns
    return Frame(dim=n, vectors=q)  # synthesis q.T has orthonormal rows


def random_valid_frame(n: int, m: int, seed: int) -> Frame:
    """Generic (non-tight) frame: Gaussian vectors with spread-out norms."""
    if m < n:
        raise ValueError("a frame needs m >= n vectors")
    rng = np.random.default_rng(seed)
    vecs = rng.standard_normal((m, n)) * rng.uniform(0.5, 2.0, size=m)[:, None]
    return Frame(dim=n, vectors=vecs)


def random_unit_vectors(m: int, n: int, seed: int) -> np.ndarray:
    """m unit vectors in R^n, rows-as-vectors."""
    rng = np.random.default_rng(seed)
    vecs = rng.standard_normal((m, n))
    return vecs / np.linalg.norm(vecs, axis=1)[:, None]


def random_projection(dim: int, rank: int, seed: int) -> np.ndarray:
    """Symmetric idempotent of the given rank onto a random subspace."""
    if not 1 <= rank <= dim:
        raise ValueError(f"rank must lie in [1, {dim}], got {rank}")
    rng = np.random.default_rng(seed)
    q = _qr_canonical(rng.standard_normal((dim, rank)))
    p = q @ q.T
    return (p + p.T) / 2.0
