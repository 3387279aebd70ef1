"""Finite frames: bounds, tightening, and equivalence certificates.

A *frame* for R^n is a finite ordered family (x_j) whose frame operator
S = sum_j x_j x_j^T is positive definite; equivalently there are constants
0 < A <= B with

    A ||x||^2  <=  sum_j <x, x_j>^2  <=  B ||x||^2      for all x.

The best constants are the extreme eigenvalues of S.  A frame is *tight*
when A = B, and a tight frame with A = B = 1 behaves like an orthonormal
set in every averaged sense: its synthesis matrix has orthonormal rows and
the squared norms sum exactly to n.

Subsets of a frame are compared against an orthonormal basis through an
:class:`EquivalenceCertificate`: the map sending an orthonormal basis onto
the system has norm ``hilbertian`` (top singular value of the synthesis
matrix) and its inverse, when it exists, has norm ``besselian`` (reciprocal
of the bottom singular value).  The product ``constant`` bounds how far the
system is from an orthonormal basis of its span; it equals 1 exactly for
orthonormal systems.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ._linalg import as_matrix, singular_values

__all__ = [
    "VALIDITY_RTOL",
    "TIGHT_TOL",
    "NotAFrameError",
    "Frame",
    "FrameBounds",
    "EquivalenceCertificate",
    "frame_bounds",
    "is_tight",
    "tighten",
    "frame_from_projection",
    "row_orthonormal_form",
    "dimension_identity",
    "gram_matrix",
    "equivalence_certificate",
]

log = logging.getLogger(__name__)

# Lower frame bound below VALIDITY_RTOL * max(B, 1) counts as degenerate.
VALIDITY_RTOL = 1e-12

# Default ratio tolerance for tightness checks: tight iff B/A <= 1 + tol.
TIGHT_TOL = 1e-8


class NotAFrameError(ValueError):
    """The input family does not span stably (degenerate lower frame bound)."""


@dataclass(frozen=True)
class Frame:
    """Ordered family of real vectors, rows-as-vectors in ``vectors``.

    Zero vectors are permitted; they never affect frame bounds.  Operations
    that need nonzero norms (splitting, normalization) drop them first via
    :meth:`drop_zero_vectors`.
    """

    dim: int
    vectors: np.ndarray

    def __post_init__(self):
        if int(self.dim) < 1:
            raise ValueError("ambient dimension must be >= 1")
        object.__setattr__(self, "dim", int(self.dim))
        arr = np.asarray(self.vectors, dtype=float)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        if arr.ndim != 2 or arr.shape[1] != self.dim:
            raise ValueError(
                f"vectors must form an (m, {self.dim}) array, got shape {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("frame vectors contain non-finite entries")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "vectors", arr)

    @classmethod
    def from_vectors(cls, vectors) -> "Frame":
        arr = as_matrix(vectors)
        return cls(dim=arr.shape[1], vectors=arr)

    @property
    def size(self) -> int:
        """Number of vectors m."""
        return self.vectors.shape[0]

    @property
    def synthesis(self) -> np.ndarray:
        """Synthesis matrix, shape (dim, m): columns are the vectors."""
        return self.vectors.T

    def frame_operator(self) -> np.ndarray:
        """S = sum_j x_j x_j^T, shape (dim, dim)."""
        return self.vectors.T @ self.vectors

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.vectors, axis=1)

    def subset(self, indices) -> np.ndarray:
        """Rows-as-vectors array of the selected vectors (copy)."""
        idx = np.asarray(indices, dtype=int)
        return np.array(self.vectors[idx], copy=True)

    def drop_zero_vectors(self) -> tuple["Frame", np.ndarray]:
        """Remove zero vectors, returning (frame, kept original indices)."""
        keep = self.norms() > 0.0
        kept = np.flatnonzero(keep)
        if kept.size == self.size:
            return self, kept
        log.warning("dropping %d zero vector(s) from frame", self.size - kept.size)
        if kept.size == 0:
            raise NotAFrameError("all vectors are zero")
        return Frame(self.dim, self.vectors[keep]), kept

    def is_valid(self) -> bool:
        if self.size == 0:
            return False
        return frame_bounds(self).is_frame


@dataclass(frozen=True)
class FrameBounds:
    """Optimal frame bounds A = ``lower`` and B = ``upper``."""

    lower: float
    upper: float

    @property
    def is_frame(self) -> bool:
        return self.lower > VALIDITY_RTOL * max(self.upper, 1.0)

    @property
    def frame_constant(self) -> float:
        """sqrt(B/A), the tightness defect; inf when degenerate."""
        if self.lower <= 0.0:
            return float("inf")
        return float(np.sqrt(self.upper / self.lower))

    def tight_within(self, tol: float = TIGHT_TOL) -> bool:
        if self.lower <= 0.0:
            return False
        return self.upper / self.lower <= 1.0 + tol


@dataclass(frozen=True)
class EquivalenceCertificate:
    """Certified comparison of a vector system with an orthonormal basis.

    ``hilbertian``  top singular value h of the synthesis matrix: the
                    system is the image of an orthonormal basis under a map
                    of norm h.
    ``besselian``   norm b of the inverse map (1 / bottom singular value),
                    inf when the system is numerically dependent.
    ``constant``    C = h * b >= 1; equals 1 exactly for orthonormal systems.
    """

    hilbertian: float
    besselian: float
    constant: float

    @property
    def independent(self) -> bool:
        return np.isfinite(self.besselian)

    def to_dict(self) -> dict:
        return {
            "hilbertian": self.hilbertian,
            "besselian": self.besselian,
            "constant": self.constant,
        }


def frame_bounds(frame: Frame) -> FrameBounds:
    """Optimal frame bounds via the extreme eigenvalues of the frame operator.

    For wide families (m > 4 dim) the dim x dim frame operator is
    diagonalized directly; otherwise the singular values of the synthesis
    matrix are squared, which is the better-conditioned route.
    """
    if frame.size == 0:
        raise ValueError("frame bounds of an empty family are undefined")
    n, m = frame.dim, frame.size
    if m > 4 * n:
        w = np.linalg.eigvalsh(frame.frame_operator())
        low, high = float(w[0]), float(w[-1])
    else:
        s = singular_values(frame.synthesis)
        high = float(s[0]) ** 2
        # fewer vectors than dimensions cannot span: lower bound is 0
        low = 0.0 if m < n else float(s[-1]) ** 2
    return FrameBounds(lower=max(low, 0.0), upper=max(high, 0.0))


def is_tight(frame: Frame, tol: float = TIGHT_TOL) -> bool:
    """True iff B/A <= 1 + tol for the optimal bounds."""
    return frame_bounds(frame).tight_within(tol)


def tighten(frame: Frame) -> Frame:
    """Map each vector through S^(-1/2); the result has A = B = 1 exactly.

    Raises :class:`NotAFrameError` when the lower frame bound is degenerate.
    Already-tight frames come back unchanged up to roundoff, so the
    operation is idempotent.
    """
    bounds = frame_bounds(frame)
    if not bounds.is_frame:
        raise NotAFrameError(
            f"lower frame bound {bounds.lower:.3e} is below the validity "
            f"floor; the family does not span R^{frame.dim}"
        )
    w, v = np.linalg.eigh(frame.frame_operator())
    floor = VALIDITY_RTOL * max(bounds.upper, 1.0)
    w = np.maximum(w, floor)
    whiten = (v / np.sqrt(w)) @ v.T
    return Frame(frame.dim, frame.vectors @ whiten)


def frame_from_projection(p: np.ndarray, tol: float = 1e-8) -> Frame:
    """Tight frame from an orthogonal projection of the coordinate basis.

    Given a symmetric idempotent p of rank k acting on R^m, the projected
    basis vectors P e_1, ..., P e_m, expressed in an orthonormal basis of
    range(P), form a tight frame for R^k with A = B = 1.  Symmetry and
    idempotence are verified entrywise to ``tol``.
    """
    p = np.asarray(p, dtype=float)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise ValueError("projection must be a square matrix")
    if np.max(np.abs(p - p.T)) > tol:
        raise ValueError("projection is not symmetric within tolerance")
    p = (p + p.T) / 2.0
    if np.max(np.abs(p @ p - p)) > tol:
        raise ValueError("matrix is not idempotent within tolerance")
    w, v = np.linalg.eigh(p)
    in_range = w > 0.5
    rank = int(np.count_nonzero(in_range))
    if rank == 0:
        raise ValueError("projection has rank zero")
    basis = v[:, in_range]  # (m, rank), orthonormal columns spanning range(p)
    # row j of basis = coordinates of P e_j in that basis
    return Frame(dim=rank, vectors=basis)


def row_orthonormal_form(frame: Frame) -> np.ndarray:
    """Synthesis matrix of the tightened frame; rows are orthonormal.

    The returned (dim, m) matrix U satisfies U U^T = I to 1e-8, which is
    re-verified before returning.
    """
    tight = tighten(frame)
    u = tight.synthesis
    defect = np.max(np.abs(u @ u.T - np.eye(frame.dim)))
    if defect > 1e-8:
        raise NotAFrameError(
            f"tightening left a row-orthonormality defect of {defect:.3e}; "
            "the frame is too close to degenerate"
        )
    return u


def dimension_identity(frame: Frame, tol: float = 1e-6) -> float:
    """Sum of squared norms; equals the ambient dimension when A = B = 1.

    Requires both optimal bounds to be 1 within ``tol``; for merely tight
    frames apply :func:`tighten` first.
    """
    bounds = frame_bounds(frame)
    if abs(bounds.lower - 1.0) > tol or abs(bounds.upper - 1.0) > tol:
        raise ValueError(
            f"identity requires frame bounds A = B = 1 (got A={bounds.lower:.6g}, "
            f"B={bounds.upper:.6g}); tighten() the frame first"
        )
    return float(np.sum(frame.norms() ** 2))


def gram_matrix(system) -> np.ndarray:
    """Gram matrix G[i, j] = <x_i, x_j>, symmetrized against roundoff."""
    arr = as_matrix(system)
    g = arr @ arr.T
    return (g + g.T) / 2.0


def equivalence_certificate(system) -> EquivalenceCertificate:
    """Certificate (h, b, C) for a nonempty system of vectors.

    h is always finite.  b is inf when the system is numerically dependent,
    i.e. the bottom singular value falls at or below the standard rank
    cutoff h * max(m, n) * machine-eps; then C is inf as well.
    """
    arr = as_matrix(system)
    m, n = arr.shape
    s = singular_values(arr)
    h = float(s[0])
    cutoff = h * max(m, n) * np.finfo(float).eps
    smin = 0.0 if m > n else float(s[-1])
    if smin <= cutoff:
        return EquivalenceCertificate(h, float("inf"), float("inf"))
    b = 1.0 / smin
    return EquivalenceCertificate(h, b, h * b)
