"""Greedy near-orthonormal subsequences of streamed (unbounded) frames.

A frame whose ambient space is not finite-dimensional cannot be held as a
matrix; it is modeled here as a :class:`FrameSequence`, a deterministic
re-iterable stream of finitely-supported vectors, together with a scan
budget.  The greedy selector normalizes each incoming vector and keeps
the k-th term only when its distance to the span of the terms already
kept exceeds 1 - 2^(-2k).  Distances that close to 1 force tiny pairwise
inner products, so the kept subsequence is certified equivalent to an
orthonormal basis; streams that are secretly finite-dimensional saturate
their span and come back with status ``threshold_unattainable`` instead
of looping forever.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._linalg import orthonormal_columns
from .frame_core import EquivalenceCertificate, equivalence_certificate

__all__ = [
    "FrameSequence",
    "GreedySelection",
    "StabilityResult",
    "theta",
    "greedy_subsequence",
    "stability_check",
    "tail_certificate",
    "tail_index",
]

# Stream entries with norm at or below this are treated as zeros and skipped.
ZERO_NORM_TOL = 1e-12


class FrameSequence:
    """Re-iterable stream of vectors; each ``iter()`` starts a fresh pass.

    Vectors may have different lengths; shorter ones are implicitly padded
    with zeros, so a stream may grow into new coordinates as it goes.
    """

    def __init__(self, factory, description: str = "custom"):
        self._factory = factory
        self.description = description

    def __iter__(self):
        return iter(self._factory())

    @classmethod
    def from_vectors(cls, vectors, cyclic: bool = False) -> "FrameSequence":
        rows = [np.array(v, dtype=float).ravel() for v in vectors]
        if not rows:
            raise ValueError("empty vector stream")

        if cyclic:

            def factory():
                while True:
                    yield from (row.copy() for row in rows)

        else:

            def factory():
                return (row.copy() for row in rows)

        kind = "cyclic" if cyclic else "one-pass"
        return cls(factory, description=f"{kind} stream of {len(rows)} vectors")

    @classmethod
    def from_frame(cls, frame, cyclic: bool = False) -> "FrameSequence":
        return cls.from_vectors(frame.vectors, cyclic=cyclic)

    @classmethod
    def from_file(cls, path: str, cyclic: bool = False) -> "FrameSequence":
        from .frameio import read_frame

        return cls.from_frame(read_frame(path), cyclic=cyclic)

    @classmethod
    def projected_basis(
        cls,
        ambient_dim: int,
        rank: int,
        seed: int = 0,
        coupling: float = 1e-6,
    ) -> "FrameSequence":
        """Coordinate basis of R^ambient_dim pushed through a random projection.

        The projection's range is spanned by ``rank`` unit vectors, each
        concentrated on a random pair of coordinates with a small seeded
        mixing term (``coupling``) tying the pairs together.  The stream
        P e_1, P e_2, ... is then a 1-tight frame for the range whose
        elements are nearly orthogonal but not exactly so, which keeps the
        greedy selector's thresholds attainable: a projection onto a
        generic (rotation-invariant) subspace would spread every column
        across all range directions and stall the scan almost surely.
        Requires ambient_dim >= 2 * rank.
        """
        if rank < 1:
            raise ValueError("rank must be >= 1")
        if ambient_dim < 2 * rank:
            raise ValueError("projected_basis requires ambient_dim >= 2 * rank")
        rng = np.random.default_rng(seed)
        coords = rng.permutation(ambient_dim)
        first, second = coords[:rank], coords[rank : 2 * rank]
        angles = rng.uniform(0.2, math.pi / 2.0 - 0.2, size=rank)
        basis = np.zeros((ambient_dim, rank))
        basis[first, np.arange(rank)] = np.cos(angles)
        basis[second, np.arange(rank)] = np.sin(angles)
        # mixing noise lives on the pair coordinates only, so columns of P
        # outside them stay exactly zero and are skipped by the scanner
        noise = np.zeros((ambient_dim, rank))
        noise[coords[: 2 * rank], :] = rng.standard_normal((2 * rank, rank))
        basis = basis + coupling * noise
        q, _ = np.linalg.qr(basis)
        proj = q @ q.T

        def factory():
            return (proj[:, j].copy() for j in range(ambient_dim))

        return cls(
            factory,
            description=(
                f"projected-basis(ambient={ambient_dim}, rank={rank}, seed={seed})"
            ),
        )


def _pad(v: np.ndarray, length: int) -> np.ndarray:
    if v.size == length:
        return v
    out = np.zeros(length)
    out[: v.size] = v
    return out


def _stack_padded(rows: list[np.ndarray]) -> np.ndarray:
    width = max(r.size for r in rows)
    return np.vstack([_pad(r, width) for r in rows])


def theta(points, subspace_basis) -> float:
    """max over the points of the distance to the span of the basis vectors.

    Points must be unit vectors (within 1e-8).  The basis need not be
    orthonormal; it is orthonormalized internally.  Padding reconciles
    mismatched lengths.
    """
    pts = [np.asarray(p, dtype=float).ravel() for p in points]
    if not pts:
        raise ValueError("no points given")
    bas = [np.asarray(b, dtype=float).ravel() for b in subspace_basis]
    width = max(
        max(p.size for p in pts), max((b.size for b in bas), default=1)
    )
    mat = _stack_padded([_pad(p, width) for p in pts])
    norms = np.linalg.norm(mat, axis=1)
    if np.max(np.abs(norms - 1.0)) > 1e-8:
        raise ValueError("theta expects normalized points (unit norm within 1e-8)")
    if bas:
        q = orthonormal_columns(_stack_padded([_pad(b, width) for b in bas]).T)
        resid = mat - (mat @ q) @ q.T
    else:
        resid = mat
    return float(np.max(np.linalg.norm(resid, axis=1)))


@dataclass(frozen=True)
class GreedySelection:
    """Result of a greedy scan.

    ``indices`` are 0-based positions in the stream; ``vectors`` holds the
    normalized selected vectors (zero-padded to a common length);
    ``distances[i]`` is the distance of term i+1 to the span of the
    previous terms (1.0 for the first term by convention).  ``status`` is
    ``complete`` or ``threshold_unattainable``; ``scanned`` counts how
    many stream elements were consumed.
    """

    indices: tuple[int, ...]
    vectors: np.ndarray
    distances: tuple[float, ...]
    status: str
    scanned: int
    terms_requested: int

    def __post_init__(self):
        arr = np.array(self.vectors, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "vectors", arr)

    @property
    def size(self) -> int:
        return len(self.indices)

    def to_dict(self) -> dict:
        return {
            "indices": list(self.indices),
            "distances": list(self.distances),
            "status": self.status,
            "scanned": self.scanned,
            "terms_requested": self.terms_requested,
            "vectors": self.vectors.tolist(),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "GreedySelection":
        return cls(
            indices=tuple(int(i) for i in obj["indices"]),
            vectors=np.asarray(obj["vectors"], dtype=float),
            distances=tuple(float(d) for d in obj["distances"]),
            status=str(obj["status"]),
            scanned=int(obj["scanned"]),
            terms_requested=int(obj["terms_requested"]),
        )


def greedy_subsequence(seq: FrameSequence, terms: int, scan_limit: int) -> GreedySelection:
    """Scan the stream and keep up to ``terms`` nearly-orthogonal vectors.

    The first nonzero vector is always kept; the k-th keep (k >= 2)
    requires distance to the current span strictly above 1 - 2^(-2k).
    At most ``scan_limit`` stream elements are consumed; exhausting either
    the budget or the stream returns the partial selection with status
    ``threshold_unattainable``.
    """
    if terms < 1:
        raise ValueError("terms must be >= 1")
    if scan_limit < 1:
        raise ValueError("scan_limit must be >= 1")

    indices: list[int] = []
    dists: list[float] = []
    picked: list[np.ndarray] = []  # normalized selections
    basis: list[np.ndarray] = []  # orthonormal basis of their span
    scanned = 0
    status = "threshold_unattainable"

    stream = iter(seq)
    while scanned < scan_limit:
        try:
            v = next(stream)
        except StopIteration:
            break
        position = scanned
        scanned += 1
        v = np.asarray(v, dtype=float).ravel()
        nv = float(np.linalg.norm(v))
        if nv <= ZERO_NORM_TOL:
            continue
        z = v / nv
        k = len(indices) + 1
        if k == 1:
            dist = 1.0
            new_dir = z
        else:
            width = max(z.size, basis[0].size)
            zp = _pad(z, width)
            q = _stack_padded([_pad(b, width) for b in basis]).T  # (width, k-1)
            resid = zp - q @ (q.T @ zp)
            dist = float(np.linalg.norm(resid))
            if dist <= 1.0 - 2.0 ** (-2 * k):
                continue
            new_dir = resid / dist
            z = zp
        indices.append(position)
        dists.append(dist)
        picked.append(z)
        basis = [_pad(b, z.size) for b in basis]
        basis.append(new_dir)
        if len(indices) == terms:
            status = "complete"
            break

    if picked:
        vectors = _stack_padded(picked)
    else:
        vectors = np.zeros((0, 1))
    return GreedySelection(
        indices=tuple(indices),
        vectors=vectors,
        distances=tuple(dists),
        status=status,
        scanned=scanned,
        terms_requested=terms,
    )


@dataclass(frozen=True)
class StabilityResult:
    """Pairwise-inner-product check of a greedy selection.

    ``ok`` is True when <z_i, z_k> < 2^(-k-1) for every pair i < k (1-based
    term positions); ``violations`` lists the offending 0-based position
    pairs.  The certificate is computed from the Gram matrix regardless.
    """

    ok: bool
    violations: tuple[tuple[int, int], ...]
    certificate: EquivalenceCertificate

    def violations_at_or_after(self, term: int) -> tuple[tuple[int, int], ...]:
        """Violations whose later member is 1-based term >= ``term``."""
        return tuple((i, k) for (i, k) in self.violations if k + 1 >= term)


def stability_check(selection: GreedySelection) -> StabilityResult:
    """Verify the decaying-inner-product condition and certify the selection."""
    z = selection.vectors
    if z.shape[0] == 0:
        raise ValueError("empty selection cannot be certified")
    gram = z @ z.T
    violations: list[tuple[int, int]] = []
    for later in range(1, z.shape[0]):
        eps = 2.0 ** (-(later + 1) - 1)  # 1-based term k = later + 1
        for earlier in range(later):
            if gram[earlier, later] >= eps:
                violations.append((earlier, later))
    cert = equivalence_certificate(z)
    return StabilityResult(
        ok=not violations, violations=tuple(violations), certificate=cert
    )


def tail_certificate(selection: GreedySelection, start: int) -> EquivalenceCertificate:
    """Certificate of the terms from 0-based position ``start`` on."""
    if not 0 <= start < selection.size:
        raise ValueError(f"start must be in [0, {selection.size}), got {start}")
    return equivalence_certificate(selection.vectors[start:])


def tail_index(selection: GreedySelection, epsilon: float) -> tuple[int, float]:
    """Terms to discard so the rest is (1 - epsilon)-close to orthonormal.

    Appending a term at distance d multiplies the certificate constant by
    at most (1 + eta) / (1 - eta) with eta = sqrt(1 - d^2).  Returns the
    smallest k0 such that the product of these factors over the terms
    after position k0 is at most 1 / (1 - epsilon), together with that
    product (k0 = selection.size means no tail qualifies).
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    bound = 1.0 / (1.0 - epsilon)
    factors = []
    for d in selection.distances:
        eta = math.sqrt(max(0.0, 1.0 - min(d, 1.0) ** 2))
        factors.append(float("inf") if eta >= 1.0 else (1.0 + eta) / (1.0 - eta))
    for k0 in range(selection.size + 1):
        prod = 1.0
        for f in factors[k0:]:
            prod *= f
        if prod <= bound:
            return k0, prod
    return selection.size, 1.0
