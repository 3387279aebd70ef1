"""Iterative extraction of a near-orthogonal subsequence from a frame.

Given any valid frame for R^n and a budget epsilon, the pipeline returns
more than (1 - epsilon) * n vectors that form a well-conditioned system,
certified by an :class:`~frame_extract.frame_core.EquivalenceCertificate`.
The steps:

1. tighten the frame (A = B = 1);
2. split each vector into copies of nearly equal norm
   (:func:`split_equalize`), so at least ceil(2 n / epsilon) vectors of
   norm about sqrt(n / m') are available;
3. repeatedly project away the span of everything selected so far, keep
   the vectors whose residual is still large (the pool tau_k), pick a
   norm-minimizing subset of the pool (:func:`lunin_select`), and keep the
   well-invertible part of its normalized residuals (:func:`bt_select`);
4. stop once more than (1 - epsilon) * n distinct originals are selected,
   or the step budget runs out.

Each selected split vector traces back to a distinct original vector, so
the final index set lives in the input frame.  All randomness-free; the
run is a deterministic function of (frame, params, config).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from ._linalg import (
    batched_sigma_min_from_gram,
    gram_submatrices,
    orthonormal_columns,
    residual_norms,
    sigma_max,
)
from .frame_core import (
    EquivalenceCertificate,
    Frame,
    equivalence_certificate,
    gram_matrix,
    tighten,
)
from .selection import SelectionConfig, SubsetSelection, bt_select, kt_select, lunin_select

__all__ = [
    "ExtractionParams",
    "SplitFrame",
    "StepRecord",
    "ExtractionReport",
    "RefinementResult",
    "default_step_budget",
    "strict_target_count",
    "split_plan",
    "split_equalize",
    "extract_orthogonal_subset",
    "recertify_extraction",
    "refine_near_isometric",
]


def default_step_budget(epsilon: float, c1: float, c2: float) -> int:
    """Step budget floor(4 c1^2 / (c2 epsilon^2)) + 2 that always suffices."""
    return int(math.floor(4.0 * c1 * c1 / (c2 * epsilon * epsilon) + 1e-9)) + 2


def strict_target_count(epsilon: float, n: int) -> int:
    """Smallest integer strictly greater than (1 - epsilon) * n."""
    return int(math.floor((1.0 - epsilon) * n)) + 1


@dataclass(frozen=True)
class ExtractionParams:
    """Pipeline parameters; ``delta`` = sqrt(epsilon / 2) is derived.

    ``max_steps`` defaults to :func:`default_step_budget`, which is far
    more than the typical run uses; override it to study early stopping.
    """

    epsilon: float
    nu: float = 0.05
    c1: float = 2.0
    c2: float = 0.1
    max_steps: int | None = None
    delta: float = field(init=False, default=0.0)

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.nu < 0.0:
            raise ValueError("nu must be >= 0")
        if self.c1 <= 0.0 or self.c2 <= 0.0:
            raise ValueError("c1 and c2 must be positive")
        object.__setattr__(self, "delta", math.sqrt(self.epsilon / 2.0))
        if self.max_steps is None:
            object.__setattr__(
                self, "max_steps", default_step_budget(self.epsilon, self.c1, self.c2)
            )
        elif int(self.max_steps) < 1:
            raise ValueError("max_steps must be >= 1")
        else:
            object.__setattr__(self, "max_steps", int(self.max_steps))

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "nu": self.nu,
            "c1": self.c1,
            "c2": self.c2,
            "max_steps": self.max_steps,
            "delta": self.delta,
        }


@dataclass(frozen=True)
class SplitFrame:
    """Equal-norm splitting of a 1-tight frame.

    Row j of ``vectors`` is a copy x_i / sqrt(k_i) of original vector
    i = ``origin[j]``; ``origin`` is nondecreasing.  All norms lie in
    [lam, (1 + nu) * lam].
    """

    vectors: np.ndarray
    origin: np.ndarray
    lam: float
    nu_achieved: float

    def __post_init__(self):
        for name in ("vectors", "origin"):
            arr = np.array(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def size(self) -> int:
        return self.vectors.shape[0]


@dataclass(frozen=True)
class StepRecord:
    """One pipeline step: pool size, chosen split indices, certified scales."""

    k: int
    tau_size: int
    sigma_k: tuple[int, ...]
    besselian_scale: float
    projection_rank: int

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "tau_size": self.tau_size,
            "sigma_k": list(self.sigma_k),
            "besselian_scale": self.besselian_scale,
            "projection_rank": self.projection_rank,
        }


@dataclass(frozen=True)
class ExtractionReport:
    """Full record of one extraction run.

    ``final_sigma`` indexes the *original* input frame (zero vectors
    included in the numbering).  ``certificate`` compares the selected
    split vectors, scaled by sqrt(m' / n), with an orthonormal basis.
    """

    params: ExtractionParams
    n: int
    m_input: int
    m_split: int
    target_count: int
    steps: tuple[StepRecord, ...]
    final_sigma: tuple[int, ...]
    certificate: EquivalenceCertificate
    stopped_reason: str
    wall_time_s: float

    @property
    def selected_split(self) -> tuple[int, ...]:
        out: list[int] = []
        for step in self.steps:
            out.extend(step.sigma_k)
        return tuple(sorted(out))

    @property
    def target_reached(self) -> bool:
        return self.stopped_reason == "target_reached"

    def to_report_dict(self, include_timing: bool = False) -> dict:
        out = {
            "steps": [s.to_dict() for s in self.steps],
            "final_sigma": list(self.final_sigma),
            "certificate": self.certificate.to_dict(),
            "stopped_reason": self.stopped_reason,
            "params": self.params.to_dict(),
        }
        if include_timing:
            out["wall_time_s"] = self.wall_time_s
        return out


def _integer_multiplicities(r: np.ndarray, lam: float, nu: float) -> np.ndarray | None:
    """Smallest k_j with r_j / sqrt(k_j) in [lam, (1+nu) lam], or None."""
    lo = (r / ((1.0 + nu) * lam)) ** 2
    hi = (r / lam) ** 2
    ks = np.ceil(lo - 1e-9).astype(np.int64)
    ks = np.maximum(ks, 1)
    if np.all(ks.astype(float) <= hi + 1e-9):
        return ks
    return None


def split_plan(norms, nu: float) -> tuple[float, np.ndarray]:
    """Common scale lam and multiplicities k_j with r_j/sqrt(k_j) in [lam, (1+nu) lam].

    The largest feasible lam among the candidate scales r_j / sqrt(k) is
    chosen, so vectors are split as little as possible.  With nu = 0 the
    norms must be commensurable (all r_j^2 integer multiples of the
    smallest after scaling); otherwise a ValueError asks for nu > 0.
    """
    r = np.asarray(norms, dtype=float)
    if r.ndim != 1 or r.size == 0:
        raise ValueError("norms must be a non-empty 1-d array")
    if np.any(r <= 0.0):
        raise ValueError("splitting requires strictly positive norms")
    if nu < 0.0:
        raise ValueError("nu must be >= 0")
    rmin = float(r.min())

    if nu == 0.0:
        for k in range(1, 4097):
            lam = rmin / math.sqrt(k)
            ratios = (r / lam) ** 2
            ks = np.rint(ratios)
            if np.all(np.abs(ratios - ks) <= 1e-9 * np.maximum(ratios, 1.0)):
                return lam, ks.astype(np.int64)
        raise ValueError(
            "norms are incommensurable: no exact equal-norm split exists; "
            "allow slack with nu > 0"
        )

    one = 1.0 + nu
    lam_cap = rmin / one
    lam_floor = min(rmin * math.sqrt(one * one - 1.0) / one, lam_cap)
    candidates = {lam_cap}
    for rj in np.unique(r):
        kmin = max(1, int(math.ceil((rj / lam_cap) ** 2 - 1e-12)))
        kmax = int(math.floor((rj / lam_floor) ** 2 + 1e-12))
        if kmax >= kmin:
            lams = rj / np.sqrt(np.arange(kmin, kmax + 1, dtype=float))
            for lam in lams:
                if lam_floor - 1e-15 <= lam <= lam_cap + 1e-15:
                    candidates.add(min(float(lam), lam_cap))
    for lam in sorted(candidates, reverse=True):
        ks = _integer_multiplicities(r, lam, nu)
        if ks is not None:
            return float(lam), ks
    ks = _integer_multiplicities(r, lam_floor, nu)
    if ks is None:  # the floor interval always has integer length >= 1
        raise RuntimeError("internal error: floor scale found no multiplicities")
    return float(lam_floor), ks


def split_equalize(frame: Frame, params: ExtractionParams) -> SplitFrame:
    """Split a 1-tight frame into >= ceil(2 n / epsilon) near-equal-norm copies.

    Each original vector x_i becomes k_i copies x_i / sqrt(k_i); the frame
    operator is unchanged, so the split is again 1-tight.  If the initial
    plan yields fewer than ceil(2 n / epsilon) vectors, every multiplicity
    is scaled up uniformly.  Requires bounds A = B = 1 within 1e-6 (apply
    :func:`~frame_extract.frame_core.tighten` first) and no zero vectors.
    """
    from .frame_core import frame_bounds

    bounds = frame_bounds(frame)
    if abs(bounds.lower - 1.0) > 1e-6 or abs(bounds.upper - 1.0) > 1e-6:
        raise ValueError(
            f"split_equalize requires frame bounds A = B = 1 (got A={bounds.lower:.6g}, "
            f"B={bounds.upper:.6g}); tighten() the frame first"
        )
    norms = frame.norms()
    if np.any(norms == 0.0):
        raise ValueError("split_equalize cannot split zero vectors; drop them first")

    lam, ks = split_plan(norms, params.nu)
    needed = int(math.ceil(2.0 * frame.dim / params.epsilon - 1e-9))
    total = int(ks.sum())
    if total < needed:
        boost = int(math.ceil(needed / total))
        ks = ks * boost
        lam = lam / math.sqrt(boost)

    rows = np.repeat(frame.vectors / np.sqrt(ks.astype(float))[:, None], ks, axis=0)
    origin = np.repeat(np.arange(frame.size, dtype=np.int64), ks)
    new_norms = np.linalg.norm(rows, axis=1)
    low, high = float(new_norms.min()), float(new_norms.max())
    if low < lam * (1.0 - 1e-8) or high > lam * (1.0 + params.nu) * (1.0 + 1e-8):
        raise RuntimeError("internal error: split norms left the [lam, (1+nu) lam] bracket")
    return SplitFrame(vectors=rows, origin=origin, lam=lam, nu_achieved=high / low - 1.0)


def _rebuild_split(frame: Frame, params: ExtractionParams) -> tuple[SplitFrame, np.ndarray]:
    """Deterministic preprocessing shared by extraction and re-certification."""
    base, kept = frame.drop_zero_vectors()
    tight = tighten(base)
    return split_equalize(tight, params), kept


def _shrink_keeping_invertibility(unit_rows: np.ndarray, picks: list[int], need: int) -> list[int]:
    """Backward-eliminate ``picks`` down to ``need`` rows of ``unit_rows``.

    Each round recomputes every single-removal bottom singular value from
    the exact Gram submatrix and drops the row whose removal keeps it
    largest (first maximum on ties), so the kept subset stays as far from
    singularity as a one-at-a-time search allows.
    """
    gram = unit_rows @ unit_rows.T
    gram = (gram + gram.T) / 2.0
    active = np.asarray(picks, dtype=np.intp)
    while active.size > need:
        s = active.size
        keep_rows = np.empty((s, s - 1), dtype=np.intp)
        for c in range(s):
            keep_rows[c, :c] = active[:c]
            keep_rows[c, c:] = active[c + 1 :]
        vals = batched_sigma_min_from_gram(gram_submatrices(gram, keep_rows))
        active = keep_rows[int(np.argmax(vals))]

    # One-for-one exchange until no swap strictly improves the bottom
    # singular value (each candidate recomputed from its exact Gram, best
    # swap applied, first maximum on ties; strict ascent guarantees
    # termination).
    out = set(int(i) for i in picks) - set(int(i) for i in active)
    dropped = np.asarray(sorted(out), dtype=np.intp)
    if dropped.size:
        current = float(batched_sigma_min_from_gram(gram_submatrices(gram, active[None, :]))[0])
        for _ in range(64):
            trial = np.repeat(active[None, :], active.size * dropped.size, axis=0)
            pair = 0
            for c in range(active.size):
                for d in dropped:
                    trial[pair, c] = d
                    pair += 1
            vals = batched_sigma_min_from_gram(gram_submatrices(gram, trial))
            best = int(np.argmax(vals))
            if vals[best] <= current:
                break
            c, di = divmod(best, dropped.size)
            incoming, outgoing = int(dropped[di]), int(active[c])
            active = np.sort(trial[best])
            dropped = np.asarray(
                sorted((set(map(int, dropped)) - {incoming}) | {outgoing}), dtype=np.intp
            )
            current = float(vals[best])
    return [int(i) for i in active]


def extract_orthogonal_subset(
    frame: Frame,
    params: ExtractionParams,
    cfg: SelectionConfig | None = None,
) -> ExtractionReport:
    """Run the full pipeline; see the module docstring for the step layout.

    The per-step residual threshold is delta * sqrt(n / m') / (1 + nu),
    slightly loosened by the norm slack so unequal splits cannot starve
    the pool.  Both inner selectors run greedily (the candidate counts put
    exhaustive search far out of reach at any interesting size); pass a
    custom ``cfg`` to change that.
    """
    if cfg is None:
        cfg = SelectionConfig(c1=params.c1, c2=params.c2, exhaustive_limit=1)
    t0 = time.perf_counter()
    split, kept = _rebuild_split(frame, params)
    n = frame.dim
    mp = split.size
    y = split.vectors
    threshold = params.delta * math.sqrt(n / mp) / (1.0 + params.nu)
    target_count = strict_target_count(params.epsilon, n)

    selected: list[int] = []
    steps: list[StepRecord] = []
    reason = "step_budget_exhausted"
    for k in range(1, params.max_steps + 1):
        if selected:
            basis = orthonormal_columns(y[np.asarray(sorted(selected))].T)
        else:
            basis = np.zeros((n, 0))
        rank = basis.shape[1]
        res_norms = residual_norms(y, basis)
        chosen = set(selected)
        tau = [j for j in range(mp) if j not in chosen and res_norms[j] >= threshold]
        if not tau:
            break
        lun = lunin_select(y[tau], min(n, len(tau)), cfg)
        pool = [tau[i] for i in lun.indices]
        defl = y[pool] - (y[pool] @ basis) @ basis.T
        defl_norms = np.linalg.norm(defl, axis=1)
        bt = bt_select(defl / defl_norms[:, None], params.c2 * params.delta, cfg)
        if not bt.indices:
            break
        picks = list(bt.indices)
        need = target_count - len(selected)
        if 0 < need < len(picks):
            # Keep only as many vectors as the stopping rule still needs.
            # Dropping vectors can only raise the bottom singular value, so
            # the shrunken step still meets the invertibility target; each
            # round drops the vector whose removal raises it the most.
            picks = _shrink_keeping_invertibility(defl / defl_norms[:, None], picks, need)
        sigma_k = tuple(sorted(pool[i] for i in picks))
        steps.append(
            StepRecord(
                k=k,
                tau_size=len(tau),
                sigma_k=sigma_k,
                besselian_scale=1.0 / params.delta,
                projection_rank=rank,
            )
        )
        selected.extend(sigma_k)
        if len(selected) >= target_count:
            reason = "target_reached"
            break

    split_sel = sorted(selected)
    origins = split.origin[split_sel] if split_sel else np.zeros(0, dtype=np.int64)
    if len(set(int(o) for o in origins)) != len(split_sel):
        raise RuntimeError("internal error: one original vector selected twice")
    final_sigma = tuple(int(kept[o]) for o in origins)
    if split_sel:
        scaled = math.sqrt(mp / n) * y[np.asarray(split_sel)]
        cert = equivalence_certificate(scaled)
    else:
        cert = EquivalenceCertificate(0.0, float("inf"), float("inf"))
    return ExtractionReport(
        params=params,
        n=n,
        m_input=frame.size,
        m_split=mp,
        target_count=target_count,
        steps=tuple(steps),
        final_sigma=final_sigma,
        certificate=cert,
        stopped_reason=reason,
        wall_time_s=time.perf_counter() - t0,
    )


def recertify_extraction(frame: Frame, rep: ExtractionReport) -> EquivalenceCertificate:
    """Rebuild the split deterministically and recompute the certificate.

    Also re-derives ``final_sigma`` from the per-step selections and
    verifies it matches the report, so a tampered or stale report fails
    loudly instead of certifying the wrong vectors.
    """
    split, kept = _rebuild_split(frame, rep.params)
    split_sel = list(rep.selected_split)
    if not split_sel:
        return EquivalenceCertificate(0.0, float("inf"), float("inf"))
    if split_sel[-1] >= split.size:
        raise ValueError("report does not match the frame: split index out of range")
    origins = split.origin[np.asarray(split_sel)]
    derived = tuple(int(kept[o]) for o in origins)
    if derived != rep.final_sigma:
        raise ValueError("report does not match the frame: final_sigma mismatch")
    scaled = math.sqrt(split.size / frame.dim) * split.vectors[np.asarray(split_sel)]
    return equivalence_certificate(scaled)


@dataclass(frozen=True)
class RefinementResult:
    """Outcome of the two-stage near-isometric refinement.

    ``selection.indices`` index the original frame and are a subset of
    ``base_sigma``.  ``gram_norm`` is ||G - I|| over the base selection;
    ``max_offdiag`` and its certified bound ``offdiag_bound`` describe the
    refined Gram matrix.
    """

    selection: SubsetSelection
    certificate: EquivalenceCertificate
    base_sigma: tuple[int, ...]
    base_reason: str
    gram_norm: float
    max_offdiag: float
    offdiag_bound: float

    def to_dict(self) -> dict:
        return {
            "selection": self.selection.to_dict(),
            "certificate": self.certificate.to_dict(),
            "base_sigma": list(self.base_sigma),
            "base_reason": self.base_reason,
            "gram_norm": self.gram_norm,
            "max_offdiag": self.max_offdiag,
            "offdiag_bound": self.offdiag_bound,
        }


def refine_near_isometric(
    frame: Frame,
    epsilon: float,
    cfg: SelectionConfig | None = None,
    base_report: ExtractionReport | None = None,
) -> RefinementResult:
    """Select a sub-family whose Gram matrix is within reach of the identity.

    Stage one runs the extraction pipeline at budget 1/2, normalizes the
    selected vectors, and forms G - I.  Stage two applies
    :func:`~frame_extract.selection.kt_select` to the normalized defect,
    keeping at least a quarter-fraction of the stage-one survivors while
    driving the restricted norm down to c5 * sqrt(1 - epsilon) times
    ||G - I||, then prunes until every off-diagonal Gram entry is at most
    4 * (1 - epsilon).  Larger epsilon therefore keeps fewer vectors with
    a Gram matrix closer to the identity.  Pass ``base_report`` to reuse
    a previous stage-one run on the same frame.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    cfg = cfg or SelectionConfig()
    if base_report is None:
        base_params = ExtractionParams(epsilon=0.5, c1=cfg.c1, c2=cfg.c2)
        base_report = extract_orthogonal_subset(frame, base_params, None)
    split, _kept = _rebuild_split(frame, base_report.params)
    split_sel = np.asarray(base_report.selected_split, dtype=np.intp)
    if split_sel.size == 0:
        raise ValueError("base extraction selected nothing; the frame is degenerate")
    raw = split.vectors[split_sel]
    z = raw / np.linalg.norm(raw, axis=1)[:, None]
    n1 = z.shape[0]
    gram = gram_matrix(z)
    defect = gram - np.eye(n1)
    nrm = sigma_max(defect)

    target = cfg.c5 * math.sqrt(1.0 - epsilon)
    if n1 == 1 or nrm <= 1e-12:
        sel = SubsetSelection(
            base_report.final_sigma, nrm, "exhaustive", bound_met=True
        )
        cert = equivalence_certificate(z)
        return RefinementResult(
            selection=sel,
            certificate=cert,
            base_sigma=base_report.final_sigma,
            base_reason=base_report.stopped_reason,
            gram_norm=nrm,
            max_offdiag=0.0 if n1 == 1 else float(np.max(np.abs(defect))),
            offdiag_bound=nrm * target,
        )

    delta_eff = max(1.0 - epsilon, 1.0 / n1)
    kt = kt_select(defect / nrm, delta_eff, cfg, norm_target=target)
    pos = np.asarray(kt.indices, dtype=np.intp)

    # Trend stage: the operator-norm target alone leaves individual Gram
    # entries as large as the restricted norm, so enforce the entrywise
    # trend bound 4 * (1 - epsilon) by dropping, one at a time, an endpoint
    # of the largest remaining off-diagonal entry (the endpoint with the
    # larger off-diagonal row mass; ties drop the later one).
    trend_bound = 4.0 * (1.0 - epsilon)
    while pos.size > 1:
        sub = np.abs(defect[np.ix_(pos, pos)])
        np.fill_diagonal(sub, 0.0)
        if float(sub.max()) <= trend_bound:
            break
        i, j = divmod(int(np.argmax(sub)), pos.size)
        rows = sub.sum(axis=1)
        pos = np.delete(pos, i if rows[i] > rows[j] else j)

    sigma = tuple(base_report.final_sigma[p] for p in pos)
    cert = equivalence_certificate(z[pos])
    if pos.size >= 2:
        sub = np.abs(defect[np.ix_(pos, pos)])
        max_off = float(np.max(sub - np.diag(np.diag(sub))))
        restricted = sigma_max(defect[np.ix_(pos, pos)])
    else:
        max_off = 0.0
        restricted = 0.0
    sel = SubsetSelection(sigma, restricted, kt.method, bound_met=kt.bound_met)
    return RefinementResult(
        selection=sel,
        certificate=cert,
        base_sigma=base_report.final_sigma,
        base_reason=base_report.stopped_reason,
        gram_norm=nrm,
        max_offdiag=max_off,
        offdiag_bound=nrm * target,
    )
