"""Certified extraction of near-orthogonal subsequences from frames.

The package turns redundant spanning systems (frames) into
well-conditioned almost-orthonormal sub-systems, with every claim backed
by a computed singular-value certificate:

* :mod:`frame_extract.frame_core` -- frame bounds, tightening, and
  equivalence certificates against orthonormal bases;
* :mod:`frame_extract.selection` -- exhaustive and greedy subset
  selectors for three singular-value objectives;
* :mod:`frame_extract.extraction` -- the split/project/select pipeline
  extracting more than (1 - epsilon) * n well-conditioned vectors, plus
  the near-isometric refinement;
* :mod:`frame_extract.infinite_frames` -- greedy subsequences of
  streamed (unbounded) frames with a stability certificate;
* :mod:`frame_extract.counterexamples` -- structured frames showing the
  limits: no bracketed basis, and conditioning that degrades with size;
* :mod:`frame_extract.cli` -- the ``frame-extract`` command.
"""

from .frame_core import (
    EquivalenceCertificate,
    Frame,
    FrameBounds,
    NotAFrameError,
    dimension_identity,
    equivalence_certificate,
    frame_bounds,
    frame_from_projection,
    gram_matrix,
    is_tight,
    row_orthonormal_form,
    tighten,
)
from .extraction import (
    ExtractionParams,
    ExtractionReport,
    RefinementResult,
    SplitFrame,
    StepRecord,
    extract_orthogonal_subset,
    recertify_extraction,
    refine_near_isometric,
    split_equalize,
    split_plan,
)
from .frameio import FrameFileError, read_frame, write_frame
from .infinite_frames import (
    FrameSequence,
    GreedySelection,
    StabilityResult,
    greedy_subsequence,
    stability_check,
    tail_certificate,
    tail_index,
    theta,
)
from .counterexamples import (
    BlockLayout,
    BracketDiagnostics,
    CompletenessReport,
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
from .selection import (
    SelectionConfig,
    SubsetSelection,
    bt_select,
    brute_force_subset_oracle,
    kt_select,
    lunin_select,
)

__version__ = "0.1.0"

__all__ = [
    "Frame",
    "FrameBounds",
    "EquivalenceCertificate",
    "NotAFrameError",
    "frame_bounds",
    "is_tight",
    "tighten",
    "frame_from_projection",
    "row_orthonormal_form",
    "dimension_identity",
    "gram_matrix",
    "equivalence_certificate",
    "FrameFileError",
    "read_frame",
    "write_frame",
    "SelectionConfig",
    "SubsetSelection",
    "lunin_select",
    "bt_select",
    "kt_select",
    "brute_force_subset_oracle",
    "ExtractionParams",
    "ExtractionReport",
    "RefinementResult",
    "SplitFrame",
    "StepRecord",
    "split_plan",
    "split_equalize",
    "extract_orthogonal_subset",
    "recertify_extraction",
    "refine_near_isometric",
    "FrameSequence",
    "GreedySelection",
    "StabilityResult",
    "greedy_subsequence",
    "stability_check",
    "tail_certificate",
    "tail_index",
    "theta",
    "BlockLayout",
    "BracketDiagnostics",
    "CompletenessReport",
    "block_layout",
    "either_or_basis",
    "bracketless_frame",
    "basis_subfamily",
    "completeness_check",
    "bracket_diagnostics",
    "midpoint_bracket",
    "casazza_christensen_frame",
    "cc_partial_sum_sq",
    "__version__",
]
