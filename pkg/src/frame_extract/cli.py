"""Command-line front end.

Subcommands: analyze, extract, greedy, counterexample, selftest.  Every
report is serialized canonically (fixed key order, 17-significant-digit
floats), so identical inputs and flags produce byte-identical output.
Before anything is written, each command re-validates its result with an
independent recomputation and refuses to emit a report that fails it.

Exit codes: 0 ok; 2 usage error or malformed input file; 3 input is not a
valid frame; 4 extraction stopped on the step budget.  The environment
variable FRAME_EXTRACT_TOL (default 1e-8) overrides the tolerance used
for tightness flags and the pre-write re-validation comparisons.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .counterexamples import (
    basis_subfamily,
    bracketless_frame,
    bracket_diagnostics,
    casazza_christensen_frame,
    cc_partial_sum_sq,
    completeness_check,
    midpoint_bracket,
)
from .extraction import ExtractionParams, extract_orthogonal_subset, recertify_extraction
from .frame_core import (
    NotAFrameError,
    dimension_identity,
    equivalence_certificate,
    frame_bounds,
    is_tight,
    tighten,
)
from .frameio import FrameFileError, read_frame, write_frame
from .infinite_frames import (
    FrameSequence,
    greedy_subsequence,
    stability_check,
    tail_certificate,
    tail_index,
)
from .instances import random_tight_frame, random_unit_vectors
from .report import (
    SCHEMA,
    dumps_canonical,
    render_diagnostics_figure,
    render_extraction_figure,
    render_greedy_figure,
    render_partial_sum_figure,
    write_csv,
    write_json,
)
from .selection import (
    SelectionConfig,
    bt_select,
    brute_force_subset_oracle,
    lunin_select,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INVALID_FRAME = 3
EXIT_BUDGET = 4


def _tolerance() -> float:
    raw = os.environ.get("FRAME_EXTRACT_TOL")
    if raw is None:
        return 1e-8
    try:
        tol = float(raw)
    except ValueError:
        raise FrameFileError(f"FRAME_EXTRACT_TOL is not a number: {raw!r}")
    if tol <= 0:
        raise FrameFileError(f"FRAME_EXTRACT_TOL must be positive, got {tol}")
    return tol


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {value}")
    return value


def _emit(args, payload: dict) -> None:
    if getattr(args, "output", None):
        write_json(args.output, payload)
    else:
        sys.stdout.write(dumps_canonical(payload) + "\n")


def _load_frame(path: str):
    frame = read_frame(path)
    if not frame.is_valid():
        raise NotAFrameError(f"{path}: vectors do not span R^{frame.dim} stably")
    return frame


def cmd_analyze(args) -> int:
    tol = _tolerance()
    frame = read_frame(args.frame)
    bounds = frame_bounds(frame)
    # re-validation: the synthesis-matrix route must agree with the
    # frame-operator route before anything is reported
    s = np.linalg.svd(frame.synthesis, compute_uv=False)
    alt_upper = float(s[0]) ** 2
    alt_lower = 0.0 if frame.size < frame.dim else float(s[-1]) ** 2
    scale = max(bounds.upper, 1.0)
    if abs(alt_upper - bounds.upper) > tol * scale or abs(alt_lower - bounds.lower) > tol * scale:
        raise RuntimeError("re-validation failed: frame bound routes disagree")

    sum_sq = float(np.sum(frame.norms() ** 2))
    tight_exact = abs(bounds.lower - 1.0) <= tol and abs(bounds.upper - 1.0) <= tol
    payload = {
        "schema": SCHEMA,
        "command": "analyze",
        "input": args.frame,
        "n": frame.dim,
        "m": frame.size,
        "A": bounds.lower,
        "B": bounds.upper,
        "frame_constant": bounds.frame_constant,
        "valid": bounds.is_frame,
        "tight": bounds.tight_within(tol),
        "tight_unit": tight_exact,
        "sum_sq_norms": sum_sq,
        "dimension_identity": dimension_identity(frame) if tight_exact else None,
    }
    _emit(args, payload)
    return EXIT_OK


def cmd_extract(args) -> int:
    tol = _tolerance()
    if args.random:
        if args.n is None or args.m is None:
            raise FrameFileError("--random requires --n and --m")
        frame = random_tight_frame(args.n, args.m, args.seed)
        source = f"random(n={args.n}, m={args.m}, seed={args.seed})"
    else:
        if args.frame is None:
            raise FrameFileError("give a frame file or --random")
        frame = _load_frame(args.frame)
        source = args.frame
    try:
        params = ExtractionParams(
            epsilon=args.epsilon,
            nu=args.nu,
            c1=args.c1,
            c2=args.c2,
            max_steps=args.max_steps,
        )
    except ValueError as exc:
        raise FrameFileError(str(exc))

    rep = extract_orthogonal_subset(frame, params)
    again = recertify_extraction(frame, rep)
    if np.isfinite(rep.certificate.constant) != np.isfinite(again.constant) or (
        np.isfinite(rep.certificate.constant)
        and abs(again.constant - rep.certificate.constant)
        > max(1e-10, tol * 1e-2) * max(1.0, rep.certificate.constant)
    ):
        raise RuntimeError("re-certification failed: certificate does not reproduce")

    payload = {
        "schema": SCHEMA,
        "command": "extract",
        "input": source,
        "n": rep.n,
        "m": rep.m_input,
        "m_split": rep.m_split,
        "target_count": rep.target_count,
        "selected_count": len(rep.final_sigma),
        "report": rep.to_report_dict(include_timing=args.timing),
    }
    _emit(args, payload)
    if args.figures:
        base = os.path.splitext(args.output)[0] if args.output else "extract"
        render_extraction_figure(
            {"steps": payload["report"]["steps"], "target_count": rep.target_count},
            base + ".png",
        )
    return EXIT_OK if rep.target_reached else EXIT_BUDGET


def cmd_greedy(args) -> int:
    tol = _tolerance()
    if args.generator == "file":
        if args.frame_file is None:
            raise FrameFileError("--generator file requires --frame-file")
        seq = FrameSequence.from_file(args.frame_file, cyclic=args.cyclic)
    else:
        seq = FrameSequence.projected_basis(args.ambient, args.rank, seed=args.seed)

    sel = greedy_subsequence(seq, args.terms, args.scan_limit)
    if sel.size == 0:
        raise NotAFrameError("stream contained no nonzero vectors in the scan window")
    stab = stability_check(sel)

    # re-validation: certification must survive a serialize/parse round trip
    from .infinite_frames import GreedySelection

    again = stability_check(GreedySelection.from_dict(sel.to_dict()))
    if (
        again.ok != stab.ok
        or abs(again.certificate.constant - stab.certificate.constant) > 1e-12
    ):
        raise RuntimeError("re-validation failed: selection round trip changed the certificate")

    k0, prod = tail_index(sel, 0.5)
    payload = {
        "schema": SCHEMA,
        "command": "greedy",
        "generator": seq.description,
        "terms_requested": args.terms,
        "scan_limit": args.scan_limit,
        "selection": sel.to_dict(),
        "stability": {
            "ok": stab.ok,
            "violations": [list(p) for p in stab.violations],
            "certificate": stab.certificate.to_dict(),
        },
        "tail_index_half": k0,
        "tail_product_half": prod,
        "tail_certificate_from_5": (
            tail_certificate(sel, 4).to_dict() if sel.size >= 5 else None
        ),
    }
    _emit(args, payload)
    if args.figures:
        base = os.path.splitext(args.output)[0] if args.output else "greedy"
        render_greedy_figure({"distances": list(sel.distances)}, base + ".png")
    del tol
    return EXIT_OK


def _counterexample_bracketless(args, prefix: str) -> dict:
    frame, layout = bracketless_frame(args.blocks)
    # re-validation: the frame operator must be exactly diagonal with
    # entries in {1, 2} before any file is written
    op = frame.frame_operator()
    off = op - np.diag(np.diag(op))
    diag = np.diag(op)
    if np.max(np.abs(off)) > 1e-12 or not np.all(
        (np.abs(diag - 1.0) < 1e-9) | (np.abs(diag - 2.0) < 1e-9)
    ):
        raise RuntimeError("re-validation failed: frame operator is not the expected diagonal")

    frame_path = prefix + ".frame.json"
    write_frame(frame, frame_path)
    summary = {
        "kind": "bracketless",
        "blocks": args.blocks,
        "ambient_dim": layout.ambient_dim,
        "vectors": layout.total_vectors,
        "frame_file": frame_path,
    }
    if args.diagnose:
        # diagnostics run over the canonical basis subfamily: with the
        # full overcomplete family every cut has intersecting head and
        # tail spans and the projection bound is infinite for every block
        selected = list(basis_subfamily(layout))
        if not completeness_check(frame, layout, selected).complete:
            raise RuntimeError("re-validation failed: basis subfamily does not span")
        rows = []
        for n in range(2, layout.n_blocks - 1):
            j0 = midpoint_bracket(layout, n)
            diag_n = bracket_diagnostics(frame, layout, selected, n, j0)
            rows.append(diag_n.to_dict())
        json_path = prefix + ".diagnostics.json"
        csv_path = prefix + ".diagnostics.csv"
        png_path = prefix + ".diagnostics.png"
        write_json(
            json_path,
            {
                "schema": SCHEMA,
                "command": "counterexample",
                "selection": selected,
                "rows": rows,
            },
        )
        write_csv(
            csv_path,
            ["block", "bracket_point", "dist_head", "dist_tail", "projection_norm_lb"],
            [
                (r["block"], r["bracket_point"], r["dist_head"], r["dist_tail"], r["projection_norm_lb"])
                for r in rows
            ],
        )
        render_diagnostics_figure(rows, png_path)
        summary["diagnostics"] = {"json": json_path, "csv": csv_path, "figure": png_path}
        summary["max_projection_norm_lb"] = max(r["projection_norm_lb"] for r in rows)
    return summary


def _counterexample_cc(args, prefix: str) -> dict:
    tol = _tolerance()
    n = args.n
    frame = casazza_christensen_frame(n)
    if not is_tight(frame, min(tol, 1e-10)):
        raise RuntimeError("re-validation failed: construction is not tight")
    # re-validation: measured partial sums must match the closed form
    sums = np.cumsum(frame.vectors[:n], axis=0)
    measured = np.sum(sums * sums, axis=1)
    exact = np.array([float(cc_partial_sum_sq(n, k)) for k in range(1, n + 1)])
    if np.max(np.abs(measured - exact)) > 1e-9:
        raise RuntimeError("re-validation failed: partial sums do not match the closed form")

    frame_path = prefix + ".frame.json"
    write_frame(frame, frame_path)
    summary = {
        "kind": "cc",
        "n": n,
        "vectors": frame.size,
        "frame_file": frame_path,
    }
    if args.diagnose:
        eps = args.epsilon
        k_mark = max(1, int(np.ceil((1.0 - eps) * n)) - 1)
        rows = [
            {
                "k": k,
                "partial_sum_sq": float(cc_partial_sum_sq(n, k)),
                "bound_at_marked_k": 2.0 * (eps * n + 1.0) if k == k_mark else None,
            }
            for k in range(1, n + 1)
        ]
        csv_rows = [
            (r["k"], r["partial_sum_sq"], "" if r["bound_at_marked_k"] is None else r["bound_at_marked_k"])
            for r in rows
        ]
        json_path = prefix + ".partial_sums.json"
        csv_path = prefix + ".partial_sums.csv"
        png_path = prefix + ".partial_sums.png"
        head = equivalence_certificate(frame.vectors[: n - 1])
        write_json(
            json_path,
            {
                "schema": SCHEMA,
                "command": "counterexample",
                "epsilon": eps,
                "marked_k": k_mark,
                "rows": rows,
                "head_certificate": head.to_dict(),
            },
        )
        write_csv(csv_path, ["k", "partial_sum_sq", "bound_at_marked_k"], csv_rows)
        render_partial_sum_figure(rows, png_path)
        summary["diagnostics"] = {"json": json_path, "csv": csv_path, "figure": png_path}
        summary["head_constant"] = head.constant
    return summary


def cmd_counterexample(args) -> int:
    if args.kind == "bracketless":
        if args.blocks is None:
            raise FrameFileError("--kind bracketless requires --blocks")
        prefix = args.out_prefix or f"bracketless_{args.blocks}"
        summary = _counterexample_bracketless(args, prefix)
    else:
        if args.n is None:
            raise FrameFileError("--kind cc requires --n")
        prefix = args.out_prefix or f"cc_{args.n}"
        summary = _counterexample_cc(args, prefix)
    payload = {"schema": SCHEMA, "command": "counterexample", **summary}
    sys.stdout.write(dumps_canonical(payload) + "\n")
    return EXIT_OK


def _selftest_lunin(seeds: int) -> dict:
    rng = np.random.default_rng(12345)
    worst = 0.0
    greedy_cfg = SelectionConfig(exhaustive_limit=1)
    for _ in range(seeds):
        n = int(rng.integers(2, 5))
        m = int(rng.integers(2 * n, 13))
        vecs = random_unit_vectors(m, n, int(rng.integers(0, 2**31)))
        greedy = lunin_select(vecs, n, greedy_cfg)
        exact = brute_force_subset_oracle(vecs, n, "min_sigma_max")
        worst = max(worst, greedy.achieved_value / exact.achieved_value)
    return {"instances": seeds, "worst_ratio": worst, "ok": worst <= 2.0}


def _selftest_bt(seeds: int) -> dict:
    rng = np.random.default_rng(54321)
    greedy_cfg = SelectionConfig(exhaustive_limit=1)
    within = 0
    for _ in range(seeds):
        n = int(rng.integers(2, 5))
        m = int(rng.integers(2 * n, 13))
        vecs = random_unit_vectors(m, n, int(rng.integers(0, 2**31)))
        greedy = bt_select(vecs, 0.3, greedy_cfg)
        exact = bt_select(vecs, 0.3, SelectionConfig())
        if exact.size - greedy.size <= 1:
            within += 1
    return {"instances": seeds, "within_one": within, "ok": within >= int(0.9 * seeds)}


def _selftest_scaled_h(seeds: int) -> dict:
    cfg = SelectionConfig()
    hits = 0
    for seed in range(seeds):
        n, m = 3, 9
        frame = random_tight_frame(n, m, 1000 + seed)
        sel = lunin_select(frame.vectors, n, SelectionConfig(exhaustive_limit=1))
        h = float(np.sqrt(m / n)) * sel.achieved_value
        if h <= cfg.c1:
            hits += 1
    return {"instances": seeds, "within_c1": hits, "ok": hits >= int(0.95 * seeds)}


def cmd_selftest(args) -> int:
    suites = {
        "lunin_vs_oracle": _selftest_lunin(args.seeds),
        "bt_vs_oracle": _selftest_bt(args.seeds),
        "scaled_h_calibration": _selftest_scaled_h(args.seeds),
    }
    all_ok = all(s["ok"] for s in suites.values())
    for name, result in suites.items():
        line = "PASS" if result["ok"] else "FAIL"
        detail = ", ".join(f"{k}={v}" for k, v in result.items() if k != "ok")
        sys.stdout.write(f"{line} {name}: {detail}\n")
    payload = {"schema": SCHEMA, "command": "selftest", "suites": suites, "ok": all_ok}
    if args.output:
        write_json(args.output, payload)
    else:
        sys.stdout.write(dumps_canonical(payload) + "\n")
    return EXIT_OK if all_ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="frame-extract",
        description="Certified near-orthogonal subset extraction from frames.",
        epilog="FRAME_EXTRACT_TOL overrides the default 1e-8 check tolerance.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="frame bounds, tightness, dimension identity")
    p.add_argument("frame", help="frame file (.json or CSV)")
    p.add_argument("-o", "--output", help="write the JSON report here (default stdout)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("extract", help="extract a near-orthogonal subset")
    p.add_argument("frame", nargs="?", help="frame file (.json or CSV)")
    p.add_argument("--random", action="store_true", help="use a seeded random tight frame")
    p.add_argument("--n", type=_positive_int, help="ambient dimension for --random")
    p.add_argument("--m", type=_positive_int, help="vector count for --random")
    p.add_argument("--seed", type=int, default=0, help="seed for --random (default 0)")
    p.add_argument("--epsilon", type=float, required=True, help="selection budget in (0,1)")
    p.add_argument("--nu", type=float, default=0.05, help="splitting slack (default 0.05)")
    p.add_argument("--c1", type=float, default=2.0, help="norm-selection calibration")
    p.add_argument("--c2", type=float, default=0.1, help="invertibility calibration")
    p.add_argument("--max-steps", type=_positive_int, default=None, help="step budget override")
    p.add_argument("--timing", action="store_true", help="include wall time in the report")
    p.add_argument("--figures", action="store_true", help="render a step-growth figure")
    p.add_argument("-o", "--output", help="write the JSON report here (default stdout)")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("greedy", help="greedy subsequence of a streamed frame")
    p.add_argument(
        "--generator",
        choices=["file", "projected-basis"],
        required=True,
        help="stream source",
    )
    p.add_argument("--frame-file", help="frame file for --generator file")
    p.add_argument("--cyclic", action="store_true", help="repeat the file stream")
    p.add_argument("--ambient", type=_positive_int, default=200, help="ambient dim")
    p.add_argument("--rank", type=_positive_int, default=40, help="projection rank")
    p.add_argument("--seed", type=int, default=0, help="generator seed (default 0)")
    p.add_argument("--terms", type=_positive_int, required=True, help="terms to select")
    p.add_argument(
        "--scan-limit",
        type=_positive_int,
        default=10000,
        help="max stream elements to consume (default 10000)",
    )
    p.add_argument("--figures", action="store_true", help="render a distance figure")
    p.add_argument("-o", "--output", help="write the JSON report here (default stdout)")
    p.set_defaults(func=cmd_greedy)

    p = sub.add_parser("counterexample", help="construct the structured frames")
    p.add_argument("--kind", choices=["bracketless", "cc"], required=True)
    p.add_argument("--blocks", type=_positive_int, help="block count for bracketless")
    p.add_argument("--n", type=_positive_int, help="dimension for cc")
    p.add_argument("--epsilon", type=float, default=0.25, help="budget for cc diagnostics")
    p.add_argument("--diagnose", action="store_true", help="emit diagnostics CSV/JSON/PNG")
    p.add_argument("--out-prefix", help="prefix for generated files")
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("selftest", help="greedy-vs-oracle comparison suites")
    p.add_argument("--seeds", type=_positive_int, default=25, help="instances per suite")
    p.add_argument("-o", "--output", help="write the JSON summary here (default stdout)")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except FrameFileError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except NotAFrameError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID_FRAME
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
