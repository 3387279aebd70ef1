"""Canonical report serialization (JSON, CSV) and figure rendering.

Reports are serialized deterministically: fixed key order (insertion
order of the dicts built by the callers), floats printed with 17
significant digits, two-space indentation, scalar lists kept on one line.
Repeating a run with the same inputs therefore produces byte-identical
files.  Non-finite floats, which valid JSON cannot carry as numbers, are
emitted as the strings "inf", "-inf" and "nan".

Figure rendering uses matplotlib's file-only Agg backend and is imported
lazily so library users who never render pay no import cost.
"""

from __future__ import annotations

import json
import math

import numpy as np

SCHEMA = "frame-extract/1"

__all__ = [
    "SCHEMA",
    "format_float",
    "dumps_canonical",
    "write_json",
    "write_csv",
    "render_extraction_figure",
    "render_greedy_figure",
    "render_diagnostics_figure",
    "render_partial_sum_figure",
]


def format_float(x: float) -> str:
    """17-significant-digit decimal form; bare inf/-inf/nan for non-finite."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _scalar(obj) -> str | None:
    """Canonical token for a JSON scalar, or None if obj is a container."""
    if obj is None:
        return "null"
    if isinstance(obj, bool) or isinstance(obj, np.bool_):
        return "true" if obj else "false"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return format_float(x)
        return json.dumps(format_float(x))
    return None


def _emit(obj, lines: list[str], indent: int, prefix: str, suffix: str) -> None:
    pad = "  " * indent
    token = _scalar(obj)
    if token is not None:
        lines.append(pad + prefix + token + suffix)
        return
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            lines.append(pad + prefix + "{}" + suffix)
            return
        lines.append(pad + prefix + "{")
        items = list(obj.items())
        for i, (key, value) in enumerate(items):
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be strings, got {key!r}")
            comma = "," if i < len(items) - 1 else ""
            _emit(value, lines, indent + 1, json.dumps(key) + ": ", comma)
        lines.append(pad + "}" + suffix)
        return
    if isinstance(obj, (list, tuple)):
        seq = list(obj)
        if not seq:
            lines.append(pad + prefix + "[]" + suffix)
            return
        tokens = [_scalar(v) for v in seq]
        if all(t is not None for t in tokens):
            lines.append(pad + prefix + "[" + ", ".join(tokens) + "]" + suffix)
            return
        lines.append(pad + prefix + "[")
        for i, value in enumerate(seq):
            comma = "," if i < len(seq) - 1 else ""
            _emit(value, lines, indent + 1, "", comma)
        lines.append(pad + "]" + suffix)
        return
    raise TypeError(f"cannot serialize object of type {type(obj).__name__}")


def dumps_canonical(obj) -> str:
    """Deterministic JSON text for ``obj`` (no trailing newline)."""
    lines: list[str] = []
    _emit(obj, lines, 0, "", "")
    return "\n".join(lines)


def write_json(path: str, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_canonical(obj))
        fh.write("\n")


def _csv_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, bool) or isinstance(value, np.bool_):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(float(value))
    raise TypeError(f"cannot write CSV cell of type {type(value).__name__}")


def write_csv(path: str, header: list[str], rows) -> None:
    """Delimited output with the same 17-digit float convention as JSON."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_csv_cell(v) for v in row) + "\n")


def _axes(title, xlabel, ylabel):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    return fig, ax


def _save(fig, path: str) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    import matplotlib.pyplot as plt

    plt.close(fig)


def render_extraction_figure(report_dict: dict, path: str) -> None:
    """Per-step growth of the selected set against the global target."""
    steps = report_dict.get("steps", [])
    ks = [s["k"] for s in steps]
    sizes = np.cumsum([len(s["sigma_k"]) for s in steps])
    taus = [s["tau_size"] for s in steps]
    fig, ax = _axes("subset growth per step", "step k", "count")
    ax.plot(ks, sizes, "o-", label="selected so far")
    ax.plot(ks, taus, "s--", label="candidate pool size")
    target = report_dict.get("target_count")
    if target is not None:
        ax.axhline(target, color="k", lw=0.8, ls=":", label="target")
    ax.legend()
    _save(fig, path)


def render_greedy_figure(report_dict: dict, path: str) -> None:
    """Span distances of the accepted terms against the acceptance thresholds."""
    dists = report_dict.get("distances", [])
    ks = list(range(1, len(dists) + 1))
    thresholds = [1.0 - 2.0 ** (-2 * k) for k in ks]
    fig, ax = _axes("greedy span distances", "term k", "distance to previous span")
    ax.plot(ks, dists, "o-", label="accepted distance")
    ax.plot(ks, thresholds, "k:", label="threshold 1 - 2^(-2k)")
    ax.set_ylim(min(0.7, min(dists, default=1.0)) - 0.02, 1.01)
    ax.legend()
    _save(fig, path)


def render_diagnostics_figure(rows: list[dict], path: str) -> None:
    """Growth of the certified projection-norm lower bound across blocks."""
    ns = [r["block"] for r in rows]
    lbs = [r["projection_norm_lb"] for r in rows]
    fig, ax = _axes("partition obstruction growth", "block size n", "projection norm lower bound")
    ax.plot(ns, lbs, "o-", label="1 / sin(min principal angle)")
    ax.plot(ns, [math.sqrt(n) / 8.0 for n in ns], "k:", label="sqrt(n) / 8")
    ax.legend()
    _save(fig, path)


def render_partial_sum_figure(rows: list[dict], path: str) -> None:
    """Partial-sum norms of the near-dependent frame, with the parabola they trace."""
    ks = [r["k"] for r in rows]
    vals = [r["partial_sum_sq"] for r in rows]
    fig, ax = _axes("partial sums of the first n vectors", "k", "squared norm of the k-term sum")
    ax.plot(ks, vals, "o-")
    _save(fig, path)
