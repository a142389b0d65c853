"""Report records: canonical digests, CSV/table rendering and PNG summaries."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from collections import Counter

SCHEMA = "jrfl-report/1"

# keys whose values depend on the machine or the run, not on the configuration
VOLATILE_KEYS = frozenset({"timings", "elapsed", "workers", "out", "plot"})


def _strip_volatile(obj):
    if isinstance(obj, dict):
        return {k: _strip_volatile(v) for k, v in obj.items() if k not in VOLATILE_KEYS}
    if isinstance(obj, (list, tuple)):
        return [_strip_volatile(v) for v in obj]
    return obj


def canonical(record):
    return json.dumps(_strip_volatile(record), sort_keys=True, separators=(",", ":"))


def report_digest(records):
    """Hash of the canonical serialization of ``records`` (volatile keys removed)."""
    h = hashlib.blake2b(digest_size=16)
    for r in records:
        h.update(canonical(r).encode())
        h.update(b"\n")
    return h.hexdigest()


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (dict, list, tuple)):
        return json.dumps(v, sort_keys=True, separators=(",", ":"))
    return str(v)


def _columns(records):
    cols = []
    for r in records:
        for k in r:
            if k not in cols:
                cols.append(k)
    return cols


def to_jsonl(records):
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)


def to_csv(records):
    buf = io.StringIO()
    cols = _columns(records)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in records:
        w.writerow([_cell(r.get(c)) for c in cols])
    return buf.getvalue()


def to_table(records):
    cols = _columns(records)
    rows = [[_cell(r.get(c)) for c in cols] for r in records]
    widths = [max([len(c)] + [len(row[i]) for row in rows]) for i, c in enumerate(cols)]
    line = lambda cells: "  ".join(s.ljust(w) for s, w in zip(cells, widths)).rstrip()
    out = [line(cols), line(["-" * w for w in widths])]
    out.extend(line(row) for row in rows)
    return "\n".join(out) + "\n"


def render(header, records, summary, fmt):
    """Serialize a run: JSON lines carry everything, CSV and tables the trial records."""
    if fmt == "json":
        return to_jsonl([header, *records, summary])
    body = to_csv(records) if fmt == "csv" else to_table(records)
    head = f"# {header['schema']} {header['subcommand']}\n"
    tail = f"# report_digest={summary['report_digest']}\n"
    return head + body + tail


def _fraction(text):
    num, _, den = str(text).partition("/")
    return int(num) / int(den or 1)


def render_png(records, path, title=""):
    """Write a PNG summary: lhs against rhs when present, else sizes, else verdict counts."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 4))
    paired = [r for r in records if "lhs" in r and "rhs" in r]
    sized = [r for r in records if "size_symmetric" in r]
    if paired:
        xs = [_fraction(r["lhs"]) for r in paired]
        ys = [_fraction(r["rhs"]) for r in paired]
        ax.scatter(xs, ys, s=14)
        lo, hi = min(xs + ys), max(xs + ys)
        ax.plot([lo, hi], [lo, hi], linewidth=0.8)
        ax.set_xlabel("symmetric side")
        ax.set_ylabel("unitary side")
    elif sized:
        ax.scatter([r["val_disc"] for r in sized], [r["size_symmetric"] for r in sized], s=14, label="symmetric")
        ax.scatter([r["val_disc"] for r in sized], [r["size_unitary"] for r in sized], s=14, label="unitary")
        ax.set_xlabel("val Disc")
        ax.set_ylabel("fiber size")
        ax.legend()
    else:
        counts = Counter(r.get("verdict", "n/a") for r in records)
        ax.bar(list(counts), list(counts.values()))
        ax.set_ylabel("records")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return path
