"""Analysis report rendering.

Reports are built to be byte-stable: keys are sorted, findings arrive
pre-sorted, and nothing time- or host-dependent is embedded, so running
the same input twice yields identical files.  Batch runs additionally
produce a delimited summary and, unless disabled, a pair of overview
figures rendered next to it.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .analyses import ANALYSIS_NAMES, Finding
from .decompiler import DecompilerConfig


def build_report(findings: list[Finding], code: bytes, status: str,
                 config: DecompilerConfig) -> dict:
    return {
        "version": __version__,
        "config": asdict(config),
        "source": {
            "length": len(code),
            "sha256": hashlib.sha256(code).hexdigest(),
        },
        "status": status,
        "findings": [f.as_dict() for f in findings],
    }


def render_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def count_by_analysis(findings: list[Finding]) -> dict[str, int]:
    counts = {name: 0 for name in ANALYSIS_NAMES}
    for finding in findings:
        counts[finding.analysis] += 1
    return counts


def write_summary(path: str | Path, rows: list[dict]) -> None:
    """Write one line per analyzed source, sorted by source name."""
    header = ["source", "status", "total", *ANALYSIS_NAMES]
    lines = ["\t".join(header) + "\n"]
    for row in sorted(rows, key=lambda r: r["source"]):
        counts = row["counts"]
        total = sum(counts.values())
        cells = [row["source"], row["status"], str(total)]
        cells += [str(counts[name]) for name in ANALYSIS_NAMES]
        lines.append("\t".join(cells) + "\n")
    Path(path).write_text("".join(lines))


def render_figures(rows: list[dict], out_dir: str | Path) -> list[Path]:
    """Render batch overview charts; returns the written paths."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = Path(out_dir)
    written: list[Path] = []

    status_counts: dict[str, int] = {}
    for row in rows:
        status_counts[row["status"]] = status_counts.get(row["status"], 0) + 1
    statuses = sorted(status_counts)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(statuses, [status_counts[s] for s in statuses], color="#4c72b0")
    ax.set_ylabel("contracts")
    ax.set_title("analysis status")
    fig.tight_layout()
    path = out / "status_breakdown.png"
    fig.savefig(path, dpi=100, metadata={"Software": None})
    plt.close(fig)
    written.append(path)

    totals = {name: 0 for name in ANALYSIS_NAMES}
    for row in rows:
        for name in ANALYSIS_NAMES:
            totals[name] += row["counts"][name]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(list(ANALYSIS_NAMES), [totals[n] for n in ANALYSIS_NAMES],
           color="#dd8452")
    ax.set_ylabel("findings")
    ax.set_title("findings by analysis")
    ax.tick_params(axis="x", labelrotation=30)
    fig.tight_layout()
    path = out / "findings_by_analysis.png"
    fig.savefig(path, dpi=100, metadata={"Software": None})
    plt.close(fig)
    written.append(path)
    return written
