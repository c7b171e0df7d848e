"""
Construction Summary Reports
Builds a plain-text report from a CountingSummary and, when available, the
verified lambda-profile and block provenance of the assembled design.
"""

import math
from pathlib import Path

import pandas as pd

from constructions.engine import BTYPE_NAMES

COUNT_COLUMNS = ["h", "half", "k_left", "k_right", "b_left", "b_right", "u_left", "u_right",
                 "lam_left", "lam_right", "lam2_left", "lam2_right", "z", "w"]


def counts_frame(summary):
    """One row per ingredient pair with its b, u, lambda, lambda_2, z and w."""
    rows = [{col: getattr(p, col) for col in COUNT_COLUMNS} for p in summary.pairs]
    df = pd.DataFrame(rows, columns=COUNT_COLUMNS)
    df["theta_part"] = [p.theta_part for p in summary.pairs]
    df["delta_part"] = [p.delta_part for p in summary.pairs]
    df["cells"] = [p.cells for p in summary.pairs]
    return df


def summary_report(summary, profile=None, provenance=None, title=None):
    theta_name = "Theta*" if summary.mode == "II" else "Theta"
    delta_name = "Delta*" if summary.mode == "II" else "Delta"

    report = []
    report.append("=" * 70)
    report.append((title or "CONSTRUCTION SUMMARY REPORT").upper())
    report.append("=" * 70)
    report.append("")

    report.append("📊 COUNTS")
    report.append("-" * 70)
    report.append(f"Construction: mode {summary.mode}, v={summary.v} -> {2 * summary.v} points, k={summary.k}")
    report.append(f"{theta_name}: {summary.theta}")
    report.append(f"{delta_name}: {summary.delta}")
    report.append(f"Lambda (filler index): {summary.lam}")
    if summary.lam >= 0 and (summary.theta * math.comb(2 * summary.v, 3)) % math.comb(summary.k, 3) == 0:
        report.append(f"Blocks: {summary.expected_blocks} ({summary.cross_blocks} cross blocks)")
    report.append("")

    report.append("🧩 INGREDIENT PAIRS")
    report.append("-" * 70)
    report.append(counts_frame(summary).to_string(index=False))
    report.append("")

    if profile is not None:
        report.append("✅ VERIFIED PROFILE")
        report.append("-" * 70)
        report.append(f"Design: {profile.describe()}")
        for s in range(profile.t + 1):
            value = profile.lambdas[s] if profile.is_design[s] else "not constant"
            report.append(f"  lambda_{s}: {value}")
        report.append("")

    if provenance is not None and len(provenance):
        report.append("🔖 BLOCK TYPES")
        report.append("-" * 70)
        by_type = provenance["btype"].map(BTYPE_NAMES).value_counts().sort_index()
        for name, count in by_type.items():
            report.append(f"  type {name}: {count} blocks")
        cells = provenance[provenance["h"] > 0].groupby("h")[["i", "j"]].apply(
            lambda g: len(g.drop_duplicates()))
        for h, count in cells.items():
            report.append(f"  pair {h}: {count} cells")
        report.append("")

    return "\n".join(report)


class DesignReport:
    def __init__(self, output_dir="output"):
        self.output_dir = Path(output_dir)

    def save(self, summary, profile=None, provenance=None, title=None, filename="summary_report.txt"):
        """Write the report to <output_dir>/<filename> and return (path, text)."""
        self.output_dir.mkdir(parents=True, exist_ok=True)
        text = summary_report(summary, profile, provenance, title)
        path = self.output_dir / filename
        with open(path, "w", encoding='utf-8') as f:
            f.write(text)
        return path, text
