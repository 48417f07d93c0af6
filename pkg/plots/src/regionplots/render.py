"""Render rate-region CSVs and verification reports into static figures.

This package consumes only the documented file formats (the RegionCurve CSV
with header ``R1,R2,kind,base`` and the verification-report JSON); it never
recomputes or reinterprets the numbers it draws, and it refuses malformed
inputs loudly rather than guessing.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

EXPECTED_HEADER = ["R1", "R2", "kind", "base"]
_KINDS = ("outer", "inner")

# pinned style so output bytes depend only on the inputs
matplotlib.rcParams["svg.hashsalt"] = "regionplots"


class RegionFormatError(ValueError):
    """The input file does not match the documented schema."""


@dataclass(frozen=True)
class RegionData:
    outer: tuple
    inner: tuple
    base: str


def read_region_csv(path) -> RegionData:
    """Parse and validate a RegionCurve CSV; raises RegionFormatError loudly."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise RegionFormatError(f"{path}: empty file")
    if rows[0] != EXPECTED_HEADER:
        raise RegionFormatError(
            f"{path}: header {rows[0]!r} does not match {EXPECTED_HEADER!r}"
        )
    if len(rows) == 1:
        raise RegionFormatError(f"{path}: no curve points")
    curves = {"outer": [], "inner": []}
    bases = set()
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 4:
            raise RegionFormatError(f"{path}:{lineno}: expected 4 columns, got {len(row)}")
        r1_s, r2_s, kind, base = row
        if kind not in _KINDS:
            raise RegionFormatError(f"{path}:{lineno}: unknown curve kind {kind!r}")
        try:
            r1, r2 = float(r1_s), float(r2_s)
        except ValueError:
            raise RegionFormatError(f"{path}:{lineno}: non-numeric rate value")
        curves[kind].append((r1, r2))
        bases.add(base)
    if len(bases) != 1:
        raise RegionFormatError(f"{path}: mixed or missing base tags {sorted(bases)}")
    return RegionData(tuple(curves["outer"]), tuple(curves["inner"]), bases.pop())


def corner_markers(data: RegionData) -> list[tuple[float, float, str]]:
    """Three corner markers derived purely from the curve endpoints.

    Upper corner: the outer-bound point at the largest R2.  Lower corner: the
    inner-curve point at the largest R1 (full private power).  The third
    marker pins the other end of the outer bound, at the smallest admissible
    R2.
    """
    markers = []
    if data.outer:
        upper = max(data.outer, key=lambda p: p[1])
        low_edge = min(data.outer, key=lambda p: p[1])
        markers.append((upper[0], upper[1], "upper corner"))
        markers.append((low_edge[0], low_edge[1], "outer-bound edge"))
    if data.inner:
        lower = max(data.inner, key=lambda p: p[0])
        markers.append((lower[0], lower[1], "lower corner"))
    return markers


def render_region(csv_path, out_path, title: str | None = None) -> dict:
    """Draw the outer and inner curves plus corner markers; returns a summary."""
    data = read_region_csv(csv_path)
    if not data.outer and not data.inner:
        raise RegionFormatError(f"{csv_path}: no drawable curves")
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    if data.outer:
        ax.plot(*zip(*data.outer), color="#1f77b4", lw=1.8, label="outer")
    if data.inner:
        ax.plot(*zip(*data.inner), color="#d62728", lw=1.8, ls="--", label="inner")
    markers = corner_markers(data)
    for r1, r2, label in markers:
        ax.plot([r1], [r2], marker="o", ms=6, color="black", zorder=5)
        ax.annotate(label, (r1, r2), textcoords="offset points", xytext=(6, 4), fontsize=8)
    ax.set_xlabel(f"R1 [{data.base}]")
    ax.set_ylabel(f"R2 [{data.base}]")
    if title:
        ax.set_title(title)
    ax.legend(loc="lower left")
    ax.grid(True, alpha=0.3)
    fig.savefig(out_path, metadata=_metadata_for(out_path))
    plt.close(fig)
    return {
        "outer_points": len(data.outer),
        "inner_points": len(data.inner),
        "markers": markers,
        "legend": [k for k in ("outer", "inner") if getattr(data, k)],
        "base": data.base,
    }


def render_verify_summary(report_paths, out_path) -> dict:
    """Bar chart of min_slack per verification family with a zero line."""
    families, slacks, colors = [], [], []
    failing = []
    for path in report_paths:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                report = json.load(fh)
            family = report["family"]
            slack = float(report["min_slack"])
            failures = report["failures"]
        except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise RegionFormatError(f"{path}: not a verification report ({exc})")
        families.append(family)
        slacks.append(slack)
        bad = bool(failures)
        colors.append("#d62728" if bad else "#2ca02c")
        if bad:
            failing.append(family)
    if not families:
        raise RegionFormatError("no verification reports given")
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    ax.bar(range(len(families)), slacks, color=colors)
    ax.axhline(0.0, color="black", lw=1.0)
    ax.set_xticks(range(len(families)))
    ax.set_xticklabels(families, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("min slack [nats]")
    fig.tight_layout()
    fig.savefig(out_path, metadata=_metadata_for(out_path))
    plt.close(fig)
    return {"families": families, "min_slacks": slacks, "failing": failing}


def _metadata_for(out_path) -> dict | None:
    # strip the timestamp so identical inputs give identical bytes
    if str(out_path).endswith(".svg"):
        return {"Date": None}
    return None
