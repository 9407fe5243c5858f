"""Figure rendering for sweep, sampling, and validation outputs.

Figures are derived from the same row dictionaries that go into the CSV
files and are written next to them; the CSV stays the canonical output.
"""
from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

_COLORS = {"none": "tab:green", "pmc": "tab:red", "lss": "tab:orange",
           "neg": "tab:blue"}


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def sweep_figures(rows: Sequence[Mapping], out_base: Path) -> list[Path]:
    """Scatter of run time vs safety probability, plus transitions per grid."""
    ok = [r for r in rows if r.get("status") == "ok"]
    paths = []

    fig, ax = plt.subplots(figsize=(5.5, 4))
    for trim in sorted({r["trim"] for r in ok}):
        pts = [r for r in ok if r["trim"] == trim]
        ax.scatter([float(r["wall_time_s"]) for r in pts],
                   [float(r["probability"]) for r in pts],
                   label=f"trim={trim}", color=_COLORS.get(trim), alpha=0.8)
    ax.set_xlabel("check wall time [s]")
    ax.set_ylabel("min safety probability")
    ax.legend()
    ax.grid(True, alpha=0.3)
    paths.append(_save(fig, out_base.with_name(out_base.name + "_prob_vs_time.png")))

    fig, ax = plt.subplots(figsize=(5.5, 4))
    grids = sorted({r["grid"] for r in ok})
    for trim in sorted({r["trim"] for r in ok}):
        ys = []
        for g in grids:
            pts = [int(r["transitions"]) for r in ok if r["trim"] == trim and r["grid"] == g]
            ys.append(sum(pts) / len(pts) if pts else float("nan"))
        ax.plot(range(len(grids)), ys, marker="o", label=f"trim={trim}",
                color=_COLORS.get(trim))
    ax.set_xticks(range(len(grids)), grids, rotation=20)
    ax.set_xlabel("grid widths")
    ax.set_ylabel("transitions")
    ax.legend()
    ax.grid(True, alpha=0.3)
    paths.append(_save(fig, out_base.with_name(out_base.name + "_transitions.png")))
    return paths


def lss_figures(records: Sequence[Mapping], out_base: Path) -> list[Path]:
    """Per-trial sampled minima with the mean marked."""
    fig, ax = plt.subplots(figsize=(5.5, 4))
    trials = [r for r in records if r.get("trial") != "mean"]
    xs = [int(r["trial"]) for r in trials]
    ys = [float(r["minimum"]) for r in trials]
    ax.plot(xs, ys, "o-", label="per-trial minimum")
    if ys:
        mean = sum(ys) / len(ys)
        ax.axhline(mean, color="tab:red", linestyle="--", label=f"mean {mean:.4f}")
    ax.set_xlabel("trial")
    ax.set_ylabel("sampled minimum safety probability")
    ax.legend()
    ax.grid(True, alpha=0.3)
    return [_save(fig, out_base.with_name(out_base.name + "_trials.png"))]


def mos_figures(rows: Sequence[Mapping], out_base: Path) -> list[Path]:
    """Held-proportion bar per trimmed state pair."""
    fig, ax = plt.subplots(figsize=(6.5, 4))
    names = [f"{r.get('s1_name', r['s1'])}\n>= {r.get('s2_name', r['s2'])}" for r in rows]
    ax.bar(range(len(rows)), [float(r["p"]) for r in rows], color="tab:blue",
           label="all schedulers")
    ax.plot(range(len(rows)), [float(r["p_min_schedulers"]) for r in rows], "r_",
            markersize=18, label="min schedulers")
    ax.set_xticks(range(len(rows)), names, fontsize=7, rotation=30)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("proportion of schedulers holding")
    ax.legend()
    ax.grid(True, axis="y", alpha=0.3)
    return [_save(fig, out_base.with_name(out_base.name + "_pairs.png"))]
