"""
Static figures
Renders stored result tables as SVG. Plots only read CSV files and never
recompute anything.
"""

import logging
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams.update({"svg.fonttype": "path", "axes.unicode_minus": False})
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
from matplotlib.patches import Rectangle  # noqa: E402

from errors import SchemaMismatchError  # noqa: E402
from utils.io_utils import read_json, read_table  # noqa: E402

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
PLATFORMS_FILE = DATA_DIR / "platforms.json"

ENSEMBLE_METRICS = ("strength_over_dicke", "p_net_per_site", "gap", "min_gap_1")


def _ok(frame: pd.DataFrame) -> pd.DataFrame:
    if "status" in frame.columns:
        frame = frame[frame["status"] == "ok"]
    if frame.empty:
        raise SchemaMismatchError("Result file has no successful rows to plot")
    return frame


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg")
    plt.close(fig)
    logger.info(f"Wrote figure {path}")
    return path


# ============================================
# Figure Kinds
# ============================================

def plot_heatmap(frame: pd.DataFrame, path: Path) -> Path:
    """Net power over suppression x gamma_r; non-positive cells left blank."""
    frame = _ok(frame)
    table = frame.pivot_table(index="suppression", columns="gamma_r", values="p_net", aggfunc="first")
    values = np.ma.masked_where(~(table.values > 0), table.values)
    cmap = plt.get_cmap("inferno").copy()
    cmap.set_bad("white")

    fig, ax = plt.subplots(figsize=(6, 4), constrained_layout=True)
    image = ax.imshow(values, origin="lower", aspect="auto", cmap=cmap)
    ax.set_xticks(range(len(table.columns)))
    ax.set_xticklabels([f"{g:.0e}" for g in table.columns])
    ax.set_yticks(range(len(table.index)))
    ax.set_yticklabels([f"{s:g}" for s in table.index])
    ax.set_xlabel("Reinitialisation rate gamma_r (eV)")
    ax.set_ylabel("Decay suppression S")
    fig.colorbar(image, ax=ax, label="Net power (W)")
    return _save(fig, path)


def _platforms() -> List[Dict]:
    if not PLATFORMS_FILE.is_file():
        return []
    return read_json(PLATFORMS_FILE).get("platforms", [])


def plot_phasemap(frame: pd.DataFrame, path: Path) -> Path:
    """One panel per phonon temperature; filled markers where net power is positive."""
    frame = _ok(frame)
    temperatures = sorted(frame["t_vib"].unique())
    fig, axes = plt.subplots(1, len(temperatures), figsize=(4 * len(temperatures), 4), squeeze=False, constrained_layout=True)
    platforms = _platforms()
    for ax, t in zip(axes[0], temperatures):
        panel = frame[frame["t_vib"] == t]
        positive = panel["p_net"] > 0
        ax.scatter(panel.loc[positive, "r_nn"], panel.loc[positive, "tau_l"], c=panel.loc[positive, "p_net"], cmap="inferno", marker="s", s=60)
        ax.scatter(panel.loc[~positive, "r_nn"], panel.loc[~positive, "tau_l"], facecolors="none", edgecolors="grey", marker="s", s=60)
        for platform in platforms:
            (r_lo, r_hi), (t_lo, t_hi) = platform["r_nn"], platform["tau_l"]
            ax.add_patch(Rectangle((r_lo, t_lo), r_hi - r_lo, t_hi - t_lo, fill=False, linestyle="--", linewidth=0.8))
            ax.annotate(platform["name"], (r_lo, t_hi), fontsize=7)
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_title(f"T_vib = {t:g} K")
        ax.set_xlabel("r_nn (m)")
    axes[0][0].set_ylabel("tau_L (s)")
    return _save(fig, path)


def plot_bars(frame: pd.DataFrame, path: Path) -> Path:
    """Grouped P_in / P_out / P_net per site against ring size."""
    frame = _ok(frame).sort_values("n_sites")
    n = frame["n_sites"].to_numpy()
    x = np.arange(len(n))
    width = 0.27
    fig, ax = plt.subplots(figsize=(6, 4), constrained_layout=True)
    for offset, column, label in ((-width, "p_in", "P_in"), (0.0, "p_out", "P_out"), (width, "p_net", "P_net")):
        ax.bar(x + offset, frame[column].to_numpy() / n, width, label=label)
    ax.axhline(0.0, color="black", linewidth=0.6)
    ax.set_xticks(x)
    ax.set_xticklabels([str(v) for v in n])
    ax.set_xlabel("N")
    ax.set_ylabel("Power per site (W)")
    ax.legend()
    return _save(fig, path)


def plot_strength(frame: pd.DataFrame, path: Path) -> Path:
    frame = _ok(frame).sort_values("n_sites")
    fig, ax = plt.subplots(figsize=(6, 4), constrained_layout=True)
    for column, label in (
        ("dicke_per_site", "Dicke"),
        ("parallel_per_site", "parallel"),
        ("gs_per_site", "guide-slide"),
        ("independent_per_site", "independent"),
    ):
        ax.plot(frame["n_sites"], frame[column], marker="o", label=label)
    ax.set_xlabel("N")
    ax.set_ylabel("Target strength per site (single-dipole units)")
    ax.grid(True, alpha=0.3)
    ax.legend()
    return _save(fig, path)


def plot_histogram(frame: pd.DataFrame, path: Path) -> Path:
    """Optical histogram stacked by class next to the phonon histogram."""
    fig, axes = plt.subplots(1, 2, figsize=(10, 4), constrained_layout=True)
    for ax, bath in zip(axes, ("optical", "phonon")):
        panel = frame[frame["bath"] == bath]
        bottom = None
        for klass, group in panel.groupby("klass", sort=True):
            group = group.sort_values("bin_lo")
            widths = (group["bin_hi"] - group["bin_lo"]).to_numpy()
            heights = group["weight"].to_numpy()
            if bottom is None or bottom.shape != heights.shape:
                bottom = np.zeros_like(heights)
            ax.bar(group["bin_lo"], heights, widths, bottom=bottom, align="edge", label=klass)
            bottom = bottom + heights
        ax.set_title(f"{bath} transitions")
        ax.set_xlabel("Frequency (eV)")
        if not panel.empty:
            ax.legend()
    axes[0].set_ylabel("Normalised weight")
    return _save(fig, path)


def plot_ensemble(frame: pd.DataFrame, path: Path, metric: Optional[str] = None) -> Path:
    frame = _ok(frame)
    metric = metric or next((m for m in ENSEMBLE_METRICS if m in frame.columns), None)
    if metric is None or metric not in frame.columns:
        raise SchemaMismatchError("Ensemble file has no plottable metric", details={"columns": list(frame.columns)})
    values = pd.to_numeric(frame[metric], errors="coerce").dropna()
    fig, ax = plt.subplots(figsize=(6, 4), constrained_layout=True)
    ax.hist(values, bins=min(40, max(5, len(values) // 5)))
    ax.axvline(values.mean(), color="black", linestyle="--", linewidth=1.0, label="mean")
    ax.set_xlabel(metric)
    ax.set_ylabel("Trials")
    ax.legend()
    return _save(fig, path)


PLOT_KINDS: Dict[str, Sequence[str]] = {
    "heatmap": ("suppression", "gamma_r", "p_net"),
    "phasemap": ("t_vib", "tau_l", "r_nn", "p_net"),
    "bars": ("n_sites", "p_in", "p_out", "p_net"),
    "strength": ("n_sites", "gs_per_site", "parallel_per_site", "dicke_per_site", "independent_per_site"),
    "histogram": ("bath", "klass", "bin_lo", "bin_hi", "weight"),
    "ensemble": ("trial", "status"),
}

_RENDERERS: Dict[str, Callable[[pd.DataFrame, Path], Path]] = {
    "heatmap": plot_heatmap,
    "phasemap": plot_phasemap,
    "bars": plot_bars,
    "strength": plot_strength,
    "histogram": plot_histogram,
    "ensemble": plot_ensemble,
}


def emit_plot(result_file, kind: str, out: Optional[Path] = None) -> Path:
    """
    Render one result CSV as an SVG

    Args:
        result_file: CSV written by a study subcommand
        kind: One of PLOT_KINDS
        out: Target path (defaults to the CSV path with a .svg suffix)

    Raises:
        SchemaMismatchError: Empty file or columns missing for the kind
    """
    if kind not in PLOT_KINDS:
        raise SchemaMismatchError(f"Unknown plot kind: {kind}", details={"kinds": sorted(PLOT_KINDS)})
    result_file = Path(result_file)
    frame = read_table(result_file, required=PLOT_KINDS[kind])
    out = Path(out) if out else result_file.with_suffix(".svg")
    return _RENDERERS[kind](frame, out)
