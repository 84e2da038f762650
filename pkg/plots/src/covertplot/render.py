"""Render PNR-sweep CSVs into covertness / BER figures.

Input files follow the simulator's sweep schema (one row per PNR point):

    scenario,signal_type,snr_db,pnr_db,jammer,covertness_rate,ber,
    attack_success_rate,mean_epsilon,n_trials,seed

One curve is drawn per distinct combination of the group-by keys, with
pnr_db on the x axis. Covertness is shown in percent on a 0-100 axis; BER
stays on a linear axis. Inputs are never modified and rendering the same
spec twice produces byte-identical images (PNG metadata is pinned).
"""

import csv
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

METRICS = ("covertness_rate", "ber")
DEFAULT_GROUP_KEYS = ("signal_type", "snr_db", "jammer")

AXIS_LABELS = {
    "covertness_rate": "Success of covertness (%)",
    "ber": "Bit error rate",
}


class ColumnError(ValueError):
    """A required column is absent from an input CSV."""


@dataclass(frozen=True)
class FigureSpec:
    csv_paths: tuple
    metric: str
    out_path: str
    group_keys: tuple = DEFAULT_GROUP_KEYS
    title: str = ""

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if not self.csv_paths:
            raise ValueError("at least one CSV path is required")


def load_groups(spec: FigureSpec) -> dict:
    """{group key tuple: [(pnr_db, metric value), ...] sorted by pnr}."""
    needed = set(spec.group_keys) | {"pnr_db", spec.metric}
    groups: dict = {}
    for path in spec.csv_paths:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            columns = set(reader.fieldnames or [])
            missing = sorted(needed - columns)
            if missing:
                raise ColumnError(f"{path}: missing column(s) {', '.join(missing)}")
            for row in reader:
                key = tuple(row[k] for k in spec.group_keys)
                groups.setdefault(key, []).append(
                    (float(row["pnr_db"]), float(row[spec.metric])))
    for points in groups.values():
        points.sort()
    return groups


def build_figure(spec: FigureSpec):
    """Matplotlib figure for the spec; the caller owns (and closes) it."""
    groups = load_groups(spec)
    fig, ax = plt.subplots(figsize=(7, 5))
    percent = spec.metric == "covertness_rate"
    for key in sorted(groups):
        xs = [p for p, _ in groups[key]]
        ys = [100.0 * v if percent else v for _, v in groups[key]]
        label = ", ".join(f"{k}={v}" for k, v in zip(spec.group_keys, key))
        ax.plot(xs, ys, marker="o", linewidth=1.8, label=label)
    ax.set_xlabel("PNR (dB)")
    ax.set_ylabel(AXIS_LABELS[spec.metric])
    if percent:
        ax.set_ylim(-2, 102)
    if spec.title:
        ax.set_title(spec.title)
    if groups:
        ax.legend(fontsize=9)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return fig


def render(spec: FigureSpec) -> str:
    """Write the figure to spec.out_path and return that path."""
    fig = build_figure(spec)
    try:
        # Pin PNG metadata so identical inputs give identical bytes.
        if str(spec.out_path).lower().endswith(".png"):
            fig.savefig(spec.out_path, dpi=150, metadata={"Software": None})
        else:
            fig.savefig(spec.out_path, dpi=150)
    finally:
        plt.close(fig)
    return str(spec.out_path)
