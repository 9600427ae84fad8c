"""Summary figures rendered next to the delimited output.

Reads stats.json / manifest.json from a finished run and writes PNGs into
<out>/report/. Everything here is diagnostic; the CSV tree is the contract.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .content import DROP_CORRELATED, DROP_IDENTICAL, DROP_SPARSE, DROP_UNIQUE
from .errors import MissingManifest

_DROP_ORDER = (DROP_SPARSE, DROP_IDENTICAL, DROP_UNIQUE, DROP_CORRELATED)


def _load(out_dir: Path):
    manifest_path = out_dir / "manifest.json"
    if not manifest_path.exists():
        raise MissingManifest(f"no manifest.json in {out_dir}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    stats_path = out_dir / "stats.json"
    stats = json.loads(stats_path.read_text(encoding="utf-8")) if stats_path.exists() else {}
    return manifest, stats


def render_report(out_dir) -> list[Path]:
    """Write the figure set for one dataset directory; returns written paths."""
    out_dir = Path(out_dir)
    manifest, stats = _load(out_dir)
    report_dir = out_dir / "report"
    report_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    loss = (stats.get("embedding") or {}).get("loss_history") or []
    if loss:
        fig, ax = plt.subplots(figsize=(6, 3.5))
        ax.plot(range(1, len(loss) + 1, 1), loss, lw=1.5)
        ax.set_xlabel("epoch")
        ax.set_ylabel("mean loss")
        ax.set_title(f"embedding training ({stats['embedding'].get('model', '?')})")
        fig.tight_layout()
        path = report_dir / "training_loss.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    node_stats = stats.get("node_types") or {}
    if node_stats:
        names = sorted(node_stats)
        fig, ax = plt.subplots(figsize=(max(4, 1.4 * len(names)), 3.5))
        selected = [node_stats[n].get("selected_properties", 0) for n in names]
        ax.bar(names, selected, label="selected", color="#2a9d8f")
        bottoms = selected
        for reason, color in zip(_DROP_ORDER, ("#e9c46a", "#f4a261", "#e76f51", "#9b5de5")):
            vals = [node_stats[n].get("dropped_properties", {}).get(reason, 0) for n in names]
            if any(vals):
                ax.bar(names, vals, bottom=bottoms, label=f"dropped: {reason}", color=color)
                bottoms = [b + v for b, v in zip(bottoms, vals)]
        ax.set_ylabel("datatype properties")
        ax.set_title("feature selection per node type")
        ax.legend(fontsize=8)
        fig.tight_layout()
        path = report_dir / "feature_selection.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    edge_types = manifest.get("edge_types") or {}
    if edge_types:
        names = sorted(edge_types)
        counts = [edge_types[n]["count"] for n in names]
        fig, ax = plt.subplots(figsize=(max(4, 1.4 * len(names)), 3.5))
        ax.bar(names, counts, color="#457b9d")
        ax.set_ylabel("edges")
        ax.set_title("edge counts per type")
        for tick in ax.get_xticklabels():
            tick.set_rotation(20)
        fig.tight_layout()
        path = report_dir / "edge_counts.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    return written
