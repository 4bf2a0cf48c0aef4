"""
Run summary figure for hazefuse
"""
import logging
from collections import Counter, defaultdict
from pathlib import Path
from typing import Dict, List, Sequence

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from hazefuse.harness.event_log import EventRecord, read_event_log
from hazefuse.sensors.types import Source


class RunPlotter:
    """Two-panel summary: weather on top, detections and fused objects below"""

    def __init__(self, figsize=(12, 8), dpi: int = 100):
        self.logger = logging.getLogger(__name__)
        self.figsize = figsize
        self.dpi = dpi

    def series(self, records: Sequence[EventRecord]) -> Dict[str, object]:
        """
        Extract the plotted time series from a log

        Returns:
            Dictionary with weather times/visibility/templates, tick times,
            per-source detection counts and fused counts
        """
        weather = [r for r in records if r.kind == "weather_state"]
        ticks = sorted({r.t_s for r in records if r.kind == "fused"})
        per_source: Dict[str, Counter] = defaultdict(Counter)
        for r in records:
            if r.kind == "detection":
                per_source[r.payload["source"]][r.t_s] += 1
        fused = {r.t_s: len(r.payload["objects"]) for r in records if r.kind == "fused"}
        return {
            "weather_t": np.asarray([r.t_s for r in weather]),
            "visibility_m": np.asarray([r.payload.get("visibility_m") or np.nan for r in weather], dtype=float),
            "templates": [r.payload.get("template") for r in weather],
            "ticks": np.asarray(ticks),
            "detections": {s.value: np.asarray([per_source[s.value][t] for t in ticks]) for s in Source},
            "fused": np.asarray([fused[t] for t in ticks]),
        }

    def create_figure(self, records: Sequence[EventRecord]) -> Figure:
        data = self.series(records)
        fig = Figure(figsize=self.figsize, dpi=self.dpi)
        ax_weather, ax_counts = fig.subplots(2, 1, sharex=True)

        ax_weather.plot(data["weather_t"], data["visibility_m"] / 1000.0, color="tab:blue", linewidth=2)
        ax_weather.set_ylabel("Visibility (km)")
        ax_weather.set_title("Weather and measured visibility", fontsize=12, fontweight="bold")
        ax_weather.grid(True, alpha=0.3)
        for t, name in self._template_changes(data["weather_t"], data["templates"]):
            ax_weather.axvline(t, color="grey", linestyle="--", linewidth=1)
            ax_weather.annotate(name, (t, 0.95), xycoords=("data", "axes fraction"), fontsize=9, rotation=90, va="top")

        for source, counts in data["detections"].items():
            if counts.size and counts.any():
                ax_counts.step(data["ticks"], counts, where="post", label=source, alpha=0.8)
        ax_counts.plot(data["ticks"], data["fused"], color="black", linewidth=2, label="fused")
        ax_counts.set_xlabel("Time (s)")
        ax_counts.set_ylabel("Objects per tick")
        ax_counts.grid(True, alpha=0.3)
        ax_counts.legend(loc="upper right")

        fig.tight_layout()
        return fig

    @staticmethod
    def _template_changes(times: np.ndarray, templates: List[str]):
        previous = None
        for t, name in zip(times, templates):
            if name != previous:
                yield float(t), name
            previous = name

    def save(self, log_path: Path, out_path: Path) -> Path:
        """Render the figure for a log file to a PNG"""
        records = read_event_log(log_path)
        fig = self.create_figure(records)
        out_path = Path(out_path)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        FigureCanvasAgg(fig)
        fig.savefig(out_path, dpi=self.dpi)
        self.logger.info(f"Run summary figure saved to {out_path}")
        return out_path
