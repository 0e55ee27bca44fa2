"""
Criticality Overview Component

Zone counts and the (TTC, distance) heatmap of an annotation file.
"""

from pathlib import Path

import streamlit as st

from analysis.criticality import Criticality, load_records, zone_summary
from analysis.evaluation import Evaluation
from components.charts import PlotHeatmapChart, PlotZoneBarChart, SubHeader
from dataset import load_scene

SAMPLE_SCENE = Path(__file__).resolve().parent.parent / "dataset" / "samples" / "ten_frames.json"


@st.cache_data
def annotate_sample_scene():
    criticality = Criticality()
    return [r for frame in load_scene(SAMPLE_SCENE) for r in criticality.annotate_frame(frame)]


class CriticalityOverview:
    def __init__(self, config):
        self.config = config
        self.evaluation = Evaluation(config.evaluation)

    def load(self, records_path: str):
        """Records from ``records_path``, or the annotated sample scene when empty."""
        if records_path:
            return load_records(records_path)
        return annotate_sample_scene()

    def render_zone_metrics(self, records):
        SubHeader("Safety Zones", "Pedestrians per zone: C critical, PC potentially critical, NC non-critical")
        summary = zone_summary(records)
        columns = st.columns(len(summary))
        for column, (_, row) in zip(columns, summary.iterrows()):
            with column:
                st.metric(row["zone"], int(row["count"]), f"{row['share']:.1%}", delta_color="off")
        PlotZoneBarChart(summary).plot()

    def render_heatmap(self, records):
        SubHeader(
            "TTC and Distance",
            "Pedestrian counts over TTC_RSB and distance; the last column holds TTC beyond the last edge",
        )
        counts = self.evaluation.heatmap_counts(records)
        PlotHeatmapChart(counts).plot()
        if counts.distance_overflow:
            st.caption(f"{counts.distance_overflow} pedestrians beyond {counts.dist_edges[-1]:g} m")
