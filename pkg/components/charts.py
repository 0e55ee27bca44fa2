"""
Classes:
- PlotChart: Base class holding a plotly figure and rendering it with Streamlit.
- PlotHeatmapChart: (TTC, distance) pedestrian counts.
- PlotLineChart: Loss curves over the probability p.
- PlotGroupedBarChart: Recall per visibility bin, one bar group per zone.
- PlotZoneBarChart: Pedestrian count per safety zone.
- SubHeader: Class for displaying a subheader with a tooltip.

Figures are built in the constructor and only drawn by ``plot``, so they can
be inspected without a running Streamlit app.
"""

import math

import pandas as pd
import plotly.express as px
import plotly.graph_objects as go
import streamlit as st

ZONE_COLORS = {"C": "#d62728", "PC": "#ff7f0e", "NC": "#2ca02c"}


class PlotChart:
    """Base class for plotting charts."""

    def __init__(self, title: str):
        """
        Args:
            title (str): The title of the chart.
        """
        self.title = title
        self.fig = None

    def plot(self):
        """Plot the chart using Streamlit."""
        st.plotly_chart(self.fig, use_container_width=True)


def _bin_label(lo: float, hi: float) -> str:
    return f"{lo:g}+" if math.isinf(hi) else f"{lo:g}-{hi:g}"


class PlotHeatmapChart(PlotChart):
    """Pedestrian counts over distance (rows) and TTC_RSB (columns)."""

    def __init__(self, heatmap, title: str = "Pedestrians per TTC and distance"):
        """
        Args:
            heatmap (HeatmapCounts): counts including the TTC overflow column.
            title (str): The title of the chart.
        """
        super().__init__(title)
        ttc_edges = list(heatmap.ttc_edges) + [math.inf]
        x_labels = [_bin_label(lo, hi) for lo, hi in zip(ttc_edges, ttc_edges[1:])]
        y_labels = [_bin_label(lo, hi) for lo, hi in zip(heatmap.dist_edges, heatmap.dist_edges[1:])]
        self.fig = go.Figure(
            data=go.Heatmap(z=heatmap.counts, x=x_labels, y=y_labels, colorscale="Viridis")
        )
        self.fig.update_layout(
            title=title,
            xaxis=dict(title="TTC_RSB (s)"),
            yaxis=dict(title="Distance (m)"),
        )


class PlotLineChart(PlotChart):
    """Every loss column of an ``emit_loss_curves`` table against p."""

    def __init__(self, df: pd.DataFrame, title: str = "Focal loss and safety-adapted focal loss"):
        super().__init__(title)
        long = df.melt(id_vars="p", var_name="curve", value_name="loss")
        self.fig = px.line(long, x="p", y="loss", color="curve", title=title)


class PlotGroupedBarChart(PlotChart):
    """Recall per visibility bin, grouped by zone."""

    def __init__(self, visibility_recall: pd.DataFrame, title: str = "Recall per visibility bin"):
        """
        Args:
            visibility_recall (pd.DataFrame): visibility bins as index, zones as columns.
            title (str): The title of the chart.
        """
        super().__init__(title)
        self.fig = go.Figure(
            data=[
                go.Bar(
                    name=zone,
                    x=[str(b) for b in visibility_recall.index],
                    y=visibility_recall[zone].tolist(),
                    marker_color=ZONE_COLORS.get(zone),
                )
                for zone in visibility_recall.columns
            ]
        )
        self.fig.update_layout(
            title=title,
            barmode="group",
            xaxis=dict(title="Visibility (1 hardest, 4 easiest)"),
            yaxis=dict(title="Recall", range=[0, 1]),
        )


class PlotZoneBarChart(PlotChart):
    def __init__(self, summary: pd.DataFrame, title: str = "Pedestrians per zone"):
        super().__init__(title)
        self.fig = go.Figure(
            data=go.Bar(
                x=summary["zone"],
                y=summary["count"],
                marker_color=[ZONE_COLORS.get(z) for z in summary["zone"]],
            )
        )
        self.fig.update_layout(title=title, xaxis=dict(title="Zone"), yaxis=dict(title="Pedestrians"))


class SubHeader:
    """Class to display a subheader with a tooltip."""

    def __init__(self, title: str, tooltip: str):
        st.subheader(title, help=tooltip)
