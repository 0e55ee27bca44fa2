"""
Detector Evaluation Component

Benchmark row and the visibility breakdown of one or more evaluation runs.
"""

import json
from pathlib import Path

import pandas as pd
import streamlit as st

from analysis.evaluation import TABLE_COLUMNS
from components.charts import PlotGroupedBarChart, SubHeader


def reports_from_file(path) -> list:
    """The ``reports`` array of a report file written by ``evaluate``."""
    return json.loads(Path(path).read_text(encoding="utf-8"))["reports"]


def table_frame(reports) -> pd.DataFrame:
    rows = [{"detector": r["label"], **{c: r[c] for c in TABLE_COLUMNS}} for r in reports]
    return pd.DataFrame(rows, columns=["detector", *TABLE_COLUMNS])


def visibility_frame(report) -> pd.DataFrame:
    """Visibility bins as index, zones as columns."""
    table = pd.DataFrame.from_dict(report["visibility_recall"], orient="index").astype(float)
    table.index = [int(b) for b in table.index]
    return table.sort_index()


class DetectorEvaluation:
    def render(self, reports):
        SubHeader("Zone-Based Evaluation", "AP50 per box size and recall per safety zone")
        st.dataframe(table_frame(reports), use_container_width=True, hide_index=True)

        labels = [r["label"] for r in reports]
        selected = st.selectbox("Detector", labels)
        report = reports[labels.index(selected)]
        PlotGroupedBarChart(visibility_frame(report), f"Recall per visibility bin, {selected}").plot()
