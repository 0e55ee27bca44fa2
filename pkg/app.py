"""
Streamlit Web Application

Viewer for the files the command line writes: annotation files, loss curves
and evaluation reports. Run with ``streamlit run app.py``.
"""

import streamlit as st

from components import (
    METRIC_CARDS,
    PADDING_TOP,
    CriticalityOverview,
    DetectorEvaluation,
    LossCurves,
)
from components.evaluation import reports_from_file
from errors import SafetyLossError
from settings import RunConfig

SECTIONS = ["Criticality Overview", "Loss Curves", "Detector Evaluation"]


class Main:
    """
    Main class

    This class handles the main UI logic.
    """

    def __init__(self):
        self.config = RunConfig.resolve()
        self.criticality_component = CriticalityOverview(self.config)
        self.loss_component = LossCurves()
        self.evaluation_component = DetectorEvaluation()
        self.setup_page()
        self.render_sidebar()
        self.route_to_component()

    def setup_page(self):
        st.set_page_config(
            layout="wide",
            page_title="Pedestrian Criticality and Safety Evaluation",
            page_icon="🚸",
        )

    def render_sidebar(self):
        st.sidebar.title(
            "Pedestrian Safety Evaluation",
            help="Reachability-based criticality, safety-adapted focal loss and zone-based detector evaluation",
        )
        self.selected_option = st.sidebar.selectbox("Select One", SECTIONS)

    def route_to_component(self):
        """
        Route to the appropriate component based on user selection.
        """
        if self.selected_option == "Criticality Overview":
            self.render_criticality_overview()
        elif self.selected_option == "Loss Curves":
            self.render_loss_curves()
        elif self.selected_option == "Detector Evaluation":
            self.render_detector_evaluation()

    def render_criticality_overview(self):
        self.render_header("Criticality Overview")
        records_path = st.sidebar.text_input(
            "Annotation file", help="Written by `annotate`; empty shows the annotated sample scene"
        )
        try:
            records = self.criticality_component.load(records_path.strip())
        except SafetyLossError as exc:
            st.error(str(exc))
            return

        st.markdown(METRIC_CARDS, unsafe_allow_html=True)
        self.criticality_component.render_zone_metrics(records)
        st.divider()
        self.criticality_component.render_heatmap(records)

    def render_loss_curves(self):
        self.render_header("Loss Curves")
        self.loss_component.render(self.config.loss)

    def render_detector_evaluation(self):
        """
        Reports come from a file written by `evaluate` or `end-to-end`.
        """
        self.render_header("Detector Evaluation")
        report_path = st.sidebar.text_input("Report file", help="report.json written by `evaluate`")
        btn = st.sidebar.button("Load report")

        if btn and report_path.strip():
            try:
                st.session_state["reports"] = reports_from_file(report_path.strip())
            except (OSError, ValueError, KeyError) as exc:
                st.error(f"cannot read {report_path}: {exc}")
                return

        reports = st.session_state.get("reports")
        if not reports:
            st.info("Select a report file in the sidebar.")
            return
        self.evaluation_component.render(reports)

    def render_header(self, title):
        """
        Adds custom padding at the top and centers the header title.
        """
        st.markdown(PADDING_TOP, unsafe_allow_html=True)
        _, col, _ = st.columns(3)
        with col:
            st.header(title)
        st.divider()


if __name__ == "__main__":
    Main()
