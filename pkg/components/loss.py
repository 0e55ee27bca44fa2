"""
Loss Curves Component

Interactive FL / FL_kappa curves.
"""

import streamlit as st

from analysis.loss import LossParams, emit_loss_curves
from components.charts import PlotLineChart, SubHeader


class LossCurves:
    def render(self, params: LossParams):
        SubHeader(
            "Safety-Adapted Focal Loss",
            "Higher criticality lowers the focusing exponent and raises the loss",
        )
        col1, col2 = st.columns(2)
        with col1:
            alpha = st.slider("alpha", 0.05, 1.0, float(params.alpha), 0.05)
            gamma = st.slider("gamma", 0.0, 5.0, float(params.gamma), 0.5)
        with col2:
            kappas = st.multiselect("kappa", [0.0, 0.25, 0.5, 0.75, 1.0], default=[0.0, 0.5, 1.0])
            p_min = st.slider("lowest p", 0.01, 0.5, 0.1, 0.01)

        kappas = [k for k in kappas if k <= gamma]
        table = emit_loss_curves(LossParams(alpha=alpha, gamma=gamma), kappas=kappas, p_min=p_min)
        PlotLineChart(table).plot()
        st.dataframe(table.iloc[:: max(len(table) // 20, 1)], use_container_width=True)
