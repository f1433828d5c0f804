"""
Instance Bank Page
"""
import streamlit as st
import plotly.express as px
from utils import api


def render():
    st.header("🧫 Instance Bank")

    summary = api.get_json("/bank/summary")
    if summary:
        col1, col2, col3, col4 = st.columns(4)
        col1.metric("Templates", summary["count"])
        col2.metric("Median area", f"{summary['area_median']:.0f} px")
        col3.metric("P10 area", f"{summary['area_p10']:.0f} px")
        col4.metric("P90 area", f"{summary['area_p90']:.0f} px")

    df = api.frame("/bank/instances", {"limit": 5000})
    if df.empty:
        return

    nbins = st.slider("Histogram bins", 10, 100, 40)
    fig = px.histogram(df, x="area", nbins=nbins, color="source_id", title="Template area distribution")
    st.plotly_chart(fig, use_container_width=True)

    per_source = df.groupby("source_id")["area"].agg(["count", "mean", "min", "max"]).reset_index()
    st.dataframe(per_source, use_container_width=True)
