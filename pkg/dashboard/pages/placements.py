"""
Placements Explorer Page
"""
import streamlit as st
import plotly.express as px
from utils import api


def render():
    st.header("📍 Placements Explorer")

    records = api.get("/manifest/records", {"limit": 10000})
    if not records:
        st.info("No manifest yet. Run `insmix augment` first.")
        return

    inputs = sorted({r["input_id"] for r in records})
    chosen = st.selectbox("Input image", ["(all)"] + inputs)
    if chosen != "(all)":
        records = [r for r in records if r["input_id"] == chosen]

    df = api.placements_frame(records)
    if df.empty:
        st.warning("No accepted placements for this selection")
        return

    fig = px.scatter(
        df, x="target_x", y="target_y", color="input_id",
        hover_data=["sample", "template", "anchor", "new_label"],
        title="Template centroids"
    )
    fig.update_yaxes(autorange="reversed")
    st.plotly_chart(fig, use_container_width=True)

    col1, col2 = st.columns(2)
    with col1:
        counts = df["template"].value_counts().head(20)
        fig = px.bar(x=counts.index, y=counts.values, title="Most used templates", labels={"x": "template", "y": "uses"})
        st.plotly_chart(fig, use_container_width=True)
    with col2:
        rot = df["rot90_k"].value_counts().sort_index()
        fig = px.pie(values=rot.values, names=[f"{k}×90°" for k in rot.index], title="Template rotations")
        st.plotly_chart(fig, use_container_width=True)

    st.dataframe(df, use_container_width=True)
