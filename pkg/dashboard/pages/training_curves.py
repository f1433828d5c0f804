"""
Smooth-GAN Training Curves Page
"""
import streamlit as st
import plotly.express as px
from utils import api


def render():
    st.header("📉 Smooth-GAN Training")

    col1, col2 = st.columns(2)
    with col1:
        window = st.slider("Moving-average window", 10, 500, 100)
    with col2:
        every = st.slider("Plot every n-th step", 1, 50, 5)

    metrics = api.frame("/metrics/training", {"window": window, "every": every})
    if metrics.empty:
        st.info("No training metrics yet. Run `insmix gan train` first.")
        return

    st.subheader("⚔️ Adversarial losses")
    fig = px.line(metrics, x="step", y=["loss_d_ma", "loss_adv_ma"], title="Discriminator triplet loss and adversarial loss")
    st.plotly_chart(fig, use_container_width=True)

    st.subheader("🧩 Reconstruction")
    fig = px.line(metrics, x="step", y=["recon", "recon_ma"], title="mean |u − G(u)|")
    st.plotly_chart(fig, use_container_width=True)

    first = metrics["recon_ma"].iloc[0]
    last = metrics["recon_ma"].iloc[-1]
    st.metric("Reconstruction (moving avg)", f"{last:.4f}", f"{(last - first) / first * 100:+.1f}%" if first else None)
    st.dataframe(metrics.tail(20), use_container_width=True)
