"""
🔬 InsMix - Augmentation Dashboard
Built with Streamlit + FastAPI
"""

import streamlit as st
import plotly.express as px
import sys
sys.path.append("..")

from utils import api

# Page config
st.set_page_config(
    page_title="InsMix",
    page_icon="🔬",
    layout="wide",
    initial_sidebar_state="expanded"
)

# Custom CSS
st.markdown("""
<style>
    .main-header {
        font-size: 3rem;
        font-weight: bold;
        color: #6a3d9a;
        text-align: center;
        margin-bottom: 2rem;
    }
</style>
""", unsafe_allow_html=True)

# Sidebar
st.sidebar.title("📊 Navigation")
page = st.sidebar.selectbox(
    "Choose Page:",
    ["📈 Overview", "📉 Training Curves", "📍 Placements", "🧫 Instance Bank"]
)

# Header
st.markdown('<h1 class="main-header">🔬 InsMix Augmentation</h1>', unsafe_allow_html=True)
st.markdown("**Copy-paste-smooth nuclei augmentation: instance bank, placements, smooth-GAN training**")

# Page routing
if page == "📈 Overview":
    health = api.get_json("/health") or {}
    summary = api.get_json("/manifest/summary") or {}
    bank = api.get_json("/bank/summary") or {}

    col1, col2, col3, col4, col5 = st.columns(5)
    with col1:
        st.metric("Templates", bank.get("count", 0))
    with col2:
        st.metric("Samples", summary.get("samples", 0))
    with col3:
        st.metric("Placements", summary.get("placements", 0))
    with col4:
        st.metric("Shortfall", summary.get("shortfall", 0))
    with col5:
        st.metric("Smoothed", summary.get("smoothed", 0))

    col1, col2 = st.columns(2)
    with col1:
        st.subheader("📦 Placements per sample")
        records = api.frame("/manifest/records", {"limit": 10000})
        if not records.empty:
            records["placed"] = records["placements"].apply(len)
            fig = px.histogram(records, x="placed", nbins=20, title="Accepted placements per sample")
            fig.update_layout(height=400)
            st.plotly_chart(fig, use_container_width=True)
    with col2:
        st.subheader("📉 Reconstruction term")
        metrics = api.frame("/metrics/training", {"every": 10})
        if not metrics.empty:
            fig = px.line(metrics, x="step", y=["recon", "recon_ma"], title="Reconstruction (raw and moving average)")
            fig.update_layout(height=400)
            st.plotly_chart(fig, use_container_width=True)

    if health:
        st.caption(f"Data: {health.get('data_dir')} · manifest {'✅' if health.get('manifest_present') else '❌'}"
                   f" · metrics {'✅' if health.get('metrics_present') else '❌'}")

elif page == "📉 Training Curves":
    import pages.training_curves as training_page
    training_page.render()

elif page == "📍 Placements":
    import pages.placements as placements_page
    placements_page.render()

elif page == "🧫 Instance Bank":
    import pages.instance_bank as bank_page
    bank_page.render()
