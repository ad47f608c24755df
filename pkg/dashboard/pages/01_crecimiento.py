"""Página 1: Crecimiento de la dendrita.

Tarjetas con el estado final de la corrida, timelapse de la nube de
nodos coloreada por temperatura y curvas de área, nodos y simetría.
"""

from __future__ import annotations

import sys
from pathlib import Path

import plotly.express as px
import plotly.graph_objects as go
import streamlit as st
from plotly.subplots import make_subplots

ROOT = Path(__file__).resolve().parent.parent.parent
sys.path.insert(0, str(ROOT))

from dashboard.data_loader import cargar_pasos, cargar_resumen, cargar_snapshot, listar_snapshots

# ======================================================================
# HEADER
# ======================================================================
st.markdown(
    """
    <div class="main-header">
        <h1>❄️ Crecimiento de la dendrita</h1>
        <p>Evolución de la frontera, la temperatura y la discretización por paso</p>
    </div>
    """,
    unsafe_allow_html=True,
)

# ======================================================================
# CARGA DE DATOS
# ======================================================================
run_dir = st.session_state.get("run_dir", "")
try:
    resumen    = cargar_resumen(run_dir)
    pasos      = cargar_pasos(run_dir)
    snapshots  = listar_snapshots(run_dir)
except Exception as e:
    st.error(f"❌ No se pudo leer la corrida en '{run_dir}': {e}")
    st.info("Ejecuta primero: `python main.py simulate`")
    st.stop()

# ======================================================================
# SECCIÓN 1: ESTADO FINAL
# ======================================================================
st.subheader("Estado final")

config = resumen.get("config", {})
final = pasos.iloc[-1]
col1, col2, col3, col4 = st.columns(4)

with col1:
    st.metric("Pasos", f"{int(final['step'])}", delta=f"t = {final['time']:.2f}", delta_color="off")
with col2:
    st.metric(
        "Nodos",
        f"{int(final['n_nodes'])}",
        delta=f"{int(final['n_nodes'] - pasos.iloc[0]['n_nodes']):+d} vs. inicio",
        delta_color="off",
    )
with col3:
    st.metric(
        "Área de la dendrita",
        f"{final['area']:.4f}",
        delta=f"x{final['area'] / pasos.iloc[0]['area']:.2f}",
        delta_color="off",
    )
with col4:
    simetria = float(resumen.get("symmetry_max", 0.0))
    umbral = 5.0 * float(config.get("spacing", {}).get("h_min", 0.02))
    st.metric(
        "Simetría máx.",
        f"{simetria:.2e}",
        delta="🟢 OK" if simetria < umbral else "🔴 Rota",
        delta_color="off",
    )

st.caption(
    f"R_m={config.get('R_m')} · R_d={config.get('R_d')} · v_d={config.get('v_d')} · "
    f"dt={config.get('dt')} · subpasos={resumen.get('substeps')} · "
    f"tiempo de pared {resumen.get('wall_time_s', 0.0):.1f} s"
)

st.divider()

# ======================================================================
# SECCIÓN 2: TIMELAPSE
# ======================================================================
st.subheader("Timelapse")

if not snapshots:
    st.warning("La corrida no tiene snapshots.")
else:
    nombre = st.select_slider("Snapshot", options=snapshots, value=snapshots[-1])
    df = cargar_snapshot(run_dir, nombre)

    fig = px.scatter(
        df[df["kind"] != "dendrite"],
        x="x",
        y="y",
        color="T",
        color_continuous_scale="Viridis",
        range_color=(0.0, 1.0),
        hover_data=["kind"],
    )
    fig.update_traces(marker={"size": 4})
    dendrita = df[df["kind"] == "dendrite"]
    fig.add_trace(
        go.Scatter(
            x=list(dendrita["x"]) + [dendrita["x"].iloc[0]],
            y=list(dendrita["y"]) + [dendrita["y"].iloc[0]],
            mode="lines+markers",
            line={"color": "#C00000", "width": 2},
            marker={"size": 4, "color": "#C00000"},
            name="dendrita",
        )
    )
    fig.update_layout(
        height=640,
        yaxis={"scaleanchor": "x", "scaleratio": 1},
        margin={"l": 10, "r": 10, "t": 30, "b": 10},
        legend={"orientation": "h"},
    )
    st.plotly_chart(fig, use_container_width=True)

    conteo = df["kind"].value_counts()
    st.caption(
        f"{len(df)} nodos · {conteo.get('interior', 0)} interiores · "
        f"{conteo.get('dendrite', 0)} dendrita · {conteo.get('outer', 0)} exterior"
    )

st.divider()

# ======================================================================
# SECCIÓN 3: CURVAS DE CRECIMIENTO
# ======================================================================
st.subheader("Curvas de crecimiento")

col_izq, col_der = st.columns(2)

with col_izq:
    fig = make_subplots(specs=[[{"secondary_y": True}]])
    fig.add_trace(go.Scatter(x=pasos["step"], y=pasos["area"], name="Área", line={"color": "#2E75B6"}))
    fig.add_trace(
        go.Scatter(x=pasos["step"], y=pasos["n_nodes"], name="Nodos", line={"color": "#C55A11", "dash": "dash"}),
        secondary_y=True,
    )
    fig.update_layout(title="Área y número de nodos", height=380, legend={"orientation": "h"})
    fig.update_xaxes(title_text="Paso")
    fig.update_yaxes(title_text="Área", secondary_y=False)
    fig.update_yaxes(title_text="Nodos", secondary_y=True)
    st.plotly_chart(fig, use_container_width=True)

with col_der:
    fig = make_subplots(specs=[[{"secondary_y": True}]])
    fig.add_trace(go.Scatter(x=pasos["step"], y=pasos["symmetry"], name="Simetría", line={"color": "#548235"}))
    fig.add_trace(
        go.Scatter(x=pasos["step"], y=pasos["tip_radius"], name="Radio de punta", line={"color": "#7030A0"}),
        secondary_y=True,
    )
    fig.update_layout(title="Simetría de orden 4 y radio de punta", height=380, legend={"orientation": "h"})
    fig.update_xaxes(title_text="Paso")
    fig.update_yaxes(title_text="max |r(φ) - r(φ+π/2)|", type="log", secondary_y=False)
    fig.update_yaxes(title_text="Radio", secondary_y=True)
    st.plotly_chart(fig, use_container_width=True)

with st.expander("Tabla de pasos"):
    st.dataframe(pasos, use_container_width=True, hide_index=True)
