"""Página 2: Diagnóstico de frontera.

Sube un CSV ``x,y`` de puntos desordenados, reconstruye la curva
cerrada y muestra el reporte de densidad del muestreo.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pandas as pd
import plotly.graph_objects as go
import streamlit as st

ROOT = Path(__file__).resolve().parent.parent.parent
sys.path.insert(0, str(ROOT))

from dashboard.data_loader import reconstruir_frontera
from src.errores import ReconstruccionError

# ======================================================================
# HEADER
# ======================================================================
st.markdown(
    """
    <div class="main-header">
        <h1>🔍 Diagnóstico de frontera</h1>
        <p>Ordenamiento, spline periódico y densidad de muestreo de una nube de puntos</p>
    </div>
    """,
    unsafe_allow_html=True,
)

# ======================================================================
# CARGA DE PUNTOS
# ======================================================================
archivo = st.file_uploader("CSV con columnas x, y", type=["csv"])
if archivo is None:
    st.info("Sube un archivo para reconstruir su frontera.")
    st.stop()

try:
    df = pd.read_csv(archivo)
    puntos = df[["x", "y"]].to_numpy(dtype=float)
except (KeyError, ValueError) as e:
    st.error(f"❌ El archivo debe tener columnas numéricas 'x' y 'y': {e}")
    st.stop()

try:
    resultado = reconstruir_frontera(puntos)
except ReconstruccionError as e:
    st.error(f"❌ {e.codigo}: {e}")
    st.stop()

densidad = resultado["densidad"]

# ======================================================================
# SECCIÓN 1: INDICADORES
# ======================================================================
col1, col2, col3, col4 = st.columns(4)
with col1:
    st.metric("Puntos", f"{len(puntos)}")
with col2:
    st.metric("Longitud de la curva", f"{resultado['longitud']:.4f}")
with col3:
    razon = densidad["min_neighbor_gap_ratio"]
    st.metric("Razón mínima de vecinos", "n/a" if razon is None else f"{razon:.3f}")
with col4:
    st.metric("Orientación c", f"{resultado['orientacion']:+d}")

violaciones = densidad["condition3_violations"]
if violaciones or densidad["ordered_polyline_self_intersects"]:
    st.markdown(
        f"""<div class="alert-critico">⚠️ Muestreo insuficiente: {len(violaciones)} puntos violan la
        condición de adyacencia; poligonal ordenada auto-intersecada:
        {densidad['ordered_polyline_self_intersects']}.</div>""",
        unsafe_allow_html=True,
    )
else:
    st.markdown(
        '<div class="alert-ok">✅ El muestreo es suficientemente denso para el recorrido de vecinos.</div>',
        unsafe_allow_html=True,
    )

st.divider()

# ======================================================================
# SECCIÓN 2: CURVA RECONSTRUIDA
# ======================================================================
ordenados = resultado["ordenados"]
curva = resultado["curva"]
normales = resultado["normales"]
escala = 0.05 * float(np.ptp(ordenados, axis=0).max())

fig = go.Scatter(x=curva[:, 0], y=curva[:, 1], mode="lines", name="Spline", line={"color": "#2E75B6"})
figura = go.Figure(fig)
figura.add_trace(
    go.Scatter(
        x=ordenados[:, 0],
        y=ordenados[:, 1],
        mode="markers+text",
        text=[str(i) for i in range(len(ordenados))] if len(ordenados) <= 64 else None,
        textposition="top center",
        marker={"size": 7, "color": "#1F3864"},
        name="Puntos ordenados",
    )
)
if st.checkbox("Mostrar normales exteriores", value=True):
    xs, ys = [], []
    for p, n in zip(ordenados, normales):
        xs += [p[0], p[0] + escala * n[0], None]
        ys += [p[1], p[1] + escala * n[1], None]
    figura.add_trace(go.Scatter(x=xs, y=ys, mode="lines", line={"color": "#548235"}, name="Normales"))
if violaciones:
    malos = puntos[violaciones]
    figura.add_trace(
        go.Scatter(x=malos[:, 0], y=malos[:, 1], mode="markers", marker={"size": 12, "color": "#C00000", "symbol": "x"},
                   name="Violaciones")
    )
figura.update_layout(height=640, yaxis={"scaleanchor": "x", "scaleratio": 1}, legend={"orientation": "h"})
st.plotly_chart(figura, use_container_width=True)

with st.expander("Reporte de densidad (JSON)"):
    st.json(densidad)
