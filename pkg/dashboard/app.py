"""Punto de entrada del dashboard de la dendrita.

Configura la app de Streamlit con navegación multipágina, los estilos
que usan las páginas y el sidebar con la corrida seleccionada.

Ejecución:
    streamlit run dashboard/app.py
"""

from __future__ import annotations

import sys
from pathlib import Path

import streamlit as st

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT))

from config.settings import OUTPUT_DIR

# ======================================================================
# CONFIGURACIÓN GLOBAL DE LA APP
# ======================================================================
st.set_page_config(
    page_title="Dendrita RBF-FD",
    page_icon="❄️",
    layout="wide",
    initial_sidebar_state="expanded",
)

# ======================================================================
# ESTILOS DE ENCABEZADO Y ALERTAS
# ======================================================================
st.markdown(
    """
    <style>
        .main-header {
            background: linear-gradient(135deg, #1e3a5f 0%, #2d6a9f 100%);
            padding: 1.5rem 2rem;
            border-radius: 10px;
            margin-bottom: 1.5rem;
        }
        .main-header h1 { color: white; margin: 0; font-size: 1.8rem; }
        .main-header p  { color: #b8d4f0; margin: 0.3rem 0 0 0; }

        .alert-critico, .alert-ok {
            padding: 0.75rem 1rem;
            margin: 0.5rem 0;
        }
        .alert-critico { background: #fef2f2; border-left: 4px solid #ef4444; color: #7f1d1d; }
        .alert-ok      { background: #f0fdf4; border-left: 4px solid #22c55e; color: #14532d; }
    </style>
    """,
    unsafe_allow_html=True,
)

# ======================================================================
# NAVEGACIÓN MULTIPÁGINA
# ======================================================================
pg = st.navigation(
    [
        st.Page("pages/01_crecimiento.py", title="Crecimiento",          icon="❄️"),
        st.Page("pages/02_diagnostico.py", title="Diagnóstico de frontera", icon="🔍"),
    ]
)

# ======================================================================
# SIDEBAR: CORRIDA ACTIVA
# ======================================================================
with st.sidebar:
    st.markdown("### ⚙️ Corrida")
    st.text_input(
        "Directorio de la corrida",
        value=str(OUTPUT_DIR / "dendrita"),
        key="run_dir",
        help="Carpeta con run_summary.json y los snapshots step_*.csv",
    )

    st.divider()

    if st.button("🔄 Refrescar datos", use_container_width=True):
        st.cache_data.clear()
        st.success("Caché limpiado. Recargando...")
        st.rerun()

# ======================================================================
# EJECUTAR PÁGINA ACTIVA
# ======================================================================
pg.run()
