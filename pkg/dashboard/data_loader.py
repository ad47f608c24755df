"""Capa de carga y caché de datos para el dashboard de la dendrita.

Único punto de contacto entre Streamlit y src/: lee los artefactos de
una corrida (``run_summary.json`` y ``step_*.csv``) y reconstruye
fronteras subidas por el usuario. Todo pasa por ``@st.cache_data`` con
TTL de 1 hora.

Uso desde cualquier página:
    from dashboard.data_loader import cargar_resumen, cargar_snapshot
    resumen = cargar_resumen(run_dir)
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
import streamlit as st

# Asegurar que la raiz del proyecto este en el path
ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT))

from config.settings import NOMBRES_SALIDA
from src.dominio import build_domain
from src.ordenamiento import validate_density
from src.simulacion import leer_snapshot


# ======================================================================
# CORRIDAS DE SIMULACION
# ======================================================================

@st.cache_data(ttl=3600)
def cargar_resumen(run_dir: str) -> dict[str, Any]:
    """Lee ``run_summary.json`` de la corrida.

    Raises:
        FileNotFoundError: Si la corrida no tiene resumen.
    """
    path = Path(run_dir) / NOMBRES_SALIDA["resumen"]
    return json.loads(path.read_text(encoding="utf-8"))


@st.cache_data(ttl=3600)
def cargar_pasos(run_dir: str) -> pd.DataFrame:
    """Una fila por paso con los diagnosticos del resumen."""
    return pd.DataFrame(cargar_resumen(run_dir).get("steps", []))


@st.cache_data(ttl=3600)
def listar_snapshots(run_dir: str) -> list[str]:
    return [p.name for p in sorted(Path(run_dir).glob("step_*.csv"))]


@st.cache_data(ttl=3600)
def cargar_snapshot(run_dir: str, nombre: str) -> pd.DataFrame:
    return leer_snapshot(Path(run_dir) / nombre)


# ======================================================================
# RECONSTRUCCION DE FRONTERAS SUBIDAS
# ======================================================================

@st.cache_data(ttl=3600)
def reconstruir_frontera(puntos: np.ndarray, muestras: int = 800) -> dict[str, Any]:
    """Ordena, ajusta el spline y diagnostica una nube de puntos.

    Returns:
        dict con ``ordenados`` (k, 2), ``curva`` (muestras, 2),
        ``normales`` (k, 2), ``densidad`` (dict) y ``orientacion``.
    """
    dom = build_domain(puntos)
    spline = dom.spline
    t = np.linspace(spline.knots[0], spline.knots[-1], muestras)
    normales, _ = dom.normales(spline.knots[:-1])
    return {
        "ordenados": dom.ordered.ordenados,
        "curva": spline.eval(t),
        "normales": normales,
        "densidad": validate_density(dom.ordered).to_dict(),
        "orientacion": dom.orientation_c,
        "longitud": spline.arc_length(spline.knots[0], spline.knots[-1]),
    }
