"""Configuracion del proyecto de reconstruccion de fronteras y crecimiento dendritico.

Define rutas de salida, tolerancias geometricas, parametros del ajuste
de splines, de la discretizacion por frente de avance, del metodo
RBF-FD y los valores por defecto del experimento de la dendrita.

Algunos valores operativos (directorio de salida, semilla, nivel de
log) pueden sobreescribirse mediante variables de entorno o un archivo
``.env`` en la raiz del proyecto, sin tocar el codigo fuente.
"""

from __future__ import annotations

import os
from pathlib import Path

from dotenv import load_dotenv

# ============================================================================
# RUTAS DEL PROYECTO
# ============================================================================

BASE_DIR: Path = Path(__file__).resolve().parent.parent

# Cargar variables de entorno desde el archivo .env si existe en el entorno local
load_dotenv(BASE_DIR / ".env")

OUTPUT_DIR: Path = Path(os.getenv("DENDRITA_OUTPUT_DIR", str(BASE_DIR / "output")))

# ============================================================================
# VARIABLES DE ENTORNO OPERATIVAS
# ============================================================================

_semilla = os.getenv("DENDRITA_SEMILLA", "0")
_log_level = os.getenv("DENDRITA_LOG_LEVEL", "INFO").strip().upper()

# Principio Fail-Fast: valores de entorno invalidos detienen la importacion
try:
    SEMILLA: int = int(_semilla)
except ValueError as exc:
    raise ValueError(
        f"DENDRITA_SEMILLA debe ser un entero, se recibio '{_semilla}'."
    ) from exc

if _log_level not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
    raise ValueError(
        f"DENDRITA_LOG_LEVEL invalido: '{_log_level}'. Use DEBUG, INFO, "
        "WARNING, ERROR o CRITICAL."
    )

LOG_LEVEL: str = _log_level

# ============================================================================
# GEOMETRIA Y ORDENAMIENTO
# ============================================================================

GEOMETRIA: dict[str, float] = {
    "tolerancia_duplicados": 1e-12,
}

ORDENAMIENTO: dict[str, int | None] = {
    # None equivale a k-1 candidatos (busqueda exhaustiva)
    "max_rango": None,
}

# ============================================================================
# SPLINE Y DOMINIO
# ============================================================================

ESPLINE: dict[str, float] = {
    "cuerda_minima":       1e-12,
    "area_relativa_minima": 1e-12,
    "epsrel_longitud":     1e-10,
}

DOMINIO: dict[str, float | int] = {
    "tolerancia_parametro":  1e-12,   # relativa al periodo
    "max_iteraciones":       200,
    "umbral_ambiguedad":     1e-12,
    "umbral_curvatura":      1e-12,
    "coseno_min_normal":     0.9,
    "factor_sonda":          0.5,
}

# ============================================================================
# DISCRETIZACION (FRENTE DE AVANCE)
# ============================================================================

DISCRETIZACION: dict[str, float | int] = {
    "candidatos_por_nodo":  6,
    "factor_aceptacion":    0.85,
    "factor_separacion":    0.7,
    "densidad_relleno":     1.15,   # area por nodo ~ c*h^2, medida en el disco unitario
    "factor_curva_corta":   3.0,
    "tolerancia_gap":       0.25,
}

ESPACIADO: dict[str, float] = {
    "h_min":             0.02,
    "h_max":             0.1,
    "transition_radius": 0.25,
}

# ============================================================================
# RBF-FD, POISSON E IDW
# ============================================================================

RBFFD: dict[str, float | int] = {
    "stencil_size":      12,
    "orden_phs":         3,
    "umbral_condicion":  1e12,
    "factor_estabilidad": 0.1,      # dt_estable = factor * h_min^2
}

POISSON: dict[str, float | int | str] = {
    "tolerancia_residuo": 1e-10,
    "max_iteraciones":    2000,
    "solucion":           "cuadratica",
    "n_objetivo":         900,
    "tolerancia_n":       0.05,   # desvio relativo aceptado de N respecto al objetivo
    "max_ajustes_h":      3,
}

IDW: dict[str, float | int] = {
    "k_sources": 4,
    "power":     2.0,
    "distancia_exacta": 1e-12,
}

# ============================================================================
# EXPERIMENTO DE LA DENDRITA
# ============================================================================

SIMULACION: dict[str, float | int | bool | str] = {
    "R_m":              1.0,
    "R_d":              0.1,
    "v_d":              0.04,
    "dt":               0.01,
    "N_t":              500,
    "snapshot_every":   25,
    "snapshot_initial": True,
    "symmetric_initial_nodes": True,
    "initial_temperature": "estacionaria",
}

# ============================================================================
# ARCHIVOS DE SALIDA
# ============================================================================

EXCEL_ENGINE: str = "openpyxl"

NOMBRES_SALIDA: dict[str, str] = {
    "snapshot":  "step_{:05d}.csv",
    "resumen":   "run_summary.json",
    "excel":     "01_resumen_simulacion",
    "pdf":       "02_reporte_dendrita",
    "densidad":  "density_report.json",
}
