"""Exportacion del resumen de una corrida a Excel.

Escribe un libro con tres hojas:
    pasos        : una fila por paso (nodos, area, simetria, T, residuo).
    snapshots    : una fila por snapshot con conteos por tipo de nodo.
    parametros   : configuracion efectiva aplanada (clave, valor).

Uso:
    from src.reporte_excel import exportar_excel
    exportar_excel(resumen, snapshots, output_dir, timestamp)
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any

import pandas as pd
from openpyxl.styles import Alignment, Border, Font, PatternFill, Side

from config.settings import EXCEL_ENGINE, NOMBRES_SALIDA
from src.errores import IoFailure
from src.simulacion import leer_snapshot

logger = logging.getLogger(__name__)

# ======================================================================
# CONSTANTES DE FORMATO Y ESTILO
# ======================================================================

COLUMNAS_ENTERO: set[str] = {"STEP", "N_NODES", "N_INTERIOR", "N_DENDRITE", "N_OUTER"}
COLUMNAS_CIENTIFICA: set[str] = {"SYMMETRY", "RESIDUAL"}

_FONT_NAME = "Cambria"
_HEADER_FONT = Font(name=_FONT_NAME, bold=True, color="FFFFFF", size=11)
_FONT_NORMAL = Font(name=_FONT_NAME, size=11)
_HEADER_FILL = PatternFill(start_color="4472C4", end_color="4472C4", fill_type="solid")
_BAND_FILL = PatternFill(start_color="D9E2F3", end_color="D9E2F3", fill_type="solid")
_WHITE_FILL = PatternFill(start_color="FFFFFF", end_color="FFFFFF", fill_type="solid")
_HEADER_ALIGNMENT = Alignment(horizontal="center", vertical="center", wrap_text=True)
_THIN_BORDER = Border(
    left=Side(style="thin", color="B4C6E7"),
    right=Side(style="thin", color="B4C6E7"),
    top=Side(style="thin", color="B4C6E7"),
    bottom=Side(style="thin", color="B4C6E7"),
)

_ORDEN_HOJAS: list[str] = ["pasos", "snapshots", "parametros"]

# ======================================================================
# FORMATO EXCEL: FUNCIONES INTERNAS
# ======================================================================

def _aplicar_formato_encabezado(ws: Any, n_cols: int) -> None:
    for col_idx in range(1, n_cols + 1):
        cell = ws.cell(row=1, column=col_idx)
        cell.font = _HEADER_FONT
        cell.fill = _HEADER_FILL
        cell.alignment = _HEADER_ALIGNMENT
        cell.border = _THIN_BORDER


def _aplicar_cuerpo(ws: Any, columnas: list[str], n_filas: int) -> None:
    """Bordes, fuente, bandas alternas y formato numerico por columna."""
    for col_idx, col_name in enumerate(columnas, start=1):
        col_upper = col_name.upper()
        if col_upper in COLUMNAS_ENTERO:
            formato = "#,##0"
        elif col_upper in COLUMNAS_CIENTIFICA:
            formato = "0.00E+00"
        else:
            formato = None
        for row_idx in range(2, n_filas + 2):
            cell = ws.cell(row=row_idx, column=col_idx)
            cell.border = _THIN_BORDER
            cell.font = _FONT_NORMAL
            cell.fill = _BAND_FILL if row_idx % 2 == 0 else _WHITE_FILL
            if formato is not None:
                cell.number_format = formato
            elif isinstance(cell.value, float):
                cell.number_format = "0.000000"


def _autoajustar_ancho_columnas(ws: Any) -> None:
    for col_cells in ws.columns:
        col_letter = col_cells[0].column_letter
        max_length = max((len(str(c.value)) for c in col_cells if c.value is not None), default=8)
        # x1.3 para la tipografia Cambria
        ws.column_dimensions[col_letter].width = min(max(int(max_length * 1.3) + 5, 12), 60)


def _escribir_hoja(writer: Any, nombre_hoja: str, df: pd.DataFrame) -> None:
    sheet_name = nombre_hoja[:31]
    df.to_excel(writer, sheet_name=sheet_name, index=False)
    ws = writer.sheets[sheet_name]
    columnas = [str(c) for c in df.columns]

    _aplicar_formato_encabezado(ws, len(columnas))
    _aplicar_cuerpo(ws, columnas, len(df))
    _autoajustar_ancho_columnas(ws)
    ws.sheet_view.showGridLines = False
    ws.freeze_panes = "A2"
    logger.info("  Hoja '%s': %d filas", sheet_name, len(df))


# ======================================================================
# TABLAS
# ======================================================================

def _aplanar(datos: dict[str, Any], prefijo: str = "") -> list[tuple[str, Any]]:
    filas: list[tuple[str, Any]] = []
    for clave, valor in datos.items():
        nombre = f"{prefijo}{clave}"
        if isinstance(valor, dict):
            filas.extend(_aplanar(valor, prefijo=f"{nombre}."))
        else:
            filas.append((nombre, valor))
    return filas


def tabla_snapshots(snapshots: list[Path]) -> pd.DataFrame:
    """Conteo de nodos por tipo y rango de T de cada snapshot."""
    filas = []
    for path in snapshots:
        df = leer_snapshot(path)
        conteo = df["kind"].value_counts()
        filas.append({
            "snapshot": Path(path).name,
            "n_nodes": len(df),
            "n_interior": int(conteo.get("interior", 0)),
            "n_dendrite": int(conteo.get("dendrite", 0)),
            "n_outer": int(conteo.get("outer", 0)),
            "T_min": float(df["T"].min()),
            "T_max": float(df["T"].max()),
        })
    return pd.DataFrame(filas)


def tablas_resumen(resumen: dict[str, Any], snapshots: list[Path]) -> dict[str, pd.DataFrame]:
    """Arma las hojas del libro a partir del resumen y los snapshots."""
    parametros = _aplanar(resumen.get("config", {}))
    parametros += [("substeps", resumen.get("substeps")), ("wall_time_s", resumen.get("wall_time_s"))]
    return {
        "pasos": pd.DataFrame(resumen.get("steps", [])),
        "snapshots": tabla_snapshots(snapshots),
        "parametros": pd.DataFrame(
            [(k, "" if v is None else str(v)) for k, v in parametros], columns=["parametro", "valor"]
        ),
    }


# ======================================================================
# EXPORTACION
# ======================================================================

def exportar_excel(
    resumen: dict[str, Any],
    snapshots: list[Path],
    output_dir: Path,
    timestamp: str,
) -> Path:
    """Escribe ``01_resumen_simulacion_TIMESTAMP.xlsx`` en ``output_dir``.

    Raises:
        IoFailure: Si el libro no se puede escribir.
    """
    output_dir = Path(output_dir)
    filepath = output_dir / f"{NOMBRES_SALIDA['excel']}_{timestamp}.xlsx"
    dataframes = tablas_resumen(resumen, snapshots)

    try:
        output_dir.mkdir(parents=True, exist_ok=True)
        with pd.ExcelWriter(filepath, engine=EXCEL_ENGINE) as writer:
            for nombre_hoja in _ORDEN_HOJAS:
                df = dataframes.get(nombre_hoja)
                if df is None or df.empty:
                    continue
                _escribir_hoja(writer, nombre_hoja, df)
    except OSError as exc:
        raise IoFailure(f"No se pudo escribir {filepath}: {exc}") from exc

    logger.info("Excel exportado: %s", filepath)
    return filepath
