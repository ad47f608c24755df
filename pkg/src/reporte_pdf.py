"""Generador del reporte PDF de una corrida de crecimiento dendritico.

Produce un PDF con orientacion horizontal (Landscape) a partir del
``run_summary.json`` y de los snapshots ``step_XXXXX.csv`` de una corrida:

    - Portada con parametros fisicos y de discretizacion.
    - Secuencia temporal de la nube de nodos coloreada por temperatura.
    - Evolucion del area encerrada y del numero de nodos.
    - Diagnosticos de simetria y radio de punta.
    - Tabla resumen por snapshot, truncada para caber en una pagina.

Uso:
    from src.reporte_pdf import generar_reporte_pdf
    generar_reporte_pdf(resumen, snapshots, output_path, timestamp)
"""

from __future__ import annotations

import io
import logging
from pathlib import Path
from typing import Any

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from reportlab.lib import colors
from reportlab.lib.enums import TA_CENTER, TA_JUSTIFY, TA_LEFT
from reportlab.lib.pagesizes import A4, landscape
from reportlab.lib.styles import ParagraphStyle, getSampleStyleSheet
from reportlab.lib.units import cm
from reportlab.platypus import (
    Image,
    PageBreak,
    Paragraph,
    SimpleDocTemplate,
    Spacer,
    Table,
    TableStyle,
)

from src.errores import IoFailure
from src.simulacion import leer_snapshot

logger = logging.getLogger(__name__)

# ======================================================================
# CONFIGURACION DE ESTILOS Y COLORES
# ======================================================================

_COLOR_AZUL    = "#4472C4"
_COLOR_VERDE   = "#548235"
_COLOR_ROJO    = "#C00000"
_COLOR_GRIS    = "#A6A6A6"
_COLOR_FONDO   = "#F2F2F2"

_PAGE_WIDTH, _PAGE_HEIGHT = landscape(A4)

_STYLES = getSampleStyleSheet()
_STYLE_TITLE = ParagraphStyle(
    "ReportTitle",
    parent=_STYLES["Heading1"],
    fontSize=18,
    textColor=colors.HexColor(_COLOR_AZUL),
    alignment=TA_CENTER,
    spaceAfter=10,
    fontName="Helvetica-Bold",
)
_STYLE_SUBTITLE = ParagraphStyle(
    "ReportSubtitle",
    parent=_STYLES["Heading2"],
    fontSize=14,
    textColor=colors.HexColor("#333333"),
    alignment=TA_LEFT,
    spaceAfter=10,
    fontName="Helvetica-Bold",
)
_STYLE_BODY = ParagraphStyle(
    "ReportBody",
    parent=_STYLES["Normal"],
    fontSize=10,
    textColor=colors.HexColor("#404040"),
    alignment=TA_JUSTIFY,
    spaceAfter=10,
    leading=14,
    fontName="Helvetica",
)

_MAX_PANELES = 6

# ======================================================================
# UTILIDADES DE RENDERIZADO
# ======================================================================

def _truncar_df_para_pdf(df: pd.DataFrame, max_rows: int = 14) -> pd.DataFrame:
    """Conserva la primera y la ultima fila y muestrea el resto uniformemente."""
    if len(df) <= max_rows:
        return df
    idx = np.unique(np.linspace(0, len(df) - 1, max_rows).round().astype(int))
    return df.iloc[idx].reset_index(drop=True)


def _formatear_valor(col_name: str, val: Any) -> str:
    if val is None or (isinstance(val, float) and np.isnan(val)):
        return ""
    col_lower = str(col_name).lower()
    if col_lower.startswith("n_") or col_lower == "step":
        return f"{int(val):,}"
    if isinstance(val, (float, int, np.floating, np.integer)):
        if col_lower in ("symmetry", "residual"):
            return f"{float(val):.2e}"
        return f"{float(val):.5f}"
    return str(val)


def _crear_tabla_estilo(df: pd.DataFrame, col_widths: list[float] | None = None) -> Table | Paragraph:
    """Convierte un DataFrame a una tabla ReportLab con encabezado azul y bandas alternas."""
    if df.empty:
        return Paragraph("No hay datos disponibles para esta seccion.", _STYLE_BODY)

    data = [df.columns.tolist()]
    for _, row in df.iterrows():
        data.append([_formatear_valor(c, v) for c, v in zip(df.columns, row)])

    tabla = Table(data, colWidths=col_widths, repeatRows=1)
    estilo = TableStyle([
        ("BACKGROUND", (0, 0), (-1, 0), colors.HexColor(_COLOR_AZUL)),
        ("TEXTCOLOR", (0, 0), (-1, 0), colors.whitesmoke),
        ("ALIGN", (0, 0), (-1, -1), "CENTER"),
        ("VALIGN", (0, 0), (-1, -1), "MIDDLE"),
        ("FONTNAME", (0, 0), (-1, 0), "Helvetica-Bold"),
        ("FONTNAME", (0, 1), (-1, -1), "Helvetica"),
        ("FONTSIZE", (0, 0), (-1, -1), 8),
        ("TOPPADDING", (0, 0), (-1, -1), 4),
        ("BOTTOMPADDING", (0, 0), (-1, -1), 4),
        ("BACKGROUND", (0, 1), (-1, -1), colors.white),
        ("TEXTCOLOR", (0, 1), (-1, -1), colors.HexColor("#333333")),
        ("GRID", (0, 0), (-1, -1), 0.5, colors.HexColor("#B4C6E7")),
    ])
    for row_idx in range(2, len(data), 2):
        estilo.add("BACKGROUND", (0, row_idx), (-1, row_idx), colors.HexColor(_COLOR_FONDO))
    tabla.setStyle(estilo)
    return tabla


def _generar_imagen_grafico(fig: plt.Figure, max_w_cm: float = 24.0, max_h_cm: float = 12.0) -> Image:
    """Convierte una figura Matplotlib a Imagen ReportLab escalada a la caja dada."""
    buf = io.BytesIO()
    fig.savefig(buf, format="png", bbox_inches="tight", dpi=150)
    buf.seek(0)
    img = Image(buf)

    factor = min((max_w_cm * cm) / img.drawWidth, (max_h_cm * cm) / img.drawHeight)
    img.drawWidth = img.drawWidth * factor
    img.drawHeight = img.drawHeight * factor

    plt.close(fig)
    return img


def _elegir_snapshots(snapshots: list[Path], max_paneles: int = _MAX_PANELES) -> list[Path]:
    if len(snapshots) <= max_paneles:
        return list(snapshots)
    idx = np.unique(np.linspace(0, len(snapshots) - 1, max_paneles).round().astype(int))
    return [snapshots[i] for i in idx]


# ======================================================================
# GENERADORES DE SECCIONES (PAGINAS)
# ======================================================================

def _seccion_portada(resumen: dict[str, Any], timestamp: str, story: list[Any]) -> None:
    cfg = resumen.get("config", {})
    story.append(Spacer(1, 4 * cm))
    story.append(Paragraph("Reporte de Crecimiento Dendritico", _STYLE_TITLE))
    story.append(Paragraph(f"Generado: {timestamp}", _STYLE_BODY))
    story.append(Spacer(1, 1 * cm))

    espaciado = cfg.get("spacing", {})
    filas = [
        ("Radio exterior R_m", cfg.get("R_m")),
        ("Radio inicial R_d", cfg.get("R_d")),
        ("Velocidad normal v_d", cfg.get("v_d")),
        ("Paso de tiempo dt", cfg.get("dt")),
        ("Numero de pasos N_t", cfg.get("N_t")),
        ("h_min / h_max", f"{espaciado.get('h_min')} / {espaciado.get('h_max')}"),
        ("Subpasos de Euler", resumen.get("substeps")),
        ("Semilla", resumen.get("seed")),
        ("Tiempo de computo (s)", f"{resumen.get('wall_time_s', 0.0):.1f}"),
    ]
    df = pd.DataFrame(filas, columns=["Parametro", "Valor"]).astype(str)
    story.append(_crear_tabla_estilo(df, col_widths=[7 * cm, 6 * cm]))
    story.append(PageBreak())


def _seccion_secuencia(snapshots: list[Path], story: list[Any]) -> None:
    elegidos = _elegir_snapshots(snapshots)
    if not elegidos:
        return
    story.append(Paragraph("Secuencia temporal de la nube de nodos", _STYLE_SUBTITLE))
    story.append(Paragraph(
        "Cada panel muestra los nodos de un snapshot coloreados por temperatura. "
        "Los nodos de la dendrita se marcan en rojo sobre la interfase con T = 0.",
        _STYLE_BODY,
    ))

    columnas = min(3, len(elegidos))
    filas = int(np.ceil(len(elegidos) / columnas))
    fig, ejes = plt.subplots(filas, columnas, figsize=(4.2 * columnas, 4.0 * filas), squeeze=False)
    escala = None
    for eje, path in zip(ejes.ravel(), elegidos):
        df = leer_snapshot(path)
        escala = eje.scatter(df["x"], df["y"], c=df["T"], s=3, cmap="viridis", vmin=0.0, vmax=1.0)
        dendrita = df[df["kind"] == "dendrite"]
        eje.plot(dendrita["x"], dendrita["y"], ".", color=_COLOR_ROJO, markersize=2)
        eje.set_title(path.stem, fontsize=9)
        eje.set_aspect("equal")
        eje.set_xticks([])
        eje.set_yticks([])
    for eje in ejes.ravel()[len(elegidos):]:
        eje.axis("off")
    if escala is not None:
        fig.colorbar(escala, ax=ejes.ravel().tolist(), shrink=0.8, label="T")
    story.append(_generar_imagen_grafico(fig, max_w_cm=24.0, max_h_cm=14.0))
    story.append(PageBreak())


def _seccion_crecimiento(df_pasos: pd.DataFrame, story: list[Any]) -> None:
    story.append(Paragraph("Area encerrada y numero de nodos", _STYLE_SUBTITLE))
    story.append(Paragraph(
        "El area de la dendrita crece con la velocidad normal impuesta; el numero de "
        "nodos sigue al perimetro porque la frontera se re-discretiza en cada paso.",
        _STYLE_BODY,
    ))
    fig, eje = plt.subplots(figsize=(10, 4.5))
    eje.plot(df_pasos["time"], df_pasos["area"], color=_COLOR_AZUL, label="Area")
    eje.set_xlabel("t")
    eje.set_ylabel("Area", color=_COLOR_AZUL)
    eje.grid(alpha=0.3)
    eje2 = eje.twinx()
    eje2.plot(df_pasos["time"], df_pasos["n_nodes"], color=_COLOR_VERDE, label="Nodos")
    eje2.set_ylabel("Nodos", color=_COLOR_VERDE)
    story.append(_generar_imagen_grafico(fig))
    story.append(PageBreak())


def _seccion_diagnosticos(df_pasos: pd.DataFrame, story: list[Any]) -> None:
    story.append(Paragraph("Diagnosticos de simetria y punta", _STYLE_SUBTITLE))
    story.append(Paragraph(
        "La metrica de simetria compara r(theta) con r(theta + pi/2); un valor cercano a "
        "cero indica que la forma conserva la simetria de orden cuatro de la semilla.",
        _STYLE_BODY,
    ))
    fig, (eje1, eje2) = plt.subplots(1, 2, figsize=(11, 4.2))
    eje1.semilogy(df_pasos["time"], df_pasos["symmetry"].clip(lower=1e-16), color=_COLOR_AZUL)
    eje1.set_title("Simetria", fontsize=10)
    eje1.set_xlabel("t")
    eje1.grid(alpha=0.3)
    eje2.plot(df_pasos["time"], df_pasos["tip_radius"], color=_COLOR_ROJO)
    eje2.set_title("Radio de punta", fontsize=10)
    eje2.set_xlabel("t")
    eje2.grid(alpha=0.3)
    story.append(_generar_imagen_grafico(fig))
    story.append(PageBreak())


def _seccion_tabla_pasos(df_pasos: pd.DataFrame, story: list[Any]) -> None:
    story.append(Paragraph("Resumen por paso (muestreado)", _STYLE_SUBTITLE))
    columnas = ["step", "time", "n_nodes", "n_interior", "n_dendrite", "area", "symmetry", "T_min", "T_max", "residual"]
    vista = _truncar_df_para_pdf(df_pasos[[c for c in columnas if c in df_pasos.columns]])
    story.append(_crear_tabla_estilo(vista))


# ======================================================================
# FUNCION PRINCIPAL
# ======================================================================

def generar_reporte_pdf(
    resumen: dict[str, Any],
    snapshots: list[Path],
    output_path: Path,
    timestamp: str,
) -> Path:
    """Genera el PDF de la corrida.

    Args:
        resumen: Contenido de ``run_summary.json``.
        snapshots: Rutas de los CSV de snapshot en orden de paso.
        output_path: Ruta destino del PDF.
        timestamp: Fecha legible para la portada.

    Returns:
        La ruta del PDF escrito.

    Raises:
        IoFailure: Si el documento no se puede escribir.
    """
    output_path = Path(output_path)
    try:
        output_path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"No se pudo crear {output_path.parent}: {exc}") from exc

    doc = SimpleDocTemplate(
        str(output_path),
        pagesize=landscape(A4),
        leftMargin=1.5 * cm,
        rightMargin=1.5 * cm,
        topMargin=1.5 * cm,
        bottomMargin=1.5 * cm,
    )
    df_pasos = pd.DataFrame(resumen.get("steps", []))

    story: list[Any] = []
    _seccion_portada(resumen, timestamp, story)
    _seccion_secuencia(list(snapshots), story)
    if not df_pasos.empty:
        _seccion_crecimiento(df_pasos, story)
        _seccion_diagnosticos(df_pasos, story)
        _seccion_tabla_pasos(df_pasos, story)

    try:
        doc.build(story)
    except Exception as exc:
        logger.error("Error al construir el PDF %s: %s", output_path, exc)
        raise IoFailure(f"No se pudo escribir {output_path}: {exc}") from exc

    logger.info("PDF generado: %s", output_path)
    return output_path
