"""Primitivas geometricas 2D compartidas por todos los modulos.

Los puntos se representan como arreglos ``numpy`` de forma ``(k, 2)``
en unidades adimensionales. El indice de vecinos es estatico: se
reconstruye completo cada vez que cambia el conjunto de puntos.

Incluye:
    - Validacion de arreglos de puntos (finitos, forma correcta).
    - ``NeighborIndex`` sobre ``scipy.spatial.cKDTree``.
    - Consulta del n-esimo vecino con desempate por indice.
    - Area con signo y auto-interseccion de poligonales cerradas.
    - Lectura y escritura de CSV ``x,y``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
from scipy.spatial import cKDTree

from config.settings import GEOMETRIA
from src.errores import (
    ConfigError,
    DuplicatePoints,
    EmptyInput,
    InvalidPoints,
    IoFailure,
    RankOutOfRange,
    TooFewPoints,
)

logger = logging.getLogger(__name__)

# ======================================================================
# VALIDACION DE PUNTOS
# ======================================================================

def como_puntos(points: Any) -> np.ndarray:
    """Convierte la entrada a un arreglo ``float64`` de forma (k, 2).

    Raises:
        InvalidPoints: Si la forma no es (k, 2) o hay coordenadas no finitas.
    """
    arr = np.asarray(points, dtype=float)
    if arr.size == 0:
        return arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidPoints(f"Se esperaba un arreglo (k, 2), se recibio {arr.shape}.")
    if not np.isfinite(arr).all():
        fila = int(np.flatnonzero(~np.isfinite(arr).all(axis=1))[0])
        raise InvalidPoints(f"Coordenada no finita en el punto {fila}.", fila=fila)
    return arr


# ======================================================================
# INDICE DE VECINOS
# ======================================================================

@dataclass(frozen=True)
class NeighborIndex:
    """Indice estatico de vecinos mas cercanos.

    Attributes:
        points: Arreglo (k, 2) inmutable con los puntos indexados.
        tree: Arbol k-d construido sobre ``points``.
    """

    points: np.ndarray
    tree: cKDTree

    def __len__(self) -> int:
        return len(self.points)

    def vecinos_ordenados(self, query_index: int, n: int) -> np.ndarray:
        """Devuelve los ``n`` vecinos mas cercanos (sin el propio punto).

        El orden es por distancia no decreciente y, en empates, por
        indice menor. Los empates en el radio del n-esimo vecino se
        resuelven con una consulta de bola para no depender del arbol.
        """
        k = len(self.points)
        n = min(n, k - 1)
        if n <= 0:
            return np.empty(0, dtype=int)
        centro = self.points[query_index]
        dist, _ = self.tree.query(centro, k=n + 1)
        radio = float(np.atleast_1d(dist)[-1])
        candidatos = np.asarray(
            self.tree.query_ball_point(centro, r=radio * (1.0 + 1e-12) + 1e-300),
            dtype=int,
        )
        candidatos = candidatos[candidatos != query_index]
        d = np.linalg.norm(self.points[candidatos] - centro, axis=1)
        orden = np.lexsort((candidatos, d))
        return candidatos[orden][:n]


def build_index(points: Any, tolerancia: float | None = None) -> NeighborIndex:
    """Construye el indice de vecinos sobre un conjunto de puntos.

    Args:
        points: Arreglo o lista de pares (x, y).
        tolerancia: Distancia por debajo de la cual dos puntos se
            consideran duplicados. Default: ``GEOMETRIA["tolerancia_duplicados"]``.

    Returns:
        NeighborIndex sobre exactamente los puntos de entrada.

    Raises:
        EmptyInput: Si no hay puntos.
        DuplicatePoints: Si dos puntos estan a menos de ``tolerancia``.
    """
    tol = GEOMETRIA["tolerancia_duplicados"] if tolerancia is None else tolerancia
    arr = como_puntos(points)
    if len(arr) == 0:
        raise EmptyInput("El conjunto de puntos esta vacio.")

    arr = arr.copy()
    arr.setflags(write=False)
    tree = cKDTree(arr)

    pares = tree.query_pairs(tol, output_type="ndarray")
    if len(pares) > 0:
        i, j = sorted(int(v) for v in pares[np.lexsort((pares[:, 1], pares[:, 0]))][0])
        raise DuplicatePoints(
            f"Puntos duplicados en los indices {i} y {j}.", par=(i, j)
        )
    return NeighborIndex(points=arr, tree=tree)


def nth_nearest(index: NeighborIndex, query_index: int, n: int) -> int:
    """Indice del n-esimo punto mas cercano a ``query_index`` (sin contarse a si mismo).

    Raises:
        RankOutOfRange: Si ``n`` no esta en [1, k-1] o el indice no es valido.
    """
    k = len(index)
    if not 0 <= query_index < k:
        raise RankOutOfRange(f"Indice de consulta {query_index} fuera de [0, {k - 1}].")
    if not 1 <= n <= k - 1:
        raise RankOutOfRange(f"Rango n={n} fuera de [1, {k - 1}].", n=n)
    return int(index.vecinos_ordenados(query_index, n)[n - 1])


# ======================================================================
# DIAGNOSTICOS DE POLIGONALES
# ======================================================================

def polyline_signed_area(loop: Any) -> float:
    """Area con signo (formula del cordon) de una poligonal cerrada.

    Positiva para recorridos antihorarios, negativa para horarios.

    Raises:
        TooFewPoints: Con menos de 3 puntos.
    """
    arr = como_puntos(loop)
    if len(arr) < 3:
        raise TooFewPoints("Se requieren al menos 3 puntos para el area.")
    x, y = arr[:, 0], arr[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _orientacion(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    return (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (
        b[..., 1] - a[..., 1]
    ) * (c[..., 0] - a[..., 0])


def _sobre_segmento(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """c colineal con ab y dentro de su caja envolvente."""
    return (
        (np.minimum(a[..., 0], b[..., 0]) <= c[..., 0])
        & (c[..., 0] <= np.maximum(a[..., 0], b[..., 0]))
        & (np.minimum(a[..., 1], b[..., 1]) <= c[..., 1])
        & (c[..., 1] <= np.maximum(a[..., 1], b[..., 1]))
    )


def polyline_self_intersects(loop: Any) -> bool:
    """True si dos segmentos no adyacentes del lazo cerrado se intersecan.

    Considera tanto cruces propios como contactos colineales.

    Raises:
        TooFewPoints: Con menos de 3 puntos.
    """
    arr = como_puntos(loop)
    k = len(arr)
    if k < 3:
        raise TooFewPoints("Se requieren al menos 3 puntos para el diagnostico.")

    inicio = arr
    fin = np.roll(arr, -1, axis=0)
    i, j = np.triu_indices(k, k=2)
    no_adyacentes = ~((i == 0) & (j == k - 1))
    i, j = i[no_adyacentes], j[no_adyacentes]
    if len(i) == 0:
        return False

    p1, p2 = inicio[i], fin[i]
    q1, q2 = inicio[j], fin[j]
    d1 = _orientacion(p1, p2, q1)
    d2 = _orientacion(p1, p2, q2)
    d3 = _orientacion(q1, q2, p1)
    d4 = _orientacion(q1, q2, p2)

    propio = (d1 * d2 < 0) & (d3 * d4 < 0)
    contacto = (
        ((d1 == 0) & _sobre_segmento(p1, p2, q1))
        | ((d2 == 0) & _sobre_segmento(p1, p2, q2))
        | ((d3 == 0) & _sobre_segmento(q1, q2, p1))
        | ((d4 == 0) & _sobre_segmento(q1, q2, p2))
    )
    return bool(np.any(propio | contacto))


# ======================================================================
# ENTRADA / SALIDA CSV
# ======================================================================

def leer_puntos_csv(path: Path) -> np.ndarray:
    """Lee un CSV con encabezado ``x,y`` y devuelve un arreglo (k, 2).

    Raises:
        IoFailure: Si el archivo no se puede leer.
        ConfigError: Si el archivo esta vacio, no es un CSV valido o le
            faltan las columnas ``x``/``y`` numericas.
    """
    try:
        df = pd.read_csv(path)
    except OSError as exc:
        raise IoFailure(f"No se pudo leer {path}: {exc}") from exc
    except pd.errors.EmptyDataError as exc:
        raise ConfigError(f"{path} esta vacio.") from exc
    except pd.errors.ParserError as exc:
        raise ConfigError(f"{path} no es un CSV valido: {exc}") from exc

    df.columns = pd.Index([str(c).strip().lower() for c in df.columns])
    if not {"x", "y"}.issubset(df.columns):
        raise ConfigError(f"{path} debe tener encabezado 'x,y' (columnas: {list(df.columns)}).")
    try:
        arr = df[["x", "y"]].to_numpy(dtype=float)
    except ValueError as exc:
        raise ConfigError(f"{path} contiene coordenadas no numericas.") from exc
    logger.info("Leidos %d puntos desde %s", len(arr), Path(path).name)
    return como_puntos(arr)


def escribir_csv(df: pd.DataFrame, path: Path) -> Path:
    """Escribe un DataFrame con 17 cifras significativas.

    Raises:
        IoFailure: Ante cualquier error del sistema de archivos.
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        df.to_csv(path, index=False, float_format="%.17g")
    except OSError as exc:
        raise IoFailure(f"No se pudo escribir {path}: {exc}") from exc
    return path
