"""Ordenamiento de puntos de frontera y diagnostico de densidad.

Recupera el orden de adyacencia sobre la curva de un conjunto de
puntos desordenados construyendo la lista de forma inductiva: desde el
punto 0 se toma el vecino mas cercano aun no colocado. Solo se guardan
la permutacion y su inversa, nunca una copia reordenada de los puntos.

El validador de densidad evalua la parte verificable de las
condiciones de muestreo: el vecino global mas cercano de cada punto
debe ser uno de sus dos adyacentes en el orden.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from config.settings import ORDENAMIENTO
from src.errores import OrderingStalled, TooFewPoints
from src.geometria import NeighborIndex, build_index, polyline_self_intersects

logger = logging.getLogger(__name__)

_VECINOS_INICIALES: int = 10


@dataclass(frozen=True)
class OrderedBoundary:
    """Puntos de entrada mas la permutacion que los recorre en orden de curva.

    Attributes:
        points: Arreglo (k, 2) en el orden original de entrada.
        sigma: ``sigma[j]`` es el indice de entrada del j-esimo punto del recorrido.
        sigma_inv: Inversa de ``sigma``: posicion en el recorrido de cada punto.
    """

    points: np.ndarray
    sigma: np.ndarray
    sigma_inv: np.ndarray

    def __post_init__(self) -> None:
        k = len(self.points)
        if len(self.sigma) != k or len(self.sigma_inv) != k:
            raise ValueError("sigma y sigma_inv deben tener longitud k.")
        if not np.array_equal(np.sort(self.sigma), np.arange(k)):
            raise ValueError("sigma no es una permutacion de 0..k-1.")
        if not np.array_equal(self.sigma_inv[self.sigma], np.arange(k)):
            raise ValueError("sigma_inv no es la inversa de sigma.")

    @property
    def ordenados(self) -> np.ndarray:
        """Puntos en orden de recorrido."""
        return self.points[self.sigma]

    @classmethod
    def desde_permutacion(cls, points: Any, sigma: Any) -> OrderedBoundary:
        sigma = np.asarray(sigma, dtype=int)
        sigma_inv = np.empty_like(sigma)
        sigma_inv[sigma] = np.arange(len(sigma))
        return cls(points=np.asarray(points, dtype=float), sigma=sigma, sigma_inv=sigma_inv)


@dataclass
class DensityReport:
    """Diagnostico de densidad del muestreo.

    Attributes:
        condition3_violations: Indices cuyo vecino global mas cercano no es
            adyacente en el orden.
        min_neighbor_gap_ratio: Minimo de d(x_i, no adyacente mas cercano) /
            max(d(x_i, x_p), d(x_i, x_q)). ``inf`` cuando k = 3.
        ordered_polyline_self_intersects: Auto-interseccion de la poligonal ordenada.
    """

    condition3_violations: list[int] = field(default_factory=list)
    min_neighbor_gap_ratio: float = float("inf")
    ordered_polyline_self_intersects: bool = False

    def to_dict(self) -> dict[str, Any]:
        ratio = self.min_neighbor_gap_ratio
        return {
            "condition3_violations": [int(i) for i in self.condition3_violations],
            "min_neighbor_gap_ratio": None if not np.isfinite(ratio) else float(ratio),
            "ordered_polyline_self_intersects": bool(self.ordered_polyline_self_intersects),
        }


# ======================================================================
# ORDENAMIENTO
# ======================================================================

def _tabla_vecinos(index: NeighborIndex, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Primeros ``m`` vecinos de cada punto con desempate por indice.

    Devuelve la tabla (k, m) y, por fila, cuantas columnas son fiables:
    una columna solo es fiable si su distancia es estrictamente menor
    que la del ultimo vecino consultado (los empates en el borde se
    resuelven despues con ``vecinos_ordenados``).
    """
    k = len(index)
    consulta = min(k, m + 2)
    dist, idx = index.tree.query(index.points, k=consulta)
    orden = np.lexsort((idx, dist), axis=1)
    dist = np.take_along_axis(dist, orden, axis=1)[:, 1:]
    idx = np.take_along_axis(idx, orden, axis=1)[:, 1:]

    if consulta == k:
        fiables = np.full(k, k - 1)
    else:
        fiables = (dist[:, :m] < dist[:, -1:]).sum(axis=1)
    return idx[:, :m], fiables


def order_points(points: Any, max_rank: int | None = None) -> OrderedBoundary:
    """Ordena puntos de una curva cerrada segun su adyacencia.

    Args:
        points: Arreglo o lista de pares (x, y), k >= 3 puntos distintos.
        max_rank: Rango maximo de vecino que se intenta antes de abortar.
            ``None`` equivale a k-1. Default: ``ORDENAMIENTO["max_rango"]``.

    Returns:
        OrderedBoundary cuyo recorrido empieza en el punto 0.

    Raises:
        TooFewPoints: Con menos de 3 puntos.
        OrderingStalled: Si ningun vecino dentro del rango permitido
            queda libre antes de colocar todos los puntos.
    """
    index = build_index(points)
    k = len(index)
    if k < 3:
        raise TooFewPoints(f"Se requieren al menos 3 puntos, se recibieron {k}.")

    limite = ORDENAMIENTO["max_rango"] if max_rank is None else max_rank
    limite = k - 1 if limite is None else min(int(limite), k - 1)

    m = min(_VECINOS_INICIALES, k - 1, limite)
    tabla, fiables = _tabla_vecinos(index, m)
    # Recorrido secuencial sobre listas de Python
    filas = [fila[:n] for fila, n in zip(tabla.tolist(), fiables.tolist())]

    sigma = [0] * k
    colocado = [False] * k
    colocado[0] = True
    actual = 0

    for j in range(1, k):
        siguiente = next((v for v in filas[actual] if not colocado[v]), -1)
        if siguiente < 0:
            siguiente = next((int(v) for v in index.vecinos_ordenados(actual, limite) if not colocado[v]), -1)

        if siguiente < 0:
            raise OrderingStalled(
                f"Ordenamiento detenido en la posicion {j} de {k}: los {limite} "
                f"vecinos mas cercanos del punto {actual} ya estan colocados.",
                posicion=j,
                punto=actual,
            )
        sigma[j] = siguiente
        colocado[siguiente] = True
        actual = siguiente

    logger.debug("Ordenados %d puntos de frontera.", k)
    return OrderedBoundary.desde_permutacion(index.points, sigma)


# ======================================================================
# DIAGNOSTICO DE DENSIDAD
# ======================================================================

def validate_density(ordered: OrderedBoundary) -> DensityReport:
    """Evalua la condicion de vecino adyacente y una cota de separacion.

    Nunca lanza excepciones de diagnostico: siempre devuelve un reporte.
    """
    pts = np.asarray(ordered.points, dtype=float)
    k = len(pts)
    pos = ordered.sigma_inv
    anterior = ordered.sigma[(pos - 1) % k]
    posterior = ordered.sigma[(pos + 1) % k]

    index = build_index(pts)
    consulta = min(k, 4)
    dist, idx = index.tree.query(pts, k=consulta)

    d_ant = np.linalg.norm(pts - pts[anterior], axis=1)
    d_post = np.linalg.norm(pts - pts[posterior], axis=1)
    d_adyacente = np.minimum(d_ant, d_post)
    d_vecino = dist[:, 1]
    violaciones = np.flatnonzero(d_adyacente > d_vecino * (1.0 + 1e-12))

    ratio = float("inf")
    if k > 3:
        no_adyacente = (idx != np.arange(k)[:, None]) & (idx != anterior[:, None]) & (idx != posterior[:, None])
        # con k > 3 siempre queda al menos una columna no adyacente entre las 4 consultadas
        primera = np.argmax(no_adyacente, axis=1)
        d_no_adyacente = dist[np.arange(k), primera]
        ratio = float(np.min(d_no_adyacente / np.maximum(d_ant, d_post)))

    reporte = DensityReport(
        condition3_violations=[int(i) for i in violaciones],
        min_neighbor_gap_ratio=ratio,
        ordered_polyline_self_intersects=polyline_self_intersects(ordered.ordenados),
    )
    if reporte.condition3_violations or reporte.ordered_polyline_self_intersects:
        logger.warning(
            "Densidad insuficiente: %d violaciones de adyacencia, auto-interseccion=%s",
            len(reporte.condition3_violations),
            reporte.ordered_polyline_self_intersects,
        )
    return reporte
