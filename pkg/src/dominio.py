"""Dominio reconstruido: proyeccion, orientacion, pertenencia y normales.

Convierte un ``PeriodicSpline`` en un dominio consultable:

    - Proyeccion al punto mas cercano de la curva. Se localiza con el
      punto de entrada mas cercano ``x_q`` y su posicion ``p = sigma_inv[q]``;
      despues se biseca la funcion de estacionariedad
      ``g(t) = <x - gamma(t), gamma'(t)>`` en cada mitad de
      ``[s_{p-1}, s_{p+1}]``. Las mitades sin cambio de signo usan
      seccion aurea sobre la distancia.
    - Constante de orientacion ``c = -sgn(<x_int - gamma(t_min), gamma''(t_min)>)``.
    - Pertenencia: ``x`` es interior si ``<x - gamma(t_min), N(t_min)> < 0``,
      con ``N = c*gamma''`` donde la normal de curvatura coincide con la
      normal por rotacion de la tangente, y la normal rotada en otro caso
      (tramos concavos y puntos de inflexion). El cero exacto es exterior.

Todas las consultas aceptan lotes de puntos (m, 2) y estan vectorizadas.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any

import numpy as np

from config.settings import DOMINIO
from src.errores import AmbiguousOrientation
from src.geometria import NeighborIndex, build_index, como_puntos, polyline_signed_area
from src.ordenamiento import OrderedBoundary, order_points
from src.spline import PeriodicSpline, fit_periodic_cubic

logger = logging.getLogger(__name__)

_RAZON_AUREA: float = (np.sqrt(5.0) - 1.0) / 2.0


def _punto(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ij->i", a, b)


# ======================================================================
# UTILIDADES SOBRE EL SPLINE
# ======================================================================

def _normal_rotada(spline: PeriodicSpline, sentido: int, t: np.ndarray) -> np.ndarray:
    """Tangente unitaria rotada -90 grados (antihorario) o +90 (horario)."""
    d1 = np.atleast_2d(spline.eval_derivative(t, 1))
    tangente = d1 / np.linalg.norm(d1, axis=1, keepdims=True)
    return sentido * np.column_stack([tangente[:, 1], -tangente[:, 0]])


def _normal_curvatura(spline: PeriodicSpline, c: int, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d2 = np.atleast_2d(spline.eval_derivative(t, 2))
    norma = np.linalg.norm(d2, axis=1)
    unitaria = c * d2 / np.where(norma > 0, norma, 1.0)[:, None]
    return unitaria, norma


class _Proyector:
    """Proyeccion vectorizada de puntos sobre el spline."""

    def __init__(
        self,
        spline: PeriodicSpline,
        ordered: OrderedBoundary,
        index: NeighborIndex,
        tol_relativa: float,
        max_iter: int,
    ) -> None:
        self.spline = spline
        self.ordered = ordered
        self.index = index
        self.tol = tol_relativa * spline.period
        self.max_iter = max_iter

    def _g(self, t: np.ndarray, X: np.ndarray) -> np.ndarray:
        return _punto(X - self.spline.eval(t), self.spline.eval_derivative(t, 1))

    def _f(self, t: np.ndarray, X: np.ndarray) -> np.ndarray:
        return np.linalg.norm(X - self.spline.eval(t), axis=1)

    def _biseccion(self, X: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        g_lo = self._g(lo, X)
        for _ in range(self.max_iter):
            if np.all(hi - lo <= self.tol):
                break
            medio = 0.5 * (lo + hi)
            g_medio = self._g(medio, X)
            derecha = np.sign(g_medio) == np.sign(g_lo)
            lo = np.where(derecha, medio, lo)
            g_lo = np.where(derecha, g_medio, g_lo)
            hi = np.where(derecha, hi, medio)
        return 0.5 * (lo + hi)

    def _seccion_aurea(self, X: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        c = hi - _RAZON_AUREA * (hi - lo)
        d = lo + _RAZON_AUREA * (hi - lo)
        fc, fd = self._f(c, X), self._f(d, X)
        for _ in range(self.max_iter):
            if np.all(hi - lo <= self.tol):
                break
            menor = fc < fd
            lo_n = np.where(menor, lo, c)
            hi_n = np.where(menor, d, hi)
            nuevo = np.where(menor, hi_n - _RAZON_AUREA * (hi_n - lo_n), lo_n + _RAZON_AUREA * (hi_n - lo_n))
            f_nuevo = self._f(nuevo, X)
            c, d = np.where(menor, nuevo, d), np.where(menor, c, nuevo)
            fc, fd = np.where(menor, f_nuevo, fd), np.where(menor, fc, f_nuevo)
            lo, hi = lo_n, hi_n
        return 0.5 * (lo + hi)

    def _minimo_en_mitad(self, X: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        cambio = self._g(lo, X) * self._g(hi, X) <= 0.0
        t = np.empty_like(lo)
        if cambio.any():
            t[cambio] = self._biseccion(X[cambio], lo[cambio], hi[cambio])
        if (~cambio).any():
            t[~cambio] = self._seccion_aurea(X[~cambio], lo[~cambio], hi[~cambio])
        return t

    def proyectar(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        knots = self.spline.knots
        k = len(knots) - 1
        _, q = self.index.tree.query(X)
        p = self.ordered.sigma_inv[q]

        s_p = knots[p]
        s_ant = np.where(p > 0, knots[np.maximum(p - 1, 0)], knots[k - 1] - self.spline.period)
        s_post = knots[p + 1]

        t_izq = self._minimo_en_mitad(X, s_ant, s_p)
        t_der = self._minimo_en_mitad(X, s_p, s_post)

        candidatos = np.column_stack([s_ant, s_p, s_post, t_izq, t_der])
        distancias = np.column_stack([self._f(candidatos[:, j], X) for j in range(candidatos.shape[1])])
        mejor = np.argmin(distancias, axis=1)
        t_min = self.spline.envolver(candidatos[np.arange(len(X)), mejor])
        return t_min, self.spline.eval(t_min)


# ======================================================================
# DOMINIO RECONSTRUIDO
# ======================================================================

@dataclass(frozen=True)
class ReconstructedDomain:
    """Spline mas la maquinaria de consultas de pertenencia.

    Attributes:
        spline: Curva periodica reconstruida.
        ordered: Frontera ordenada que definio el spline.
        index: Indice de vecinos sobre los puntos definitorios.
        orientation_c: Constante de orientacion (-1 o +1).
        interior_probe: Punto interior usado para calcular ``orientation_c``.
        sentido: +1 si el poligono de control es antihorario, -1 si es horario.
    """

    spline: PeriodicSpline
    ordered: OrderedBoundary
    index: NeighborIndex
    orientation_c: int
    interior_probe: np.ndarray
    sentido: int
    coseno_min: float

    def _proyector(self) -> _Proyector:
        return _Proyector(
            self.spline,
            self.ordered,
            self.index,
            DOMINIO["tolerancia_parametro"],
            int(DOMINIO["max_iteraciones"]),
        )

    # ------------------------------------------------------------------
    # CONSULTAS EN LOTE
    # ------------------------------------------------------------------
    def proyectar(self, X: Any) -> tuple[np.ndarray, np.ndarray]:
        """Parametros ``t_min`` y puntos proyectados para un lote (m, 2)."""
        X = como_puntos(np.atleast_2d(X))
        if len(X) == 0:
            return np.empty(0), np.empty((0, 2))
        return self._proyector().proyectar(X)

    def normales(self, t: Any) -> tuple[np.ndarray, np.ndarray]:
        """Normales exteriores unitarias y mascara de curvatura consistente."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        n_rot = _normal_rotada(self.spline, self.sentido, t)
        n_curv, norma = _normal_curvatura(self.spline, self.orientation_c, t)
        consistente = (norma > DOMINIO["umbral_curvatura"]) & (
            _punto(n_curv, n_rot) >= self.coseno_min
        )
        return np.where(consistente[:, None], n_curv, n_rot), consistente

    def contiene(self, X: Any) -> np.ndarray:
        """Pertenencia de un lote de puntos (m, 2); devuelve arreglo booleano."""
        X = como_puntos(np.atleast_2d(X))
        if len(X) == 0:
            return np.zeros(0, dtype=bool)
        t, gamma = self._proyector().proyectar(X)
        normal, _ = self.normales(t)
        return _punto(X - gamma, normal) < 0.0


# ======================================================================
# OPERACIONES
# ======================================================================

def nearest_parameter(dom: ReconstructedDomain, x: Any) -> float:
    """Parametro ``t_min`` del punto de la curva mas cercano a ``x``."""
    t, _ = dom.proyectar(np.asarray(x, dtype=float).reshape(1, 2))
    return float(t[0])


def _producto_orientacion(spline: PeriodicSpline, proyector: _Proyector, probe: np.ndarray) -> tuple[float, float]:
    t, gamma = proyector.proyectar(probe.reshape(1, 2))
    d2 = spline.eval_derivative(t, 2)
    return float(_punto(probe.reshape(1, 2) - gamma, d2)[0]), float(t[0])


def orientation_constant(spline: PeriodicSpline, interior_probe: Any, ordered: OrderedBoundary | None = None) -> int:
    """Constante ``c`` que hace negativo el criterio de pertenencia en la sonda.

    Raises:
        AmbiguousOrientation: Si el producto escalar es menor que
            ``DOMINIO["umbral_ambiguedad"]`` en valor absoluto.
    """
    probe = np.asarray(interior_probe, dtype=float).reshape(2)
    if ordered is None:
        ordered = OrderedBoundary.desde_permutacion(spline.control_points, np.arange(len(spline.control_points)))
    proyector = _Proyector(
        spline, ordered, build_index(ordered.points),
        DOMINIO["tolerancia_parametro"], int(DOMINIO["max_iteraciones"]),
    )
    producto, _ = _producto_orientacion(spline, proyector, probe)
    if abs(producto) < DOMINIO["umbral_ambiguedad"]:
        raise AmbiguousOrientation(
            f"Sonda {probe.tolist()} ambigua: producto escalar {producto:.3e}.",
            producto=producto,
        )
    return -1 if producto > 0 else 1


def contains(dom: ReconstructedDomain, x: Any) -> bool:
    """True si ``x`` es interior al dominio."""
    return bool(dom.contiene(np.asarray(x, dtype=float).reshape(1, 2))[0])


def outward_normal(dom: ReconstructedDomain, t: float) -> np.ndarray:
    """Normal exterior unitaria en el parametro ``t``."""
    normal, _ = dom.normales(np.array([t]))
    return normal[0]


# ======================================================================
# CONSTRUCCION
# ======================================================================

def _sonda_alternativa(spline: PeriodicSpline, sentido: int, factor: float) -> np.ndarray:
    """Punto de control mas lejano al centroide, desplazado hacia dentro.

    El punto mas lejano esta en la envolvente convexa, por lo que la
    curva es localmente convexa a su alrededor.
    """
    pts = spline.control_points
    j = int(np.argmax(np.linalg.norm(pts - pts.mean(axis=0), axis=1)))
    cuerdas = np.diff(spline.knots)
    espaciado = 0.5 * (cuerdas[j - 1] + cuerdas[j])
    n_rot = _normal_rotada(spline, sentido, np.array([spline.knots[j]]))[0]
    return pts[j] - factor * espaciado * n_rot


def build_domain(
    boundary: OrderedBoundary | Any,
    interior_probe: Any | None = None,
    coseno_min: float | None = None,
) -> ReconstructedDomain:
    """Reconstruye el dominio a partir de puntos (ordenados o no).

    Args:
        boundary: ``OrderedBoundary`` o arreglo de puntos desordenados.
        interior_probe: Punto interior garantizado por el llamador. Si es
            None se usa el centroide, con un reintento automatico.
        coseno_min: Coseno minimo entre normal de curvatura y normal rotada.

    Raises:
        AmbiguousOrientation: Si ninguna sonda produce una orientacion valida.
    """
    ordered = boundary if isinstance(boundary, OrderedBoundary) else order_points(boundary)
    spline = fit_periodic_cubic(ordered)
    index = build_index(ordered.points)
    sentido = 1 if polyline_signed_area(ordered.ordenados) > 0 else -1
    coseno_min = DOMINIO["coseno_min_normal"] if coseno_min is None else coseno_min
    proyector = _Proyector(
        spline, ordered, index, DOMINIO["tolerancia_parametro"], int(DOMINIO["max_iteraciones"])
    )

    def _intentar(probe: np.ndarray) -> tuple[int | None, bool]:
        producto, t = _producto_orientacion(spline, proyector, probe)
        if abs(producto) < DOMINIO["umbral_ambiguedad"]:
            return None, False
        tt = np.array([t])
        n_rot = _normal_rotada(spline, sentido, tt)
        # En un tramo concavo gamma'' apunta hacia fuera y el signo se invierte
        if _punto(np.atleast_2d(spline.eval_derivative(tt, 2)), n_rot)[0] >= 0.0:
            logger.debug("Sonda %s proyecta sobre un tramo concavo (t=%.4f).", probe.tolist(), t)
            return None, False
        c = -1 if producto > 0 else 1
        n_curv, norma = _normal_curvatura(spline, c, tt)
        consistente = bool(norma[0] > DOMINIO["umbral_curvatura"] and _punto(n_curv, n_rot)[0] >= coseno_min)
        return c, consistente

    if interior_probe is not None:
        probe = np.asarray(interior_probe, dtype=float).reshape(2)
        c, _ = _intentar(probe)
        if c is None:
            logger.debug("Sonda del usuario no valida; reintentando con sonda desplazada.")
            alternativa = _sonda_alternativa(spline, sentido, float(DOMINIO["factor_sonda"]))
            c, _ = _intentar(alternativa)
            if c is None:
                raise AmbiguousOrientation(f"Sonda {probe.tolist()} ambigua.")
            probe = alternativa
    else:
        probe = ordered.points.mean(axis=0)
        c, consistente = _intentar(probe)
        if c is None or not consistente:
            logger.debug("Sonda del centroide no valida; reintentando con sonda desplazada.")
            probe = _sonda_alternativa(spline, sentido, float(DOMINIO["factor_sonda"]))
            c, consistente = _intentar(probe)
            if c is None or not consistente:
                raise AmbiguousOrientation("No se encontro una sonda interior valida.")

    return ReconstructedDomain(
        spline=spline,
        ordered=ordered,
        index=index,
        orientation_c=int(c),
        interior_probe=probe,
        sentido=sentido,
        coseno_min=float(coseno_min),
    )
