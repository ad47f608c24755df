"""Discretizacion de dominios reconstruidos: nodos de frontera e interiores.

Flujo:
    1. ``resample_boundary`` marcha sobre la curva con pasos de longitud
       de arco iguales al espaciado local y reescala todos los huecos
       para que el lazo cierre exactamente.
    2. ``fill_interior`` genera nodos interiores con un frente de avance
       sembrado desde los nodos de frontera: cada nodo del frente
       propone ``m`` candidatos sobre un circulo de radio ``h(nodo)`` y
       se aceptan los que quedan dentro de la region y a mas de
       ``factor_aceptacion * h`` de cualquier nodo existente.

El frente se procesa por generaciones: todos los nodos de una generacion
proponen a la vez, se filtran contra los nodos previos con un arbol k-d
estatico, se clasifican en un solo llamado vectorizado y se aceptan en
orden de propuesta contra las aceptaciones previas de la misma generacion.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.spatial import cKDTree

from config.settings import DISCRETIZACION, SEMILLA
from src.dominio import ReconstructedDomain
from src.errores import CurveTooShort, RegionEmpty
from src.geometria import como_puntos

logger = logging.getLogger(__name__)

_MUESTRAS_POR_TRAMO: int = 32


# ======================================================================
# PERFIL DE ESPACIADO
# ======================================================================

@dataclass(frozen=True)
class SpacingProfile:
    """Espaciado local ``h(x)`` graduado alrededor de puntos foco.

    Attributes:
        h_min: Espaciado sobre los puntos foco.
        h_max: Espaciado a distancia ``transition_radius`` o mayor.
        focus_points: Arreglo (f, 2); vacio implica ``h = h_max`` en todo el plano.
        transition_radius: Distancia de la transicion lineal.
    """

    h_min: float
    h_max: float
    focus_points: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))
    transition_radius: float = 1.0

    def __post_init__(self) -> None:
        if not 0 < self.h_min <= self.h_max:
            raise ValueError(f"Se requiere 0 < h_min <= h_max (h_min={self.h_min}, h_max={self.h_max}).")
        if self.transition_radius <= 0:
            raise ValueError("transition_radius debe ser positivo.")
        object.__setattr__(self, "focus_points", como_puntos(np.asarray(self.focus_points).reshape(-1, 2)))

    @classmethod
    def constante(cls, h: float) -> SpacingProfile:
        return cls(h_min=h, h_max=h)

    @cached_property
    def _arbol(self) -> cKDTree | None:
        return cKDTree(self.focus_points) if len(self.focus_points) else None

    def h(self, X: Any) -> np.ndarray:
        """Espaciado en un lote de puntos (m, 2)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self._arbol is None:
            return np.full(len(X), self.h_max)
        d, _ = self._arbol.query(X)
        fraccion = np.clip(d / self.transition_radius, 0.0, 1.0)
        return self.h_min + (self.h_max - self.h_min) * fraccion


def spacing_at(profile: SpacingProfile, x: Any) -> float:
    """Espaciado local en el punto ``x``."""
    return float(profile.h(np.asarray(x, dtype=float).reshape(1, 2))[0])


# ======================================================================
# NODOS DE FRONTERA
# ======================================================================

@dataclass(frozen=True)
class BoundaryNodes:
    """Nodos sobre una curva, en orden de recorrido.

    Attributes:
        points: Posiciones (n, 2).
        normals: Normales exteriores unitarias (n, 2).
        params: Parametro del spline de cada nodo.
        tag: Etiqueta de frontera (``outer`` o ``dendrite``).
        domain: Dominio del que se muestrearon los nodos.
    """

    points: np.ndarray
    normals: np.ndarray
    params: np.ndarray
    tag: str
    domain: ReconstructedDomain | None = None

    def __len__(self) -> int:
        return len(self.points)

    def huecos(self) -> np.ndarray:
        """Distancias euclidianas entre nodos consecutivos, incluido el cierre."""
        return np.linalg.norm(np.roll(self.points, -1, axis=0) - self.points, axis=1)


@dataclass
class Discretization:
    """Conjunto completo de nodos de una region."""

    boundary: list[BoundaryNodes]
    interior_nodes: np.ndarray

    @property
    def n_nodos(self) -> int:
        return len(self.interior_nodes) + sum(len(b) for b in self.boundary)


def _tabla_longitud(dom: ReconstructedDomain) -> tuple[np.ndarray, np.ndarray]:
    """Tabla (t, s) de longitud de arco acumulada sobre un periodo.

    La longitud en cada nudo sale de ``PeriodicSpline.arc_length``; dentro
    de un tramo se interpola con un Hermite cubico cuya derivada es la
    rapidez de la curva.
    """
    spline = dom.spline
    knots = spline.knots
    tramos = [spline.arc_length(a, b) for a, b in zip(knots[:-1], knots[1:])]
    acumulada = CubicHermiteSpline(knots, np.concatenate(([0.0], np.cumsum(tramos))), spline.rapidez(knots))

    fracciones = np.linspace(0.0, 1.0, _MUESTRAS_POR_TRAMO, endpoint=False)
    t = (knots[:-1, None] + np.diff(knots)[:, None] * fracciones[None, :]).ravel()
    t = np.append(t, knots[-1])
    return t, acumulada(t)


def resample_boundary(dom: ReconstructedDomain, profile: SpacingProfile, tag: str) -> BoundaryNodes:
    """Remuestrea la curva con el espaciado local del perfil.

    Args:
        dom: Dominio reconstruido cuya curva se remuestrea.
        profile: Perfil de espaciado.
        tag: Etiqueta de los nodos (``outer``/``dendrite``).

    Returns:
        BoundaryNodes en orden de recorrido, empezando en ``s_0``.

    Raises:
        CurveTooShort: Si la longitud total no supera
            ``factor_curva_corta * h_min``.
    """
    t_tabla, s_tabla = _tabla_longitud(dom)
    longitud = float(s_tabla[-1])
    if longitud <= DISCRETIZACION["factor_curva_corta"] * profile.h_min:
        raise CurveTooShort(
            f"Curva de longitud {longitud:.4g} demasiado corta para h_min={profile.h_min:.4g}."
        )

    huecos: list[float] = []
    s = 0.0
    while s < longitud:
        t = np.interp(s, s_tabla, t_tabla)
        h = spacing_at(profile, dom.spline.eval(t))
        huecos.append(h)
        s += h

    # el n con |S_n - L| minimo esta entre los dos ultimos pasos
    acumulado = np.cumsum(huecos)
    n = int(np.argmin(np.abs(acumulado - longitud))) + 1
    if n < 3:
        huecos_arr = np.full(3, longitud / 3.0)
    else:
        huecos_arr = np.asarray(huecos[:n]) * (longitud / acumulado[n - 1])
    n = len(huecos_arr)

    s_nodos = np.concatenate(([0.0], np.cumsum(huecos_arr)[:-1]))
    t_nodos = np.interp(s_nodos, s_tabla, t_tabla)
    puntos = dom.spline.eval(t_nodos)
    normales, _ = dom.normales(t_nodos)

    logger.debug("Frontera '%s' remuestreada: %d nodos, longitud %.5f", tag, n, longitud)
    return BoundaryNodes(points=puntos, normals=normales, params=t_nodos, tag=tag, domain=dom)


# ======================================================================
# RELLENO INTERIOR (FRENTE DE AVANCE)
# ======================================================================

def _mismo_lado_que_padre(
    padres: np.ndarray, radios: np.ndarray, nodos_frontera: np.ndarray, hueco_max: float
) -> np.ndarray:
    """Candidatos cuyo disco de propuesta no puede tocar la curva.

    Todo punto de la curva esta a menos de ``hueco_max / 2`` de algun nodo
    de frontera, asi que si el padre esta mas lejos que
    ``radio + hueco_max / 2`` de todos ellos, el candidato comparte lado con el padre.
    """
    d, _ = cKDTree(nodos_frontera).query(padres)
    return d > 1.01 * (radios + 0.5 * hueco_max)


def _en_region(
    candidatos: np.ndarray,
    padres: np.ndarray,
    radios: np.ndarray,
    exterior: BoundaryNodes,
    dom_exterior: ReconstructedDomain,
    interior: BoundaryNodes | None,
) -> np.ndarray:
    dentro = np.ones(len(candidatos), dtype=bool)

    evaluar = ~_mismo_lado_que_padre(padres, radios, exterior.points, float(exterior.huecos().max()))
    if evaluar.any():
        dentro[evaluar] = dom_exterior.contiene(candidatos[evaluar])

    if interior is not None and len(interior) > 0:
        evaluar = dentro & ~_mismo_lado_que_padre(padres, radios, interior.points, float(interior.huecos().max()))
        if evaluar.any():
            dentro[evaluar] = ~interior.domain.contiene(candidatos[evaluar])
    return dentro


def _aceptar_secuencial(candidatos: np.ndarray, minimos: np.ndarray) -> np.ndarray:
    """Acepta en orden de propuesta respetando la separacion dentro de la generacion."""
    aceptado = np.zeros(len(candidatos), dtype=bool)
    if len(candidatos) == 0:
        return aceptado
    pares = cKDTree(candidatos).query_pairs(float(minimos.max()), output_type="ndarray")
    vecinos: list[list[int]] = [[] for _ in range(len(candidatos))]
    if len(pares) > 0:
        # query_pairs devuelve i < j; el posterior j se compara con su propio h
        d = np.linalg.norm(candidatos[pares[:, 0]] - candidatos[pares[:, 1]], axis=1)
        for i, j in pares[d < minimos[pares[:, 1]]]:
            vecinos[j].append(i)
    for j in range(len(candidatos)):
        aceptado[j] = not any(aceptado[i] for i in vecinos[j])
    return aceptado


def fill_interior(
    dom: ReconstructedDomain,
    outer_boundary: BoundaryNodes,
    inner_boundary: BoundaryNodes | None,
    profile: SpacingProfile,
    seed: int | None = None,
    candidatos_por_nodo: int | None = None,
    factor_aceptacion: float | None = None,
) -> np.ndarray:
    """Genera nodos interiores entre la frontera exterior y la interior.

    Args:
        dom: Dominio de la frontera exterior.
        outer_boundary: Nodos de la frontera exterior.
        inner_boundary: Nodos del hueco (con su dominio) o None.
        profile: Perfil de espaciado.
        seed: Semilla del generador. Default: ``SEMILLA``.
        candidatos_por_nodo: Default ``DISCRETIZACION["candidatos_por_nodo"]``.
        factor_aceptacion: Default ``DISCRETIZACION["factor_aceptacion"]``.

    Returns:
        Arreglo (n, 2) de nodos interiores en orden de generacion.

    Raises:
        RegionEmpty: Si ningun candidato sobrevive.
    """
    rng = np.random.default_rng(SEMILLA if seed is None else seed)
    m = int(DISCRETIZACION["candidatos_por_nodo"] if candidatos_por_nodo is None else candidatos_por_nodo)
    aceptacion = float(DISCRETIZACION["factor_aceptacion"] if factor_aceptacion is None else factor_aceptacion)

    fronteras = [outer_boundary.points]
    if inner_boundary is not None and len(inner_boundary) > 0:
        fronteras.append(inner_boundary.points)
    existentes = np.vstack(fronteras)
    frente = existentes.copy()
    generados: list[np.ndarray] = []
    offsets = 2.0 * np.pi * np.arange(m) / m
    generacion = 0

    while len(frente) > 0:
        generacion += 1
        radios = profile.h(frente)
        angulos = rng.uniform(0.0, 2.0 * np.pi, size=len(frente))[:, None] + offsets[None, :]
        candidatos = (
            frente[:, None, :]
            + radios[:, None, None] * np.stack([np.cos(angulos), np.sin(angulos)], axis=-1)
        ).reshape(-1, 2)
        padres = np.repeat(frente, m, axis=0)
        radios_padre = np.repeat(radios, m)

        minimos = aceptacion * profile.h(candidatos)
        d, _ = cKDTree(existentes).query(candidatos)
        libre = d >= minimos
        candidatos, padres, radios_padre, minimos = (
            candidatos[libre], padres[libre], radios_padre[libre], minimos[libre]
        )
        if len(candidatos) == 0:
            break

        dentro = _en_region(candidatos, padres, radios_padre, outer_boundary, dom, inner_boundary)
        candidatos, minimos = candidatos[dentro], minimos[dentro]

        nuevos = candidatos[_aceptar_secuencial(candidatos, minimos)]
        if len(nuevos) == 0:
            break
        generados.append(nuevos)
        existentes = np.vstack([existentes, nuevos])
        frente = nuevos

    if not generados:
        raise RegionEmpty("Ningun candidato quedo dentro de la region: region mas delgada que h.")

    interiores = np.vstack(generados)
    logger.debug("Relleno interior: %d nodos en %d generaciones.", len(interiores), generacion)
    return interiores


def discretizar_region(
    dom: ReconstructedDomain,
    profile: SpacingProfile,
    hueco: ReconstructedDomain | None = None,
    seed: int | None = None,
) -> Discretization:
    """Frontera exterior, frontera del hueco (opcional) y relleno interior."""
    exterior = resample_boundary(dom, profile, "outer")
    interior = resample_boundary(hueco, profile, "dendrite") if hueco is not None else None
    nodos = fill_interior(dom, exterior, interior, profile, seed=seed)
    fronteras = [exterior] if interior is None else [exterior, interior]
    return Discretization(boundary=fronteras, interior_nodes=nodos)
