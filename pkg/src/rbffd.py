"""Aproximacion RBF-FD del Laplaciano sobre nodos dispersos.

Cada stencil resuelve el sistema local aumentado

    [ A   P ] [w]   [L phi]
    [ P^T 0 ] [l] = [L p  ]

con nucleo poliarmonico ``phi(r) = r^3`` y monomios ``{1, x, y, x^2, xy, y^2}``,
en coordenadas desplazadas al centro y escaladas por el radio del
stencil. Sobre esos pesos se construyen:

    - ``heat_step``: Euler explicito de la ecuacion de calor con
      condiciones de Dirichlet (``outer`` = 1, ``dendrite`` = 0).
    - ``solve_poisson``: sistema disperso global resuelto con BiCGSTAB
      precondicionado por ILU.
    - ``idw_transfer``: interpolacion de Shepard entre conjuntos de nodos.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.spatial import cKDTree

from config.settings import DISCRETIZACION, IDW, POISSON, RBFFD, SEMILLA
from src.errores import NotEnoughNodes, SingularStencil, SolverDiverged
from src.geometria import build_index, como_puntos

logger = logging.getLogger(__name__)

KINDS: tuple[str, ...] = ("interior", "outer", "dendrite")
VALORES_FRONTERA: dict[str, float] = {"outer": 1.0, "dendrite": 0.0}

# Laplaciano de los monomios {1, x, y, x^2, xy, y^2} evaluado en el origen
_LAPLACIANO_MONOMIOS = np.array([0.0, 0.0, 0.0, 2.0, 0.0, 2.0])


# ======================================================================
# TIPOS
# ======================================================================

@dataclass
class ScatteredField:
    """Campo escalar sobre nodos etiquetados.

    Attributes:
        nodes: Arreglo (n, 2).
        kind: Etiqueta por nodo en ``KINDS``.
        values: Valor (temperatura) por nodo.
    """

    nodes: np.ndarray
    kind: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        self.nodes = como_puntos(self.nodes)
        self.kind = np.asarray(self.kind, dtype=object)
        self.values = np.asarray(self.values, dtype=float)
        if not len(self.nodes) == len(self.kind) == len(self.values):
            raise ValueError("nodes, kind y values deben tener la misma longitud.")
        if not np.isfinite(self.values).all():
            raise ValueError("El campo contiene valores no finitos.")
        desconocidas = set(self.kind.tolist()) - set(KINDS)
        if desconocidas:
            raise ValueError(f"Etiquetas de nodo desconocidas: {sorted(desconocidas)}")

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def interior(self) -> np.ndarray:
        return np.flatnonzero(self.kind == "interior")

    def con_valores(self, values: np.ndarray) -> ScatteredField:
        return ScatteredField(self.nodes, self.kind, values)


@dataclass(frozen=True)
class StencilWeights:
    """Pesos del Laplaciano de un nodo."""

    center: int
    neighbors: np.ndarray
    weights: np.ndarray


@dataclass
class StencilSet:
    """Pesos de varios stencils del mismo tamano, en forma matricial.

    Attributes:
        centers: Indices de los nodos centro (m,).
        neighbors: Indices de vecinos por stencil (m, n); la columna 0 es el centro.
        weights: Pesos por stencil (m, n).
        condicion: Numero de condicion de cada sistema local.
    """

    centers: np.ndarray
    neighbors: np.ndarray
    weights: np.ndarray
    condicion: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __iter__(self):
        for c, nb, w in zip(self.centers, self.neighbors, self.weights):
            yield StencilWeights(int(c), nb, w)

    def __len__(self) -> int:
        return len(self.centers)

    def matriz(self, n_nodos: int) -> sp.csr_matrix:
        """Matriz dispersa (n_nodos x n_nodos) con filas solo en los centros."""
        filas = np.repeat(self.centers, self.neighbors.shape[1])
        return sp.csr_matrix(
            (self.weights.ravel(), (filas, self.neighbors.ravel())), shape=(n_nodos, n_nodos)
        )

    @classmethod
    def desde_lista(cls, stencils: Sequence[StencilWeights]) -> StencilSet:
        return cls(
            centers=np.array([s.center for s in stencils], dtype=int),
            neighbors=np.array([s.neighbors for s in stencils], dtype=int),
            weights=np.array([s.weights for s in stencils], dtype=float),
        )


# ======================================================================
# STENCILS Y PESOS
# ======================================================================

def select_stencil(nodes: Any, center: int, n: int) -> np.ndarray:
    """Los ``n`` nodos mas cercanos a ``center``, empezando por el propio centro.

    Raises:
        NotEnoughNodes: Si ``n`` no esta en [1, numero de nodos].
    """
    index = build_index(nodes)
    if not 1 <= n <= len(index):
        raise NotEnoughNodes(f"Stencil de {n} nodos con solo {len(index)} disponibles.")
    return np.concatenate(([center], index.vecinos_ordenados(center, n - 1))).astype(int)


def seleccionar_stencils(nodes: np.ndarray, centers: np.ndarray, n: int) -> np.ndarray:
    """Version en lote de ``select_stencil`` (m, n).

    Las filas con empate en el borde del stencil se resuelven con
    ``vecinos_ordenados`` para conservar el desempate por indice.
    """
    index = build_index(nodes)
    total = len(index)
    if not 1 <= n <= total:
        raise NotEnoughNodes(f"Stencil de {n} nodos con solo {total} disponibles.")
    consulta = min(total, n + 1)
    dist, idx = index.tree.query(index.points[centers], k=consulta)
    dist, idx = dist.reshape(len(centers), -1), idx.reshape(len(centers), -1)
    orden = np.lexsort((idx, dist), axis=1)
    dist = np.take_along_axis(dist, orden, axis=1)
    idx = np.take_along_axis(idx, orden, axis=1)
    stencils = idx[:, :n].copy()

    if consulta > n:
        empates = np.flatnonzero(dist[:, n - 1] >= dist[:, n])
        for fila in empates:
            c = int(centers[fila])
            stencils[fila] = np.concatenate(([c], index.vecinos_ordenados(c, n - 1)))
    return stencils


def _pesos_lote(stencils: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Pesos del Laplaciano para un lote de stencils (m, n, 2).

    Returns:
        Pesos (m, n) y numero de condicion de cada sistema local.
    """
    m, n, _ = stencils.shape
    z = stencils - stencils[:, :1, :]
    escala = np.linalg.norm(z, axis=2).max(axis=1)
    escala = np.where(escala > 0, escala, 1.0)
    z = z / escala[:, None, None]

    r = np.linalg.norm(z[:, :, None, :] - z[:, None, :, :], axis=3)
    A = r ** int(RBFFD["orden_phs"])
    x, y = z[..., 0], z[..., 1]
    P = np.stack([np.ones_like(x), x, y, x * x, x * y, y * y], axis=2)

    M = np.zeros((m, n + 6, n + 6))
    M[:, :n, :n] = A
    M[:, :n, n:] = P
    M[:, n:, :n] = np.transpose(P, (0, 2, 1))

    orden = int(RBFFD["orden_phs"])
    rhs = np.zeros((m, n + 6))
    # Laplaciano 2D de r^k es k^2 r^(k-2), evaluado en el centro (origen)
    rhs[:, :n] = orden**2 * np.linalg.norm(z, axis=2) ** (orden - 2)
    rhs[:, n:] = _LAPLACIANO_MONOMIOS

    condicion = np.linalg.cond(M)
    malos = ~np.isfinite(condicion) | (condicion > RBFFD["umbral_condicion"])
    if malos.any():
        j = int(np.flatnonzero(malos)[0])
        raise SingularStencil(
            f"Stencil {j} mal condicionado (cond = {condicion[j]:.3e}).",
            condicion=float(condicion[j]),
            indice=j,
        )
    sol = np.linalg.solve(M, rhs[..., None])[..., 0]
    return sol[:, :n] / escala[:, None] ** 2, condicion


def laplacian_weights(points: Any) -> np.ndarray:
    """Pesos del Laplaciano en el primer punto del stencil.

    Raises:
        NotEnoughNodes: Con menos de 6 puntos.
        SingularStencil: Si el sistema local supera el umbral de condicion.
    """
    pts = como_puntos(points)
    if len(pts) < 6:
        raise NotEnoughNodes(f"Se requieren al menos 6 puntos por stencil, hay {len(pts)}.")
    pesos, _ = _pesos_lote(pts[None, :, :])
    return pesos[0]


def construir_pesos(nodes: np.ndarray, centers: np.ndarray, stencil_size: int | None = None) -> StencilSet:
    """Stencils y pesos del Laplaciano para todos los ``centers``."""
    n = int(RBFFD["stencil_size"] if stencil_size is None else stencil_size)
    centers = np.asarray(centers, dtype=int)
    if len(centers) == 0:
        return StencilSet(np.empty(0, dtype=int), np.empty((0, n), dtype=int), np.empty((0, n)))
    vecinos = seleccionar_stencils(nodes, centers, n)
    try:
        pesos, condicion = _pesos_lote(nodes[vecinos])
    except SingularStencil as exc:
        centro = int(centers[exc.indice])
        raise SingularStencil(
            f"Stencil del nodo {centro} mal condicionado (cond = {exc.condicion:.3e}).",
            condicion=exc.condicion,
            centro=centro,
        ) from exc
    return StencilSet(centers=centers, neighbors=vecinos, weights=pesos, condicion=condicion)


# ======================================================================
# CALOR EXPLICITO
# ======================================================================

def pasos_estables(dt: float, h_min: float, factor: float | None = None) -> int:
    """Numero de subpasos para que cada uno respete ``dt <= factor * h_min^2``."""
    factor = RBFFD["factor_estabilidad"] if factor is None else factor
    return max(1, int(np.ceil(dt / (factor * h_min**2) - 1e-12)))


def heat_step(
    field: ScatteredField,
    weights: StencilSet | Sequence[StencilWeights],
    dt: float,
    substeps: int = 1,
    boundary_values: dict[str, float] | None = None,
) -> ScatteredField:
    """Avanza la temperatura ``dt`` con Euler explicito.

    Args:
        field: Campo actual (no se modifica).
        weights: Pesos de cada nodo interior.
        dt: Paso de tiempo total (> 0).
        substeps: Numero de subpasos de Euler de tamano ``dt / substeps``.
        boundary_values: Valores de Dirichlet por etiqueta. Default ``outer=1, dendrite=0``.

    Returns:
        Campo nuevo con interiores actualizados y fronteras impuestas.
    """
    if dt <= 0:
        raise ValueError("dt debe ser positivo.")
    if not isinstance(weights, StencilSet):
        weights = StencilSet.desde_lista(list(weights))
    interior = field.interior
    if not np.array_equal(np.sort(weights.centers), interior):
        raise ValueError("Los pesos no cubren exactamente a los nodos interiores.")

    bc = VALORES_FRONTERA if boundary_values is None else boundary_values
    L = weights.matriz(len(field))[interior]
    h = dt / substeps
    T = field.values.copy()
    for _ in range(substeps):
        T[interior] = T[interior] + h * (L @ T)
        for etiqueta, valor in bc.items():
            T[field.kind == etiqueta] = valor
    return field.con_valores(T)


# ======================================================================
# POISSON
# ======================================================================

@dataclass
class ResultadoPoisson:
    """Resultado del banco de prueba de Poisson en el disco unitario."""

    n_nodos: int
    n_objetivo: int
    h: float
    error_max: float
    residuo: float
    iteraciones: int
    tiempo_s: float
    solucion: str


def _resolver_iterativo(A: sp.csr_matrix, b: np.ndarray, tol: float, max_iter: int) -> tuple[np.ndarray, float, int]:
    norma_b = float(np.linalg.norm(b))
    if norma_b == 0.0:
        return np.zeros_like(b), 0.0, 0

    ilu = spla.spilu(A.tocsc(), drop_tol=1e-6, fill_factor=20)
    M = spla.LinearOperator(A.shape, ilu.solve)
    iteraciones = 0

    def _contar(_: Any) -> None:
        nonlocal iteraciones
        iteraciones += 1

    x, info = spla.bicgstab(A, b, rtol=tol, atol=0.0, maxiter=max_iter, M=M, callback=_contar)
    residuo = float(np.linalg.norm(b - A @ x)) / norma_b
    if info != 0 or residuo >= tol:
        logger.warning("BiCGSTAB no convergio (info=%d, residuo=%.3e); probando GMRES.", info, residuo)
        x, info = spla.gmres(A, b, x0=x, rtol=tol * 0.1, atol=0.0, restart=50, maxiter=max_iter, M=M, callback=_contar, callback_type="pr_norm")
        residuo = float(np.linalg.norm(b - A @ x)) / norma_b
    if residuo >= tol:
        raise SolverDiverged(
            f"El solver no alcanzo la tolerancia {tol:.1e}: residuo {residuo:.3e} tras {iteraciones} iteraciones.",
            iteraciones=iteraciones,
            residuo=residuo,
        )
    return x, residuo, iteraciones


def solve_poisson(
    nodes: Any,
    kinds: Any,
    rhs: Any,
    bc: Any,
    stencil_size: int | None = None,
    tol: float | None = None,
) -> tuple[ScatteredField, float, int]:
    """Resuelve ``Lap u = rhs`` con Dirichlet ``u = bc`` en los nodos de frontera.

    Args:
        nodes: Arreglo (n, 2).
        kinds: Etiqueta por nodo.
        rhs: Lado derecho por nodo (solo se usa en interiores).
        bc: Valor de frontera por nodo de frontera (en orden) o escalar.

    Returns:
        Campo solucion, residuo relativo e iteraciones.

    Raises:
        SolverDiverged: Si el residuo relativo no baja de ``tol``.
    """
    nodes = como_puntos(nodes)
    kinds = np.asarray(kinds, dtype=object)
    tol = POISSON["tolerancia_residuo"] if tol is None else tol
    interior = np.flatnonzero(kinds == "interior")
    frontera = np.flatnonzero(kinds != "interior")

    pesos = construir_pesos(nodes, interior, stencil_size)
    A = pesos.matriz(len(nodes)).tolil()
    A[frontera, frontera] = 1.0
    A = A.tocsr()

    b = np.zeros(len(nodes))
    b[interior] = np.broadcast_to(np.asarray(rhs, dtype=float), (len(nodes),))[interior]
    b[frontera] = np.broadcast_to(np.asarray(bc, dtype=float), (len(frontera),))

    u, residuo, iteraciones = _resolver_iterativo(A, b, tol, int(POISSON["max_iteraciones"]))
    return ScatteredField(nodes, kinds, u), residuo, iteraciones


_SOLUCIONES: dict[str, tuple[Any, Any]] = {
    "cuadratica": (
        lambda x, y: 1.0 - x**2 - y**2,
        lambda x, y: np.full_like(x, -4.0),
    ),
    "seno": (
        lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y),
        lambda x, y: -2.0 * np.pi**2 * np.sin(np.pi * x) * np.sin(np.pi * y),
    ),
}


def h_para_n_objetivo(n_objetivo: int, densidad: float | None = None) -> float:
    """Espaciado que da ~``n_objetivo`` nodos en el disco unitario.

    Resuelve ``pi / (c h^2) + 2 pi / h = N`` para ``h``.
    """
    c = DISCRETIZACION["densidad_relleno"] if densidad is None else densidad
    # N h^2 - 2 pi h - pi / c = 0
    return float((2.0 * np.pi + np.sqrt(4.0 * np.pi**2 + 4.0 * n_objetivo * np.pi / c)) / (2.0 * n_objetivo))


def poisson_disco(
    n_objetivo: int | None = None,
    solucion: str | None = None,
    seed: int | None = None,
) -> ResultadoPoisson:
    """Banco de prueba de Poisson en el disco unitario con solucion manufacturada.

    Args:
        n_objetivo: Numero aproximado de nodos. Default ``POISSON["n_objetivo"]``.
        solucion: ``cuadratica`` (u = 1 - x^2 - y^2) o ``seno``.
        seed: Semilla del relleno.
    """
    from src.discretizacion import SpacingProfile, discretizar_region
    from src.dominio import build_domain

    n_objetivo = int(POISSON["n_objetivo"] if n_objetivo is None else n_objetivo)
    solucion = str(POISSON["solucion"] if solucion is None else solucion)
    if solucion not in _SOLUCIONES:
        raise ValueError(f"Solucion manufacturada desconocida: {solucion}")
    exacta, laplaciano = _SOLUCIONES[solucion]

    inicio = time.perf_counter()
    semilla = SEMILLA if seed is None else seed
    tolerancia_n = float(POISSON["tolerancia_n"])
    max_ajustes = int(POISSON["max_ajustes_h"])
    h = h_para_n_objetivo(n_objetivo)
    for ajuste in range(max_ajustes + 1):
        n_def = max(32, int(np.ceil(2.0 * np.pi / h)))
        angulos = 2.0 * np.pi * np.arange(n_def) / n_def
        dominio = build_domain(np.column_stack([np.cos(angulos), np.sin(angulos)]))
        disc = discretizar_region(dominio, SpacingProfile.constante(h), seed=semilla)
        desvio = disc.n_nodos / n_objetivo - 1.0
        if abs(desvio) <= tolerancia_n or ajuste == max_ajustes:
            break
        logger.debug("Poisson: N=%d con h=%.5f (desvio %+.1f%%); reajustando h.", disc.n_nodos, h, 100.0 * desvio)
        # N escala como 1/h^2
        h *= float(np.sqrt(disc.n_nodos / n_objetivo))

    frontera = disc.boundary[0].points
    nodes = np.vstack([frontera, disc.interior_nodes])
    kinds = np.array(["outer"] * len(frontera) + ["interior"] * len(disc.interior_nodes), dtype=object)
    x, y = nodes[:, 0], nodes[:, 1]
    campo, residuo, iteraciones = solve_poisson(nodes, kinds, laplaciano(x, y), exacta(x[: len(frontera)], y[: len(frontera)]))

    error = float(np.max(np.abs(campo.values - exacta(x, y))))
    resultado = ResultadoPoisson(
        n_nodos=len(nodes),
        n_objetivo=n_objetivo,
        h=h,
        error_max=error,
        residuo=residuo,
        iteraciones=iteraciones,
        tiempo_s=time.perf_counter() - inicio,
        solucion=solucion,
    )
    logger.info(
        "Poisson (%s): N=%d, error max=%.3e, residuo=%.3e, %.2f s",
        solucion, resultado.n_nodos, error, residuo, resultado.tiempo_s,
    )
    return resultado


# ======================================================================
# TRANSFERENCIA IDW
# ======================================================================

def idw_transfer(
    old: ScatteredField,
    new_nodes: Any,
    k_sources: int | None = None,
    power: float | None = None,
) -> np.ndarray:
    """Interpolacion de Shepard de ``old`` sobre ``new_nodes``.

    Copia exacta cuando el nodo fuente mas cercano esta a menos de
    ``IDW["distancia_exacta"]``.
    """
    k = int(IDW["k_sources"] if k_sources is None else k_sources)
    p = float(IDW["power"] if power is None else power)
    if len(old) == 0:
        raise ValueError("El campo de origen esta vacio.")
    if not 1 <= k <= len(old):
        raise ValueError(f"k_sources={k} fuera de [1, {len(old)}].")

    nuevos = como_puntos(np.atleast_2d(new_nodes))
    dist, idx = cKDTree(old.nodes).query(nuevos, k=k)
    dist, idx = dist.reshape(len(nuevos), k), idx.reshape(len(nuevos), k)

    exacto = dist[:, 0] < IDW["distancia_exacta"]
    pesos = 1.0 / np.where(exacto[:, None], 1.0, dist) ** p
    valores = (pesos * old.values[idx]).sum(axis=1) / pesos.sum(axis=1)
    valores[exacto] = old.values[idx[exacto, 0]]
    return valores
