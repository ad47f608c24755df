"""Suite de pruebas de reconstruccion de fronteras y crecimiento dendritico.

Ejecuta tres niveles de prueba en orden:

    Nivel 1 - Unidad (datos sinteticos, segundos)
        Verifica cada modulo de src/ con ejemplos pequenos de resultado
        conocido: indice de vecinos, ordenamiento, spline, dominio,
        discretizacion, RBF-FD y ley de velocidad.  Siempre debe pasar.

    Nivel 2 - Propiedades y aceptacion
        Barridos aleatorios contra oraculos independientes (orden
        angular, ray casting, reproduccion polinomial), convergencia
        del spline, banco de Poisson y corridas cortas de la simulacion.

    Nivel 3 - Corrida completa end-to-end
        Corre la dendrita con la configuracion por defecto, verifica
        las propiedades fisicas en cada paso, genera los reportes y
        ejercita el CLI de main.py.

Uso:
    # Todos los niveles
    python tests/test_pipeline.py

    # Solo nivel 1
    python tests/test_pipeline.py --nivel 1

    # Niveles 1 y 2
    python tests/test_pipeline.py --nivel 2

    # Verbose: muestra detalles de cada prueba
    python tests/test_pipeline.py --verbose
"""

from __future__ import annotations

import argparse
import json
import re
import sys
import tempfile
import time
import traceback
from datetime import datetime
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.spatial import cKDTree

# Asegurar que el raiz del proyecto este en el path
ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT))


# ======================================================================
# COLORES Y UTILIDADES DE CONSOLA
# ======================================================================
class C:
    """Codigos ANSI para colores en terminal."""
    OK      = "\033[92m"
    WARN    = "\033[93m"
    FAIL    = "\033[91m"
    BOLD    = "\033[1m"
    RESET   = "\033[0m"
    CYAN    = "\033[96m"
    GREY    = "\033[90m"


def _ok(msg: str) -> None:
    print(f"  {C.OK}[PASS]{C.RESET}  {msg}")


def _fail(msg: str, detalle: str = "") -> None:
    print(f"  {C.FAIL}[FAIL]{C.RESET}  {msg}")
    if detalle:
        for linea in detalle.strip().splitlines():
            print(f"         {C.GREY}{linea}{C.RESET}")


def _warn(msg: str) -> None:
    print(f"  {C.WARN}[WARN]{C.RESET}  {msg}")


def _header(titulo: str) -> None:
    ancho = 60
    print(f"\n{C.BOLD}{C.CYAN}{'=' * ancho}{C.RESET}")
    print(f"{C.BOLD}{C.CYAN}  {titulo}{C.RESET}")
    print(f"{C.BOLD}{C.CYAN}{'=' * ancho}{C.RESET}")


def _subheader(titulo: str) -> None:
    print(f"\n{C.BOLD}  -- {titulo} --{C.RESET}")


# ======================================================================
# FIXTURES GEOMETRICAS Y ORACULOS
# ======================================================================

def _circulo(k: int, radio: float = 1.0, centro: tuple[float, float] = (0.0, 0.0)) -> np.ndarray:
    ang = 2.0 * np.pi * np.arange(k) / k
    return np.column_stack([centro[0] + radio * np.cos(ang), centro[1] + radio * np.sin(ang)])


def _elipse(k: int, a: float = 2.0, b: float = 1.0) -> np.ndarray:
    ang = 2.0 * np.pi * np.arange(k) / k
    return np.column_stack([a * np.cos(ang), b * np.sin(ang)])


def _estrella(k: int) -> np.ndarray:
    """Estrella de cuatro petalos r = 0.5 + 0.2 cos(4 phi)."""
    ang = 2.0 * np.pi * np.arange(k) / k
    r = 0.5 + 0.2 * np.cos(4.0 * ang)
    return np.column_stack([r * np.cos(ang), r * np.sin(ang)])


def _es_orden_ciclico(generadores: np.ndarray) -> bool:
    """True si la secuencia es una rotacion o reversa de 0..k-1."""
    k = len(generadores)
    pasos = np.mod(np.diff(np.append(generadores, generadores[0])), k)
    return bool(np.all(pasos == 1) or np.all(pasos == k - 1))


def _ray_casting(poligono: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Oraculo par-impar sobre una poligonal cerrada."""
    a = poligono
    b = np.roll(poligono, -1, axis=0)
    x, y = X[:, 0:1], X[:, 1:2]
    cruza = (a[None, :, 1] > y) != (b[None, :, 1] > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_corte = a[None, :, 0] + (y - a[None, :, 1]) * (b[None, :, 0] - a[None, :, 0]) / (b[None, :, 1] - a[None, :, 1])
    return (np.sum(cruza & (x < x_corte), axis=1) % 2) == 1


def _segmentos_se_cruzan(loop: np.ndarray) -> bool:
    """Oraculo O(k^2) de auto-interseccion por pares de segmentos no adyacentes."""
    k = len(loop)

    def orient(p: np.ndarray, q: np.ndarray, r: np.ndarray) -> float:
        return float((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]))

    for i in range(k):
        for j in range(i + 2, k):
            if i == 0 and j == k - 1:
                continue
            p1, p2, q1, q2 = loop[i], loop[(i + 1) % k], loop[j], loop[(j + 1) % k]
            d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
            d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
            if d1 * d2 < 0 and d3 * d4 < 0:
                return True
    return False


def _nodos_disco(h: float, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Nodos (frontera primero) y etiquetas de un disco unitario con h constante."""
    from src.discretizacion import SpacingProfile, discretizar_region
    from src.dominio import build_domain

    disc = discretizar_region(build_domain(_circulo(64)), SpacingProfile.constante(h), seed=seed)
    frontera = disc.boundary[0].points
    nodos = np.vstack([frontera, disc.interior_nodes])
    kinds = np.array(["outer"] * len(frontera) + ["interior"] * len(disc.interior_nodes), dtype=object)
    return nodos, kinds


# ======================================================================
# NIVEL 1 - PRUEBAS DE UNIDAD
# ======================================================================

class TestNivel1:
    """Pruebas de unidad por modulo con datos sinteticos."""

    def __init__(self, verbose: bool = False) -> None:
        self.verbose = verbose
        self.passed  = 0
        self.failed  = 0

    def _assert(self, condicion: bool, nombre: str, detalle: str = "") -> None:
        if condicion:
            _ok(nombre)
            self.passed += 1
        else:
            _fail(nombre, detalle)
            self.failed += 1

    # ------------------------------------------------------------------
    # SETTINGS Y ERRORES
    # ------------------------------------------------------------------
    def test_settings(self) -> None:
        _subheader("config/settings.py")
        try:
            from config.settings import (
                DISCRETIZACION, DOMINIO, ESPACIADO, IDW, LOG_LEVEL,
                NOMBRES_SALIDA, OUTPUT_DIR, RBFFD, SIMULACION,
            )
            self._assert(isinstance(OUTPUT_DIR, Path),                          "OUTPUT_DIR es Path")
            self._assert(0 < ESPACIADO["h_min"] <= ESPACIADO["h_max"],          "ESPACIADO: 0 < h_min <= h_max")
            self._assert(RBFFD["stencil_size"] >= 6,                            "RBFFD: stencil >= 6 monomios")
            self._assert(RBFFD["umbral_condicion"] == 1e12,                     "RBFFD: umbral de condicion 1e12")
            self._assert(IDW["k_sources"] == 4 and IDW["power"] == 2.0,         "IDW: k=4, p=2")
            self._assert(DISCRETIZACION["candidatos_por_nodo"] == 6,            "DISCRETIZACION: 6 candidatos")
            self._assert(DOMINIO["max_iteraciones"] == 200,                     "DOMINIO: 200 iteraciones")
            self._assert(SIMULACION["N_t"] == 500 and SIMULACION["dt"] == 0.01, "SIMULACION: N_t=500, dt=0.01")
            self._assert(NOMBRES_SALIDA["snapshot"].format(7) == "step_00007.csv", "Patron de snapshot step_%05d")
            self._assert(LOG_LEVEL in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}, "LOG_LEVEL valido")
        except Exception:
            _fail("Error importando settings", traceback.format_exc())
            self.failed += 1

    def test_errores(self) -> None:
        _subheader("src/errores.py")
        try:
            from src import errores

            nombres = [
                "EmptyInput", "DuplicatePoints", "TooFewPoints", "RankOutOfRange",
                "OrderingStalled", "SingularSystem", "AmbiguousOrientation", "CurveTooShort",
                "RegionEmpty", "SingularStencil", "NotEnoughNodes", "SolverDiverged",
                "BoundaryCollision", "SelfIntersection", "IoFailure", "ConfigError", "InvalidPoints",
            ]
            for nombre in nombres:
                clase = getattr(errores, nombre)
                self._assert(
                    issubclass(clase, errores.ReconstruccionError) and clase.codigo == nombre,
                    f"{nombre} hereda de ReconstruccionError con codigo propio",
                )
            exc = errores.SolverDiverged("x", iteraciones=3, residuo=0.5)
            self._assert(exc.iteraciones == 3 and exc.residuo == 0.5, "Los detalles viajan como atributos")
        except Exception:
            _fail("Error en errores", traceback.format_exc())
            self.failed += 1

    # ------------------------------------------------------------------
    # GEOMETRIA
    # ------------------------------------------------------------------
    def test_geometria(self) -> None:
        _subheader("src/geometria.py")
        try:
            from src.errores import (
                ConfigError, DuplicatePoints, EmptyInput, InvalidPoints, RankOutOfRange, TooFewPoints,
            )
            from src.geometria import (
                build_index, leer_puntos_csv, nth_nearest, polyline_self_intersects, polyline_signed_area,
            )

            self._assert(len(build_index([(0.0, 0.0)])) == 1,                       "Indice de un punto")
            self._assert(len(build_index([(0, 0), (1, 0), (0, 1)])) == 3,           "Indice de tres puntos")

            try:
                build_index([(0.0, 0.0), (0.0, 0.0)])
                self._assert(False, "Duplicados rechazados")
            except DuplicatePoints as e:
                self._assert(tuple(e.par) == (0, 1), "Duplicados rechazados reportando el par (0, 1)")

            try:
                build_index(np.empty((0, 2)))
                self._assert(False, "Entrada vacia rechazada")
            except EmptyInput:
                self._assert(True, "Entrada vacia rechazada (EmptyInput)")

            try:
                build_index([(0.0, np.nan), (1.0, 0.0)])
                self._assert(False, "Coordenada no finita rechazada")
            except InvalidPoints:
                self._assert(True, "Coordenada no finita rechazada (InvalidPoints)")

            cuadrado = build_index([(0, 0), (1, 0), (1, 1), (0, 1)])
            self._assert(nth_nearest(cuadrado, 0, 1) == 1, "Empate en el cuadrado resuelto por indice menor")
            colineal = build_index([(0, 0), (1, 0), (3, 0)])
            self._assert(nth_nearest(colineal, 0, 2) == 2, "Colineales: segundo vecino de (0,0) es (3,0)")

            rng = np.random.default_rng(1)
            idx = build_index(rng.random((20, 2)))
            self._assert(all(nth_nearest(idx, q, 1) != q for q in range(20)), "n=1 nunca devuelve el propio punto")

            for n_malo in (0, 20):
                try:
                    nth_nearest(idx, 0, n_malo)
                    self._assert(False, f"n={n_malo} fuera de rango")
                except RankOutOfRange:
                    self._assert(True, f"n={n_malo} fuera de rango (RankOutOfRange)")

            sq = np.array([(0, 0), (1, 0), (1, 1), (0, 1)], dtype=float)
            self._assert(abs(polyline_signed_area(sq) - 1.0) < 1e-15,        "Area del cuadrado antihorario = +1")
            self._assert(abs(polyline_signed_area(sq[::-1]) + 1.0) < 1e-15,  "Area del cuadrado horario = -1")
            self._assert(abs(polyline_signed_area([(0, 0), (1, 0), (0, 1)]) - 0.5) < 1e-15, "Area del triangulo = 0.5")
            loop = _estrella(40)
            area = polyline_signed_area(loop)
            self._assert(abs(polyline_signed_area(loop[::-1]) + area) < 1e-14,          "Area cambia de signo al invertir")
            self._assert(abs(polyline_signed_area(np.roll(loop, 7, axis=0)) - area) < 1e-14, "Area invariante a rotacion ciclica")

            self._assert(not polyline_self_intersects(sq),                     "Cuadrado convexo no se auto-interseca")
            self._assert(polyline_self_intersects([(0, 0), (1, 1), (1, 0), (0, 1)]), "Corbata se auto-interseca")
            self._assert(not polyline_self_intersects(_circulo(16)),          "16-gono regular no se auto-interseca")

            try:
                polyline_signed_area([(0, 0), (1, 0)])
                self._assert(False, "Area con dos puntos rechazada")
            except TooFewPoints:
                self._assert(True, "Area con dos puntos rechazada (TooFewPoints)")

            with tempfile.TemporaryDirectory() as tmp:
                casos = {
                    "vacio.csv": "",
                    "malformado.csv": "x,y\n0.0,1.0\n1.0,0.0,2.0,3.0\n",
                    "sin_columnas.csv": "a,b\n0.0,1.0\n",
                }
                for nombre, contenido in casos.items():
                    ruta = Path(tmp) / nombre
                    ruta.write_text(contenido, encoding="utf-8")
                    try:
                        leer_puntos_csv(ruta)
                        self._assert(False, f"CSV {nombre} rechazado")
                    except ConfigError:
                        self._assert(True, f"CSV {nombre} rechazado (ConfigError)")
        except Exception:
            _fail("Error en geometria", traceback.format_exc())
            self.failed += 1

    # ------------------------------------------------------------------
    # ORDENAMIENTO
    # ------------------------------------------------------------------
    def test_ordenamiento(self) -> None:
        _subheader("src/ordenamiento.py")
        try:
            from src.errores import OrderingStalled, TooFewPoints
            from src.ordenamiento import OrderedBoundary, order_points, validate_density

            rng = np.random.default_rng(7)
            perm = rng.permutation(16)
            ordered = order_points(_circulo(16)[perm])
            self._assert(_es_orden_ciclico(perm[ordered.sigma]), "16 puntos del circulo: orden angular recuperado")
            self._assert(ordered.sigma[0] == 0,                  "El recorrido empieza en el indice 0")
            self._assert(np.array_equal(ordered.sigma_inv[ordered.sigma], np.arange(16)), "sigma_inv es inversa de sigma")

            perm = rng.permutation(32)
            ordered = order_points(_elipse(32)[perm])
            self._assert(_es_orden_ciclico(perm[ordered.sigma]), "32 puntos de la elipse: orden de parametro recuperado")

            pts = rng.random((3, 2))
            self._assert(sorted(order_points(pts).sigma.tolist()) == [0, 1, 2], "k=3: cualquier orden es valido")

            entrada = _estrella(64)[rng.permutation(64)]
            self._assert(
                np.array_equal(order_points(entrada).sigma, order_points(entrada.copy()).sigma),
                "Determinismo: misma entrada, misma permutacion",
            )

            try:
                order_points([(0, 0), (1, 0)])
                self._assert(False, "Dos puntos rechazados")
            except TooFewPoints:
                self._assert(True, "Dos puntos rechazados (TooFewPoints)")

            try:
                order_points([(0, 0), (1, 0), (3, 0)], max_rank=1)
                self._assert(False, "Ordenamiento detenido con max_rank=1")
            except OrderingStalled as e:
                self._assert(e.posicion == 2, "OrderingStalled con max_rank=1 en la posicion 2")

            reporte = validate_density(order_points(_circulo(32)))
            self._assert(reporte.condition3_violations == [],  "32 puntos uniformes: sin violaciones")
            self._assert(reporte.min_neighbor_gap_ratio > 1.0, "32 puntos uniformes: razon de separacion > 1")

            desplazado = _circulo(32)
            desplazado[5] = (-0.05, 0.0)
            reporte = validate_density(OrderedBoundary.desde_permutacion(desplazado, np.arange(32)))
            self._assert(5 in reporte.condition3_violations, "Punto llevado al centro viola la adyacencia")

            reporte = validate_density(order_points([(0, 0), (1, 0), (0, 1)]))
            self._assert(reporte.condition3_violations == [],           "k=3: sin violaciones")
            self._assert(reporte.to_dict()["min_neighbor_gap_ratio"] is None, "k=3: razon no definida en JSON")
        except Exception:
            _fail("Error en ordenamiento", traceback.format_exc())
            self.failed += 1

    # ------------------------------------------------------------------
    # SPLINE
    # ------------------------------------------------------------------
    def test_spline(self) -> None:
        _subheader("src/spline.py")
        try:
            from src.errores import IoFailure, SingularSystem, TooFewPoints
            from src.ordenamiento import OrderedBoundary, order_points
            from src.spline import PeriodicSpline, fit_periodic_cubic

            sq = np.array([(0, 0), (1, 0), (1, 1), (0, 1)], dtype=float)
            spline = fit_periodic_cubic(OrderedBoundary.desde_permutacion(sq, np.arange(4)))
            self._assert(np.allclose(spline.eval(spline.knots[:-1]), sq, atol=1e-12, rtol=0), "Pasa por las 4 esquinas")
            self._assert(np.allclose(spline.eval(spline.knots[0]), sq[0], atol=1e-12),        "eval(s_0) = x'_0")
            self._assert(np.allclose(spline.eval(spline.knots[-1]), sq[0], atol=1e-12),       "eval(s_k) = x'_0")

            circ = fit_periodic_cubic(order_points(_circulo(32)))
            t = np.linspace(0.0, circ.period, 10_000, endpoint=False)
            desviacion = float(np.max(np.abs(np.linalg.norm(circ.eval(t), axis=1) - 1.0)))
            self._assert(desviacion < 1e-4, f"Circulo de 32 puntos: desviacion radial {desviacion:.2e} < 1e-4")

            circ64 = fit_periodic_cubic(order_points(_circulo(64)))
            longitud = circ64.arc_length(circ64.knots[0], circ64.knots[-1])
            self._assert(abs(longitud - 2.0 * np.pi) < 1e-3, f"Longitud del periodo {longitud:.6f} = 2*pi +- 1e-3")
            self._assert(circ64.arc_length(0.3, 0.3) == 0.0,  "Longitud de t0 a t0 es 0")

            try:
                fit_periodic_cubic(OrderedBoundary.desde_permutacion([(0, 0), (1, 0), (2, 0)], np.arange(3)))
                self._assert(False, "Colineales rechazados")
            except SingularSystem:
                self._assert(True, "Tres puntos colineales rechazados (SingularSystem)")

            try:
                fit_periodic_cubic(OrderedBoundary.desde_permutacion([(0, 0), (1, 0), (1, 0), (0, 1)], np.arange(4)))
                self._assert(False, "Cuerda degenerada rechazada")
            except SingularSystem:
                self._assert(True, "Cuerda degenerada rechazada (SingularSystem)")

            try:
                fit_periodic_cubic(OrderedBoundary.desde_permutacion([(0, 0), (1, 0)], np.arange(2)))
                self._assert(False, "Dos puntos rechazados")
            except TooFewPoints:
                self._assert(True, "Dos puntos rechazados (TooFewPoints)")

            try:
                circ.eval_derivative(0.1, 3)
                self._assert(False, "Derivada de orden 3 rechazada")
            except ValueError:
                self._assert(True, "Derivada de orden 3 rechazada")

            reconstruido = PeriodicSpline.from_dict(json.loads(json.dumps(circ.to_dict())))
            t = np.linspace(-1.0, 8.0, 50)
            self._assert(np.allclose(reconstruido.eval(t), circ.eval(t), atol=1e-12), "Coeficientes JSON reconstruyen la curva")

            try:
                circ.guardar_json(ROOT / "no_existe" / "sub" / "spline.json")
                self._assert(False, "Ruta invalida rechazada")
            except IoFailure:
                self._assert(True, "Ruta invalida rechazada (IoFailure)")
        except Exception:
            _fail("Error en spline", traceback.format_exc())
            self.failed += 1

    # ------------------------------------------------------------------
    # DOMINIO
    # ------------------------------------------------------------------
    def test_dominio(self) -> None:
        _subheader("src/dominio.py")
        try:
            from src.dominio import build_domain, contains, nearest_parameter, orientation_constant, outward_normal
            from src.errores import AmbiguousOrientation

            dom = build_domain(_circulo(64))
            spline = dom.spline

            t, gamma = dom.proyectar([(2.0, 0.0)])
            self._assert(np.allclose(gamma[0], (1.0, 0.0), atol=1e-5), "Proyeccion de (2,0) cae en (1,0)")

            p = 10
            q = int(dom.ordered.sigma[p])
            t_knot = nearest_parameter(dom, dom.ordered.points[q])
            self._assert(abs(t_knot - spline.knots[p]) < 1e-8, "Proyeccion de un nudo devuelve s_p")

            t0 = nearest_parameter(dom, (0.0, 0.0))
            f = lambda tt: float(np.sum((spline.eval(tt)) ** 2))
            f_nudos = np.sum(spline.eval(spline.knots[:-1]) ** 2, axis=1)
            self._assert(f(t0) <= f_nudos.min() + 1e-8, "Centro del circulo: minimo global no peor que los nudos")

            self._assert(contains(dom, (0.0, 0.0)),     "Circulo: (0,0) interior")
            self._assert(not contains(dom, (2.0, 0.0)), "Circulo: (2,0) exterior")
            c = orientation_constant(spline, (0.0, 0.0), dom.ordered)
            self._assert(c == dom.orientation_c,        "orientation_constant coincide con el dominio")

            try:
                orientation_constant(spline, spline.control_points[3], dom.ordered)
                self._assert(False, "Sonda sobre la curva rechazada")
            except AmbiguousOrientation:
                self._assert(True, "Sonda sobre la curva rechazada (AmbiguousOrientation)")

            angulos = []
            for j in range(0, 64, 4):
                n = outward_normal(dom, spline.knots[j])
                radial = spline.control_points[j]
                angulos.append(np.degrees(np.arccos(np.clip(np.dot(n, radial), -1.0, 1.0))))
            self._assert(max(angulos) < 2.0, f"Normales radiales hacia afuera (desvio max {max(angulos):.3f} grados)")

            desplazamiento = np.array([3.0, -2.0])
            dom_t = build_domain(_circulo(64) + desplazamiento)
            iguales = all(
                np.allclose(
                    outward_normal(dom, nearest_parameter(dom, x)),
                    outward_normal(dom_t, nearest_parameter(dom_t, x + desplazamiento)),
                    atol=1e-6,
                )
                for x in _circulo(64)[::8]
            )
            self._assert(iguales, "Normales equivariantes a traslacion")

            dom_p = build_domain(_circulo(32), interior_probe=(0.1, 0.1))
            self._assert(np.allclose(dom_p.interior_probe, (0.1, 0.1)), "La sonda dada por el usuario se respeta")
        except Exception:
            _fail("Error en dominio", traceback.format_exc())
            self.failed += 1

    # ------------------------------------------------------------------
    # DISCRETIZACION
    # ------------------------------------------------------------------
    def test_discretizacion(self) -> None:
        _subheader("src/discretizacion.py")
        try:
            from config.settings import DISCRETIZACION
            from src.discretizacion import (
                SpacingProfile, fill_interior, resample_boundary, spacing_at,
            )
            from src.dominio import build_domain
            from src.errores import CurveTooShort, RegionEmpty

            perfil = SpacingProfile(h_min=0.02, h_max=0.1, focus_points=[(0.0, 0.0)], transition_radius=0.4)
            self._assert(abs(spacing_at(perfil, (0.0, 0.0)) - 0.02) < 1e-15, "h en el foco = h_min")
            self._assert(abs(spacing_at(perfil, (0.5, 0.0)) - 0.1) < 1e-15,  "h lejos del foco = h_max")
            self._assert(abs(spacing_at(perfil, (0.2, 0.0)) - 0.06) < 1e-12, "h a medio radio = punto medio")

            dom = build_domain(_circulo(64))
            h = 2.0 * np.pi / 32
            nodos = resample_boundary(dom, SpacingProfile.constante(h), "outer")
            razon = nodos.huecos() / h
            self._assert(abs(len(nodos) - 32) <= 1,                        f"Remuestreo: {len(nodos)} nodos = 32 +- 1")
            self._assert(razon.min() >= 0.75 and razon.max() <= 1.25,      "Remuestreo: huecos dentro de [0.75, 1.25] h")
            self._assert(np.allclose(np.linalg.norm(nodos.normals, axis=1), 1.0), "Normales de frontera unitarias")

            spline = dom.spline
            cierre = np.append(nodos.params, nodos.params[0] + spline.period)
            arcos = np.array([spline.arc_length(a, b) for a, b in zip(cierre[:-1], cierre[1:])])
            longitud = spline.arc_length(spline.knots[0], spline.knots[-1])
            self._assert(abs(arcos.sum() - longitud) < 1e-10 * longitud, "Remuestreo: los arcos suman la longitud de la curva")
            self._assert(
                np.allclose(arcos, longitud / len(nodos), rtol=1e-5),
                f"Remuestreo con h constante: arcos iguales a L/n (desvio {np.ptp(arcos) / arcos.mean():.1e})",
            )

            try:
                resample_boundary(build_domain(_circulo(16, radio=0.001)), SpacingProfile.constante(0.1), "outer")
                self._assert(False, "Curva corta rechazada")
            except CurveTooShort:
                self._assert(True, "Curva mas corta que 3 h_min rechazada (CurveTooShort)")

            perfil = SpacingProfile.constante(0.1)
            exterior = resample_boundary(dom, perfil, "outer")
            interiores = fill_interior(dom, exterior, None, perfil, seed=3)
            esperado = np.pi / (DISCRETIZACION["densidad_relleno"] * 0.1**2)
            self._assert(
                0.7 * esperado <= len(interiores) <= 1.3 * esperado,
                f"Disco h=0.1: {len(interiores)} nodos interiores en [0.7, 1.3] x {esperado:.0f}",
            )
            self._assert(bool(np.all(dom.contiene(interiores))), "Todos los nodos interiores dentro del disco")
            repetido = fill_interior(dom, exterior, None, perfil, seed=3)
            self._assert(np.array_equal(interiores, repetido), "Determinismo con semilla fija")

            hueco = build_domain(_circulo(64, radio=0.98))
            try:
                fill_interior(dom, exterior, resample_boundary(hueco, perfil, "dendrite"), perfil, seed=0)
                self._assert(False, "Anillo mas delgado que h rechazado")
            except RegionEmpty:
                self._assert(True, "Anillo mas delgado que h rechazado (RegionEmpty)")
        except Exception:
            _fail("Error en discretizacion", traceback.format_exc())
            self.failed += 1

    # ------------------------------------------------------------------
    # RBF-FD
    # ------------------------------------------------------------------
    def test_rbffd(self) -> None:
        _subheader("src/rbffd.py")
        try:
            from src.errores import NotEnoughNodes, SingularStencil
            from src.rbffd import (
                ScatteredField, construir_pesos, h_para_n_objetivo, heat_step,
                idw_transfer, laplacian_weights, pasos_estables, select_stencil, solve_poisson,
            )

            gx, gy = np.meshgrid(np.arange(5.0), np.arange(5.0))
            rejilla = np.column_stack([gx.ravel(), gy.ravel()])
            stencil = select_stencil(rejilla, 12, 5)
            self._assert(stencil[0] == 12 and set(stencil[1:]) == {7, 11, 13, 17}, "Rejilla: centro + 4 vecinos axiales")
            self._assert(select_stencil(rejilla, 12, 1).tolist() == [12],            "n=1 devuelve solo el centro")
            self._assert(sorted(select_stencil(rejilla, 12, 25)) == list(range(25)), "n=N devuelve todos los nodos")
            try:
                select_stencil(rejilla, 12, 26)
                self._assert(False, "Stencil mayor que N rechazado")
            except NotEnoughNodes:
                self._assert(True, "Stencil mayor que N rechazado (NotEnoughNodes)")

            rng = np.random.default_rng(11)
            pts = rng.uniform(-1.0, 1.0, size=(12, 2))
            w = laplacian_weights(pts)
            x, y = pts[:, 0], pts[:, 1]
            self._assert(abs(w.sum()) < 1e-9,                      "Laplaciano de una constante = 0")
            self._assert(abs(w @ x) < 1e-9,                        "Laplaciano de x = 0")
            self._assert(abs(w @ (x**2 + y**2) - 4.0) < 1e-7,      "Laplaciano de x^2 + y^2 = 4")
            w_t = laplacian_weights(pts + np.array([5.0, -3.0]))
            self._assert(np.allclose(w, w_t, atol=1e-9),           "Pesos invariantes a traslacion")

            try:
                laplacian_weights(pts[:5])
                self._assert(False, "Stencil de 5 puntos rechazado")
            except NotEnoughNodes:
                self._assert(True, "Stencil de 5 puntos rechazado (NotEnoughNodes)")
            try:
                laplacian_weights(np.column_stack([np.arange(12.0), np.zeros(12)]))
                self._assert(False, "Stencil colineal rechazado")
            except SingularStencil:
                self._assert(True, "Stencil colineal rechazado (SingularStencil)")

            self._assert(pasos_estables(0.01, 0.02) == 250, "Subpasos para dt=0.01, h_min=0.02: 250")
            self._assert(pasos_estables(1e-4, 0.1) == 1,    "dt estable: un solo subpaso")

            nodos, kinds = _nodos_disco(0.2)
            interior = np.flatnonzero(kinds == "interior")
            pesos = construir_pesos(nodos, interior)

            campo = ScatteredField(nodos, kinds, np.full(len(nodos), 0.5))
            nuevo = heat_step(campo, pesos, 1e-3, boundary_values={"outer": 0.5, "dendrite": 0.5})
            self._assert(np.allclose(nuevo.values[interior], 0.5, atol=1e-9), "T = 0.5 uniforme no cambia")

            r2 = np.sum(nodos**2, axis=1)
            nuevo = heat_step(ScatteredField(nodos, kinds, r2), pesos, 1e-3, boundary_values={})
            self._assert(np.allclose(nuevo.values[interior] - r2[interior], 4e-3, atol=1e-6), "T = x^2 + y^2 crece 4 dt")

            kinds_d = kinds.copy()
            kinds_d[:5] = "dendrite"
            nuevo = heat_step(ScatteredField(nodos, kinds_d, rng.random(len(nodos))), pesos, 1e-3)
            self._assert(np.all(nuevo.values[:5] == 0.0), "Frontera de la dendrita exactamente 0 tras el paso")
            self._assert(np.all(nuevo.values[kinds_d == "outer"] == 1.0), "Frontera exterior exactamente 1 tras el paso")

            campo, residuo, _ = solve_poisson(nodos, kinds, 0.0, 3.0)
            self._assert(np.allclose(campo.values, 3.0, atol=1e-6), f"Poisson con rhs=0 y bc=3: u = 3 (residuo {residuo:.1e})")

            fuente = ScatteredField(np.array([(-1.0, 0.0), (1.0, 0.0)]), ["interior", "interior"], [0.0, 1.0])
            self._assert(abs(idw_transfer(fuente, [(0.0, 0.0)], k_sources=2)[0] - 0.5) < 1e-15, "IDW simetrico en el punto medio = 0.5")
            viejo = ScatteredField(nodos, kinds, rng.random(len(nodos)))
            self._assert(np.array_equal(idw_transfer(viejo, nodos[:10]), viejo.values[:10]), "IDW copia exacta en nodos coincidentes")
            constante = ScatteredField(nodos, kinds, np.full(len(nodos), 0.7))
            self._assert(np.allclose(idw_transfer(constante, rng.uniform(-0.5, 0.5, (20, 2))), 0.7, atol=1e-14), "IDW conserva campos constantes")

            h = h_para_n_objetivo(900, densidad=1.0)
            self._assert(abs(np.pi / h**2 + 2.0 * np.pi / h - 900.0) < 1e-6, "h objetivo satisface pi/h^2 + 2 pi/h = N")
        except Exception:
            _fail("Error en rbffd", traceback.format_exc())
            self.failed += 1

    # ------------------------------------------------------------------
    # SIMULACION (UNIDAD)
    # ------------------------------------------------------------------
    def test_simulacion_unidad(self) -> None:
        _subheader("src/simulacion.py (unidad)")
        try:
            from src.errores import ConfigError, IoFailure
            from src.rbffd import ScatteredField
            from src.simulacion import (
                SimConfig, SimState, advance_boundary, boundary_velocity,
                leer_snapshot, metrica_simetria, write_snapshot,
            )

            v0 = boundary_velocity((1.0, 0.0), (1.0, 0.0), 0.04)
            self._assert(abs(np.linalg.norm(v0) - 0.042) < 1e-12, "|v| = 0.042 en phi = 0")
            u = np.array([1.0, 1.0]) / np.sqrt(2.0)
            v45 = boundary_velocity(u, u, 0.04)
            self._assert(abs(np.linalg.norm(v45) - 0.002) < 1e-12, "|v| = 0.002 en phi = pi/4")

            movido = advance_boundary([(0.1, 0.0)], [(1.0, 0.0)], 0.01, 0.04)
            self._assert(np.allclose(movido, [(0.10042, 0.0)], atol=1e-15, rtol=0), "Avance de (R_d, 0) a (R_d + 0.00042, 0)")
            pts = _circulo(8, radio=0.1)
            self._assert(np.array_equal(advance_boundary(pts, pts / 0.1, 0.01, 0.0), pts), "v_d = 0: nodos sin cambio")
            for nombre, llamada in (
                ("dt = 0 rechazado", lambda: advance_boundary(pts, pts / 0.1, 0.0, 0.04)),
                ("Normal no unitaria rechazada", lambda: boundary_velocity((1.0, 0.0), (2.0, 0.0), 0.04)),
            ):
                try:
                    llamada()
                    self._assert(False, nombre)
                except ValueError:
                    self._assert(True, nombre)

            self._assert(metrica_simetria(_circulo(64, radio=0.3)) < 1e-12, "Simetria de un circulo = 0")
            self._assert(metrica_simetria(_elipse(64)) > 0.5,               "Elipse rompe la simetria de orden 4")

            with tempfile.TemporaryDirectory() as tmp:
                campo = ScatteredField(
                    np.array([(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]),
                    ["interior", "outer", "dendrite"],
                    [0.5, 1.0, 0.0],
                )
                estado = SimState(0, 0.0, campo, None, None, None, None)
                path = write_snapshot(estado, Path(tmp) / "step_00000.csv")
                lineas = path.read_text(encoding="utf-8").strip().splitlines()
                self._assert(len(lineas) == 4 and lineas[0] == "x,y,T,kind", "Snapshot de 3 nodos: encabezado + 3 filas")
                self._assert(leer_snapshot(path)["T"].tolist() == [0.5, 1.0, 0.0], "Snapshot se relee sin perdida")

                config_path = Path(tmp) / "config.json"
                config_path.write_text(json.dumps({"N_t": 3, "spacing": {"h_max": 0.08}}), encoding="utf-8")
                config = SimConfig.from_json(config_path)
                self._assert(config.N_t == 3 and config.spacing.h_max == 0.08 and config.R_m == 1.0, "JSON parcial con defaults")

            casos_invalidos = {
                "Clave desconocida rechazada": {"velocidad": 1.0},
                "Clave anidada desconocida rechazada": {"spacing": {"h_medio": 0.05}},
                "R_d >= R_m rechazado": {"R_d": 2.0},
                "initial_temperature invalida rechazada": {"initial_temperature": "caliente"},
            }
            for nombre, datos in casos_invalidos.items():
                try:
                    SimConfig.from_dict(datos)
                    self._assert(False, nombre)
                except ConfigError:
                    self._assert(True, f"{nombre} (ConfigError)")

            try:
                SimConfig.from_json(ROOT / "no_existe.json")
                self._assert(False, "Config inexistente rechazada")
            except IoFailure:
                self._assert(True, "Config inexistente rechazada (IoFailure)")
        except Exception:
            _fail("Error en simulacion (unidad)", traceback.format_exc())
            self.failed += 1

    # ------------------------------------------------------------------
    # DASHBOARD
    # ------------------------------------------------------------------
    def test_dashboard_estilos(self) -> None:
        _subheader("dashboard/app.py (estilos)")
        try:
            app = (ROOT / "dashboard" / "app.py").read_text(encoding="utf-8")
            estilo = app[app.index("<style>"):app.index("</style>")]
            definidas = set(re.findall(r"\.([a-z][\w-]*)\s*[{,p]", estilo))
            usadas: set[str] = set()
            for pagina in sorted((ROOT / "dashboard" / "pages").glob("*.py")):
                usadas |= set(re.findall(r'class="([\w-]+)"', pagina.read_text(encoding="utf-8")))
            self._assert(usadas <= definidas, f"Clases usadas por las paginas definidas: {sorted(usadas)}")
            self._assert(definidas <= usadas, "Sin reglas CSS que ninguna pagina use", str(sorted(definidas - usadas)))
        except Exception:
            _fail("Error en estilos del dashboard", traceback.format_exc())
            self.failed += 1

    def run(self) -> tuple[int, int]:
        _header("NIVEL 1 - Pruebas de unidad")
        self.test_settings()
        self.test_errores()
        self.test_geometria()
        self.test_ordenamiento()
        self.test_spline()
        self.test_dominio()
        self.test_discretizacion()
        self.test_rbffd()
        self.test_simulacion_unidad()
        self.test_dashboard_estilos()
        return self.passed, self.failed


# ======================================================================
# NIVEL 2 - PROPIEDADES Y ACEPTACION
# ======================================================================

class TestNivel2:
    """Barridos aleatorios contra oraculos y corridas cortas."""

    def __init__(self, verbose: bool = False) -> None:
        self.verbose = verbose
        self.passed  = 0
        self.failed  = 0

    def _assert(self, condicion: bool, nombre: str, detalle: str = "") -> None:
        if condicion:
            _ok(nombre)
            self.passed += 1
        else:
            _fail(nombre, detalle)
            self.failed += 1

    def test_vecinos_fuerza_bruta(self) -> None:
        _subheader("Vecinos contra orden por fuerza bruta")
        try:
            from src.geometria import build_index, nth_nearest

            rng = np.random.default_rng(5)
            for k in (30, 200):
                pts = rng.random((k, 2))
                index = build_index(pts)
                correcto = True
                for q in range(k):
                    d = np.linalg.norm(pts - pts[q], axis=1)
                    otros = np.delete(np.arange(k), q)
                    esperado = otros[np.lexsort((otros, d[otros]))]
                    if k <= 30:
                        obtenido = np.array([nth_nearest(index, q, n) for n in range(1, k)])
                    else:
                        obtenido = index.vecinos_ordenados(q, k - 1)
                    correcto &= bool(np.array_equal(obtenido, esperado))
                self._assert(correcto, f"k={k}: nth_nearest(q, 1..k-1) es el orden por distancia")
        except Exception:
            _fail("Error en vecinos", traceback.format_exc())
            self.failed += 1

    def test_recuperacion_orden(self) -> None:
        _subheader("Recuperacion del orden (100 permutaciones x k)")
        try:
            from src.ordenamiento import order_points

            rng = np.random.default_rng(2024)
            duracion = 0.0
            fallos: list[str] = []
            corridas = 0
            for nombre, forma in (("circulo", _circulo), ("elipse", _elipse)):
                for k in (16, 32, 64, 128):
                    base = forma(k)
                    for _ in range(100):
                        perm = rng.permutation(k)
                        entrada = base[perm]
                        inicio = time.perf_counter()
                        ordered = order_points(entrada)
                        duracion += time.perf_counter() - inicio
                        corridas += 1
                        if not _es_orden_ciclico(perm[ordered.sigma]):
                            fallos.append(f"{nombre} k={k}")
            self._assert(not fallos, f"{corridas} corridas recuperan el orden ciclico", "\n".join(fallos[:10]))
            self._assert(duracion < 1.0, f"Tiempo total de ordenamiento {duracion:.2f} s < 1 s")
        except Exception:
            _fail("Error en recuperacion de orden", traceback.format_exc())
            self.failed += 1

    def test_convergencia_spline(self) -> None:
        _subheader("Spline: interpolacion, costura C2, convergencia y equivarianza")
        try:
            from src.ordenamiento import order_points
            from src.spline import fit_periodic_cubic

            errores = []
            for k in (16, 32, 64):
                ordered = order_points(_circulo(k))
                spline = fit_periodic_cubic(ordered)
                residuo = float(np.max(np.linalg.norm(spline.eval(spline.knots[:-1]) - ordered.ordenados, axis=1)))
                self._assert(residuo < 1e-9, f"k={k}: residuo de interpolacion {residuo:.1e} < 1e-9")

                c = spline.pp.c
                h = spline.knots[-1] - spline.knots[-2]
                d1_fin = 3 * c[0, -1] * h**2 + 2 * c[1, -1] * h + c[2, -1]
                d2_fin = 6 * c[0, -1] * h + 2 * c[1, -1]
                d1_ini, d2_ini = c[2, 0], 2 * c[1, 0]
                costura1 = np.linalg.norm(d1_fin - d1_ini) / max(1.0, np.linalg.norm(d1_ini))
                costura2 = np.linalg.norm(d2_fin - d2_ini) / max(1.0, np.linalg.norm(d2_ini))
                self._assert(max(costura1, costura2) < 1e-8, f"k={k}: costura C2 ({max(costura1, costura2):.1e})")

                t = np.linspace(0.0, spline.period, 20_000, endpoint=False)
                errores.append(float(np.max(np.abs(np.linalg.norm(spline.eval(t), axis=1) - 1.0))))

            ordenes = [np.log2(errores[i] / errores[i + 1]) for i in range(2)]
            self._assert(min(ordenes) >= 3.5, f"Orden de convergencia observado {ordenes[0]:.2f}, {ordenes[1]:.2f} >= 3.5")

            base = _estrella(48)
            ang = 0.7
            rot = np.array([[np.cos(ang), -np.sin(ang)], [np.sin(ang), np.cos(ang)]])
            desplazamiento = np.array([1.5, -0.5])
            s1 = fit_periodic_cubic(order_points(base))
            s2 = fit_periodic_cubic(order_points(base @ rot.T + desplazamiento))
            t = np.linspace(0.0, s1.period, 300)
            if np.array_equal(order_points(base).sigma, order_points(base @ rot.T + desplazamiento).sigma):
                self._assert(
                    np.allclose(s1.eval(t) @ rot.T + desplazamiento, s2.eval(t), atol=1e-9),
                    "Spline equivariante a rotacion + traslacion",
                )
            else:
                _warn("Empate de vecinos cambio el recorrido; equivarianza no comparable punto a punto")
        except Exception:
            _fail("Error en convergencia del spline", traceback.format_exc())
            self.failed += 1

    def test_pertenencia_oraculo(self) -> None:
        _subheader("Pertenencia contra ray casting (estrella y elipse)")
        try:
            from src.dominio import build_domain

            rng = np.random.default_rng(99)
            for nombre, puntos, caja in (("estrella", _estrella(128), 0.8), ("elipse", _elipse(64), 2.3)):
                dom = build_domain(puntos)
                t_denso = np.linspace(0.0, dom.spline.period, 8192, endpoint=False)
                denso = dom.spline.eval(t_denso)
                X = rng.uniform(-caja, caja, size=(10_000, 2))
                distancia, _ = cKDTree(denso).query(X)
                cuerdas = np.linalg.norm(np.diff(np.vstack([puntos, puntos[:1]]), axis=0), axis=1)
                espaciado = float(cuerdas.max())

                veredicto = dom.contiene(X)
                oraculo = _ray_casting(denso, X)
                fuera_banda = distancia > espaciado
                acuerdo = bool(np.all(veredicto[fuera_banda] == oraculo[fuera_banda]))
                errados = veredicto != oraculo
                banda = float(distancia[errados].max() / espaciado) if errados.any() else 0.0
                print(f"         {C.GREY}{nombre}: banda de clasificacion erronea medida = {banda:.3f} x cuerda maxima{C.RESET}")
                self._assert(acuerdo, f"{nombre}: 100% de acuerdo fuera de la banda de una cuerda")
                self._assert(banda <= 1.5, f"{nombre}: banda erronea {banda:.3f} <= 1.5 cuerdas")

                lejos = distancia > 2.0 * espaciado
                self._assert(bool(np.all(veredicto[lejos] == oraculo[lejos])), f"{nombre}: acuerdo total a mas de 2 cuerdas maximas")

                escala = 3.7
                dom_esc = build_domain(puntos * escala)
                self._assert(
                    np.array_equal(dom_esc.contiene(X[fuera_banda] * escala), veredicto[fuera_banda]),
                    f"{nombre}: veredictos invariantes a escala",
                )

                muestra = X[:500]
                t_min, gamma = dom.proyectar(muestra)
                f_min = np.sum((muestra - gamma) ** 2, axis=1)
                _, q = dom.index.tree.query(muestra)
                p = dom.ordered.sigma_inv[q]
                k = len(puntos)
                nudos = dom.spline.knots
                f_nudos = np.min(
                    [np.sum((muestra - dom.spline.eval(nudos[(p + d) % k])) ** 2, axis=1) for d in (-1, 0, 1)],
                    axis=0,
                )
                self._assert(bool(np.all(f_min <= f_nudos + 1e-12)), f"{nombre}: proyeccion no peor que los nudos vecinos")
        except Exception:
            _fail("Error en pertenencia", traceback.format_exc())
            self.failed += 1

    def test_orientacion_estrella(self) -> None:
        _subheader("Orientacion en una curva no convexa (estrella)")
        try:
            from src.dominio import build_domain, nearest_parameter

            dom_circulo = build_domain(_circulo(64))
            dom = build_domain(_estrella(128))
            self._assert(
                dom.orientation_c == dom_circulo.orientation_c,
                f"Estrella y circulo antihorarios comparten c = {dom.orientation_c:+d}",
            )
            for punta in ((0.7, 0.0), (0.0, 0.7), (-0.7, 0.0), (0.0, -0.7)):
                t = nearest_parameter(dom, punta)
                d2 = dom.spline.eval_derivative(t, 2)
                n_curv = dom.orientation_c * d2 / np.linalg.norm(d2)
                radial = np.asarray(punta) / np.linalg.norm(punta)
                coseno = float(np.dot(n_curv, radial))
                self._assert(coseno > 0.9, f"Punta {punta}: c gamma'' apunta hacia afuera (coseno {coseno:.3f})")

            t_puntas = np.array([nearest_parameter(dom, p) for p in ((0.7, 0.0), (0.0, 0.7), (-0.7, 0.0), (0.0, -0.7))])
            _, consistente = dom.normales(t_puntas)
            self._assert(bool(np.all(consistente)), "Puntas: normal de curvatura consistente con la tangente rotada")

            t_sonda, gamma = dom.proyectar(dom.interior_probe.reshape(1, 2))
            d2 = dom.spline.eval_derivative(t_sonda, 2)[0]
            self._assert(
                float(np.dot(d2, gamma[0] - dom.interior_probe)) < 0.0,
                "La sonda elegida proyecta sobre un tramo convexo",
            )
        except Exception:
            _fail("Error en orientacion de la estrella", traceback.format_exc())
            self.failed += 1

    def test_derivadas_diferencias_finitas(self) -> None:
        _subheader("Spline: derivadas contra diferencias finitas")
        try:
            from src.ordenamiento import order_points
            from src.spline import fit_periodic_cubic

            spline = fit_periodic_cubic(order_points(_elipse(64)))
            t = 0.5 * (spline.knots[:-1] + spline.knots[1:])

            eps = 1e-6
            fd1 = (spline.eval(t + eps) - spline.eval(t - eps)) / (2.0 * eps)
            d1 = spline.eval_derivative(t, 1)
            error1 = float(np.max(np.linalg.norm(fd1 - d1, axis=1) / np.maximum(1.0, np.linalg.norm(d1, axis=1))))
            self._assert(error1 < 1e-6, f"Orden 1: error relativo {error1:.1e} < 1e-6")

            eps = 1e-4
            fd2 = (spline.eval(t + eps) - 2.0 * spline.eval(t) + spline.eval(t - eps)) / eps**2
            d2 = spline.eval_derivative(t, 2)
            error2 = float(np.max(np.linalg.norm(fd2 - d2, axis=1) / np.maximum(1.0, np.linalg.norm(d2, axis=1))))
            self._assert(error2 < 1e-5, f"Orden 2: error relativo {error2:.1e} < 1e-5")
        except Exception:
            _fail("Error en derivadas", traceback.format_exc())
            self.failed += 1

    def test_periodicidad(self) -> None:
        _subheader("Spline: periodicidad")
        try:
            from src.ordenamiento import order_points
            from src.spline import fit_periodic_cubic

            spline = fit_periodic_cubic(order_points(_estrella(48)))
            t = np.random.default_rng(17).uniform(0.0, spline.period, 500)
            for desplazamiento in (spline.period, -spline.period, 3.0 * spline.period):
                error = float(np.max(np.abs(spline.eval(t + desplazamiento) - spline.eval(t))))
                self._assert(error < 1e-12, f"eval(t {desplazamiento:+.3f}) = eval(t) (error {error:.1e})")
            d1 = np.max(np.abs(spline.eval_derivative(t + spline.period, 1) - spline.eval_derivative(t, 1)))
            self._assert(float(d1) < 1e-10, "Primera derivada periodica")
        except Exception:
            _fail("Error en periodicidad", traceback.format_exc())
            self.failed += 1

    def test_aditividad_longitud(self) -> None:
        _subheader("Spline: aditividad de la longitud de arco")
        try:
            from src.ordenamiento import order_points
            from src.spline import fit_periodic_cubic

            spline = fit_periodic_cubic(order_points(_estrella(48)))
            rng = np.random.default_rng(23)
            peor = 0.0
            for _ in range(20):
                a = rng.uniform(0.0, spline.period)
                b, c = a + spline.period * np.sort(rng.uniform(0.0, 1.0, 2))
                suma = spline.arc_length(a, b, epsrel=1e-12) + spline.arc_length(b, c, epsrel=1e-12)
                total = spline.arc_length(a, c, epsrel=1e-12)
                peor = max(peor, abs(suma - total) / total)
            self._assert(peor < 1e-10, f"L(a,b) + L(b,c) = L(a,c) (error relativo {peor:.1e})")

            completa = spline.arc_length(0.0, spline.period)
            mitades = spline.arc_length(0.0, 0.5 * spline.period) + spline.arc_length(0.5 * spline.period, spline.period)
            self._assert(abs(completa - mitades) < 1e-10 * completa, "Vuelta completa = suma de mitades")
        except Exception:
            _fail("Error en aditividad de longitud", traceback.format_exc())
            self.failed += 1

    def test_curvatura_circulo(self) -> None:
        _subheader("Spline: segunda derivada hacia el centro del circulo")
        try:
            from src.ordenamiento import order_points
            from src.spline import fit_periodic_cubic

            centro = np.array([0.4, -1.2])
            spline = fit_periodic_cubic(order_points(_circulo(64, radio=2.0, centro=tuple(centro))))
            t = np.linspace(0.0, spline.period, 400, endpoint=False)
            d2 = spline.eval_derivative(t, 2)
            hacia_centro = centro - spline.eval(t)
            coseno = np.sum(d2 * hacia_centro, axis=1) / (np.linalg.norm(d2, axis=1) * np.linalg.norm(hacia_centro, axis=1))
            self._assert(float(coseno.min()) > 0.99, f"gamma'' apunta al centro (coseno minimo {coseno.min():.4f})")
        except Exception:
            _fail("Error en curvatura del circulo", traceback.format_exc())
            self.failed += 1

    def test_orientacion_sondas(self) -> None:
        _subheader("Orientacion independiente de la sonda interior")
        try:
            from src.dominio import build_domain, orientation_constant

            sondas = [(0.0, 0.0), (0.3, 0.1), (-0.2, -0.4)]
            for nombre, puntos in (("circulo", _circulo(64)), ("elipse", _elipse(64))):
                dom = build_domain(puntos)
                constantes = {orientation_constant(dom.spline, s, dom.ordered) for s in sondas}
                self._assert(
                    constantes == {dom.orientation_c},
                    f"{nombre}: tres sondas dan la misma c = {dom.orientation_c:+d}",
                    str(constantes),
                )
        except Exception:
            _fail("Error en orientacion por sondas", traceback.format_exc())
            self.failed += 1

    def test_estacionariedad_proyeccion(self) -> None:
        _subheader("Proyeccion: residuo de estacionariedad")
        try:
            from src.dominio import build_domain, nearest_parameter

            puntos = _elipse(64)
            dom = build_domain(puntos)
            cuerda = float(np.min(np.linalg.norm(np.diff(puntos, axis=0), axis=1)))
            rng = np.random.default_rng(31)
            t_base = rng.uniform(0.0, dom.spline.period, 300)
            normales, _ = dom.normales(t_base)
            X = dom.spline.eval(t_base) + rng.uniform(-0.3, 0.3, (300, 1)) * cuerda * normales

            residuos = []
            for x in X:
                t = nearest_parameter(dom, x)
                residuos.append(abs(float(np.dot(x - dom.spline.eval(t), dom.spline.eval_derivative(t, 1)))))
            peor = max(residuos)
            self._assert(peor < 1e-9, f"|<x - gamma(t), gamma'(t)>| max = {peor:.1e} < 1e-9")
        except Exception:
            _fail("Error en estacionariedad", traceback.format_exc())
            self.failed += 1

    def test_reproduccion_stencils(self) -> None:
        _subheader("Reproduccion polinomial de stencils")
        try:
            from src.rbffd import construir_pesos, laplacian_weights

            rng = np.random.default_rng(50)
            peor_cuad, peor_lin = 0.0, 0.0
            for _ in range(50):
                pts = rng.uniform(-1.0, 1.0, size=(12, 2))
                w = laplacian_weights(pts)
                x, y = pts[:, 0], pts[:, 1]
                peor_lin = max(peor_lin, abs(w.sum()), abs(w @ x), abs(w @ y))
                peor_cuad = max(peor_cuad, abs(w @ x**2 - 2.0), abs(w @ y**2 - 2.0), abs(w @ (x * y)))
            self._assert(peor_lin < 1e-9,  f"50 stencils: constantes y lineales -> 0 ({peor_lin:.1e})")
            self._assert(peor_cuad < 1e-7, f"50 stencils: cuadraticos exactos ({peor_cuad:.1e})")

            nodos, kinds = _nodos_disco(0.05)
            interior = np.flatnonzero(kinds == "interior")
            pesos = construir_pesos(nodos, interior)
            vecinos = nodos[pesos.neighbors]
            centros = nodos[pesos.centers]
            escala = np.linalg.norm(vecinos - centros[:, None, :], axis=2).max(axis=1) ** -2
            x, y = vecinos[..., 0], vecinos[..., 1]
            error = np.abs(np.sum(pesos.weights * (x**2 + y**2), axis=1) - 4.0)
            self._assert(bool(np.all(error < 1e-7 * escala)), f"{len(pesos)} stencils del disco reproducen x^2 + y^2")
            self._assert(bool(np.all(pesos.condicion < 1e12)), "Todos los sistemas locales bajo el umbral de condicion")
        except Exception:
            _fail("Error en reproduccion de stencils", traceback.format_exc())
            self.failed += 1

    def test_discretizacion_propiedades(self) -> None:
        _subheader("Discretizacion: separacion minima y cobertura")
        try:
            from src.discretizacion import SpacingProfile, discretizar_region, spacing_at
            from src.dominio import build_domain

            exterior = build_domain(_circulo(64))
            semilla = _circulo(32, radio=0.1)
            hueco = build_domain(semilla)
            perfil = SpacingProfile(h_min=0.02, h_max=0.1, focus_points=semilla, transition_radius=0.25)
            disc = discretizar_region(exterior, perfil, hueco=hueco, seed=4)
            nodos = np.vstack([b.points for b in disc.boundary] + [disc.interior_nodes])
            h_nodos = perfil.h(nodos)

            pares = cKDTree(nodos).query_pairs(0.7 * perfil.h_max, output_type="ndarray")
            d = np.linalg.norm(nodos[pares[:, 0]] - nodos[pares[:, 1]], axis=1)
            minimo = 0.7 * np.minimum(h_nodos[pares[:, 0]], h_nodos[pares[:, 1]])
            self._assert(bool(np.all(d >= minimo)), f"Separacion >= 0.7 min(h) en {disc.n_nodos} nodos")
            self._assert(not bool(np.any(hueco.contiene(disc.interior_nodes))), "Ningun nodo interior dentro del hueco")
            self._assert(bool(np.all(exterior.contiene(disc.interior_nodes))), "Todos los nodos interiores dentro del circulo")

            rng = np.random.default_rng(8)
            r = np.sqrt(rng.uniform(0.0, 1.0, 20_000))
            a = rng.uniform(0.0, 2.0 * np.pi, 20_000)
            X = np.column_stack([r * np.cos(a), r * np.sin(a)])
            h_x = perfil.h(X)
            lejos = (np.abs(r - 1.0) > h_x) & (np.abs(r - 0.1) > h_x) & (r > 0.1)
            X, h_x = X[lejos][:1000], h_x[lejos][:1000]
            dist, _ = cKDTree(nodos).query(X)
            self._assert(bool(np.all(dist <= 1.5 * h_x)), f"Cobertura: {len(X)} puntos con nodo a <= 1.5 h")

            repetida = discretizar_region(exterior, perfil, hueco=hueco, seed=4)
            self._assert(np.array_equal(repetida.interior_nodes, disc.interior_nodes), "Determinismo con semilla fija")
            self._assert(abs(spacing_at(perfil, semilla[0]) - 0.02) < 1e-15, "h_min sobre la semilla")
        except Exception:
            _fail("Error en propiedades de discretizacion", traceback.format_exc())
            self.failed += 1

    def test_poisson(self) -> None:
        _subheader("Banco de Poisson en el disco unitario")
        try:
            from src.rbffd import poisson_disco

            inicio = time.perf_counter()
            resultado = poisson_disco(n_objetivo=900, solucion="cuadratica", seed=0)
            self._assert(resultado.error_max < 1e-4, f"N={resultado.n_nodos}: error max {resultado.error_max:.2e} < 1e-4")

            errores = []
            for n in (200, 450, 900):
                r = poisson_disco(n_objetivo=n, solucion="seno", seed=0)
                errores.append(r.error_max)
                print(f"         {C.GREY}N={r.n_nodos}: error {r.error_max:.3e}, residuo {r.residuo:.1e}{C.RESET}")
                desvio = abs(r.n_nodos - n) / n
                self._assert(desvio <= 0.1, f"Objetivo {n}: N={r.n_nodos} a {100 * desvio:.1f}% (<= 10%)")
            self._assert(errores[0] > errores[1] > errores[2], "Error decrece monotonamente en N = 200, 450, 900")
            duracion = time.perf_counter() - inicio
            self._assert(duracion < 30.0, f"Banco de Poisson en {duracion:.1f} s < 30 s")
        except Exception:
            _fail("Error en Poisson", traceback.format_exc())
            self.failed += 1

    def test_simulacion_corta(self) -> None:
        _subheader("Simulaciones cortas")
        try:
            from src.simulacion import SimConfig, SimuladorDendrita, leer_snapshot

            with tempfile.TemporaryDirectory() as tmp:
                config = SimConfig(N_t=1, snapshot_every=1, output_dir=str(Path(tmp) / "uno"))
                resultado = SimuladorDendrita(config).run()
                nombres = sorted(p.name for p in resultado.snapshots)
                self._assert(nombres == ["step_00000.csv", "step_00001.csv"], f"N_t=1: snapshots {nombres}")
                self._assert(len(resultado.resumen["steps"]) == 2, "Resumen con paso 0 y paso 1")
                self._assert(resultado.resumen_path.exists(), "run_summary.json escrito")

                inicial = leer_snapshot(Path(tmp) / "uno" / "step_00000.csv")
                self._assert(bool((inicial.loc[inicial["kind"] == "dendrite", "T"] == 0.0).all()), "Paso 0: dendrita a T = 0")
                self._assert(bool((inicial.loc[inicial["kind"] == "outer", "T"] == 1.0).all()),    "Paso 0: exterior a T = 1")
                n_den = int((inicial["kind"] == "dendrite").sum())
                self._assert(n_den % 4 == 0, f"Semilla simetrica con {n_den} nodos (multiplo de 4)")

                config = SimConfig(
                    N_t=4, v_d=0.0, snapshot_every=10, snapshot_initial=False,
                    initial_temperature="uniforme", output_dir=str(Path(tmp) / "quieto"),
                )
                resumen = SimuladorDendrita(config).run().resumen
                areas = np.array(resumen["area"])
                residuos = [p["residual"] for p in resumen["steps"][1:]]
                self._assert(np.allclose(areas, areas[0], rtol=1e-2), "v_d = 0: la dendrita no se mueve")
                self._assert(
                    all(b <= a + 1e-12 for a, b in zip(residuos, residuos[1:])),
                    "v_d = 0: residuo max |dT| monotono decreciente",
                    str(residuos),
                )
                self._assert(
                    all(p["T_min"] >= -1e-9 and p["T_max"] <= 1.0 + 1e-9 for p in resumen["steps"]),
                    "v_d = 0: temperaturas dentro de [0, 1]",
                )

                config = SimConfig(
                    N_t=4, v_d=0.0, snapshot_every=4, snapshot_initial=False,
                    initial_temperature="estacionaria", output_dir=str(Path(tmp) / "estacionario"),
                )
                corrida = SimuladorDendrita(config).run()
                final = leer_snapshot(corrida.snapshots[-1])
                final = final[final["kind"] == "interior"]
                r = np.maximum(np.hypot(final["x"], final["y"]), config.R_d)
                perfil = np.log(r / config.R_d) / np.log(config.R_m / config.R_d)
                desvio = float(np.max(np.abs(final["T"] - perfil)))
                self._assert(desvio < 0.05, f"v_d = 0: T sigue el perfil del anillo ln(r/R_d)/ln(R_m/R_d) (desvio {desvio:.3f})")
                residuos_est = [p["residual"] for p in corrida.resumen["steps"][1:]]
                self._assert(
                    max(residuos_est) < residuos[0],
                    f"Perfil estacionario casi inmovil (residuo {max(residuos_est):.1e} < {residuos[0]:.1e})",
                )
        except Exception:
            _fail("Error en simulaciones cortas", traceback.format_exc())
            self.failed += 1

    def run(self) -> tuple[int, int]:
        _header("NIVEL 2 - Propiedades y aceptacion")
        self.test_vecinos_fuerza_bruta()
        self.test_recuperacion_orden()
        self.test_convergencia_spline()
        self.test_pertenencia_oraculo()
        self.test_orientacion_estrella()
        self.test_derivadas_diferencias_finitas()
        self.test_periodicidad()
        self.test_aditividad_longitud()
        self.test_curvatura_circulo()
        self.test_orientacion_sondas()
        self.test_estacionariedad_proyeccion()
        self.test_reproduccion_stencils()
        self.test_discretizacion_propiedades()
        self.test_poisson()
        self.test_simulacion_corta()
        return self.passed, self.failed


# ======================================================================
# NIVEL 3 - CORRIDA COMPLETA END-TO-END
# ======================================================================

class TestNivel3:
    """Corrida por defecto de la dendrita, reportes y CLI."""

    def __init__(self, verbose: bool = False) -> None:
        self.verbose = verbose
        self.passed  = 0
        self.failed  = 0

    def _assert(self, condicion: bool, nombre: str, detalle: str = "") -> None:
        if condicion:
            _ok(nombre)
            self.passed += 1
        else:
            _fail(nombre, detalle)
            self.failed += 1

    def test_corrida_dendrita(self) -> None:
        _subheader("Corrida por defecto (N_t = 500)")
        try:
            import main as cli
            from config.settings import ESPACIADO, NOMBRES_SALIDA
            from src.geometria import polyline_self_intersects
            from src.simulacion import SimConfig, SimuladorDendrita, leer_snapshot

            with tempfile.TemporaryDirectory() as tmp:
                run_dir = Path(tmp) / "dendrita"
                resultado = SimuladorDendrita(SimConfig(output_dir=str(run_dir))).run()
                pasos = resultado.resumen["steps"]
                h_min = ESPACIADO["h_min"]

                self._assert(len(pasos) == 501, "501 registros (paso 0 a 500)")
                self._assert(
                    all(p["T_min"] >= -1e-9 and p["T_max"] <= 1.0 + 1e-9 for p in pasos),
                    "Temperaturas en [0, 1] +- 1e-9 en todos los pasos",
                )
                areas = np.array(resultado.resumen["area"])
                self._assert(bool(np.all(np.diff(areas) > 0)), f"Area estrictamente creciente ({areas[0]:.4f} -> {areas[-1]:.4f})")
                simetria = resultado.resumen["symmetry_max"]
                self._assert(simetria < 5 * h_min, f"Simetria max {simetria:.2e} < 5 h_min")
                conteos = resultado.resumen["node_counts"]
                self._assert(450 <= conteos[-1] <= 900, f"Nodos finales {conteos[-1]} en [450, 900]")
                self._assert(conteos[-1] > conteos[0], f"Crecimiento de nodos {conteos[0]} -> {conteos[-1]}")
                interseca = any(
                    polyline_self_intersects(leer_snapshot(p).query("kind == 'dendrite'")[["x", "y"]].to_numpy())
                    for p in resultado.snapshots
                )
                self._assert(not interseca, "Frontera simple en todos los snapshots")
                ultimo = leer_snapshot(resultado.snapshots[-1]).query("kind == 'dendrite'")[["x", "y"]].to_numpy()
                self._assert(not _segmentos_se_cruzan(ultimo), "Frontera final simple segun el oraculo de pares")
                duracion = resultado.resumen["wall_time_s"]
                if duracion > 60.0:
                    _warn(f"Corrida completa tardo {duracion:.0f} s")
                self._assert(duracion < 300.0, f"Corrida completa en {duracion:.0f} s < 5 min")

                resumen = json.loads((run_dir / NOMBRES_SALIDA["resumen"]).read_text(encoding="utf-8"))
                self._assert(resumen["node_counts"] == conteos, "run_summary.json coincide con el resumen en memoria")

                archivos = cli.generar_reportes(run_dir)
                pdf = [a for a in archivos if a.suffix == ".pdf"]
                xlsx = [a for a in archivos if a.suffix == ".xlsx"]
                self._assert(len(pdf) == 1 and pdf[0].stat().st_size > 10_000, "PDF de la corrida generado")
                self._assert(len(xlsx) == 1 and xlsx[0].exists(), "Excel de la corrida generado")
                if xlsx:
                    hojas = pd.read_excel(xlsx[0], sheet_name=None)
                    self._assert(set(hojas) == {"pasos", "snapshots", "parametros"}, "Excel con hojas pasos/snapshots/parametros")
                    self._assert(len(hojas["pasos"]) == 501, "Hoja 'pasos' con 501 filas")
        except Exception:
            _fail("Error en la corrida completa", traceback.format_exc())
            self.failed += 1

    def test_cli(self) -> None:
        _subheader("CLI main.py")
        try:
            import main as cli

            rng = np.random.default_rng(3)
            with tempfile.TemporaryDirectory() as tmp:
                tmp = Path(tmp)
                perm = rng.permutation(48)
                pd.DataFrame(_estrella(48)[perm], columns=["x", "y"]).to_csv(tmp / "frontera.csv", index=False)
                codigo = cli.main(["order", "--input", str(tmp / "frontera.csv"), "--output", str(tmp / "orden.csv"),
                                   "--spline", str(tmp / "spline.json")])
                orden = pd.read_csv(tmp / "orden.csv")
                sigma = np.argsort(orden["order"].to_numpy())
                self._assert(codigo == 0 and _es_orden_ciclico(perm[sigma]), "order: columna 'order' recupera el recorrido")
                densidad = json.loads((tmp / "density_report.json").read_text(encoding="utf-8"))
                self._assert(densidad["condition3_violations"] == [], "order: reporte de densidad sin violaciones")
                self._assert("coeffs_x" in json.loads((tmp / "spline.json").read_text(encoding="utf-8")), "order: coeficientes del spline")

                consultas = np.array([(0.0, 0.0), (0.9, 0.0), (0.05, 0.05)])
                pd.DataFrame(consultas, columns=["x", "y"]).to_csv(tmp / "consultas.csv", index=False)
                codigo = cli.main(["contain", "--boundary", str(tmp / "frontera.csv"),
                                   "--queries", str(tmp / "consultas.csv"), "--output", str(tmp / "inside.csv")])
                inside = pd.read_csv(tmp / "inside.csv")
                self._assert(codigo == 0 and inside["inside"].tolist() == [1, 0, 1], "contain: columna inside correcta")

                pd.DataFrame(_circulo(64), columns=["x", "y"]).to_csv(tmp / "circulo.csv", index=False)
                pd.DataFrame(_circulo(32, radio=0.1), columns=["x", "y"]).to_csv(tmp / "semilla.csv", index=False)
                codigo = cli.main(["discretize", "--boundary", str(tmp / "circulo.csv"),
                                   "--hole", str(tmp / "semilla.csv"), "--output", str(tmp / "nodos.csv")])
                nodos = pd.read_csv(tmp / "nodos.csv")
                self._assert(
                    codigo == 0 and set(nodos["kind"]) == {"interior", "outer", "dendrite"},
                    f"discretize: {len(nodos)} nodos con tipos interior/outer/dendrite",
                )

                (tmp / "malo.json").write_text(json.dumps({"N_t": 1, "color": "rojo"}), encoding="utf-8")
                codigo = cli.main(["simulate", "--config", str(tmp / "malo.json")])
                self._assert(codigo == 2, "simulate: clave desconocida -> codigo de salida 2")

                pd.DataFrame([(0.0, 0.0), (0.0, 0.0), (1.0, 1.0)], columns=["x", "y"]).to_csv(tmp / "dup.csv", index=False)
                codigo = cli.main(["order", "--input", str(tmp / "dup.csv"), "--output", str(tmp / "x.csv")])
                self._assert(codigo == 1, "order: duplicados -> codigo de salida 1")

                (tmp / "corta.json").write_text(
                    json.dumps({"N_t": 2, "snapshot_every": 1, "output_dir": str(tmp / "corrida")}), encoding="utf-8"
                )
                codigo = cli.main(["simulate", "--config", str(tmp / "corta.json"), "--report"])
                self._assert(codigo == 0, "simulate --report: corrida corta exitosa")
                self._assert(len(list((tmp / "corrida").glob("*.pdf"))) == 1, "simulate --report: PDF generado")
                self._assert(len(list((tmp / "corrida").glob("*.xlsx"))) == 1, "simulate --report: Excel generado")
        except Exception:
            _fail("Error en el CLI", traceback.format_exc())
            self.failed += 1

    def run(self) -> tuple[int, int]:
        _header("NIVEL 3 - Corrida completa end-to-end")
        self.test_corrida_dendrita()
        self.test_cli()
        return self.passed, self.failed


# ======================================================================
# RUNNER PRINCIPAL
# ======================================================================

def _resumen_final(total_pass: int, total_fail: int) -> None:
    """Imprime el resumen final."""
    total = total_pass + total_fail
    _header("RESUMEN FINAL")

    if total_fail == 0:
        print(f"\n  [EXITO] TODAS LAS PRUEBAS PASARON")
        print(f"  {total_pass}/{total} pruebas exitosas\n")
    else:
        pct = (total_pass / total * 100) if total > 0 else 0
        print(f"\n  Resultados: {total_pass} PASS | {total_fail} FAIL de {total} pruebas ({pct:.0f}%)")
        print(f"\n  [WARN] Revisa los errores marcados para diagnosticar.")
        print()


def main() -> int:
    parser = argparse.ArgumentParser(
        description="Suite de pruebas de reconstruccion de fronteras y crecimiento dendritico",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument(
        "--nivel", type=int, default=3, choices=[1, 2, 3],
        help="Nivel maximo de pruebas a ejecutar (1=unidad, 2=+propiedades, 3=+end-to-end). Default: 3",
    )
    parser.add_argument(
        "--verbose", action="store_true",
        help="Mostrar detalle completo de errores.",
    )
    args = parser.parse_args()

    print(f"\nDendrita RBF-FD - Suite de Pruebas")
    print(f"Iniciando: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")
    print(f"Raiz del proyecto: {ROOT}")
    print(f"Nivel maximo: {args.nivel}")

    total_pass = 0
    total_fail = 0

    t1 = TestNivel1(verbose=args.verbose)
    p, f = t1.run()
    total_pass += p
    total_fail += f

    if args.nivel >= 2:
        t2 = TestNivel2(verbose=args.verbose)
        p, f = t2.run()
        total_pass += p
        total_fail += f

    if args.nivel >= 3:
        t3 = TestNivel3(verbose=args.verbose)
        p, f = t3.run()
        total_pass += p
        total_fail += f

    _resumen_final(total_pass, total_fail)
    return 0 if total_fail == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
