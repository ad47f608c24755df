"""Simulacion de crecimiento dendritico con frontera movil.

Cada paso ejecuta, en este orden:

    1. Temperatura: ``heat_step`` con los pesos del paso anterior.
    2. Avance de los nodos de la dendrita segun la ley de velocidad
       ``v = v_d (1/20 + cos^2(2 phi)) n``.
    3. Reconstruccion: ordenamiento, spline periodico y orientacion.
    4. Rediscretizacion: remuestreo de la dendrita y relleno interior
       con la dendrita como foco del espaciado.
    5. Transferencia IDW de la temperatura y reimposicion de fronteras.
    6. Diagnosticos: auto-interseccion y colision con el circulo exterior.
    7. Pesos RBF-FD para el siguiente paso y snapshot segun la cadencia.

El circulo exterior es estatico: se discretiza una sola vez al inicio.

Uso:
    from src.simulacion import SimConfig, run_simulation
    paths = run_simulation(SimConfig.from_json("config.json"))
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
from scipy.spatial import cKDTree

from config.settings import ESPACIADO, IDW, NOMBRES_SALIDA, OUTPUT_DIR, RBFFD, SEMILLA, SIMULACION
from src.discretizacion import BoundaryNodes, SpacingProfile, fill_interior, resample_boundary
from src.dominio import ReconstructedDomain, build_domain
from src.errores import BoundaryCollision, ConfigError, IoFailure, SelfIntersection
from src.geometria import escribir_csv, polyline_self_intersects, polyline_signed_area
from src.rbffd import ScatteredField, StencilSet, construir_pesos, heat_step, idw_transfer, pasos_estables

logger = logging.getLogger(__name__)

_TEMPERATURAS_INICIALES: set[str] = {"estacionaria", "uniforme"}


# ======================================================================
# CONFIGURACION
# ======================================================================

@dataclass
class SpacingConfig:
    h_min: float = float(ESPACIADO["h_min"])
    h_max: float = float(ESPACIADO["h_max"])
    transition_radius: float = float(ESPACIADO["transition_radius"])


@dataclass
class IdwConfig:
    k_sources: int = int(IDW["k_sources"])
    power: float = float(IDW["power"])


@dataclass
class RbffdConfig:
    stencil_size: int = int(RBFFD["stencil_size"])
    factor_estabilidad: float = float(RBFFD["factor_estabilidad"])


def _construir(clase: type, datos: dict[str, Any], ruta: str) -> Any:
    """Instancia un dataclass rechazando claves desconocidas."""
    if not isinstance(datos, dict):
        raise ConfigError(f"'{ruta}' debe ser un objeto JSON.")
    validas = {f.name for f in fields(clase)}
    desconocidas = sorted(set(datos) - validas)
    if desconocidas:
        raise ConfigError(f"Claves desconocidas en '{ruta}': {desconocidas}", claves=desconocidas)
    return clase(**datos)


@dataclass
class SimConfig:
    """Parametros del experimento de la dendrita.

    Los nombres de campo coinciden exactamente con las claves del JSON
    de ``simulate --config``. Todos son opcionales.
    """

    R_m: float = float(SIMULACION["R_m"])
    R_d: float = float(SIMULACION["R_d"])
    v_d: float = float(SIMULACION["v_d"])
    dt: float = float(SIMULACION["dt"])
    N_t: int = int(SIMULACION["N_t"])
    spacing: SpacingConfig = field(default_factory=SpacingConfig)
    idw: IdwConfig = field(default_factory=IdwConfig)
    rbffd: RbffdConfig = field(default_factory=RbffdConfig)
    seed: int = SEMILLA
    snapshot_every: int = int(SIMULACION["snapshot_every"])
    snapshot_initial: bool = bool(SIMULACION["snapshot_initial"])
    output_dir: str = str(OUTPUT_DIR / "dendrita")
    symmetric_initial_nodes: bool = bool(SIMULACION["symmetric_initial_nodes"])
    initial_temperature: str = str(SIMULACION["initial_temperature"])

    def __post_init__(self) -> None:
        if not 0 < self.R_d < self.R_m:
            raise ConfigError(f"Se requiere 0 < R_d < R_m (R_d={self.R_d}, R_m={self.R_m}).")
        if self.dt <= 0:
            raise ConfigError(f"dt debe ser positivo (dt={self.dt}).")
        if int(self.N_t) < 1:
            raise ConfigError(f"N_t debe ser >= 1 (N_t={self.N_t}).")
        if int(self.snapshot_every) < 1:
            raise ConfigError("snapshot_every debe ser >= 1.")
        if self.initial_temperature not in _TEMPERATURAS_INICIALES:
            raise ConfigError(
                f"initial_temperature debe ser una de {sorted(_TEMPERATURAS_INICIALES)}."
            )
        if not 0 < self.spacing.h_min <= self.spacing.h_max or self.spacing.transition_radius <= 0:
            raise ConfigError("Perfil de espaciado invalido: se requiere 0 < h_min <= h_max y transition_radius > 0.")
        if self.rbffd.stencil_size < 6:
            raise ConfigError("stencil_size debe ser >= 6.")
        if self.idw.k_sources < 1:
            raise ConfigError("k_sources debe ser >= 1.")

    @classmethod
    def from_dict(cls, datos: dict[str, Any]) -> SimConfig:
        datos = dict(datos)
        anidados = {"spacing": SpacingConfig, "idw": IdwConfig, "rbffd": RbffdConfig}
        validas = {f.name for f in fields(cls)}
        desconocidas = sorted(set(datos) - validas)
        if desconocidas:
            raise ConfigError(f"Claves desconocidas en la configuracion: {desconocidas}", claves=desconocidas)
        for clave, clase in anidados.items():
            if clave in datos:
                datos[clave] = _construir(clase, datos[clave], clave)
        try:
            return cls(**datos)
        except TypeError as exc:
            raise ConfigError(f"Configuracion invalida: {exc}") from exc

    @classmethod
    def from_json(cls, path: Path) -> SimConfig:
        try:
            datos = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise IoFailure(f"No se pudo leer {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"JSON invalido en {path}: {exc}") from exc
        return cls.from_dict(datos)

    def perfil(self, foco: np.ndarray) -> SpacingProfile:
        return SpacingProfile(
            h_min=self.spacing.h_min,
            h_max=self.spacing.h_max,
            focus_points=foco,
            transition_radius=self.spacing.transition_radius,
        )


@dataclass
class SimState:
    """Estado de la simulacion al final de un paso.

    El campo ordena los nodos como: dendrita (orden de curva), circulo
    exterior (orden de curva) e interiores (orden de generacion).
    """

    step: int
    time: float
    field: ScatteredField
    dendrite_domain: ReconstructedDomain
    outer_domain: ReconstructedDomain
    dendrite_nodes: BoundaryNodes
    outer_nodes: BoundaryNodes
    weights: StencilSet | None = None


@dataclass
class ResultadoSimulacion:
    """Archivos escritos y resumen por paso de una corrida."""

    snapshots: list[Path] = field(default_factory=list)
    resumen: dict[str, Any] = field(default_factory=dict)
    resumen_path: Path | None = None


# ======================================================================
# LEY DE VELOCIDAD
# ======================================================================

def boundary_velocity(x: Any, normal: Any, v_d: float) -> np.ndarray:
    """Velocidad ``v_d (1/20 + cos^2(2 phi)) n`` con ``phi`` el angulo polar.

    Acepta un punto (2,) o un lote (m, 2).
    """
    x = np.asarray(x, dtype=float)
    normal = np.asarray(normal, dtype=float)
    norma = np.linalg.norm(normal, axis=-1)
    if np.any(np.abs(norma - 1.0) > 1e-9):
        raise ValueError("La normal debe ser unitaria.")
    phi = np.arctan2(x[..., 1], x[..., 0])
    magnitud = v_d * (1.0 / 20.0 + np.cos(2.0 * phi) ** 2)
    return magnitud[..., None] * normal


def advance_boundary(points: Any, normals: Any, dt: float, v_d: float) -> np.ndarray:
    """Desplaza cada nodo ``dt * boundary_velocity``."""
    if dt <= 0:
        raise ValueError("dt debe ser positivo.")
    points = np.asarray(points, dtype=float)
    return points + dt * boundary_velocity(points, normals, v_d)


# ======================================================================
# DIAGNOSTICOS
# ======================================================================

def metrica_simetria(puntos: np.ndarray, muestras: int = 360) -> float:
    """max |r(phi) - r(phi + pi/2)| del perfil radial de la frontera."""
    phi = np.arctan2(puntos[:, 1], puntos[:, 0])
    r = np.linalg.norm(puntos, axis=1)
    orden = np.argsort(phi)
    phi, r = phi[orden], r[orden]
    rejilla = np.linspace(-np.pi, np.pi, muestras, endpoint=False)
    r1 = np.interp(rejilla, phi, r, period=2.0 * np.pi)
    r2 = np.interp(rejilla + np.pi / 2.0, phi, r, period=2.0 * np.pi)
    return float(np.max(np.abs(r1 - r2)))


def _radio_punta(puntos: np.ndarray) -> float:
    """Radio de la dendrita en la direccion phi = 0."""
    phi = np.arctan2(puntos[:, 1], puntos[:, 0])
    r = np.linalg.norm(puntos, axis=1)
    orden = np.argsort(phi)
    return float(np.interp(0.0, phi[orden], r[orden], period=2.0 * np.pi))


# ======================================================================
# SNAPSHOTS
# ======================================================================

def write_snapshot(state: SimState, path: Path) -> Path:
    """Escribe ``x,y,T,kind`` con 17 cifras significativas.

    Raises:
        IoFailure: Si el archivo no se puede escribir.
    """
    campo = state.field
    df = pd.DataFrame(
        {
            "x": campo.nodes[:, 0],
            "y": campo.nodes[:, 1],
            "T": campo.values,
            "kind": campo.kind,
        }
    )
    return escribir_csv(df, path)


def leer_snapshot(path: Path) -> pd.DataFrame:
    try:
        return pd.read_csv(path, float_precision="round_trip")
    except OSError as exc:
        raise IoFailure(f"No se pudo leer {path}: {exc}") from exc


# ======================================================================
# MOTOR DE SIMULACION
# ======================================================================

class SimuladorDendrita:
    """Motor del lazo de crecimiento.

    Args:
        config: Parametros de la corrida.
    """

    def __init__(self, config: SimConfig) -> None:
        self.config = config
        self.salida = Path(config.output_dir)
        self.substeps = pasos_estables(config.dt, config.spacing.h_min, config.rbffd.factor_estabilidad)

    # ------------------------------------------------------------------
    # INICIALIZACION
    # ------------------------------------------------------------------
    def _circulo(self, radio: float, n: int, simetrico: bool = True) -> np.ndarray:
        angulos = 2.0 * np.pi * np.arange(n) / n
        if not simetrico:
            rng = np.random.default_rng(self.config.seed)
            angulos = angulos + rng.uniform(-0.25, 0.25, size=n) * (2.0 * np.pi / n)
        return radio * np.column_stack([np.cos(angulos), np.sin(angulos)])

    def _ensamblar(
        self,
        dendrita: BoundaryNodes,
        exterior: BoundaryNodes,
        interiores: np.ndarray,
    ) -> tuple[np.ndarray, np.ndarray]:
        nodos = np.vstack([dendrita.points, exterior.points, interiores])
        kinds = np.array(
            ["dendrite"] * len(dendrita) + ["outer"] * len(exterior) + ["interior"] * len(interiores),
            dtype=object,
        )
        return nodos, kinds

    def _temperatura_inicial(self, nodos: np.ndarray, kinds: np.ndarray) -> np.ndarray:
        cfg = self.config
        if cfg.initial_temperature == "uniforme":
            T = np.ones(len(nodos))
        else:
            r = np.maximum(np.linalg.norm(nodos, axis=1), cfg.R_d)
            T = np.clip(np.log(r / cfg.R_d) / np.log(cfg.R_m / cfg.R_d), 0.0, 1.0)
        T[kinds == "outer"] = 1.0
        T[kinds == "dendrite"] = 0.0
        return T

    def _pesos(self, campo: ScatteredField) -> StencilSet:
        return construir_pesos(campo.nodes, campo.interior, self.config.rbffd.stencil_size)

    def estado_inicial(self) -> SimState:
        cfg = self.config
        n_ext = max(16, int(np.ceil(2.0 * np.pi * cfg.R_m / cfg.spacing.h_max)))
        dom_ext = build_domain(self._circulo(cfg.R_m, n_ext))

        n_den = max(8, int(round(2.0 * np.pi * cfg.R_d / cfg.spacing.h_min)))
        if cfg.symmetric_initial_nodes:
            n_den = 4 * max(2, int(round(n_den / 4)))
        semilla = self._circulo(cfg.R_d, n_den, cfg.symmetric_initial_nodes)
        dom_den = build_domain(semilla)

        perfil = cfg.perfil(semilla)
        exterior = resample_boundary(dom_ext, perfil, "outer")
        # los nodos semilla se usan tal cual para conservar la simetria inicial
        params = dom_den.spline.knots[:-1]
        normales, _ = dom_den.normales(params)
        dendrita = BoundaryNodes(
            points=dom_den.spline.control_points, normals=normales, params=params, tag="dendrite", domain=dom_den
        )
        interiores = fill_interior(dom_ext, exterior, dendrita, perfil, seed=cfg.seed)

        nodos, kinds = self._ensamblar(dendrita, exterior, interiores)
        campo = ScatteredField(nodos, kinds, self._temperatura_inicial(nodos, kinds))
        estado = SimState(
            step=0,
            time=0.0,
            field=campo,
            dendrite_domain=dom_den,
            outer_domain=dom_ext,
            dendrite_nodes=dendrita,
            outer_nodes=exterior,
        )
        estado.weights = self._pesos(campo)
        logger.info(
            "Estado inicial: %d nodos (%d dendrita, %d exterior, %d interiores).",
            len(campo), len(dendrita), len(exterior), len(interiores),
        )
        return estado

    # ------------------------------------------------------------------
    # PASO DE TIEMPO
    # ------------------------------------------------------------------
    def paso(self, estado: SimState) -> tuple[SimState, float]:
        """Ejecuta un paso completo; devuelve el nuevo estado y max |dT| interior."""
        cfg = self.config
        paso = estado.step + 1

        # 1. temperatura
        calentado = heat_step(estado.field, estado.weights, cfg.dt, substeps=self.substeps)
        interior = estado.field.interior
        residuo = float(np.max(np.abs(calentado.values[interior] - estado.field.values[interior]))) if len(interior) else 0.0

        # 2. avance de la frontera
        movidos = advance_boundary(estado.dendrite_nodes.points, estado.dendrite_nodes.normals, cfg.dt, cfg.v_d)

        # 3. reconstruccion
        dom_den = build_domain(movidos)

        # 4. rediscretizacion
        perfil = cfg.perfil(movidos)
        dendrita = resample_boundary(dom_den, perfil, "dendrite")
        interiores = fill_interior(estado.outer_domain, estado.outer_nodes, dendrita, perfil, seed=cfg.seed)

        # 5. transferencia y condiciones de frontera
        nodos, kinds = self._ensamblar(dendrita, estado.outer_nodes, interiores)
        T = idw_transfer(calentado, nodos, cfg.idw.k_sources, cfg.idw.power)
        T[kinds == "outer"] = 1.0
        T[kinds == "dendrite"] = 0.0
        campo = ScatteredField(nodos, kinds, T)

        # 6. diagnosticos
        if polyline_self_intersects(dendrita.points):
            raise SelfIntersection(f"La frontera de la dendrita se auto-interseca en el paso {paso}.", paso=paso)
        d_ext, _ = cKDTree(estado.outer_nodes.points).query(dendrita.points)
        if float(d_ext.min()) < cfg.spacing.h_max:
            raise BoundaryCollision(
                f"La dendrita llego a {d_ext.min():.4f} del circulo exterior en el paso {paso}.",
                paso=paso,
            )

        # 7. pesos del siguiente paso
        nuevo = SimState(
            step=paso,
            time=paso * cfg.dt,
            field=campo,
            dendrite_domain=dom_den,
            outer_domain=estado.outer_domain,
            dendrite_nodes=dendrita,
            outer_nodes=estado.outer_nodes,
        )
        nuevo.weights = self._pesos(campo)
        return nuevo, residuo

    # ------------------------------------------------------------------
    # CORRIDA COMPLETA
    # ------------------------------------------------------------------
    def _registro(self, estado: SimState, residuo: float | None) -> dict[str, Any]:
        puntos = estado.dendrite_nodes.points
        valores = estado.field.values
        return {
            "step": estado.step,
            "time": estado.time,
            "n_nodes": len(estado.field),
            "n_interior": int(len(estado.field.interior)),
            "n_dendrite": len(estado.dendrite_nodes),
            "n_outer": len(estado.outer_nodes),
            "area": abs(polyline_signed_area(puntos)),
            "symmetry": metrica_simetria(puntos),
            "tip_radius": _radio_punta(puntos),
            "T_min": float(valores.min()),
            "T_max": float(valores.max()),
            "residual": residuo,
        }

    def _snapshot(self, estado: SimState) -> Path:
        path = self.salida / NOMBRES_SALIDA["snapshot"].format(estado.step)
        return write_snapshot(estado, path)

    def run(self) -> ResultadoSimulacion:
        cfg = self.config
        inicio = time.perf_counter()
        try:
            self.salida.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise IoFailure(f"No se pudo crear {self.salida}: {exc}") from exc

        if self.substeps > 1:
            logger.warning(
                "dt=%.3g supera la guia de estabilidad %.3g*h_min^2; se usan %d subpasos de Euler.",
                cfg.dt, cfg.rbffd.factor_estabilidad, self.substeps,
            )

        resultado = ResultadoSimulacion()
        estado = self.estado_inicial()
        pasos = [self._registro(estado, None)]
        if cfg.snapshot_initial:
            resultado.snapshots.append(self._snapshot(estado))

        for _ in range(int(cfg.N_t)):
            estado, residuo = self.paso(estado)
            pasos.append(self._registro(estado, residuo))
            if estado.step % cfg.snapshot_every == 0 or estado.step == cfg.N_t:
                resultado.snapshots.append(self._snapshot(estado))
                logger.info(
                    "Paso %d/%d: %d nodos, area %.5f, simetria %.2e",
                    estado.step, cfg.N_t, len(estado.field), pasos[-1]["area"], pasos[-1]["symmetry"],
                )
            else:
                logger.debug("Paso %d: %d nodos, residuo %.3e", estado.step, len(estado.field), residuo)

        resultado.resumen = {
            "config": asdict(cfg),
            "substeps": self.substeps,
            "seed": cfg.seed,
            "wall_time_s": time.perf_counter() - inicio,
            "node_counts": [p["n_nodes"] for p in pasos],
            "area": [p["area"] for p in pasos],
            "symmetry_max": max(p["symmetry"] for p in pasos),
            "steps": pasos,
            "snapshots": [p.name for p in resultado.snapshots],
        }
        resultado.resumen_path = self.salida / NOMBRES_SALIDA["resumen"]
        try:
            resultado.resumen_path.write_text(json.dumps(resultado.resumen, indent=2), encoding="utf-8")
        except OSError as exc:
            raise IoFailure(f"No se pudo escribir {resultado.resumen_path}: {exc}") from exc

        logger.info(
            "Simulacion terminada: %d pasos, %d nodos finales, %.1f s.",
            cfg.N_t, pasos[-1]["n_nodes"], resultado.resumen["wall_time_s"],
        )
        return resultado


def run_simulation(config: SimConfig) -> list[Path]:
    """Ejecuta la corrida completa y devuelve las rutas de los snapshots."""
    return SimuladorDendrita(config).run().snapshots
