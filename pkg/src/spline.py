"""Spline cubico periodico C2 a traves de los puntos ordenados.

Los nudos son la longitud de cuerda acumulada:
``s_0 = 0``, ``s_{j+1} = s_j + d(x'_j, x'_{j+1 mod k})``, de modo que la
curva cierra en ``s_k`` con ``gamma(s_k) = x'_0``. El sistema periodico
lo resuelve ``scipy.interpolate.CubicSpline`` con ``bc_type="periodic"``;
la evaluacion fuera de ``[s_0, s_k]`` envuelve modulo el periodo.

Uso:
    from src.spline import fit_periodic_cubic
    spline = fit_periodic_cubic(ordered)
    spline.eval(0.3), spline.eval_derivative(0.3, 2), spline.arc_length(0, 1)
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline, PPoly

from config.settings import ESPLINE
from src.errores import IoFailure, SingularSystem, TooFewPoints
from src.geometria import polyline_signed_area
from src.ordenamiento import OrderedBoundary

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PeriodicSpline:
    """Curva cerrada cubica a trozos.

    Attributes:
        knots: Nudos ``s_0 < ... < s_k`` (k + 1 valores).
        control_points: Puntos interpolados ``x'_i`` en orden de recorrido (k, 2).
        pp: Polinomio a trozos de ``scipy`` con extrapolacion periodica.
    """

    knots: np.ndarray
    control_points: np.ndarray
    pp: PPoly

    @property
    def period(self) -> float:
        return float(self.knots[-1] - self.knots[0])

    def envolver(self, t: Any) -> np.ndarray:
        """Lleva ``t`` al intervalo ``[s_0, s_k)``."""
        s0 = self.knots[0]
        return s0 + np.mod(np.asarray(t, dtype=float) - s0, self.period)

    def eval(self, t: Any) -> np.ndarray:
        """Punto(s) de la curva en ``t``; forma (2,) para escalar o (m, 2)."""
        return np.asarray(self.pp(self.envolver(t)))

    def eval_derivative(self, t: Any, order: int) -> np.ndarray:
        """Derivada exacta de orden 1 o 2 en ``t`` (envuelto)."""
        if order not in (1, 2):
            raise ValueError(f"Orden de derivada no soportado: {order}")
        return np.asarray(self.pp(self.envolver(t), nu=order))

    def rapidez(self, t: Any) -> np.ndarray:
        """Norma de la primera derivada."""
        return np.linalg.norm(self.eval_derivative(t, 1), axis=-1)

    def arc_length(self, t0: float, t1: float, epsrel: float | None = None) -> float:
        """Longitud de arco entre ``t0`` y ``t1`` por cuadratura adaptativa.

        La integral se parte en cada nudo que cae dentro del intervalo
        para que ``quad`` solo vea tramos polinomiales suaves.
        """
        epsrel = ESPLINE["epsrel_longitud"] if epsrel is None else epsrel
        if t1 < t0 or t1 > t0 + self.period * (1.0 + 1e-12):
            raise ValueError("Se requiere t0 <= t1 <= t0 + periodo.")
        if t1 == t0:
            return 0.0

        periodo = self.period
        desplazamientos = np.arange(np.floor((t0 - self.knots[0]) / periodo), np.ceil((t1 - self.knots[0]) / periodo) + 1)
        cortes = (self.knots[:-1][None, :] + periodo * desplazamientos[:, None]).ravel()
        cortes = cortes[(cortes > t0) & (cortes < t1)]
        limites = np.concatenate(([t0], np.sort(cortes), [t1]))

        total = 0.0
        for a, b in zip(limites[:-1], limites[1:]):
            valor, _ = quad(lambda t: float(self.rapidez(t)), a, b, epsabs=1e-14, epsrel=epsrel, limit=100)
            total += valor
        return total

    # ------------------------------------------------------------------
    # SERIALIZACION
    # ------------------------------------------------------------------
    def to_dict(self) -> dict[str, Any]:
        """Coeficientes ``[a, b, c, d]`` de ``a + b u + c u^2 + d u^3`` con ``u = t - s_j``."""
        c = self.pp.c[::-1]
        return {
            "knots": self.knots.tolist(),
            "coeffs_x": c[:, :, 0].T.tolist(),
            "coeffs_y": c[:, :, 1].T.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> PeriodicSpline:
        knots = np.asarray(data["knots"], dtype=float)
        cx = np.asarray(data["coeffs_x"], dtype=float).T[::-1]
        cy = np.asarray(data["coeffs_y"], dtype=float).T[::-1]
        pp = PPoly(np.stack([cx, cy], axis=-1), knots, extrapolate="periodic")
        return cls(knots=knots, control_points=np.stack([cx[-1], cy[-1]], axis=1), pp=pp)

    def guardar_json(self, path: Path) -> Path:
        try:
            Path(path).write_text(json.dumps(self.to_dict(), indent=2), encoding="utf-8")
        except OSError as exc:
            raise IoFailure(f"No se pudo escribir {path}: {exc}") from exc
        return Path(path)


def fit_periodic_cubic(ordered: OrderedBoundary) -> PeriodicSpline:
    """Ajusta el spline periodico con nudos por longitud de cuerda.

    Args:
        ordered: Frontera ordenada con k >= 3 puntos.

    Returns:
        PeriodicSpline que interpola los puntos en el orden de ``sigma``.

    Raises:
        TooFewPoints: Con menos de 3 puntos.
        SingularSystem: Si alguna cuerda es menor que ``ESPLINE["cuerda_minima"]``
            o si los puntos son colineales.
    """
    pts = ordered.ordenados
    k = len(pts)
    if k < 3:
        raise TooFewPoints(f"Se requieren al menos 3 puntos, se recibieron {k}.")

    cerrado = np.vstack([pts, pts[:1]])
    cuerdas = np.linalg.norm(np.diff(cerrado, axis=0), axis=1)
    if cuerdas.min() < ESPLINE["cuerda_minima"]:
        j = int(np.argmin(cuerdas))
        raise SingularSystem(f"Cuerda degenerada entre las posiciones {j} y {(j + 1) % k}.", segmento=j)

    diametro = float(np.linalg.norm(np.ptp(pts, axis=0)))
    if abs(polyline_signed_area(pts)) < ESPLINE["area_relativa_minima"] * diametro**2:
        raise SingularSystem("Puntos colineales: el lazo no encierra area.")

    knots = np.concatenate(([0.0], np.cumsum(cuerdas)))
    try:
        pp = CubicSpline(knots, cerrado, bc_type="periodic")
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise SingularSystem(f"No se pudo resolver el sistema periodico: {exc}") from exc

    logger.debug("Spline periodico ajustado: %d tramos, periodo %.6g", k, knots[-1])
    return PeriodicSpline(knots=knots, control_points=pts.copy(), pp=pp)
