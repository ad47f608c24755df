"""Jerarquia de excepciones del proyecto.

Cada error nombrado por la biblioteca es una subclase de
``ReconstruccionError`` con un atributo de clase ``codigo`` que el CLI
reporta tal cual (por ejemplo ``OrderingStalled``). Los datos de
diagnostico (pares ofensores, paso, residuo) viajan como atributos.
"""

from __future__ import annotations

from typing import Any


class ReconstruccionError(Exception):
    """Error base de la biblioteca."""

    codigo: str = "ReconstruccionError"

    def __init__(self, mensaje: str, **detalles: Any) -> None:
        super().__init__(mensaje)
        self.detalles = detalles
        for clave, valor in detalles.items():
            setattr(self, clave, valor)


class EmptyInput(ReconstruccionError):
    codigo = "EmptyInput"


class DuplicatePoints(ReconstruccionError):
    """Dos puntos a distancia menor que la tolerancia de duplicados.

    Atributos: ``par`` con los dos indices ofensores.
    """

    codigo = "DuplicatePoints"


class TooFewPoints(ReconstruccionError):
    codigo = "TooFewPoints"


class RankOutOfRange(ReconstruccionError):
    codigo = "RankOutOfRange"


class OrderingStalled(ReconstruccionError):
    """El ordenamiento agoto los candidatos antes de colocar todos los puntos."""

    codigo = "OrderingStalled"


class SingularSystem(ReconstruccionError):
    codigo = "SingularSystem"


class AmbiguousOrientation(ReconstruccionError):
    codigo = "AmbiguousOrientation"


class CurveTooShort(ReconstruccionError):
    codigo = "CurveTooShort"


class RegionEmpty(ReconstruccionError):
    codigo = "RegionEmpty"


class NotEnoughNodes(ReconstruccionError):
    codigo = "NotEnoughNodes"


class SingularStencil(ReconstruccionError):
    """Matriz local mal condicionada. Atributos: ``condicion``, ``centro``."""

    codigo = "SingularStencil"


class SolverDiverged(ReconstruccionError):
    """El solver iterativo no alcanzo la tolerancia.

    Atributos: ``iteraciones`` y ``residuo``.
    """

    codigo = "SolverDiverged"


class BoundaryCollision(ReconstruccionError):
    codigo = "BoundaryCollision"


class SelfIntersection(ReconstruccionError):
    """La frontera de la dendrita dejo de ser simple. Atributo: ``paso``."""

    codigo = "SelfIntersection"


class IoFailure(ReconstruccionError):
    codigo = "IoFailure"


class ConfigError(ReconstruccionError):
    codigo = "ConfigError"


class InvalidPoints(ReconstruccionError):
    """Coordenadas no finitas o arreglo con forma distinta de (k, 2)."""

    codigo = "InvalidPoints"
