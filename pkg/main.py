"""CLI de reconstruccion de fronteras y simulacion dendritica.

Orquesta el ordenamiento de puntos de frontera, las consultas de
pertenencia, la discretizacion de regiones, el banco de prueba de
Poisson y la simulacion de crecimiento con sus reportes.

Subcomandos:
    order       CSV x,y -> CSV con columna ``order`` + reporte de densidad JSON
    contain     frontera CSV + consultas CSV -> CSV x,y,inside
    discretize  frontera CSV (y hueco opcional) -> nodos CSV x,y,kind
    poisson     banco de prueba en el disco unitario
    simulate    corrida de la dendrita (``--config``, ``--report``)
    report      PDF + Excel de una corrida ya escrita

Uso:
    python main.py order --input puntos.csv --output ordenados.csv
    python main.py contain --boundary frontera.csv --queries consultas.csv --output inside.csv
    python main.py discretize --boundary circulo.csv --hole semilla.csv --output nodos.csv
    python main.py poisson --n 900 --solucion seno
    python main.py simulate --config corrida.json --report
    python main.py report --run-dir output/dendrita
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from datetime import datetime
from pathlib import Path
from typing import Any

import pandas as pd

sys.path.insert(0, str(Path(__file__).resolve().parent))

from config.settings import ESPACIADO, LOG_LEVEL, NOMBRES_SALIDA, OUTPUT_DIR, POISSON, SEMILLA
from src.discretizacion import SpacingProfile, discretizar_region
from src.dominio import build_domain
from src.errores import ConfigError, IoFailure, ReconstruccionError
from src.geometria import escribir_csv, leer_puntos_csv
from src.ordenamiento import order_points, validate_density
from src.rbffd import poisson_disco
from src.reporte_excel import exportar_excel
from src.reporte_pdf import generar_reporte_pdf
from src.simulacion import SimConfig, SimuladorDendrita

# ======================================================================
# LOGGING
# ======================================================================

logging.basicConfig(
    level=getattr(logging, LOG_LEVEL),
    format="%(asctime)s | %(levelname)-8s | %(name)s | %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S",
)
logger = logging.getLogger("main")


def _paso(titulo: str) -> None:
    logger.info("=" * 60)
    logger.info(titulo)
    logger.info("=" * 60)


def _escribir_json(datos: dict[str, Any], path: Path) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(datos, indent=2), encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"No se pudo escribir {path}: {exc}") from exc
    return path


# ======================================================================
# SUBCOMANDOS
# ======================================================================

def cmd_order(args: argparse.Namespace) -> int:
    _paso("PASO 1: Ordenamiento de puntos de frontera")
    puntos = leer_puntos_csv(args.input)
    ordered = order_points(puntos, max_rank=args.max_rank)

    df = pd.DataFrame({"x": puntos[:, 0], "y": puntos[:, 1], "order": ordered.sigma_inv})
    escribir_csv(df, args.output)
    logger.info("Orden escrito en %s", args.output)

    _paso("PASO 2: Diagnostico de densidad")
    reporte = validate_density(ordered)
    densidad_path = args.density or args.output.parent / NOMBRES_SALIDA["densidad"]
    _escribir_json(reporte.to_dict(), densidad_path)
    logger.info(
        "Violaciones: %d, auto-interseccion: %s -> %s",
        len(reporte.condition3_violations), reporte.ordered_polyline_self_intersects, densidad_path,
    )

    if args.spline is not None:
        from src.spline import fit_periodic_cubic

        fit_periodic_cubic(ordered).guardar_json(args.spline)
        logger.info("Coeficientes del spline escritos en %s", args.spline)
    return 0


def cmd_contain(args: argparse.Namespace) -> int:
    _paso("PASO 1: Reconstruccion del dominio")
    dominio = build_domain(leer_puntos_csv(args.boundary))
    logger.info("Dominio reconstruido: c=%d, sonda=%s", dominio.orientation_c, dominio.interior_probe.round(6).tolist())

    _paso("PASO 2: Consultas de pertenencia")
    consultas = leer_puntos_csv(args.queries)
    dentro = dominio.contiene(consultas)
    df = pd.DataFrame({"x": consultas[:, 0], "y": consultas[:, 1], "inside": dentro.astype(int)})
    escribir_csv(df, args.output)
    logger.info("%d de %d puntos dentro -> %s", int(dentro.sum()), len(consultas), args.output)
    return 0


def cmd_discretize(args: argparse.Namespace) -> int:
    _paso("PASO 1: Reconstruccion de fronteras")
    dominio = build_domain(leer_puntos_csv(args.boundary))
    hueco = build_domain(leer_puntos_csv(args.hole)) if args.hole is not None else None

    h_max = args.h if args.h is not None else args.h_max
    if hueco is None or args.h is not None:
        perfil = SpacingProfile.constante(h_max)
    else:
        perfil = SpacingProfile(
            h_min=args.h_min,
            h_max=h_max,
            focus_points=hueco.ordered.points,
            transition_radius=args.transition_radius,
        )

    _paso("PASO 2: Discretizacion de la region")
    disc = discretizar_region(dominio, perfil, hueco=hueco, seed=args.seed)
    bloques = [(f.points, f.tag) for f in disc.boundary] + [(disc.interior_nodes, "interior")]
    df = pd.concat(
        [pd.DataFrame({"x": p[:, 0], "y": p[:, 1], "kind": tag}) for p, tag in bloques],
        ignore_index=True,
    )
    escribir_csv(df, args.output)
    logger.info("%d nodos (%d interiores) -> %s", len(df), len(disc.interior_nodes), args.output)
    return 0


def cmd_poisson(args: argparse.Namespace) -> int:
    _paso("PASO 1: Banco de prueba de Poisson en el disco unitario")
    resultado = poisson_disco(n_objetivo=args.n, solucion=args.solucion, seed=args.seed)
    print(f"N={resultado.n_nodos}")
    print(f"error_max={resultado.error_max:.6e}")
    print(f"residuo={resultado.residuo:.6e}")
    print(f"tiempo_s={resultado.tiempo_s:.3f}")
    return 0


def _snapshots_de(run_dir: Path) -> list[Path]:
    return sorted(run_dir.glob("step_*.csv"))


def generar_reportes(run_dir: Path, resumen: dict[str, Any] | None = None) -> list[Path]:
    """PDF y Excel de una corrida; lee ``run_summary.json`` si no se pasa el resumen."""
    run_dir = Path(run_dir)
    if resumen is None:
        resumen_path = run_dir / NOMBRES_SALIDA["resumen"]
        try:
            resumen = json.loads(resumen_path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise IoFailure(f"No se pudo leer {resumen_path}: {exc}") from exc
    snapshots = _snapshots_de(run_dir)
    timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    ts_legible = datetime.now().strftime("%Y-%m-%d %H:%M")

    pdf_path = run_dir / f"{NOMBRES_SALIDA['pdf']}_{timestamp}.pdf"
    archivos = [generar_reporte_pdf(resumen, snapshots, pdf_path, ts_legible)]
    archivos.append(exportar_excel(resumen, snapshots, run_dir, timestamp))
    return archivos


def cmd_simulate(args: argparse.Namespace) -> int:
    _paso("PASO 1: Configuracion")
    config = SimConfig.from_json(args.config) if args.config is not None else SimConfig()
    if args.output_dir is not None:
        config.output_dir = str(args.output_dir)
    logger.info(
        "R_m=%.3g R_d=%.3g v_d=%.3g dt=%.3g N_t=%d -> %s",
        config.R_m, config.R_d, config.v_d, config.dt, config.N_t, config.output_dir,
    )

    _paso("PASO 2: Simulacion de crecimiento")
    resultado = SimuladorDendrita(config).run()

    if args.report:
        _paso("PASO 3: Reportes PDF y Excel")
        generar_reportes(Path(config.output_dir), resultado.resumen)

    logger.info("=" * 60)
    logger.info("SIMULACION COMPLETADA EXITOSAMENTE")
    logger.info("  %d snapshots, resumen en %s", len(resultado.snapshots), resultado.resumen_path)
    logger.info("=" * 60)
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    _paso("PASO 1: Reportes PDF y Excel")
    for archivo in generar_reportes(args.run_dir):
        logger.info("  %s", archivo.name)
    return 0


# ======================================================================
# ARGUMENTOS
# ======================================================================

def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(description="Reconstruccion de fronteras y crecimiento dendritico RBF-FD")
    parser.add_argument("--verbose", action="store_true", help="Nivel de log DEBUG.")
    sub = parser.add_subparsers(dest="comando", required=True)

    p = sub.add_parser("order", help="Ordena puntos de frontera desordenados.")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--output", type=Path, required=True)
    p.add_argument("--density", type=Path, default=None, help="Ruta del reporte de densidad JSON.")
    p.add_argument("--spline", type=Path, default=None, help="Escribe tambien los coeficientes del spline.")
    p.add_argument("--max-rank", type=int, default=None)
    p.set_defaults(func=cmd_order)

    p = sub.add_parser("contain", help="Pertenencia de puntos al dominio reconstruido.")
    p.add_argument("--boundary", type=Path, required=True)
    p.add_argument("--queries", type=Path, required=True)
    p.add_argument("--output", type=Path, required=True)
    p.set_defaults(func=cmd_contain)

    p = sub.add_parser("discretize", help="Nodos dispersos de una region.")
    p.add_argument("--boundary", type=Path, required=True)
    p.add_argument("--hole", type=Path, default=None, help="Frontera interior (dendrita).")
    p.add_argument("--output", type=Path, required=True)
    p.add_argument("--h", type=float, default=None, help="Espaciado constante.")
    p.add_argument("--h-min", type=float, default=float(ESPACIADO["h_min"]))
    p.add_argument("--h-max", type=float, default=float(ESPACIADO["h_max"]))
    p.add_argument("--transition-radius", type=float, default=float(ESPACIADO["transition_radius"]))
    p.add_argument("--seed", type=int, default=SEMILLA)
    p.set_defaults(func=cmd_discretize)

    p = sub.add_parser("poisson", help="Banco de prueba de Poisson en el disco unitario.")
    p.add_argument("--n", type=int, default=int(POISSON["n_objetivo"]))
    p.add_argument("--solucion", choices=["cuadratica", "seno"], default=str(POISSON["solucion"]))
    p.add_argument("--seed", type=int, default=SEMILLA)
    p.set_defaults(func=cmd_poisson)

    p = sub.add_parser("simulate", help="Simulacion de crecimiento dendritico.")
    p.add_argument("--config", type=Path, default=None)
    p.add_argument("--output-dir", type=Path, default=None)
    p.add_argument("--report", action="store_true", help="Genera PDF y Excel al terminar.")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", help="PDF y Excel de una corrida existente.")
    p.add_argument("--run-dir", type=Path, default=OUTPUT_DIR / "dendrita")
    p.set_defaults(func=cmd_report)

    return parser.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    args = parse_args(argv)
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    try:
        return args.func(args)
    except ConfigError as exc:
        logger.error("%s: %s", exc.codigo, exc)
        return 2
    except ReconstruccionError as exc:
        logger.error("%s: %s", exc.codigo, exc)
        return 1
    except Exception as exc:
        logger.error("Error inesperado en '%s': %s", args.comando, exc)
        raise


if __name__ == "__main__":
    sys.exit(main())
