"""
Escritura de artefactos de una ejecución. Los CSV son el contrato: con la misma configuración y
semillas se obtienen bytes idénticos (la marca de tiempo solo aparece en el registro global).
Los `.npz` llevan fechas del zip; se comparan por contenido tras `ParameterVector.load`.
"""

import csv
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np
from more_itertools import bucket

from src.cli.schemas import RunReport
from src.services.implementations.file_reference_service import write_grid_file

LEDGER_FIELDS = ("problem", "constants", "nt", "mode", "relative_l2", "seconds", "seed", "fingerprint", "timestamp")
LOSS_FIELDS = ("iteration", "phase", "train_loss", "eval_loss")
SNAPSHOT_FRACTIONS = (0.0, 0.25, 0.5, 0.75, 1.0)

logger = logging.getLogger("hcsp")


def ledger_row(report: RunReport) -> dict:
    config = report.config
    return {
        "problem": config.problem,
        "constants": config.constants_label,
        "nt": config.nt,
        "mode": config.mode,
        "relative_l2": "" if report.relative_l2 is None else f"{report.relative_l2:.6e}",
        "seconds": f"{report.wall_time_seconds:.3f}",
        "seed": config.seed,
        "fingerprint": config.fingerprint(),
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def append_ledger(path: Path, report: RunReport) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    new_file = not path.exists()
    with path.open("a", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=LEDGER_FIELDS)
        if new_file:
            writer.writeheader()
        writer.writerow(ledger_row(report))
    return path


def read_ledger(path: Path) -> list[dict]:
    with Path(path).open(newline="", encoding="utf-8") as handle:
        return list(csv.DictReader(handle))


def write_loss_histories(output_dir: Path, report: RunReport) -> list[Path]:
    by_window = bucket(report.telemetry, key=lambda record: record.window)
    paths = []
    for outcome in report.outcomes:
        path = output_dir / f"loss_window_{outcome.window}.csv"
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(LOSS_FIELDS)
            for record in by_window[outcome.window]:
                eval_loss = "" if record.eval_loss is None else f"{record.eval_loss:.17g}"
                writer.writerow([record.iteration, record.phase, f"{record.train_loss:.17g}", eval_loss])
        paths.append(path)
    return paths


def write_phase_space(path: Path, grid_t: np.ndarray, states: np.ndarray) -> Path:
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(("t", "x", "x_t", "x_tt"))
        for t, row in zip(grid_t, states):
            writer.writerow([f"{value:.17g}" for value in (t, *row)])
    return Path(path)


def render_images(output_dir: Path, report: RunReport) -> list[Path]:
    """Contornos x-t, cortes temporales y, para la EDO, la curva en el espacio de fases."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    paths = []
    name = report.config.label
    if report.grid_x is not None:
        panels = [("solución", report.predictions)]
        if report.reference is not None:
            panels.append(("error absoluto", np.abs(report.predictions - report.reference)))
        fig, axes = plt.subplots(1, len(panels), figsize=(6 * len(panels), 4), squeeze=False)
        for ax, (title, values) in zip(axes[0], panels):
            contour = ax.contourf(report.grid_t, report.grid_x, values.T, levels=64, cmap="viridis")
            fig.colorbar(contour, ax=ax)
            ax.set_xlabel("t")
            ax.set_ylabel("x")
            ax.set_title(f"{name}: {title}")
        fig.tight_layout()
        paths.append(output_dir / "contours.png")
        fig.savefig(paths[-1], dpi=120)
        plt.close(fig)

        horizon = report.grid_t[-1]
        fig, axes = plt.subplots(1, len(SNAPSHOT_FRACTIONS), figsize=(4 * len(SNAPSHOT_FRACTIONS), 3.5))
        for ax, fraction in zip(axes, SNAPSHOT_FRACTIONS):
            row = int(np.argmin(np.abs(report.grid_t - fraction * horizon)))
            ax.plot(report.grid_x, report.predictions[row], "r--", label="predicción")
            if report.reference is not None:
                ax.plot(report.grid_x, report.reference[row], "b-", alpha=0.6, label="referencia")
            ax.set_title(f"t = {report.grid_t[row]:.3g}")
        axes[0].legend()
        fig.tight_layout()
        paths.append(output_dir / "snapshots.png")
        fig.savefig(paths[-1], dpi=120)
        plt.close(fig)
    else:
        fig, ax = plt.subplots(figsize=(8, 3.5))
        ax.plot(report.grid_t, report.predictions[:, 0], "r--", label="predicción")
        if report.reference is not None:
            ax.plot(report.grid_t, report.reference[:, 0], "b-", alpha=0.6, label="referencia")
        ax.set_xlabel("t")
        ax.legend()
        fig.tight_layout()
        paths.append(output_dir / "trajectory.png")
        fig.savefig(paths[-1], dpi=120)
        plt.close(fig)

    if report.phase_space is not None:
        fig = plt.figure(figsize=(6, 5))
        ax = fig.add_subplot(projection="3d")
        ax.plot(*report.phase_space.T, lw=0.8)
        ax.set_xlabel("x")
        ax.set_ylabel("x_t")
        ax.set_zlabel("x_tt")
        paths.append(output_dir / "phase_space.png")
        fig.savefig(paths[-1], dpi=120)
        plt.close(fig)
    return paths


def emit_artifacts(
    report: RunReport,
    output_dir: Path,
    ledger_path: Optional[Path] = None,
    images: bool = False,
) -> list[Path]:
    """
    Escribe en `output_dir`:
      - solution.csv y error.csv (formato de malla; error solo si hay referencia)
      - loss_window_<N>.csv por cada ventana entrenada
      - phase_space.csv para la EDO
      - window_<N>.npz con los parámetros de cada ventana
      - imágenes opcionales
    y añade una línea al registro `ledger_path`.
    """
    output_dir = Path(output_dir)
    try:
        output_dir.mkdir(parents=True, exist_ok=True)
        config = report.config
        written = [write_grid_file(
            output_dir / "solution.csv", config.problem, report.grid_x, report.grid_t, report.predictions, "prediction"
        )]
        if report.reference is not None:
            written.append(write_grid_file(
                output_dir / "error.csv", config.problem, report.grid_x, report.grid_t,
                np.abs(report.predictions - report.reference), "abs-error",
            ))
        written.extend(write_loss_histories(output_dir, report))
        if report.phase_space is not None:
            written.append(write_phase_space(output_dir / "phase_space.csv", report.grid_t, report.phase_space))
        for index, params in enumerate(report.window_params, start=1):
            written.append(params.save(output_dir / f"window_{index}.npz", seed=config.seed))
        if images:
            written.extend(render_images(output_dir, report))
        if ledger_path is not None:
            append_ledger(ledger_path, report)
        logger.info(f"[Benchmark] {len(written)} artefactos escritos en {output_dir}")
        return written
    except OSError as e:
        logger.error(f"[Benchmark] No se pudieron escribir los artefactos en {output_dir}: {e}", exc_info=True)
        raise
