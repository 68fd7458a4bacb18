"""
Utility functions for persisting and loading experiment artifacts.
"""

import csv
import glob
import json
import logging
import os
from typing import Dict, List, Optional, Sequence

from app.error_lab.ErrorEstimator_class import REPORT_COLUMNS, ErrorReport
from app.error_lab.rates import RateFit
from app.experiments.experiment_config import LoadedConfig

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

LAB_VERSION = "0.1.0"
UNAVAILABLE = "Unavailable"
REPORT_SUFFIX = "_report.csv"
SUMMARY_SUFFIX = "_summary.json"


def format_value(value) -> str:
    """17 significant digits for floats, 'Unavailable' for None."""
    if value is None:
        return UNAVAILABLE
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def parse_value(text: str):
    if text == UNAVAILABLE:
        return None
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            continue
    return text


def _ensure_parent(path: str) -> None:
    directory = os.path.dirname(path)
    if directory and not os.path.exists(directory):
        os.makedirs(directory, exist_ok=True)
        logger.info(f"Created output directory: {directory}")


def write_report_csv(report: ErrorReport, output_path: str) -> None:
    """
    Save one report row per level.

    Raises:
        IOError: If there's an error writing the file
    """
    try:
        _ensure_parent(output_path)
        with open(output_path, "w", encoding="utf-8", newline="") as file:
            writer = csv.writer(file, lineterminator="\n")
            writer.writerow(REPORT_COLUMNS)
            for row in report.as_rows():
                writer.writerow([format_value(row[column]) for column in REPORT_COLUMNS])
        logger.info(f"Saved report to: {output_path}")
    except Exception as e:
        logger.error(f"Error saving report to {output_path}: {e}", exc_info=True)
        raise


def _fit_dict(fit: Optional[RateFit]) -> Optional[Dict[str, object]]:
    if fit is None:
        return None
    return {
        "levels": list(fit.levels),
        "errors": list(fit.errors),
        "slope": fit.slope,
        "intercept": fit.intercept,
        "residual": fit.residual,
    }


def build_summary(report: ErrorReport, loaded: LoadedConfig, seed: int, norms: Dict[str, float]) -> Dict:
    """JSON summary with a provenance block that reproduces the run."""
    return {
        "name": loaded.config.name,
        "equation": report.equation,
        "n_ref": report.n_ref,
        "paths": report.paths,
        "steps": report.steps,
        "functional": report.functional,
        "functional_norm": report.functional_norm,
        "reference_bias": report.reference_bias,
        "constants": report.constants.as_dict(),
        "norms": norms,
        "parameters": report.parameters,
        "strong_fit": _fit_dict(report.strong_fit),
        "weak_fit": _fit_dict(report.weak_fit),
        "rows": report.as_rows(),
        "provenance": {
            "config_text": loaded.text,
            "config_sha256": loaded.sha256,
            "seed": seed,
            "version": LAB_VERSION,
        },
    }


def write_summary_json(summary: Dict, output_path: str) -> None:
    try:
        _ensure_parent(output_path)
        with open(output_path, "w", encoding="utf-8") as file:
            json.dump(summary, file, indent=2, sort_keys=True)
            file.write("\n")
        logger.info(f"Saved summary to: {output_path}")
    except Exception as e:
        logger.error(f"Error saving summary to {output_path}: {e}", exc_info=True)
        raise


def read_report_csv(path: str) -> List[Dict[str, object]]:
    with open(path, "r", encoding="utf-8", newline="") as file:
        return [{key: parse_value(value) for key, value in row.items()} for row in csv.DictReader(file)]


def load_reports(output_dir: str) -> Dict[str, List[Dict[str, object]]]:
    """
    Read every *_report.csv under `output_dir`.

    Returns:
        Mapping from report name (file name without the suffix) to its rows,
        sorted by name.

    Raises:
        FileNotFoundError: If the directory doesn't exist
    """
    if not os.path.isdir(output_dir):
        raise FileNotFoundError(f"Output directory not found: {output_dir}")
    paths = sorted(glob.glob(os.path.join(output_dir, f"*{REPORT_SUFFIX}")))
    if not paths:
        logger.warning(f"No reports found in {output_dir}")
    reports = {}
    for path in paths:
        name = os.path.basename(path)[: -len(REPORT_SUFFIX)]
        try:
            reports[name] = read_report_csv(path)
        except Exception as e:
            logger.warning(f"Error reading report {path}: {e}. Skipping.", exc_info=True)
    logger.info(f"Loaded {len(reports)} reports from {output_dir}")
    return reports


def format_table(columns: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    """Plain whitespace-aligned table; floats with 7 significant digits."""

    def cell(value) -> str:
        if value is None:
            return UNAVAILABLE
        if isinstance(value, float):
            return f"{value:.7g}"
        return str(value)

    cells = [[str(column) for column in columns]] + [[cell(value) for value in row] for row in rows]
    widths = [max(len(line[i]) for line in cells) for i in range(len(columns))]
    return "\n".join("  ".join(text.rjust(width) for text, width in zip(line, widths)) for line in cells)
