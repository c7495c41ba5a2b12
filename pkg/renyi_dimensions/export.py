"""
File output: CSV tables, key/value reports, a gnuplot script and a PNG log-log plot.

Floats are always written with 17 significant digits so repeated runs give
byte-identical files and tables read back bit for bit.
"""

import csv
import logging
import os
from fractions import Fraction
from typing import Iterable, List, Mapping, Optional, Sequence

import numpy as np
from PIL import Image, ImageDraw

from .config import dump_config
from .exceptions import OutputSaveError
from .measure import DiscretizedMeasure
from .profiles import ProfileStats, WeightProfile

logger = logging.getLogger(__name__)

PLOT_SIZE = (800, 600)
PLOT_MARGIN = 60
BACKGROUND = (255, 255, 255)
AXIS_COLOR = (0, 0, 0)
SERIES_COLORS = [(31, 119, 180), (214, 39, 40), (44, 160, 44), (148, 103, 189)]


def format_cell(value) -> str:
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}" if value.denominator != 1 else str(value.numerator)
    return str(value)


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[object]]) -> str:
    """
    Write a header and rows to ``path``, replacing any existing file.

    Raises:
        OutputSaveError: If the file cannot be written
    """
    try:
        _ensure_parent(path)
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_cell(v) for v in row])
    except OSError as e:
        raise OutputSaveError(f"Cannot save output to: {path}. {e}") from e
    logger.debug("Wrote %s", path)
    return path


def write_text(path: str, text: str) -> str:
    try:
        _ensure_parent(path)
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
    except OSError as e:
        raise OutputSaveError(f"Cannot save output to: {path}. {e}") from e
    return path


def write_key_values(path: str, entries: Mapping[str, object]) -> str:
    """Write a flat ``key = value`` block (sorted keys)."""
    return write_text(path, dump_config(dict(entries)))


def write_measure_csv(dm: DiscretizedMeasure, path: str) -> str:
    return write_csv(path, ["position", "weight"],
                     zip(dm.positions.tolist(), dm.weights.tolist()))


def write_profile_csv(profile: WeightProfile, path: str) -> str:
    """One row (k, a_k) per level, values kept exact where they are fractions."""
    def rows():
        for run in profile.runs:
            for k in range(run.first, run.last + 1):
                yield k, run.value
    return write_csv(path, ["k", "a_k"], rows())


def write_stats_csv(stats: Sequence[ProfileStats], path: str) -> str:
    rows = []
    for s in stats:
        weighted = s.weighted_average if s.n >= 2 else ""
        rows.append([s.n, s.running_sum, s.running_average, s.weighted_sum, weighted,
                     s.weighted_average_cubic])
    return write_csv(path, ["n", "running_sum", "running_average", "weighted_sum",
                            "weighted_average", "weighted_average_cubic"], rows)


def write_gnuplot_script(path: str, csv_name: str, png_name: str, title: str,
                         x_column: int = 1, y_column: int = 2,
                         xlabel: str = "ln eps", ylabel: str = "ln S") -> str:
    """A plain gnuplot script that plots two CSV columns against each other."""
    script = "\n".join([
        "set datafile separator ','",
        "set terminal pngcairo size 800,600",
        f"set output '{png_name}'",
        f"set title '{title}'",
        f"set xlabel '{xlabel}'",
        f"set ylabel '{ylabel}'",
        "set grid",
        f"plot '{csv_name}' every ::1 using {x_column}:{y_column} with linespoints "
        f"pointtype 7 pointsize 0.5 title '{ylabel}'",
        "",
    ])
    return write_text(path, script)


def render_loglog_png(path: str, series: Sequence[Sequence[Sequence[float]]],
                      title: str = "", labels: Optional[List[str]] = None) -> str:
    """
    Draw one or more (x, y) series, already on the log scale, into a PNG.

    Raises:
        OutputSaveError: If the image cannot be saved or there is nothing to draw
    """
    curves = [(np.asarray(x, dtype=float), np.asarray(y, dtype=float)) for x, y in series]
    curves = [(x, y) for x, y in curves if x.size]
    if not curves:
        raise OutputSaveError(f"Nothing to plot for: {path}")

    xs = np.concatenate([x for x, _ in curves])
    ys = np.concatenate([y for _, y in curves])
    x_lo, x_hi = _padded_range(xs)
    y_lo, y_hi = _padded_range(ys)
    width, height = PLOT_SIZE
    inner_w = width - 2 * PLOT_MARGIN
    inner_h = height - 2 * PLOT_MARGIN

    def to_pixel(x, y):
        px = PLOT_MARGIN + (x - x_lo) / (x_hi - x_lo) * inner_w
        py = height - PLOT_MARGIN - (y - y_lo) / (y_hi - y_lo) * inner_h
        return px, py

    image = Image.new("RGB", PLOT_SIZE, BACKGROUND)
    draw = ImageDraw.Draw(image)
    draw.rectangle([PLOT_MARGIN, PLOT_MARGIN, width - PLOT_MARGIN, height - PLOT_MARGIN],
                   outline=AXIS_COLOR)
    draw.text((PLOT_MARGIN, PLOT_MARGIN // 3), title, fill=AXIS_COLOR)
    draw.text((PLOT_MARGIN, height - PLOT_MARGIN + 8), f"{x_lo:.4g}", fill=AXIS_COLOR)
    draw.text((width - PLOT_MARGIN - 60, height - PLOT_MARGIN + 8), f"{x_hi:.4g}", fill=AXIS_COLOR)
    draw.text((4, height - PLOT_MARGIN - 12), f"{y_lo:.4g}", fill=AXIS_COLOR)
    draw.text((4, PLOT_MARGIN), f"{y_hi:.4g}", fill=AXIS_COLOR)

    for index, (x, y) in enumerate(curves):
        color = SERIES_COLORS[index % len(SERIES_COLORS)]
        points = [to_pixel(a, b) for a, b in zip(_thin(x), _thin(y))]
        if len(points) > 1:
            draw.line(points, fill=color, width=2)
        else:
            px, py = points[0]
            draw.ellipse([px - 2, py - 2, px + 2, py + 2], fill=color)
        if labels and index < len(labels):
            draw.text((width - PLOT_MARGIN - 150, PLOT_MARGIN + 6 + 14 * index),
                      labels[index], fill=color)

    try:
        _ensure_parent(path)
        image.save(path, "PNG")
    except (OSError, ValueError) as e:
        raise OutputSaveError(f"Cannot save output to: {path}. {str(e)}") from e
    return path


def _padded_range(values: np.ndarray):
    lo, hi = float(np.min(values)), float(np.max(values))
    if hi == lo:
        pad = max(abs(lo), 1.0) * 0.05
        return lo - pad, hi + pad
    pad = (hi - lo) * 0.02
    return lo - pad, hi + pad


def _thin(values: np.ndarray, limit: int = 4000) -> np.ndarray:
    """At most ``limit`` evenly spaced samples, always keeping the last one."""
    if values.size <= limit:
        return values
    idx = np.unique(np.concatenate((np.linspace(0, values.size - 1, limit).astype(np.int64),
                                    [values.size - 1])))
    return values[idx]


def _ensure_parent(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
