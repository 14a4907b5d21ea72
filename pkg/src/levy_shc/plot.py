"""Self-contained SVG line charts of report CSVs (value against log10 t)."""

from __future__ import annotations

import csv
import math
import xml.etree.ElementTree as ET

WIDTH, HEIGHT, MARGIN = 640, 400, 60
COLOURS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")
DEFAULT_SERIES = (("scaled_loss",), ("base_scaled", "trunc_scaled"), ("value",), ("ratio",))


def read_csv(path: str) -> tuple[list[str], list[dict]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return list(reader.fieldnames or []), list(reader)


def pick_series(header) -> list[str]:
    for group in DEFAULT_SERIES:
        if all(col in header for col in group):
            return list(group)
    return [c for c in header if c not in ("t", "target", "n_paths", "n_steps", "flagged")][:1]


def render_svg(header, rows, series=None, title: str = "") -> str:
    """One polyline per series and, when a ``target`` column exists, a horizontal target rule."""
    if "t" not in header:
        raise ValueError("the CSV needs a 't' column")
    series = list(series) if series else pick_series(header)
    xs = [math.log10(float(r["t"])) for r in rows]
    values = {s: [float(r[s]) for r in rows] for s in series}
    target = float(rows[0]["target"]) if rows and "target" in header else None
    ys = [v for vs in values.values() for v in vs if math.isfinite(v)] + ([target] if target is not None else [])
    if not xs or not ys:
        raise ValueError("nothing to plot")
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    pad = 0.05 * (y1 - y0) or 0.05 * abs(y1) or 1.0
    y0, y1 = y0 - pad, y1 + pad

    def px(x):
        return MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2 * MARGIN)

    def py(y):
        return HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2 * MARGIN)

    svg = ET.Element("svg", xmlns="http://www.w3.org/2000/svg", width=str(WIDTH), height=str(HEIGHT),
                     viewBox=f"0 0 {WIDTH} {HEIGHT}")
    ET.SubElement(svg, "rect", x="0", y="0", width=str(WIDTH), height=str(HEIGHT), fill="white")
    if title:
        ET.SubElement(svg, "text", x=str(WIDTH / 2), y="24", attrib={"text-anchor": "middle"}).text = title
    axes = ET.SubElement(svg, "g", attrib={"class": "axes", "stroke": "black"})
    ET.SubElement(axes, "line", x1=str(MARGIN), y1=str(HEIGHT - MARGIN), x2=str(WIDTH - MARGIN),
                  y2=str(HEIGHT - MARGIN))
    ET.SubElement(axes, "line", x1=str(MARGIN), y1=str(MARGIN), x2=str(MARGIN), y2=str(HEIGHT - MARGIN))
    for k in range(math.ceil(x0), math.floor(x1) + 1):
        ET.SubElement(svg, "text", x=f"{px(k):.2f}", y=str(HEIGHT - MARGIN + 18),
                      attrib={"text-anchor": "middle", "font-size": "11"}).text = f"1e{k}"
    for frac in (0.0, 0.5, 1.0):
        y = y0 + frac * (y1 - y0)
        ET.SubElement(svg, "text", x=str(MARGIN - 6), y=f"{py(y):.2f}",
                      attrib={"text-anchor": "end", "font-size": "11"}).text = f"{y:.4g}"
    ET.SubElement(svg, "text", x=str(WIDTH / 2), y=str(HEIGHT - 12), attrib={"text-anchor": "middle"}).text = "t"
    if target is not None:
        ET.SubElement(svg, "line", attrib={"class": "target", "x1": str(MARGIN), "x2": str(WIDTH - MARGIN),
                                           "y1": f"{py(target):.2f}", "y2": f"{py(target):.2f}",
                                           "stroke": "gray", "stroke-dasharray": "6 4"})
    for i, s in enumerate(series):
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in sorted(zip(xs, values[s])) if math.isfinite(y))
        ET.SubElement(svg, "polyline", attrib={"class": "series", "data-series": s, "points": pts, "fill": "none",
                                               "stroke": COLOURS[i % len(COLOURS)], "stroke-width": "2"})
        ET.SubElement(svg, "text", x=str(WIDTH - MARGIN), y=str(MARGIN + 14 * i),
                      attrib={"text-anchor": "end", "font-size": "11",
                              "fill": COLOURS[i % len(COLOURS)]}).text = s
    return ET.tostring(svg, encoding="unicode", xml_declaration=False)


def plot_csv(csv_path: str, svg_path: str, series=None, title: str = "") -> None:
    header, rows = read_csv(csv_path)
    text = render_svg(header, rows, series, title)
    with open(svg_path, "w", encoding="utf-8") as fh:
        fh.write('<?xml version="1.0" encoding="UTF-8"?>\n' + text + "\n")
