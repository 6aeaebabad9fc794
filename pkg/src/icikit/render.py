"""Static visualization emitters: top-down SVG renders of a design and CSV
reshaping for plots.

SVG output is deterministic (stable element order, fixed number formatting):
the same design always renders byte-identically.
"""

from __future__ import annotations

import csv
import io
import math

from . import geometry
from .model import DesignBundle, IcikitError

SCALE = 10.0   # pixels per mm
MARGIN = 30.0  # pixels around the interposer outline


def _fmt(value: float) -> str:
    return f"{value:.3f}"


def render_svg(bundle: DesignBundle) -> str:
    """Scaled top-down drawing: interposer outline, chiplet rectangles with
    names, PHY dots, links following the packaging link-routing rule, and
    interposer-router dots."""
    placement = bundle.placement
    if not placement.chiplets:
        raise IcikitError("cannot render an empty placement")
    min_x = min_y = math.inf
    max_x = max_y = -math.inf
    for inst in placement.chiplets:
        w, h = geometry.rotated_dimensions(bundle.chiplets[inst.name], inst.rotation)
        min_x = min(min_x, inst.x_mm)
        min_y = min(min_y, inst.y_mm)
        max_x = max(max_x, inst.x_mm + w)
        max_y = max(max_y, inst.y_mm + h)
    for router in placement.interposer_routers:
        min_x = min(min_x, router.x_mm)
        min_y = min(min_y, router.y_mm)
        max_x = max(max_x, router.x_mm)
        max_y = max(max_y, router.y_mm)

    def px(x: float) -> float:
        return MARGIN + (x - min_x) * SCALE

    def py(y: float) -> float:
        # Flip the y axis: design origin is the lower-left corner.
        return MARGIN + (max_y - y) * SCALE

    width = 2 * MARGIN + (max_x - min_x) * SCALE
    height = 2 * MARGIN + (max_y - min_y) * SCALE
    out = []
    out.append('<?xml version="1.0" encoding="UTF-8"?>')
    out.append(f"<!-- scale: {SCALE} px/mm; origin: design lower-left corner; "
               "y axis flipped for screen convention -->")
    out.append(f'<svg xmlns="http://www.w3.org/2000/svg" '
               f'width="{_fmt(width)}" height="{_fmt(height)}" '
               f'viewBox="0 0 {_fmt(width)} {_fmt(height)}">')
    out.append(f'<rect class="interposer" x="{_fmt(MARGIN)}" y="{_fmt(MARGIN)}" '
               f'width="{_fmt((max_x - min_x) * SCALE)}" '
               f'height="{_fmt((max_y - min_y) * SCALE)}" '
               'fill="#e8e8f0" stroke="#555555" stroke-width="1"/>')

    rule = bundle.packaging.link_routing
    for li, link in enumerate(bundle.topology.links):
        a = geometry.endpoint_position(bundle, link.ep1)
        b = geometry.endpoint_position(bundle, link.ep2)
        if rule == "manhattan" and (a[0] != b[0] and a[1] != b[1]):
            points = [a, (b[0], a[1]), b]  # x first, then y
        else:
            points = [a, b]
        path = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in points)
        out.append(f'<polyline class="link" data-link="{li}" points="{path}" '
                   'fill="none" stroke="#d08020" stroke-width="1.5"/>')

    for idx, inst in enumerate(placement.chiplets):
        chiplet = bundle.chiplets[inst.name]
        w, h = geometry.rotated_dimensions(chiplet, inst.rotation)
        out.append(f'<rect class="chiplet" data-instance="{idx}" '
                   f'x="{_fmt(px(inst.x_mm))}" y="{_fmt(py(inst.y_mm + h))}" '
                   f'width="{_fmt(w * SCALE)}" height="{_fmt(h * SCALE)}" '
                   'fill="#9fc2e8" fill-opacity="0.85" stroke="#224466" '
                   'stroke-width="1"/>')
        out.append(f'<text class="label" x="{_fmt(px(inst.x_mm + w / 2))}" '
                   f'y="{_fmt(py(inst.y_mm + h / 2))}" font-size="10" '
                   f'text-anchor="middle" dominant-baseline="middle">'
                   f'{idx}:{inst.name}</text>')
        for pi in range(len(chiplet.phys)):
            x, y = geometry.phy_position(chiplet, inst, pi)
            out.append(f'<circle class="phy" cx="{_fmt(px(x))}" cy="{_fmt(py(y))}" '
                       'r="2.2" fill="#203050"/>')

    for ri, router in enumerate(placement.interposer_routers):
        out.append(f'<circle class="router" data-router="{ri}" '
                   f'cx="{_fmt(px(router.x_mm))}" cy="{_fmt(py(router.y_mm))}" '
                   'r="4.5" fill="#803030"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Plot-data reshaping

PLOT_KINDS = ("latency_vs_load", "pareto_scatter")


def _require_columns(rows, columns, kind):
    missing = [c for c in columns if c not in rows[0]]
    if missing:
        raise IcikitError(f"{kind} needs columns {missing} in the input file")


def plot_data(rows: list[dict], kind: str) -> tuple[list[str], list[list]]:
    """Reshape result rows into plot-ready columns; returns (header, rows)."""
    if not rows:
        raise IcikitError("no rows")
    if kind == "latency_vs_load":
        _require_columns(rows, ["offered_rate", "avg_packet_latency_cycles"], kind)
        picked = sorted(rows, key=lambda r: float(r["offered_rate"]))
        header = ["injection_rate", "avg_latency_cycles", "accepted_rate", "saturated"]
        return header, [[float(r["offered_rate"]),
                         float(r["avg_packet_latency_cycles"]),
                         float(r.get("accepted_rate", 0.0) or 0.0),
                         r.get("saturated", "")] for r in picked]
    if kind == "pareto_scatter":
        _require_columns(rows, ["avg_latency_cycles", "throughput_units",
                                "chiplet_area_sum_mm2"], kind)
        good = [r for r in rows if not r.get("error")]
        if not good:
            raise IcikitError("no rows")
        base_area = min(float(r["chiplet_area_sum_mm2"]) for r in good)
        header = ["throughput_units", "avg_latency_cycles",
                  "area_overhead_percent", "topology", "shg_bits",
                  "traffic_pattern", "point"]
        out = []
        for r in good:
            overhead = (float(r["chiplet_area_sum_mm2"]) / base_area - 1.0) * 100.0
            out.append([float(r["throughput_units"]),
                        float(r["avg_latency_cycles"]), overhead,
                        r.get("topology", ""), r.get("shg_bits", ""),
                        r.get("traffic_pattern", ""), r.get("point", "")])
        return header, out
    raise IcikitError(f"unknown plot kind '{kind}' (choose from {PLOT_KINDS})")


def write_csv(path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()
