"""Footprint geometry: PHY positions under rotation, link lengths, and the
interposer bounding rectangle.

Rotation convention: a chiplet rotates about its own footprint and is then
placed by the lower-left corner of the rotated footprint, so placement
coordinates stay meaningful for any rotation.  A 90-degree step maps a
relative point (x, y) on a w x h footprint to (h - y, x) and swaps the
footprint sides.
"""

from __future__ import annotations

import math

from .model import ChipletDef, DesignBundle, Endpoint, IcikitError, PlacedChiplet, Placement


def rotated_dimensions(chiplet: ChipletDef, rotation: int) -> tuple[float, float]:
    if rotation in (90, 270):
        return chiplet.height_mm, chiplet.width_mm
    return chiplet.width_mm, chiplet.height_mm


def rotate_point(x: float, y: float, width: float, height: float,
                 rotation: int) -> tuple[float, float]:
    """Rotate a footprint-relative point; footprint sides swap each 90 degrees."""
    w, h = width, height
    for _ in range(rotation // 90):
        x, y = h - y, x
        w, h = h, w
    return x, y


def phy_position(chiplet: ChipletDef, instance: PlacedChiplet,
                 phy_index: int) -> tuple[float, float]:
    """Absolute position of one PHY of a placed chiplet instance."""
    if not 0 <= phy_index < len(chiplet.phys):
        raise IcikitError(
            f"chiplet '{chiplet.name}' has {len(chiplet.phys)} PHYs, "
            f"index {phy_index} is invalid")
    phy = chiplet.phys[phy_index]
    x, y = rotate_point(phy.x_mm, phy.y_mm, chiplet.width_mm, chiplet.height_mm,
                        instance.rotation)
    return instance.x_mm + x, instance.y_mm + y


def link_length(a: tuple[float, float], b: tuple[float, float], rule: str) -> float:
    """Length of a routed link: manhattan -> |dx|+|dy|, direct -> euclidean."""
    dx = a[0] - b[0]
    dy = a[1] - b[1]
    if rule == "manhattan":
        return abs(dx) + abs(dy)
    if rule == "direct":
        return math.hypot(dx, dy)
    raise IcikitError(f"unknown link routing rule '{rule}'")


def endpoint_position(bundle: DesignBundle, endpoint: Endpoint) -> tuple[float, float]:
    """Absolute position where a link attaches: the PHY point for chiplet
    endpoints, the router point for interposer-router endpoints."""
    if endpoint.kind == "chiplet":
        instance = bundle.placement.chiplets[endpoint.index]
        return phy_position(bundle.chiplets[instance.name], instance, endpoint.phy)
    router = bundle.placement.interposer_routers[endpoint.index]
    return router.x_mm, router.y_mm


def enclosing_rectangle(placement: Placement,
                        library: dict[str, ChipletDef]) -> tuple[float, float]:
    """Width and height of the smallest axis-aligned rectangle covering all
    rotated chiplet footprints (the interposer outline)."""
    if not placement.chiplets:
        raise IcikitError("cannot compute the enclosing rectangle of an empty placement")
    min_x = min_y = math.inf
    max_x = max_y = -math.inf
    for instance in placement.chiplets:
        w, h = rotated_dimensions(library[instance.name], instance.rotation)
        min_x = min(min_x, instance.x_mm)
        min_y = min(min_y, instance.y_mm)
        max_x = max(max_x, instance.x_mm + w)
        max_y = max(max_y, instance.y_mm + h)
    return max_x - min_x, max_y - min_y
