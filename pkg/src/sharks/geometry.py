"""Planar geometry helpers: points, compass-free headings and the stability band.

Headings are in degrees, counterclockwise from +x, always kept in [0, 360).
"""

from __future__ import annotations

import math
from typing import NamedTuple

TOL = 1e-9


class GeometryError(ValueError):
    """Raised for degenerate geometric input."""


class Point2(NamedTuple):
    x: float
    y: float


def normalize_deg(degrees: float) -> float:
    h = math.fmod(degrees, 360.0)
    if h < 0.0:
        h += 360.0
    # fmod of a tiny negative value can round up to exactly 360
    if h >= 360.0:
        h = 0.0
    return h + 0.0


def distance(a: Point2, b: Point2) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def heading_from_to(src: Point2, dst: Point2) -> float:
    dx = dst[0] - src[0]
    dy = dst[1] - src[1]
    if dx == 0.0 and dy == 0.0:
        raise GeometryError(f"bearing undefined: points coincide at {tuple(src)}")
    return normalize_deg(math.degrees(math.atan2(dy, dx)))


def rotate_cw(heading: float, theta: float) -> float:
    """Rotate ``heading`` clockwise by ``theta`` degrees."""
    return normalize_deg(heading - theta)


def unit_vector(heading: float) -> tuple[float, float]:
    """(cos h, sin h) with exact values on the four axes.

    Exactness on the axes matters: an agent dispersing straight up or down
    must keep its x-coordinate bit-for-bit.
    """
    h = normalize_deg(heading)
    if h == 0.0:
        return 1.0, 0.0
    if h == 90.0:
        return 0.0, 1.0
    if h == 180.0:
        return -1.0, 0.0
    if h == 270.0:
        return 0.0, -1.0
    rad = math.radians(h)
    return math.cos(rad), math.sin(rad)


def displace(p: Point2, heading: float, units: float) -> Point2:
    if units < 0:
        raise GeometryError(f"displacement must be non-negative, got {units}")
    ux, uy = unit_vector(heading)
    return Point2(p[0] + units * ux, p[1] + units * uy)


def annulus_area(delta: float, epsilon: float) -> float:
    """Area of the ring between radii ``delta - epsilon`` and ``delta + epsilon``.

    ``delta == epsilon`` is allowed: the ring closes into a disk of radius
    ``2 * delta`` and the formula still holds.  Smaller ``delta`` is rejected
    because the band would wrap past the target.
    """
    if not (epsilon > 0 and delta >= epsilon):
        raise GeometryError(
            f"need delta >= epsilon > 0, got delta={delta}, epsilon={epsilon}"
        )
    return 4.0 * math.pi * delta * epsilon
