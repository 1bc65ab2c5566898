"""Pixel-space overlay geometry."""

from __future__ import annotations

import math

from ..exceptions import DomainError


def principal_arrow(width, height, v1, length):
    """Arrow from the image center along ``v1``, in pixel coordinates.

    ``v1`` lives in the y-up normalized frame, so its y component is flipped.
    """
    if not length > 0:
        raise DomainError("arrow length must be positive")
    if abs(math.hypot(*v1) - 1.0) > 1e-9:
        raise DomainError("v1 must be a unit vector")
    x0, y0 = width / 2.0, height / 2.0
    return (x0, y0), (x0 + length * v1[0], y0 - length * v1[1])


def to_pixels(x, y, width, height):
    """Map a normalized ``(x, y)`` back to pixel coordinates."""
    return (x + 1.0) * width / 2.0, (1.0 - y) * height / 2.0
