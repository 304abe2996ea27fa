"""Solid shape primitives and their mass properties."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidShapeError

__all__ = ["ShapePrimitive", "link_inertia", "SHAPE_KINDS"]

SHAPE_KINDS = ("sphere", "cylinder", "box")
_DIM_COUNT = {"sphere": 1, "cylinder": 2, "box": 3}


@dataclass(frozen=True)
class ShapePrimitive:
    """Solid primitive expressed in its link frame.

    Attributes:
        kind: One of ``sphere``, ``cylinder``, ``box``.
        dimensions: ``(radius,)``, ``(radius, length)`` or ``(dx, dy, dz)`` in meters.
        growth_axis: Principal axis (unit vector along x, y or z) scaled by the length
            multiplier. For cylinders this is also the cylinder's length axis.
        center: Geometric center in the link frame at unit length multiplier.
    """

    kind: str
    dimensions: tuple[float, ...]
    growth_axis: tuple[float, float, float] = (0.0, 0.0, 1.0)
    center: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.kind not in SHAPE_KINDS:
            raise InvalidShapeError(f"unknown shape kind {self.kind!r}")
        dims = tuple(float(d) for d in self.dimensions)
        if len(dims) != _DIM_COUNT[self.kind]:
            raise InvalidShapeError(
                f"{self.kind} needs {_DIM_COUNT[self.kind]} dimensions, got {len(dims)}"
            )
        if not all(np.isfinite(d) and d > 0 for d in dims):
            raise InvalidShapeError(f"shape dimensions must be strictly positive, got {dims}")
        axis = np.asarray(self.growth_axis, dtype=float)
        if axis.shape != (3,) or sorted(np.abs(axis).tolist()) != [0.0, 0.0, 1.0]:
            raise InvalidShapeError(f"growth_axis must be a principal unit axis, got {self.growth_axis}")
        center = tuple(float(c) for c in self.center)
        if len(center) != 3:
            raise InvalidShapeError("center must have three components")
        object.__setattr__(self, "dimensions", dims)
        object.__setattr__(self, "growth_axis", tuple(float(a) for a in axis))
        object.__setattr__(self, "center", center)

    @property
    def axis_index(self) -> int:
        return int(np.argmax(np.abs(self.growth_axis)))


def scale_along(vec, axis_index: int, multiplier: float) -> np.ndarray:
    """Copy of ``vec`` with the component on ``axis_index`` multiplied."""
    out = np.array(vec, dtype=float)
    out[axis_index] *= multiplier
    return out


def link_inertia(shape: ShapePrimitive, density: float, length_multiplier: float = 1.0):
    """Mass, center of mass and central inertia of a scaled solid primitive.

    The dimension along the growth axis (the radius for spheres) is multiplied
    by ``length_multiplier``; the center moves with the same scaling.

    Args:
        shape: The primitive.
        density: Uniform density in kg/m^3.
        length_multiplier: Positive scale factor.

    Returns:
        Tuple ``(mass, com, inertia)`` with ``com`` in the link frame and
        ``inertia`` the 3x3 tensor about the CoM in link-frame axes.
    """
    if not density > 0:
        raise InvalidShapeError(f"density must be positive, got {density}")
    if not length_multiplier > 0:
        raise InvalidShapeError(f"length multiplier must be positive, got {length_multiplier}")
    k = shape.axis_index
    com = scale_along(shape.center, k, length_multiplier)
    if shape.kind == "sphere":
        r = shape.dimensions[0] * length_multiplier
        m = density * 4.0 / 3.0 * np.pi * r**3
        inertia = np.eye(3) * (0.4 * m * r * r)
    elif shape.kind == "cylinder":
        r, length = shape.dimensions
        length = length * length_multiplier
        m = density * np.pi * r * r * length
        perp = m * (3.0 * r * r + length * length) / 12.0
        diag = np.full(3, perp)
        diag[k] = 0.5 * m * r * r
        inertia = np.diag(diag)
    else:
        ext = scale_along(shape.dimensions, k, length_multiplier)
        m = density * float(np.prod(ext))
        sq = ext * ext
        inertia = np.diag(m / 12.0 * np.array([sq[1] + sq[2], sq[0] + sq[2], sq[0] + sq[1]]))
    return float(m), com, inertia
