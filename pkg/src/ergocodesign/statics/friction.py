"""Linearized contact-wrench feasibility sets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractError

__all__ = ["FrictionModel", "DEFAULT_MARGIN"]

DEFAULT_MARGIN = 1e-6


@dataclass(frozen=True)
class FrictionModel:
    """Inner polyhedral approximation of a flat-contact wrench cone.

    In the contact frame (z normal, pointing into the agent) a wrench
    ``(fx, fy, fz, mx, my, mz)`` is admissible when:

    * ``fz`` is nonnegative,
    * ``|fx|, |fy| <= mu / sqrt(2) * fz`` (square pyramid inscribed in the cone),
    * the CoP ``(-my / fz, mx / fz)`` lies in the ``cop`` rectangle,
    * ``|mz| <= torsion * fz``.

    Each inequality is written as a row of ``C f <= b`` and tightened by ``margin``.

    Attributes:
        mu: Coulomb friction coefficient.
        cop: ``(x_min, x_max, y_min, y_max)`` in meters, or None for a point contact.
        torsion: Torsional coefficient in meters; defaults to ``mu`` times the
            smallest CoP half-extent.
        facets: Number of pyramid facets (only 4 is supported).
        margin: Strictness margin subtracted from ``b``.
    """

    mu: float
    cop: tuple[float, float, float, float] | None = None
    torsion: float | None = None
    facets: int = 4
    margin: float = DEFAULT_MARGIN

    def __post_init__(self):
        if not self.mu > 0:
            raise ContractError("friction coefficient must be positive")
        if self.facets != 4:
            raise ContractError("only the 4-facet pyramid is implemented")
        if self.cop is not None:
            x0, x1, y0, y1 = self.cop
            if not (x0 < 0 < x1 and y0 < 0 < y1):
                raise ContractError("CoP rectangle must contain the contact origin")

    @property
    def torsion_coefficient(self) -> float:
        if self.torsion is not None:
            return float(self.torsion)
        if self.cop is None:
            return 0.0
        return self.mu * min(abs(v) for v in self.cop)

    def local_rows(self, dim: int = 6) -> tuple[np.ndarray, np.ndarray]:
        """Rows ``(C, b)`` for a wrench expressed in the contact frame, margin included."""
        a = self.mu / np.sqrt(2.0)
        rows = [
            [0, 0, -1, 0, 0, 0],
            [1, 0, -a, 0, 0, 0],
            [-1, 0, -a, 0, 0, 0],
            [0, 1, -a, 0, 0, 0],
            [0, -1, -a, 0, 0, 0],
        ]
        if dim == 6 and self.cop is not None:
            x0, x1, y0, y1 = self.cop
            t = self.torsion_coefficient
            rows += [
                [0, 0, -x1, 0, -1, 0],
                [0, 0, x0, 0, 1, 0],
                [0, 0, -y1, 1, 0, 0],
                [0, 0, y0, -1, 0, 0],
                [0, 0, -t, 0, 0, 1],
                [0, 0, -t, 0, 0, -1],
            ]
        C = np.array(rows, dtype=float)[:, :dim]
        return C, np.full(len(C), -self.margin)

    def world_rows(self, R_contact: np.ndarray, dim: int = 6) -> tuple[np.ndarray, np.ndarray]:
        """Rows acting on a world-frame wrench for a contact frame with rotation ``R_contact``."""
        C, b = self.local_rows(dim)
        Rt = np.asarray(R_contact, dtype=float).T
        T = np.zeros((dim, dim))
        T[:3, :3] = Rt
        if dim == 6:
            T[3:, 3:] = Rt
        return C @ T, b

    def admissible(self, wrench_local: np.ndarray, tol: float = 0.0) -> bool:
        C, b = self.local_rows(len(wrench_local))
        return bool(np.all(C @ wrench_local <= b + tol))
