"""Gene layout of a robot design: per link group a length multiplier and a density,
per motor group a motor id."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from ..errors import ContractError
from ..model.model import HardwareParams, KinematicModel

__all__ = ["GeneSpace", "design_key"]


def design_key(params: HardwareParams) -> str:
    """Stable hash of a design (floats by exact repr)."""
    payload = json.dumps(
        [[repr(float(v)) for v in params.length_multipliers], [repr(float(v)) for v in params.densities], list(params.motor_ids)]
    )
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class GeneSpace:
    """Domains of every gene.

    Genes are ordered as length multipliers, then densities, then motor ids.

    Attributes:
        n_links: Number of link groups.
        n_motors: Number of motor groups.
        length_bounds: Closed interval of the length multipliers.
        materials: Admissible densities.
        motors: Admissible motor ids.
    """

    n_links: int
    n_motors: int
    length_bounds: tuple[float, float] = (0.5, 2.0)
    materials: tuple[float, ...] = ()
    motors: tuple[str, ...] = ()

    def __post_init__(self):
        lo, hi = self.length_bounds
        if not 0 < lo <= hi:
            raise ContractError("length bounds must satisfy 0 < lower <= upper")
        if self.n_links and not self.materials:
            raise ContractError("at least one material is required")
        if self.n_motors and not self.motors:
            raise ContractError("at least one motor is required")
        object.__setattr__(self, "materials", tuple(float(m) for m in self.materials))
        object.__setattr__(self, "motors", tuple(self.motors))

    @classmethod
    def for_model(cls, model: KinematicModel, materials, motors=None, length_bounds=(0.5, 2.0)) -> "GeneSpace":
        motors = tuple(motors) if motors else tuple(model.motor_catalog)
        unknown = [m for m in motors if m not in model.motor_catalog]
        if unknown:
            raise ContractError(f"motor ids {unknown} are not in the model catalog")
        return cls(len(model.link_groups), len(model.motor_groups), tuple(length_bounds), tuple(materials), motors)

    @property
    def n_genes(self) -> int:
        return 2 * self.n_links + self.n_motors

    def genes(self, params: HardwareParams) -> list:
        return list(params.length_multipliers) + list(params.densities) + list(params.motor_ids)

    def from_genes(self, genes) -> HardwareParams:
        genes = list(genes)
        if len(genes) != self.n_genes:
            raise ContractError(f"expected {self.n_genes} genes, got {len(genes)}")
        nl = self.n_links
        return HardwareParams(tuple(genes[:nl]), tuple(genes[nl : 2 * nl]), tuple(genes[2 * nl :]))

    def check_layout(self, params: HardwareParams) -> None:
        if len(params.length_multipliers) != self.n_links or len(params.densities) != self.n_links or len(params.motor_ids) != self.n_motors:
            raise ContractError("design does not match the gene layout")

    def contains(self, params: HardwareParams) -> bool:
        try:
            self.check_layout(params)
        except ContractError:
            return False
        lo, hi = self.length_bounds
        return (
            all(lo <= v <= hi for v in params.length_multipliers)
            and all(v in self.materials for v in params.densities)
            and all(m in self.motors for m in params.motor_ids)
        )

    def sample_gene(self, index: int, rng: np.random.Generator):
        """Uniform draw from the domain of one gene."""
        nl = self.n_links
        if index < nl:
            return float(rng.uniform(*self.length_bounds))
        if index < 2 * nl:
            return self.materials[int(rng.integers(len(self.materials)))]
        return self.motors[int(rng.integers(len(self.motors)))]

    def random(self, rng: np.random.Generator) -> HardwareParams:
        return self.from_genes([self.sample_gene(i, rng) for i in range(self.n_genes)])
