from typing import Tuple, Optional
from dataclasses import dataclass
from fractions import Fraction

import logging

from ..errors import PruneBudgetError


logger = logging.getLogger(__name__)


def round_half_up(value: Fraction) -> int:
    return int((value + Fraction(1, 2)) // 1)


@dataclass(frozen=True)
class LayerBudget:
    layer: str
    fraction: Fraction


@dataclass(frozen=True)
class PrunePolicy:
    """
    How many input channels a mapper may drop from a layer: a fraction of
    the channels (rounded half-up), optionally overridden per layer, and a
    per-partition cap for the depth-window search
    """

    fraction: Fraction = Fraction(3, 100)
    per_partition: int = 1
    overrides: Tuple[LayerBudget, ...] = ()

    def __post_init__(self) -> None:
        assert 0 <= self.fraction <= 1, f"prune fraction {self.fraction} out of [0, 1]"
        assert self.per_partition >= 0, f"negative per-partition budget {self.per_partition}"

    def get_override(self, layer: str) -> Optional[LayerBudget]:
        for budget in self.overrides:
            if budget.layer == layer:
                return budget
        return None

    def input_budget(self, layer: str, channels: int) -> int:
        override = self.get_override(layer)
        fraction = self.fraction if override is None else override.fraction
        return round_half_up(fraction * channels)

    def with_fraction(self, fraction: Fraction) -> "PrunePolicy":
        return PrunePolicy(fraction, self.per_partition, self.overrides)

    @staticmethod
    def none() -> "PrunePolicy":
        return PrunePolicy(Fraction(0), 0)


DEFAULT_POLICY = PrunePolicy()


def check_prune_budget(layer: str, residual: int, budget: int) -> int:
    """
    Raise if dropping the residual channels would exceed the budget
    """
    if residual > budget:
        raise PruneBudgetError(f"{layer}: prune budget exceeded ({residual} > {budget} channels)")
    return residual
