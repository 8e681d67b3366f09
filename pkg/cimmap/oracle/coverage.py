"""
Replay a mapping plan placement by placement and check that every
output pixel of every channel partition is computed
"""

from typing import Tuple, Optional, List, Dict
from dataclasses import dataclass

import logging

import numpy as np

from ..mapping.geometry import LayerSpec, MappingPlan, Placement, TilePlan


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CoverageResult:
    covered: bool
    replay_cycles: int
    duplicate_positions: Tuple[Tuple[int, int, int], ...]
    out_of_bounds: Tuple[Placement, ...]
    null_cells: int
    capacity_violations: Tuple[str, ...] = ()
    partition_error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.covered and len(self.capacity_violations) == 0 and self.partition_error is None


def _check_partitions(unit: LayerSpec, plan: MappingPlan) -> Optional[str]:
    next_channel = 0
    for offset, channels in sorted(plan.partitions):
        if offset != next_channel:
            return f"channel partitions overlap or leave a gap at channel {next_channel}"
        next_channel = offset + channels

    if next_channel + plan.pruned_in != unit.in_channels:
        return f"partitions cover {next_channel} + {plan.pruned_in} pruned of {unit.in_channels} channels"

    return None


def _replay_tile(tile: TilePlan, unit: LayerSpec, plan: MappingPlan, violations: List[str]) -> int:
    """
    Count activations literally: every placement, every input channel
    chunk, every output channel chunk
    """

    kernel = unit.kernel
    activations = 0

    for placement in tile.placements:
        positions = (placement.height - kernel + 1) * (placement.width - kernel + 1)

        channel = 0
        while channel < tile.channels:
            in_chunk = min(tile.window.ic_tile, tile.channels - channel)
            if in_chunk * placement.height * placement.width > plan.array.rows:
                violations.append(f"{tile.window}: {in_chunk} channels overflow {plan.array.rows} rows")

            out_channel = 0
            while out_channel < tile.out_channels:
                out_chunk = min(tile.window.oc_tile, tile.out_channels - out_channel)
                if out_chunk * positions * plan.array.weight_bits > plan.array.cols:
                    violations.append(f"{tile.window}: {out_chunk} kernels overflow {plan.array.cols} columns")
                activations += 1
                out_channel += out_chunk

            channel += in_chunk

    return activations


def simulate_coverage(layer: LayerSpec, plan: MappingPlan) -> CoverageResult:
    unit = layer.per_group(plan.groups)
    kernel = unit.kernel

    ifm = np.ones((unit.in_h, unit.in_w), dtype=np.int64)
    counters: Dict[Tuple[int, int], np.ndarray] = {}

    out_of_bounds: List[Placement] = []
    violations: List[str] = []
    null_cells = 0
    replay_cycles = 0

    for tile in plan.tiles:
        counts = counters.setdefault(tile.partition, np.zeros((unit.out_h, unit.out_w), dtype=np.int64))

        for placement in tile.placements:
            row, col = placement.row, placement.col

            if row < 0 or col < 0 or row + placement.height > unit.in_h or col + placement.width > unit.in_w:
                out_of_bounds.append(placement)

            inside = ifm[max(row, 0):row + placement.height, max(col, 0):col + placement.width]
            null_cells += placement.height * placement.width - int(inside.sum())

            # output pixels computed by this window; slicing drops those past the border
            counts[max(row, 0):row + placement.height - kernel + 1, max(col, 0):col + placement.width - kernel + 1] += 1

        replay_cycles += _replay_tile(tile, unit, plan, violations)

    covered = len(counters) != 0 and all(bool((counts >= 1).all()) for counts in counters.values())

    duplicates = tuple(
        (offset, int(row), int(col))
        for (offset, _), counts in sorted(counters.items())
        for row, col in np.argwhere(counts > 1)
    )

    if plan.serialized:
        replay_cycles *= plan.groups

    result = CoverageResult(
        covered,
        replay_cycles,
        duplicates,
        tuple(out_of_bounds),
        null_cells,
        tuple(violations),
        _check_partitions(unit, plan),
    )

    if not result.ok:
        logger.debug(f"{layer.name}: replay of {plan.mapper.value} failed: {result}")

    return result
