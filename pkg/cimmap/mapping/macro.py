"""
Mapping a network onto a grid of r x c macros that fire together
"""

from typing import Tuple, Optional, Sequence
from dataclasses import dataclass
from fractions import Fraction

import logging

from .geometry import *
from .metrics import ceil_div, cycles_multi, active_macros, kernels_per_window
from .policy import PrunePolicy, DEFAULT_POLICY
from .registry import map_layer


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridResult:
    grid: MacroGrid
    plans: Tuple[MappingPlan, ...]

    @property
    def cycles(self) -> int:
        return self.grid.cycles_multi

    @property
    def active_macros(self) -> int:
        return self.grid.active_macros


def enumerate_grids(max_macros: int) -> Tuple[Tuple[int, int], ...]:
    """
    Every (r, c) with r * c <= max_macros, rows first
    """
    assert max_macros >= 1, f"invalid macro budget {max_macros}"
    return tuple(
        (rows, cols)
        for rows in range(1, max_macros + 1)
        for cols in range(1, max_macros // rows + 1)
    )


def macros_spanned(plan: MappingPlan, macro: ArrayConfig) -> int:
    """
    Macros a plan made for a virtual array actually touches
    """
    kernel = plan.unit.kernel
    return max(
        ceil_div(tile.window.ic_tile * tile.window.area, macro.rows) *
        ceil_div(tile.window.oc_tile * kernels_per_window(tile.window.height, tile.window.width, kernel) * macro.weight_bits, macro.cols)
        for tile in plan.tiles
    )


def macro_search(
    network: Sequence[LayerSpec],
    array: ArrayConfig,
    max_macros: int,
    mapper: Mapper = Mapper.TETRIS,
    groups: Optional[int] = None,
    policy: PrunePolicy = DEFAULT_POLICY,
    serialized: bool = False,
) -> GridResult:
    """
    Find the macro grid minimizing the network's cycles. On every grid,
    each layer takes the cheaper of its plan re-searched on the combined
    array and its single-macro plan with the tiles spread over the grid.
    Ties prefer fewer active macros, then fewer grid rows.
    """

    assert len(network) != 0, "empty network"

    single = tuple(map_layer(mapper, layer, array, groups, policy, serialized) for layer in network)
    best: Optional[Tuple[Tuple[int, int, int, int], GridResult]] = None

    for rows, cols in enumerate_grids(max_macros):
        if (rows, cols) == (1, 1):
            virtual = single
        else:
            virtual = tuple(
                map_layer(mapper, layer, array.scaled(rows, cols), groups, policy, serialized)
                for layer in network
            )

        total = 0
        active = 0
        plans = []

        for spread, combined in zip(single, virtual):
            options = (
                (cycles_multi(spread, (rows, cols)), active_macros(spread, (rows, cols)), spread),
                (combined.cycles, macros_spanned(combined, array), combined),
            )
            cycles, macros, plan = min(options, key=lambda option: option[:2])
            total += cycles
            active = max(active, macros)
            plans.append(plan)

        result = GridResult(MacroGrid(rows, cols, total, active), tuple(plans))
        key = total, active, rows, cols
        logger.debug(f"grid {rows}x{cols}: {total} cycles on {active} active macro(s)")

        if best is None or key < best[0]:
            best = key, result

    assert best is not None
    return best[1]


def edap_proxy(grid: MacroGrid, array: ArrayConfig) -> int:
    """
    Uncalibrated energy-delay-area proxy: delay ~ cycles, energy ~
    cycles x active macros, area ~ cells of the active macros

    The grid comes out of macro_search and already carries the cycles
    and active macros of the plans mapped on it, so no plan is passed.
    """
    return grid.cycles_multi ** 2 * grid.active_macros * (array.rows * array.cols * grid.active_macros)


def edap_ratio(grid: MacroGrid, baseline: MacroGrid, array: ArrayConfig) -> Fraction:
    return Fraction(edap_proxy(grid, array), edap_proxy(baseline, array))
