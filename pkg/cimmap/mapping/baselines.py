"""
Uniform-window mappers: img2col, SDK, VW-SDK and its channel-pruning
variant VWC-SDK
"""

from typing import Tuple, Optional, Iterable
from dataclasses import replace

import logging

from ..errors import WindowError, PruneBudgetError
from .geometry import *
from .metrics import *
from .policy import PrunePolicy, DEFAULT_POLICY, check_prune_budget


logger = logging.getLogger(__name__)


def build_plan(
    layer: LayerSpec,
    array: ArrayConfig,
    mapper: Mapper,
    tiles: Iterable[TilePlan],
    pruned_in: int = 0,
    serialized: bool = False,
    groups: Optional[int] = None,
    budget_exceeded: bool = False,
) -> MappingPlan:
    return MappingPlan(
        layer,
        array,
        mapper,
        tuple(tiles),
        layer.groups if groups is None else groups,
        pruned_in,
        serialized,
        budget_exceeded,
    )


def map_img2col(layer: LayerSpec, array: ArrayConfig, serialized: bool = False) -> MappingPlan:
    """
    One K x K window per output pixel, stacking as many channels as the
    rows allow
    """
    validate_layer(layer, array)
    unit = layer.per_group()
    tile = uniform_tile(unit, array, unit.kernel, unit.kernel)
    return build_plan(layer, array, Mapper.IMG2COL, (tile,), serialized=serialized)


def map_sdk(layer: LayerSpec, array: ArrayConfig, serialized: bool = False) -> MappingPlan:
    """
    The largest square window that holds every input channel at once;
    without one, the square split into equal row tiles with the fewest
    cycles
    """

    validate_layer(layer, array)
    unit = layer.per_group()

    size = None
    for candidate in range(min(unit.in_h, unit.in_w), unit.kernel - 1, -1):
        if unit.in_channels * candidate * candidate > array.rows:
            continue
        if output_channel_tile(array.cols, candidate, candidate, unit.kernel, array.weight_bits) < 1:
            continue
        size = candidate
        break

    if size is None:
        return build_plan(layer, array, Mapper.SDK, (_row_tiled_sdk(unit, array),), serialized=serialized)

    logger.debug(f"{layer.name}: SDK window {size}x{size}")
    tile = uniform_tile(unit, array, size, size)
    return build_plan(layer, array, Mapper.SDK, (tile,), serialized=serialized)


def _row_tiled_sdk(unit: LayerSpec, array: ArrayConfig) -> TilePlan:
    # (cycles, -size), size, ic tile
    best: Optional[Tuple[Tuple[int, int], int, int]] = None

    for size in range(unit.kernel, min(unit.in_h, unit.in_w) + 1):
        per_tile = array.rows // (size * size)
        oc_tile = min(unit.out_channels, output_channel_tile(array.cols, size, size, unit.kernel, array.weight_bits))
        if per_tile < 1 or oc_tile < 1:
            continue

        row_tiles = ceil_div(unit.in_channels, per_tile)
        ic_tile = ceil_div(unit.in_channels, row_tiles)
        cycles = padded_window_count(unit.in_h, unit.in_w, size, size, unit.kernel) * \
                 row_tiles * ceil_div(unit.out_channels, oc_tile)

        key = cycles, -size
        if best is None or key < best[0]:
            best = key, size, ic_tile

    assert best is not None, f"no feasible square window for {unit.name}"
    _, size, ic_tile = best

    tile = uniform_tile(unit, array, size, size)
    window = replace(tile.window, ic_tile=ic_tile)
    logger.debug(f"{unit.name}: SDK falls back to {window} over {ceil_div(unit.in_channels, ic_tile)} row tiles")
    return make_tile(window, 0, unit.in_channels, unit.out_channels, tile.placements)


def vw_candidates(layer: LayerSpec) -> Iterable[Tuple[int, int]]:
    """
    Window shapes (height, width) in search order
    """
    for height in range(layer.kernel, layer.in_h + 1):
        for width in range(layer.kernel, layer.in_w + 1):
            yield height, width


def search_vw_sdk(layer: LayerSpec, array: ArrayConfig, serialized: bool = False) -> MappingPlan:
    """
    Exhaustively search the rectangular window minimizing the cycles when
    the same window is used for every channel tile. The first minimum in
    search order wins.
    """

    validate_layer(layer, array)
    unit = layer.per_group()

    best: Optional[Tuple[int, int, int]] = None

    for height, width in vw_candidates(unit):
        cycles = uniform_cycles(unit, array, height, width)
        if cycles is not None and (best is None or cycles < best[0]):
            best = cycles, height, width

    assert best is not None, f"no feasible window for {layer.name}"
    _, height, width = best

    tile = uniform_tile(unit, array, height, width)
    logger.debug(f"{layer.name}: VW-SDK window {tile.window} with {best[0]} cycles")
    return build_plan(layer, array, Mapper.VW_SDK, (tile,), serialized=serialized)


def map_vwc_sdk(
    layer: LayerSpec,
    array: ArrayConfig,
    policy: PrunePolicy = DEFAULT_POLICY,
    serialized: bool = False,
) -> MappingPlan:
    """
    The VW-SDK window with the residual input channel tile (IC mod the
    window's channel tile) dropped, if it fits the layer's prune budget.
    A residual over budget is kept and flagged on the plan.
    """

    validate_layer(layer, array)
    unit = layer.per_group()

    vw_tile = search_vw_sdk(layer, array).tiles[0]
    window = vw_tile.window

    budget = policy.input_budget(layer.name, unit.in_channels)
    residual = unit.in_channels % window.ic_tile if unit.in_channels > window.ic_tile else 0

    pruned_in = 0
    budget_exceeded = False
    try:
        pruned_in = check_prune_budget(layer.name, residual, budget)
    except PruneBudgetError as e:
        logger.warning(str(e))
        budget_exceeded = True

    tile = make_tile(
        window, 0,
        unit.in_channels - pruned_in, unit.out_channels,
        vw_tile.placements, pruned_in,
    )

    if pruned_in:
        logger.info(f"{layer.name}: VWC-SDK drops {pruned_in} input channels ({tile_cycles(tile)} cycles)")

    return build_plan(
        layer, array, Mapper.VWC_SDK, (tile,), pruned_in, serialized,
        budget_exceeded=budget_exceeded,
    )
