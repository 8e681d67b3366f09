"""
Brute-force search over window shapes, enumerated as the models of an
SMT template, with its own placement and cost arithmetic
"""

from typing import TypeVar, Set, Tuple, List, Optional, Dict

import logging

from ..errors import SearchSpaceError
from ..smt import smt
from ..template import Template, WindowShapeTemplate
from ..mapping.geometry import *


logger = logging.getLogger(__name__)


S = TypeVar("S")

SEARCH_SPACES = ("uniform", "tetris")


def enumerate_values(template: Template[S], solver_name: str = "z3") -> Set[S]:
    """
    Enumerate all values in a finite template
    """

    values: Set[S] = set()

    with smt.Solver(name=solver_name) as solver:
        solver.add_assertion(template.get_constraint())

        while solver.solve():
            value = template.get_from_smt_model(solver.get_model())
            solver.add_assertion(smt.Not(template.equals(value)))
            values.add(value)

    return values


def _divide_up(a: int, b: int) -> int:
    quotient = a // b
    return quotient + 1 if quotient * b < a else quotient


def _window(layer: LayerSpec, array: ArrayConfig, height: int, width: int, channels: int, kind: WindowKind) -> Optional[ParallelWindow]:
    kernel = layer.kernel
    positions = (height - kernel + 1) * (width - kernel + 1)
    ic_tile = min(channels, array.rows // (height * width))
    oc_tile = min(layer.out_channels, (array.cols // array.weight_bits) // positions)
    if ic_tile < 1 or oc_tile < 1:
        return None
    return ParallelWindow(width, height, ic_tile, oc_tile, kernel, array, kind)


def _tile(window: ParallelWindow, offset: int, channels: int, out_channels: int, placements: List[Placement]) -> TilePlan:
    return TilePlan(
        window, offset, channels, out_channels,
        _divide_up(channels, window.ic_tile),
        _divide_up(out_channels, window.oc_tile),
        tuple(placements),
    )


def _cost(tiles: Tuple[TilePlan, ...]) -> int:
    return sum(len(tile.placements) * tile.row_tiles * tile.col_tiles for tile in tiles)


def _starts(extent: int, window: int, kernel: int, overhang: bool) -> List[int]:
    """
    Window start positions along one axis: whole windows only, or until
    every output is reached (the last window may then overhang)
    """

    stride = window - kernel + 1
    starts = [0]
    while True:
        start = starts[-1] + stride
        if overhang:
            if starts[-1] + window >= extent:
                break
        elif start + window > extent:
            break
        starts.append(start)
    return starts


def uniform_realization(layer: LayerSpec, array: ArrayConfig, height: int, width: int) -> Optional[Tuple[TilePlan, ...]]:
    window = _window(layer, array, height, width, layer.in_channels, WindowKind.REGULAR)
    if window is None:
        return None

    rows = _starts(layer.in_h, height, layer.kernel, True)
    cols = _starts(layer.in_w, width, layer.kernel, True)
    placements = [ Placement(row, col, height, width) for row in rows for col in cols ]
    return _tile(window, 0, layer.in_channels, layer.out_channels, placements),


def marginal_realization(
    layer: LayerSpec,
    array: ArrayConfig,
    height: int,
    width: int,
    offset: int,
    channels: int,
    kind: WindowKind,
) -> Optional[Tuple[TilePlan, ...]]:
    """
    Whole windows plus border strips: the right strip over the rows the
    whole windows reach, the bottom strip over the full width, each strip
    window keeping at most the main window's area and kernel positions
    """

    kernel = layer.kernel
    area = height * width
    positions = (height - kernel + 1) * (width - kernel + 1)

    window = _window(layer, array, height, width, channels, kind)
    if window is None:
        return None

    rows = _starts(layer.in_h, height, kernel, False)
    cols = _starts(layer.in_w, width, kernel, False)
    end_row = rows[-1] + height - kernel + 1
    end_col = cols[-1] + width - kernel + 1

    tiles = [
        _tile(window, offset, channels, layer.out_channels,
              [ Placement(row, col, height, width) for row in rows for col in cols ]),
    ]

    strips = []

    if end_col < layer.out_w:
        thickness = layer.out_w - end_col
        strip_width = thickness + kernel - 1
        span = min(area // strip_width - kernel + 1, end_row, positions // thickness)
        placements = []
        row = 0
        while row < end_row:
            step = min(span, end_row - row)
            placements.append(Placement(row, end_col, step + kernel - 1, strip_width))
            row += step
        strips.append((span + kernel - 1, strip_width, placements))

    if end_row < layer.out_h:
        thickness = layer.out_h - end_row
        strip_height = thickness + kernel - 1
        span = min(area // strip_height - kernel + 1, layer.out_w, positions // thickness)
        placements = []
        col = 0
        while col < layer.out_w:
            step = min(span, layer.out_w - col)
            placements.append(Placement(end_row, col, strip_height, step + kernel - 1))
            col += step
        strips.append((strip_height, span + kernel - 1, placements))

    for strip_height, strip_width, placements in strips:
        marginal = _window(layer, array, strip_height, strip_width, channels, WindowKind.MARGINAL)
        if marginal is None:
            return None
        tiles.append(_tile(marginal, offset, channels, layer.out_channels, placements))

    return tuple(tiles)


def brute_force_best_plan(
    layer: LayerSpec,
    array: ArrayConfig,
    search_space: str = "uniform",
    bound: int = 10 ** 7,
    solver_name: str = "z3",
) -> MappingPlan:
    """
    The cheapest plan of a search space

    - uniform: one window shape for all channels, null-padded borders
    - tetris: one main window realized with marginal windows on all
      channels, or on its full partitions plus a residual partition with
      a window of its own (no pruning)
    """

    if search_space not in SEARCH_SPACES:
        raise SearchSpaceError(f"unknown search space {search_space!r}")

    validate_layer(layer, array)
    unit = layer.per_group()

    shapes = sorted(enumerate_values(WindowShapeTemplate(unit, array, 1), solver_name))
    candidates = len(shapes) if search_space == "uniform" else len(shapes) * (len(shapes) + 1)

    if candidates > bound:
        raise SearchSpaceError(f"{layer.name}: instance too large ({candidates} candidates > {bound})")

    logger.debug(f"{layer.name}: {len(shapes)} window shapes, {candidates} candidates")

    best: Optional[Tuple[int, Tuple[TilePlan, ...]]] = None

    if search_space == "uniform":
        for height, width in shapes:
            tiles = uniform_realization(unit, array, height, width)
            if tiles is not None and (best is None or _cost(tiles) < best[0]):
                best = _cost(tiles), tiles

        assert best is not None, f"no feasible window for {layer.name}"
        return MappingPlan(layer, array, Mapper.VW_SDK, best[1], layer.groups)

    # cheapest realization of the residual partition, per residual count
    residual_best: Dict[int, Optional[Tuple[int, Tuple[TilePlan, ...]]]] = {}

    for height, width in shapes:
        single = marginal_realization(unit, array, height, width, 0, unit.in_channels, WindowKind.REGULAR)
        if single is None:
            continue
        if best is None or _cost(single) < best[0]:
            best = _cost(single), single

        ic_tile = min(unit.in_channels, array.rows // (height * width))
        full = unit.in_channels // ic_tile
        residual = unit.in_channels - full * ic_tile
        if residual == 0:
            continue

        if residual not in residual_best:
            residual_best[residual] = None
            # the column constraint does not depend on the channel count
            residual_shapes = [ (h, w) for h, w in shapes if residual * h * w <= array.rows ]
            for residual_height, residual_width in residual_shapes:
                rest = marginal_realization(
                    unit, array, residual_height, residual_width,
                    full * ic_tile, residual, WindowKind.DEPTH,
                )
                current = residual_best[residual]
                if rest is not None and (current is None or _cost(rest) < current[0]):
                    residual_best[residual] = _cost(rest), rest

        rest_best = residual_best[residual]
        main = marginal_realization(unit, array, height, width, 0, full * ic_tile, WindowKind.REGULAR)
        if rest_best is None or main is None:
            continue

        if _cost(main) + rest_best[0] < best[0]:
            best = _cost(main) + rest_best[0], main + rest_best[1]

    assert best is not None, f"no feasible window for {layer.name}"
    return MappingPlan(layer, array, Mapper.TETRIS, best[1], layer.groups)
