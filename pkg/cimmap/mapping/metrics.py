"""
Closed-form window, tile and cycle arithmetic shared by all mappers
"""

from typing import Tuple, Optional, Union
from fractions import Fraction

from ..errors import WindowError
from .geometry import *


GridLike = Union[MacroGrid, Tuple[int, int]]


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def kernels_per_window(height: int, width: int, kernel: int) -> int:
    """
    Number of kernel positions (output pixels) a window computes at once
    """
    if height < kernel or width < kernel:
        raise WindowError(f"window smaller than kernel ({width}x{height} < {kernel}x{kernel})")
    return (height - kernel + 1) * (width - kernel + 1)


def input_channel_tile(rows: int, height: int, width: int) -> int:
    """
    Input channels a window can stack in the array rows; 0 if none fits
    """
    return rows // (height * width)


def output_channel_tile(cols: int, height: int, width: int, kernel: int, weight_bits: int = 1) -> int:
    """
    Output channels that fit the array columns for this window; 0 if none fits
    """
    return (cols // weight_bits) // kernels_per_window(height, width, kernel)


def _check_fits(in_h: int, in_w: int, height: int, width: int, kernel: int) -> None:
    kernels_per_window(height, width, kernel)
    if height > in_h or width > in_w:
        raise WindowError(f"window exceeds IFM ({width}x{height} > {in_w}x{in_h})")


def count_parallel_windows(in_h: int, in_w: int, height: int, width: int, kernel: int, n_marginal: int = 0) -> int:
    """
    Number of whole windows that slide over the IFM with stride
    PW - K + 1 (floor counting), plus the marginal windows covering what
    they leave uncovered
    """
    _check_fits(in_h, in_w, height, width, kernel)
    across = (in_w - width) // (width - kernel + 1) + 1
    down = (in_h - height) // (height - kernel + 1) + 1
    return across * down + n_marginal


def padded_window_count(in_h: int, in_w: int, height: int, width: int, kernel: int) -> int:
    """
    Number of windows needed to cover every output when the border windows
    are padded with null inputs
    """
    _check_fits(in_h, in_w, height, width, kernel)
    return _axis_count(in_h, height, kernel) * _axis_count(in_w, width, kernel)


def uncovered_strip(extent: int, window: int, kernel: int) -> int:
    """
    Output pixels along one axis left uncovered by floor counting
    """
    stride = window - kernel + 1
    return (extent - window) % stride


def _axis_count(extent: int, window: int, kernel: int) -> int:
    return ceil_div(extent - window, window - kernel + 1) + 1


def _axis_starts(extent: int, window: int, kernel: int) -> Tuple[int, ...]:
    stride = window - kernel + 1
    return tuple(index * stride for index in range(_axis_count(extent, window, kernel)))


def padded_placements(layer: LayerSpec, height: int, width: int) -> Tuple[Placement, ...]:
    """
    Uniform tiling where the last window of each axis may overhang the IFM
    """
    _check_fits(layer.in_h, layer.in_w, height, width, layer.kernel)
    return tuple(
        Placement(row, col, height, width)
        for row in _axis_starts(layer.in_h, height, layer.kernel)
        for col in _axis_starts(layer.in_w, width, layer.kernel)
    )


def fit_window(
    layer: LayerSpec,
    array: ArrayConfig,
    height: int,
    width: int,
    channels: Optional[int] = None,
    out_channels: Optional[int] = None,
    kind: WindowKind = WindowKind.REGULAR,
) -> ParallelWindow:
    """
    Build a window whose channel tiles respect both the row and the column
    capacity of the array
    """

    channels = layer.in_channels if channels is None else channels
    out_channels = layer.out_channels if out_channels is None else out_channels
    assert channels >= 1 and out_channels >= 1, f"empty channel range for {layer.name}"

    ic_tile = min(channels, input_channel_tile(array.rows, height, width))
    oc_tile = min(out_channels, output_channel_tile(array.cols, height, width, layer.kernel, array.weight_bits))

    if ic_tile < 1 or oc_tile < 1:
        raise WindowError(f"{width}x{height} window does not fit a {array} array")

    return ParallelWindow(width, height, ic_tile, oc_tile, layer.kernel, array, kind)


def make_tile(
    window: ParallelWindow,
    channel_offset: int,
    channels: int,
    out_channels: int,
    placements: Tuple[Placement, ...],
    channels_pruned: int = 0,
) -> TilePlan:
    assert len(placements) >= 1, "tile without placements"
    return TilePlan(
        window,
        channel_offset,
        channels,
        out_channels,
        ceil_div(channels, window.ic_tile),
        ceil_div(out_channels, window.oc_tile),
        placements,
        channels_pruned,
    )


def uniform_cycles(
    layer: LayerSpec,
    array: ArrayConfig,
    height: int,
    width: int,
    channels: Optional[int] = None,
    out_channels: Optional[int] = None,
) -> Optional[int]:
    """
    Cycles of one window shape applied uniformly (with null padding),
    or None if the shape does not fit the array
    """

    channels = layer.in_channels if channels is None else channels
    out_channels = layer.out_channels if out_channels is None else out_channels

    try:
        window = fit_window(layer, array, height, width, channels, out_channels)
    except WindowError:
        return None

    windows = padded_window_count(layer.in_h, layer.in_w, height, width, layer.kernel)
    return windows * ceil_div(channels, window.ic_tile) * ceil_div(out_channels, window.oc_tile)


def uniform_tile(
    layer: LayerSpec,
    array: ArrayConfig,
    height: int,
    width: int,
    channels: Optional[int] = None,
    out_channels: Optional[int] = None,
    kind: WindowKind = WindowKind.REGULAR,
) -> TilePlan:
    channels = layer.in_channels if channels is None else channels
    out_channels = layer.out_channels if out_channels is None else out_channels
    window = fit_window(layer, array, height, width, channels, out_channels, kind)
    return make_tile(window, 0, channels, out_channels, padded_placements(layer, height, width))


def tile_cycles(tile: TilePlan) -> int:
    return tile.n_windows * tile.row_tiles * tile.col_tiles


def cycles_single(plan: MappingPlan) -> int:
    """
    Array activations of the plan on one macro
    """
    cycles = sum(tile_cycles(tile) for tile in plan.tiles)
    return cycles * plan.groups if plan.serialized else cycles


def _grid_shape(grid: GridLike) -> Tuple[int, int]:
    if isinstance(grid, MacroGrid):
        return grid.rows, grid.cols
    return grid


def cycles_multi(plan: MappingPlan, grid: GridLike) -> int:
    """
    Activations when row tiles are spread over r macros and column
    tiles over c macros that fire together
    """
    rows, cols = _grid_shape(grid)
    cycles = sum(
        tile.n_windows * ceil_div(tile.row_tiles, rows) * ceil_div(tile.col_tiles, cols)
        for tile in plan.tiles
    )
    return cycles * plan.groups if plan.serialized else cycles


def active_macros(plan: MappingPlan, grid: GridLike) -> int:
    rows, cols = _grid_shape(grid)
    return max(min(tile.row_tiles, rows) * min(tile.col_tiles, cols) for tile in plan.tiles)


def _in_bounds(start: int, length: int, extent: int) -> int:
    return max(0, min(start + length, extent) - max(start, 0))


def null_input_cells(plan: MappingPlan) -> int:
    """
    Window cells outside the IFM summed over all placements
    """
    layer = plan.unit
    return sum(
        placement.height * placement.width
        - _in_bounds(placement.row, placement.height, layer.in_h) * _in_bounds(placement.col, placement.width, layer.in_w)
        for tile in plan.tiles
        for placement in tile.placements
    )


def array_utilization(plan: MappingPlan) -> Fraction:
    """
    Share (in percent) of the array cells doing useful work, averaged over
    every activation; null-padded inputs and kernel positions that fall off
    the output do not count
    """

    layer = plan.unit
    kernel = layer.kernel
    weighted = 0

    for tile in plan.tiles:
        for placement in tile.placements:
            cells = _in_bounds(placement.row, placement.height, layer.in_h) * \
                    _in_bounds(placement.col, placement.width, layer.in_w)
            kernels = _in_bounds(placement.row, placement.height - kernel + 1, layer.out_h) * \
                      _in_bounds(placement.col, placement.width - kernel + 1, layer.out_w)
            weighted += cells * tile.channels * kernels * tile.out_channels * plan.array.weight_bits

    cycles = sum(tile_cycles(tile) for tile in plan.tiles)
    return Fraction(weighted * 100, cycles * plan.array.rows * plan.array.cols)
