"""
Tetris-style window search: starting from the best uniform window,
try every window shape on all channels or on full channel partitions
plus a residual one, fill the uncovered borders with marginal windows
and give the residual channels a window of their own
"""

from typing import Tuple, Optional, List, Dict, Iterator
from dataclasses import dataclass

import logging

from ..errors import WindowError, DepthWindowError
from .geometry import *
from .metrics import *
from .policy import PrunePolicy, DEFAULT_POLICY
from .baselines import search_vw_sdk, build_plan, vw_candidates


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MarginalStrip:
    """
    Windows of one border strip; height and width are those of the
    nominal (largest) window of the strip
    """

    height: int
    width: int
    placements: Tuple[Placement, ...]


@dataclass(frozen=True)
class MarginalSet:
    count: int
    strips: Tuple[MarginalStrip, ...]


@dataclass(frozen=True)
class DepthChoice:
    window: Optional[ParallelWindow]
    pruned: int


@dataclass(frozen=True)
class ResidualChoice:
    # (height, width); None when every residual channel is pruned
    shape: Optional[Tuple[int, int]]
    cycles: int
    pruned: int


@dataclass(frozen=True)
class Layout:
    """
    A main window shape applied either to all channels (no residual) or
    to the full partitions, with the residual channels on their own window
    """

    height: int
    width: int
    kind: WindowKind
    cycles: int
    residual: Optional[ResidualChoice] = None


@dataclass(frozen=True)
class _Strip:
    right: bool
    thickness: int
    span: int
    length: int
    offset: int

    def shape(self, kernel: int) -> Tuple[int, int]:
        if self.right:
            return self.span + kernel - 1, self.thickness + kernel - 1
        return self.thickness + kernel - 1, self.span + kernel - 1

    @property
    def count(self) -> int:
        return ceil_div(self.length, self.span)


def factor_pairs(n: int) -> Tuple[Tuple[int, int], ...]:
    return tuple((a, n // a) for a in range(1, n + 1) if n % a == 0)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    divisor = 2
    while divisor * divisor <= n:
        if n % divisor == 0:
            return False
        divisor += 1
    return True


def square_shape(layer: LayerSpec, n_conv: int) -> Optional[Tuple[int, int]]:
    """
    (height, width) of the smallest window computing n_conv kernel
    positions that still fits the IFM
    """

    kernel = layer.kernel
    candidates = [
        ((a + kernel - 1) * (b + kernel - 1), abs(a - b), a, b)
        for a, b in factor_pairs(n_conv)
        if a + kernel - 1 <= layer.in_w and b + kernel - 1 <= layer.in_h
    ]

    if len(candidates) == 0:
        return None

    _, _, a, b = min(candidates)
    return b + kernel - 1, a + kernel - 1


def find_square_window(layer: LayerSpec, array: ArrayConfig, seed: ParallelWindow) -> ParallelWindow:
    """
    Reshape the seed into the window with the same number of kernel
    positions and the smallest footprint, which frees rows for more
    input channels. Returns the seed when no strictly smaller footprint
    exists.
    """

    unit = layer.per_group()
    n_conv = kernels_per_window(seed.height, seed.width, unit.kernel)
    shape = square_shape(unit, n_conv)

    if shape is None or shape[0] * shape[1] >= seed.area:
        return seed

    height, width = shape
    try:
        return fit_window(unit, array, height, width, kind=WindowKind.SQUARE)
    except WindowError:
        return seed


def regular_placements(layer: LayerSpec, height: int, width: int) -> Tuple[Placement, ...]:
    """
    Windows that fit entirely inside the IFM, stride PW - K + 1
    """
    count_parallel_windows(layer.in_h, layer.in_w, height, width, layer.kernel)
    stride_h = height - layer.kernel + 1
    stride_w = width - layer.kernel + 1
    return tuple(
        Placement(row * stride_h, col * stride_w, height, width)
        for row in range((layer.in_h - height) // stride_h + 1)
        for col in range((layer.in_w - width) // stride_w + 1)
    )


def _strip_span(reach: int, length: int, thickness: int, positions: int) -> int:
    span = min(reach, length, positions // thickness)
    assert span >= 1, f"empty marginal span (reach {reach}, length {length})"
    return span


def _strips(layer: LayerSpec, height: int, width: int) -> Tuple[_Strip, ...]:
    kernel = layer.kernel
    area = height * width

    stride_h = height - kernel + 1
    stride_w = width - kernel + 1
    positions = stride_h * stride_w
    covered_h = ((layer.in_h - height) // stride_h + 1) * stride_h
    covered_w = ((layer.in_w - width) // stride_w + 1) * stride_w
    rem_h = layer.out_h - covered_h
    rem_w = layer.out_w - covered_w

    strips: List[_Strip] = []

    if rem_w > 0:
        span = _strip_span(area // (rem_w + kernel - 1) - kernel + 1, covered_h, rem_w, positions)
        strips.append(_Strip(True, rem_w, span, covered_h, covered_w))

    if rem_h > 0:
        span = _strip_span(area // (rem_h + kernel - 1) - kernel + 1, layer.out_w, rem_h, positions)
        strips.append(_Strip(False, rem_h, span, layer.out_w, covered_h))

    return tuple(strips)


def marginal_shapes(layer: LayerSpec, height: int, width: int) -> Tuple[Tuple[int, int, int], ...]:
    """
    (height, width, count) of the nominal window of every border strip
    """
    return tuple(strip.shape(layer.kernel) + (strip.count,) for strip in _strips(layer, height, width))


def find_marginal_windows(layer: LayerSpec, height: int, width: int) -> MarginalSet:
    """
    Cover the outputs that floor-counted windows leave uncovered

    The right strip spans the rows covered by the regular windows and the
    bottom strip spans the full output width, so the corner belongs to the
    bottom strip. Strip windows keep at most the area and the kernel
    positions of the main window, so they hold at least as many channels.
    """

    kernel = layer.kernel
    strips: List[MarginalStrip] = []

    for strip in _strips(layer, height, width):
        starts = range(0, strip.length, strip.span)
        extent = strip.thickness + kernel - 1

        if strip.right:
            placements = tuple(
                Placement(start, strip.offset, min(strip.span, strip.length - start) + kernel - 1, extent)
                for start in starts
            )
        else:
            placements = tuple(
                Placement(strip.offset, start, extent, min(strip.span, strip.length - start) + kernel - 1)
                for start in starts
            )

        strip_height, strip_width = strip.shape(kernel)
        strips.append(MarginalStrip(strip_height, strip_width, placements))

    return MarginalSet(sum(len(strip.placements) for strip in strips), tuple(strips))


def realized_cycles(
    layer: LayerSpec,
    array: ArrayConfig,
    height: int,
    width: int,
    channels: Optional[int] = None,
) -> Optional[int]:
    """
    Cycles of realize_window without building the placements, or None if
    the shape does not fit the array
    """

    channels = layer.in_channels if channels is None else channels

    try:
        window = fit_window(layer, array, height, width, channels)
        marginals = [
            (fit_window(layer, array, strip_height, strip_width, channels, kind=WindowKind.MARGINAL), count)
            for strip_height, strip_width, count in marginal_shapes(layer, height, width)
        ]
    except WindowError:
        return None

    def activations(window: ParallelWindow) -> int:
        return ceil_div(channels, window.ic_tile) * ceil_div(layer.out_channels, window.oc_tile)

    regular = count_parallel_windows(layer.in_h, layer.in_w, height, width, layer.kernel)
    return regular * activations(window) + sum(count * activations(marginal) for marginal, count in marginals)


def realize_window(
    layer: LayerSpec,
    array: ArrayConfig,
    height: int,
    width: int,
    channel_offset: int,
    channels: int,
    kind: WindowKind = WindowKind.REGULAR,
    channels_pruned: int = 0,
) -> Tuple[TilePlan, ...]:
    """
    Tiles covering every output of a channel partition with one window
    shape plus its marginal windows
    """

    window = fit_window(layer, array, height, width, channels, kind=kind)
    tiles = [
        make_tile(window, channel_offset, channels, layer.out_channels,
                  regular_placements(layer, height, width), channels_pruned),
    ]

    for strip in find_marginal_windows(layer, height, width).strips:
        marginal = fit_window(layer, array, strip.height, strip.width, channels, kind=WindowKind.MARGINAL)
        tiles.append(make_tile(marginal, channel_offset, channels, layer.out_channels, strip.placements))

    return tuple(tiles)


def depth_shapes(layer: LayerSpec, n_conv: int) -> Tuple[Tuple[int, int], ...]:
    """
    (height, width) of every window computing n_conv kernel positions
    inside the IFM, smallest footprint first, wider first on ties
    """

    kernel = layer.kernel
    shapes = [
        (b + kernel - 1, a + kernel - 1)
        for a, b in factor_pairs(n_conv)
        if a + kernel - 1 <= layer.in_w and b + kernel - 1 <= layer.in_h
    ]
    return tuple(sorted(shapes, key=lambda shape: (shape[0] * shape[1], -shape[1])))


def find_depth_window(layer: LayerSpec, array: ArrayConfig, remaining: int, prune_budget: int) -> DepthChoice:
    """
    Find a window for the residual channels that uses every column
    (N_conv = AC / OC kernel positions), dropping up to prune_budget of
    the residual channels if the rows cannot hold them otherwise
    """

    unit = layer.per_group()
    max_conv = array.weight_columns // unit.out_channels
    shapes = depth_shapes(unit, max_conv) if max_conv >= 1 else ()

    for pruned in range(0, min(prune_budget, remaining) + 1):
        channels = remaining - pruned

        if channels == 0:
            return DepthChoice(None, pruned)

        for height, width in shapes:
            if channels * height * width <= array.rows:
                window = fit_window(unit, array, height, width, channels, kind=WindowKind.DEPTH)
                return DepthChoice(window, pruned)

    raise DepthWindowError(f"{layer.name}: exhausted without fit ({remaining} residual channels)")


def best_residual_window(layer: LayerSpec, array: ArrayConfig, residual: int, prune_budget: int) -> ResidualChoice:
    """
    The depth window first, then any window shape realized on the
    residual channels alone if it is strictly cheaper
    """

    best: Optional[ResidualChoice] = None

    try:
        depth = find_depth_window(layer, array, residual, prune_budget)
    except DepthWindowError as e:
        logger.debug(str(e))
    else:
        if depth.window is None:
            best = ResidualChoice(None, 0, depth.pruned)
        else:
            shape = depth.window.height, depth.window.width
            cycles = realized_cycles(layer, array, shape[0], shape[1], residual - depth.pruned)
            if cycles is not None:
                best = ResidualChoice(shape, cycles, depth.pruned)

    for height, width in vw_candidates(layer):
        cycles = realized_cycles(layer, array, height, width, residual)
        if cycles is not None and (best is None or cycles < best.cycles):
            best = ResidualChoice((height, width), cycles, 0)

    assert best is not None, f"no window for {residual} residual channels of {layer.name}"
    return best


def main_window_candidates(layer: LayerSpec, array: ArrayConfig, seed: ParallelWindow) -> Tuple[Tuple[int, int, WindowKind], ...]:
    """
    The seed, its square reshape, the square of N_conv - 1 positions when
    N_conv is prime, then every other shape that fits the array
    """

    candidates = [ (seed.height, seed.width, WindowKind.REGULAR) ]

    square = find_square_window(layer, array, seed)
    if square is not seed:
        candidates.append((square.height, square.width, WindowKind.SQUARE))

    n_conv = kernels_per_window(seed.height, seed.width, layer.kernel)
    if is_prime(n_conv):
        # a prime count only factors as a 1 x N strip
        shape = square_shape(layer, n_conv - 1)
        if shape is not None and shape not in [ (height, width) for height, width, _ in candidates ]:
            try:
                fit_window(layer, array, shape[0], shape[1])
                candidates.append((shape[0], shape[1], WindowKind.SQUARE))
            except WindowError:
                pass

    seen = { (height, width) for height, width, _ in candidates }
    for height, width in vw_candidates(layer):
        if (height, width) in seen:
            continue
        try:
            fit_window(layer, array, height, width)
        except WindowError:
            continue
        candidates.append((height, width, WindowKind.REGULAR))

    return tuple(candidates)


def candidate_layouts(
    layer: LayerSpec,
    array: ArrayConfig,
    height: int,
    width: int,
    kind: WindowKind,
    prune_budget: int,
    residuals: Dict[int, ResidualChoice],
) -> Iterator[Layout]:
    """
    The single-partition layout of a main window, then (if the channels
    do not divide evenly) its split into full partitions and a residual.
    residuals memoizes the residual choice per residual channel count.
    """

    single = realized_cycles(layer, array, height, width)
    if single is None:
        return
    yield Layout(height, width, kind, single)

    window = fit_window(layer, array, height, width)
    full, residual = divmod(layer.in_channels, window.ic_tile)
    if residual == 0:
        return

    main = realized_cycles(layer, array, height, width, full * window.ic_tile)
    assert main is not None

    if residual not in residuals:
        residuals[residual] = best_residual_window(layer, array, residual, prune_budget)
    choice = residuals[residual]

    yield Layout(height, width, kind, main + choice.cycles, choice)


def layout_tiles(layer: LayerSpec, array: ArrayConfig, layout: Layout) -> Tuple[TilePlan, ...]:
    channels = layer.in_channels

    if layout.residual is None:
        return realize_window(layer, array, layout.height, layout.width, 0, channels, layout.kind)

    window = fit_window(layer, array, layout.height, layout.width)
    offset = (channels // window.ic_tile) * window.ic_tile
    tiles = realize_window(layer, array, layout.height, layout.width, 0, offset, layout.kind)

    choice = layout.residual
    if choice.shape is None:
        return tiles

    height, width = choice.shape
    return tiles + realize_window(
        layer, array, height, width,
        offset, channels - offset - choice.pruned, WindowKind.DEPTH, choice.pruned,
    )


def tetris_pipeline(
    layer: LayerSpec,
    array: ArrayConfig,
    policy: PrunePolicy = DEFAULT_POLICY,
    serialized: bool = False,
    mapper: Mapper = Mapper.TETRIS,
) -> MappingPlan:
    """
    Map a layer with the VW-SDK window realized inside the IFM, replaced
    by any candidate layout that saves cycles
    """

    validate_layer(layer, array)
    unit = layer.per_group()

    seed = search_vw_sdk(layer, array).tiles[0].window
    seed_cycles = realized_cycles(unit, array, seed.height, seed.width)
    assert seed_cycles is not None, f"{layer.name}: VW-SDK window {seed} has no marginal realization"

    best = Layout(seed.height, seed.width, WindowKind.REGULAR, seed_cycles)
    budget = min(policy.per_partition, policy.input_budget(layer.name, unit.in_channels))
    residuals: Dict[int, ResidualChoice] = {}

    for height, width, kind in main_window_candidates(unit, array, seed):
        for layout in candidate_layouts(unit, array, height, width, kind, budget, residuals):
            if layout.cycles < best.cycles:
                logger.debug(f"{layer.name}: {width}x{height} {kind.value} layout gives {layout.cycles} cycles")
                best = layout

    tiles = layout_tiles(unit, array, best)
    assert sum(tile_cycles(tile) for tile in tiles) == best.cycles, f"{layer.name}: layout cost mismatch"

    pruned = 0 if best.residual is None else best.residual.pruned
    if pruned:
        logger.info(f"{layer.name}: pruned {pruned} residual channel(s)")

    return build_plan(layer, array, mapper, tiles, pruned, serialized=serialized)
