"""
Geometry of a convolution layer, of the CIM array it is mapped onto,
and of the plans the mappers produce
"""

from typing import Tuple, Optional, Dict, Iterable
from dataclasses import dataclass
from fractions import Fraction
from enum import Enum

import re

from ..errors import LayerError, ArrayError, WindowError


@dataclass(frozen=True)
class LayerSpec:
    """
    A stride-1 convolution with a square K x K kernel
    """

    name: str
    in_h: int
    in_w: int
    kernel: int
    in_channels: int
    out_channels: int
    groups: int = 1

    @property
    def out_h(self) -> int:
        return self.in_h - self.kernel + 1

    @property
    def out_w(self) -> int:
        return self.in_w - self.kernel + 1

    def per_group(self, groups: Optional[int] = None) -> "LayerSpec":
        """
        The layer seen by a single group: IC/G -> OC/G
        """
        groups = self.groups if groups is None else groups
        if groups < 1 or self.in_channels % groups != 0 or self.out_channels % groups != 0:
            raise LayerError(f"{self.name}: group does not divide channels (G = {groups})")
        return LayerSpec(
            self.name, self.in_h, self.in_w, self.kernel,
            self.in_channels // groups, self.out_channels // groups, 1,
        )

    def __str__(self) -> str:
        return f"{self.name}({self.in_h}x{self.in_w}, K={self.kernel}, {self.in_channels}->{self.out_channels}, G={self.groups})"


@dataclass(frozen=True)
class Network:
    name: str
    layers: Tuple[LayerSpec, ...]

    def get_layer(self, name: str) -> LayerSpec:
        for layer in self.layers:
            if layer.name == name:
                return layer
        raise LayerError(f"layer {name} not found in {self.name}")


@dataclass(frozen=True)
class ArrayConfig:
    rows: int
    cols: int
    weight_bits: int = 1
    max_macros: int = 1

    ARRAY_PATTERN = re.compile(r"^\s*([1-9][0-9]*)\s*[xX]\s*([1-9][0-9]*)\s*$")

    @property
    def weight_columns(self) -> int:
        """
        Number of weights a single row can hold
        """
        return self.cols // self.weight_bits

    def scaled(self, rows: int, cols: int) -> "ArrayConfig":
        """
        The virtual array formed by a rows x cols grid of macros
        """
        return ArrayConfig(self.rows * rows, self.cols * cols, self.weight_bits, 1)

    @staticmethod
    def parse(src: str, weight_bits: int = 1, max_macros: int = 1) -> "ArrayConfig":
        match = ArrayConfig.ARRAY_PATTERN.match(src)
        if match is None:
            raise ArrayError(f"invalid array size {src!r}, expecting ARxAC")
        return ArrayConfig(int(match.group(1)), int(match.group(2)), weight_bits, max_macros)

    def __str__(self) -> str:
        return f"{self.rows}x{self.cols}"


class WindowKind(Enum):
    REGULAR = "regular"
    SQUARE = "square"
    MARGINAL = "marginal"
    DEPTH = "depth"


class Mapper(Enum):
    IMG2COL = "img2col"
    SDK = "sdk"
    VW_SDK = "vw_sdk"
    VWC_SDK = "vwc_sdk"
    TETRIS = "tetris"
    TETRISG = "tetrisg"

    @staticmethod
    def parse(name: str) -> "Mapper":
        normalized = name.strip().lower().replace("-", "_")
        for mapper in Mapper:
            if mapper.value == normalized:
                return mapper
        raise LayerError(f"unknown mapper {name!r}")


@dataclass(frozen=True)
class ParallelWindow:
    """
    A parallel window of width x height input pixels holding ic_tile
    input channels and oc_tile output channels in one activation of the
    array it was fitted to. Construction fails unless the window holds
    the kernel and both channel tiles fit the array.
    """

    width: int
    height: int
    ic_tile: int
    oc_tile: int
    kernel: int
    array: ArrayConfig
    kind: WindowKind = WindowKind.REGULAR

    def __post_init__(self) -> None:
        if min(self.kernel, self.ic_tile, self.oc_tile) < 1 or min(self.width, self.height) < self.kernel:
            raise WindowError(f"infeasible window {self} for a {self.kernel}x{self.kernel} kernel")

        if self.ic_tile * self.area > self.array.rows:
            raise WindowError(f"window {self} needs {self.ic_tile * self.area} rows of a {self.array} array")

        columns = self.oc_tile * self.kernel_positions * self.array.weight_bits
        if columns > self.array.cols:
            raise WindowError(f"window {self} needs {columns} columns of a {self.array} array")

    @property
    def area(self) -> int:
        return self.width * self.height

    @property
    def kernel_positions(self) -> int:
        return (self.height - self.kernel + 1) * (self.width - self.kernel + 1)

    def __str__(self) -> str:
        return f"{self.width}x{self.height}x{self.ic_tile}x{self.oc_tile}"


@dataclass(frozen=True)
class Placement:
    """
    Top-left input pixel of one window activation and the actual extent
    of the window there
    """

    row: int
    col: int
    height: int
    width: int


@dataclass(frozen=True)
class TilePlan:
    """
    One window shape applied to the channel range
    [channel_offset, channel_offset + channels) at every placement
    """

    window: ParallelWindow
    channel_offset: int
    channels: int
    out_channels: int
    row_tiles: int
    col_tiles: int
    placements: Tuple[Placement, ...]
    channels_pruned: int = 0

    @property
    def n_windows(self) -> int:
        return len(self.placements)

    @property
    def partition(self) -> Tuple[int, int]:
        return self.channel_offset, self.channels


@dataclass(frozen=True)
class MappingPlan:
    layer: LayerSpec
    array: ArrayConfig
    mapper: Mapper
    tiles: Tuple[TilePlan, ...]
    groups: int = 1
    pruned_in: int = 0
    serialized: bool = False
    # the residual channels exceeded the prune budget and were kept
    budget_exceeded: bool = False

    @property
    def unit(self) -> LayerSpec:
        return self.layer.per_group(self.groups)

    @property
    def total_pruned_channels(self) -> int:
        return self.pruned_in

    @property
    def n_marginal(self) -> int:
        return sum(tile.n_windows for tile in self.tiles if tile.window.kind == WindowKind.MARGINAL)

    @property
    def partitions(self) -> Dict[Tuple[int, int], Tuple[TilePlan, ...]]:
        groups: Dict[Tuple[int, int], Tuple[TilePlan, ...]] = {}
        for tile in self.tiles:
            groups[tile.partition] = groups.get(tile.partition, ()) + (tile,)
        return groups

    @property
    def window_tuples(self) -> Tuple[str, ...]:
        """
        Distinct non-marginal windows in tile order
        """
        seen = []
        for tile in self.tiles:
            if tile.window.kind == WindowKind.MARGINAL:
                continue
            if str(tile.window) not in seen:
                seen.append(str(tile.window))
        return tuple(seen)

    @property
    def cycles(self) -> int:
        from .metrics import cycles_single
        return cycles_single(self)

    @property
    def utilization(self) -> Fraction:
        from .metrics import array_utilization
        return array_utilization(self)


@dataclass(frozen=True)
class MacroGrid:
    rows: int
    cols: int
    cycles_multi: int = 0
    active_macros: int = 0

    @property
    def size(self) -> int:
        return self.rows * self.cols

    def __str__(self) -> str:
        return f"{self.rows}x{self.cols}"


def validate_array(array: ArrayConfig) -> ArrayConfig:
    if min(array.rows, array.cols, array.weight_bits, array.max_macros) < 1:
        raise ArrayError(f"array fields must be positive: {array}")
    if array.cols < array.weight_bits:
        raise ArrayError(f"array has fewer columns ({array.cols}) than weight bits ({array.weight_bits})")
    return array


def validate_layer(layer: LayerSpec, array: Optional[ArrayConfig] = None) -> LayerSpec:
    """
    Check the geometric invariants of a layer (and that it can be mapped
    onto the array at all, if one is given)
    """

    if min(layer.in_h, layer.in_w, layer.kernel, layer.in_channels, layer.out_channels, layer.groups) < 1:
        raise LayerError(f"{layer.name}: layer fields must be positive")

    if layer.kernel > min(layer.in_h, layer.in_w):
        raise LayerError(f"{layer.name}: kernel exceeds IFM")

    if layer.in_channels % layer.groups != 0 or layer.out_channels % layer.groups != 0:
        raise LayerError(f"{layer.name}: group does not divide channels")

    if array is not None:
        validate_array(array)
        if array.rows < layer.kernel * layer.kernel:
            raise ArrayError(f"{layer.name}: array rows {array.rows} cannot hold a {layer.kernel}x{layer.kernel} kernel")

    return layer


def validate_layers(layers: Iterable[LayerSpec], array: Optional[ArrayConfig] = None) -> Tuple[LayerSpec, ...]:
    return tuple(validate_layer(layer, array) for layer in layers)
