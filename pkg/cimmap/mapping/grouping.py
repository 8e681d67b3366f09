"""
Grouped convolutions: parameter/operation counts, the grouped Tetris
search and the sweep over group counts under an accuracy gate
"""

from typing import Tuple, Optional, Iterable
from dataclasses import dataclass, replace
from fractions import Fraction

import logging
import math

from ..errors import LayerError
from .geometry import *
from .policy import PrunePolicy, DEFAULT_POLICY
from .tetris import tetris_pipeline


logger = logging.getLogger(__name__)


ACCURACY_GATE = Fraction(-1, 2)


@dataclass(frozen=True)
class GroupedDims:
    in_channels: int
    out_channels: int
    groups: int


@dataclass(frozen=True)
class AccuracyEntry:
    layer: str
    groups: int
    delta: Fraction


@dataclass(frozen=True)
class AccuracyTable:
    """
    Externally measured accuracy change (in percent) of a layer trained
    with G groups; layer "*" applies to every layer
    """

    entries: Tuple[AccuracyEntry, ...] = ()

    def delta(self, layer: str, groups: int) -> Optional[Fraction]:
        fallback = None
        for entry in self.entries:
            if entry.groups != groups:
                continue
            if entry.layer == layer:
                return entry.delta
            if entry.layer == "*":
                fallback = entry.delta
        return fallback

    def admits(self, layer: str, groups: int) -> bool:
        if groups == 1:
            return True
        delta = self.delta(layer, groups)
        return delta is not None and delta >= ACCURACY_GATE


def group_dims(layer: LayerSpec, groups: int) -> GroupedDims:
    if groups < 1 or layer.in_channels % groups != 0 or layer.out_channels % groups != 0:
        raise LayerError(f"{layer.name}: group does not divide channels (G = {groups})")
    return GroupedDims(layer.in_channels // groups, layer.out_channels // groups, groups)


def conv_counts(layer: LayerSpec) -> Tuple[int, int]:
    """
    Weights and multiply-accumulates of the dense convolution
    """
    params = layer.kernel * layer.kernel * layer.in_channels * layer.out_channels
    return params, params * layer.out_h * layer.out_w


def grouped_counts(layer: LayerSpec, groups: int) -> Tuple[int, int]:
    """
    Weights and multiply-accumulates with the channels split into G groups
    """
    dims = group_dims(layer, groups)
    params = layer.kernel * layer.kernel * dims.in_channels * dims.out_channels * groups
    return params, params * layer.out_h * layer.out_w


def tetrisg_search(
    layer: LayerSpec,
    array: ArrayConfig,
    groups: int,
    policy: PrunePolicy = DEFAULT_POLICY,
    serialized: bool = False,
) -> MappingPlan:
    """
    Tetris on one group of a layer re-grouped into G groups; the groups
    run concurrently unless serialized
    """
    group_dims(layer, groups)
    return tetris_pipeline(replace(layer, groups=groups), array, policy, serialized, Mapper.TETRISG)


def default_group_candidates(layer: LayerSpec, limit: int = 8) -> Tuple[int, ...]:
    common = math.gcd(layer.in_channels, layer.out_channels)
    return tuple(groups for groups in range(1, min(common, limit) + 1) if common % groups == 0)


def group_sweep(
    layer: LayerSpec,
    array: ArrayConfig,
    candidates: Optional[Iterable[int]] = None,
    accuracy_table: AccuracyTable = AccuracyTable(),
    policy: PrunePolicy = DEFAULT_POLICY,
    serialized: bool = False,
) -> int:
    """
    The admissible group count with the fewest TetrisG cycles (largest G
    on ties), or 1 if none is admissible
    """

    candidates = default_group_candidates(layer) if candidates is None else tuple(candidates)

    best: Optional[Tuple[int, int]] = None

    for groups in candidates:
        if layer.in_channels % groups != 0 or layer.out_channels % groups != 0:
            logger.debug(f"{layer.name}: G = {groups} does not divide the channels")
            continue

        if not accuracy_table.admits(layer.name, groups):
            logger.debug(f"{layer.name}: G = {groups} fails the accuracy gate")
            continue

        cycles = tetrisg_search(layer, array, groups, policy, serialized).cycles
        logger.debug(f"{layer.name}: G = {groups} needs {cycles} cycles")

        if best is None or cycles < best[0] or (cycles == best[0] and groups > best[1]):
            best = cycles, groups

    if best is None:
        logger.warning(f"{layer.name}: no admissible group, using G = 1")
        return 1

    return best[1]
