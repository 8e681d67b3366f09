from typing import Optional

from .geometry import *
from .policy import PrunePolicy, DEFAULT_POLICY
from .baselines import map_img2col, map_sdk, search_vw_sdk, map_vwc_sdk
from .tetris import tetris_pipeline
from .grouping import tetrisg_search


def map_layer(
    mapper: Mapper,
    layer: LayerSpec,
    array: ArrayConfig,
    groups: Optional[int] = None,
    policy: PrunePolicy = DEFAULT_POLICY,
    serialized: bool = False,
) -> MappingPlan:
    """
    Dispatch to a mapper; only TetrisG re-groups the layer
    """

    if mapper == Mapper.IMG2COL:
        return map_img2col(layer, array, serialized)

    if mapper == Mapper.SDK:
        return map_sdk(layer, array, serialized)

    if mapper == Mapper.VW_SDK:
        return search_vw_sdk(layer, array, serialized)

    if mapper == Mapper.VWC_SDK:
        return map_vwc_sdk(layer, array, policy, serialized)

    if mapper == Mapper.TETRIS:
        return tetris_pipeline(layer, array, policy, serialized)

    assert mapper == Mapper.TETRISG, f"unknown mapper {mapper}"
    return tetrisg_search(layer, array, layer.groups if groups is None else groups, policy, serialized)
