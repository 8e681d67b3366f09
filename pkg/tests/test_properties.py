from dataclasses import replace

import logging

from cimmap import *

from .base import TestCase


class TestRandomLayers(TestCase):
    def setUp(self) -> None:
        self.logger = logging.getLogger("cimmap")
        self.level = self.logger.level
        self.logger.setLevel(logging.ERROR)

    def tearDown(self) -> None:
        self.logger.setLevel(self.level)

    def test_mapper_ordering_and_replay(self) -> None:
        for layer, array in self.random_layers(2024, 500):
            img2col = map_img2col(layer, array)
            sdk = map_sdk(layer, array)
            vw = search_vw_sdk(layer, array)
            vwc = map_vwc_sdk(layer, array)
            tetris = tetris_pipeline(layer, array)

            self.assertLessEqual(vw.cycles, sdk.cycles, str(layer))
            self.assertLessEqual(vw.cycles, img2col.cycles, str(layer))
            self.assertLessEqual(vwc.cycles, vw.cycles, str(layer))
            self.assertLessEqual(tetris.cycles, vw.cycles, str(layer))

            for plan in (img2col, sdk, vw, vwc, tetris):
                result = self.assertReplays(plan)
                self.assertEqual(result.null_cells, null_input_cells(plan), str(layer))
                self.assertEqual(cycles_multi(plan, (1, 1)), plan.cycles, str(layer))
                self.assertGreater(plan.utilization, 0)
                self.assertLessEqual(plan.utilization, 100)

    def test_tetris_stays_inside_ifm(self) -> None:
        for layer, array in self.random_layers(99, 500):
            tetris = tetris_pipeline(layer, array)
            result = self.assertReplays(tetris)

            self.assertEqual(result.out_of_bounds, (), str(layer))
            self.assertEqual(result.null_cells, 0, str(layer))
            self.assertEqual(result.duplicate_positions, (), str(layer))

    def test_grouped_layers(self) -> None:
        for layer, array in self.random_layers(5, 500):
            layer = replace(layer, in_channels=layer.in_channels + layer.in_channels % 2, out_channels=layer.out_channels + layer.out_channels % 2)

            plan = tetrisg_search(layer, array, 2)
            result = self.assertReplays(plan)
            self.assertEqual(result.duplicate_positions, (), str(layer))
            self.assertLessEqual(plan.cycles, search_vw_sdk(layer.per_group(2), array).cycles)

            serialized = tetrisg_search(layer, array, 2, serialized=True)
            self.assertEqual(serialized.cycles, 2 * plan.cycles)
            self.assertReplays(serialized)
