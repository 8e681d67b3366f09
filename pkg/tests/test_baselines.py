from typing import List
from fractions import Fraction

from cimmap import *

from .base import TestCase, CNN8, ARRAY_512, TOY_LAYER, TOY_ARRAY


INCEPTION = load_network("inception")


class TestUniformMappers(TestCase):
    def test_img2col(self) -> None:
        plan = map_img2col(TOY_LAYER, TOY_ARRAY)
        self.assertEqual(plan.window_tuples, ("3x3x4x3",))
        self.assertEqual(plan.cycles, 18)
        self.assertReplays(plan)

    def test_sdk_row_tiled_fallback(self) -> None:
        # 5 channels never fit a window larger than 3x3 in 40 rows, so the
        # 3x3 window takes 2 equal row tiles of 3 channels
        plan = map_sdk(TOY_LAYER, TOY_ARRAY)
        self.assertEqual(plan.window_tuples, ("3x3x3x3",))
        self.assertEqual(plan.tiles[0].row_tiles, 2)
        self.assertEqual(plan.cycles, 18)
        self.assertReplays(plan)

    def test_sdk_square_window(self) -> None:
        plan = map_sdk(LayerSpec("sq", 6, 6, 3, 2, 4), ArrayConfig(72, 64))
        self.assertEqual(plan.tiles[0].window.width, 6)
        self.assertEqual(plan.tiles[0].window.height, 6)
        self.assertEqual(plan.cycles, 1)
        self.assertReplays(plan)

    def test_sdk_cnn8(self) -> None:
        plans = tuple(map_sdk(layer, ARRAY_512) for layer in CNN8.layers)

        self.assertEqual(self.cycles_per_layer(plans), [ 64, 64, 16, 18, 18, 4 ])
        self.assertEqual(
            [ plan.window_tuples[0] for plan in plans ],
            [ "4x4x24x32", "4x4x32x32", "4x4x32x64", "4x4x32x64", "4x4x32x64", "5x5x16x256" ],
        )

        for plan in plans:
            self.assertReplays(plan)

    def test_vw_sdk_toy_layer(self) -> None:
        plan = search_vw_sdk(TOY_LAYER, TOY_ARRAY)
        self.assertEqual(plan.window_tuples, ("3x3x4x3",))
        self.assertEqual(plan.cycles, 18)

    def test_vw_sdk_cnn8(self) -> None:
        plans = [ search_vw_sdk(layer, ARRAY_512) for layer in CNN8.layers ]

        self.assertEqual(self.cycles_per_layer(tuple(plans)), [ 32, 48, 14, 15, 15, 4 ])
        self.assertEqual(sum(plan.cycles for plan in plans), 128)
        self.assertEqual(
            [ plan.window_tuples[0] for plan in plans ],
            [ "10x4x12x32", "8x4x16x32", "9x3x18x64", "7x3x24x64", "7x3x24x64", "5x5x20x256" ],
        )

        for plan in plans:
            self.assertReplays(plan)

    def test_vw_sdk_beats_baselines(self) -> None:
        for network in (CNN8, INCEPTION):
            for layer in network.layers:
                vw = search_vw_sdk(layer, ARRAY_512).cycles
                self.assertLessEqual(vw, map_sdk(layer, ARRAY_512).cycles, str(layer))
                self.assertLessEqual(vw, map_img2col(layer, ARRAY_512).cycles, str(layer))

    def test_vw_search_order(self) -> None:
        layer = LayerSpec("tie", 6, 6, 3, 1, 1)
        shapes = list(vw_candidates(layer))
        self.assertEqual(shapes[0], (3, 3))
        self.assertEqual(shapes[1], (3, 4))
        self.assertEqual(shapes[-1], (6, 6))
        self.assertEqual(len(shapes), 16)


class TestToyLayer(TestCase):
    # The walkthrough figures for this layer are img2col 18, SDK 24, VW-SDK 24,
    # VWC-SDK 12 and Tetris 14; see DESIGN.md for why SDK, VW-SDK, VWC-SDK and
    # Tetris come out differently here. TetrisG needs an even channel count.
    def test_every_mapper(self) -> None:
        pruning = PrunePolicy().with_fraction(Fraction(1, 5))

        self.assertEqual(map_img2col(TOY_LAYER, TOY_ARRAY).cycles, 18)
        self.assertEqual(map_sdk(TOY_LAYER, TOY_ARRAY).cycles, 18)
        self.assertEqual(search_vw_sdk(TOY_LAYER, TOY_ARRAY).cycles, 18)
        self.assertEqual(map_vwc_sdk(TOY_LAYER, TOY_ARRAY, pruning).cycles, 9)
        self.assertEqual(tetris_pipeline(TOY_LAYER, TOY_ARRAY).cycles, 18)
        self.assertEqual(brute_force_best_plan(TOY_LAYER, TOY_ARRAY, "tetris").cycles, 18)

        with self.assertRaises(LayerError):
            tetrisg_search(TOY_LAYER, TOY_ARRAY, 2)


class TestInception(TestCase):
    def cycles(self, mapper: Mapper, **kwargs) -> List[int]:
        return [ map_layer(mapper, layer, ARRAY_512, **kwargs).cycles for layer in INCEPTION.layers ]

    def test_img2col_and_sdk(self) -> None:
        self.assertEqual(self.cycles(Mapper.IMG2COL), [ 576, 1152, 100, 200, 200, 200, 200, 18 ])
        self.assertEqual(self.cycles(Mapper.SDK), [ 576, 432, 100, 50, 50, 72, 75, 12 ])

        sdk = [ map_sdk(layer, ARRAY_512).window_tuples[0] for layer in INCEPTION.layers ]
        self.assertEqual(sdk, [
            "5x5x16x32", "8x8x8x32", "5x5x16x48", "6x6x12x64",
            "6x6x12x64", "8x8x8x32", "6x6x11x128", "7x7x8x56",
        ])

    def test_vw_sdk(self) -> None:
        plans = tuple(search_vw_sdk(layer, ARRAY_512) for layer in INCEPTION.layers)

        self.assertEqual(self.cycles_per_layer(plans), [ 72, 360, 20, 40, 40, 60, 75, 9 ])
        self.assertEqual(sum(self.cycles_per_layer(plans)), 676)
        self.assertEqual([ plan.window_tuples[0] for plan in plans ], [
            "8x8x8x32", "9x5x11x96", "9x6x9x48", "7x6x12x64",
            "7x6x12x64", "9x5x11x64", "6x6x14x128", "7x5x14x128",
        ])

    def test_reported_vw_windows(self) -> None:
        # the reported VW-SDK windows cost 687 under the same counting, not
        # the reported total of 627; 3a and 5a differ from the search
        reported = [
            "9x7x8x32", "9x5x11x96", "9x6x9x48", "7x6x12x64",
            "7x6x12x64", "9x5x11x64", "6x6x14x128", "6x5x17x128",
        ]
        cycles = [ self.reported_cycles(layer, window) for layer, window in zip(INCEPTION.layers, reported) ]
        self.assertEqual(cycles, [ 80, 360, 20, 40, 40, 60, 75, 12 ])
        self.assertEqual(sum(cycles), 687)

    def test_vwc_sdk(self) -> None:
        plans = tuple(map_vwc_sdk(layer, ARRAY_512) for layer in INCEPTION.layers)

        self.assertEqual(sum(self.cycles_per_layer(plans)), 676)
        self.assertEqual(
            [ plan.layer.name for plan in plans if plan.budget_exceeded ],
            [ "3b", "4a", "4d", "4e", "5a" ],
        )

    def test_tetris(self) -> None:
        plans = tuple(tetris_pipeline(layer, ARRAY_512) for layer in INCEPTION.layers)

        self.assertEqual(self.cycles_per_layer(plans), [ 72, 360, 20, 36, 36, 49, 75, 8 ])
        self.assertEqual(sum(self.cycles_per_layer(plans)), 656)
        self.assertEqual(plans[5].window_tuples, ("7x6x12x64", "8x6x8x64"))
        self.assertEqual(plans[7].window_tuples, ("5x6x17x128", "6x6x14x128"))
        self.assertEqual(plans[7].pruned_in, 1)

        unpruned = [ tetris_pipeline(layer, ARRAY_512, PrunePolicy.none()).cycles for layer in INCEPTION.layers ]
        self.assertEqual(sum(unpruned), 656)

        for plan in plans:
            self.assertReplays(plan)

    def test_tetrisg(self) -> None:
        self.assertEqual(self.cycles(Mapper.TETRISG, groups=2), [ 36, 118, 8, 14, 14, 16, 26, 4 ])


class TestVWC(TestCase):
    def test_default_budget_prunes_nothing(self) -> None:
        plan = map_vwc_sdk(TOY_LAYER, TOY_ARRAY)
        self.assertEqual(plan.cycles, 18)
        self.assertEqual(plan.total_pruned_channels, 0)
        self.assertTrue(plan.budget_exceeded)

    def test_over_budget_residual_is_logged(self) -> None:
        with self.assertLogs("cimmap.mapping.baselines", level="WARNING") as logs:
            map_vwc_sdk(TOY_LAYER, TOY_ARRAY)
        self.assertIn("prune budget exceeded", logs.output[0])

    def test_residual_channel_within_budget(self) -> None:
        plan = map_vwc_sdk(TOY_LAYER, TOY_ARRAY, PrunePolicy().with_fraction(Fraction(1, 5)))
        self.assertEqual(plan.cycles, 9)
        self.assertEqual(plan.pruned_in, 1)
        self.assertFalse(plan.budget_exceeded)
        self.assertEqual(plan.window_tuples, ("3x3x4x3",))
        self.assertReplays(plan)

    def test_no_residual_matches_vw_sdk(self) -> None:
        layer = CNN8.get_layer("2")
        vwc = map_vwc_sdk(layer, ARRAY_512)
        vw = search_vw_sdk(layer, ARRAY_512)
        self.assertEqual(vwc.cycles, vw.cycles)
        self.assertEqual(vwc.window_tuples, vw.window_tuples)
        self.assertEqual(vwc.total_pruned_channels, 0)
        self.assertFalse(vwc.budget_exceeded)

    def test_cnn8_default_budget(self) -> None:
        plans = tuple(map_vwc_sdk(layer, ARRAY_512) for layer in CNN8.layers)

        self.assertEqual(sum(self.cycles_per_layer(plans)), 128)
        self.assertEqual([ plan.layer.name for plan in plans if plan.budget_exceeded ], [ "4", "5", "6", "7" ])

    def test_cnn8_large_budget(self) -> None:
        # 44% lets layer 4 drop its 14 residual channels; no budget reaches
        # the reported 109, which also drops output channels
        policy = PrunePolicy().with_fraction(Fraction(44, 100))
        plans = tuple(map_vwc_sdk(layer, ARRAY_512, policy) for layer in CNN8.layers)

        self.assertEqual(self.cycles_per_layer(plans), [ 32, 48, 7, 10, 10, 3 ])
        self.assertEqual(sum(plan.cycles for plan in plans), 110)
        self.assertEqual([ plan.pruned_in for plan in plans ], [ 0, 0, 14, 16, 16, 4 ])
        self.assertFalse(any(plan.budget_exceeded for plan in plans))

        for plan in plans:
            self.assertReplays(plan)

    def test_vwc_never_worse(self) -> None:
        policy = PrunePolicy().with_fraction(Fraction(1, 4))
        for layer in CNN8.layers:
            self.assertLessEqual(map_vwc_sdk(layer, ARRAY_512, policy).cycles, search_vw_sdk(layer, ARRAY_512).cycles)


class TestPrunePolicy(TestCase):
    def test_round_half_up(self) -> None:
        self.assertEqual(round_half_up(Fraction(1, 2)), 1)
        self.assertEqual(round_half_up(Fraction(3, 2)), 2)
        self.assertEqual(round_half_up(Fraction(149, 100)), 1)
        self.assertEqual(round_half_up(Fraction(0)), 0)

    def test_budgets(self) -> None:
        policy = PrunePolicy()
        self.assertEqual(policy.input_budget("2", 24), 1)
        self.assertEqual(policy.input_budget("5", 64), 2)
        self.assertEqual(PrunePolicy.none().input_budget("5", 64), 0)

        overridden = PrunePolicy(overrides=(LayerBudget("7", Fraction(7, 100)),))
        self.assertEqual(overridden.input_budget("7", 64), 4)
        self.assertEqual(overridden.input_budget("6", 64), 2)

    def test_check_prune_budget(self) -> None:
        self.assertEqual(check_prune_budget("4", 2, 2), 2)
        with self.assertRaisesRegex(PruneBudgetError, "prune budget exceeded"):
            check_prune_budget("4", 3, 2)
