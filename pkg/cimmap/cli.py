"""
Command-line entry point: map a network with several mappers and print
the comparison
"""

from typing import List, Optional, Sequence
from fractions import Fraction

import argparse
import logging
import sys

from .errors import MappingError
from .mapping import ArrayConfig, Mapper, PrunePolicy, AccuracyTable
from .oracle import simulate_coverage
from .parser import load_network, load_accuracy_table, load_prune_policy
from .report import run_comparison, emit_report, CostReport, FORMATS
from .utils.ansi import ANSI


logger = logging.getLogger(__name__)


DEFAULT_MAPPERS = "img2col,sdk,vw_sdk,vwc_sdk,tetris"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cimmap",
        description="Search parallel-window mappings of CNN layers onto compute-in-memory arrays",
    )
    parser.add_argument("--network", required=True,
                        help="network file (name,I_h,I_w,K,IC,OC[,G] rows) or a bundled network: cnn8, inception, densenet40, toy")
    parser.add_argument("--array", default="512x512", help="array size ARxAC (default: 512x512)")
    parser.add_argument("--weight-bits", type=int, default=1, help="columns per weight (default: 1)")
    parser.add_argument("--macros", type=int, default=1, help="maximum number of macros (default: 1)")
    parser.add_argument("--mapper", default=DEFAULT_MAPPERS,
                        help=f"comma-separated mappers out of {', '.join(mapper.value for mapper in Mapper)} (default: {DEFAULT_MAPPERS})")
    parser.add_argument("--group", default=None, help="group count G for tetrisg, or 'sweep'")
    parser.add_argument("--accuracy-table", default=None, help="layer,G,accuracy delta %% rows gating the group sweep")
    parser.add_argument("--prune-budget", type=Fraction, default=Fraction(3), help="channels a layer may drop, in percent (default: 3)")
    parser.add_argument("--prune-policy", default=None, help="file of per-layer layer,input %% prune budgets")
    parser.add_argument("--serialize-groups", action="store_true", help="run the groups of a grouped layer one after another")
    parser.add_argument("--format", choices=FORMATS, default="table")
    parser.add_argument("--oracle", action="store_true", help="replay every plan and check coverage and cycles")
    parser.add_argument("--grid-search", action="store_true", help="search the best macro grid for each mapper")
    parser.add_argument("-v", "--verbose", action="store_true", help="print search decisions")
    return parser


def check_report(report: CostReport) -> int:
    """
    Replay every plan of the report; returns the number of disagreements
    """

    failures = 0
    ANSI.stream = sys.stderr

    for mapper, plans in zip(report.mappers, report.plans):
        for plan in plans:
            result = simulate_coverage(plan.layer, plan)
            ok = result.ok and result.replay_cycles == plan.cycles
            failures += 0 if ok else 1

            message = f"{mapper.value} {plan.layer.name}: {result.replay_cycles} replayed / {plan.cycles} cycles"
            if len(result.out_of_bounds) != 0:
                message += f", {len(result.out_of_bounds)} padded window(s)"
            if not ok:
                message += f" ({'; '.join(result.capacity_violations) or result.partition_error or 'outputs not covered'})"
            print(ANSI.status(ok, message), file=sys.stderr)

    return failures


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    try:
        array = ArrayConfig.parse(args.array, args.weight_bits, args.macros)
        network = load_network(args.network)
        mappers: List[Mapper] = [ Mapper.parse(name) for name in args.mapper.split(",") if name.strip() != "" ]

        policy = PrunePolicy().with_fraction(args.prune_budget / 100)
        if args.prune_policy is not None:
            policy = load_prune_policy(args.prune_policy, policy)

        accuracy_table = AccuracyTable() if args.accuracy_table is None else load_accuracy_table(args.accuracy_table)

        sweep = args.group == "sweep"
        groups = None if args.group is None or sweep else int(args.group)

        report = run_comparison(
            network, array, mappers,
            groups=groups,
            policy=policy,
            max_macros=args.macros if args.grid_search else 1,
            sweep=sweep,
            accuracy_table=accuracy_table,
            serialized=args.serialize_groups,
        )

        sys.stdout.write(emit_report(report, args.format))

    except (MappingError, ValueError, AssertionError) as e:
        print(ANSI.in_red(f"error: {e}"), file=sys.stderr)
        return 2

    if args.oracle and check_report(report) != 0:
        return 1

    return 0
