"""
Compare mappers over a network and render the comparison
"""

from typing import Tuple, Optional, List, Dict, Any, Sequence
from dataclasses import dataclass, field, replace
from fractions import Fraction

import csv
import io
import json
import logging

from .errors import ReportError, ParseError, MappingError
from .mapping import *


logger = logging.getLogger(__name__)


FORMATS = ("table", "csv", "json")

EDAP_DISCLAIMER = "EDAP proxy (uncalibrated): cycles^2 x active macros x active array cells"


@dataclass(frozen=True)
class MapperEntry:
    mapper: Mapper
    windows: Tuple[str, ...]
    cycles: int
    utilization: Fraction
    pruned: int
    groups: int


@dataclass(frozen=True)
class LayerRow:
    layer: LayerSpec
    entries: Tuple[MapperEntry, ...]

    def get_entry(self, mapper: Mapper) -> MapperEntry:
        for entry in self.entries:
            if entry.mapper == mapper:
                return entry
        raise ReportError(f"no {mapper.value} entry for layer {self.layer.name}")


@dataclass(frozen=True)
class MacroEntry:
    mapper: Mapper
    rows: int
    cols: int
    cycles: int
    active_macros: int

    @property
    def grid(self) -> MacroGrid:
        return MacroGrid(self.rows, self.cols, self.cycles, self.active_macros)


@dataclass(frozen=True)
class CostReport:
    network: str
    array: ArrayConfig
    mappers: Tuple[Mapper, ...]
    rows: Tuple[LayerRow, ...]
    macros: Tuple[MacroEntry, ...] = ()
    # plans behind the rows, per mapper; not part of the rendered report
    plans: Tuple[Tuple[MappingPlan, ...], ...] = field(default=(), compare=False, repr=False)

    def total(self, mapper: Mapper) -> int:
        return sum(row.get_entry(mapper).cycles for row in self.rows)

    @property
    def totals(self) -> Tuple[Tuple[Mapper, int], ...]:
        return tuple((mapper, self.total(mapper)) for mapper in self.mappers)

    def speedup(self, mapper: Mapper, baseline: Mapper) -> Fraction:
        """
        How many times fewer cycles mapper needs than baseline
        """
        if self.total(mapper) == 0:
            raise ReportError(f"speedup of {mapper.value} undefined: zero cycles")
        return Fraction(self.total(baseline), self.total(mapper))

    @property
    def speedups(self) -> Tuple[Tuple[Mapper, Mapper, Fraction], ...]:
        """
        Every mapper over every mapper listed before it
        """
        if len(self.rows) == 0:
            return ()
        return tuple(
            (mapper, baseline, self.speedup(mapper, baseline))
            for index, mapper in enumerate(self.mappers)
            for baseline in self.mappers[:index]
        )

    def get_macro(self, mapper: Mapper) -> Optional[MacroEntry]:
        for entry in self.macros:
            if entry.mapper == mapper:
                return entry
        return None

    @property
    def edap_ratios(self) -> Tuple[Tuple[Mapper, Mapper, Fraction], ...]:
        if len(self.macros) < 2:
            return ()
        baseline = self.macros[0]
        return tuple(
            (entry.mapper, baseline.mapper, edap_ratio(entry.grid, baseline.grid, self.array))
            for entry in self.macros[1:]
        )


def regroup(
    network: Network,
    array: ArrayConfig,
    mapper: Mapper,
    groups: Optional[int],
    policy: PrunePolicy,
    serialized: bool,
    sweep: bool,
    accuracy_table: AccuracyTable,
) -> Tuple[LayerSpec, ...]:
    """
    The network's layers with the group count TetrisG should use
    """

    if mapper != Mapper.TETRISG:
        return network.layers

    if sweep:
        return tuple(
            replace(layer, groups=group_sweep(layer, array, None, accuracy_table, policy, serialized))
            for layer in network.layers
        )

    if groups is None:
        return network.layers

    return tuple(replace(layer, groups=groups) for layer in network.layers)


def run_comparison(
    network: Network,
    array: ArrayConfig,
    mappers: Sequence[Mapper],
    groups: Optional[int] = None,
    policy: PrunePolicy = DEFAULT_POLICY,
    max_macros: int = 1,
    sweep: bool = False,
    accuracy_table: AccuracyTable = AccuracyTable(),
    serialized: bool = False,
) -> CostReport:
    """
    Map every layer with every mapper; with more than one macro, also
    search each mapper's best macro grid
    """

    if len(mappers) == 0:
        raise ReportError("no mapper selected")

    if len(network.layers) == 0:
        logger.warning(f"network {network.name} is empty, nothing to compare")

    validate_layers(network.layers, array)

    plans = []
    macros = []

    for mapper in mappers:
        layers = regroup(network, array, mapper, groups, policy, serialized, sweep, accuracy_table)
        mapper_plans = tuple(map_layer(mapper, layer, array, None, policy, serialized) for layer in layers)
        plans.append(mapper_plans)

        if max_macros > 1 and len(layers) != 0:
            result = macro_search(layers, array, max_macros, mapper, None, policy, serialized)
            macros.append(MacroEntry(mapper, result.grid.rows, result.grid.cols, result.cycles, result.active_macros))

    rows = tuple(
        LayerRow(layer, tuple(
            MapperEntry(
                mapper,
                mapper_plans[index].window_tuples,
                mapper_plans[index].cycles,
                mapper_plans[index].utilization,
                mapper_plans[index].total_pruned_channels,
                mapper_plans[index].groups,
            )
            for mapper, mapper_plans in zip(mappers, plans)
        ))
        for index, layer in enumerate(network.layers)
    )

    return CostReport(network.name, array, tuple(mappers), rows, tuple(macros), tuple(plans))


def _percent(value: Fraction) -> str:
    return f"{float(value):.2f}%"


def _speedup(value: Fraction) -> str:
    return f"{float(value):.3f}x"


def _render_table(report: CostReport) -> str:
    header = [ "layer", "IFM", "kernel" ]
    for mapper in report.mappers:
        header += [ f"{mapper.value} window", "cycles", "util", "pruned" ]

    body: List[List[str]] = []
    for row in report.rows:
        layer = row.layer
        cells = [ layer.name, f"{layer.in_h}x{layer.in_w}", f"{layer.kernel}x{layer.kernel}x{layer.in_channels}x{layer.out_channels}" ]
        for entry in row.entries:
            windows = "+".join(entry.windows)
            if entry.groups != 1:
                windows += f" (G={entry.groups})"
            cells += [ windows, str(entry.cycles), _percent(entry.utilization), str(entry.pruned) ]
        body.append(cells)

    footer = [ "total", "", "" ]
    for mapper, total in report.totals:
        footer += [ "", str(total), "", "" ]

    widths = [ max(len(line[column]) for line in [ header ] + body + [ footer ]) for column in range(len(header)) ]

    def render(cells: List[str]) -> str:
        return "  ".join(cell.ljust(width) for cell, width in zip(cells, widths)).rstrip()

    lines = [
        f"network {report.network} on a {report.array} array ({report.array.weight_bits}-bit weights)",
        render(header),
        render([ "-" * width for width in widths ]),
    ]
    lines += [ render(cells) for cells in body ]
    lines.append(render(footer))

    for mapper, baseline, value in report.speedups:
        lines.append(f"speedup of {mapper.value} over {baseline.value}: {_speedup(value)}")

    if len(report.macros) != 0:
        lines.append(f"macro grids (at most {report.array.max_macros} macros):")
        for entry in report.macros:
            lines.append(f"  {entry.mapper.value}: {entry.rows}x{entry.cols} grid, {entry.cycles} cycles, {entry.active_macros} active macro(s)")
        for mapper, baseline, value in report.edap_ratios:
            lines.append(f"  {EDAP_DISCLAIMER}: {mapper.value} / {baseline.value} = {float(value):.4f}")

    return "\n".join(lines) + "\n"


CSV_HEADERS = {
    "report": [ "record", "network", "array", "weight_bits", "max_macros", "mappers" ],
    "entry": [ "record", "layer", "in_h", "in_w", "kernel", "in_channels", "out_channels", "layer_groups",
               "mapper", "windows", "cycles", "utilization", "pruned", "groups" ],
    "macro": [ "record", "mapper", "grid_rows", "grid_cols", "cycles", "active_macros" ],
}


def _render_csv(report: CostReport) -> str:
    output = io.StringIO()
    writer = csv.writer(output, lineterminator="\n")

    array = report.array
    writer.writerow(CSV_HEADERS["report"])
    writer.writerow([ "report", report.network, str(array), array.weight_bits, array.max_macros,
                      ";".join(mapper.value for mapper in report.mappers) ])

    writer.writerow(CSV_HEADERS["entry"])
    for row in report.rows:
        layer = row.layer
        for entry in row.entries:
            writer.writerow([
                "entry", layer.name, layer.in_h, layer.in_w, layer.kernel, layer.in_channels, layer.out_channels, layer.groups,
                entry.mapper.value, ";".join(entry.windows), entry.cycles, str(entry.utilization), entry.pruned, entry.groups,
            ])

    if len(report.macros) != 0:
        writer.writerow(CSV_HEADERS["macro"])
        for macro in report.macros:
            writer.writerow([ "macro", macro.mapper.value, macro.rows, macro.cols, macro.cycles, macro.active_macros ])

    return output.getvalue()


def _render_json(report: CostReport) -> str:
    obj: Dict[str, Any] = {
        "network": report.network,
        "array": {
            "rows": report.array.rows,
            "cols": report.array.cols,
            "weight_bits": report.array.weight_bits,
            "max_macros": report.array.max_macros,
        },
        "mappers": [ mapper.value for mapper in report.mappers ],
        "layers": [
            {
                "name": row.layer.name,
                "ifm": [ row.layer.in_h, row.layer.in_w ],
                "kernel": row.layer.kernel,
                "in_channels": row.layer.in_channels,
                "out_channels": row.layer.out_channels,
                "results": [
                    {
                        "mapper": entry.mapper.value,
                        "windows": list(entry.windows),
                        "cycles": entry.cycles,
                        "utilization": str(entry.utilization),
                        "utilization_pct": round(float(entry.utilization), 4),
                        "pruned": entry.pruned,
                        "groups": entry.groups,
                    }
                    for entry in row.entries
                ],
            }
            for row in report.rows
        ],
        "totals": { mapper.value: total for mapper, total in report.totals },
        "speedups": [
            { "mapper": mapper.value, "baseline": baseline.value, "speedup": str(value) }
            for mapper, baseline, value in report.speedups
        ],
    }

    if len(report.macros) != 0:
        obj["macros"] = [
            {
                "mapper": entry.mapper.value,
                "grid": [ entry.rows, entry.cols ],
                "cycles": entry.cycles,
                "active_macros": entry.active_macros,
            }
            for entry in report.macros
        ]
        obj["edap_proxy"] = {
            "note": EDAP_DISCLAIMER,
            "ratios": [
                { "mapper": mapper.value, "baseline": baseline.value, "ratio": str(value) }
                for mapper, baseline, value in report.edap_ratios
            ],
        }

    return json.dumps(obj, indent=2) + "\n"


def emit_report(report: CostReport, fmt: str = "table") -> str:
    if fmt == "table":
        return _render_table(report)
    if fmt == "csv":
        return _render_csv(report)
    if fmt == "json":
        return _render_json(report)
    raise ReportError(f"unknown format {fmt!r}, expecting one of {', '.join(FORMATS)}")


def parse_report_csv(src: str) -> CostReport:
    """
    Inverse of emit_report(report, "csv")
    """

    header: Optional[List[str]] = None
    network = ""
    array: Optional[ArrayConfig] = None
    mappers: Tuple[Mapper, ...] = ()
    layers: List[LayerSpec] = []
    entries: Dict[str, List[MapperEntry]] = {}
    macros: List[MacroEntry] = []

    for line, fields in enumerate(csv.reader(io.StringIO(src)), 1):
        if len(fields) == 0:
            continue

        record = fields[0]
        if record == "record":
            header = fields
            continue

        if header is None or record not in CSV_HEADERS or header != CSV_HEADERS[record] or len(fields) != len(header):
            raise ParseError(f"unexpected {record!r} record", line)

        values = dict(zip(header, fields))

        try:
            if record == "report":
                network = values["network"]
                array = ArrayConfig.parse(values["array"], int(values["weight_bits"]), int(values["max_macros"]))
                mappers = tuple(Mapper.parse(name) for name in values["mappers"].split(";") if name != "")

            elif record == "entry":
                layer = LayerSpec(
                    values["layer"], int(values["in_h"]), int(values["in_w"]), int(values["kernel"]),
                    int(values["in_channels"]), int(values["out_channels"]), int(values["layer_groups"]),
                )
                if layer.name not in entries:
                    layers.append(layer)
                    entries[layer.name] = []
                entries[layer.name].append(MapperEntry(
                    Mapper.parse(values["mapper"]),
                    tuple(window for window in values["windows"].split(";") if window != ""),
                    int(values["cycles"]),
                    Fraction(values["utilization"]),
                    int(values["pruned"]),
                    int(values["groups"]),
                ))

            else:
                macros.append(MacroEntry(
                    Mapper.parse(values["mapper"]),
                    int(values["grid_rows"]), int(values["grid_cols"]),
                    int(values["cycles"]), int(values["active_macros"]),
                ))

        except (ValueError, MappingError) as e:
            raise ParseError(str(e), line)

    if array is None:
        raise ParseError("missing report record")

    rows = tuple(LayerRow(layer, tuple(entries[layer.name])) for layer in layers)
    return CostReport(network, array, mappers, rows, tuple(macros))
