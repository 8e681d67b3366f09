from typing import Any, List, Tuple, Union
from dataclasses import dataclass
from fractions import Fraction

import logging
import os

from lark import Lark, Transformer, Token
from lark.exceptions import UnexpectedInput

from ..errors import ParseError, MappingError
from ..mapping.geometry import LayerSpec, Network, validate_layer
from ..mapping.grouping import AccuracyEntry, AccuracyTable
from ..mapping.policy import LayerBudget, PrunePolicy


logger = logging.getLogger(__name__)


NETWORK_DIRECTORY = os.path.join(os.path.dirname(os.path.dirname(__file__)), "networks")


@dataclass(frozen=True)
class Row:
    line: int
    fields: Tuple[str, ...]


class RowTransformer(Transformer):  # type: ignore
    def field(self, args: List[Token]) -> Token:
        return args[0]

    def row(self, args: List[Token]) -> Row:
        return Row(args[0].line, tuple(str(arg) for arg in args))

    def rows(self, args: List[Union[Row, None]]) -> Tuple[Row, ...]:
        return tuple(arg for arg in args if arg is not None)


class Parser:
    """
    Comma-separated row files: networks, accuracy tables and prune
    policies. '#' starts a comment; blank lines are ignored.
    """

    SYNTAX = r"""
        COMMENT: /#[^\n]*/
        FIELD: /[^,#\s]+/

        %ignore COMMENT
        %ignore /[ \t\f\r]+/

        _NL: /\n/

        field: FIELD
        row: field ("," field)*
        rows: [row] (_NL [row])*
    """

    ROWS_PARSER = Lark(
        SYNTAX,
        start="rows",
        parser="lalr",
        lexer="basic",
        maybe_placeholders=True,
        propagate_positions=True,
    )

    @staticmethod
    def parse_rows(src: str) -> Tuple[Row, ...]:
        try:
            ast = Parser.ROWS_PARSER.parse(src)
        except UnexpectedInput as e:
            raise ParseError(f"unexpected input at column {e.column}", e.line)

        rows = RowTransformer().transform(ast)
        assert isinstance(rows, tuple)
        return rows

    @staticmethod
    def parse_natural(row: Row, index: int, what: str) -> int:
        try:
            value = int(row.fields[index])
        except ValueError:
            raise ParseError(f"{what} must be an integer, got {row.fields[index]!r}", row.line)
        if value < 1:
            raise ParseError(f"{what} must be positive, got {value}", row.line)
        return value

    @staticmethod
    def parse_decimal(row: Row, index: int, what: str) -> Fraction:
        try:
            return Fraction(row.fields[index])
        except ValueError:
            raise ParseError(f"{what} must be a number, got {row.fields[index]!r}", row.line)

    @staticmethod
    def parse_network(src: str, name: str = "network") -> Network:
        """
        Rows of name,I_h,I_w,K,IC,OC[,G]
        """

        layers = []

        for row in Parser.parse_rows(src):
            if len(row.fields) not in (6, 7):
                raise ParseError(f"expecting name,I_h,I_w,K,IC,OC[,G], got {len(row.fields)} fields", row.line)

            layer = LayerSpec(
                row.fields[0],
                Parser.parse_natural(row, 1, "I_h"),
                Parser.parse_natural(row, 2, "I_w"),
                Parser.parse_natural(row, 3, "K"),
                Parser.parse_natural(row, 4, "IC"),
                Parser.parse_natural(row, 5, "OC"),
                Parser.parse_natural(row, 6, "G") if len(row.fields) == 7 else 1,
            )

            try:
                validate_layer(layer)
            except MappingError as e:
                raise ParseError(str(e), row.line)

            layers.append(layer)

        if len(layers) == 0:
            logger.warning(f"network {name} has no layers")

        return Network(name, tuple(layers))

    @staticmethod
    def parse_accuracy_table(src: str) -> AccuracyTable:
        """
        Rows of layer,G,accuracy delta in percent
        """

        entries = []
        for row in Parser.parse_rows(src):
            if len(row.fields) != 3:
                raise ParseError(f"expecting layer,G,delta, got {len(row.fields)} fields", row.line)
            entries.append(AccuracyEntry(
                row.fields[0],
                Parser.parse_natural(row, 1, "G"),
                Parser.parse_decimal(row, 2, "accuracy delta"),
            ))
        return AccuracyTable(tuple(entries))

    @staticmethod
    def parse_prune_policy(src: str, default: PrunePolicy = PrunePolicy()) -> PrunePolicy:
        """
        Rows of layer,input %
        """

        overrides = []
        for row in Parser.parse_rows(src):
            if len(row.fields) != 2:
                raise ParseError(f"expecting layer,input %, got {len(row.fields)} fields", row.line)

            percent = Parser.parse_decimal(row, 1, "input budget")
            if not 0 <= percent <= 100:
                raise ParseError(f"budget {percent}% out of [0, 100]", row.line)

            overrides.append(LayerBudget(row.fields[0], percent / 100))

        return PrunePolicy(default.fraction, default.per_partition, tuple(overrides))


def _read(path: str) -> str:
    with open(path) as f:
        return f.read()


def resolve_path(path: str, extension: str = ".csv") -> str:
    """
    A file path, or the name of a file bundled with the package
    """
    if os.path.exists(path):
        return path
    bundled = os.path.join(NETWORK_DIRECTORY, path if path.endswith(extension) else path + extension)
    if os.path.exists(bundled):
        return bundled
    raise ParseError(f"no such file or bundled network: {path}")


def load_network(path: str) -> Network:
    path = resolve_path(path)
    name = os.path.splitext(os.path.basename(path))[0]
    return Parser.parse_network(_read(path), name)


def load_accuracy_table(path: str) -> AccuracyTable:
    return Parser.parse_accuracy_table(_read(resolve_path(path)))


def load_prune_policy(path: str, default: PrunePolicy = PrunePolicy()) -> PrunePolicy:
    return Parser.parse_prune_policy(_read(resolve_path(path)), default)


def format_network(network: Network) -> str:
    """
    Inverse of Parser.parse_network
    """
    lines = [ "# name,I_h,I_w,K,IC,OC,G" ]
    for layer in network.layers:
        lines.append(",".join(str(value) for value in (
            layer.name, layer.in_h, layer.in_w, layer.kernel,
            layer.in_channels, layer.out_channels, layer.groups,
        )))
    return "\n".join(lines) + "\n"
