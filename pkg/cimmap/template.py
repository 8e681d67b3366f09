from typing import TypeVar, Generic, Iterable, Tuple

from abc import ABC, abstractmethod

from .smt import smt
from .mapping.geometry import LayerSpec, ArrayConfig


T = TypeVar("T")


class Template(Generic[T], ABC):
    """
    Template[T] is a set of SMT variables whose models are the values of T
    """

    @abstractmethod
    def get_constraint(self) -> smt.SMTTerm: ...

    @abstractmethod
    def equals(self, value: T) -> smt.SMTTerm: ...

    @abstractmethod
    def get_from_smt_model(self, model: smt.SMTModel) -> T: ...


class BoundedIntegerVariable(Template[int]):
    """
    An integer variable with range lower upper
    """

    def __init__(self, lower: int, upper: int):
        assert upper >= lower, f"empty range [{lower}, {upper}]"
        self.lower = lower
        self.upper = upper
        self.variable = smt.FreshSymbol(smt.INT)

    def get_constraint(self) -> smt.SMTTerm:
        return smt.IntRange(self.variable, self.lower, self.upper)

    def get_from_smt_model(self, model: smt.SMTModel) -> int:
        return int(model[self.variable].constant_value()) # type: ignore

    def equals(self, value: int) -> smt.SMTTerm:
        return smt.Equals(self.variable, smt.Int(value))

    def get_range(self) -> Iterable[int]:
        return range(self.lower, self.upper + 1)


class WindowShapeTemplate(Template[Tuple[int, int]]):
    """
    (height, width) of every window inside the IFM that can hold
    `channels` input channels in the array rows and at least one output
    channel in the array columns

    The products are expanded over the (small) range of heights so the
    constraint stays in linear integer arithmetic
    """

    def __init__(self, layer: LayerSpec, array: ArrayConfig, channels: int = 1):
        assert channels >= 1, f"invalid channel count {channels}"
        self.layer = layer
        self.array = array
        self.channels = channels
        self.height = BoundedIntegerVariable(layer.kernel, layer.in_h)
        self.width = BoundedIntegerVariable(layer.kernel, layer.in_w)

    def get_constraint(self) -> smt.SMTTerm:
        kernel = self.layer.kernel
        columns = self.array.weight_columns

        capacity = []
        for height in self.height.get_range():
            rows_per_column = self.channels * height
            kernel_rows = height - kernel + 1
            capacity.append(smt.And(
                self.height.equals(height),
                # channels * height * width <= AR
                smt.LE(smt.Times(smt.Int(rows_per_column), self.width.variable), smt.Int(self.array.rows)),
                # (height - K + 1) * (width - K + 1) <= AC / bits
                smt.LE(
                    smt.Times(smt.Int(kernel_rows), self.width.variable),
                    smt.Int(columns + kernel_rows * (kernel - 1)),
                ),
            ))

        return smt.And(
            self.height.get_constraint(),
            self.width.get_constraint(),
            smt.Or(*capacity),
        )

    def get_from_smt_model(self, model: smt.SMTModel) -> Tuple[int, int]:
        return self.height.get_from_smt_model(model), self.width.get_from_smt_model(model)

    def equals(self, value: Tuple[int, int]) -> smt.SMTTerm:
        height, width = value
        return smt.And(self.height.equals(height), self.width.equals(width))
