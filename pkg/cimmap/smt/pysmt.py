from typing import Any

from pysmt.shortcuts import ( # type: ignore
    FreshSymbol,
    And, Or, Not, Equals, LE,
    Int, Times,
    Solver,
)
from pysmt.typing import INT # type: ignore


SMTTerm = Any
SMTModel = Any
SMTVariable = Any


def IntRange(variable: SMTVariable, lower: int, upper: int) -> SMTTerm:
    """
    lower <= variable <= upper
    """
    return And(LE(Int(lower), variable), LE(variable, Int(upper)))
