from typing import Optional


class MappingError(Exception):
    """
    Base class of every error raised while validating, mapping or reporting
    a layer
    """


class LayerError(MappingError): ...


class ArrayError(MappingError): ...


class WindowError(MappingError): ...


class PruneBudgetError(MappingError): ...


class DepthWindowError(MappingError): ...


class SearchSpaceError(MappingError): ...


class ReportError(MappingError): ...


class ParseError(MappingError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")
