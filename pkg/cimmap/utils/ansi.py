from typing import Any, Callable, List, TextIO, Optional

import os
import sys


class ANSIStyler(type):
    RESET = "\033[0m"

    COLOR_CODES = {
        "red": 31,
        "green": 32,
        "yellow": 33,
        "blue": 34,
        "gray": 90,
    }

    STYLE_CODES = {
        "bold": 1,
    }

    def get_code(class_obj, styles: List[str]) -> str:
        """
        A sequence of colors and styles, e.g. in_bold_red
        """
        codes = []
        for style in styles:
            if style in ANSIStyler.COLOR_CODES:
                codes.append(f"\033[{ANSIStyler.COLOR_CODES[style]}m")
            else:
                assert style in ANSIStyler.STYLE_CODES, f"ANSI style {style} not found"
                codes.append(f"\033[{ANSIStyler.STYLE_CODES[style]}m")
        return "".join(codes)

    def __getattr__(class_obj, key: str) -> Any:
        if key.startswith("in_"):
            styles = key[len("in_"):].split("_")

            def f(msg: str) -> str:
                if not ANSI.supports_color():
                    return msg
                return f"{class_obj.get_code(styles)}{msg}{ANSIStyler.RESET}"

            return f

        raise AttributeError(key)


class ANSI(metaclass=ANSIStyler):
    Colorizer = Callable[[str], str]

    stream: Optional[TextIO] = None

    @staticmethod
    def supports_color() -> bool:
        """
        Color only when writing to a terminal that is not a bare Windows console
        """
        stream = ANSI.stream if ANSI.stream is not None else sys.stdout
        supported_platform = sys.platform != "win32" or "ANSICON" in os.environ
        is_a_tty = hasattr(stream, "isatty") and stream.isatty()
        return supported_platform and is_a_tty and "NO_COLOR" not in os.environ

    @staticmethod
    def status(ok: bool, message: str) -> str:
        return ANSI.in_green(f"[ok] {message}") if ok else ANSI.in_bold_red(f"[mismatch] {message}")
