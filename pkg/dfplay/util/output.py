"""Module defining the console printer shared by every command, and the
loggers that library modules write debug detail to.

Commands talk to the user through ``echo``. Every event type carries a prefix,
a colour and a priority, and events above the current verbosity are dropped.
Loggers from ``newLogger`` stay quiet below verbosity 3, so a long simulation
does not drown its own progress lines.
"""

import re
from datetime import datetime as dt
from logging import DEBUG, Formatter, getLogger, Logger, StreamHandler, WARNING
from typing import Any, Callable, Dict, Iterable, List, overload, TextIO, Tuple, Union


NOCOLOR = lambda s: s
ANSI = re.compile(r"\x1b(\[[0-9;]*[A-Za-z]|\(B)")


try:
    # noinspection PyPackageRequirements
    from blessings import Terminal
except ImportError:

    class Terminal:
        def __getattr__(self, attr):
            return NOCOLOR


T = Terminal()

fmt = Formatter(
    "<%(asctime)s.%(msecs)03d> :: %(name)s // %(levelname)s: %(message)s", "%H:%M:%S"
)
ch = StreamHandler()
ch.setFormatter(fmt)

_loggers: List[Logger] = []


def _level(verbosity: int) -> int:
    return DEBUG if verbosity >= 3 else WARNING


def newLogger(name: str = "") -> Logger:
    logger = getLogger(name.upper())
    if ch not in logger.handlers:
        logger.addHandler(ch)
    logger.setLevel(_level(P.verbosity))
    logger.propagate = False
    if logger not in _loggers:
        _loggers.append(logger)
    return logger


colors: Dict[str, Tuple[Callable[[str], str], str, int]] = {
    "": (T.white, "", 1),
    "run": (T.bold_cyan, " >>", 1),
    "done": (T.bold_green, "\\o/", 1),
    "pass": (T.green, "[+]", 1),
    "fail": (T.bold_red, "[-]", 1),
    "err": (T.bold_magenta, "x!x", 1),
    "warn": (T.bold_yellow, "<!>", 2),
    "info": (T.cyan, "(!)", 2),
    "tab": (T.white, "   ", 2),
    "file": (T.bold_black, "-->", 2),
    "step": (T.white, " . ", 3),
    "dbug": (T.yellow, "[!]", 3),
}


hl_key = T.bold_yellow
hl_value = T.bold_magenta

res_bad = T.red
res_good = T.green


def verdict(ok: bool) -> str:
    return res_good("yes") if ok else res_bad("no")


def plain_text(text: str) -> str:
    """Text with terminal escapes removed, for log files."""
    return ANSI.sub("", text)


class _Printer:
    """Writes events to the console with the time elapsed since startup, and
        mirrors every event, whatever its priority, to ``file`` when set.
    """

    __slots__ = (
        "file",
        "output_line",
        "startup",
        "verbosity",
    )

    def __init__(self, verbosity: int = 2):
        self.file: Union[TextIO, None] = None
        self.output_line = print
        self.startup: dt = dt.utcnow()
        self.verbosity: int = verbosity

    def elapsed(self, now: dt = None) -> float:
        return ((now or dt.utcnow()) - self.startup).total_seconds()

    def emit(self, etype: str, text: str, color=None):
        now = dt.utcnow()
        p_color, prefix, pri = colors.get(etype) or (T.white, etype, 4)

        if self.file:
            print(
                f"<{now.isoformat(sep=' ')[:-3]}> {etype or '-'}: {plain_text(text)}",
                file=self.file,
                flush=True,
            )
        if pri <= self.verbosity:
            self.output_line(
                f"<{self.elapsed(now):>8.2f}s> {p_color(prefix)} {(color or NOCOLOR)(text)}"
            )


P = _Printer()


@overload
def echo(text: Union[str, List[str]], color=""):
    ...


@overload
def echo(etype: str, text: Union[str, List[str]], color=""):
    ...


def echo(etype: str, text: Union[str, List[str]] = None, color=""):
    if text is None:
        etype, text = "info", etype

    if isinstance(text, list):
        for line in text:
            P.emit(etype, line, color)
    else:
        P.emit(etype, text, color)


def table(rows: Iterable[Tuple[str, Any]], etype: str = "tab"):
    """Echo ``key: value`` rows with the keys padded to one width. Floats are
        shown to six significant digits.
    """
    rows = list(rows)
    width = max((len(key) for key, _ in rows), default=0)
    for key, value in rows:
        shown = f"{value:.6g}" if isinstance(value, float) else str(value)
        echo(etype, f"{hl_key(key.ljust(width))}  {shown}")


def err(text: str, exc: BaseException = None):
    if exc is not None:
        text += f" {type(exc).__name__}: {exc}"
    echo("err", text, T.red)


def warn(text: str, exc: BaseException = None):
    if exc is not None:
        text += f" {type(exc).__name__}: {exc}"
    echo("warn", text, T.bright_yellow)


def set_verbosity(n: int):
    """0 prints only failures and results, 2 is the default, 3 and up also
        turns on library debug logging.
    """
    P.verbosity = n
    for logger in _loggers:
        logger.setLevel(_level(n))
