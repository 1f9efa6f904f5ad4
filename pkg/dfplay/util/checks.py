"""Module defining the result type shared by every assumption and bound check."""

from typing import Any, Iterator, Tuple


class Check:
    """A named boolean verdict with a short message and the data behind it."""

    __slots__ = (
        "name",
        "ok",
        "message",
        "data",
    )

    def __init__(self, name: str, ok: bool, message: str = "", data: Any = None):
        self.name: str = name
        self.ok: bool = bool(ok)
        self.message: str = message
        self.data: Any = data

    def __bool__(self) -> bool:
        return self.ok

    def __iter__(self) -> Iterator[Tuple[str, Any]]:
        yield "name", self.name
        yield "ok", self.ok
        yield "message", self.message

        if self.data is not None:
            yield "data", self.data

    def __repr__(self) -> str:
        return f"Check({self.name!r}, {self.ok}, {self.message!r})"
