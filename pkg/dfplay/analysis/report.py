"""Module defining the TheoryReport, the serializable summary of every check
run against a game or a set of runs.
"""

from json import dumps
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Tuple, Union

import numpy as np

from ..normal_form import JSON_OPTS
from ..util import Check, echo, hl_value, table, verdict


def plain(value: Any) -> Any:
    """Recursively turn numpy values into JSON-ready builtins."""
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return plain(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return str(value)
    return value


class TheoryReport:
    """Named checks, fitted constants, violation counts, q samples and the
        basin verdict.

    Every flag in ``flags`` is the ``ok`` of the check with the same name.
    """

    __slots__ = (
        "subject",
        "facts",
        "checks",
        "constants",
        "violations",
        "q_samples",
        "basin",
    )

    def __init__(self, subject: str = ""):
        self.subject: str = subject
        self.facts: Dict[str, Any] = {}
        self.checks: List[Check] = []
        self.constants: Dict[str, float] = {}
        self.violations: Dict[str, List[int]] = {}
        self.q_samples: List[Tuple[float, float]] = []
        self.basin: Optional[dict] = None

    def add(self, *checks: Check) -> "TheoryReport":
        self.checks.extend(checks)
        return self

    def fact(self, key: str, value: Any) -> "TheoryReport":
        self.facts[key] = value
        return self

    @property
    def flags(self) -> Dict[str, bool]:
        return {c.name: c.ok for c in self.checks}

    @property
    def ok(self) -> bool:
        return all(self.checks)

    def failed(self) -> List[Check]:
        return [c for c in self.checks if not c]

    def print(self):
        if self.subject:
            echo("info", f"Report for {hl_value(self.subject)}")
        table([*self.facts.items(), *self.constants.items()])
        for check in self.checks:
            echo(
                "pass" if check else "fail",
                f"{check.name}: {verdict(check.ok)} ({check.message})",
            )

    def __iter__(self) -> Iterator[Tuple[str, object]]:
        yield "subject", self.subject
        yield "facts", plain(self.facts)
        yield "flags", self.flags
        yield "checks", [plain(dict(c)) for c in self.checks]
        yield "constants", plain(self.constants)
        yield "violations", plain(self.violations)
        yield "q_samples", plain(self.q_samples)
        if self.basin is not None:
            yield "basin", plain(self.basin)

    def __str__(self) -> str:
        return dumps(dict(self), **JSON_OPTS)

    def write(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(dumps(dict(self), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path
