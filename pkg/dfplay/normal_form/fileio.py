"""Reading and writing game files.

A game file is a JSON object::

    {
        "name": "coordination",
        "n_agents": 2,
        "n_actions": 2,
        "utilities": [[1, 0, 0, 1], [1, 0, 0, 1]],
        "mixed_equilibria": [[[0.5, 0.5], [0.5, 0.5]]]
    }

``utilities`` holds one flat array per agent in row-major profile order (agent
0 slowest). ``name`` and ``mixed_equilibria`` are optional; the latter lists
known mixed equilibria, since only pure ones are ever computed.
"""

from json import dumps, JSONDecodeError, loads
from pathlib import Path
from typing import Iterator, List, Sequence, Tuple, Union

import numpy as np

from ..exc import ShapeError
from . import as_matrix, JSON_OPTS, NormalFormGame


class GameFile:
    __slots__ = (
        "name",
        "game",
        "mixed_equilibria",
    )

    def __init__(
        self,
        game: NormalFormGame,
        name: str = "",
        mixed_equilibria: Sequence[np.ndarray] = (),
    ):
        self.game: NormalFormGame = game
        self.name: str = name
        self.mixed_equilibria: List[np.ndarray] = [
            as_matrix(m, game.n_agents, game.n_actions) for m in mixed_equilibria
        ]

    @classmethod
    def decode(cls, text: str) -> "GameFile":
        try:
            data = loads(text)
        except JSONDecodeError as e:
            raise ShapeError(f"Game file is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise ShapeError("Game file must hold a JSON object.")

        try:
            game = NormalFormGame.from_dict(data)
            mixed = [np.array(m, float) for m in data.get("mixed_equilibria") or []]
            return cls(game, str(data.get("name", "")), mixed)
        except ShapeError:
            raise
        except (TypeError, ValueError) as e:
            raise ShapeError(f"Malformed game file: {e}") from e

    def __iter__(self) -> Iterator[Tuple[str, object]]:
        if self.name:
            yield "name", self.name
        yield from self.game
        if self.mixed_equilibria:
            yield "mixed_equilibria", [m.tolist() for m in self.mixed_equilibria]

    def __str__(self) -> str:
        return dumps(dict(self), **JSON_OPTS)


def load_game(path: Union[str, Path]) -> GameFile:
    return GameFile.decode(Path(path).read_text(encoding="utf-8"))


def save_game(game: Union[GameFile, NormalFormGame], path: Union[str, Path]) -> Path:
    if isinstance(game, NormalFormGame):
        game = GameFile(game)
    path = Path(path)
    path.write_text(str(game) + "\n", encoding="utf-8")
    return path
