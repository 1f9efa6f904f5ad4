"""Files emitted by experiments: per-run trajectory CSVs, aggregate CSVs,
summaries, SVG line charts, and a manifest of digests.

Every number is written with ``repr`` of its float value, so rerunning a
configuration reproduces each file byte for byte.
"""

import csv
from json import dumps
from pathlib import Path
from typing import Dict, Iterator, List, Mapping, Sequence, Tuple, Union

import numpy as np

from ..engine import Trajectory
from ..exc import ShapeError
from ..util import echo

try:
    # noinspection PyPackageRequirements
    from nacl.encoding import HexEncoder

    # noinspection PyPackageRequirements
    from nacl.hash import blake2b
except ImportError as ex:
    HexEncoder = None
    blake2b = None

    can_digest: bool = False
    print("Artifact digests could not be enabled:", ex)
else:
    can_digest: bool = True


TRAJECTORY_SCHEMA = "# dfplay-trajectory v1"
AGGREGATE_SCHEMA = "# dfplay-aggregate v1"
Q_SCHEMA = "# dfplay-q v1"

PathLike = Union[str, Path]


def num(x) -> str:
    return repr(float(x))


def trajectory_header(n_agents: int) -> List[str]:
    return (
        ["t"]
        + [f"action_{i}" for i in range(n_agents)]
        + [f"regret_{i}" for i in range(n_agents)]
        + ["potential", "avg_ne_distance", "avg_belief_error"]
    )


def trajectory_rows(trajectory: Trajectory, ne_distance: np.ndarray) -> Iterator[List[str]]:
    for k in range(trajectory.horizon):
        yield (
            [str(k + 1)]
            + [str(int(a)) for a in trajectory.actions[k]]
            + [num(r) for r in trajectory.regrets[k]]
            + [
                num(trajectory.potential[k]),
                num(ne_distance[k]),
                num(trajectory.belief_error[k]),
            ]
        )


def _open_csv(path: PathLike, schema: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd = path.open("w", newline="", encoding="utf-8")
    fd.write(schema + "\n")
    return fd, csv.writer(fd, lineterminator="\n")


def write_trajectory_csv(
    path: PathLike, trajectory: Trajectory, ne_distance: np.ndarray
) -> Path:
    fd, writer = _open_csv(path, TRAJECTORY_SCHEMA)
    with fd:
        writer.writerow(trajectory_header(trajectory.n_agents))
        writer.writerows(trajectory_rows(trajectory, ne_distance))
    return Path(path)


class StoredRun:
    """Columns of a trajectory CSV read back from disk."""

    __slots__ = (
        "path",
        "t",
        "actions",
        "regrets",
        "potential",
        "ne_distance",
        "belief_error",
    )

    def __init__(
        self,
        path: Path,
        t: np.ndarray,
        actions: np.ndarray,
        regrets: np.ndarray,
        potential: np.ndarray,
        ne_distance: np.ndarray,
        belief_error: np.ndarray,
    ):
        self.path: Path = path
        self.t: np.ndarray = t
        self.actions: np.ndarray = actions
        self.regrets: np.ndarray = regrets
        self.potential: np.ndarray = potential
        self.ne_distance: np.ndarray = ne_distance
        self.belief_error: np.ndarray = belief_error

    @property
    def n_agents(self) -> int:
        return self.actions.shape[1]

    @property
    def horizon(self) -> int:
        return len(self.t)


def _read_rows(path: Path, schema: str) -> Tuple[List[str], List[List[str]]]:
    with path.open(newline="", encoding="utf-8") as fd:
        first = fd.readline().rstrip("\n")
        if first != schema:
            raise ShapeError(f"{path}: expected header {schema!r}, found {first!r}.")
        rows = list(csv.reader(fd))
    if not rows:
        raise ShapeError(f"{path}: no column header.")
    return rows[0], rows[1:]


def read_trajectory_csv(path: PathLike) -> StoredRun:
    path = Path(path)
    header, rows = _read_rows(path, TRAJECTORY_SCHEMA)
    n = sum(1 for h in header if h.startswith("action_"))
    if header != trajectory_header(n) or not rows:
        raise ShapeError(f"{path}: columns do not match the trajectory schema.")

    try:
        data = np.array(rows, dtype=float)
    except ValueError as e:
        raise ShapeError(f"{path}: {e}") from e

    return StoredRun(
        path,
        data[:, 0].astype(int),
        data[:, 1 : 1 + n].astype(int),
        data[:, 1 + n : 1 + 2 * n],
        data[:, 1 + 2 * n],
        data[:, 2 + 2 * n],
        data[:, 3 + 2 * n],
    )


def aggregate(series: Sequence[np.ndarray]) -> np.ndarray:
    """Per-step arithmetic mean over runs."""
    return np.vstack(series).mean(axis=0)


def write_aggregate_csv(path: PathLike, columns: Mapping[str, np.ndarray]) -> Path:
    """One row per step; ``columns`` maps column names to per-step values."""
    length = len(next(iter(columns.values())))
    fd, writer = _open_csv(path, AGGREGATE_SCHEMA)
    with fd:
        writer.writerow(["t"] + list(columns))
        for k in range(length):
            writer.writerow([str(k + 1)] + [num(col[k]) for col in columns.values()])
    return Path(path)


def read_aggregate_csv(path: PathLike) -> Dict[str, np.ndarray]:
    path = Path(path)
    header, rows = _read_rows(path, AGGREGATE_SCHEMA)
    data = np.array(rows, dtype=float)
    return {name: data[:, j] for j, name in enumerate(header)}


def write_q_csv(path: PathLike, alphas: Sequence[float], q: Sequence[float]) -> Path:
    fd, writer = _open_csv(path, Q_SCHEMA)
    with fd:
        writer.writerow(["alpha", "q"])
        writer.writerows([num(a), num(v)] for a, v in zip(alphas, q))
    return Path(path)


def write_json(path: PathLike, data) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def svg_line_chart(
    path: PathLike,
    title: str,
    series: Mapping[str, np.ndarray],
    x_label: str = "t",
    y_label: str = "",
    width: int = 640,
    height: int = 400,
) -> Path:
    """A plain SVG line chart with one polyline per series, all sharing the
        x axis ``1 .. len(series)``.
    """
    margin = 56
    plot_w, plot_h = width - 2 * margin, height - 2 * margin

    values = np.concatenate([np.asarray(v, dtype=float) for v in series.values()])
    values = values[np.isfinite(values)]
    y_lo = min(0.0, float(values.min())) if values.size else 0.0
    y_hi = float(values.max()) if values.size else 1.0
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0
    x_hi = max(len(v) for v in series.values())

    def x_of(t: float) -> float:
        return margin + plot_w * (t - 1) / max(x_hi - 1, 1)

    def y_of(v: float) -> float:
        return margin + plot_h * (1 - (v - y_lo) / (y_hi - y_lo))

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}"'
        f' viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="24" text-anchor="middle" font-size="16">{title}</text>',
        f'<line x1="{margin}" y1="{margin + plot_h}" x2="{margin + plot_w}"'
        f' y2="{margin + plot_h}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{margin + plot_h}" stroke="black"/>',
        f'<text x="{margin + plot_w / 2:.1f}" y="{height - 12}" text-anchor="middle"'
        f' font-size="12">{x_label}</text>',
        f'<text x="16" y="{margin + plot_h / 2:.1f}" text-anchor="middle" font-size="12"'
        f' transform="rotate(-90 16 {margin + plot_h / 2:.1f})">{y_label}</text>',
    ]

    for tick in np.linspace(y_lo, y_hi, 5):
        y = y_of(tick)
        out.append(
            f'<text x="{margin - 6}" y="{y + 4:.1f}" text-anchor="end"'
            f' font-size="10">{tick:.3g}</text>'
        )
    for tick in np.linspace(1, x_hi, 5):
        out.append(
            f'<text x="{x_of(tick):.1f}" y="{margin + plot_h + 16}" text-anchor="middle"'
            f' font-size="10">{int(round(tick))}</text>'
        )

    for n, (name, ys) in enumerate(series.items()):
        colour = PALETTE[n % len(PALETTE)]
        points = " ".join(
            f"{x_of(t):.2f},{y_of(v):.2f}"
            for t, v in enumerate(np.asarray(ys, dtype=float), start=1)
            if np.isfinite(v)
        )
        out.append(
            f'<polyline fill="none" stroke="{colour}" stroke-width="1.5"'
            f' points="{points}"/>'
        )
        out.append(
            f'<text x="{margin + plot_w - 4}" y="{margin + 16 + 16 * n}" text-anchor="end"'
            f' font-size="12" fill="{colour}">{name}</text>'
        )

    out.append("</svg>")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(out) + "\n", encoding="utf-8")
    return path


def digest(path: PathLike) -> Union[str, None]:
    """BLAKE2b hex digest of a file, when digests are available."""
    if not can_digest:
        return None
    return blake2b(Path(path).read_bytes(), encoder=HexEncoder).decode("ascii")


def write_manifest(out_dir: PathLike, files: Sequence[PathLike]) -> Path:
    out_dir = Path(out_dir)
    entries = []
    for f in sorted(Path(p) for p in files):
        entries.append(
            {
                "path": f.relative_to(out_dir).as_posix(),
                "size": f.stat().st_size,
                "blake2b": digest(f),
            }
        )
    path = write_json(out_dir / "manifest.json", {"files": entries})
    echo("file", f"Wrote manifest of {len(entries)} files to {path}.")
    return path


__all__ = (
    "aggregate",
    "AGGREGATE_SCHEMA",
    "can_digest",
    "digest",
    "read_aggregate_csv",
    "read_trajectory_csv",
    "StoredRun",
    "svg_line_chart",
    "TRAJECTORY_SCHEMA",
    "trajectory_header",
    "write_aggregate_csv",
    "write_json",
    "write_manifest",
    "write_q_csv",
    "write_trajectory_csv",
)
