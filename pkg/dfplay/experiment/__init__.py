"""Package defining experiment pipelines: configured replications, the
target-assignment reproduction, and re-analysis of stored runs.
"""

from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from ..analysis import EquilibriumAtlas
from ..analysis.closeness import q_curve, sample_cloud, verify_closeness
from ..analysis.report import plain, TheoryReport
from ..exc import ShapeError
from ..normal_form.fileio import GameFile
from ..normal_form.potential import (
    check_potential,
    LSQ_GUARD,
    mpd,
    nearest_potential_lsq,
    path_potential,
)
from ..util import Check, echo, hl_value, P, warn
from .artifacts import (
    aggregate,
    read_aggregate_csv,
    read_trajectory_csv,
    StoredRun,
    svg_line_chart,
    write_aggregate_csv,
    write_json,
    write_manifest,
    write_q_csv,
    write_trajectory_csv,
)
from .config import ExperimentConfig, load_config, preset, PRESETS
from .runner import run_experiment, RunResult


MAJORITY: float = 0.9
STAR_MAJORITY: float = 0.7
T_MIN: int = 10


class Outcome:
    """Results of a pipeline: per-network runs, the emitted files, and the
        report over them.
    """

    __slots__ = (
        "results",
        "files",
        "report",
        "out",
    )

    def __init__(
        self,
        results: Dict[str, List[RunResult]],
        files: List[Path],
        report: TheoryReport,
        out: Path,
    ):
        self.results: Dict[str, List[RunResult]] = results
        self.files: List[Path] = files
        self.report: TheoryReport = report
        self.out: Path = out


def _share(flags: Sequence[bool]) -> Tuple[int, int]:
    return sum(1 for f in flags if f), len(flags)


def _majority(name: str, flags: Sequence[bool], need: float = MAJORITY) -> Check:
    hits, total = _share(flags)
    return Check(
        name, hits >= need * total, f"{hits}/{total} runs", {"hits": hits, "runs": total}
    )


def star_versus_ring(star: np.ndarray, ring: np.ndarray, t_min: int = T_MIN) -> Check:
    """Star belief error at or below ring at most steps from ``t_min`` on."""
    lo = min(t_min, len(star)) - 1
    share = float((star[lo:] <= ring[lo:]).mean())
    return Check(
        "star_faster",
        share >= STAR_MAJORITY,
        f"star at or below ring at {share:.1%} of steps",
        {"share": share},
    )


def experiment_report(
    config: ExperimentConfig,
    results: Dict[str, List[RunResult]],
    aggregates: Dict[str, Dict[str, np.ndarray]],
) -> TheoryReport:
    report = TheoryReport(config.name)
    report.fact("runs", config.replication.n_runs)
    report.fact("horizon", config.dfp.horizon)
    report.fact("networks", ", ".join(results))

    for kind, runs in results.items():
        summaries = [r.summary for r in runs]
        report.add(
            Check(
                f"{kind}.step_size",
                all(s.flags["step_size"] for s in summaries),
                "every step within 2N/(t+1)",
            ),
            Check(
                f"{kind}.frequency_drift",
                all(s.flags["frequency_drift"] for s in summaries),
                "frequencies equal running means of actions",
            ),
        )
        for name in ("connectivity", "bounded_interval", "weights"):
            report.add(
                Check(
                    f"{kind}.{name}",
                    all(s.flags.get(name, True) for s in summaries),
                    "assumption check over the horizon",
                )
            )

        if summaries[0].one_to_one is not None:
            report.add(_majority(f"{kind}.one_to_one", [s.one_to_one for s in summaries]))
        if "consensus_rate" in summaries[0].flags:
            report.add(
                Check(
                    f"{kind}.consensus_rate",
                    all(s.flags["consensus_rate"] for s in summaries),
                    "belief error within the fitted C log(t)/t",
                )
            )
            report.constants[f"{kind}.consensus_C"] = max(
                s.consensus["constant"] for s in summaries
            )
        if summaries[0].increments is not None:
            report.add(
                _majority(
                    f"{kind}.potential_increment",
                    [s.flags["potential_increment"] for s in summaries],
                )
            )
            report.constants[f"{kind}.increment_C"] = max(
                s.increments["constant"] for s in summaries
            )
            report.violations[kind] = [
                t for s in summaries for t in s.increments["violations"][:10]
            ]
        if summaries[0].basin.get("skipped"):
            report.add(
                Check(
                    f"{kind}.single_basin",
                    True,
                    "vacuous: delta unknown, so there is no basin threshold",
                    {"skipped": True},
                )
            )
        elif summaries[0].basin:
            report.add(
                _majority(
                    f"{kind}.single_basin",
                    [
                        s.basin["verdict"] is not None
                        and not s.basin["switches_after_entry"]
                        for s in summaries
                    ],
                )
            )

    if "star" in aggregates and "ring" in aggregates:
        report.add(
            star_versus_ring(
                aggregates["star"]["avg_belief_error"],
                aggregates["ring"]["avg_belief_error"],
            )
        )

    return report


def simulate(config: ExperimentConfig) -> Outcome:
    """Run every replication and write the configuration, per-run and
        aggregate CSVs, summaries, report, optional charts, and a manifest.
    """
    config.validate()
    out = Path(config.output.dir)
    out.mkdir(parents=True, exist_ok=True)

    log_file = None
    if config.output.log:
        log_file = (out / "events.log").open("w", encoding="utf-8")
        P.file = log_file

    try:
        echo("info", f"Running {hl_value(config.name)} into {out}.")
        results = run_experiment(config)

        files = [config.write(out / "config.json")]
        aggregates: Dict[str, Dict[str, np.ndarray]] = {}
        for kind, runs in results.items():
            if config.output.run_csv:
                for r in runs:
                    path = out / "runs" / kind / f"run_{r.run_index:03d}.csv"
                    files.append(write_trajectory_csv(path, r.trajectory, r.ne_distance))

            aggregates[kind] = {
                "avg_ne_distance": aggregate([r.ne_distance for r in runs]),
                "avg_belief_error": aggregate([r.belief_error for r in runs]),
            }
            files.append(write_aggregate_csv(out / f"aggregate_{kind}.csv", aggregates[kind]))

        files.append(
            write_json(
                out / "summaries.json",
                plain({kind: [dict(r.summary) for r in runs] for kind, runs in results.items()}),
            )
        )

        if config.output.charts:
            files.extend(fig1_charts(out, aggregates))

        report = experiment_report(config, results, aggregates)
        files.append(report.write(out / "report.json"))
        write_manifest(out, files)
    finally:
        if log_file is not None:
            P.file = None
            log_file.close()

    report.print()
    return Outcome(results, files, report, out)


def fig1_charts(out: Path, aggregates: Dict[str, Dict[str, np.ndarray]]) -> List[Path]:
    return [
        svg_line_chart(
            out / "fig1_ne_distance.svg",
            "Average distance to Nash equilibrium",
            {kind: agg["avg_ne_distance"] for kind, agg in aggregates.items()},
            y_label="(1/N) sum ||f_i - sigma*_i||",
        ),
        svg_line_chart(
            out / "fig1_estimation_error.svg",
            "Average estimation error",
            {kind: agg["avg_belief_error"] for kind, agg in aggregates.items()},
            y_label="mean ||f_i - v^j_i||",
        ),
    ]


def reproduce_fig1(
    out: Union[str, Path],
    *,
    runs: int = None,
    seed: int = None,
    horizon: int = None,
    workers: int = None,
) -> Outcome:
    """The target-assignment preset on ring and star, with both charts."""
    config = preset("fig1").override(runs=runs, seed=seed, out=str(out), workers=workers)
    config.output.charts = True
    if horizon is not None:
        config.dfp.horizon = horizon
    return simulate(config)


def verify_game(
    game_file: GameFile,
    reference: GameFile = None,
    *,
    alpha_bar: float = 0.1,
    eps_bar: float = 1e-3,
    n_samples: int = 2000,
    seed: int = 0,
    q_out: Union[str, Path] = None,
) -> TheoryReport:
    """Potential certificate, MPD to the reference, pure equilibria and the
        closeness conditions of a game.

    Without a reference file, an exact potential is its own reference and any
    other game is compared with its least-squares surrogate, within
    ``LSQ_GUARD`` profiles.
    """
    game = game_file.game
    report = TheoryReport(game_file.name or repr(game))

    cert = check_potential(game)
    report.fact("potential", "yes" if cert else "no")
    report.constants["potential_residual"] = cert.max_residual

    table = None
    delta = None
    if reference is not None:
        source = "reference"
        table = path_potential(reference.game)
        if not check_potential(reference.game):
            warn("The reference game is not a potential game; its path sums stand in.")
        delta = mpd(game, reference.game)
    elif cert:
        source, table, delta = "exact", cert.potential, 0.0
    elif game.n_profiles <= LSQ_GUARD:
        source = "lsq"
        nearest, _, delta = nearest_potential_lsq(game)
        table = nearest.table(0)
    else:
        source = "none"
        warn(f"{game!r} exceeds the least-squares guard; no MPD is reported.")

    report.fact("delta_source", source)
    if delta is not None:
        report.constants["mpd"] = delta

    atlas = EquilibriumAtlas.from_file(game_file)
    report.fact("M", atlas.size)
    report.fact("pure_equilibria", [list(p) for p in atlas.profiles])
    if atlas.mixed:
        report.fact("mixed_equilibria", len(atlas.mixed))
    report.fact("d_star", atlas.d_star)

    if delta is None:
        report.add(Check("equilibria", atlas.size >= 1, f"{atlas.size} pure equilibria"))
        return report

    closeness = verify_closeness(
        game, table, atlas, delta, alpha_bar, eps_bar, n_samples, seed
    )
    report.add(*closeness.checks)
    report.constants["L"] = closeness.L
    report.q_samples = closeness.q_samples

    if q_out is not None and len(atlas.points):
        alphas = np.linspace(0.0, 2 * alpha_bar, 21)
        q = q_curve(game, atlas, alphas, cloud=sample_cloud(game, atlas, n_samples, seed))
        write_q_csv(q_out, alphas, q)
        echo("file", f"Wrote q samples to {q_out}.")

    return report


def rebuild_frequencies(actions: np.ndarray) -> np.ndarray:
    """Running means of one-hot actions, ``(T, N, K)`` with K the largest
        recorded action plus one.
    """
    horizon, n = actions.shape
    onehot = np.eye(int(actions.max()) + 1)[actions]
    return np.cumsum(onehot, axis=0) / np.arange(1, horizon + 1)[:, None, None]


def stored_step_sizes(stored: StoredRun) -> Check:
    """``||f_{t+1} - f_t|| <= 2N/(t+1)`` for every stored t >= 1."""
    freqs = rebuild_frequencies(stored.actions).reshape(stored.horizon, -1)
    sizes = np.linalg.norm(np.diff(freqs, axis=0), axis=1)
    t = np.arange(1, stored.horizon)
    bad = np.flatnonzero(sizes > 2 * stored.n_agents / (t + 1) + 1e-12)
    return Check(
        f"{stored.path.stem}.step_size",
        bad.size == 0,
        f"{bad.size} steps exceed 2N/(t+1)",
    )


def analyze(out: Union[str, Path], final_window: int = 50) -> TheoryReport:
    """Recheck stored runs: step sizes from the action columns, one-to-one
        play over the final window, and agreement of each aggregate CSV with
        the mean of its runs.
    """
    out = Path(out)
    run_dirs = sorted(p for p in (out / "runs").glob("*") if p.is_dir())
    if not run_dirs:
        raise ShapeError(f"{out}: no stored runs under {out / 'runs'}.")

    report = TheoryReport(str(out))
    for run_dir in run_dirs:
        kind = run_dir.name
        stored = [read_trajectory_csv(p) for p in sorted(run_dir.glob("run_*.csv"))]
        echo("info", f"Read {len(stored)} runs on {hl_value(kind)}.")

        steps = [stored_step_sizes(s) for s in stored]
        report.add(
            Check(
                f"{kind}.step_size",
                all(steps),
                f"{sum(1 for c in steps if c)}/{len(steps)} runs within the bound",
            )
        )
        report.add(
            _majority(
                f"{kind}.one_to_one",
                [
                    all(len(set(row)) == s.n_agents for row in s.actions[-final_window:].tolist())
                    for s in stored
                ],
            )
        )

        agg_path = out / f"aggregate_{kind}.csv"
        if agg_path.exists():
            agg = read_aggregate_csv(agg_path)
            means = {
                "avg_ne_distance": aggregate([s.ne_distance for s in stored]),
                "avg_belief_error": aggregate([s.belief_error for s in stored]),
            }
            gap = max(float(np.abs(v - agg[k]).max()) for k, v in means.items())
            report.add(
                Check(
                    f"{kind}.aggregate",
                    gap <= 1e-12,
                    f"aggregate within {gap:.3g} of the mean of runs",
                )
            )

    report.write(out / "analysis.json")
    return report


__all__ = (
    "analyze",
    "ExperimentConfig",
    "experiment_report",
    "load_config",
    "Outcome",
    "preset",
    "PRESETS",
    "rebuild_frequencies",
    "reproduce_fig1",
    "simulate",
    "star_versus_ring",
    "verify_game",
)
