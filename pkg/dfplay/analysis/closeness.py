"""Sampled estimates of how far approximate equilibria can sit from exact
ones, a Lipschitz bound for multilinear utilities, and the closeness
conditions that tie both to the distance between equilibria.

q(alpha) is a max-min over a nonconvex set. It is estimated from a finite
cloud of profiles, so it is a lower estimate and every check built on it
holds "under sampled q" only.
"""

from typing import Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..normal_form import (
    expected_potential,
    expected_utility,
    NormalFormGame,
    REGRET_TOL,
    regret,
)
from ..util import Check, newLogger


CLOUD_GUARD: int = 4096
JITTER: float = 0.2

log = newLogger("dfplay.closeness")


class SampleCloud:
    """Joint mixed profiles with their regrets and distances to the nearest
        reference point.
    """

    __slots__ = (
        "profiles",
        "regrets",
        "distances",
        "nearest",
    )

    def __init__(
        self,
        profiles: np.ndarray,
        regrets: np.ndarray,
        distances: np.ndarray,
        nearest: np.ndarray,
    ):
        self.profiles: np.ndarray = profiles
        self.regrets: np.ndarray = regrets
        self.distances: np.ndarray = distances
        self.nearest: np.ndarray = nearest

    def within(self, alpha: float) -> np.ndarray:
        return self.regrets <= alpha + REGRET_TOL

    def q(self, alpha: float) -> float:
        kept = self.within(alpha)
        return float(self.distances[kept].max()) if kept.any() else 0.0

    def __len__(self) -> int:
        return len(self.regrets)


def sample_cloud(
    game: NormalFormGame, atlas, n_samples: int = 2000, seed=0
) -> SampleCloud:
    """Dirichlet profiles, every pure profile when there are at most
        ``CLOUD_GUARD``, the reference points, and jittered copies of them.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    n, k = game.n_agents, game.n_actions
    points = atlas.points.reshape(-1, n, k)

    parts = [rng.dirichlet(np.ones(k), size=(n_samples, n))]
    if game.n_profiles <= CLOUD_GUARD:
        eye = np.eye(k)
        parts.append(np.stack([eye[list(p)] for p in game.profiles()]))
    if len(points):
        parts.append(points)
        picks = points[rng.integers(len(points), size=n_samples)]
        mix = rng.uniform(0, JITTER, size=(n_samples, 1, 1))
        noise = rng.dirichlet(np.ones(k), size=(n_samples, n))
        parts.append((1 - mix) * picks + mix * noise)

    profiles = np.concatenate(parts)
    regrets = np.array([regret(game, p)[0] for p in profiles])

    flat = profiles.reshape(len(profiles), -1)
    if len(points):
        gaps = np.linalg.norm(
            flat[:, np.newaxis] - points.reshape(len(points), -1)[np.newaxis], axis=2
        )
        nearest = gaps.argmin(axis=1)
        distances = gaps.min(axis=1)
    else:
        nearest = np.full(len(profiles), -1)
        distances = np.full(len(profiles), np.inf)

    log.debug(f"Sampled {len(profiles)} profiles for {game!r}.")
    return SampleCloud(profiles, regrets, distances, nearest)


def estimate_q(
    game: NormalFormGame, atlas, alpha: float, n_samples: int = 2000, seed=0
) -> float:
    """Largest distance, over sampled ``alpha``-equilibria, to the nearest
        reference point.
    """
    if alpha < 0:
        raise ValueError(f"alpha {alpha} is negative.")
    return sample_cloud(game, atlas, n_samples, seed).q(alpha)


def q_curve(
    game: NormalFormGame,
    atlas,
    alphas: Sequence[float],
    n_samples: int = 2000,
    seed=0,
    cloud: SampleCloud = None,
) -> np.ndarray:
    """q over an increasing alpha grid from one cloud, made weakly increasing
        with a running maximum.
    """
    alphas = np.asarray(alphas, dtype=float)
    if (np.diff(alphas) < 0).any():
        raise ValueError("The alpha grid must be increasing.")
    cloud = cloud or sample_cloud(game, atlas, n_samples, seed)
    return np.maximum.accumulate([cloud.q(a) for a in alphas])


def lipschitz_bound(game: Union[NormalFormGame, np.ndarray]) -> float:
    """``N sqrt(K) max |u|``, valid for the multilinear extension of every
        utility table of a game, or of a single potential table.
    """
    if isinstance(game, NormalFormGame):
        n, k, table = game.n_agents, game.n_actions, game.utilities
    else:
        table = np.asarray(game, dtype=float)
        n, k = table.ndim, table.shape[0]
    return float(n * np.sqrt(k) * np.abs(table).max())


def lipschitz_certificate(
    game: Union[NormalFormGame, np.ndarray], n_pairs: int = 1000, seed=0
) -> Check:
    """Largest sampled ``|u(σ) - u(σ')| / ||σ - σ'||`` against the bound."""
    rng = np.random.default_rng(seed)
    bound = lipschitz_bound(game)

    if isinstance(game, NormalFormGame):
        n, k = game.n_agents, game.n_actions
        values = lambda p: np.array(
            [expected_utility(game, i, p) for i in range(n)]
        )
    else:
        n, k = game.ndim, game.shape[0]
        values = lambda p: np.array([expected_potential(game, p)])

    worst = 0.0
    for _ in range(n_pairs):
        a = rng.dirichlet(np.ones(k), size=n)
        b = rng.dirichlet(np.ones(k), size=n)
        gap = np.linalg.norm(a - b)
        if gap > 0:
            worst = max(worst, float(np.abs(values(a) - values(b)).max() / gap))

    return Check(
        "lipschitz",
        worst <= bound * (1 + 1e-12),
        f"largest sampled quotient {worst:.6g} against L={bound:.6g}",
        {"L": bound, "sampled": worst},
    )


class ClosenessReport:
    """The closeness conditions between a game, its equilibria and a nearby
        potential game, each as a named check carrying its numeric slack.
    """

    __slots__ = (
        "checks",
        "L",
        "d_star",
        "q_samples",
    )

    def __init__(
        self,
        checks: List[Check],
        L: float,
        d_star: Optional[float],
        q_samples: List[Tuple[float, float]],
    ):
        self.checks: List[Check] = checks
        self.L: float = L
        self.d_star: Optional[float] = d_star
        self.q_samples: List[Tuple[float, float]] = q_samples

    @property
    def ok(self) -> bool:
        return all(self.checks)

    def __getitem__(self, name: str) -> Check:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    def __iter__(self) -> Iterator[Tuple[str, object]]:
        yield "L", self.L
        yield "d_star", self.d_star
        yield "checks", [dict(c) for c in self.checks]
        yield "q_samples", [list(s) for s in self.q_samples]


def verify_closeness(
    game: NormalFormGame,
    reference: Optional[Union[NormalFormGame, np.ndarray]],
    atlas,
    delta: float,
    alpha_bar: float,
    eps_bar: float,
    n_samples: int = 2000,
    seed=0,
) -> ClosenessReport:
    """Evaluate, with q estimated from samples:

        (a) ``N delta < alpha_bar / 2``
        (b) ``q(alpha_bar) < d* / 4``
        (c) ``N delta + eps_bar < alpha_bar``
        (d) ``q(N delta + eps_bar) < (alpha_bar - N delta) d* / (24 N L)``

    plus the disjointness of the ``d*/4`` neighborhoods holding the sampled
    ``alpha_bar``-equilibria. With a single equilibrium (b), (d) and
    disjointness are vacuous. ``L`` comes from ``reference`` when given.
    """
    n = game.n_agents
    nd = n * delta
    L = lipschitz_bound(reference if reference is not None else game)
    d_star = atlas.d_star
    checks: List[Check] = []

    checks.append(
        Check(
            "equilibria",
            atlas.size >= 1,
            f"{atlas.size} pure equilibria",
            {"M": atlas.size},
        )
    )
    checks.append(
        Check(
            "delta_small",
            nd < alpha_bar / 2,
            "N*delta < alpha_bar/2",
            {"slack": alpha_bar / 2 - nd},
        )
    )
    checks.append(
        Check(
            "eps_fits",
            nd + eps_bar < alpha_bar,
            "N*delta + eps_bar < alpha_bar",
            {"slack": alpha_bar - nd - eps_bar},
        )
    )

    q_samples: List[Tuple[float, float]] = []
    if atlas.size == 0:
        return ClosenessReport(checks, L, d_star, q_samples)

    if atlas.size == 1:
        vacuous = "single equilibrium: disjointness vacuous"
        for name in ("q_alpha_bar", "q_eps_bar", "disjoint"):
            checks.append(Check(name, True, vacuous, {"skipped": True}))
        return ClosenessReport(checks, L, d_star, q_samples)

    cloud = sample_cloud(game, atlas, n_samples, seed)
    q_bar = cloud.q(alpha_bar)
    q_eps = cloud.q(nd + eps_bar)
    q_samples = [(alpha_bar, q_bar), (nd + eps_bar, q_eps)]

    limit_b = d_star / 4
    checks.append(
        Check(
            "q_alpha_bar",
            q_bar < limit_b,
            f"q(alpha_bar)={q_bar:.6g} < d*/4={limit_b:.6g} (sampled q)",
            {"slack": limit_b - q_bar},
        )
    )

    limit_d = (alpha_bar - nd) * d_star / (24 * n * L) if L > 0 else np.inf
    checks.append(
        Check(
            "q_eps_bar",
            q_eps < limit_d,
            f"q(N*delta+eps_bar)={q_eps:.6g} < {limit_d:.6g} (sampled q)",
            {"slack": float(limit_d - q_eps)},
        )
    )

    kept = cloud.profiles[cloud.within(alpha_bar)].reshape(-1, atlas.points.shape[1])
    gaps = np.linalg.norm(kept[:, np.newaxis] - atlas.points[np.newaxis], axis=2)
    close = (gaps < limit_b).sum(axis=1)
    stray = int((close != 1).sum())
    checks.append(
        Check(
            "disjoint",
            stray == 0,
            f"{len(kept) - stray}/{len(kept)} sampled points within d*/4"
            " of exactly one equilibrium",
            {"stray": stray},
        )
    )
    return ClosenessReport(checks, L, d_star, q_samples)


__all__ = (
    "ClosenessReport",
    "estimate_q",
    "lipschitz_bound",
    "lipschitz_certificate",
    "q_curve",
    "sample_cloud",
    "SampleCloud",
    "verify_closeness",
)
