"""Catalog of the reference games and synthetic observation generators."""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import ValidationError
from .game import Game, expected_payoffs
from .numeric import tied

CATALOG = (
    "mondrian", "intro_dominance", "nongeneric_3x3_left", "nongeneric_3x3_right",
    "coord", "chicken", "amp", "nongeneric_2x2", "unique_mixed", "ds_mid", "seven_eq",
    "three_player", "amp1", "amp2", "amp3", "amp4", "amp5", "ds1", "ds2", "nl", "km",
    "matching_pennies",
)

# (X, Y, Z, W) constants of the five AMP games in the parametric family
AMP_PARAMETERS = {
    "amp1": (10, 10, 10, 10),
    "amp2": (50, 10, 10, 10),
    "amp3": (50, 10, 50, 10),
    "amp4": (50, 50, 50, 10),
    "amp5": (50, 50, 50, 50),
}


def _games_dir():
    return resources.files("mequilibrium").joinpath("data/games")


def game_path(name: str) -> Path:
    return Path(str(_games_dir().joinpath(f"{name}.json")))


def load(name: str) -> Game:
    """Load a catalog game by name."""
    if name not in CATALOG:
        raise KeyError(f"unknown fixture '{name}'; known: {', '.join(CATALOG)}")
    return Game.loads(_games_dir().joinpath(f"{name}.json").read_text())


def resolve_game(source: str) -> Game:
    """A catalog name or a path to a game file."""
    if source in CATALOG:
        return load(source)
    if not Path(source).is_file():
        raise ValidationError(f"'{source}' is neither a fixture name nor a game file")
    return Game.load(source)


def amp_parametric(x: int, y: int, z: int, w: int, name: str = "") -> Game:
    """Row payoffs (X+10, W; X, W+10) and column payoffs (Z, Z+50; Y+10, Y)."""
    row = [[x + 10, w], [x, w + 10]]
    col = [[z, z + 50], [y + 10, y]]
    return Game.bimatrix(row, col, labels=(("A", "B"), ("A", "B")), name=name)


# ---------------------------------------------------------------------------
# synthetic observations


@dataclass(frozen=True)
class SynthConfig:
    n_subjects: int = 20
    rounds: int = 10
    best_response_rate: float = 1.0
    seed: int = 0
    # draws one belief vector over the opponent's actions for a given role
    belief_sampler: Callable[[np.random.Generator, int], np.ndarray] | None = None
    concentration: float = 1.0


def dirichlet_sampler(alpha: Sequence[float]):
    alpha = np.asarray(alpha, dtype=float)

    def draw(rng, role):
        return rng.dirichlet(alpha)
    return draw


def box_sampler(lo: Sequence[float], hi: Sequence[float]):
    """Two-action beliefs with P(first action) uniform in [lo[role], hi[role]]."""

    def draw(rng, role):
        p = rng.uniform(lo[role], hi[role])
        return np.array([p, 1.0 - p])
    return draw


def synth_observations(game: Game, config: SynthConfig, game_id: str | None = None) -> list:
    """Reproducible observations: beliefs from the configured sampler, choices that
    best respond with probability `best_response_rate` and otherwise pick a
    uniformly random non-best action."""
    from .analysis import Observation

    if game.num_players != 2:
        raise ValidationError("synthetic observations are generated for two-player games")
    if not 0 <= config.best_response_rate <= 1:
        raise ValidationError("best_response_rate must lie in [0, 1]")
    rng = np.random.default_rng(config.seed)
    gid = game_id or game.name or "game"
    out = []
    for subject in range(config.n_subjects):
        role = subject % 2
        k_opp = game.action_counts[1 - role]
        for rnd in range(config.rounds):
            if config.belief_sampler is None:
                belief = rng.dirichlet(np.full(k_opp, config.concentration))
            else:
                belief = np.asarray(config.belief_sampler(rng, role), dtype=float)
            pays = expected_payoffs(game, role, list(belief))
            top = max(pays)
            best = [k for k in range(len(pays)) if tied(pays[k], top)]
            others = [k for k in range(len(pays)) if k not in best]
            u = rng.random()
            if u < config.best_response_rate or not others:
                choice = int(best[rng.integers(len(best))])
            else:
                choice = int(others[rng.integers(len(others))])
            out.append(Observation(subject=f"s{subject:03d}", round=rnd + 1,
                                   role="row" if role == 0 else "column", game=gid,
                                   choice=choice, belief=tuple(float(v) for v in belief)))
    return out


def synth_dataset(game: Game, config: SynthConfig, path=None, game_id: str | None = None) -> str:
    """Serialize synthetic observations in the ingest layout; returns the text
    and writes it to `path` when given."""
    from .analysis import dump_observations

    text = dump_observations(synth_observations(game, config, game_id))
    if path is not None:
        Path(path).write_text(text)
    return text


def blob_points(centers: Sequence[Sequence[float]], per_blob: int, spread: float, seed: int) -> np.ndarray:
    """Gaussian blobs around simplex points, clipped and renormalised onto the simplex."""
    rng = np.random.default_rng(seed)
    pts = []
    for c in centers:
        c = np.asarray(c, dtype=float)
        noise = rng.normal(scale=spread, size=(per_blob, len(c)))
        noise -= noise.mean(axis=1, keepdims=True)
        p = np.clip(c + noise, 0.0, None)
        pts.append(p / p.sum(axis=1, keepdims=True))
    return np.vstack(pts)
