"""Observation data: ingestion, k-means with elbow selection, classification into
colored M-equilibrium sets, and best-response rates."""
from __future__ import annotations

import csv
import io
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .errors import FormatError, ValidationError
from .game import Game, expected_payoffs
from .msets import MEquilibrium, RankAssignment
from .numeric import EPS_TIE

COLUMNS = ("subject", "round", "role", "game", "choice")
ROLES = {"row": 0, "column": 1}
BELIEF_TOL = 1e-3     # off-simplex beyond this: row rejected
RENORM_TOL = 1e-6     # within BELIEF_TOL but beyond this: renormalised


@dataclass(frozen=True)
class Observation:
    subject: str
    round: int
    role: str            # "row" or "column"
    game: str
    choice: int          # own action index
    belief: tuple        # probabilities over the opponent's actions

    @property
    def player(self) -> int:
        return ROLES[self.role]


class ObservationSet(list):
    """A list of observations plus the rows that were rejected."""

    def __init__(self, items=(), errors=None):
        super().__init__(items)
        self.errors: list[dict] = list(errors or [])


def _belief_columns(header: Sequence[str]) -> list[int]:
    cols = [(i, h) for i, h in enumerate(header) if h.startswith("belief")]
    return [i for i, _ in sorted(cols, key=lambda t: int(t[1][len("belief"):].lstrip("_") or 0))]


def parse_observations(text: str, games: Mapping[str, Game] | None = None) -> ObservationSet:
    """Parse delimited text (header: subject, round, role, game, choice,
    belief_1..belief_K); bad rows go to `.errors` with their line number."""
    sample = text[:2048]
    try:
        dialect = csv.Sniffer().sniff(sample, delimiters=",;\t")
    except csv.Error:
        dialect = csv.excel
    reader = csv.reader(io.StringIO(text), dialect)
    try:
        header = [h.strip().lower() for h in next(reader)]
    except StopIteration:
        raise FormatError("empty observation file") from None
    missing = [c for c in COLUMNS if c not in header]
    bcols = _belief_columns(header)
    if missing or not bcols:
        raise FormatError(f"missing columns: {', '.join(missing or ['belief_*'])}")
    idx = {c: header.index(c) for c in COLUMNS}
    out = ObservationSet()
    for line, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        try:
            cells = {c: row[idx[c]].strip() for c in COLUMNS}
            role = cells["role"].lower()
            if role not in ROLES:
                raise ValueError(f"unknown role {cells['role']!r}")
            belief = [float(row[i]) for i in bcols if i < len(row) and row[i].strip() != ""]
            if not belief or min(belief) < -BELIEF_TOL:
                raise ValueError("belief has negative entries")
            total = sum(belief)
            if abs(total - 1) > BELIEF_TOL:
                raise ValueError(f"belief sums to {total:g}")
            if abs(total - 1) > RENORM_TOL:
                belief = [max(v, 0.0) / total for v in belief]
            choice = int(cells["choice"])
            game = (games or {}).get(cells["game"])
            if game is not None:
                k_own = game.action_counts[ROLES[role]]
                k_opp = game.action_counts[1 - ROLES[role]]
                if not 0 <= choice < k_own:
                    raise ValueError(f"choice {choice} out of range")
                if len(belief) != k_opp:
                    raise ValueError("belief length does not match the opponent's actions")
            elif choice < 0:
                raise ValueError("negative choice index")
            out.append(Observation(cells["subject"], int(cells["round"]), role, cells["game"],
                                   choice, tuple(belief)))
        except (ValueError, IndexError) as exc:
            out.errors.append({"line": line, "error": str(exc)})
    return out


def ingest(path, games: Mapping[str, Game] | None = None) -> ObservationSet:
    return parse_observations(Path(path).read_text(), games)


def dump_observations(observations: Sequence[Observation]) -> str:
    """Serialize in the ingest layout; floats use repr so parsing is bit-exact."""
    width = max((len(o.belief) for o in observations), default=0)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(COLUMNS) + [f"belief_{k + 1}" for k in range(width)])
    for o in observations:
        w.writerow([o.subject, o.round, o.role, o.game, o.choice] + [repr(float(v)) for v in o.belief])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# clustering


@dataclass
class Clustering:
    k: int
    centroids: np.ndarray
    assignment: np.ndarray
    total_error: float
    restarts: int
    history: np.ndarray = field(repr=False, default=None)

    @property
    def sizes(self) -> list[int]:
        return np.bincount(self.assignment, minlength=self.k).tolist()

    def to_dict(self) -> dict:
        return {"k": self.k, "centroids": self.centroids.tolist(),
                "sizes": self.sizes, "total_error": self.total_error,
                "restarts": self.restarts}


def _check_monotone(history: np.ndarray) -> None:
    steps = np.diff(history)
    scale = max(1.0, float(history.max())) if len(history) else 1.0
    if np.any(steps > 1e-9 * scale):
        raise RuntimeError("k-means error increased between Lloyd iterations")


def kmeans(points, k: int, restarts: int = 5000, seed: int = 0, max_iter: int = 300,
           backend: str | None = None) -> Clustering:
    """Best of `restarts` Lloyd runs, each from k distinct random data points."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2:
        raise ValidationError("points must be a 2-d array")
    distinct = np.unique(pts, axis=0)
    if not 1 <= k <= len(distinct):
        raise ValidationError("k must be between 1 and the number of distinct points")
    best = None
    for child in np.random.SeedSequence(seed).spawn(restarts):
        rng = np.random.default_rng(child)
        init = distinct[rng.choice(len(distinct), size=k, replace=False)]
        cent, labels, err, hist = kernels.lloyd(pts, init, max_iter, backend)
        _check_monotone(hist)
        if best is None or err < best[2]:
            best = (cent, labels, err, hist)
    cent, labels, err, hist = best
    return Clustering(k, np.asarray(cent), np.asarray(labels, dtype=np.int64), float(err), restarts, hist)


@dataclass
class ElbowResult:
    ks: list
    errors: list
    suggested: int

    def polyline(self) -> list[tuple[int, float]]:
        return list(zip(self.ks, self.errors))

    def to_dict(self) -> dict:
        return {"k": self.ks, "errors": self.errors, "suggested_k": self.suggested}


def elbow(points, k_range: Sequence[int] = range(2, 16), restarts: int = 200, seed: int = 0,
          backend: str | None = None) -> ElbowResult:
    """Error curve over k and the k of largest second difference of log error.

    The log scale makes the curvature measure relative, so the large absolute
    drops at small k do not mask the elbow.
    """
    ks = [k for k in k_range if k <= len(np.unique(np.asarray(points, dtype=float), axis=0))]
    errs = [kmeans(points, k, restarts, seed, backend=backend).total_error for k in ks]
    if len(ks) < 3:
        return ElbowResult(ks, errs, ks[0] if ks else 1)
    logs = np.log(np.maximum(np.asarray(errs), 1e-300))
    curv = logs[:-2] - 2 * logs[1:-1] + logs[2:]
    return ElbowResult(ks, errs, ks[1 + int(np.argmax(curv))])


# ---------------------------------------------------------------------------
# classification


def _factor_index(meq: MEquilibrium, player: int) -> int:
    return 0 if meq.choice_set.space.startswith("symmetric") else player


def belief_color(meqs: Sequence[MEquilibrium], player: int, belief) -> RankAssignment | None:
    """Color of the colorable set whose belief factor for `player` contains `belief` (closure)."""
    for m in meqs:
        if not m.colorable:
            continue
        f = m.belief_set.factors[_factor_index(m, player)]
        if f.contains(tuple(belief)):
            return m.color
    return None


def choice_color(meqs: Sequence[MEquilibrium], player: int, choice) -> RankAssignment | None:
    for m in meqs:
        if not m.colorable:
            continue
        f = m.choice_set.factors[_factor_index(m, player)]
        if f.contains(tuple(choice)):
            return m.color
    return None


def profile_color(meqs: Sequence[MEquilibrium], choice, belief) -> RankAssignment | None:
    """Color of the colorable M-equilibrium whose closure holds the full
    (choice, belief) profile, else None."""
    for m in meqs:
        if not m.colorable:
            continue
        sym = m.choice_set.space.startswith("symmetric")
        if sym:
            if tuple(choice[0]) != tuple(choice[1]) or tuple(belief[0]) != tuple(belief[1]):
                continue
            if m.contains((tuple(choice[0]),), (tuple(belief[0]),)):
                return m.color
        elif m.contains(tuple(map(tuple, choice)), tuple(map(tuple, belief))):
            return m.color
    return None


def _distance(meqs, player, x, which: str) -> float:
    best = float("inf")
    for m in meqs:
        if not m.colorable:
            continue
        region = m.belief_set if which == "belief" else m.choice_set
        best = min(best, region.factors[_factor_index(m, player)].distance(tuple(x)))
    return best


def _label(color, labels) -> str | None:
    return None if color is None else color.label(labels)


def classify_into_sets(game: Game, observations: Sequence[Observation], meqs: Sequence[MEquilibrium],
                       clustering: Clustering | None = None) -> dict:
    """Per-observation belief colors, per-subject mean-choice colors, and cluster summaries.

    Cluster assignments (if given) index `observations` and refer to beliefs.
    """
    labels = [list(map(str, a)) for a in game.labels] if getattr(game, "labels", None) else None
    per_obs = []
    belief_counts = Counter()
    for o in observations:
        c = belief_color(meqs, o.player, o.belief)
        lab = _label(c, labels)
        belief_counts[lab] += 1
        per_obs.append({"subject": o.subject, "round": o.round, "role": o.role,
                        "belief_color": lab,
                        "belief_distance": 0.0 if c else _distance(meqs, o.player, o.belief, "belief")})
    by_subject = defaultdict(list)
    for o in observations:
        by_subject[(o.subject, o.player)].append(o.choice)
    choice_counts = Counter()
    subjects = []
    for (subj, player), acts in sorted(by_subject.items()):
        k = game.action_counts[player]
        freq = np.bincount(acts, minlength=k) / len(acts)
        c = choice_color(meqs, player, freq)
        lab = _label(c, labels)
        choice_counts[lab] += 1
        subjects.append({"subject": subj, "role": "row" if player == 0 else "column",
                         "mean_choice": freq.tolist(), "choice_color": lab,
                         "choice_distance": 0.0 if c else _distance(meqs, player, freq, "choice")})
    clusters = []
    if clustering is not None:
        for j in range(clustering.k):
            members = [o for o, a in zip(observations, clustering.assignment) if a == j]
            if not members:
                continue
            player = Counter(o.player for o in members).most_common(1)[0][0]
            k = game.action_counts[player]
            mean_choice = np.bincount([o.choice for o in members], minlength=k) / len(members)
            bc = belief_color(meqs, player, clustering.centroids[j])
            cc = choice_color(meqs, player, mean_choice)
            clusters.append({"cluster": j, "size": len(members), "role": "row" if player == 0 else "column",
                             "centroid": clustering.centroids[j].tolist(),
                             "belief_color": _label(bc, labels), "mean_choice": mean_choice.tolist(),
                             "choice_color": _label(cc, labels),
                             "agree": bc is not None and bc == cc})
    n_obs = max(len(observations), 1)
    n_sub = max(len(subjects), 1)
    return {
        "observations": per_obs,
        "subjects": subjects,
        "clusters": clusters,
        "belief_fractions": {str(k): v / n_obs for k, v in sorted(belief_counts.items(), key=str)},
        "choice_fractions": {str(k): v / n_sub for k, v in sorted(choice_counts.items(), key=str)},
        "cluster_agreement": (sum(c["agree"] for c in clusters) / len(clusters)) if clusters else None,
    }


def best_response_rate(game: Game, observations: Sequence[Observation], eps: float = EPS_TIE) -> dict:
    """Per role, the share of choices maximizing expected payoff under the stated belief."""
    hits = defaultdict(int)
    total = defaultdict(int)
    for o in observations:
        pays = [float(v) for v in expected_payoffs(game, o.player, list(o.belief))]
        top = max(pays)
        ok = pays[o.choice] >= top - eps * max(1.0, abs(top))
        hits[o.role] += int(ok)
        total[o.role] += 1
    out = {}
    for role in ("row", "column"):
        if total[role]:
            rate = hits[role] / total[role]
            out[role] = {"rate": rate, "n": total[role],
                         "std_error": float(np.sqrt(rate * (1 - rate) / total[role]))}
    return out
