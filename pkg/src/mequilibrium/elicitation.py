"""Binarized scoring rule for slider belief reports.

A slider report q is scored against a realized 0/1 outcome: the slider wins
when q is closer to the outcome than at least one of two independent uniform
draws.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DomainError, ValidationError
from .numeric import all_exact, to_fraction


@dataclass(frozen=True)
class SliderReport:
    """Reports and true beliefs grouped per opponent (each group sums to one)."""

    reports: tuple
    truths: tuple
    prize: float = 1.0

    def __post_init__(self):
        if len(self.reports) != len(self.truths):
            raise ValidationError("reports and truths need one group per opponent")
        for grp in (*self.reports, *self.truths):
            if any(v < 0 or v > 1 for v in grp) or abs(float(sum(grp)) - 1) > 1e-9:
                raise ValidationError("each slider group must be a probability vector")
        if self.prize < 0:
            raise ValidationError("prize must be non-negative")

    @property
    def slider_count(self) -> int:
        return sum(len(g) for g in self.reports)

    def flat_reports(self) -> list:
        return [v for g in self.reports for v in g]

    def flat_truths(self) -> list:
        return [v for g in self.truths for v in g]


def win_probability(p, q):
    """Chance a slider at q wins when its event happens with probability p.

    Exact for rational inputs.
    """
    for v in (p, q):
        if not 0 <= v <= 1:
            raise DomainError("p and q must lie in [0, 1]")
    if all_exact((p, q)):
        p, q = to_fraction(p), to_fraction(q)
    return p * (1 - (1 - q) ** 2) + (1 - p) * (1 - q ** 2)


def slider_wins(q: np.ndarray, outcome: np.ndarray, draws: np.ndarray) -> np.ndarray:
    """Vectorized win test; ties go to the subject.

    `draws` has a trailing axis of length two holding the uniform points.
    """
    mine = np.abs(q - outcome)
    theirs = np.abs(draws - outcome[..., None]).max(axis=-1)
    return mine <= theirs


@dataclass
class MechanismRound:
    outcomes: list               # 0/1 per slider
    wins: list                   # bool per slider
    subset: list                 # sliders paid under the subset rule
    payment_subset: float
    selected: int                # slider paid under the single-slider rule
    payment_single: float
    seed: int | None = None

    def to_dict(self) -> dict:
        return {"outcomes": self.outcomes, "wins": [bool(w) for w in self.wins],
                "subset": self.subset, "payment_subset": self.payment_subset,
                "selected": self.selected, "payment_single": self.payment_single,
                "seed": self.seed}


def slider_outcomes(report: SliderReport, realized: Sequence[int]) -> list[int]:
    """0/1 target per slider given each opponent's realized pure action."""
    if len(realized) != len(report.reports):
        raise ValidationError("one realized action per opponent")
    out = []
    for grp, a in zip(report.reports, realized):
        if not 0 <= a < len(grp):
            raise ValidationError("realized action out of range")
        out.extend(int(k == a) for k in range(len(grp)))
    return out


def simulate_mechanism(report: SliderReport, realized: Sequence[int], seed: int,
                       subset_size: int | None = None) -> MechanismRound:
    """One round: draw two uniform points per slider and pay under both rules.

    Subset rule: the prize for each winning slider in a uniformly drawn subset
    of `subset_size` sliders (default: all).  Single rule: the prize iff one
    uniformly selected slider wins.
    """
    rng = np.random.default_rng(seed)
    outcomes = np.array(slider_outcomes(report, realized), dtype=float)
    q = np.array([float(v) for v in report.flat_reports()])
    draws = rng.uniform(size=(len(q), 2))
    wins = slider_wins(q, outcomes, draws)
    n = len(q)
    size = n if subset_size is None else subset_size
    if not 1 <= size <= n:
        raise ValidationError("subset size must be between 1 and the slider count")
    subset = sorted(rng.choice(n, size=size, replace=False).tolist())
    pay_subset = report.prize * int(wins[subset].sum())
    selected = int(rng.integers(n))
    pay_single = report.prize if wins[selected] else 0.0
    return MechanismRound(outcomes.astype(int).tolist(), wins.tolist(), subset,
                          float(pay_subset), selected, float(pay_single), seed)


def empirical_win_rate(p: float, q: float, trials: int, seed: int) -> tuple[float, float]:
    """Monte-Carlo win rate of one slider (outcome ~ Bernoulli(p)); returns (rate, std error)."""
    rng = np.random.default_rng(seed)
    outcome = (rng.uniform(size=trials) < p).astype(float)
    draws = rng.uniform(size=(trials, 2))
    wins = slider_wins(np.full(trials, float(q)), outcome, draws)
    rate = float(wins.mean())
    return rate, float(np.sqrt(max(rate * (1 - rate), 1e-300) / trials))


def expected_payment(truth: Sequence[float], report: Sequence[float], prize: float = 1.0,
                     subset_size: int | None = None) -> float:
    """Risk-neutral expected payment for one opponent's slider group.

    Each slider is in the paid subset with probability size/n, so the
    expectation is prize * (size/n) * sum of win probabilities.
    """
    n = len(report)
    size = n if subset_size is None else subset_size
    return prize * size / n * sum(float(win_probability(float(p), float(q)))
                                  for p, q in zip(truth, report))


@dataclass
class IncentiveReport:
    truth: float
    argmax: float
    grid_step: float
    gradient_at_truth: float
    ok: bool
    curve: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {"truth": self.truth, "argmax": self.argmax, "grid_step": self.grid_step,
                "gradient_at_truth": self.gradient_at_truth, "ok": self.ok}


def verify_incentive_compatibility(p: float, step: float = 0.001, h: float = 1e-6) -> IncentiveReport:
    """Grid search of a two-outcome slider's expected score and the gradient at q = p.

    The score is evaluated over reports (q, 1-q) against truth (p, 1-p).
    """
    if not 0 <= p <= 1:
        raise DomainError("p must lie in [0, 1]")
    n = int(round(1 / step))
    qs = np.linspace(0.0, 1.0, n + 1)
    # closed form in numpy for the grid: P = p(1-(1-q)^2) + (1-p)(1-q^2), summed over both sliders
    def score(q):
        a = p * (1 - (1 - q) ** 2) + (1 - p) * (1 - q ** 2)
        b = (1 - p) * (1 - q ** 2) + p * (1 - (1 - q) ** 2)
        return a + b
    vals = score(qs)
    best = float(qs[int(np.argmax(vals))])
    lo, hi = max(p - h, 0.0), min(p + h, 1.0)
    grad = float((score(hi) - score(lo)) / (hi - lo))
    ok = abs(best - p) <= step + 1e-12 and (abs(grad) < 1e-8 or p in (0.0, 1.0))
    return IncentiveReport(float(p), best, step, grad, ok, vals.tolist())
