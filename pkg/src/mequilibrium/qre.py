"""Logit quantal response traces and the Luce closed form for the AMP game."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import ContinuationError, DomainError, ValidationError
from .game import Game
from .numeric import format_rational

DAMPING = 0.5
TOL = 1e-12
MAX_ITER = 100_000


@dataclass(frozen=True)
class QrePoint:
    parameter: object          # lambda, or (rho_R, rho_C) for Luce
    profile: tuple             # one probability vector per player
    residual: float

    def to_dict(self) -> dict:
        par = self.parameter
        par = [float(v) for v in par] if isinstance(par, tuple) else float(par)
        return {"parameter": par,
                "profile": [[float(v) for v in s] for s in self.profile],
                "residual": self.residual}


def default_lambda_grid(game: Game, levels: int | None = None, span: float = 600.0) -> list[float]:
    """0 followed by 0.01 * 2**k while lambda * payoff range stays below `span`
    (keeps every logit probability a positive double)."""
    pays = game.float_payoffs
    width = max(float(p.max() - p.min()) for p in pays) or 1.0
    top = span / width
    grid = [0.0]
    k = 0
    while 0.01 * 2 ** k <= top and (levels is None or k < levels):
        grid.append(0.01 * 2 ** k)
        k += 1
    return grid


def _logit(values: np.ndarray, lam: float) -> np.ndarray:
    z = lam * (values - values.max())
    e = np.exp(z)
    return e / e.sum()


def _payoffs(mats, x):
    a, b = mats
    return a @ x[1], b.T @ x[0]


def _response(mats, x, lam):
    u0, u1 = _payoffs(mats, x)
    return [_logit(u0, lam), _logit(u1, lam)]


def _residual(mats, x, lam) -> float:
    r = _response(mats, x, lam)
    return max(float(np.abs(r[0] - x[0]).max()), float(np.abs(r[1] - x[1]).max()))


def _newton(mats, x, lam, steps: int = 50):
    """Newton polish on x - logit(lam * payoff(x)) = 0 in the full coordinates."""
    k0, k1 = len(x[0]), len(x[1])
    a, b = mats
    z = np.concatenate(x)
    for _ in range(steps):
        cur = [z[:k0], z[k0:]]
        r = _response(mats, cur, lam)
        f = z - np.concatenate(r)
        if np.abs(f).max() < TOL:
            break
        # d logit / d u = lam * (diag(p) - p p^T)
        j0 = lam * (np.diag(r[0]) - np.outer(r[0], r[0])) @ a
        j1 = lam * (np.diag(r[1]) - np.outer(r[1], r[1])) @ b.T
        jac = np.eye(k0 + k1)
        jac[:k0, k0:] -= j0
        jac[k0:, :k0] -= j1
        try:
            z = z - np.linalg.solve(jac, f)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(z)):
            return None
    return [z[:k0], z[k0:]]


def _damped(mats, start, lam):
    x = [s.copy() for s in start]
    for _ in range(MAX_ITER):
        r = _response(mats, x, lam)
        new = [DAMPING * xi + (1 - DAMPING) * ri for xi, ri in zip(x, r)]
        step = max(float(np.abs(n - o).max()) for n, o in zip(new, x))
        x = new
        if step < TOL:
            return x, _residual(mats, x, lam)
    raise ContinuationError(f"logit fixed point did not converge at lambda={lam}",
                            residual=_residual(mats, x, lam), parameter=lam)


def _correct(mats, start, lam, max_jump: float = 0.25):
    """Newton corrector from a warm start; None when it leaves the branch."""
    x = _newton(mats, start, lam)
    if x is None:
        return None
    # one logit pass refreshes coordinates below the Newton tolerance
    y = _response(mats, x, lam)
    if max(float(np.abs(a - b).max()) for a, b in zip(x, y)) <= 1e-9:
        x = y
    if min(float(p.min()) for p in x) <= 0:
        return None
    if max(float(np.abs(a - b).max()) for a, b in zip(x, start)) > max_jump:
        return None
    res = _residual(mats, x, lam)
    return (x, res) if res <= 1e-10 else None


def _system(mats, z, width):
    """Residual and Jacobian of x - logit(lam * payoff(x)) in z = (x, lam * width)."""
    a, b = mats
    k0 = a.shape[0]
    x = [z[:k0], z[k0:-1]]
    lam = z[-1] / width
    u0, u1 = _payoffs(mats, x)
    r0, r1 = _logit(u0, lam), _logit(u1, lam)
    d0 = np.diag(r0) - np.outer(r0, r0)
    d1 = np.diag(r1) - np.outer(r1, r1)
    n = len(z) - 1
    jac = np.zeros((n, n + 1))
    jac[:, :n] = np.eye(n)
    jac[:k0, k0:n] -= lam * d0 @ a
    jac[k0:, :k0] -= lam * d1 @ b.T
    jac[:k0, n] = -(d0 @ u0) / width
    jac[k0:, n] = -(d1 @ u1) / width
    return z[:n] - np.concatenate([r0, r1]), jac


def _tangent(jac, prev=None):
    t = np.linalg.svd(jac)[2][-1]
    if prev is None:
        return t if t[-1] > 0 else -t
    return t if t @ prev > 0 else -t


def _arc_correct(mats, z_pred, t, width, steps: int = 12):
    """Newton on the branch equations plus the plane through z_pred normal to t."""
    z = z_pred.copy()
    for _ in range(steps):
        f, jac = _system(mats, z, width)
        g = np.append(f, t @ (z - z_pred))
        if np.abs(g).max() < 1e-12:
            return z
        try:
            z = z - np.linalg.solve(np.vstack([jac, t]), g)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(z)):
            return None
    f, _ = _system(mats, z, width)
    return z if np.abs(f).max() < 1e-10 else None


def _record(mats, z_from, z_to, value, width, k0):
    """Branch point at lambda = value between two accepted arclength points."""
    s0, s1 = z_from[-1], z_to[-1]
    w = 0.0 if s1 == s0 else (value * width - s0) / (s1 - s0)
    guess = (1 - w) * z_from[:-1] + w * z_to[:-1]
    guess = np.maximum(guess, 1e-300)
    start = [guess[:k0] / guess[:k0].sum(), guess[k0:] / guess[k0:].sum()]
    got = _correct(mats, start, value, max_jump=0.05)
    if got is None:
        got = _damped(mats, start, value)
    return got


def logit_qre_trace(game: Game, lambda_grid: Sequence[float] | None = None,
                    max_steps: int = 100_000) -> list[QrePoint]:
    """Principal logit branch from the uniform profile.

    The branch is followed by pseudo-arclength continuation in (profile,
    lambda), so it survives folds where lambda turns back.  A point is
    recorded, in branch order, each time the branch reaches a grid value of
    lambda; after a fold the same lambda can appear more than once.
    """
    if game.num_players != 2:
        raise ValidationError("logit tracing supports two-player games")
    grid = default_lambda_grid(game) if lambda_grid is None else [float(v) for v in lambda_grid]
    if not grid or grid[0] < 0 or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValidationError("lambda grid must be non-negative and strictly increasing")
    mats = game.float_payoffs
    k0 = game.action_counts[0]
    width = max(float(p.max() - p.min()) for p in mats) or 1.0
    top = grid[-1]

    def point(lam, x, res):
        return QrePoint(lam, tuple(tuple(float(v) for v in s) for s in x), res)

    x0 = [np.full(k, 1.0 / k) for k in game.action_counts]
    z = np.append(np.concatenate(x0), 0.0)
    out = []
    if grid[0] == 0:
        out.append(point(0.0, x0, 0.0))
    _, jac = _system(mats, z, width)
    t = _tangent(jac)
    h, h_min, h_max = 0.05, 1e-9, 20.0
    for _ in range(max_steps):
        if z[-1] >= top * width:
            break
        z_new = _arc_correct(mats, z + h * t, t, width)
        if (z_new is None or np.linalg.norm(z_new - z) > 2 * h
                or z_new[:-1].min() < -1e-9):
            h /= 2
            if h < h_min:
                raise ContinuationError("logit branch stalled",
                                        parameter=float(z[-1] / width))
            continue
        lo, hi = sorted((z[-1], z_new[-1]))
        crossed = [v for v in grid if v > 0 and lo < v * width <= hi]
        if z_new[-1] < z[-1]:
            crossed.reverse()
        for v in crossed:
            x, res = _record(mats, z, z_new, v, width, k0)
            out.append(point(v, x, res))
        _, jac = _system(mats, z_new, width)
        t = _tangent(jac, t)
        z = z_new
        h = min(h * 1.5, h_max)
    else:
        raise ContinuationError("logit branch did not reach the grid end",
                                parameter=float(z[-1] / width))
    return out


@dataclass(frozen=True)
class DominanceBound:
    applicable: bool
    player: int | None = None
    action: int | None = None
    mixture: tuple | None = None        # (other_a, other_b, weight on other_a)
    theoretical_bound: float | None = None
    max_probability: float | None = None
    holds: bool | None = None

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


def dominating_mixture(rows: Sequence[Sequence], action: int):
    """Exact weight interval of w*row_a + (1-w)*row_b strictly beating `action`.

    Returns (a, b, weight) with the weight closest to 1/2 inside the open
    feasible interval, or None.  Only three-action payoff tables are handled.
    """
    rows = [[Fraction(v) for v in r] for r in rows]
    others = [j for j in range(len(rows)) if j != action]
    if len(others) != 2:
        return None
    a, b = others
    lo, hi = Fraction(0), Fraction(1)
    lo_open = hi_open = False
    for c in range(len(rows[action])):
        # w*(ra - rb) > rx - rb
        slope = rows[a][c] - rows[b][c]
        rhs = rows[action][c] - rows[b][c]
        if slope == 0:
            if not rhs < 0:
                return None
        elif slope > 0:
            t = rhs / slope
            if t >= lo:
                lo, lo_open = t, True
        else:
            t = rhs / slope
            if t <= hi:
                hi, hi_open = t, True
    if lo > hi or (lo == hi and (lo_open or hi_open)):
        return None
    w = min(max(Fraction(1, 2), lo), hi)
    if (w == lo and lo_open) or (w == hi and hi_open):
        w = (lo + hi) / 2
    return a, b, w


def logit_dominated_bound_check(game: Game, trace: Sequence[QrePoint]) -> DominanceBound:
    """Does every traced point keep the mixture-dominated action at or below 1/3?"""
    for i in range(game.num_players):
        pays = game.payoffs[i]
        rows = [list(pays[a, :]) for a in range(pays.shape[0])] if i == 0 \
            else [list(pays[:, a]) for a in range(pays.shape[1])]
        if len(rows) != 3:
            continue
        for act in range(3):
            mix = dominating_mixture(rows, act)
            if mix is None:
                continue
            w = max(mix[2], 1 - mix[2])
            bound = float(w / (1 + w))
            top = max(pt.profile[i][act] for pt in trace)
            return DominanceBound(True, i, act, (mix[0], mix[1], format_rational(mix[2])),
                                  bound, top, top <= 1 / 3 + 1e-12)
    return DominanceBound(False)


def _luce_exponents(rho_r, rho_c):
    den = rho_c * rho_r + 1
    return rho_c * (1 - rho_r) / den, rho_r * (1 + rho_c) / den


def _inv_one_plus_five(e):
    if isinstance(e, Fraction) and e.denominator == 1:
        return Fraction(1) / (1 + Fraction(5) ** int(e))
    e = float(e)
    if e > 700:
        return 0.0
    return 1.0 / (1.0 + 5.0 ** e)


def luce_amp_closed_form(rho_r, rho_c):
    """(p, q): Column's and Row's probability of A in the asymmetric matching-pennies game.

    Exact when both exponents are integers; floats otherwise.
    """
    if rho_r < 0 or rho_c < 0:
        raise DomainError("rationality parameters must be non-negative")
    exact = all(isinstance(v, (int, Fraction)) for v in (rho_r, rho_c))
    if exact:
        rho_r, rho_c = Fraction(rho_r), Fraction(rho_c)
    else:
        rho_r, rho_c = float(rho_r), float(rho_c)
    ep, eq = _luce_exponents(rho_r, rho_c)
    return _inv_one_plus_five(ep), _inv_one_plus_five(eq)


def luce_samples(n: int, r_max: float = 100.0, seed: int = 0) -> np.ndarray:
    """Closed-form points for (rho_R, rho_C) drawn half uniform, half log-uniform on [0, r_max]^2."""
    rng = np.random.default_rng(seed)
    half = n // 2
    uni = rng.uniform(0, r_max, size=(half, 2))
    logu = np.exp(rng.uniform(math.log(1e-3), math.log(r_max), size=(n - half, 2)))
    pars = np.vstack([uni, logu])
    return np.array([luce_amp_closed_form(float(a), float(b)) for a, b in pars], dtype=float)


def in_luce_union(p: float, q: float, tol: float = 1e-9) -> bool:
    """Membership in [0,1/2]x[1/6,1/2] or [1/2,5/6]x[0,1/6] (with tolerance)."""
    red = -tol <= p <= 0.5 + tol and 1 / 6 - tol <= q <= 0.5 + tol
    blue = 0.5 - tol <= p <= 5 / 6 + tol and -tol <= q <= 1 / 6 + tol
    return red or blue
