"""Command-line interface: `mequilibrium <command> [options]`.

Every command writes a JSON result document (stdout or --out) and, where it
makes sense, an SVG plot (--plot).  Exit codes: 0 success, 2 capability
error, 3 validation error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import analysis, elicitation, fixtures, msets, mu, nash, qre
from .errors import CapabilityError, ContinuationError, MEquilibriumError, ValidationError
from .numeric import format_rational, parse_rational

THREADS_ENV = "MEQ_THREADS"
EXIT_OK, EXIT_CAPABILITY, EXIT_VALIDATION = 0, 2, 3

# Fill colors keyed to the index of the colorable set in enumeration order;
# degenerate components are drawn in grey.
PALETTE = ["#d62728", "#f2c500", "#1f77b4", "#2ca02c", "#17becf", "#9467bd",
           "#ff7f0e", "#8c564b", "#e377c2", "#bcbd22", "#7f7f7f", "#393b79"]
GREY = "#999999"


# ---------------------------------------------------------------------------
# helpers


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def dump_document(doc: dict) -> str:
    return json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"


def _write(path: str | None, text: str, force: bool) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    p = Path(path)
    if p.exists() and not force:
        raise ValidationError(f"{path} exists; pass --force to overwrite")
    p.write_text(text)


def _profile(text: str) -> list[list]:
    """'1/2,1/2;1/3,2/3' -> one vector per player."""
    return [[parse_rational(v) for v in part.split(",")] for part in text.split(";")]


def _require_seed(args) -> int:
    if args.seed is None:
        raise ValidationError("--seed is required for randomized computations")
    return args.seed


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    return max(1, int(os.environ.get(THREADS_ENV, "1")))


# ---------------------------------------------------------------------------
# SVG


def _svg(width: int, height: int, body: list[str]) -> str:
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">\n' + "\n".join(body) + "\n</svg>\n")


def _ternary_xy(p, size=300, pad=20):
    # vertices: action 0 bottom-left, action 1 bottom-right, action 2 top
    a, b, c = (float(v) for v in p)
    x = pad + size * (b + c / 2)
    y = pad + size * (1 - c) * (3 ** 0.5 / 2) + size * (1 - 3 ** 0.5 / 2)
    return x, y


def _square_xy(p, size=300, pad=20):
    x, y = (float(v) for v in p)
    return pad + size * x, pad + size * (1 - y)


def svg_shapes(doc: dict) -> str:
    body = []
    kinds = {s["kind"] for s in doc["shapes"]}
    tern = "ternary" in kinds
    mapper = _ternary_xy if tern else _square_xy
    if tern:
        frame = [mapper(v) for v in ((1, 0, 0), (0, 1, 0), (0, 0, 1))]
    else:
        frame = [mapper(v) for v in ((0, 0), (1, 0), (1, 1), (0, 1))]
    body.append('<polygon points="%s" fill="none" stroke="black"/>' %
                " ".join(f"{x:.2f},{y:.2f}" for x, y in frame))
    for s in doc["shapes"]:
        color = PALETTE[s["set"] % len(PALETTE)] if s.get("colorable", True) else GREY
        pts = [mapper(v) for v in s["polygon"]]
        if len(pts) == 1:
            x, y = pts[0]
            body.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="{color}"/>')
        else:
            opacity = "0.6" if s["which"] == "choice" else "0.25"
            body.append('<polygon points="%s" fill="%s" fill-opacity="%s" stroke="%s"/>' % (
                " ".join(f"{x:.2f},{y:.2f}" for x, y in pts), color, opacity, color))
    for m in doc.get("markers", []):
        x, y = mapper(m)
        body.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="black"/>')
    return _svg(340, 340, body)


def svg_polylines(lines: list[list[tuple]], square: bool = True) -> str:
    mapper = _square_xy if square else _ternary_xy
    body = []
    frame = [mapper(v) for v in (((0, 0), (1, 0), (1, 1), (0, 1)) if square
                                 else ((1, 0, 0), (0, 1, 0), (0, 0, 1)))]
    body.append('<polygon points="%s" fill="none" stroke="black"/>' %
                " ".join(f"{x:.2f},{y:.2f}" for x, y in frame))
    for i, line in enumerate(lines):
        pts = [mapper(p) for p in line]
        body.append('<polyline points="%s" fill="none" stroke="%s" stroke-width="2"/>' % (
            " ".join(f"{x:.2f},{y:.2f}" for x, y in pts), PALETTE[i % len(PALETTE)]))
    return _svg(340, 340, body)


def svg_curve(xs, ys) -> str:
    w, h, pad = 400, 300, 30
    xmin, xmax = min(xs), max(xs)
    ymax = max(ys) or 1.0
    pts = [(pad + (w - 2 * pad) * (x - xmin) / max(xmax - xmin, 1e-12),
            h - pad - (h - 2 * pad) * y / ymax) for x, y in zip(xs, ys)]
    body = ['<polyline points="%s" fill="none" stroke="black" stroke-width="2"/>' %
            " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)]
    body += [f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3"/>' for x, y in pts]
    return _svg(w, h, body)


def _profile_xy(profile) -> tuple:
    """(column's first-action prob, row's first-action prob) for 2x2 plots."""
    return float(profile[1][0]), float(profile[0][0])


# ---------------------------------------------------------------------------
# commands


def cmd_msets(args) -> tuple[dict, str | None]:
    game = fixtures.resolve_game(args.game)
    seed = _require_seed(args) if args.mode == "sampled" else args.seed
    meqs = msets.enumerate_m_equilibria(game, symmetric=args.symmetric, mode=args.mode,
                                        samples=args.samples, seed=seed)
    labels = [list(a) for a in game.labels] if game.labels else None
    doc = {"command": "msets", "game": game.name, "mode": args.mode, "symmetric": args.symmetric,
           "seed": seed, "count": len(meqs),
           "colorable": sum(m.colorable for m in meqs),
           "equilibria": [m.to_dict(labels) for m in meqs]}
    svg = None
    if args.mode == "exact":
        plot = msets.plot_data(game, meqs)
        for s in plot["shapes"]:
            s["colorable"] = meqs[s["set"]].colorable
        doc["plot"] = plot
        if plot["shapes"]:
            svg = svg_shapes(plot)
    return doc, svg


def cmd_mu_sweep(args):
    game = fixtures.resolve_game(args.game)
    grid = mu.parse_rho_grid(args.rho)
    path = mu.sweep_correspondence(game, grid, threshold=args.threshold, refine=not args.no_refine)
    doc = {"command": "mu-sweep", "game": game.name, "path": path.to_dict(),
           "principal": [{"rho": mu._fmt_rho(r), "profile": [[float(v) for v in s] for s in p]}
                         for r, p in path.principal()]}
    svg = None
    if game.action_counts == (2, 2):
        svg = svg_polylines([[_profile_xy(p) for _, p in path.principal()]])
    return doc, svg


def cmd_qre_trace(args):
    game = fixtures.resolve_game(args.game)
    grid = None
    if args.lambdas:
        grid = [float(v) for v in args.lambdas.split(",")]
    trace = qre.logit_qre_trace(game, grid)
    bound = qre.logit_dominated_bound_check(game, trace)
    doc = {"command": "qre-trace", "game": game.name,
           "trace": [p.to_dict() for p in trace],
           "max_probability": [[max(p.profile[i][a] for p in trace) for a in range(k)]
                               for i, k in enumerate(game.action_counts)],
           "dominance_bound": bound.to_dict()}
    svg = None
    if game.action_counts == (2, 2):
        svg = svg_polylines([[_profile_xy(p.profile) for p in trace]])
    elif game.action_counts == (3, 3):
        svg = svg_polylines([[p.profile[0] for p in trace]], square=False)
    return doc, svg


def cmd_nash(args):
    game = fixtures.resolve_game(args.game)
    points = nash.all_nash_points(game)
    doc = {"command": "nash", "game": game.name, "equilibria": [p.to_dict() for p in points]}
    if args.symmetric:
        sym, _ = nash.symmetric_nash(game)
        doc["symmetric"] = [p.to_dict() for p in sym]
    if args.beaune:
        choice = _profile(args.beaune)
        b = nash.beaune(game, choice)
        doc["beaune"] = None if b is None else {
            "choice": [[format_rational(v) for v in s] for s in b.choice],
            "belief_set": b.belief_set.to_dict(),
            "trembling_hand_perfect": b.trembling_hand_perfect}
    return doc, None


def cmd_stability(args):
    game = fixtures.resolve_game(args.game)
    seed = _require_seed(args)
    choice = _profile(args.choice)
    belief = _profile(args.belief) if args.belief else [list(choice[1]), list(choice[0])]
    rep = msets.behavioral_stability(game, choice, belief, epsilon=parse_rational(args.epsilon),
                                     trials=args.trials, seed=seed, max_failures=args.max_failures)
    return {"command": "stability", "game": game.name, "seed": seed,
            "epsilon": args.epsilon, "report": rep.to_dict()}, None


def cmd_elicit_sim(args):
    seed = _require_seed(args)
    rate, se = elicitation.empirical_win_rate(args.p, args.q, args.trials, seed)
    exact = elicitation.win_probability(parse_rational(str(args.p)), parse_rational(str(args.q)))
    ic = elicitation.verify_incentive_compatibility(args.p, args.step)
    return {"command": "elicit-sim", "seed": seed, "p": args.p, "q": args.q, "trials": args.trials,
            "win_probability": exact, "empirical_rate": rate, "std_error": se,
            "incentive": ic.to_dict()}, None


def _belief_points(obs) -> np.ndarray:
    return np.array([o.belief for o in obs], dtype=float)


def cmd_cluster(args):
    seed = _require_seed(args)
    obs = analysis.ingest(args.data)
    pts = _belief_points(obs)
    doc = {"command": "cluster", "seed": seed, "rejected_rows": obs.errors}
    svg = None
    if args.k is None:
        el = analysis.elbow(pts, range(args.k_min, args.k_max + 1), args.restarts, seed)
        doc["elbow"] = el.to_dict()
        k = el.suggested
        svg = svg_curve(el.ks, el.errors)
    else:
        k = args.k
    cl = analysis.kmeans(pts, k, args.restarts, seed)
    doc["clustering"] = cl.to_dict()
    return doc, svg


def cmd_classify(args):
    game = fixtures.resolve_game(args.game)
    obs = analysis.ingest(args.data, {game.name: game})
    meqs = msets.enumerate_m_equilibria(game, symmetric=args.symmetric, markers=False)
    clustering = None
    if args.k:
        seed = _require_seed(args)
        clustering = analysis.kmeans(_belief_points(obs), args.k, args.restarts, seed)
    report = analysis.classify_into_sets(game, obs, meqs, clustering)
    report.pop("observations") if not args.verbose else None
    return {"command": "classify", "game": game.name, "seed": args.seed,
            "rejected_rows": obs.errors, "report": report,
            "best_response_rate": analysis.best_response_rate(game, obs)}, None


COMMANDS = {
    "msets": cmd_msets, "mu-sweep": cmd_mu_sweep, "qre-trace": cmd_qre_trace, "nash": cmd_nash,
    "stability": cmd_stability, "elicit-sim": cmd_elicit_sim, "cluster": cmd_cluster,
    "classify": cmd_classify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mequilibrium", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="result document path (default: stdout)")
    common.add_argument("--plot", help="SVG plot path")
    common.add_argument("--force", action="store_true", help="overwrite existing output files")
    common.add_argument("--seed", type=int, help="RNG seed (required by randomized commands)")
    common.add_argument("--threads", type=int, help=f"worker cap (default: ${THREADS_ENV} or 1)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("msets", parents=[common], help="M-equilibrium choice and belief sets")
    p.add_argument("--game", required=True, help="fixture name or game file")
    p.add_argument("--mode", choices=["exact", "sampled"], default="exact")
    p.add_argument("--symmetric", action="store_true")
    p.add_argument("--samples", type=int, default=msets.DEFAULT_SAMPLES)

    p = sub.add_parser("mu-sweep", parents=[common], help="mu-equilibrium correspondence along rho")
    p.add_argument("--game", required=True)
    p.add_argument("--rho", default="0:5:1/10", help="'start:stop:step' or comma list")
    p.add_argument("--threshold", type=float, default=0.2)
    p.add_argument("--no-refine", action="store_true")

    p = sub.add_parser("qre-trace", parents=[common], help="principal logit QRE branch")
    p.add_argument("--game", required=True)
    p.add_argument("--lambdas", help="comma-separated increasing lambda grid")

    p = sub.add_parser("nash", parents=[common], help="Nash equilibria and BEAUNE belief sets")
    p.add_argument("--game", required=True)
    p.add_argument("--symmetric", action="store_true")
    p.add_argument("--beaune", help="choice profile 'a,b;c,d' for the BEAUNE belief set")

    p = sub.add_parser("stability", parents=[common], help="behavioral stability test")
    p.add_argument("--game", required=True)
    p.add_argument("--choice", required=True, help="'a,b;c,d'")
    p.add_argument("--belief", help="'a,b;c,d' (default: correct beliefs)")
    p.add_argument("--epsilon", default="1/100")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--max-failures", type=int)

    p = sub.add_parser("elicit-sim", parents=[common], help="binarized scoring rule simulation")
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--q", type=float, default=0.5)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--step", type=float, default=0.001)

    p = sub.add_parser("cluster", parents=[common], help="k-means on elicited beliefs")
    p.add_argument("--data", required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--k-min", type=int, default=2)
    p.add_argument("--k-max", type=int, default=15)
    p.add_argument("--restarts", type=int, default=5000)

    p = sub.add_parser("classify", parents=[common], help="classify observations into colored sets")
    p.add_argument("--game", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--symmetric", action="store_true")
    p.add_argument("--k", type=int, help="also cluster beliefs with k centroids")
    p.add_argument("--restarts", type=int, default=5000)
    p.add_argument("--verbose", action="store_true", help="include per-observation labels")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        for target in (args.out, args.plot):
            if target and target != "-" and Path(target).exists() and not args.force:
                raise ValidationError(f"{target} exists; pass --force to overwrite")
        args.threads = _threads(args)
        doc, svg = COMMANDS[args.command](args)
        doc["threads"] = args.threads
        _write(args.out, dump_document(doc), args.force)
        if args.plot and svg is not None:
            _write(args.plot, svg, args.force)
    except CapabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    except (ValidationError, ContinuationError, MEquilibriumError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
