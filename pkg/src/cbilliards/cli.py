"""Command-line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 domain failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

import numpy as np

from .invisibility import (
    Body,
    BodyConstructionError,
    ORay,
    TraceError,
    build_two_parabola_body,
    check_invisible,
)
from .io import (
    Config,
    ConfigError,
    NothingToRender,
    OutputBundle,
    dumps,
    parse_config,
    render_svg,
    validate_tolerances,
)
from .mirrors import contains_isotropic_infinity
from .orbits import OrbitNotFound, solve_periodic, validate_orbit
from .projective import ProjectiveError
from .reflectivity import find_isotropic_edge_orbit, random_seed, reflectivity_probe

COMMANDS = ("probe", "solve", "chain", "check-isotropic-infinity", "trace-invisible", "render")

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN = 0, 1, 2


class DomainFailure(RuntimeError):
    """Structured failure of a pipeline (exit status 2)."""


def _param(cfg: Config, opts: dict, key: str, default):
    if opts.get(key) is not None:
        return opts[key]
    return cfg.params.get(key, default)


def _body(cfg: Config):
    spec = cfg.body or {"builder": "two-parabola"}
    if "builder" in spec:
        try:
            ib = build_two_parabola_body(float(spec.get("scale", 1.0)))
        except BodyConstructionError as exc:
            raise DomainFailure(str(exc)) from exc
        return ib.body, ib
    return Body.from_json({"mirrors": [m.to_json() for m in cfg.mirrors.values()],
                           "arcs": spec["arcs"]}), None


def run_command(cmd: str, cfg: Config, **opts) -> OutputBundle:
    """Dispatch one pipeline. Options: period, seeds, rng_seed, tolerances."""
    if cmd not in COMMANDS:
        raise ValueError(f"unknown command {cmd!r}")
    tol = {**cfg.tolerances, **(opts.get("tolerances") or {})}
    rng_seed = int(_param(cfg, opts, "rng_seed", 0))
    seeds = int(_param(cfg, opts, "seeds", 20))
    period = int(_param(cfg, opts, "period", cfg.k))
    bundle = OutputBundle(command=cmd, mirrors=[m.to_json() for m in cfg.mirrors.values()])
    solve_tol = tol.get("solve", 1e-11)
    rank_ratio = tol.get("rank_ratio", 1e-6)

    if cmd == "probe":
        b = cfg.billiard_for(period)
        rep = reflectivity_probe(b, period, seeds, rng=rng_seed, boxes=_boxes(cfg, period),
                                 tol=solve_tol, rank_ratio=rank_ratio)
        bundle.reports.append(rep.to_json())
        if rep.anchor is not None:
            bundle.orbits.append(rep.anchor.to_json())
    elif cmd == "solve":
        b = cfg.billiard_for(period)
        rng = np.random.default_rng(rng_seed)
        for _ in range(seeds):
            try:
                o = solve_periodic(b, period, random_seed(b, rng, _boxes(cfg, period)), tol=solve_tol)
            except (OrbitNotFound, ProjectiveError, ValueError):
                continue
            if validate_orbit(o).ok:
                bundle.orbits.append(o.to_json())
    elif cmd == "chain":
        b = cfg.billiard_for(period)
        for c in find_isotropic_edge_orbit(b, period, seeds, rng=rng_seed):
            bundle.chains.append(c.to_json())
    elif cmd == "check-isotropic-infinity":
        for label, m in cfg.mirrors.items():
            i1, i2 = contains_isotropic_infinity(m)
            bundle.checks.append({"mirror": label, "I1": bool(i1), "I2": bool(i2)})
    elif cmd == "trace-invisible":
        body, ib = _body(cfg)
        bundle.body = body.to_json()
        bundle.mirrors = []
        if cfg.rays:
            rays = [ORay(r["origin"], r["direction"]) for r in cfg.rays]
        elif ib is not None:
            rays = ib.sample_rays(seeds)
        else:
            raise DomainFailure("no rays given for a custom body")
        max_n = int(_param(cfg, opts, "max_reflections", 50))
        for ray in rays:
            try:
                v = check_invisible(body, ray, max_n, tol=tol.get("invisible", 1e-9))
            except TraceError as exc:
                bundle.trajectories.append({"input": ray.to_json(), "output": ray.to_json(),
                                            "points": [], "segments": [], "reflections": 0,
                                            "complete": False, "verdict": None,
                                            "error": str(exc)})
                continue
            bundle.trajectories.append(v.to_json())
    elif cmd == "render":
        src = OutputBundle.from_json(cfg.bundle) if cfg.bundle is not None else bundle
        try:
            src.svg = [render_svg(src)]
        except NothingToRender as exc:
            raise DomainFailure(str(exc)) from exc
        return src
    return bundle


def _boxes(cfg: Config, period: int):
    boxes = cfg.seed_boxes
    if isinstance(boxes, list) and len(boxes) != period:
        return [boxes[j % len(boxes)] for j in range(period)]
    return boxes


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cbilliards", description="Complex projective billiards toolkit")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="JSON configuration file")
    p.add_argument("--period", type=int)
    p.add_argument("--seeds", type=int)
    p.add_argument("--rng-seed", type=int, default=None)
    p.add_argument("--out", help="write the JSON bundle here instead of stdout")
    p.add_argument("--svg", help="also render the bundle to this SVG file")
    p.add_argument("--tolerance-overrides", help="JSON object of positive tolerances")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    try:
        with open(args.config, "rb") as fh:
            cfg = parse_config(fh.read())
        overrides = {}
        if args.tolerance_overrides:
            try:
                raw = json.loads(args.tolerance_overrides)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"invalid JSON: {exc.msg}", "--tolerance-overrides",
                                  (exc.lineno, exc.colno)) from exc
            overrides = validate_tolerances(raw, "--tolerance-overrides")
    except OSError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(dumps(exc.to_json()), file=sys.stderr)
        return EXIT_USAGE
    try:
        bundle = run_command(args.command, cfg, period=args.period, seeds=args.seeds,
                             rng_seed=args.rng_seed, tolerances=overrides)
        if args.svg:
            svg = bundle.svg[0] if bundle.svg else render_svg(bundle)
            with open(args.svg, "w") as fh:
                fh.write(svg)
    except ConfigError as exc:
        print(dumps(exc.to_json()), file=sys.stderr)
        return EXIT_USAGE
    except (DomainFailure, NothingToRender) as exc:
        print(dumps({"error": str(exc)}), file=sys.stderr)
        return EXIT_DOMAIN
    text = bundle.dumps()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


def main_exit() -> None:
    sys.exit(main())
