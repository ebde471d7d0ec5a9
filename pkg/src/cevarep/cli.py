"""Command-line interface.

Subcommands:
  gen       write a random ratio-of-affine map as JSON
  eval      evaluate a stored map at one point
  certify   run the black-box segment-inclusion certifier
  extract   recover a ratio-of-affine representation from an oracle
  ceva      check cevian concurrency and print the common point

Machine output is a single JSON document on stdout; human diagnostics go
to stderr.  Exit codes: 0 pass, 1 violated, 2 inconclusive or refused,
3 usage or runtime error.

Oracles come from exactly one of --map (a JSON map file, sampled over a
box around its anchor unless --region overrides) or --src (map source in
the text format of cevarep.mapdsl, which carries its own region).  A
--config JSON file can map these and other defaults under the keys
map_path, map_src, seed, trials; explicit flags win.

CEVAREP_THREADS is accepted and validated for compatibility with capped
environments; computation is sequential, so results are identical under
any setting.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from cevarep import __version__, mapdsl
from cevarep.ceva import CevaWeights, ceva_point, cevian_intersection_bruteforce
from cevarep.certify import CertifyConfig, certify
from cevarep.errors import (
    CevarepError,
    CollinearVertices,
    ConditionViolated,
    OracleFailure,
)
from cevarep.extract import ExtractConfig, extract_representation
from cevarep.fracaffine import (
    FracAffineMap,
    as_oracle,
    min_bottom_over_box,
    random_fracaffine,
)
from cevarep.geom import Tolerances
from cevarep.oracle import SamplingRegion


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse variant whose usage failures exit 3, not 2."""

    def exit(self, status=0, message=None):
        if status == 0:
            if message:
                sys.stderr.write(message)
            raise SystemExit(0)
        raise _UsageError(message or "invalid arguments")

    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


def _nonneg_int(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _build_parser() -> _Parser:
    parser = _Parser(prog="cevarep", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version",
                        version=f"cevarep {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a random map as JSON")
    p_gen.add_argument("-n", type=_positive_int, default=2,
                       help="input dimension")
    p_gen.add_argument("-m", type=_positive_int, default=2,
                       help="output dimension")
    p_gen.add_argument("--seed", type=_nonneg_int, default=0)
    p_gen.add_argument("--spread", type=float, default=0.3)
    p_gen.add_argument("--out", help="also write the JSON document here")

    p_eval = sub.add_parser("eval", help="evaluate a stored map at a point")
    p_eval.add_argument("--map", required=True, help="path to a map JSON file")
    p_eval.add_argument("--at", required=True,
                        help="comma-separated point coordinates")
    p_eval.add_argument("--out")

    for name, helptext in (
        ("certify", "certify segment inclusion for a black-box map"),
        ("extract", "recover a ratio-of-affine representation"),
    ):
        p = sub.add_parser(name, help=helptext)
        src = p.add_mutually_exclusive_group()
        src.add_argument("--map", help="path to a map JSON file")
        src.add_argument("--src", help="map source text (cevarep.mapdsl format)")
        p.add_argument("--config", help="JSON config file; flags override it")
        p.add_argument("--region",
                       help="sampling box as lo:hi per coordinate, "
                            "comma-separated, e.g. -1:1,-1:1")
        p.add_argument("--seed", type=_nonneg_int, default=None)
        p.add_argument("--trials", type=_positive_int, default=None)
        p.add_argument("--tol-collinear", type=float, default=None)
        p.add_argument("--tol-fit", type=float, default=None)
        p.add_argument("--out")

    p_ceva = sub.add_parser("ceva", help="cevian concurrency check")
    p_ceva.add_argument("--vertices", required=True,
                        help="three points, coordinates comma-separated, "
                             "points separated by semicolons")
    p_ceva.add_argument("--weights", required=True,
                        help="t_x,t_y,t_z,s_x,s_y,s_z")
    p_ceva.add_argument("--tol-collinear", type=float, default=None)
    p_ceva.add_argument("--out")
    return parser


def _emit(doc, out_path=None):
    text = json.dumps(doc, indent=2) + "\n"
    sys.stdout.write(text)
    if out_path:
        with open(out_path, "w") as handle:
            handle.write(text)


def _note(message):
    sys.stderr.write(message + "\n")


def _error_doc(exc, out_path=None):
    doc = {
        "tool_version": __version__,
        "error": type(exc).__name__,
        "message": str(exc),
    }
    _emit(doc, out_path)
    _note(f"error: {type(exc).__name__}: {exc}")
    return doc


def _tolerances(args) -> Tolerances:
    kwargs = {}
    if getattr(args, "tol_collinear", None) is not None:
        kwargs["tol_collinear"] = args.tol_collinear
    if getattr(args, "tol_fit", None) is not None:
        kwargs["tol_fit"] = args.tol_fit
    return Tolerances(**kwargs)


def _parse_region(text) -> SamplingRegion:
    lo = []
    hi = []
    for part in text.split(","):
        pieces = part.split(":")
        if len(pieces) != 2:
            raise _UsageError(
                f"bad region component {part!r}; expected lo:hi"
            )
        lo.append(float(pieces[0]))
        hi.append(float(pieces[1]))
    return SamplingRegion(np.array(lo), np.array(hi))


def _auto_region(f: FracAffineMap, tol: Tolerances) -> SamplingRegion:
    # a box around the anchor, shrunk until the denominator stays
    # comfortably positive on all of it
    half = 0.5
    while half > 1e-6:
        region = SamplingRegion(f.anchor - half, f.anchor + half)
        if min_bottom_over_box(f, region) > 0.1:
            return region
        half *= 0.5
    raise CevarepError(
        "could not find a sampling box around the anchor inside the domain; "
        "pass --region explicitly"
    )


def _load_config(path):
    if path is None:
        return {}
    with open(path) as handle:
        doc = json.load(handle)
    if not isinstance(doc, dict):
        raise _UsageError("config file must hold a JSON object")
    return doc


def _build_oracle(args, cfg_doc, tol):
    map_path = args.map or cfg_doc.get("map_path")
    map_src = args.src if args.src is not None else cfg_doc.get("map_src")
    if (map_path is None) == (map_src is None):
        raise _UsageError(
            "exactly one map source is required: --map/--src on the command "
            "line or map_path/map_src in the config"
        )
    region_flag = args.region
    if map_src is not None:
        spec = mapdsl.parse(map_src)
        oracle = mapdsl.compile(spec)
        if region_flag:
            region = _parse_region(region_flag)
            if region.dim != spec.in_dim:
                raise _UsageError(
                    f"--region has {region.dim} coordinates, map has "
                    f"{spec.in_dim}"
                )
            oracle = dataclasses.replace(oracle, region=region)
        return oracle
    with open(map_path) as handle:
        f = FracAffineMap.from_json(handle.read())
    if region_flag:
        region = _parse_region(region_flag)
    else:
        region = _auto_region(f, tol)
    return as_oracle(f, region, tol)


# options whose values are coordinate lists and often start with a minus
# sign; argparse would misread "--region -1:1" as two flags, so these get
# joined into --opt=value form before parsing
_VALUE_OPTIONS = ("--at", "--region", "--vertices", "--weights")


def _normalize_argv(argv):
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_OPTIONS and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def _check_threads_env():
    raw = os.environ.get("CEVAREP_THREADS")
    if raw is None:
        return
    try:
        value = int(raw)
    except ValueError:
        raise _UsageError(f"CEVAREP_THREADS must be an integer, got {raw!r}")
    if value < 1:
        raise _UsageError(f"CEVAREP_THREADS must be >= 1, got {value}")


def _cmd_gen(args) -> int:
    f = random_fracaffine(args.n, args.m, rng_seed=args.seed, spread=args.spread)
    # metadata keys ride alongside the map fields; from_json_dict ignores
    # them, so the emitted document doubles as a loadable map file
    doc = {"tool_version": __version__, "seed": args.seed}
    doc.update(f.to_json_dict())
    _emit(doc, args.out)
    _note(f"generated a {args.n} -> {args.m} map with seed {args.seed}")
    return 0


def _cmd_eval(args) -> int:
    with open(args.map) as handle:
        f = FracAffineMap.from_json(handle.read())
    point = np.array([float(v) for v in args.at.split(",")])
    image = f.eval(point)
    _emit([float(v) for v in image], args.out)
    return 0


def _cmd_certify(args) -> int:
    cfg_doc = _load_config(args.config)
    tol = _tolerances(args)
    seed = args.seed if args.seed is not None else int(cfg_doc.get("seed", 0))
    trials = (args.trials if args.trials is not None
              else int(cfg_doc.get("trials", 1000)))
    oracle = _build_oracle(args, cfg_doc, tol)
    cfg = CertifyConfig(trials=trials, rng_seed=seed, tolerances=tol)
    try:
        report = certify(oracle, cfg)
    except OracleFailure as exc:
        _error_doc(exc, args.out)
        return 3
    doc = {
        "tool_version": __version__,
        "command": "certify",
        "seed": seed,
        "trials": trials,
        "report": report.to_json_dict(),
    }
    _emit(doc, args.out)
    _note(
        f"verdict: {report.verdict} ({report.trials} trials, "
        f"{report.violations} violations, {report.skipped} skipped)"
    )
    if report.verdict == "pass":
        return 0
    if report.verdict == "violated":
        return 1
    return 2


def _cmd_extract(args) -> int:
    cfg_doc = _load_config(args.config)
    tol = _tolerances(args)
    seed = args.seed if args.seed is not None else int(cfg_doc.get("seed", 0))
    trials = (args.trials if args.trials is not None
              else int(cfg_doc.get("trials", 100)))
    oracle = _build_oracle(args, cfg_doc, tol)
    cfg = ExtractConfig(rng_seed=seed, base_trials=trials, tolerances=tol)
    try:
        result = extract_representation(oracle, cfg)
    except CevarepError as exc:
        _error_doc(exc, args.out)
        return 2
    doc = {
        "tool_version": __version__,
        "command": "extract",
        "seed": seed,
        "trials": trials,
        "result": result.to_json_dict(),
    }
    _emit(doc, args.out)
    _note(
        f"recovered a {result.map.in_dim} -> {result.map.out_dim} map; "
        f"validation sup error {result.validation_sup_error:.3e}"
    )
    return 0


def _cmd_ceva(args) -> int:
    vertices = []
    for part in args.vertices.split(";"):
        vertices.append(np.array([float(v) for v in part.split(",")]))
    if len(vertices) != 3:
        raise _UsageError(f"expected 3 vertices, got {len(vertices)}")
    weights = [float(v) for v in args.weights.split(",")]
    if len(weights) != 6:
        raise _UsageError(f"expected 6 weights, got {len(weights)}")
    w = CevaWeights(*weights)
    tol = _tolerances(args)
    x, y, z = vertices
    try:
        point = ceva_point(x, y, z, w, tol)
    except ConditionViolated as exc:
        doc = {
            "tool_version": __version__,
            "command": "ceva",
            "verdict": "violated",
            "error": type(exc).__name__,
            "message": str(exc),
        }
        _emit(doc, args.out)
        _note(f"concurrency condition violated: {exc}")
        return 1
    cross = cevian_intersection_bruteforce(x, y, z, w, tol)
    crosscheck = (
        float(np.linalg.norm(point - cross)) if cross is not None else None
    )
    doc = {
        "tool_version": __version__,
        "command": "ceva",
        "verdict": "concurrent",
        "point": [float(v) for v in point],
        "crosscheck_distance": crosscheck,
    }
    _emit(doc, args.out)
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(_normalize_argv(argv))
        _check_threads_env()
        if args.command == "gen":
            return _cmd_gen(args)
        if args.command == "eval":
            return _cmd_eval(args)
        if args.command == "certify":
            return _cmd_certify(args)
        if args.command == "extract":
            return _cmd_extract(args)
        return _cmd_ceva(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except _UsageError as exc:
        _note(f"error: {exc}")
        return 3
    except (CevarepError, OSError, ValueError, json.JSONDecodeError) as exc:
        _error_doc(exc)
        return 3


def console_main():
    sys.exit(main())


if __name__ == "__main__":
    console_main()
