"""Command-line entry point.

Exit codes: 0 success, 2 bad configuration or input, 3 a mathematical audit failed, 4 I/O error.
Every JSON document carries the resolved configuration under "config"; output is deterministic
for a given configuration and seed. TROPSKEL_NUM_THREADS sizes the compiled kernels' threads.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from typing import Any, Sequence

from . import __version__

EXIT_OK, EXIT_CONFIG, EXIT_AUDIT, EXIT_IO = 0, 2, 3, 4


class ConfigError(Exception):
    pass


class AuditFailure(Exception):
    def __init__(self, msg: str, payload: dict | None = None):
        super().__init__(msg)
        self.payload = payload


# ---------------------------------------------------------------- helpers


def _rat(s: str) -> Fraction:
    try:
        return Fraction(s.strip())
    except (ValueError, ZeroDivisionError) as e:
        raise ConfigError(f"not a rational number: {s!r}") from e


def _rat_list(s: str) -> list[Fraction]:
    return [_rat(t) for t in s.split(",") if t.strip()]


def _float_list(s: str) -> list[float]:
    try:
        return [float(t) for t in s.split(",") if t.strip()]
    except ValueError as e:
        raise ConfigError(f"not a list of numbers: {s!r}") from e


def _read_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError:
        raise
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON ({e})") from e


def _jsonable(x):
    from .geom import rat_to_json

    if isinstance(x, Fraction):
        return rat_to_json(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, frozenset):
        return sorted(x)
    if hasattr(x, "item"):
        return x.item()
    return x


def _config_dict(args: argparse.Namespace) -> dict:
    skip = {"func", "config"}
    return {k: _jsonable(v) for k, v in sorted(vars(args).items()) if k not in skip}


def _document(kind: str, args: argparse.Namespace, result: dict) -> dict:
    return {"schema": kind, "version": __version__, "config": _config_dict(args), "result": _jsonable(result)}


def _dump(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _emit_json(args, kind: str, result: dict, path_attr: str = "emit") -> dict:
    doc = _document(kind, args, result)
    _write(getattr(args, path_attr, None), _dump(doc))
    return doc


def _cuts(args, skel):
    from .contract import barycentric_cuts, cuts_from_points
    from .geom import rat_from_json

    if args.cuts == "barycentric":
        return barycentric_cuts(skel)
    data = _read_json(args.cuts)
    try:
        pts = {frozenset(int(i) for i in row["face"]): [rat_from_json(t) for t in row["point"]] for row in data["cuts"]}
        return cuts_from_points(skel, pts)
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"bad cuts file: {e}") from e


def _spec(args):
    from .geom import rat_from_json
    from .trop import ConditionViolation, build_spec

    try:
        if getattr(args, "spec", None):
            data = _read_json(args.spec)
            if "result" in data and "spec" in data["result"]:
                data = data["result"]["spec"]
            n = int(data["n"])
            active = [[rat_from_json(t) for t in m] for m in data["active_monomials"]]
            return build_spec(n, active)
        return build_spec(args.n, getattr(args, "preset", "fermat") or "fermat")
    except ConditionViolation as e:
        raise AuditFailure(str(e)) from e
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"bad spec: {e}") from e


# ---------------------------------------------------------------- subcommands


def cmd_tropicalize(args) -> int:
    from .trop import all_strata, skeleton

    spec = _spec(args)
    skel = skeleton(spec)
    strata = [
        {"J": _labels(s.J), "face": sorted(s.face), "bounded": s.bounded, "dim": s.dim}
        for s in all_strata(spec)
    ]
    result = {"spec": spec.to_json(), "strata": strata, "skeleton": skel.to_json(), "n_L_pieces": len(spec.pieces),
              "n_facets": len(skel.maximal_faces)}
    if args.emit_off:
        _write(args.emit_off, _skeleton_off(skel))
    _emit_json(args, "tropicalize", result, "emit_json")
    return EXIT_OK


def _labels(J) -> list[str]:
    return sorted("zero" if isinstance(j, str) else str(j) for j in J)


def _skeleton_off(skel) -> str:
    from .geom import GeometryError, write_off

    if skel.n + 1 > 3:
        raise ConfigError("OFF export needs n <= 2 (cells in at most 3 dimensions)")
    if skel.n == 1:
        verts = [tuple(float(t) for t in v) + (0.0,) for v in skel.vertices]
    else:
        verts = [tuple(float(t) for t in v) for v in skel.vertices]
    faces = [tuple(sorted(f)) for f in skel.maximal_faces]
    if not faces:
        raise GeometryError("empty skeleton")
    return write_off(verts, faces)


def cmd_skeleton(args) -> int:
    from .trop import skeleton, skeleton_from_polar

    spec = _spec(args)
    a = skeleton(spec)
    b = skeleton_from_polar(spec)
    agree = sorted(sorted(f) for f in a.faces) == sorted(sorted(f) for f in b.faces)
    result = {"skeleton": a.to_json(), "euler_characteristic": a.euler_characteristic(), "routes_agree": agree}
    _emit_json(args, "skeleton", result)
    if not agree:
        raise AuditFailure("direct and polar skeleton routes disagree")
    return EXIT_OK


def _parse_point(n: int, item):
    from .geom import rat_from_json
    from .trop import CompactifiedPoint

    if isinstance(item, dict):
        if "ray_coords" in item:
            return CompactifiedPoint.from_ray_coords(n, [rat_from_json(t) for t in item["ray_coords"]], item.get("infinity", ()))
        return CompactifiedPoint.from_json(n, item)
    if isinstance(item, str):
        return CompactifiedPoint.make(n, _rat_list(item))
    return CompactifiedPoint.make(n, [rat_from_json(t) for t in item])


def cmd_contract(args) -> int:
    from .contract import ContractionMap, CoverError, NotInTropicalization, support_chain

    spec = _spec(args)
    from .trop import skeleton

    cuts = _cuts(args, skeleton(spec))
    cm = ContractionMap(spec, cuts)
    raw = _read_json(args.points)
    items = raw["points"] if isinstance(raw, dict) else raw
    rows = []
    for k, item in enumerate(items):
        try:
            pt = _parse_point(spec.n, item)
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"point {k}: {e}") from e
        try:
            w = cm.contract(pt)
        except NotInTropicalization as e:
            if not args.skip_invalid:
                raise ConfigError(f"point {k} is not in the tropicalization") from e
            rows.append({"index": k, "input": pt.to_json(), "error": "not_in_tropicalization"})
            continue
        except CoverError as e:
            raise AuditFailure(f"point {k}: {e}") from e
        chain, beta = support_chain(cuts, w)
        rows.append({"index": k, "input": pt.to_json(), "image": list(w),
                     "support_chain": [sorted(f) for f in chain], "barycentric_weights": list(beta)})
    _emit_json(args, "contract", {"n": spec.n, "points": rows})
    return EXIT_OK


def cmd_check_affine(args) -> int:
    from .contract import atlas_audit
    from .trop import skeleton

    skel = skeleton(args.n)
    cuts = _cuts(args, skel)
    rows = []
    for r in atlas_audit(skel, cuts):
        rep = r["report"]
        rows.append({"vertex_chart": r["vertex"], "face_chart": r["face"], "A": [list(x) for x in rep.A], "b": list(rep.b),
                     "det": rep.det, "integral": rep.integral, "unimodular": rep.unimodular})
    failures = sum(1 for r in rows if not (r["integral"] and r["unimodular"]))
    result = {"n": args.n, "transitions": rows, "failures": failures}
    _emit_json(args, "check_affine", result)
    if args.table:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["vertex_chart", "face_chart", "det", "integral", "unimodular"])
        for r in rows:
            w.writerow([r["vertex_chart"], "-".join(map(str, r["face_chart"])), str(r["det"]), r["integral"], r["unimodular"]])
        _write(args.table, buf.getvalue())
    if failures:
        raise AuditFailure(f"{failures} transitions are not in GL_n(Z)")
    return EXIT_OK


def cmd_check_comparison(args) -> int:
    import random

    from ._exact import dot
    from .contract import check_comparison, composed_potential, random_skeleton_pa, u_fs
    from .convex import PAConvexFunction
    from .trop import skeleton

    spec = _spec(args)
    skel = skeleton(spec)
    cuts = _cuts(args, skel)
    fs = u_fs(spec.n)
    admissible = True
    if args.potential == "fs":
        u = fs
    elif args.potential == "composed":
        u = composed_potential(cuts, random_skeleton_pa(cuts, random.Random(args.seed)), spec)
    elif args.potential == "perturbed":
        if args.m0 is None:
            raise ConfigError("--m0 is required for the perturbed potential")
        m0 = _rat_list(args.m0)
        if len(m0) != spec.n + 1:
            raise ConfigError(f"--m0 needs {spec.n + 1} entries")
        eps = _rat(args.eps)

        def u(x, m0=m0, eps=eps):
            return fs(x) + eps * dot(m0, x)

        admissible = False
    else:
        data = _read_json(args.potential)
        try:
            u = PAConvexFunction.from_json(data.get("result", data))
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"bad PA function file: {e}") from e
    try:
        rep = check_comparison(u, cuts, spec, samples=args.samples, seed=args.seed, require_admissible=admissible)
    except ValueError as e:
        raise ConfigError(str(e)) from e
    result = {
        "passed": rep.ok,
        "linearity": {str(i): {"pass": ok, "max_defect": rep.linearity_defect[i]} for i, ok in rep.linearity.items()},
        "invariance": [{"face": sorted(f), "pass": ok, "max_defect": rep.invariance_defect[f]} for f, ok in rep.invariance.items()],
        "failing_vertex_regions": rep.failing_vertex_regions,
        "failing_faces": rep.failing_faces,
    }
    _emit_json(args, "check_comparison", result)
    if not rep.ok:
        raise AuditFailure("comparison property fails in vertex regions " + str(rep.failing_vertex_regions))
    return EXIT_OK


def cmd_solve_ma(args) -> int:
    import math

    from .ma import fermat_face_problem, solve_semidiscrete

    g = (math.isqrt(8 * args.grid + 1) - 3) // 2
    if (g + 1) * (g + 2) // 2 != args.grid or g < 1:
        raise ConfigError("--grid must be a triangular number of sites (g+1)(g+2)/2 with g >= 1, e.g. 45")
    face = [l for l in range(4) if l != args.face]
    if not 0 <= args.face <= 3:
        raise ConfigError("--face is the index (0..3) of the vertex opposite the face")
    prob = fermat_face_problem(2, face, g)
    sol = solve_semidiscrete(prob, args.tol, args.max_iter)
    result = {"face": face, **sol.to_json()}
    _emit_json(args, "solve_ma", result)
    if not sol.converged:
        raise AuditFailure(f"solver stopped at residual {sol.residual!r}")
    return EXIT_OK


def cmd_haar_check(args) -> int:
    from .valn import LaurentPolynomial, haar_vs_gauss

    try:
        polys = [LaurentPolynomial.parse(p) for p in args.poly]
    except ValueError as e:
        raise ConfigError(str(e)) from e
    x = _float_list(args.x)
    nv = max(p.nvars for p in polys)
    if nv > len(x):
        raise ConfigError("--x has fewer coordinates than the polynomials have variables")
    polys = [LaurentPolynomial.parse(p, len(x)) for p in args.poly]
    consts = _float_list(args.consts) if args.consts else [0.0] * len(polys)
    if len(consts) != len(polys):
        raise ConfigError("--consts must give one constant per polynomial")
    lams = _float_list(args.lambdas)
    if any(l <= 0 for l in lams):
        raise ConfigError("lambdas must be positive")
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(_config_dict(args), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["lambda", "integral", "tropical", "error", "stderr"])
    for lam in lams:
        r = haar_vs_gauss(polys, consts, x, lam, args.samples, args.shifts, args.seed)
        w.writerow([repr(lam), repr(r.integral), repr(r.tropical), repr(r.error), repr(r.stderr)])
    _write(args.emit, buf.getvalue())
    return EXIT_OK


def cmd_resolve_vertex(args) -> int:
    from .geom import is_unimodular, vertex_resolution_expected, vertex_resolution_fan

    if args.n < 1:
        raise ConfigError("--n must be positive")
    fan = vertex_resolution_fan(args.n, args.hyperplanes)
    d = args.n + 2
    original = {tuple(int(j == i) + int(j == d - 2) for j in range(d)) for i in range(args.n)} | {
        tuple(int(j == i) + int(j == d - 1) for j in range(d)) for i in range(args.n)}
    new_rays = sorted(set(fan.rays) - original)
    unimod = [c.is_simplicial and is_unimodular(c, fan.lattice_basis) for c in fan.maximal_cones]
    staircase = {frozenset(c.rays) for c in fan.maximal_cones} == set(vertex_resolution_expected(args.n))
    result = {"fan": fan.to_json(), "n_maximal_cones": len(fan.maximal_cones), "all_unimodular": all(unimod),
              "new_rays": [list(r) for r in new_rays], "matches_staircase": staircase}
    _emit_json(args, "resolve_vertex", result)
    if len(fan.maximal_cones) != args.n or not all(unimod) or new_rays:
        raise AuditFailure("resolution is not a unimodular subdivision with n cones and no new rays")
    return EXIT_OK


def cmd_plot_contraction(args) -> int:
    from .contract import contraction_arrows

    data = contraction_arrows(args.n, args.grid)
    result = {
        "arrows": [{**a, "start": list(a["start"]), "end": list(a["end"])} for a in data["arrows"]],
        "segments": [[list(p) for p in s] for s in data["segments"]],
        "cuts": [{"face": list(k), "point": list(v)} for k, v in sorted(data["cuts"].items())],
    }
    _emit_json(args, "plot_contraction", result)
    return EXIT_OK


def cmd_export(args) -> int:
    from .geom import polar_dual, vertex_resolution_fan
    from .trop import anticanonical_polytope, skeleton

    if args.what == "polytope":
        obj = anticanonical_polytope(args.n)
    elif args.what == "polar":
        obj = polar_dual(anticanonical_polytope(args.n))
    elif args.what == "skeleton":
        obj = skeleton(args.n)
    else:
        obj = vertex_resolution_fan(args.n)
    if args.format == "off":
        if args.what == "skeleton":
            _write(args.emit, _skeleton_off(obj))
        elif args.what == "fan":
            raise ConfigError("fans have no OFF representation")
        else:
            try:
                _write(args.emit, obj.to_off())
            except ValueError as e:
                raise ConfigError(str(e)) from e
        return EXIT_OK
    _emit_json(args, "export", {"what": args.what, "object": obj.to_json()})
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tropskel", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--config", help="JSON file of option values (unknown keys are rejected)")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=func)
        sp.add_argument("--config", help="JSON file of option values (unknown keys are rejected)")
        sp.add_argument("--seed", type=int, default=0)
        return sp

    sp = add("tropicalize", cmd_tropicalize, "L-pieces, strata and skeleton of a hypersurface")
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--preset", default="fermat", choices=["fermat"])
    sp.add_argument("--spec", help="spec JSON (n, active_monomials) instead of a preset")
    sp.add_argument("--emit-json", dest="emit_json")
    sp.add_argument("--emit-off", dest="emit_off")

    sp = add("skeleton", cmd_skeleton, "skeleton complex, cross-checked against the polar route")
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--preset", default="fermat", choices=["fermat"])
    sp.add_argument("--spec")
    sp.add_argument("--emit")

    sp = add("contract", cmd_contract, "apply the tropical contraction to points")
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--preset", default="fermat", choices=["fermat"])
    sp.add_argument("--spec")
    sp.add_argument("--cuts", default="barycentric", help="'barycentric' or a cuts JSON file")
    sp.add_argument("--points", required=True)
    sp.add_argument("--skip-invalid", action="store_true", dest="skip_invalid")
    sp.add_argument("--emit")

    sp = add("check-affine", cmd_check_affine, "audit chart transitions of the affine atlas")
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--cuts", default="barycentric")
    sp.add_argument("--emit")
    sp.add_argument("--table", help="also write a CSV summary table")

    sp = add("check-comparison", cmd_check_comparison, "test the comparison property for a potential")
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--preset", default="fermat", choices=["fermat"])
    sp.add_argument("--spec")
    sp.add_argument("--cuts", default="barycentric")
    sp.add_argument("--potential", default="fs", help="fs | composed | perturbed | PA-function JSON file")
    sp.add_argument("--m0", help="comma-separated direction for the perturbed potential")
    sp.add_argument("--eps", default="1/7")
    sp.add_argument("--samples", type=int, default=20)
    sp.add_argument("--emit")

    sp = add("solve-ma", cmd_solve_ma, "semi-discrete Monge-Ampere solve on a face of the n=2 skeleton")
    sp.add_argument("--face", type=int, default=0, help="index of the vertex opposite the face")
    sp.add_argument("--grid", type=int, default=45, help="number of sites (triangular number)")
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--max-iter", type=int, default=100, dest="max_iter")
    sp.add_argument("--emit")

    sp = add("haar-check", cmd_haar_check, "torus averages versus Gauss-point values (CSV)")
    sp.add_argument("--poly", action="append", required=True, help="polynomial such as '1+z1+z2'; repeatable")
    sp.add_argument("--consts", help="comma-separated constants c_a, one per --poly")
    sp.add_argument("--x", required=True)
    sp.add_argument("--lambdas", default="0.2,0.1,0.05,0.025")
    sp.add_argument("--samples", type=int, default=65536)
    sp.add_argument("--shifts", type=int, default=8)
    sp.add_argument("--emit")

    sp = add("resolve-vertex", cmd_resolve_vertex, "small resolution fan at a vertex")
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--hyperplanes", default="cumulative", choices=["cumulative", "literal"])
    sp.add_argument("--emit")

    sp = add("plot-contraction", cmd_plot_contraction, "arrow data for the contraction near a vertex cone")
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--grid", type=int, default=6)
    sp.add_argument("--emit")

    sp = add("export", cmd_export, "export fixtures as JSON or OFF")
    sp.add_argument("--what", choices=["polytope", "polar", "skeleton", "fan"], default="polytope")
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--format", choices=["json", "off"], default="json")
    sp.add_argument("--emit")
    return p


def _apply_config(parser: argparse.ArgumentParser, args: argparse.Namespace, argv: Sequence[str]) -> None:
    if not args.config:
        return
    data = _read_json(args.config)
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    known = set(vars(args)) - {"func", "config", "command"}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {unknown}")
    explicit = {a.split("=")[0].lstrip("-").replace("-", "_") for a in argv if a.startswith("--")}
    for k, v in data.items():
        if k not in explicit:
            setattr(args, k, v)


def run(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_CONFIG
    try:
        _apply_config(parser, args, argv)
        return args.func(args)
    except ConfigError as e:
        print(f"tropskel: configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except AuditFailure as e:
        print(f"tropskel: audit failure: {e}", file=sys.stderr)
        return EXIT_AUDIT
    except OSError as e:
        print(f"tropskel: I/O error: {e}", file=sys.stderr)
        return EXIT_IO


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
