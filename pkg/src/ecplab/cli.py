"""Command-line front end.

Exit codes: 0 success, 1 verification or solver failure, 2 bad input.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import os
import sys
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np

from . import __version__, acceptance, closedform, deform, fem, figures, nodal
from .errors import EcplabError, InputError, NoBracketedRoot, VerificationFailure
from .geometry import DomainSpec, export_domain, sample_boundary
from .mesh import generate, half_mesh, read_mesh, refine, write_mesh

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

_DOMAIN_PROPS = {
    "kind": {"enum": ["TriangleT0", "OmegaT", "LevelSetF0", "RoundedTriangle"]},
    "t": {"type": ["number", "null"]},
    "a": {"type": ["number", "null"]},
}
_COMMON = {"command": {"type": "string"}, "threads": {"type": "integer", "minimum": 1},
           "out": {"type": ["string", "null"]}}


def _schema(props: dict, required=()) -> dict:
    return {"type": "object", "properties": {**_COMMON, **props},
            "required": ["command", *required], "additionalProperties": False}


SCHEMAS = {
    "domain": _schema({**_DOMAIN_PROPS, "samples": {"type": "integer", "minimum": 16}}, ["kind"]),
    "mesh": _schema({**_DOMAIN_PROPS, "h": {"type": "number", "exclusiveMinimum": 0, "maximum": 0.25},
                     "refine": {"type": "integer", "minimum": 0, "maximum": 6},
                     "half": {"type": "boolean"}}, ["kind", "h"]),
    "eig": _schema({"mesh": {"type": "string"}, "bc": {"enum": list(fem.BCS)},
                    "k": {"type": "integer", "minimum": 1, "maximum": 12},
                    "tol": {"type": "number", "exclusiveMinimum": 0}}, ["mesh", "bc", "k"]),
    "nodal": _schema({"mesh": {"type": "string"}, "eig": {"type": "string"},
                      "index": {"type": "integer", "minimum": 1}, "a": {"type": "number"},
                      "eps": {"type": "number", "minimum": 0}}, ["mesh", "eig", "index"]),
    "levelset": _schema({"mesh": {"type": "string"}, "eig": {"type": "string"},
                         "index": {"type": "integer", "minimum": 1},
                         "level": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                         "svg": {"type": ["string", "null"]}}, ["mesh", "eig", "index", "level"]),
    "deform": _schema({"config": {"type": ["string", "null"]}, "deform": {"type": "object"}}),
    "figure": _schema({"name": {"type": "string"}, "h": {"type": "number", "exclusiveMinimum": 0,
                                                           "maximum": 0.25}}, ["name"]),
    "verify": _schema({"profile": {"enum": ["quick", "full"]}, "mesh": {"type": ["string", "null"]},
                       "tol": {"type": ["number", "null"]}}, ["profile"]),
    "closedform": _schema({"action": {"enum": ["sample"]}, "field": {"type": "string"},
                           "grid": {"type": "integer", "minimum": 2, "maximum": 4096}},
                          ["action", "field", "grid"]),
}


# ---------------------------------------------------------------------------
# manifest

def manifest_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def write_manifest(config: dict, out: Path) -> str:
    digest = manifest_hash(config)
    rec = {"config": config, "manifest_hash": digest, "version": __version__,
           "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat()}
    path = out.with_name(out.name + ".manifest.json") if out.suffix else out / "manifest.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(rec, indent=2, sort_keys=True))
    return digest


def _dump(payload: dict, path: Path, digest: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps({**payload, "manifest_hash": digest}, indent=2, sort_keys=True))


def _threads(requested: Optional[int]) -> int:
    cap = os.environ.get("ECPLAB_THREADS")
    n = requested or 1
    if cap is not None:
        try:
            n = min(n, int(cap)) if requested else int(cap)
        except ValueError:
            raise InputError(f"ECPLAB_THREADS must be an integer, got {cap!r}") from None
    return max(1, n)


def _spec(cfg: dict) -> DomainSpec:
    params = {k: cfg[k] for k in ("t", "a") if cfg.get(k) is not None}
    return DomainSpec.from_dict({"kind": cfg["kind"], "params": params})


def _load_vectors(eig_path: str, index: int):
    try:
        rec, vec = fem.read_eigen_vectors(eig_path)
    except (OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read eigen result {eig_path}: {exc}") from None
    if not 1 <= index <= vec.shape[1]:
        raise InputError(f"index {index} outside 1..{vec.shape[1]}")
    return rec, vec[:, index - 1]


# ---------------------------------------------------------------------------
# commands; each takes the validated config and returns an exit code

def cmd_domain(cfg: dict) -> int:
    spec = _spec(cfg)
    out = Path(cfg["out"] or "domain.json")
    digest = write_manifest(cfg, out)
    n = cfg.get("samples", 1024)
    if out.suffix == ".csv":
        b = sample_boundary(spec, n)
        rows = np.column_stack([b.theta, b.rho, b.r, b.r_theta])
        header = f"manifest_hash={digest}\ntheta,rho,r,r_theta"
        np.savetxt(out, rows, delimiter=",", header=header, comments="# ", fmt="%.17g")
    else:
        _dump(export_domain(spec, n), out, digest)
    return EXIT_OK


def cmd_mesh(cfg: dict) -> int:
    m = generate(_spec(cfg), cfg["h"])
    for _ in range(cfg.get("refine", 0)):
        m = refine(m)
    if cfg.get("half"):
        m = half_mesh(m)
    out = Path(cfg["out"] or "mesh.json")
    digest = write_manifest(cfg, out)
    write_mesh(m, out, {"manifest_hash": digest})
    return EXIT_OK


def cmd_eig(cfg: dict) -> int:
    m = read_mesh(cfg["mesh"])
    res = fem.solve_mesh(m, cfg["k"], cfg["bc"], tol=cfg.get("tol"))
    out = Path(cfg["out"] or "eig.json")
    digest = write_manifest(cfg, out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fem.write_eigen_result(res, out, {"manifest_hash": digest, "mesh": cfg["mesh"]})
    side = out.with_suffix(".vectors.json")
    side.write_text(json.dumps({**json.loads(side.read_text()), "manifest_hash": digest}, indent=2))
    return EXIT_OK


def cmd_nodal(cfg: dict) -> int:
    m = read_mesh(cfg["mesh"])
    _, v = _load_vectors(cfg["eig"], cfg["index"])
    if len(v) != m.n_vertices:
        raise InputError("eigenvector length does not match the mesh")
    rep = nodal.count_nodal_domains(m, v, cfg.get("a", 0.0), cfg.get("eps", nodal.DEFAULT_EPS))
    out = Path(cfg["out"] or "nodal.json")
    _dump({**rep.to_dict(), "index": cfg["index"]}, out, write_manifest(cfg, out))
    print(f"beta0={rep.beta0} positive={rep.n_positive} negative={rep.n_negative}")
    return EXIT_OK


def cmd_levelset(cfg: dict) -> int:
    m = read_mesh(cfg["mesh"])
    _, v = _load_vectors(cfg["eig"], cfg["index"])
    out = Path(cfg["out"] or "levels.csv")
    digest = write_manifest(cfg, out)
    fig = figures.Figure(out.stem)
    if m.spec is not None:
        fig.layers.append(figures.boundary_layer(m.spec))
    for i, c in enumerate(cfg["level"]):
        fig.layers.append(figures.Layer(f"c={c:g}", nodal.extract_level_set(m, v, c),
                                        figures.PALETTE[i % len(figures.PALETTE)]))
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(fig.to_csv(digest))
    if cfg.get("svg"):
        Path(cfg["svg"]).write_text(fig.to_svg(manifest_hash=digest))
    return EXIT_OK


def cmd_deform(cfg: dict) -> int:
    dcfg = deform.DeformConfig.from_dict(cfg.get("deform", {}))
    out = Path(cfg["out"] or "deform_report.json")
    digest = write_manifest({**cfg, "deform": dcfg.to_dict()}, out)
    rep = deform.run_all(dcfg)
    _dump(deform_payload(rep), out, digest)
    out.with_suffix(".csv").write_text(f"# manifest_hash={digest}\n" + rep.to_csv())
    text = rep.summary()
    out.with_suffix(".txt").write_text(f"manifest_hash={digest}\n{text}\n")
    print(text)
    return EXIT_OK if rep.passed else EXIT_FAIL


def deform_payload(rep) -> dict:
    return acceptance._plain(rep.to_dict())


def cmd_figure(cfg: dict) -> int:
    fig = figures.build(cfg["name"], h=cfg.get("h", 0.05))
    out = Path(cfg["out"] or "figures")
    digest = write_manifest(cfg, out)
    for p in fig.write(out, digest):
        print(p)
    _dump({"name": fig.name, "meta": acceptance._plain(fig.meta)}, out / f"{fig.name}.json", digest)
    return EXIT_OK


def cmd_verify(cfg: dict) -> int:
    if cfg.get("mesh"):
        read_mesh(cfg["mesh"])
    old = fem.RESIDUAL_TOL
    if cfg.get("tol") is not None:
        fem.RESIDUAL_TOL = cfg["tol"]
    try:
        results = []
        for k in acceptance.PROFILES[cfg["profile"]]:
            try:
                r = acceptance.run_criterion(k)
            except (VerificationFailure, NoBracketedRoot) as exc:
                print(f"  {type(exc).__name__}: {exc}", file=sys.stderr)
                r = acceptance.CheckResult(k, acceptance.CRITERIA[k].__name__, False,
                                           {"error": type(exc).__name__, "message": str(exc)})
            print(r.line(), flush=True)
            results.append(r)
    finally:
        fem.RESIDUAL_TOL = old
    if cfg.get("out"):
        out = Path(cfg["out"])
        _dump({"profile": cfg["profile"], "results": [r.to_dict() for r in results]}, out,
              write_manifest(cfg, out))
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def cmd_closedform(cfg: dict) -> int:
    rows = closedform.sample_field(cfg["field"], cfg["grid"])
    out = cfg.get("out")
    header = "u,v,value"
    if out:
        digest = write_manifest(cfg, Path(out))
        np.savetxt(out, rows, delimiter=",", header=f"manifest_hash={digest}\n{header}",
                   comments="# ", fmt="%.17g")
    else:
        np.savetxt(sys.stdout, rows, delimiter=",", header=header, comments="", fmt="%.17g")
    return EXIT_OK


COMMANDS = {"domain": cmd_domain, "mesh": cmd_mesh, "eig": cmd_eig, "nodal": cmd_nodal,
            "levelset": cmd_levelset, "deform": cmd_deform, "figure": cmd_figure,
            "verify": cmd_verify, "closedform": cmd_closedform}


# ---------------------------------------------------------------------------
# argument parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InputError(message)


def _domain_args(p):
    p.add_argument("--kind", required=True, choices=["TriangleT0", "OmegaT", "LevelSetF0", "RoundedTriangle"])
    p.add_argument("--t", type=float)
    p.add_argument("--a", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ecplab", description=__doc__.splitlines()[0], allow_abbrev=False)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_):
        p = sub.add_parser(name, help=help_, allow_abbrev=False)
        p.add_argument("--out")
        p.add_argument("--threads", type=int)
        return p

    p = add("domain", "export a domain's polar boundary (JSON, or CSV for a .csv path)")
    _domain_args(p)
    p.add_argument("--samples", type=int, default=1024)
    p = add("mesh", "generate a symmetric triangulation")
    _domain_args(p)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--refine", type=int, default=0)
    p.add_argument("--half", action="store_true")
    p = add("eig", "lowest eigenpairs on a mesh file")
    p.add_argument("--mesh", required=True)
    p.add_argument("--bc", choices=fem.BCS, default="neumann")
    p.add_argument("--k", type=int, default=6)
    p.add_argument("--tol", type=float)
    p = add("nodal", "nodal-domain count of eigenvector + offset")
    p.add_argument("--mesh", required=True)
    p.add_argument("--eig", required=True)
    p.add_argument("--index", type=int, required=True)
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--eps", type=float, default=nodal.DEFAULT_EPS)
    p = add("levelset", "level curves of an eigenvector as CSV polylines")
    p.add_argument("--mesh", required=True)
    p.add_argument("--eig", required=True)
    p.add_argument("--index", type=int, required=True)
    p.add_argument("--level", type=float, action="append", required=True)
    p.add_argument("--svg")
    p = add("deform", "experiments along the family Omega_t")
    p.add_argument("--config")
    p = add("figure", "CSV and SVG data for a figure")
    p.add_argument("--name", required=True)
    p.add_argument("--h", type=float, default=0.05)
    p = add("verify", "run the acceptance checks")
    p.add_argument("--profile", choices=["quick", "full"], default="quick")
    p.add_argument("--mesh")
    p.add_argument("--tol", type=float)
    p = add("closedform", "sample a closed-form field")
    p.add_argument("action", choices=["sample"])
    p.add_argument("--field", required=True)
    p.add_argument("--grid", type=int, default=101)
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = {k: v for k, v in vars(args).items() if v is not None}
    if args.command == "deform":
        path = cfg.pop("config", None)
        cfg["deform"] = {}
        if path:
            try:
                cfg["deform"] = json.loads(Path(path).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise InputError(f"cannot read config {path}: {exc}") from None
            cfg["config"] = path
    cfg.setdefault("out", None)
    try:
        jsonschema.validate(cfg, SCHEMAS[args.command])
    except jsonschema.ValidationError as exc:
        raise InputError(f"invalid {args.command} config: {exc.message}") from None
    return cfg


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args)
        os.environ["ECPLAB_THREADS"] = str(_threads(cfg.get("threads")))
        return COMMANDS[args.command](cfg)
    except InputError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (VerificationFailure, NoBracketedRoot) as exc:
        print(f"failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except EcplabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
