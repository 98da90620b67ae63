"""Command line entry point: ``cuspspin <subcommand>``.

Exit status is 0 when every expected-property check passes, 1 when a
check fails and 2 on unreadable input.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import construction as cons
from .corners import ComplexError, doubling_schedule
from .exactnum import Isometry, LorentzVector, parse_field
from .homology import HomologyError, self_intersection_mod2, truncate_ideal
from .polytope import (
    SYMMETRY_A,
    Polytope,
    PolytopeError,
    a_permutation,
    adjacency_dot,
    classify_facets,
    combinatorial_automorphisms,
    face_lattice,
    gram_text,
    is_lattice_automorphism,
    realize_automorphism,
    standard_p4,
    verify_right_angled,
    vertices,
)

FINAL_LINE = "S·S mod 2 = 1 ⇒ w2 ≠ 0"
REGRESSION = "regression (computed)"

# frozen values from the first verified build
AUTOMORPHISM_COUNT = 48
FACET_COMPONENTS_X = 113
BETTI_X = [1, 6, 1, 0, 0]


class InputError(Exception):
    pass


@dataclass
class Entry:
    name: str
    anchor: str
    status: str  # pass | FAIL | info
    details: str = ""


@dataclass
class Report:
    entries: list[Entry] = field(default_factory=list)
    stopped: str | None = None
    final: str | None = None

    def add(self, name: str, anchor: str, ok: bool | None, details: str = "") -> bool:
        status = "info" if ok is None else ("pass" if ok else "FAIL")
        self.entries.append(Entry(name, anchor, status, details))
        return bool(ok) if ok is not None else True

    def extend(self, checks: list[cons.Check]) -> bool:
        ok = True
        for c in checks:
            ok &= self.add(c.name, c.anchor, c.passed, c.details)
        return ok

    @property
    def passed(self) -> bool:
        return all(e.status != "FAIL" for e in self.entries)

    def render(self, fmt: str) -> str:
        if fmt == "json":
            body = {
                "checks": [e.__dict__ for e in self.entries],
                "passed": self.passed,
                "stopped": self.stopped,
                "final": self.final,
            }
            return json.dumps(body, indent=2, sort_keys=True, ensure_ascii=False)
        w = max((len(e.name) for e in self.entries), default=10)
        lines = [f"{e.status:4}  {e.name:<{w}}  {e.anchor}" + (f"  [{e.details}]" if e.details else "") for e in self.entries]
        n_fail = sum(e.status == "FAIL" for e in self.entries)
        lines.append(f"{len(self.entries)} checks, {n_fail} failed")
        if self.stopped:
            lines.append(f"stopped after stage {self.stopped}")
        if self.final:
            lines.append(self.final)
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# configuration


STAGES = ("polytope", "symmetry", "construction", "homology", "selfintersect", "doubling")


@dataclass
class Config:
    normals: dict[str, LorentzVector] = field(default_factory=dict)
    tables: dict[str, str] = field(default_factory=dict)
    stages: dict[str, bool] = field(default_factory=lambda: {s: True for s in STAGES})
    doublings: int = 3
    memory_guard: int = 1_000_000
    variants: bool = True
    subdivide: bool = True


def parse_config(text: str, base_dir: Path | None = None) -> Config:
    """Plain text, one setting per line::

        normal E1 r2, 1, 1, 1, r3     # replace a half-space normal
        table x path/to/x.tbl
        stage homology off
        doublings 3
        memory-guard 1000000
        variants on
        subdivide on
    """
    cfg = Config()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        try:
            if head == "normal":
                label, _, coords = rest.partition(" ")
                cfg.normals[label] = LorentzVector(parse_field(c) for c in coords.split(","))
            elif head == "table":
                name, path = rest.split()
                p = Path(path)
                if base_dir is not None and not p.is_absolute():
                    p = base_dir / p
                cfg.tables[name] = str(p)
            elif head == "stage":
                name, flag = rest.split()
                if name not in STAGES or flag not in ("on", "off"):
                    raise ValueError(f"bad stage setting {rest!r}")
                cfg.stages[name] = flag == "on"
            elif head == "doublings":
                cfg.doublings = int(rest)
            elif head == "memory-guard":
                cfg.memory_guard = int(rest)
            elif head in ("variants", "subdivide"):
                if rest not in ("on", "off"):
                    raise ValueError(f"expected on/off, got {rest!r}")
                setattr(cfg, head, rest == "on")
            else:
                raise ValueError(f"unknown setting {head!r}")
        except ValueError as exc:
            raise InputError(f"config line {lineno}: {exc}") from exc
    return cfg


def load_config(path: str | None) -> Config:
    if path is None:
        return Config()
    p = Path(path)
    if not p.exists():
        raise InputError(f"config file {path} not found")
    return parse_config(p.read_text(), p.parent)


def config_polytope(cfg: Config) -> Polytope:
    p = standard_p4()
    for label, v in cfg.normals.items():
        if label not in p.labels:
            raise InputError(f"unknown facet {label!r}")
        if len(v) != 5:
            raise InputError(f"normal for {label} needs 5 coordinates")
        p = p.replace(label, v)
    return p


# ---------------------------------------------------------------------------
# stages


def stage_polytope(rep: Report, p: Polytope):
    ok = rep.add("polytope.facets", "22 half-spaces", len(p) == 22, f"facets={len(p)}")
    ra = verify_right_angled(p)
    ok &= rep.add("polytope.right_angled", "no angled facet pairs", ra["right_angled"], f"angled={len(ra['angled'])}")
    if not ok:
        return None
    try:
        lat = face_lattice(p, vertices(p))
    except PolytopeError as exc:
        rep.add("polytope.lattice", "face lattice", False, str(exc))
        return None
    rep.add("polytope.f_vector", REGRESSION, None, f"f={lat.f_vector()}")
    pent = [f for f in lat.faces_of_dim(2) if f.compact]
    shapes = all(len(f.vertices) == 5 for f in pent)
    families = all(
        all(l.startswith("E") for l in f.facets) and len({l.endswith("'") for l in f.facets}) == 1 for f in pent
    )
    ok &= rep.add("polytope.pentagons", "12 compact 2-faces, pentagons on two E-facets", len(pent) == 12 and shapes and families, f"compact 2-faces={len(pent)}")
    a = classify_facets(lat, ("E1",))
    ok &= rep.add("polytope.over_p3", "10 vertical, 11 top facets over P3", (len(a.vertical), len(a.top)) == (10, 11), f"{len(a.vertical)}/{len(a.top)}")
    b = classify_facets(lat, ("E1", "E2"), ("E1",))
    ok &= rep.add("polytope.over_p2", "5 vertical, 4 top facets of P3 over P2", (len(b.vertical), len(b.top)) == (5, 4), f"{len(b.vertical)}/{len(b.top)}")
    return lat if ok else None


def stage_symmetry(rep: Report, p: Polytope, lat) -> bool:
    ok = True
    try:
        perm = a_permutation(p)
        ok &= rep.add(
            "symmetry.a",
            "a = diag(1,-1,-1,-1,-1) permutes the facets",
            is_lattice_automorphism(lat, perm) and SYMMETRY_A == Isometry.diagonal([1, -1, -1, -1, -1]),
            "",
        )
    except PolytopeError as exc:
        ok &= rep.add("symmetry.a", "a permutes the facets", False, str(exc))
    auts = combinatorial_automorphisms(lat)
    realized = 0
    for x in auts:
        try:
            if realize_automorphism(p, x).is_isometry():
                realized += 1
        except PolytopeError:
            pass
    ok &= rep.add("symmetry.realized", "every automorphism is an isometry", realized == len(auts), f"{realized}/{len(auts)}")
    ok &= rep.add("symmetry.order", REGRESSION, len(auts) == AUTOMORPHISM_COUNT, f"order={len(auts)}")
    return ok


def _build(name: str, cfg: Config) -> cons.Build:
    builder = cons.BUILDERS[name]
    return builder(cfg.tables.get(name))


def stage_construction(rep: Report, cfg: Config):
    sigma = cons.build_sigma(cfg.tables.get("sigma", "sigma"))
    k = cons.Construction(
        sigma,
        cons.thicken_sigma(sigma),
        _build("n0", cfg),
        _build("n1", cfg),
        _build("n2", cfg),
        _build("n12", cfg),
        _build("x", cfg),
    )
    rep.extend(cons.verify_all(k))
    return k


def stage_homology(rep: Report, x: cons.Build):
    tc = truncate_ideal(x.complex)
    cw = tc.cw
    try:
        cw.check()
        regular = True
    except HomologyError:
        regular = False
    rep.add("homology.cw", "truncated X is a regular CW", regular, f"cells={cw.counts()}")
    rep.add(
        "homology.euler",
        "truncation keeps χ",
        cw.euler_characteristic() == x.complex.euler_characteristic("include-all"),
        f"chi={cw.euler_characteristic()}",
    )
    absolute = cw.chain_complex()
    relative = cw.chain_complex(True)
    rep.add("homology.dd", "∂∂ = 0", absolute.check_dd() and relative.check_dd(), "")
    b, rb = absolute.betti(), relative.betti()
    rep.add("homology.betti", REGRESSION, b == BETTI_X, f"absolute={b}")
    rep.add("homology.lefschetz", "b_k(X) = b_{4-k}(X, ∂X)", b == rb[::-1], f"relative={rb}")
    return tc


def stage_selfintersect(rep: Report, x: cons.Build, tc, cfg: Config) -> int | None:
    cells = [tc.face(f) for f in x.surfaces["S"].faces]
    try:
        r = self_intersection_mod2(tc.cw, cells, variants=cfg.variants, subdivide=cfg.subdivide)
    except HomologyError as exc:
        rep.add("selfintersect.S", "S·S = 1 mod 2", False, str(exc))
        return None
    runs = ", ".join(f"{e['run']}={e['value']}" for e in r.runs)
    rep.add("selfintersect.certificate", "dual cocycle checks", all(r.certificate[k] for k in ("relative_cocycle", "cap_homologous_to_surface", "surface_nonzero")), f"hash={r.certificate['dual_hash']}")
    rep.add("selfintersect.stable", "value independent of choices", r.stable, runs)
    rep.add("selfintersect.S", "S·S = 1 mod 2", r.value == 1, f"value={r.value}")
    return r.value


def stage_doubling(rep: Report, k: cons.Construction, cfg: Config) -> None:
    for b in (k.thick, k.x):
        r = doubling_schedule(b.complex, cfg.doublings, memory_guard=cfg.memory_guard, validate=True)
        steps = r.steps[1:]
        chi_ok = all(s.euler == s.euler_expected for s in steps)
        cells_ok = all(s.cells == b.complex.n_cells * 2**s.k for s in steps)
        corners = all(s.corners_valid and s.embedded for s in steps)
        rep.add(f"double.{b.name}.euler", "χ(D) = 2χ - χ(Y)", chi_ok and not r.partial, " ".join(str(s.euler) for s in r.steps))
        rep.add(f"double.{b.name}.cells", "cells double at each step", cells_ok, " ".join(str(s.cells) for s in r.steps))
        rep.add(f"double.{b.name}.corners", "doubles keep right-angled corners", corners, "")
        if b is k.x:
            rep.add("double.X.m", REGRESSION, r.m == FACET_COMPONENTS_X, f"m={r.m} cells after all doublings={r.projected_cells}")


def run_pipeline(config: str | Config | None = None, stage: str | None = None) -> Report:
    cfg = config if isinstance(config, Config) else load_config(config)
    want = {s: cfg.stages[s] and (stage is None or s == stage) for s in STAGES}
    rep = Report()
    p = config_polytope(cfg)
    lat = stage_polytope(rep, p) if want["polytope"] or want["symmetry"] else None
    if (want["polytope"] or want["symmetry"]) and lat is None:
        rep.stopped = "polytope"
        return rep
    if want["symmetry"]:
        stage_symmetry(rep, p, lat)
    if stage == "polytope":
        return rep
    if p is not None and cfg.normals:
        # the construction is tied to the standard polytope
        rep.add("construction.polytope", "standard half-spaces", False, "custom normals")
        rep.stopped = "polytope"
        return rep
    need = [s for s in ("construction", "homology", "selfintersect", "doubling") if want[s]]
    if not need:
        return rep
    k = stage_construction(rep, cfg) if want["construction"] else cons.Construction(*_quiet_builds(cfg))
    tc = None
    value = None
    if want["homology"] or want["selfintersect"]:
        tc = stage_homology(rep, k.x) if want["homology"] else truncate_ideal(k.x.complex)
    if want["selfintersect"]:
        value = stage_selfintersect(rep, k.x, tc, cfg)
    if want["doubling"]:
        stage_doubling(rep, k, cfg)
    if value == 1:
        rep.final = FINAL_LINE
    return rep


def _quiet_builds(cfg: Config):
    sigma = cons.build_sigma(cfg.tables.get("sigma", "sigma"))
    return (sigma, cons.thicken_sigma(sigma), *(_build(n, cfg) for n in ("n0", "n1", "n2", "n12", "x")))


# ---------------------------------------------------------------------------
# subcommands


def _emit(out: str) -> None:
    sys.stdout.write(out if out.endswith("\n") else out + "\n")


def _complex_arg(name: str) -> cons.Build:
    key = name.lower()
    if key in cons.BUILDERS:
        return cons.BUILDERS[key]()
    path = Path(name)
    if path.exists():
        return cons.build_from_table(str(path))
    raise InputError(f"unknown complex {name!r}")


def cmd_polytope(args) -> int:
    p = standard_p4()
    if args.dot:
        _emit(adjacency_dot(face_lattice(p, vertices(p))))
        return 0
    if args.what == "gram":
        _emit("\n".join(gram_text(p)))
        return 0
    lat = face_lattice(p, vertices(p))
    if args.what == "faces":
        if args.f_vector:
            _emit(" ".join(str(x) for x in lat.f_vector()))
        else:
            lines = []
            for d in range(len(lat.f_vector())):
                for f in lat.faces_of_dim(d):
                    lines.append(f"{d} {','.join(f.facets)} {'compact' if f.compact else 'ideal'}")
            _emit("\n".join(lines))
        return 0
    rep = Report()
    if args.what == "verify":
        ok = stage_polytope(rep, p) is not None
    else:
        ok = stage_symmetry(rep, p, lat)
        if args.format == "text":
            for x in sorted(combinatorial_automorphisms(lat), key=lambda a: [a[l] for l in p.labels]):
                rep.add("automorphism", " ".join(f"{k}>{v}" for k, v in x.items() if k != v) or "identity", None)
    _emit(rep.render(args.format))
    return 0 if ok and rep.passed else 1


def cmd_build(args) -> int:
    b = cons.BUILDERS[args.name](args.table)
    if args.format == "json":
        _emit(json.dumps({"name": b.name, "summary": b.complex.summary(), "surfaces": sorted(b.surfaces)}, indent=2, sort_keys=True, default=str))
    else:
        _emit(cons.format_table(b.table))
    return 0


def check_report(b: cons.Build) -> Report:
    c = b.complex
    rep = Report()
    vc = c.validate_corners()
    rep.add("corners", "right-angled corners", vc["pass"], str(vc["counts"]))
    emb = c.embedded_facets()
    rep.add("embedded", "facets embedded", emb["pass"], f"components={emb['components']}")
    rep.add("orientable", "orientable", c.orientability() is not None, "")
    rep.add("euler", REGRESSION, None, f"chi={c.euler_characteristic('include-all')} exclude-ideal={c.euler_characteristic()}")
    return rep


def cmd_check(args) -> int:
    rep = check_report(_complex_arg(args.file))
    _emit(rep.render(args.format))
    return 0 if rep.passed else 1


def cmd_homology(args) -> int:
    b = _complex_arg(args.complex)
    cw = truncate_ideal(b.complex).cw
    betti = cw.chain_complex(args.rel_boundary).betti()
    if args.format == "json":
        _emit(json.dumps({"complex": b.name, "relative": args.rel_boundary, "cells": cw.counts(), "betti": betti}, sort_keys=True))
    else:
        _emit(f"{b.name} cells {cw.counts()}\n{'relative ' if args.rel_boundary else ''}betti {betti}")
    return 0


def cmd_selfintersect(args) -> int:
    rep = Report()
    if args.fixtures:
        from .fixtures import oracle_suite

        for row in oracle_suite():
            rep.add(f"fixture.{row['name']}", "known form", row["pass"], "" if isinstance(row["value"], list) else str(row["value"]))
        _emit(rep.render(args.format))
        return 0 if rep.passed else 1
    b = _complex_arg(args.complex)
    if args.surface not in b.surfaces:
        raise InputError(f"{b.name} carries no surface {args.surface!r}")
    tc = truncate_ideal(b.complex)
    cells = [tc.face(f) for f in b.surfaces[args.surface].faces]
    r = self_intersection_mod2(tc.cw, cells, variants=not args.quick, subdivide=not args.quick)
    if args.format == "json":
        _emit(json.dumps({"value": r.value, "certificate": r.certificate, "runs": r.runs}, indent=2, sort_keys=True))
    else:
        lines = [f"{args.surface}·{args.surface} mod 2 = {r.value}"]
        lines += [f"  {k}: {v}" for k, v in sorted(r.certificate.items())]
        lines += [f"  run {e['run']}: value {e['value']} simplices {e['simplices']} hash {e['dual_hash']}" for e in r.runs]
        if r.value == 1:
            lines.append(FINAL_LINE)
        _emit("\n".join(lines))
    return 0


def cmd_double(args) -> int:
    b = _complex_arg(args.complex)
    r = doubling_schedule(b.complex, args.k, memory_guard=args.memory_guard, validate=args.validate)
    if args.format == "json":
        steps = [s.__dict__ for s in r.steps]
        _emit(json.dumps({"m": r.m, "projected_cells": str(r.projected_cells), "partial": r.partial, "steps": steps}, indent=2, sort_keys=True))
    else:
        lines = [f"m = {r.m}, cells after all doublings = {r.projected_cells}"]
        for s in r.steps:
            lines.append(f"k={s.k} cells={s.cells} chi={s.euler} expected={s.euler_expected} free={s.free_facets}")
        if r.partial:
            lines.append("stopped by memory guard")
        _emit("\n".join(lines))
    ok = all(s.euler_expected is None or s.euler == s.euler_expected for s in r.steps)
    return 0 if ok else 1


def cmd_pipeline(args) -> int:
    rep = run_pipeline(args.config, args.stage)
    _emit(rep.render(args.format))
    return 0 if rep.passed else 1


def cmd_verify_all(args) -> int:
    rep = Report()
    rep.extend(cons.verify_all())
    _emit(rep.render(args.format))
    return 0 if rep.passed else 1


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    ap = argparse.ArgumentParser(prog="cuspspin")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("polytope", parents=[common], help="the polytope P4")
    p.add_argument("what", nargs="?", choices=("gram", "faces", "verify", "symmetries"), default="verify")
    p.add_argument("--f-vector", action="store_true")
    p.add_argument("--dot", action="store_true", help="facet adjacency graph in DOT")
    p.set_defaults(func=cmd_polytope)

    p = sub.add_parser("build", parents=[common], help="print a resolved gluing table")
    p.add_argument("name", choices=sorted(cons.BUILDERS))
    p.add_argument("--table")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("check", parents=[common], help="corner, facet and orientation checks of a table")
    p.add_argument("file")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("homology", parents=[common], help="mod 2 Betti numbers of the truncated complex")
    p.add_argument("complex")
    p.add_argument("--rel-boundary", action="store_true")
    p.set_defaults(func=cmd_homology)

    p = sub.add_parser("selfintersect", parents=[common], help="self-intersection of a tracked surface")
    p.add_argument("--surface", default="S")
    p.add_argument("--complex", default="x")
    p.add_argument("--fixtures", action="store_true")
    p.add_argument("--quick", action="store_true", help="single run, no variants")
    p.set_defaults(func=cmd_selfintersect)

    p = sub.add_parser("double", parents=[common], help="successive doublings along facet components")
    p.add_argument("complex")
    p.add_argument("-k", type=int, default=3)
    p.add_argument("--memory-guard", type=int, default=1_000_000)
    p.add_argument("--validate", action="store_true")
    p.set_defaults(func=cmd_double)

    p = sub.add_parser("pipeline", parents=[common], help="run every stage")
    p.add_argument("--config")
    p.add_argument("--stage", choices=STAGES)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("verify-all", parents=[common], help="every construction check")
    p.set_defaults(func=cmd_verify_all)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, cons.TableError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except (ComplexError, PolytopeError, HomologyError) as exc:
        sys.stderr.write(f"check failed: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
