#!/usr/bin/python3
#==================================================================#
# pointedkh
# Pointed Khovanov homology, its cube spectral sequence and the
# combinatorial knot Floer E_1 page from the command line
#==================================================================#
import argparse
import json
import os
import sys
from typing import Dict, List, Optional, Tuple

import sympy

import fileops
import hfkcube
import khovanov
import pointed
import spectral
from diagram import (Basepoint, BasepointSet, LinkDiagram, Resolution, autofill_basepoints, basepoint_parities, checkerboard,
                     components, cube_vertices, edge_parity, linking_matrix, parse_basepoints, parse_pd, resolve,
                     unlink_diagram, writhe)
from errors import KhError, TablesDiffer, UsageError
from exactla import INTEGERS, RATIONALS, HomologySummary, Ring
from logger import logger, quiesce_logger, set_logger_verbosity
from schemas import (SCHEMA_VERSION, ComparisonSchema, ComplexDumpSchema, DeterminantSchema, DiagramListSchema, DiagramSchema,
                     ErrorSchema, HfkReportSchema, HomologyReportSchema, InvarianceSchema, JonesSchema, PageReportSchema, dumps)
from structures import GradedRankRegister
from utils import fmt_grade, line_table, poincare_table, vertex_string

COMMANDS = ["kh", "khred", "pointed", "ss", "hfk-e2", "compare-e1", "jones", "det", "invariance-check", "show"]

args: argparse.Namespace = None


class KhArgumentParser(argparse.ArgumentParser):
    '''argparse exits with 2 on bad flags; usage errors here exit with 1.'''

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


#==================================================================#
#  Startup
#==================================================================#
def general_startup(override_args=None):
    global args
    args = None
    parser = KhArgumentParser(description="Pointed Khovanov homology calculator")
    parser.add_argument("command", nargs="?", choices=COMMANDS, help="What to compute")
    parser.add_argument("--pd", help="PD code of the diagram, e.g. \"X(1,2,2,1)\"")
    parser.add_argument("--unlink", type=int, help="Use the crossingless unlink with this many components")
    parser.add_argument("--diagram", help="Load a bundled diagram from the diagrams folder (see --list-diagrams)")
    parser.add_argument("--list-diagrams", action='store_true', help="List the bundled diagrams and exit")
    parser.add_argument("--basepoints", help="Comma separated edge ids, optionally edge:slot for several points on one edge")
    parser.add_argument("--points-per-edge", type=int, help="Put this many basepoints on every edge (overrides --basepoints)")
    parser.add_argument("--ring", help="Coefficients: z, q, f2 or fp:<prime>. Defaults to z, or q for ss")
    parser.add_argument("--outer", type=int, help="Index of the face treated as the outer (white) face of the checkerboard coloring")
    parser.add_argument("--pages", type=int, help="Last page to compute for ss (defaults to the number of crossings plus one)")
    parser.add_argument("--format", choices=["table", "json"], default="table", help="Report format")
    parser.add_argument("--dump-complex", action='store_true', help="With kh and --format json, print the chain complex instead of its homology")
    parser.add_argument("--pd2", help="Second PD code for invariance-check")
    parser.add_argument("--diagram2", help="Second bundled diagram for invariance-check")
    parser.add_argument("--basepoints2", help="Basepoints on the second diagram for invariance-check")
    parser.add_argument("--threads", type=int, default=1, help="Worker threads for per-grading homology")
    parser.add_argument("--output", help="Write the report to this file instead of standard output")
    parser.add_argument("--customsettings", help="Preloads arguments from a json file. Use customsettings_template.json as a template; leave any setting you want as default as null")
    parser.add_argument('-v', '--verbosity', action='count', default=0, help="The default logging level is INFO or higher. This value increases the amount of logging seen on standard error")
    parser.add_argument('-q', '--quiesce', action='count', default=0, help="This value decreases the amount of logging seen on standard error")

    if "pytest" in sys.modules and override_args is None:
        args = parser.parse_args([])
        return args
    if override_args is not None:
        import shlex
        args = parser.parse_args(shlex.split(override_args))
    else:
        args = parser.parse_args()

    set_logger_verbosity(args.verbosity)
    quiesce_logger(args.quiesce)
    if args.customsettings:
        if not os.path.exists(args.customsettings):
            raise UsageError(f"settings file {args.customsettings} not found")
        with open(args.customsettings) as f:
            try:
                importedsettings = json.load(f)
            except json.JSONDecodeError:
                raise UsageError(f"settings file {args.customsettings} is not valid JSON")
        for items in importedsettings:
            if importedsettings[items] is not None:
                setattr(args, items, importedsettings[items])

    if args.command is not None and args.command not in COMMANDS:
        raise UsageError(f"unknown command {args.command!r}, expected one of {', '.join(COMMANDS)}")
    if args.format not in ("table", "json"):
        raise UsageError(f"unknown format {args.format!r}")

    if args.threads < 1:
        raise UsageError("--threads must be at least 1")
    if args.points_per_edge is not None and args.points_per_edge < 1:
        raise UsageError("--points-per-edge must be at least 1")
    if args.pages is not None and args.pages < 0:
        raise UsageError("--pages must be non-negative")
    return args


#==================================================================#
#  Inputs
#==================================================================#
def load_input(pd: Optional[str], unlink: Optional[int], name: Optional[str], basepoints: Optional[str]) -> Tuple[LinkDiagram, BasepointSet]:
    given = [x is not None for x in (pd, unlink, name)]
    if sum(given) != 1:
        raise UsageError("give exactly one of --pd, --unlink and --diagram")
    explicit = basepoints
    logger.input("Diagram", status="Parsing")
    try:
        if name is not None:
            js = fileops.loaddiagram(name)
            d = parse_pd(js["pd"], js["free_loops"])
            if basepoints is None:
                basepoints = js["basepoints"]
        elif unlink is not None:
            if unlink < 0:
                raise UsageError("--unlink needs a non-negative number of components")
            d = unlink_diagram(unlink)
        else:
            d = parse_pd(pd)
        if args.points_per_edge:
            if explicit:
                logger.input_warn("Diagram", status="Override")
                logger.warning(f"--points-per-edge {args.points_per_edge} replaces the basepoints {explicit}")
            points = autofill_basepoints(d, args.points_per_edge)
        else:
            points = parse_basepoints(d, basepoints or "")
    except KhError:
        logger.input_err("Diagram", status="Error")
        raise
    logger.input_ok("Diagram", status="OK")
    logger.info(f"{d.n} crossings ({d.n_plus} positive, {d.n_minus} negative), {len(d.edges)} edges, basepoints [{points}]")
    return d, points


def coloring_for(d: LinkDiagram):
    return checkerboard(d, args.outer)


def ring_for(default: Ring) -> Ring:
    return Ring.parse(args.ring) if args.ring else default


def first_point(d: LinkDiagram, points: BasepointSet) -> Basepoint:
    if len(points):
        return points[0]
    if not d.edges:
        raise UsageError("the empty diagram has no edge to reduce at")
    return Basepoint(min(d.edges))


#==================================================================#
#  Report helpers
#==================================================================#
def homology_document(command: str, ring: Ring, d: LinkDiagram, points: BasepointSet, summary: HomologySummary) -> Dict:
    ranks = GradedRankRegister(summary.ranks())
    torsion = summary.torsion()
    keys = sorted(set(ranks) | set(torsion))
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "ring": str(ring),
        "pd": d.pd_text,
        "basepoints": [str(p) for p in points],
        "entries": [{"h": h, "q": j, "rank": ranks[(h, j)], "torsion": list(torsion.get((h, j), ()))} for h, j in keys],
        "delta": [{"delta": k, "rank": v} for k, v in ranks.delta().items()],
        "total_rank": ranks.total(),
        "width": ranks.width(),
    }


def homology_text(title: str, summary: HomologySummary) -> str:
    ranks = GradedRankRegister(summary.ranks())
    out = f"{title}\n"
    out += poincare_table(dict(ranks), summary.torsion())
    out += line_table(dict(ranks.delta()), "delta")
    out += f"total rank: {ranks.total()}\n"
    return out


def resolution_document(r: Resolution) -> Dict:
    return {"vertex": vertex_string(r.vertex),
            "circles": [{"index": c.index, "edges": list(c.edges), "points": list(r.circle_point_order(c.index))} for c in r.circles]}


def register_entries(register: GradedRankRegister, names: Tuple[str, ...]) -> List[Dict]:
    return [dict(zip(names, k), rank=v) for k, v in register.items()]


#==================================================================#
#  Commands
#==================================================================#
def cmd_show(d, points) -> Tuple[str, Dict, object]:
    coloring = coloring_for(d)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "pd": d.pd_text,
        "crossings": [{"index": c.index + 1, "edges": list(c.edges), "sign": c.sign} for c in d.crossings],
        "edges": [{"label": e.label, "tail": list(e.tail) if e.tail else None, "head": list(e.head) if e.head else None,
                   "free": e.free, "parity": edge_parity(d, coloring, e.label)} for e in d.edges.values()],
        "faces": [{"index": f.index, "edges": list(f.edges), "color": coloring.face_colors[f.index]} for f in d.faces],
        "outer_face": coloring.outer_face,
        "coloring": {str(f): c for f, c in sorted(coloring.face_colors.items())},
        "components": [list(c) for c in components(d)],
        "writhe": writhe(d),
        "linking_matrix": linking_matrix(d),
        "basepoints": [str(p) for p in points],
        "basepoint_parities": list(basepoint_parities(d, coloring, points)),
        "resolutions": [resolution_document(resolve(d, v, coloring, points)) for v in cube_vertices(d.n)],
    }
    text = f"PD: {d.pd_text or '(none)'}\ncrossings: {d.n} ({d.n_plus}+, {d.n_minus}-), writhe {doc['writhe']}\n"
    text += "".join(f"  component {i}: edges {list(c)}\n" for i, c in enumerate(doc["components"]))
    text += "".join(f"  face {f['index']} {f['color']}: edges {f['edges']}\n" for f in doc["faces"])
    text += "".join(f"  resolution {r['vertex']}: {len(r['circles'])} circles\n" for r in doc["resolutions"])
    return text, doc, DiagramSchema()


def cmd_kh(d, points):
    ring = ring_for(INTEGERS)
    K = khovanov.build_ckh(d, coloring_for(d))
    if args.dump_complex:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "generators": [str(g) for g in K.basis],
            "gradings": [list(g) for g in K.gradings],
            "differential": [[r, c, v] for (r, c), v in K.differential.entries()],
        }
        return K.differential.export_matrix_market(), doc, ComplexDumpSchema()
    summary = khovanov.homology(K, ring, args.threads)
    return homology_text(f"Kh over {ring}", summary), homology_document("kh", ring, d, points, summary), HomologyReportSchema()


def cmd_khred(d, points):
    ring = ring_for(INTEGERS)
    p0 = first_point(d, points)
    K = khovanov.build_ckh(d, coloring_for(d))
    R = khovanov.build_reduced(d, p0, K.coloring, K)
    summary = khovanov.homology(R, ring, args.threads)
    return (homology_text(f"reduced Kh at {p0} over {ring}", summary),
            homology_document("khred", ring, d, BasepointSet((p0,)), summary), HomologyReportSchema())


def cmd_pointed(d, points):
    ring = ring_for(INTEGERS)
    P = pointed.build_pointed(d, points, coloring_for(d))
    summary = pointed.homology(P, ring, args.threads)
    return (homology_text(f"Kh(L,p) with {P.m} basepoints over {ring}", summary),
            homology_document("pointed", ring, d, points, summary), HomologyReportSchema())


def cmd_ss(d, points):
    ring = ring_for(RATIONALS)
    P = pointed.build_pointed(d, points, coloring_for(d))
    report = spectral.pages(spectral.cube_filtration(P), ring, args.pages, args.threads)
    signs = []
    if all(r.is_nondegenerate() for r in P.kh.resolutions.values()):
        E1 = spectral.cube_e0_iso(P, check_edges=False)
        signs = [{"source": s, "target": t, "sign": v} for (s, t), v in sorted(E1.sign_ledger.items())]
    doc = {
        "schema_version": SCHEMA_VERSION,
        "ring": str(ring),
        "pd": d.pd_text,
        "basepoints": [str(p) for p in points],
        "pages": [{"page": r, "total": page.total(), "entries": register_entries(page, ("level", "h", "q"))}
                  for r, page in enumerate(report.pages)],
        "converged_at": report.converged_at,
        "homology_rank": report.homology_rank,
        "d1_signs": signs,
    }
    text = f"cube filtration spectral sequence over {ring}\n"
    for r in range(len(report.pages)):
        text += f"E_{r}: total rank {report.pages[r].total()}\n"
        text += line_table(dict(report.by_delta(r)), "level,delta")
    text += f"converged at E_{report.converged_at}; homology rank {report.homology_rank}\n"
    if signs:
        text += "d_1 edge signs: " + " ".join(f"{s['source']}->{s['target']}:{'+' if s['sign'] > 0 else '-'}" for s in signs) + "\n"
    return text, doc, PageReportSchema()


def _variant_document(E: hfkcube.HfkE1) -> Dict:
    ranks = E.e2_by_delta(args.threads)
    doc = {
        "variant": E.variant,
        "total_rank": ranks.total(),
        "width": hfkcube.width(ranks),
        "entries": register_entries(ranks, ("level", "delta")),
        "g_entries": None,
    }
    if E.variant == hfkcube.F0_ONLY:
        doc["g_entries"] = register_entries(E.e2_by_g(args.threads), ("level", "delta", "g"))
    return doc


def cmd_hfk_e2(d, points):
    cube = hfkcube.build_cube(d, points, coloring_for(d))
    E0 = hfkcube.build_e1(cube, hfkcube.F0_ONLY, args.threads)
    E = hfkcube.build_e1(cube, hfkcube.FULL, args.threads)
    generators = []
    for v, i in E.basis:
        M = cube.modules[v]
        lam, gam = M.basis[i]
        generators.append({"vertex": vertex_string(v), "lam": lam, "gamma": gam, "maslov": M.maslov(i),
                           "alexander": M.alexander(i), "delta": M.big_delta(i), "g": M.g_grading(i)})
    edges = []
    for ledger in E.ledgers:
        f0, f1 = E.edge_maps[(ledger.source, ledger.target)]
        edges.append({"source": ledger.source, "target": ledger.target, "kind": ledger.kind,
                      "distinguished": list(ledger.distinguished),
                      "f0": [[r, c] for (r, c), _ in f0.entries()], "f1": [[r, c] for (r, c), _ in f1.entries()]})
    variants = [_variant_document(E0), _variant_document(E)]
    inequality = hfkcube.filtration_inequality(E0, E, args.threads)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "pd": d.pd_text,
        "basepoints": [str(p) for p in points],
        "generators": generators,
        "edges": edges,
        "variants": variants,
        "filtration_inequality": inequality,
    }
    text = ""
    for variant in variants:
        text += f"E_2 of the {variant['variant']} complex: total rank {variant['total_rank']}, width {variant['width']}\n"
        text += "".join(f"  {e['level']},{fmt_grade(e['delta'])}: {e['rank']}\n" for e in variant["entries"])
    text += f"rank H(f0) >= rank H(f0 + f1) in every grading: {inequality}\n"
    return text, doc, HfkReportSchema()


def cmd_compare_e1(d, points):
    result = hfkcube.compare_e1(d, points, coloring_for(d), args.threads)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "pd": d.pd_text,
        "basepoints": [str(p) for p in points],
        "isomorphic": result.isomorphic,
        "e2_agrees": result.e2_agrees,
        "witness": [{"vertex": v, "khovanov": i, "floer": j} for (v, i), (_, j) in sorted(result.witness.items())],
        "khovanov_e2": register_entries(result.khovanov_e2, ("level", "delta")),
        "hfk_e2": register_entries(result.hfk_e2, ("level", "delta")),
    }
    text = f"E_1 pages isomorphic over f2: {result.isomorphic}\n"
    text += line_table(dict(result.khovanov_e2), "Khovanov E_2 level,delta")
    text += line_table(dict(result.hfk_e2), "Floer E_2 level,Delta")
    return text, doc, ComparisonSchema()


def cmd_jones(d, points):
    K = khovanov.build_ckh(d, coloring_for(d))
    from_homology = khovanov.jones_from_homology(khovanov.homology(K, INTEGERS, args.threads))
    from_bracket = khovanov.jones_from_bracket(d)
    agree = sympy.expand(from_homology.subs(khovanov.q, -khovanov.A ** -2) - from_bracket) == 0
    doc = {
        "schema_version": SCHEMA_VERSION,
        "pd": d.pd_text,
        "from_homology": str(from_homology),
        "from_bracket": str(from_bracket),
        "agree": agree,
    }
    text = f"graded Euler characteristic: {from_homology}\nKauffman bracket at q = -A^-2: {from_bracket}\nagree: {agree}\n"
    return text, doc, JonesSchema()


def cmd_det(d, points):
    value = khovanov.determinant(d, coloring_for(d))
    doc = {"schema_version": SCHEMA_VERSION, "pd": d.pd_text, "determinant": value}
    return f"determinant: {value}\n", doc, DeterminantSchema()


def cmd_invariance_check(d, points):
    ring = ring_for(INTEGERS)
    d2, points2 = load_input(args.pd2, None, args.diagram2, args.basepoints2)
    if len(points) != len(points2):
        raise UsageError(f"{len(points)} basepoints on the first diagram but {len(points2)} on the second")
    left = pointed.homology(pointed.build_pointed(d, points, coloring_for(d)), ring, args.threads)
    right = pointed.homology(pointed.build_pointed(d2, points2, checkerboard(d2)), ring, args.threads)
    a, b = left.ranks(), right.ranks()
    ta, tb = left.torsion(), right.torsion()
    differences = [{"h": h, "q": j, "left": a.get((h, j), 0), "right": b.get((h, j), 0)}
                   for h, j in sorted(set(a) | set(b)) if a.get((h, j), 0) != b.get((h, j), 0)]
    identical = not differences and ta == tb
    doc = {
        "schema_version": SCHEMA_VERSION,
        "ring": str(ring),
        "left": homology_document("pointed", ring, d, points, left),
        "right": homology_document("pointed", ring, d2, points2, right),
        "identical": identical,
        "differences": differences,
    }
    text = homology_text("first diagram", left) + homology_text("second diagram", right)
    text += f"graded tables identical: {identical}\n"
    return text, doc, InvarianceSchema()


HANDLERS = {
    "show": cmd_show,
    "kh": cmd_kh,
    "khred": cmd_khred,
    "pointed": cmd_pointed,
    "ss": cmd_ss,
    "hfk-e2": cmd_hfk_e2,
    "compare-e1": cmd_compare_e1,
    "jones": cmd_jones,
    "det": cmd_det,
    "invariance-check": cmd_invariance_check,
}


#==================================================================#
#  Entry point
#==================================================================#
def emit(text: str):
    if args is not None and args.output:
        fileops.savereport(args.output, text)
    else:
        sys.stdout.write(text)


def run() -> int:
    if args.list_diagrams:
        found = fileops.getdiagramfiles()
        if args.format == "json":
            emit(dumps(DiagramListSchema(), {"schema_version": SCHEMA_VERSION, "diagrams": found}) + "\n")
        else:
            emit("".join(f"{js['name']}: {js['description']}\n" for js in found))
        return 0
    if args.command is None:
        raise UsageError("no command given")
    d, points = load_input(args.pd, args.unlink, args.diagram, args.basepoints)
    text, doc, schema = HANDLERS[args.command](d, points)
    emit(dumps(schema, doc) + "\n" if args.format == "json" else text)
    # The report is printed either way; differing tables still fail the run
    if args.command == "invariance-check" and not doc["identical"]:
        failure = TablesDiffer(f"{len(doc['differences'])} ranks differ between the diagrams")
        logger.error(str(failure))
        return failure.code
    return 0


def main(override_args=None) -> int:
    try:
        general_startup(override_args)
        return run()
    except KhError as e:
        logger.error(str(e))
        if args is not None and args.format == "json":
            sys.stdout.write(json.dumps(ErrorSchema().dump({"detail": {"msg": str(e), "type": e.type}}), indent=3, sort_keys=True) + "\n")
        return e.code


if __name__ == "__main__":
    sys.exit(main())
