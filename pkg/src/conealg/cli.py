"""Command-line surface: verification subcommands over document files.

Every subcommand emits a Report: JSON with the command echo, a verdict per
mathematical identity exercised, and the seed; exit code 0 iff all checks
pass.  Reports are byte-deterministic for fixed (input, seed, flags) except
for the "timings" field, which is excluded from the canonical body.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import documents
from .a2 import (
    SignResolutionFailed,
    cone_product,
    homology_ring_map_check,
    obstruction_class,
    resolve_transfer_signs,
    transfer_a2,
    verify_a2_triple,
    verify_retract,
    cone_level_maps,
)
from .cones import build_cone, les_data, product_respects_filtration, truncate_filtered
from .duality import (
    MismatchedRing,
    algebraic_pd_check,
    dualize_a2_plus,
    double_dualize,
    verify_a2_plus,
    verify_co_structure,
)
from .exactalg import ring_from_description
from .generators import GenerationExhausted, generate_document
from .graded import homology
from .splittings import (
    HypothesisFailed,
    InfiniteSolutionFamily,
    JStarNotIso,
    canonical_splitting,
    component_decomposition,
    ring_map_check,
    section_is_ring_map,
    section_law_check,
    splitting_search,
)


class Report:
    def __init__(self, command, seed=None):
        self.command = command
        self.seed = seed
        self.checks = []
        self._t0 = time.monotonic()

    def add(self, name, ok, witness=None):
        entry = {"name": name, "status": "pass" if ok else "fail"}
        if witness is not None and not ok:
            entry["witness"] = _jsonable(witness)
        self.checks.append(entry)

    def extend(self, check_report, prefix=""):
        for c in check_report.checks:
            self.add(prefix + c["name"], c["ok"], c.get("witness"))

    def info(self, name, value):
        self.checks.append({"name": name, "status": "info", "value": _jsonable(value)})

    @property
    def ok(self):
        return all(c["status"] != "fail" for c in self.checks)

    def body(self):
        return {
            "command": self.command,
            "version": documents.SCHEMA_VERSION,
            "seed": self.seed,
            "checks": self.checks,
            "verdict": "pass" if self.ok else "fail",
        }

    def emit(self, pretty=False, stream=None):
        stream = stream or sys.stdout
        body = self.body()
        body["timings"] = {"seconds": round(time.monotonic() - self._t0, 6)}
        if pretty:
            print(f"$ {' '.join(self.command)}", file=stream)
            for c in self.checks:
                if c["status"] == "info":
                    print(f"  [info] {c['name']}: {c.get('value')}", file=stream)
                else:
                    mark = "ok " if c["status"] == "pass" else "FAIL"
                    print(f"  [{mark}] {c['name']}", file=stream)
                    if "witness" in c:
                        print(f"         witness: {json.dumps(c['witness'])}", file=stream)
            print(f"verdict: {body['verdict']}", file=stream)
        else:
            print(json.dumps(body, sort_keys=True, separators=(",", ": ")), file=stream)
        return 0 if self.ok else 1


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (int, str, bool)) or x is None:
        return x
    return str(x)


def _load(path):
    with open(path, "r", encoding="utf-8") as f:
        return documents.parse(f.read())


def _pick_structure(doc, name, kinds, report):
    cands = {
        k: v for k, (kind, v) in doc.structures.items() if kind in kinds
    }
    if name is not None:
        if name not in doc.structures or doc.structures[name][0] not in kinds:
            report.add(f"structure-{name}-found", False, {"available": sorted(cands)})
            return None
        return doc.structures[name][1]
    if len(cands) != 1:
        report.add("structure-unique", False, {"available": sorted(cands)})
        return None
    return next(iter(cands.values()))


def cmd_verify(args):
    report = Report(["verify", args.file], seed=args.seed)
    try:
        doc = _load(args.file)
    except (documents.SchemaError, documents.InvariantError) as e:
        report.add("parse", False, str(e))
        return report.emit(args.pretty)
    report.add("parse", True)
    for name, (kind, obj) in sorted(doc.structures.items()):
        if args.structure and name != args.structure:
            continue
        if kind == "a2_triple":
            report.extend(verify_a2_triple(obj), prefix=f"{name}.")
        elif kind == "a2_plus":
            report.extend(verify_a2_plus(obj), prefix=f"{name}.")
        elif kind == "retract":
            report.extend(verify_retract(obj), prefix=f"{name}.")
        elif kind == "ring_sequence":
            report.add(f"{name}.parsed", True)
    return report.emit(args.pretty)


def cmd_homology(args):
    report = Report(["homology", args.file, "--complex", args.complex], seed=args.seed)
    doc = _load(args.file)
    if args.complex not in doc.complexes:
        report.add("complex-found", False, {"available": sorted(doc.complexes)})
        return report.emit(args.pretty)
    hp = homology(doc.complexes[args.complex])
    dims = {}
    for d in hp.degrees():
        torsion = [f for f in hp.factors_at(d) if f > 1]
        rank = hp.dim(d) - len(torsion)
        if rank or torsion:
            dims[str(d)] = {"rank": rank, "torsion": torsion}
    report.info("dimensions", dims)
    report.add("computed", True)
    return report.emit(args.pretty)


def cmd_cone(args):
    report = Report(["cone", args.file, "--map", args.map], seed=args.seed)
    doc = _load(args.file)
    if args.map not in doc.maps:
        report.add("map-found", False, {"available": sorted(doc.maps)})
        return report.emit(args.pretty)
    c = doc.maps[args.map]
    shape = c._doc_shape
    fiber = doc.complexes[shape["sources"][0]]
    base = doc.complexes[shape["target"][0]]
    cone = build_cone(c, fiber, base)
    report.add("cone-differential-squares-to-zero", True)
    data = les_data(cone)
    report.add("les-exactness", data.exact, data.failures or None)
    report.info(
        "cone-homology-dims", {str(d): data.h_total.dim(d) for d in data.h_total.degrees() if data.h_total.dim(d)}
    )
    return report.emit(args.pretty)


def cmd_product(args):
    report = Report(["product", args.file, "--triple", args.triple or ""], seed=args.seed)
    doc = _load(args.file)
    t = _pick_structure(doc, args.triple, {"a2_triple"}, report)
    if t is None:
        return report.emit(args.pretty)
    rep = verify_a2_triple(t)
    report.extend(rep, prefix="triple.")
    if rep.ok:
        cone, m = cone_product(t, verify=False)
        from .graded import commutator

        br = commutator([cone.total, cone.total], cone.total, m)
        report.add("cone-product-chain-map", br.is_zero())
        if args.window:
            lo, hi = (float_to_fraction(x) for x in args.window.split(","))
            bad = product_respects_filtration(cone, m)
            report.add("filtration-subadditive", not bad, bad[:3] or None)
            win = truncate_filtered(cone, lo, hi)
            report.info("window-rank", win.module.rank)
    return report.emit(args.pretty)


def float_to_fraction(s):
    from fractions import Fraction

    return Fraction(s.strip())


def cmd_split(args):
    cmdline = ["split", args.file, "--canonical" if args.canonical else "--search"]
    report = Report(cmdline, seed=args.seed)
    doc = _load(args.file)
    if args.search:
        seq = _pick_structure(doc, args.sequence, {"ring_sequence"}, report)
        if seq is None:
            return report.emit(args.pretty)
        try:
            sections, compatible = splitting_search(seq)
        except InfiniteSolutionFamily as e:
            report.add("search-decidable", False, str(e))
            return report.emit(args.pretty)
        report.info("graded-sections", len(sections))
        report.info("product-compatible-sections", len(compatible))
        report.add("search-complete", True)
        if sections and seq.quot_product is not None:
            report.info(
                "ring-map-sections",
                sum(1 for s in sections if section_is_ring_map(seq, s)),
            )
        return report.emit(args.pretty)
    t = _pick_structure(doc, args.triple, {"a2_triple"}, report)
    if t is None:
        return report.emit(args.pretty)
    cone, m = cone_product(t, verify=False)
    try:
        s = canonical_splitting(cone)
    except JStarNotIso as e:
        report.add("jstar-isomorphism", False, str(e))
        return report.emit(args.pretty)
    report.add("jstar-isomorphism", True)
    fails = section_law_check(s)
    report.add("section-law", not fails, fails[:3] or None)
    rm_fails, cond = ring_map_check(cone, m, s, t)
    report.add("ring-map", not rm_fails, rm_fails[:3] or None)
    report.info("im-beta-in-im-c", cond)
    return report.emit(args.pretty)


def cmd_transfer(args):
    report = Report(["transfer", args.file, "--retract", args.retract or ""], seed=args.seed)
    doc = _load(args.file)
    r = _pick_structure(doc, args.retract, {"retract"}, report)
    if r is None:
        return report.emit(args.pretty)
    rep = verify_retract(r)
    report.extend(rep, prefix="retract.")
    if not rep.ok:
        return report.emit(args.pretty)
    t = _pick_structure(doc, None, {"a2_triple"}, report)
    if t is None:
        return report.emit(args.pretty)
    try:
        out, mprime, ctx = transfer_a2(t, r, verify=True)
    except SignResolutionFailed as e:
        report.add("transferred-triple-valid", False, str(e))
        return report.emit(args.pretty)
    report.add("transferred-triple-valid", True)
    src_cone, m, dst_cone, P, I, H = ctx
    fails = homology_ring_map_check(P, src_cone.total, m, dst_cone.total, mprime)
    report.add("projection-ring-map-on-homology", not fails, fails[:3] or None)
    try:
        survivors, chosen = resolve_transfer_signs(t, r, reference=out)
        report.add("sign-resolution-consistent", chosen is not None)
        report.info("sign-assignments-surviving", len(survivors))
    except SignResolutionFailed as e:
        report.add("sign-resolution-consistent", False, str(e))
    return report.emit(args.pretty)


def cmd_dualize(args):
    report = Report(["dualize", args.file, "--structure", args.structure or ""], seed=args.seed)
    doc = _load(args.file)
    s = _pick_structure(doc, args.structure, {"a2_plus"}, report)
    if s is None:
        return report.emit(args.pretty)
    rep = verify_a2_plus(s)
    report.extend(rep, prefix="structure.")
    if not rep.ok:
        return report.emit(args.pretty)
    co = dualize_a2_plus(s)
    report.extend(verify_co_structure(s, co), prefix="dual.")
    sdd = double_dualize(s, co)
    report.add(
        "double-dual-round-trip",
        all(sdd.ops()[k] == s.ops()[k] for k in s.ops()),
    )
    return report.emit(args.pretty)


def cmd_pd_check(args):
    report = Report(["pd-check", args.file], seed=args.seed)
    doc = _load(args.file)
    s = _pick_structure(doc, args.structure, {"a2_plus"}, report)
    if s is None:
        return report.emit(args.pretty)
    try:
        rep = algebraic_pd_check(s)
        report.extend(rep)
    except MismatchedRing as e:
        report.add("poincare-duality", False, str(e))
    return report.emit(args.pretty)


def cmd_components(args):
    report = Report(["components", args.file], seed=args.seed)
    doc = _load(args.file)
    s = _pick_structure(doc, args.structure, {"a2_plus"}, report)
    if s is None:
        return report.emit(args.pretty)
    try:
        rep, triple, cone, m, splitting = component_decomposition(s)
        report.extend(rep)
    except HypothesisFailed as e:
        report.add("hypotheses", False, str(e))
    return report.emit(args.pretty)


def cmd_random_gen(args):
    report = Report(
        ["random-gen", "--kind", args.kind, "--seed", str(args.seed), "--out", args.out],
        seed=args.seed,
    )
    ring = ring_from_description(json.loads(args.ring))
    params = {}
    if args.b_zero:
        params["b_zero"] = True
    try:
        doc = generate_document(args.kind, args.seed, ring, **params)
    except GenerationExhausted as e:
        report.add("generation", False, {"error": str(e), "obstructions": e.stats})
        return report.emit(args.pretty)
    text = documents.serialize(doc)
    with open(args.out, "w", encoding="utf-8") as f:
        f.write(text)
    # re-parse and re-verify what we wrote
    doc2 = documents.parse(text)
    ok = True
    for name, (kind, obj) in doc2.structures.items():
        if kind == "a2_triple":
            ok = ok and verify_a2_triple(obj).ok
        elif kind == "a2_plus":
            ok = ok and verify_a2_plus(obj).ok
        elif kind == "retract":
            ok = ok and verify_retract(obj).ok
    report.add("generated-structure-verifies", ok)
    report.add("round-trip-fixpoint", documents.serialize(doc2) == text)
    return report.emit(args.pretty)


def build_parser():
    p = argparse.ArgumentParser(
        prog="conealg",
        description="Exact differential graded calculus: cones, A2-triples, duality.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--pretty", action="store_true", help="human-readable report")
    common.add_argument("--seed", type=int, default=0, help="seed echoed into reports")
    sub = p.add_subparsers(dest="command", required=True, parser_class=lambda **kw: argparse.ArgumentParser(parents=[common], **kw))

    q = sub.add_parser("verify", help="re-verify structures in a document")
    q.add_argument("file")
    q.add_argument("--structure")
    q.set_defaults(func=cmd_verify)

    q = sub.add_parser("homology", help="per-degree homology of a complex")
    q.add_argument("file")
    q.add_argument("--complex", required=True)
    q.set_defaults(func=cmd_homology)

    q = sub.add_parser("cone", help="build a mapping cone and certify its LES")
    q.add_argument("file")
    q.add_argument("--map", required=True)
    q.set_defaults(func=cmd_cone)

    q = sub.add_parser("product", help="cone product of an A2-triple")
    q.add_argument("file")
    q.add_argument("--triple")
    q.add_argument("--window", help="filtration window a,b")
    q.set_defaults(func=cmd_product)

    q = sub.add_parser("split", help="canonical splitting or brute-force search")
    q.add_argument("file")
    g = q.add_mutually_exclusive_group(required=True)
    g.add_argument("--canonical", action="store_true")
    g.add_argument("--search", action="store_true")
    q.add_argument("--triple")
    q.add_argument("--sequence")
    q.set_defaults(func=cmd_split)

    q = sub.add_parser("transfer", help="arity-2 homotopy transfer along a retract")
    q.add_argument("file")
    q.add_argument("--retract")
    q.set_defaults(func=cmd_transfer)

    q = sub.add_parser("dualize", help="dual co-structure and round trip")
    q.add_argument("file")
    q.add_argument("--structure")
    q.set_defaults(func=cmd_dualize)

    q = sub.add_parser("pd-check", help="algebraic Poincare duality certification")
    q.add_argument("file")
    q.add_argument("--structure")
    q.set_defaults(func=cmd_pd_check)

    q = sub.add_parser("components", help="product components on reduced homology")
    q.add_argument("file")
    q.add_argument("--structure")
    q.set_defaults(func=cmd_components)

    q = sub.add_parser("random-gen", help="write a seeded random document")
    q.add_argument("--kind", required=True, choices=["a2_triple", "a2_plus", "retract"])
    q.add_argument("--out", required=True)
    q.add_argument("--ring", default='{"kind": "prime_field", "p": 5}')
    q.add_argument("--b-zero", action="store_true")
    q.set_defaults(func=cmd_random_gen)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
