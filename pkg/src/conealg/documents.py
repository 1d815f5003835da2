"""The JSON document format: complexes, maps, structures; exact round trips.

Wire format (schema version "1"): coefficients are decimal strings ("3",
"-2", "3/4"), entries are {"inputs": [generator names], "output": name,
"coeff": "..."}; degree shifts are recorded structurally (a complex is
stored unshifted; shifted objects are reconstructed), never baked into
names on disk.  serialize(parse(text)) is a byte-level fixpoint.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .a2 import A2TripleData, HomotopyRetractTriple
from .duality import A2PlusStructure
from .exactalg import RingError, ring_from_description
from .graded import (
    ChainComplex,
    Gen,
    GradedModule,
    MultilinearMap,
    NotChainMap,
    ShapeError,
    tensor_module,
    zero_map,
)
from .splittings import GradedRingPresentation

SCHEMA_VERSION = "1"


class SchemaError(Exception):
    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


class InvariantError(Exception):
    def __init__(self, obj, detail):
        super().__init__(f"{obj}: {detail}")
        self.obj = obj


class Document:
    def __init__(self, ring, complexes, maps, structures, metadata=None):
        self.ring = ring
        self.complexes = complexes      # name -> ChainComplex
        self.maps = maps                # name -> MultilinearMap
        self.structures = structures    # name -> (kind, object)
        self.metadata = metadata or {}


def _coeff_str(ring, x):
    return ring.show(x)


def _parse_coeff(ring, s, path):
    try:
        return ring.parse(s)
    except (ValueError, RingError) as e:
        raise SchemaError(path, f"bad coefficient {s!r}: {e}")


def _level_str(level):
    if level is None:
        return None
    f = Fraction(level)
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def _parse_level(s, path):
    if s is None:
        return None
    try:
        if "/" in s:
            n, d = s.split("/")
            return Fraction(int(n), int(d))
        return Fraction(int(s))
    except ValueError:
        raise SchemaError(path, f"bad filtration level {s!r}")


def serialize_map_entries(ring, m, sources, target):
    out = []
    for ins in sorted(m.entries):
        names = [src.gens[i].name for src, i in zip(sources, ins)]
        for o in sorted(m.entries[ins]):
            out.append(
                {
                    "inputs": names,
                    "output": target.gens[o].name,
                    "coeff": _coeff_str(ring, m.entries[ins][o]),
                }
            )
    return out


def parse_map_entries(ring, entries, sources, target, degree, path):
    triples = {}
    for i, e in enumerate(entries):
        p = f"{path}[{i}]"
        if not isinstance(e, dict) or set(e) - {"inputs", "output", "coeff"}:
            raise SchemaError(p, "entry must have inputs/output/coeff")
        names = e.get("inputs", [])
        if len(names) != len(sources):
            raise SchemaError(p, f"expected {len(sources)} inputs, got {len(names)}")
        key = []
        for s, n in zip(sources, names):
            if n not in s.by_name:
                raise SchemaError(p, f"unknown generator {n!r}")
            key.append(s.by_name[n])
        out_name = e.get("output")
        if out_name not in target.by_name:
            raise SchemaError(p, f"unknown output generator {out_name!r}")
        o = target.by_name[out_name]
        c = _parse_coeff(ring, e.get("coeff", "0"), p)
        row = triples.setdefault(tuple(key), {})
        row[o] = ring.add(row.get(o, ring.zero()), c)
    try:
        return MultilinearMap(sources, target, degree, triples)
    except ShapeError as e:
        raise InvariantError(path, str(e))


def _tensor_target(doc, names, path):
    mods = []
    for n in names:
        if n not in doc.complexes:
            raise SchemaError(path, f"unknown complex {n!r}")
        mods.append(doc.complexes[n].module)
    if not mods:
        raise SchemaError(path, "empty target")
    return tensor_module(mods) if len(mods) > 1 else mods[0]


def parse(text):
    """Parse and validate a document; structures re-verify on demand."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError("$", f"invalid JSON: {e}")
    if not isinstance(data, dict):
        raise SchemaError("$", "document must be an object")
    if data.get("version") != SCHEMA_VERSION:
        raise SchemaError("$.version", f"unsupported schema version {data.get('version')!r}")
    try:
        ring = ring_from_description(data.get("ring", {}))
    except (RingError, KeyError) as e:
        raise SchemaError("$.ring", str(e))

    complexes = {}
    for name, spec in sorted(data.get("complexes", {}).items()):
        path = f"$.complexes.{name}"
        gens = []
        for i, g in enumerate(spec.get("generators", [])):
            gp = f"{path}.generators[{i}]"
            if "name" not in g or "degree" not in g:
                raise SchemaError(gp, "generator needs name and degree")
            gens.append(Gen(g["name"], int(g["degree"]), _parse_level(g.get("level"), gp)))
        try:
            mod = GradedModule(ring, gens)
        except ShapeError as e:
            raise SchemaError(path, str(e))
        d = parse_map_entries(
            ring, spec.get("differential", []), [mod], mod, -1, f"{path}.differential"
        )
        try:
            complexes[name] = ChainComplex(mod, d)
        except NotChainMap as e:
            raise InvariantError(path, str(e))

    doc = Document(ring, complexes, {}, {}, data.get("metadata", {}))

    for name, spec in sorted(data.get("maps", {}).items()):
        path = f"$.maps.{name}"
        src_names = spec.get("sources", [])
        sources = []
        for n in src_names:
            if n not in complexes:
                raise SchemaError(path, f"unknown source complex {n!r}")
            sources.append(complexes[n].module)
        tgt_names = spec.get("target")
        if isinstance(tgt_names, str):
            tgt_names = [tgt_names]
        target = _tensor_target(doc, tgt_names, path)
        degree = int(spec.get("degree", 0))
        doc.maps[name] = parse_map_entries(
            ring, spec.get("entries", []), sources, target, degree, f"{path}.entries"
        )
        doc.maps[name]._doc_shape = {
            "sources": src_names,
            "target": tgt_names,
            "degree": degree,
        }

    for name, spec in sorted(data.get("structures", {}).items()):
        path = f"$.structures.{name}"
        kind = spec.get("type")
        if kind == "a2_triple":
            doc.structures[name] = ("a2_triple", _parse_a2_triple(doc, spec, path))
        elif kind == "a2_plus":
            doc.structures[name] = ("a2_plus", _parse_a2_plus(doc, spec, path))
        elif kind == "retract":
            doc.structures[name] = ("retract", _parse_retract(doc, spec, path))
        elif kind == "ring_sequence":
            doc.structures[name] = ("ring_sequence", _parse_ring_sequence(doc, spec, path))
        else:
            raise SchemaError(path, f"unknown structure type {kind!r}")
        doc.structures[name][1]._doc_spec = spec
    return doc


def _need(doc, table, name, path):
    if name not in table:
        raise SchemaError(path, f"unresolved reference {name!r}")
    return table[name]


def _parse_a2_triple(doc, spec, path):
    m = _need(doc, doc.complexes, spec.get("M"), path)
    a = _need(doc, doc.complexes, spec.get("A"), path)
    ops = {}
    for key in ("c", "mu", "m_L", "m_R", "tau_L", "tau_R", "sigma", "beta"):
        ops[key] = _need(doc, doc.maps, spec.get(key), f"{path}.{key}")
    return A2TripleData(
        fiber=m,
        base=a,
        c=ops["c"],
        mu=ops["mu"],
        m_l=ops["m_L"],
        m_r=ops["m_R"],
        tau_l=ops["tau_L"],
        tau_r=ops["tau_R"],
        sigma=ops["sigma"],
        beta=ops["beta"],
    )


def _parse_a2_plus(doc, spec, path):
    a = _need(doc, doc.complexes, spec.get("A"), path)
    return A2PlusStructure(
        base=a,
        c0=_need(doc, doc.maps, spec.get("c0"), f"{path}.c0"),
        mu=_need(doc, doc.maps, spec.get("mu"), f"{path}.mu"),
        h_assoc=_need(doc, doc.maps, spec.get("h_assoc"), f"{path}.h_assoc"),
        lam=_need(doc, doc.maps, spec.get("lambda"), f"{path}.lambda"),
        cubic=_need(doc, doc.maps, spec.get("B"), f"{path}.B"),
    )


def _parse_retract(doc, spec, path):
    names = (
        "src_M", "src_A", "src_c", "dst_M", "dst_A", "dst_c",
        "p", "i", "h", "pi", "iota", "chi", "kappa", "eta", "a",
    )
    vals = {}
    for key in names:
        table = doc.complexes if key in ("src_M", "src_A", "dst_M", "dst_A") else doc.maps
        vals[key] = _need(doc, table, spec.get(key), f"{path}.{key}")
    return HomotopyRetractTriple(
        src=None,
        src_fiber=vals["src_M"],
        src_base=vals["src_A"],
        src_c=vals["src_c"],
        dst_fiber=vals["dst_M"],
        dst_base=vals["dst_A"],
        dst_c=vals["dst_c"],
        p=vals["p"],
        i=vals["i"],
        h=vals["h"],
        pi=vals["pi"],
        iota=vals["iota"],
        chi=vals["chi"],
        kappa=vals["kappa"],
        eta=vals["eta"],
        a_map=vals["a"],
    )


def _parse_ring_sequence(doc, spec, path):
    total = _need(doc, doc.complexes, spec.get("total"), path).module
    sub = _need(doc, doc.complexes, spec.get("sub"), path).module
    quot = _need(doc, doc.complexes, spec.get("quot"), path).module
    return GradedRingPresentation(
        space=total,
        product=_need(doc, doc.maps, spec.get("product"), f"{path}.product"),
        sub=sub,
        incl=_need(doc, doc.maps, spec.get("incl"), f"{path}.incl"),
        quot=quot,
        proj=_need(doc, doc.maps, spec.get("proj"), f"{path}.proj"),
        quot_product=(
            _need(doc, doc.maps, spec.get("quot_product"), f"{path}.quot_product")
            if spec.get("quot_product")
            else None
        ),
    )


def serialize(doc):
    """Canonical JSON text (sorted keys, fixed separators, trailing newline)."""
    ring = doc.ring
    data = {
        "version": SCHEMA_VERSION,
        "ring": ring.describe(),
        "complexes": {},
        "maps": {},
        "structures": {},
        "metadata": doc.metadata,
    }
    for name, cx in doc.complexes.items():
        data["complexes"][name] = {
            "generators": [
                _gen_json(g) for g in cx.module.gens
            ],
            "differential": serialize_map_entries(ring, cx.differential, [cx.module], cx.module),
        }
    for name, m in doc.maps.items():
        try:
            shape = m._doc_shape
        except AttributeError:
            raise ShapeError(f"map {name} lacks document shape info")
        srcs = [doc.complexes[n].module for n in shape["sources"]]
        tgt = _tensor_target(doc, shape["target"], "$")
        data["maps"][name] = {
            "sources": shape["sources"],
            "target": shape["target"] if len(shape["target"]) > 1 else shape["target"][0],
            "degree": shape["degree"],
            "entries": serialize_map_entries(ring, m, srcs, tgt),
        }
    for name, (kind, obj) in doc.structures.items():
        data["structures"][name] = getattr(obj, "_doc_spec")
    return json.dumps(data, sort_keys=True, separators=(",", ": "), indent=1) + "\n"


def _gen_json(g):
    out = {"name": g.name, "degree": g.degree}
    if g.level is not None:
        out["level"] = _level_str(g.level)
    return out


def document_from_parts(ring, complexes, maps=None, structures=None, metadata=None):
    """Build a Document programmatically; maps carry explicit shape info."""
    doc = Document(ring, dict(complexes), {}, {}, metadata or {})
    for name, (m, sources, target) in (maps or {}).items():
        m._doc_shape = {
            "sources": list(sources),
            "target": list(target) if isinstance(target, (list, tuple)) else [target],
            "degree": m.degree,
        }
        doc.maps[name] = m
    for name, (kind, obj, spec) in (structures or {}).items():
        obj._doc_spec = spec
        doc.structures[name] = (kind, obj)
    return doc
