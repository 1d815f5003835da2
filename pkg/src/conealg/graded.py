"""Graded modules, multilinear maps, and the Koszul sign engine.

The single sign authority of the whole library lives here (plus the shift
formulas in shifts.py): signs enter only through

  * the differential on a tensor product,
        d(a (x) b) = da (x) b + (-1)^|a| a (x) db,
  * the twist isomorphism  tau(a (x) b) = (-1)^{|a||b|} b (x) a,
  * the Koszul evaluation of a tensor of maps,
        (f (x) g)(a (x) c) = (-1)^{|g||a|} f(a) (x) g(c),
  * the commutator  [d, f] = d f - (-1)^{|f|} f d,
  * the dual differential  d f = -(-1)^{|f|} f d  (degree reversal |f^| = -|f|).

Every other operation (evaluation pairings, duals of maps, double duals,
Hom complexes, cone products, ...) is built by composing these primitives,
so no downstream formula hand-codes a sign.

A MultilinearMap is a sparse table of structure constants
V_1 (x) ... (x) V_l -> V, homogeneous of a fixed degree.  l = 0 encodes a
vector R -> V, l = 1 a graded linear map.  Maps with several outputs are
maps into a tensor module.
"""

from __future__ import annotations

from typing import NamedTuple

from .exactalg import (
    Inconsistent,
    Matrix,
    kernel_basis,
    rank,
    smith_normal_form,
    solve,
)


class ShapeError(Exception):
    pass


class NotChainMap(Exception):
    pass


class Gen(NamedTuple):
    name: str
    degree: int
    level: object = None  # optional Fraction filtration level


class GradedModule:
    """Free graded module with a named, finite basis."""

    def __init__(self, ring, gens, factors=None):
        self.ring = ring
        self.gens = tuple(Gen(*g) if not isinstance(g, Gen) else g for g in gens)
        names = [g.name for g in self.gens]
        if len(set(names)) != len(names):
            raise ShapeError("generator names must be unique")
        self.by_name = {g.name: i for i, g in enumerate(self.gens)}
        self.degrees = tuple(g.degree for g in self.gens)
        # tensor structure: factors + per-generator tuple of factor positions
        self.factors = tuple(factors) if factors else None
        self.factor_pos = None
        self.key = (
            tuple(sorted(self.ring.describe().items())),
            tuple((g.name, g.degree, g.level) for g in self.gens),
        )

    @property
    def rank(self):
        return len(self.gens)

    def degree_of(self, i):
        return self.degrees[i]

    def positions_of_degree(self, d):
        return [i for i, g in enumerate(self.gens) if g.degree == d]

    def support(self):
        return sorted(set(self.degrees))

    def has_levels(self):
        return all(g.level is not None for g in self.gens)

    def __eq__(self, other):
        return isinstance(other, GradedModule) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"GradedModule({[g.name for g in self.gens]})"


def unit_module(ring):
    return GradedModule(ring, [Gen("1", 0, None)])


def is_unit_module(mod):
    return mod.rank == 1 and mod.gens[0].name == "1" and mod.gens[0].degree == 0


def tensor_module(mods):
    """Tensor product module; generators ordered lexicographically by slot."""
    flat = []
    for m in mods:
        flat.extend(m.factors if m.factors else [m])
    flat = [m for m in flat if not is_unit_module(m)]
    if not flat:
        return unit_module(mods[0].ring if mods else None)
    if len(flat) == 1:
        return flat[0]
    ring = flat[0].ring
    gens = []
    factor_pos = []

    # generator level: sum of factor levels when every factor carries one
    def rec(slot, name_parts, deg, lvl_parts, pos):
        if slot == len(flat):
            lvl = sum(lvl_parts) if all(x is not None for x in lvl_parts) and lvl_parts else None
            gens.append(Gen("⊗".join(name_parts), deg, lvl))
            factor_pos.append(tuple(pos))
            return
        for i, g in enumerate(flat[slot].gens):
            rec(slot + 1, name_parts + [g.name], deg + g.degree, lvl_parts + [g.level], pos + [i])

    rec(0, [], 0, [], [])
    mod = GradedModule(ring, gens, factors=flat)
    mod.factor_pos = tuple(factor_pos)
    mod._pos_index = {p: i for i, p in enumerate(factor_pos)}
    return mod


def target_slots(target):
    return list(target.factors) if target.factors else [target]


def decompose_output(target, pos):
    return target.factor_pos[pos] if target.factors else (pos,)


def recompose_output(target, tup):
    if target.factors:
        return target._pos_index[tuple(tup)]
    (p,) = tup
    return p


class MultilinearMap:
    """Homogeneous multilinear map as sparse structure constants."""

    __slots__ = ("sources", "target", "degree", "entries", "_doc_shape")

    def __init__(self, sources, target, degree, entries, check=True):
        self.sources = tuple(sources)
        self.target = target
        self.degree = degree
        clean = {}
        ring = target.ring
        z = ring.zero()
        for ins, outs in entries.items():
            row = {}
            for out, c in outs.items():
                c = ring.canon(c)
                if c != z:
                    row[out] = c
            if row:
                clean[tuple(ins)] = row
        self.entries = clean
        if check:
            self._check_homogeneous()

    def _check_homogeneous(self):
        for ins, outs in self.entries.items():
            if len(ins) != len(self.sources):
                raise ShapeError("input arity mismatch")
            din = sum(self.sources[k].degrees[i] for k, i in enumerate(ins))
            for out in outs:
                if self.target.degrees[out] != din + self.degree:
                    raise ShapeError(
                        f"entry {ins}->{out} violates degree homogeneity "
                        f"(|out|={self.target.degrees[out]}, inputs+deg={din + self.degree})"
                    )

    @property
    def ring(self):
        return self.target.ring

    @property
    def arity(self):
        return len(self.sources)

    def apply_basis(self, ins):
        return self.entries.get(tuple(ins), {})

    def is_zero(self):
        return not self.entries

    def __eq__(self, other):
        return (
            isinstance(other, MultilinearMap)
            and [s.key for s in self.sources] == [s.key for s in other.sources]
            and self.target.key == other.target.key
            and self.degree == other.degree
            and self.entries == other.entries
        )

    def __hash__(self):
        return hash((self.target.key, self.degree, tuple(sorted(self.entries))))

    def __add__(self, other):
        self._same_shape(other)
        ring = self.ring
        entries = {k: dict(v) for k, v in self.entries.items()}
        for ins, outs in other.entries.items():
            row = entries.setdefault(ins, {})
            for out, c in outs.items():
                row[out] = ring.add(row.get(out, ring.zero()), c)
        return MultilinearMap(self.sources, self.target, self.degree, entries, check=False)

    def __sub__(self, other):
        return self + other.scale(self.ring.neg(self.ring.one()))

    def __neg__(self):
        return self.scale(self.ring.neg(self.ring.one()))

    def scale(self, c):
        ring = self.ring
        c = ring.canon(c)
        entries = {
            ins: {out: ring.mul(c, v) for out, v in outs.items()}
            for ins, outs in self.entries.items()
        }
        return MultilinearMap(self.sources, self.target, self.degree, entries, check=False)

    def _same_shape(self, other):
        if (
            [s.key for s in self.sources] != [s.key for s in other.sources]
            or self.target.key != other.target.key
            or self.degree != other.degree
        ):
            raise ShapeError("map shape mismatch")

    def __repr__(self):
        n = sum(len(v) for v in self.entries.values())
        return f"MultilinearMap(arity={self.arity}, degree={self.degree}, {n} entries)"


def zero_map(sources, target, degree):
    return MultilinearMap(sources, target, degree, {}, check=False)


def identity_map(mod):
    return MultilinearMap([mod], mod, 0, {(i,): {i: mod.ring.one()} for i in range(mod.rank)}, check=False)


def map_from_entries(sources, target, degree, triples):
    """triples: iterable of (input name tuple, output name, coeff)."""
    entries = {}
    for ins, out, c in triples:
        key = tuple(s.by_name[n] for s, n in zip(sources, ins))
        entries.setdefault(key, {})
        o = target.by_name[out]
        r = target.ring
        entries[key][o] = r.add(entries[key].get(o, r.zero()), r.canon(c))
    return MultilinearMap(sources, target, degree, entries)


def tensor_maps(maps):
    """Koszul tensor of maps; the canonical sign source for parallel maps.

    Unit-module factors in the result target are contracted away.
    """
    maps = list(maps)
    if not maps:
        raise ShapeError("empty tensor")
    ring = maps[0].ring
    sources = [s for m in maps for s in m.sources]
    slot_lists = [target_slots(m.target) for m in maps]
    tgt = tensor_module([s for slots in slot_lists for s in slots])
    total_degree = sum(m.degree for m in maps)
    # degree of everything after map j (for the Koszul exponent)
    suffix_deg = [0] * (len(maps) + 1)
    for j in range(len(maps) - 1, -1, -1):
        suffix_deg[j] = suffix_deg[j + 1] + maps[j].degree

    entries = {}

    def combine(i, ins_acc, outs_acc, coeff, sign_exp):
        if i == len(maps):
            sgn = ring.one() if sign_exp % 2 == 0 else ring.neg(ring.one())
            out_tuple = [p for part in outs_acc for p in part]
            if is_unit_module(tgt):
                out = 0
            else:
                # drop unit-module outputs (they contribute degree-0 "1"s)
                kept = []
                k = 0
                for slots in slot_lists:
                    for s in slots:
                        if not is_unit_module(s):
                            kept.append(out_tuple[k])
                        k += 1
                out = recompose_output(tgt, kept)
            key = tuple(ins_acc)
            row = entries.setdefault(key, {})
            row[out] = ring.add(row.get(out, ring.zero()), ring.mul(coeff, sgn))
            return
        m = maps[i]
        for ins, outs in m.entries.items():
            din = sum(m.sources[k].degrees[x] for k, x in enumerate(ins))
            for out, c in outs.items():
                combine(
                    i + 1,
                    ins_acc + list(ins),
                    outs_acc + [decompose_output(m.target, out)],
                    ring.mul(coeff, c),
                    sign_exp + din * suffix_deg[i + 1],
                )

    combine(0, [], [], ring.one(), 0)
    return MultilinearMap(sources, tgt, total_degree, entries, check=False)


def compose(outer, inner):
    """outer o inner, plugging inner's (tensor) output slots into outer.

    Alignment is up to flattening: a tensor-module source slot of `outer`
    absorbs the matching run of atomic output slots of `inner` (regrouping
    a tensor is sign-free).
    """
    inner_atoms = target_slots(inner.target)
    outer_groups = [(s, s.factors or [s]) for s in outer.sources]
    outer_atoms = [a for _, group in outer_groups for a in group]
    if [a.key for a in inner_atoms] != [a.key for a in outer_atoms]:
        raise ShapeError("compose: output slots do not align with outer sources")
    ring = outer.ring
    entries = {}
    simple = all(len(g) == 1 and not s.factors for s, g in outer_groups)
    for ins, outs in inner.entries.items():
        for mid, c in outs.items():
            mt = decompose_output(inner.target, mid)
            if not simple:
                regrouped = []
                k = 0
                for s, group in outer_groups:
                    take = mt[k : k + len(group)]
                    k += len(group)
                    regrouped.append(recompose_output(s, take) if s.factors else take[0])
                mt = tuple(regrouped)
            for out, c2 in outer.apply_basis(mt).items():
                row = entries.setdefault(ins, {})
                row[out] = ring.add(row.get(out, ring.zero()), ring.mul(c, c2))
    return MultilinearMap(inner.sources, outer.target, outer.degree + inner.degree, entries, check=False)


def plug(outer, inner_maps):
    """outer o (g_1 (x) ... (x) g_m) with Koszul signs from tensor_maps."""
    return compose(outer, tensor_maps(inner_maps))


def merge_slots(m, start, count):
    """Reinterpret `count` consecutive source slots as one tensor-module slot."""
    merged = tensor_module(list(m.sources[start : start + count]))
    sources = list(m.sources[:start]) + [merged] + list(m.sources[start + count :])
    entries = {}
    for ins, outs in m.entries.items():
        chunk = ins[start : start + count]
        kept = [i for s, i in zip(m.sources[start : start + count], chunk)]
        mid = recompose_output(merged, kept) if merged.factors else kept[0]
        key = ins[:start] + (mid,) + ins[start + count :]
        entries[key] = dict(outs)
    return MultilinearMap(sources, m.target, m.degree, entries, check=False)


def split_slot(m, slot):
    """Inverse of merge_slots: expand a tensor-module source slot."""
    mod = m.sources[slot]
    if not mod.factors:
        raise ShapeError("split_slot: slot is not a tensor module")
    sources = list(m.sources[:slot]) + list(mod.factors) + list(m.sources[slot + 1 :])
    entries = {}
    for ins, outs in m.entries.items():
        mid = decompose_output(mod, ins[slot])
        key = ins[:slot] + tuple(mid) + ins[slot + 1 :]
        entries[key] = dict(outs)
    return MultilinearMap(sources, m.target, m.degree, entries, check=False)


def twist(a_mod, b_mod):
    """tau: A (x) B -> B (x) A, a (x) b -> (-1)^{|a||b|} b (x) a."""
    tgt = tensor_module([b_mod, a_mod])
    ring = a_mod.ring
    one = ring.one()
    entries = {}
    for i, ga in enumerate(a_mod.gens):
        for j, gb in enumerate(b_mod.gens):
            c = one if (ga.degree * gb.degree) % 2 == 0 else ring.neg(one)
            if tgt.factors:
                out = recompose_output(tgt, (j, i))
            elif is_unit_module(a_mod) and not is_unit_module(b_mod):
                out = j
            elif is_unit_module(b_mod) and not is_unit_module(a_mod):
                out = i
            else:
                out = 0
            entries[(i, j)] = {out: c}
    return MultilinearMap([a_mod, b_mod], tgt, 0, entries, check=False)


def dual_module(mod):
    if is_unit_module(mod):
        return mod  # R is canonically self-dual
    gens = [Gen(g.name + "^", -g.degree, None) for g in mod.gens]
    return GradedModule(mod.ring, gens)


def strip_unit_source(m):
    """Reinterpret an arity-1 map from R as an arity-0 vector."""
    if m.arity != 1 or not is_unit_module(m.sources[0]):
        return m
    entries = {(): outs for ins, outs in m.entries.items()}
    return MultilinearMap([], m.target, m.degree, entries, check=False)


def ev_map(mod):
    """Evaluation pairing dual(M) (x) M -> R, positional dual basis pairing."""
    dm = dual_module(mod)
    tgt = unit_module(mod.ring)
    one = mod.ring.one()
    entries = {(i, i): {0: one} for i in range(mod.rank)}
    return MultilinearMap([dm, mod], tgt, 0, entries, check=False)


def coev_map(mod):
    """Casimir element R -> M (x) dual(M)."""
    dm = dual_module(mod)
    tgt = tensor_module([mod, dm])
    one = mod.ring.one()
    entries = {(): {}}
    for i in range(mod.rank):
        out = recompose_output(tgt, (i, i))
        entries[()][out] = one
    return MultilinearMap([], tgt, 0, entries, check=False)


def curry_last(phi):
    """phi: X_1 (x) ... (x) X_k (x) A -> R  ~>  X_1 (x) ... (x) X_{k-1} -> dual(A).

    Sign-free adjunction (consequence 2 of the fundamental conventions).
    """
    if not is_unit_module(phi.target):
        raise ShapeError("curry_last expects a scalar-valued map")
    if phi.arity == 0:
        raise ShapeError("curry_last needs at least one source")
    a_mod = phi.sources[-1]
    dm = dual_module(a_mod)
    entries = {}
    for ins, outs in phi.entries.items():
        c = outs.get(0)
        if c is None:
            continue
        key = ins[:-1]
        row = entries.setdefault(key, {})
        r = phi.ring
        row[ins[-1]] = r.add(row.get(ins[-1], r.zero()), c)
    return MultilinearMap(phi.sources[:-1], dm, phi.degree, entries, check=False)


def pair_with(m, a_mod):
    """m: X -> dual(A) becomes the scalar map X (x) A -> R (sign-free)."""
    if m.target.key != dual_module(a_mod).key:
        raise ShapeError("pair_with: target is not the dual of the given module")
    entries = {}
    for ins, outs in m.entries.items():
        for out, c in outs.items():
            entries[ins + (out,)] = {0: c}
    return MultilinearMap(
        list(m.sources) + [a_mod], unit_module(m.ring), m.degree, entries, check=False
    )


def dual_map(alpha):
    """alpha^v : dual(W) -> dual(V_1) (x) ... (x) dual(V_l).

    Defined by  ev(alpha^v (x) 1...) = ev(1 (x) alpha)  through the Koszul
    pairing of tensors; the resulting structure constants are
        <alpha^v(w^), v_1...v_l> = (-1)^{|alpha||w^|} <w^, alpha(v)>.
    """
    ring = alpha.ring
    duals = [dual_module(s) for s in alpha.sources]
    tgt = tensor_module(duals) if duals else unit_module(ring)
    entries = {}
    for ins, outs in alpha.entries.items():
        degs = [s.degrees[i] for s, i in zip(alpha.sources, ins)]
        # Koszul pairing of the dual tensor basis against the input tuple
        eps = 0
        for i in range(len(degs)):
            for j in range(i + 1, len(degs)):
                eps += degs[i] * degs[j]
        for out, c in outs.items():
            wdeg = alpha.target.degrees[out]
            sgn = eps + alpha.degree * wdeg  # |w^| = -|w|, same parity
            cc = c if sgn % 2 == 0 else ring.neg(c)
            key = (out,)
            row = entries.setdefault(key, {})
            if duals:
                o = recompose_output(tgt, tuple(ins)) if tgt.factors else ins[0]
            else:
                o = 0
            row[o] = ring.add(row.get(o, ring.zero()), cc)
    return MultilinearMap([dual_module(alpha.target)], tgt, alpha.degree, entries, check=False)


def iota_map(mod):
    """Canonical map A -> A^vv, engine-derived as curry of ev o tau."""
    dm = dual_module(mod)
    return curry_last(compose(ev_map(mod), twist(mod, dm)))


def tensor_dual_iso(mods):
    """dual(V_1) (x) ... (x) dual(V_l) -> dual(V_1 (x) ... (x) V_l).

    Built from the l-fold Koszul pairing by currying (engine-derived signs).
    """
    l = len(mods)
    if l == 0:
        raise ShapeError("tensor_dual_iso of no factors")
    duals = [dual_module(m) for m in mods]
    # pairing d1..dl v1..vl -> R: permute to d1 v1 d2 v2 ... then evaluate
    order = list(range(2 * l))
    desired = []
    for i in range(l):
        desired += [i, l + i]
    perm = permutation_map(duals + mods, order, desired)
    evs = tensor_maps([ev_map(m) for m in mods])
    paired = compose(evs, perm) if perm is not None else evs
    # curry away the primal slots as one merged tensor slot
    merged = merge_slots(paired, l, l)
    return curry_last(merged)


def permutation_map(mods, cur_order, des_order):
    """Composite of adjacent twists realizing a permutation of tensor slots.

    `mods` lists the module in each slot of the *current* arrangement's
    identity positions; orders are permutations of range(len(mods)).
    Returns None for the identity permutation.
    """
    work = list(cur_order)
    mods_now = [mods[i] for i in work]
    acc = None
    while work != list(des_order):
        k = next(i for i in range(len(work)) if work[i] != des_order[i])
        j = work.index(des_order[k])
        while j > k:
            parts = []
            for t in range(len(work)):
                if t == j - 1:
                    parts.append(twist(mods_now[j - 1], mods_now[j]))
                elif t == j:
                    continue
                else:
                    parts.append(identity_map(mods_now[t]))
            step = tensor_maps(parts)
            acc = step if acc is None else compose(step, acc)
            work[j - 1], work[j] = work[j], work[j - 1]
            mods_now[j - 1], mods_now[j] = mods_now[j], mods_now[j - 1]
            j -= 1
    return acc


# ---------------------------------------------------------------------------
# chain complexes


class ChainComplex:
    """GradedModule with a degree -1 differential squaring to zero."""

    def __init__(self, module, differential, check=True):
        self.module = module
        self.differential = differential
        if check:
            if differential.arity != 1 or differential.degree != -1:
                raise ShapeError("differential must be a degree -1 endomap")
            if differential.sources[0].key != module.key or differential.target.key != module.key:
                raise ShapeError("differential must act on the underlying module")
            dd = compose(differential, differential)
            if not dd.is_zero():
                raise NotChainMap("differential does not square to zero")

    @property
    def ring(self):
        return self.module.ring

    def mat(self, d):
        """Matrix of the differential C_d -> C_{d-1} in the chosen bases."""
        src = self.module.positions_of_degree(d)
        tgt = self.module.positions_of_degree(d - 1)
        tgt_index = {p: i for i, p in enumerate(tgt)}
        ring = self.ring
        z = ring.zero()
        data = [[z] * len(src) for _ in range(len(tgt))]
        for j, p in enumerate(src):
            for out, c in self.differential.apply_basis((p,)).items():
                data[tgt_index[out]][j] = c
        return Matrix(ring, data)

    def __repr__(self):
        return f"ChainComplex({self.module!r})"


def zero_complex(ring, gens):
    mod = GradedModule(ring, gens)
    return ChainComplex(mod, zero_map([mod], mod, -1), check=False)


def level_nonincreasing(m):
    """Entrywise filtration check: level(out) <= sum of input levels."""
    for ins, outs in m.entries.items():
        lv = 0
        ok = True
        for s, i in zip(m.sources, ins):
            l = s.gens[i].level
            if l is None:
                ok = False
                break
            lv += l
        if not ok:
            continue
        for out in outs:
            lo = m.target.gens[out].level
            if lo is not None and lo > lv:
                return False
    return True


def tensor_differential(complexes):
    """The differential of C_1 (x) ... (x) C_l as a map into the tensor module."""
    mods = [c.module for c in complexes]
    terms = []
    for i, c in enumerate(complexes):
        parts = [identity_map(m) for m in mods]
        parts[i] = c.differential
        terms.append(tensor_maps(parts))
    acc = terms[0]
    for t in terms[1:]:
        acc = acc + t
    return acc


def commutator(sources, target, alpha):
    """[d, alpha] = d_target o alpha - (-1)^{|alpha|} alpha o d_tensor."""
    if len(sources) != alpha.arity:
        raise ShapeError("commutator: source complex count mismatch")
    for c, s in zip(sources, alpha.sources):
        if c.module.key != s.key:
            raise ShapeError("commutator: source complex mismatch")
    if target.module.key != alpha.target.key:
        raise ShapeError("commutator: target complex mismatch")
    left = compose(target.differential, alpha)
    if alpha.arity == 0:
        return left
    terms = []
    for i in range(alpha.arity):
        parts = [identity_map(s) for s in alpha.sources]
        parts[i] = sources[i].differential
        terms.append(compose(alpha, tensor_maps(parts)))
    right = terms[0]
    for t in terms[1:]:
        right = right + t
    if alpha.degree % 2 == 0:
        return left - right
    return left + right


def is_chain_map(sources, target, alpha):
    return commutator(sources, target, alpha).is_zero()


def dual_complex(c):
    """Dual complex with the 2bis sign: d f = -(-1)^{|f|} f o d."""
    dm = dual_module(c.module)
    dd = -dual_map(c.differential)
    return ChainComplex(dm, MultilinearMap([dm], dm, -1, dd.entries, check=False))


def evaluation(c):
    """ev: dual(C) (x) C -> R as a chain map (checked by callers/tests)."""
    return ev_map(c.module)


def hom_complex(a, b):
    """Hom(A, B) with differential [d, -]; generators are elementary maps."""
    ring = a.ring
    gens = []
    pairs = []
    for j, gb in enumerate(b.module.gens):
        for i, ga in enumerate(a.module.gens):
            gens.append(Gen(f"[{ga.name}=>{gb.name}]", gb.degree - ga.degree, None))
            pairs.append((j, i))
    mod = GradedModule(ring, gens)
    index = {p: k for k, p in enumerate(pairs)}
    entries = {}
    for k, (j, i) in enumerate(pairs):
        row = {}
        deg = mod.degrees[k]
        for out, cc in b.differential.apply_basis((j,)).items():
            t = index[(out, i)]
            row[t] = ring.add(row.get(t, ring.zero()), cc)
        sgn = 1 if deg % 2 == 0 else -1
        for ii in range(a.module.rank):
            cc = a.differential.apply_basis((ii,)).get(i)
            if cc is not None:
                t = index[(j, ii)]
                v = ring.mul(ring.canon(-sgn), cc)
                row[t] = ring.add(row.get(t, ring.zero()), v)
        entries[(k,)] = row
    diff = MultilinearMap([mod], mod, -1, entries, check=False)
    cx = ChainComplex(mod, diff)
    cx.hom_pairs = tuple(pairs)
    cx.hom_source = a
    cx.hom_target = b
    return cx


def map_to_hom_chain(hom_cx, f):
    """A linear map A -> B as a chain (dict pos -> coeff) in Hom(A, B)."""
    index = {p: k for k, p in enumerate(hom_cx.hom_pairs)}
    chain = {}
    for (i,), outs in f.entries.items():
        for j, c in outs.items():
            chain[index[(j, i)]] = c
    return chain


def hom_chain_to_map(hom_cx, chain):
    a = hom_cx.hom_source.module
    b = hom_cx.hom_target.module
    entries = {}
    deg = None
    for k, c in chain.items():
        j, i = hom_cx.hom_pairs[k]
        entries.setdefault((i,), {})[j] = c
        d = b.degrees[j] - a.degrees[i]
        deg = d if deg is None else deg
        if d != deg:
            raise ShapeError("hom chain is not homogeneous")
    return MultilinearMap([a], b, deg if deg is not None else 0, entries)


# ---------------------------------------------------------------------------
# homology


class HomologyPresentation:
    """Per-degree cycles, boundaries, chosen representatives, projection.

    Over a field H_d is a vector space with `dim(d)` chosen representative
    cycles; over Z the presentation records invariant factors (0 = free
    summand) and projection reduces coordinates modulo torsion.
    """

    def __init__(self, complex_):
        self.complex = complex_
        self.ring = complex_.ring
        self.data = {}
        degs = set(complex_.module.support())
        degs |= {d + 1 for d in list(degs)} | {d - 1 for d in list(degs)}
        for d in sorted(degs):
            self._compute_degree(d)

    def _compute_degree(self, d):
        c = self.complex
        ring = self.ring
        pos = c.module.positions_of_degree(d)
        if not pos:
            return
        md = c.mat(d)
        md1 = c.mat(d + 1)
        zmat = kernel_basis(md) if md.rows else Matrix.identity(ring, len(pos))
        if ring.is_field:
            # boundaries expressed in ambient coordinates
            bcols = []
            bm = md1
            for j in range(bm.cols):
                col = bm.take_cols([j])
                if not col.is_zero():
                    bcols.append([col.entry(i, 0) for i in range(col.rows)])
            bmat = (
                Matrix(ring, [[bc[i] for bc in bcols] for i in range(len(pos))])
                if bcols
                else Matrix.zeros(ring, len(pos), 0)
            )
            bbasis, _ = image_basis_cols(bmat)
            reps = []
            cur = bbasis
            for j in range(zmat.cols):
                col = zmat.take_cols([j])
                trial = cur.hstack(col)
                if rank(trial) > rank(cur):
                    reps.append(col)
                    cur = trial
            repmat = _hstack_all(ring, reps, len(pos))
            self.data[d] = {
                "positions": pos,
                "cycles": zmat,
                "boundaries": bbasis,
                "reps": repmat,
                "factors": [0] * repmat.cols,
            }
        else:
            k = zmat  # kernel lattice basis (saturated, via SNF)
            if md1.cols and k.cols:
                bcoords = solve(k, md1)
            else:
                bcoords = Matrix.zeros(ring, k.cols, md1.cols if md1.rows else 0)
            u, dd, v = smith_normal_form(bcoords)
            n = min(dd.rows, dd.cols)
            uinv = _integer_inverse(u)
            factors = []
            repcols = []
            for i in range(k.cols):
                di = dd.entry(i, i) if i < n else 0
                if di == 1:
                    continue
                factors.append(di)
                repcols.append(i)
            reps = (k * uinv).take_cols(repcols) if repcols else Matrix.zeros(ring, len(pos), 0)
            self.data[d] = {
                "positions": pos,
                "cycles": k,
                "boundaries": md1,
                "reps": reps,
                "factors": factors,
                "u": u,
                "snf_diag": [dd.entry(i, i) if i < n else 0 for i in range(k.cols)],
                "rep_indices": repcols,
            }

    def degrees(self):
        return sorted(self.data)

    def dim(self, d):
        entry = self.data.get(d)
        return entry["reps"].cols if entry else 0

    def factors_at(self, d):
        entry = self.data.get(d)
        return list(entry["factors"]) if entry else []

    def rep_chain(self, d, k):
        entry = self.data[d]
        reps = entry["reps"]
        return {
            p: reps.entry(i, k)
            for i, p in enumerate(entry["positions"])
            if reps.entry(i, k) != self.ring.zero()
        }

    def chain_column(self, d, chain):
        entry = self.data.get(d)
        if entry is None:
            if chain:
                raise ShapeError("chain in empty degree")
            return None
        col = [self.ring.zero()] * len(entry["positions"])
        index = {p: i for i, p in enumerate(entry["positions"])}
        for p, c in chain.items():
            col[index[p]] = c
        return Matrix.column(self.ring, col)

    def project_chain(self, d, chain):
        """Coordinates of a cycle's class; requires the chain to be a cycle."""
        entry = self.data.get(d)
        if entry is None:
            return ()
        col = self.chain_column(d, chain)
        ring = self.ring
        if ring.is_field:
            b, reps = entry["boundaries"], entry["reps"]
            if b.cols + reps.cols == 0:
                if not col.is_zero():
                    raise ShapeError("nonzero chain in zero homology degree")
                return ()
            sol = solve(b.hstack(reps), col)
            return tuple(sol.entry(b.cols + i, 0) for i in range(reps.cols))
        k = entry["cycles"]
        coords = solve(k, col)
        y = entry["u"] * coords
        out = []
        for idx, i in enumerate(entry["rep_indices"]):
            di = entry["factors"][idx]
            v = y.entry(i, 0)
            out.append(v % di if di else v)
        return tuple(out)

    def class_of(self, d, chain):
        return self.project_chain(d, chain)


def image_basis_cols(m):
    from .exactalg import image_basis

    return image_basis(m)


def _hstack_all(ring, cols, rows):
    if not cols:
        return Matrix.zeros(ring, rows, 0)
    acc = cols[0]
    for c in cols[1:]:
        acc = acc.hstack(c)
    return acc


def _integer_inverse(u):
    """Exact inverse of a unimodular integer matrix (rational elimination)."""
    from fractions import Fraction

    n = u.rows
    a = [[Fraction(u.entry(i, j)) for j in range(n)] + [Fraction(1 if k == i else 0) for k in range(n)] for i in range(n)]
    for c in range(n):
        piv = next(i for i in range(c, n) if a[i][c] != 0)
        a[c], a[piv] = a[piv], a[c]
        f = a[c][c]
        a[c] = [x / f for x in a[c]]
        for i in range(n):
            if i != c and a[i][c] != 0:
                g = a[i][c]
                a[i] = [x - g * y for x, y in zip(a[i], a[c])]
    data = [[int(a[i][n + j]) for j in range(n)] for i in range(n)]
    return Matrix(u.ring, data)


def homology(c):
    return HomologyPresentation(c)


def apply1(m, chain):
    """Apply an arity-1 map to a chain given as {position: coeff}."""
    ring = m.ring
    out = {}
    for p, c in chain.items():
        for q, c2 in m.apply_basis((p,)).items():
            v = ring.add(out.get(q, ring.zero()), ring.mul(c, c2))
            if v == ring.zero():
                out.pop(q, None)
            else:
                out[q] = v
    return out


def induced_map_on_homology(f, source_cx, target_cx, h_source=None, h_target=None):
    """Matrix data of H(f) per degree; raises NotChainMap if [d, f] != 0."""
    if not is_chain_map([source_cx], target_cx, f):
        raise NotChainMap("map does not commute with the differentials")
    hs = h_source or homology(source_cx)
    ht = h_target or homology(target_cx)
    out = {}
    for d in hs.degrees():
        n = hs.dim(d)
        if n == 0:
            continue
        cols = []
        for k in range(n):
            img = apply1(f, hs.rep_chain(d, k))
            cols.append(ht.project_chain(d + f.degree, img))
        out[d] = cols
    return out, hs, ht
