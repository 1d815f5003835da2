"""Mapping cones, their long exact sequences, filtered truncations.

Cone(c) for a degree-0 chain map c: M -> A is A (+) M[-1] with differential
d(a, xbar) = (da + c(x), -(dx)bar).  Generators are disambiguated with
"A:" / "M̄:" prefixes; the M-part generators live at their shifted degree.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .exactalg import Matrix, rank, solve
from .graded import (
    ChainComplex,
    Gen,
    GradedModule,
    MultilinearMap,
    NotChainMap,
    ShapeError,
    apply1,
    commutator,
    compose,
    homology,
    induced_map_on_homology,
    is_chain_map,
    level_nonincreasing,
    zero_map,
)
from .shifts import shift_complex

M_PREFIX = "M̄:"
A_PREFIX = "A:"


class WrongDegree(Exception):
    pass


class FiltrationViolated(Exception):
    pass


@dataclass
class Cone:
    base: ChainComplex          # A
    fiber: ChainComplex         # M
    map_c: MultilinearMap       # c: M -> A, degree 0
    fiber_shift: ChainComplex   # M[-1]
    total: ChainComplex
    incl: MultilinearMap        # A -> Cone
    proj: MultilinearMap        # Cone -> M[-1]
    pr_base: MultilinearMap     # Cone -> A (module projection, not a chain map)
    incl_fiber: MultilinearMap  # M[-1] -> Cone (module inclusion)
    omega_fiber: MultilinearMap  # M[-1] -> M unshift witness
    s_fiber: MultilinearMap      # M -> M[-1]


def build_cone(c, fiber, base):
    """Assemble Cone(c); raises NotChainMap / WrongDegree on bad input."""
    if c.degree != 0:
        raise WrongDegree(f"cone map must have degree 0, got {c.degree}")
    if c.arity != 1 or c.sources[0].key != fiber.module.key or c.target.key != base.module.key:
        raise ShapeError("cone map must be a linear map M -> A")
    if not is_chain_map([fiber], base, c):
        raise NotChainMap("cone map does not commute with the differentials")

    mshift, s_f, w_f = shift_complex(fiber, -1)
    ring = base.ring
    # the M-part sits at shifted degree |x| + 1
    gens = [Gen(A_PREFIX + g.name, g.degree, g.level) for g in base.module.gens] + [
        Gen(M_PREFIX + g.name, g.degree + 1, g.level) for g in fiber.module.gens
    ]
    mod = GradedModule(ring, gens)
    na = base.module.rank

    one = ring.one()
    incl = MultilinearMap([base.module], mod, 0, {(i,): {i: one} for i in range(na)}, check=False)
    pr_base = MultilinearMap([mod], base.module, 0, {(i,): {i: one} for i in range(na)}, check=False)
    incl_fiber = MultilinearMap(
        [mshift.module], mod, 0, {(i,): {na + i: one} for i in range(fiber.module.rank)}, check=False
    )
    proj = MultilinearMap(
        [mod], mshift.module, 0, {(na + i,): {i: one} for i in range(fiber.module.rank)}, check=False
    )

    # d_cone = incl o d_A o pr + incl o c o omega o proj + incl_fiber o d_{M[-1]} o proj
    d = compose(incl, compose(base.differential, pr_base))
    d = d + compose(incl, compose(c, compose(w_f, proj)))
    d = d + compose(incl_fiber, compose(mshift.differential, proj))
    total = ChainComplex(mod, d)

    return Cone(
        base=base,
        fiber=fiber,
        map_c=c,
        fiber_shift=mshift,
        total=total,
        incl=incl,
        proj=proj,
        pr_base=pr_base,
        incl_fiber=incl_fiber,
        omega_fiber=w_f,
        s_fiber=s_f,
    )


def cone_element(cone, a_chain, xbar_chain):
    """Chain in the cone from an A-chain and an M[-1]-chain (by positions)."""
    out = {}
    na = cone.base.module.rank
    for p, v in a_chain.items():
        out[p] = v
    for p, v in xbar_chain.items():
        out[na + p] = v
    return out


def split_cone_chain(cone, chain):
    na = cone.base.module.rank
    a = {p: v for p, v in chain.items() if p < na}
    x = {p - na: v for p, v in chain.items() if p >= na}
    return a, x


@dataclass
class ConeClassSplitData:
    """Homology of M, A, Cone(c) with the two maps of the short exact sequence

        0 -> coker c_* -> H(Cone(c)) -> ker c_{*-1} -> 0

    and explicit bases.  Over a field, exactness is certified by the rank
    identity per degree; the connecting data keeps representative chains.
    """

    cone: Cone
    h_fiber: object
    h_base: object
    h_total: object
    c_star: dict               # degree -> matrix columns (coords in H(A))
    coker_reps: dict           # degree -> list of H(A) coordinate tuples
    ker_reps: dict             # degree -> list of H(M) coordinate tuples
    incl_star: dict            # degree -> image of coker reps in H(Cone)
    proj_star: dict            # degree -> matrix of H(Cone) -> ker c_{*-1}
    exact: bool = True
    failures: list = field(default_factory=list)


def les_data(cone):
    hm = homology(cone.fiber)
    ha = homology(cone.base)
    ht = homology(cone.total)
    ring = cone.total.ring
    c_star, _, _ = induced_map_on_homology(cone.map_c, cone.fiber, cone.base, hm, ha)

    coker_reps = {}
    ker_reps = {}
    c_cols = {}
    failures = []
    for d in set(hm.degrees()) | set(ha.degrees()):
        nm, na = hm.dim(d), ha.dim(d)
        cols = c_star.get(d, [])
        cmat = Matrix(
            ring, [[cols[j][i] for j in range(len(cols))] for i in range(na)], cols=len(cols)
        )
        c_cols[d] = cmat
        # ker c_* basis (coordinates in H_d(M))
        from .exactalg import kernel_basis

        kmat = kernel_basis(cmat) if nm else Matrix.zeros(ring, 0, 0)
        ker_reps[d] = [tuple(kmat.entry(i, j) for i in range(kmat.rows)) for j in range(kmat.cols)]
        # coker c_*: classes of H_d(A) mod im c_*: choose complement greedily
        img, _ = _image(cmat)
        chosen = []
        cur = img
        eye = Matrix.identity(ring, na)
        for j in range(na):
            col = eye.take_cols([j])
            trial = cur.hstack(col)
            if rank(trial) > rank(cur):
                chosen.append(tuple(col.entry(i, 0) for i in range(na)))
                cur = trial
        coker_reps[d] = chosen

    incl_star = {}
    proj_star = {}
    for d in sorted(set(list(ht.degrees()) + list(hm.degrees()) + list(ha.degrees()))):
        # map coker reps into H(Cone) through the inclusion
        ims = []
        for rep in coker_reps.get(d, []):
            chain = {}
            for k, coef in enumerate(rep):
                if coef != ring.zero():
                    for p, v in ha.rep_chain(d, k).items():
                        chain[p] = ring.add(chain.get(p, ring.zero()), ring.mul(coef, v))
            img_chain = apply1(cone.incl, chain)
            ims.append(ht.project_chain(d, img_chain))
        incl_star[d] = ims
        # projection H_d(Cone) -> ker c_{d-1}: drop to the M[-1]-part
        cols = []
        for k in range(ht.dim(d)):
            chain = ht.rep_chain(d, k)
            xbar = apply1(cone.proj, chain)
            x = apply1(cone.omega_fiber, xbar)
            cols.append(hm.project_chain(d - 1, x))
        proj_star[d] = cols

    data = ConeClassSplitData(
        cone=cone,
        h_fiber=hm,
        h_base=ha,
        h_total=ht,
        c_star=c_star,
        coker_reps=coker_reps,
        ker_reps=ker_reps,
        incl_star=incl_star,
        proj_star=proj_star,
    )

    if ring.is_field:
        for d in sorted(set(list(ht.degrees()) + [0])):
            n_coker = len(coker_reps.get(d, []))
            n_ker = len(ker_reps.get(d - 1, []))
            if ht.dim(d) != n_coker + n_ker:
                failures.append(
                    {"degree": d, "dim_cone": ht.dim(d), "coker": n_coker, "ker_shift": n_ker}
                )
        data.exact = not failures
        data.failures = failures
    return data


def _image(m):
    from .exactalg import image_basis

    if m.cols == 0:
        return Matrix.zeros(m.ring, m.rows, 0), None
    return image_basis(m)


def truncate_filtered(cone, a, b):
    """Subquotient Cone^{(a,b]} spanned by generators with level in (a, b]."""
    mod = cone.total.module
    if not mod.has_levels():
        raise FiltrationViolated("cone generators carry no filtration levels")
    if not level_nonincreasing(cone.total.differential):
        raise FiltrationViolated("differential raises filtration level")
    keep = [i for i, g in enumerate(mod.gens) if a < g.level <= b]
    index = {p: i for i, p in enumerate(keep)}
    gens = [mod.gens[p] for p in keep]
    sub = GradedModule(mod.ring, gens)
    entries = {}
    for i, p in enumerate(keep):
        row = {}
        for q, c in cone.total.differential.apply_basis((p,)).items():
            if q in index:
                row[index[q]] = c
        if row:
            entries[(i,)] = row
    d = MultilinearMap([sub], sub, -1, entries, check=False)
    return ChainComplex(sub, d)


def product_respects_filtration(cone, m):
    """Entrywise check of m(Cone^{<=a} (x) Cone^{<=b}) within Cone^{<=a+b}."""
    mod = cone.total.module
    bad = []
    for (i, j), outs in m.entries.items():
        li, lj = mod.gens[i].level, mod.gens[j].level
        if li is None or lj is None:
            continue
        for q in outs:
            lq = mod.gens[q].level
            if lq is not None and lq > li + lj:
                bad.append({"inputs": (mod.gens[i].name, mod.gens[j].name), "output": mod.gens[q].name})
    return bad
