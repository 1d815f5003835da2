"""Seeded random instances: complexes, chain maps, A2-triples, retracts.

Every constraint in sight (chain map, the seven triple relations, the five
A2+ conditions) is linear in the next unknown given its predecessors, so
instances are produced by exact linear sampling, resampling only when an
inhomogeneous solve is obstructed.  The resampling budget is bounded (env
CONEALG_RESAMPLE_BUDGET, default 64) and exhaustion raises
GenerationExhausted with obstruction statistics.
"""

from __future__ import annotations

import os

from .a2 import A2TripleData, HomotopyRetractTriple, a2_triple_from_a_infinity_triple
from .cones import build_cone
from .exactalg import Matrix, rank, solve
from .graded import (
    ChainComplex,
    Gen,
    GradedModule,
    MultilinearMap,
    commutator,
    compose,
    identity_map,
    zero_map,
)
from .mapsolve import MapEquation, entry_slots
from .shifts import shift_complex


class GenerationExhausted(Exception):
    def __init__(self, message, stats=None):
        super().__init__(message)
        self.stats = stats or {}


def resample_budget():
    try:
        return max(1, int(os.environ.get("CONEALG_RESAMPLE_BUDGET", "64")))
    except ValueError:
        return 64


def rand_complex(rng, ring, shape, prefix="e", pair_bias=0.6, conjugate=True):
    """Random chain complex: acyclic pairs in a fixed basis, conjugated by a
    random degree-0 automorphism so the matrices are dense but d*d = 0 exactly."""
    gens = []
    for d in sorted(shape):
        for i in range(shape[d]):
            gens.append(Gen(f"{prefix}{d}_{i}", d, None))
    mod = GradedModule(ring, gens)
    by_deg = {d: mod.positions_of_degree(d) for d in sorted(shape)}
    entries = {}
    used = set()
    for d in sorted(shape):
        lower = by_deg.get(d - 1, [])
        for p in by_deg[d]:
            free = [q for q in lower if q not in used]
            if free and rng.random() < pair_bias:
                q = rng.choice(free)
                used.add(q)
                used.add(p)
                entries[(p,)] = {q: ring.one()}
    diff = MultilinearMap([mod], mod, -1, entries, check=False)
    cx = ChainComplex(mod, diff)
    if not conjugate:
        return cx
    return conjugate_complex(rng, cx)


def conjugate_complex(rng, cx):
    ring = cx.ring
    mod = cx.module
    g_entries = {}
    ginv_entries = {}
    for d in set(mod.degrees):
        pos = mod.positions_of_degree(d)
        n = len(pos)
        while True:
            m = Matrix(ring, [[ring.canon(rng.randrange(-2, 3)) for _ in range(n)] for _ in range(n)])
            if rank(m) == n:
                break
        minv = solve(m, Matrix.identity(ring, n))
        for j, p in enumerate(pos):
            g_entries[(p,)] = {
                pos[i]: m.entry(i, j) for i in range(n) if m.entry(i, j) != ring.zero()
            }
            ginv_entries[(p,)] = {
                pos[i]: minv.entry(i, j) for i in range(n) if minv.entry(i, j) != ring.zero()
            }
    g = MultilinearMap([mod], mod, 0, g_entries, check=False)
    ginv = MultilinearMap([mod], mod, 0, ginv_entries, check=False)
    return ChainComplex(mod, compose(g, compose(cx.differential, ginv)))


def rand_chain_map(rng, sources, target, degree=0, allowed=None):
    """Random exact solution of [d, X] = 0 in the given map shape."""
    mods = [c.module for c in sources]
    rhs = zero_map(mods, target.module, degree - 1)
    eq = MapEquation(
        lambda x: commutator(sources, target, x), mods, target.module, degree, rhs, allowed=allowed
    )
    return eq.sample(rng)


def rand_multilinear(rng, sources, target, degree, density=0.5):
    """Unconstrained sparse random homogeneous map (for engine tests)."""
    slots = entry_slots(sources, target, degree)
    ring = target.ring
    entries = {}
    for ins, o in slots:
        if rng.random() < density:
            c = _coeff(rng, ring)
            if c != ring.zero():
                entries.setdefault(ins, {})[o] = c
    return MultilinearMap(sources, target, degree, entries, check=False)


def _coeff(rng, ring):
    if ring.kind == "prime_field":
        return rng.randrange(1, ring.p)
    return ring.canon(rng.choice([-2, -1, 1, 2, 3]))


def rand_a2_triple_via_cone(rng, ring, fiber_shape=None, base_shape=None, prefix=""):
    """Valid A2-triple from a random arity-2 cone structure.

    Sample c among chain maps, then a chain map mu^2 on Cone(c)[-1] whose
    base-only inputs stay in the base (the subalgebra condition); the shift
    recipe then yields the septuple, valid by construction.
    """
    fiber_shape = fiber_shape or {0: 1, 1: 2}
    base_shape = base_shape or {0: 2, 1: 1}
    m = rand_complex(rng, ring, fiber_shape, prefix + "m")
    a = rand_complex(rng, ring, base_shape, prefix + "a")
    c = rand_chain_map(rng, [m], a)
    cone = build_cone(c, m, a)
    shifted, _, _ = shift_complex(cone.total, -1)
    na = a.module.rank

    def allowed(ins, o):
        return not (ins[0] < na and ins[1] < na and o >= na)

    mu2 = rand_chain_map(rng, [shifted, shifted], shifted, degree=-1, allowed=allowed)
    return a2_triple_from_a_infinity_triple(cone, mu2)


def rand_a2_triple_sequential(rng, ring, fiber_shape=None, base_shape=None, budget=None):
    """The design-decision generator: sample d, c, mu, m_L, m_R among chain
    maps, then solve the tau_L / tau_R / sigma / beta relations in order,
    resampling when a right-hand side fails to be a boundary."""
    budget = budget or resample_budget()
    fiber_shape = fiber_shape or {0: 1, 1: 2}
    base_shape = base_shape or {0: 2, 1: 1}
    stats = {"tau": 0, "sigma": 0, "beta": 0}
    from .graded import identity_map as idm_f
    from .graded import plug

    for _ in range(budget):
        m = rand_complex(rng, ring, fiber_shape, "m")
        a = rand_complex(rng, ring, base_shape, "a")
        c = rand_chain_map(rng, [m], a)
        mu = rand_chain_map(rng, [a, a], a)
        m_l = rand_chain_map(rng, [a, m], m)
        m_r = rand_chain_map(rng, [m, a], m)
        ida, idm = idm_f(a.module), idm_f(m.module)

        eq = MapEquation(
            lambda x: commutator([m, a], a, x),
            [m.module, a.module],
            a.module,
            1,
            plug(mu, [c, ida]) - compose(c, m_r),
        )
        tau_l = eq.sample(rng)
        eq = MapEquation(
            lambda x: commutator([a, m], a, x),
            [a.module, m.module],
            a.module,
            1,
            plug(mu, [ida, c]) - compose(c, m_l),
        )
        tau_r = eq.sample(rng)
        if tau_l is None or tau_r is None:
            stats["tau"] += 1
            continue
        eq = MapEquation(
            lambda x: commutator([m, m], m, x),
            [m.module, m.module],
            m.module,
            1,
            plug(m_r, [idm, c]) - plug(m_l, [c, idm]),
        )
        sigma = eq.sample(rng)
        if sigma is None:
            stats["sigma"] += 1
            continue
        eq = MapEquation(
            lambda x: commutator([m, m], a, x),
            [m.module, m.module],
            a.module,
            2,
            -compose(c, sigma) + plug(tau_r, [c, idm]) - plug(tau_l, [idm, c]),
        )
        beta = eq.sample(rng)
        if beta is None:
            stats["beta"] += 1
            continue
        return A2TripleData(m, a, c, mu, m_l, m_r, tau_l, tau_r, sigma, beta)
    raise GenerationExhausted("a2 triple sampling budget exhausted", stats)


def kill_pair_retraction(rng, cx):
    """Gaussian-elimination retract: pick a unit entry of d, return
    (C', p, i, h) with p i = 1 and [d, h] = 1 - i p.  None if d = 0."""
    ring = cx.ring
    mod = cx.module
    candidates = []
    for (e,), outs in cx.differential.entries.items():
        for f, lam in outs.items():
            if ring.is_unit(lam):
                candidates.append((e, f, lam))
    if not candidates:
        return None
    e, f, lam = candidates[rng.randrange(len(candidates))]
    lam_inv = ring.inv(lam)
    keep = [p for p in range(mod.rank) if p not in (e, f)]
    back = {p: i for i, p in enumerate(keep)}
    sub = GradedModule(ring, [mod.gens[p] for p in keep])

    rho = {q: v for q, v in cx.differential.apply_basis((e,)).items() if q != f}
    p_entries = {}
    for q, v in rho.items():
        p_entries.setdefault((f,), {})[back[q]] = ring.neg(ring.mul(lam_inv, v))
    for p in keep:
        p_entries[(p,)] = {back[p]: ring.one()}
    p_map = MultilinearMap([mod], sub, 0, p_entries, check=False)

    i_entries = {}
    for p in keep:
        row = {p: ring.one()}
        alpha = cx.differential.apply_basis((p,)).get(f)
        if alpha is not None:
            row[e] = ring.neg(ring.mul(lam_inv, alpha))
        i_entries[(back[p],)] = row
    i_map = MultilinearMap([sub], mod, 0, i_entries, check=False)

    h_map = MultilinearMap([mod], mod, 1, {(f,): {e: lam_inv}}, check=False)

    d_sub = compose(p_map, compose(cx.differential, i_map))
    sub_cx = ChainComplex(sub, d_sub)
    return sub_cx, p_map, i_map, h_map


def rand_retract(rng, triple, where=None):
    """Acyclic-pair-killing retract of the triple's cone, in the base or the
    fiber; returns a HomotopyRetractTriple (None if no unit entry exists)."""
    m, a, c = triple.fiber, triple.base, triple.c
    choices = []
    if kill_pair_retraction(rng, a) is not None:
        choices.append("base")
    if kill_pair_retraction(rng, m) is not None:
        choices.append("fiber")
    if where is None:
        if not choices:
            return None
        where = rng.choice(choices)
    if where == "base":
        red = kill_pair_retraction(rng, a)
        if red is None:
            return None
        a2, p, i, h = red
        return HomotopyRetractTriple(
            src=triple,
            src_fiber=m,
            src_base=a,
            src_c=c,
            dst_fiber=m,
            dst_base=a2,
            dst_c=compose(p, c),
            p=p,
            i=i,
            h=h,
            pi=identity_map(m.module),
            iota=identity_map(m.module),
            chi=zero_map([m.module], m.module, 1),
            kappa=zero_map([m.module], a2.module, 1),
            eta=-compose(h, c),
            a_map=zero_map([m.module], a.module, 2),
        )
    red = kill_pair_retraction(rng, m)
    if red is None:
        return None
    m2, pi, iota, chi = red
    return HomotopyRetractTriple(
        src=triple,
        src_fiber=m,
        src_base=a,
        src_c=c,
        dst_fiber=m2,
        dst_base=a,
        dst_c=compose(c, iota),
        p=identity_map(a.module),
        i=identity_map(a.module),
        h=zero_map([a.module], a.module, 1),
        pi=pi,
        iota=iota,
        chi=chi,
        kappa=compose(c, chi),
        eta=zero_map([m2.module], a.module, 1),
        a_map=zero_map([m.module], a.module, 2),
    )


def identity_retract(triple):
    m, a, c = triple.fiber, triple.base, triple.c
    return HomotopyRetractTriple(
        src=triple,
        src_fiber=m,
        src_base=a,
        src_c=c,
        dst_fiber=m,
        dst_base=a,
        dst_c=c,
        p=identity_map(a.module),
        i=identity_map(a.module),
        h=zero_map([a.module], a.module, 1),
        pi=identity_map(m.module),
        iota=identity_map(m.module),
        chi=zero_map([m.module], m.module, 1),
        kappa=zero_map([m.module], a.module, 1),
        eta=zero_map([m.module], a.module, 1),
        a_map=zero_map([m.module], a.module, 2),
    )


# ---------------------------------------------------------------------------
# A2+-structures


def _standard_dga(rng, ring, kind=None):
    """A small strictly associative dga (possibly with differential)."""
    from .graded import ChainComplex as CC

    kinds = ["zero", "trunc0", "trunc2", "exterior", "acyclic"]
    kind = kind or rng.choice(kinds)
    one = ring.one()
    if kind == "zero":
        shape = {0: rng.randint(1, 2), 1: rng.randint(1, 2)}
        cx = rand_complex(rng, ring, shape, "z", pair_bias=0.0)
        mu = zero_map([cx.module, cx.module], cx.module, 0)
        return cx, mu
    if kind in ("trunc0", "trunc2"):
        n = rng.randint(2, 3)
        td = 0 if kind == "trunc0" else 2
        gens = [Gen("1" if i == 0 else f"t{i}", td * i, None) for i in range(n)]
        mod = GradedModule(ring, gens)
        entries = {}
        for i in range(n):
            for j in range(n):
                if i + j < n:
                    entries[(i, j)] = {i + j: one}
        mu = MultilinearMap([mod, mod], mod, 0, entries, check=False)
        cx = CC(mod, zero_map([mod], mod, -1), check=False)
        return cx, mu
    if kind == "exterior":
        d = rng.choice([1, 3])
        mod = GradedModule(ring, [Gen("1", 0, None), Gen("x", d, None)])
        entries = {(0, 0): {0: one}, (0, 1): {1: one}, (1, 0): {1: one}}
        mu = MultilinearMap([mod, mod], mod, 0, entries, check=False)
        cx = CC(mod, zero_map([mod], mod, -1), check=False)
        return cx, mu
    # acyclic: Lambda(x) (x) F[y]/(y^2), dx = y
    mod = GradedModule(ring, [Gen("1", 0), Gen("y", 0), Gen("x", 1), Gen("xy", 1)])
    tbl = {
        (0, 0): 0, (0, 1): 1, (1, 0): 1, (0, 2): 2, (2, 0): 2,
        (0, 3): 3, (3, 0): 3, (1, 2): 3, (2, 1): 3,
    }
    entries = {k: {v: one} for k, v in tbl.items()}
    mu = MultilinearMap([mod, mod], mod, 0, entries, check=False)
    d = MultilinearMap([mod], mod, -1, {(2,): {1: one}})
    return CC(mod, d), mu


def conjugated_dga(rng, ring, kind=None):
    """Random-basis version of a standard dga (associativity preserved)."""
    cx, mu = _standard_dga(rng, ring, kind)
    mod = cx.module
    from .exactalg import Matrix as Mx

    g_entries = {}
    ginv_entries = {}
    for d in set(mod.degrees):
        pos = mod.positions_of_degree(d)
        n = len(pos)
        while True:
            m = Mx(ring, [[ring.canon(rng.randrange(-2, 3)) for _ in range(n)] for _ in range(n)])
            if rank(m) == n:
                break
        minv = solve(m, Mx.identity(ring, n))
        for j, p in enumerate(pos):
            g_entries[(p,)] = {pos[i]: m.entry(i, j) for i in range(n) if m.entry(i, j) != ring.zero()}
            ginv_entries[(p,)] = {pos[i]: minv.entry(i, j) for i in range(n) if minv.entry(i, j) != ring.zero()}
    g = MultilinearMap([mod], mod, 0, g_entries, check=False)
    ginv = MultilinearMap([mod], mod, 0, ginv_entries, check=False)
    from .graded import ChainComplex as CC
    from .graded import plug

    cx2 = CC(mod, compose(ginv, compose(cx.differential, g)))
    mu2 = compose(ginv, plug(mu, [g, g]))
    return cx2, mu2


def rand_a2_plus(rng, ring, b_zero=False, kind=None, budget=None, c0_zero=False):
    """Random A2+-structure by exact linear sampling.

    Order: a conjugated strictly-associative dga (mu, h = 0); c_0 sampled
    from the joint kernel of {cycle, symmetry, centrality} (plus the
    lambda-consistency row when d = 0); lambda solved from its bracket
    condition (with the cubic consistency row when B is forced to vanish);
    B solved last.  Obstructed solves trigger a resample within the budget.
    """
    from .duality import A2PlusStructure, continuation_map, tensor_complex
    from .graded import dual_module, identity_map as idmap
    from .graded import plug, tensor_maps, twist
    from .mapsolve import MapEquation, MapSystem, random_affine_element, refine_affine

    budget = budget or resample_budget()
    stats = {"c0": 0, "lambda": 0, "cubic": 0}
    for _ in range(budget):
        a, mu = conjugated_dga(rng, ring, kind)
        am = a.module
        dm = dual_module(am)
        ida = idmap(am)
        h = zero_map([am] * 3, am, 1)
        zero_diff = a.differential.is_zero()
        taa = tensor_complex([a, a])
        taaa = tensor_complex([a, a, a])

        def cont_of(x):
            stub = A2PlusStructure(
                a, x, mu, h, zero_map([am], taa.module, 1), zero_map([], taaa.module, 2)
            )
            return continuation_map(stub)

        conditions = [
            (lambda x: commutator([], taa, x), zero_map([], taa.module, -1)),
            (lambda x: compose(twist(am, am), x) - x, zero_map([], taa.module, 0)),
            (
                lambda x: plug(mu, [cont_of(x), ida])
                - compose(plug(mu, [ida, cont_of(x)]), twist(dm, am)),
                zero_map([dm, am], am, 0),
            ),
        ]
        if zero_diff:
            conditions.append(
                (
                    lambda x: compose(tensor_maps([mu, ida]), tensor_maps([ida, x]))
                    - compose(tensor_maps([ida, mu]), tensor_maps([x, ida])),
                    zero_map([am], taa.module, 0),
                )
            )
        if c0_zero:
            c0 = zero_map([], taa.module, 0)
        else:
            sys = MapSystem([], taa.module, 0, conditions)
            c0 = sys.sample(rng)
            if c0 is None:
                stats["c0"] += 1
                continue
        rhs4 = compose(tensor_maps([mu, ida]), tensor_maps([ida, c0])) - compose(
            tensor_maps([ida, mu]), tensor_maps([c0, ida])
        )
        eq = MapEquation(lambda x: commutator([a], taa, x), [am], taa.module, 1, rhs4)
        part, kern = eq.particular_solution(), eq.kernel_maps()
        if part is None:
            stats["lambda"] += 1
            continue
        tau23 = tensor_maps([ida, twist(am, am)])

        def rhs5_of(lam):
            return (
                compose(tensor_maps([ida, lam]), c0)
                + compose(tensor_maps([lam, ida]), c0)
                - compose(tau23, compose(tensor_maps([lam, ida]), c0))
            )

        if b_zero or zero_diff:
            refined = refine_affine(part, kern, rhs5_of, zero_map([], taaa.module, 1))
            if refined is None:
                stats["lambda"] += 1
                continue
            part, kern = refined
        lam = random_affine_element(rng, part, kern, ring)
        if b_zero:
            cubic = zero_map([], taaa.module, 2)
        else:
            eq = MapEquation(lambda x: commutator([], taaa, x), [], taaa.module, 2, rhs5_of(lam))
            cubic = eq.sample(rng)
            if cubic is None:
                stats["cubic"] += 1
                continue
        return A2PlusStructure(a, c0, mu, h, lam, cubic)
    raise GenerationExhausted("a2+ sampling budget exhausted", stats)


# ---------------------------------------------------------------------------
# document emission for the CLI


def triple_document(ring, t, metadata=None):
    from .documents import document_from_parts

    complexes = {"M": t.fiber, "A": t.base}
    maps = {
        "c": (t.c, ["M"], ["A"]),
        "mu": (t.mu, ["A", "A"], ["A"]),
        "m_L": (t.m_l, ["A", "M"], ["M"]),
        "m_R": (t.m_r, ["M", "A"], ["M"]),
        "tau_L": (t.tau_l, ["M", "A"], ["A"]),
        "tau_R": (t.tau_r, ["A", "M"], ["A"]),
        "sigma": (t.sigma, ["M", "M"], ["M"]),
        "beta": (t.beta, ["M", "M"], ["A"]),
    }
    spec = {
        "type": "a2_triple", "M": "M", "A": "A", "c": "c", "mu": "mu",
        "m_L": "m_L", "m_R": "m_R", "tau_L": "tau_L", "tau_R": "tau_R",
        "sigma": "sigma", "beta": "beta",
    }
    return document_from_parts(
        ring, complexes, maps, {"triple": ("a2_triple", t, spec)}, metadata
    )


def a2_plus_document(ring, s, metadata=None):
    from .documents import document_from_parts

    complexes = {"A": s.base}
    maps = {
        "c0": (s.c0, [], ["A", "A"]),
        "mu": (s.mu, ["A", "A"], ["A"]),
        "h_assoc": (s.h_assoc, ["A", "A", "A"], ["A"]),
        "lambda": (s.lam, ["A"], ["A", "A"]),
        "B": (s.cubic, [], ["A", "A", "A"]),
    }
    spec = {
        "type": "a2_plus", "A": "A", "c0": "c0", "mu": "mu",
        "h_assoc": "h_assoc", "lambda": "lambda", "B": "B",
    }
    return document_from_parts(
        ring, complexes, maps, {"structure": ("a2_plus", s, spec)}, metadata
    )


def retract_document(ring, r, triple=None, metadata=None):
    from .documents import document_from_parts

    complexes = {
        "M": r.src_fiber, "A": r.src_base, "M2": r.dst_fiber, "A2": r.dst_base,
    }
    maps = {
        "c": (r.src_c, ["M"], ["A"]),
        "c2": (r.dst_c, ["M2"], ["A2"]),
        "p": (r.p, ["A"], ["A2"]),
        "i": (r.i, ["A2"], ["A"]),
        "h": (r.h, ["A"], ["A"]),
        "pi": (r.pi, ["M"], ["M2"]),
        "iota": (r.iota, ["M2"], ["M"]),
        "chi": (r.chi, ["M"], ["M"]),
        "kappa": (r.kappa, ["M"], ["A2"]),
        "eta": (r.eta, ["M2"], ["A"]),
        "a": (r.a_map, ["M"], ["A"]),
    }
    structures = {}
    spec = {
        "type": "retract", "src_M": "M", "src_A": "A", "src_c": "c",
        "dst_M": "M2", "dst_A": "A2", "dst_c": "c2", "p": "p", "i": "i",
        "h": "h", "pi": "pi", "iota": "iota", "chi": "chi",
        "kappa": "kappa", "eta": "eta", "a": "a",
    }
    structures["retract"] = ("retract", r, spec)
    if triple is not None:
        maps.update(
            {
                "mu": (triple.mu, ["A", "A"], ["A"]),
                "m_L": (triple.m_l, ["A", "M"], ["M"]),
                "m_R": (triple.m_r, ["M", "A"], ["M"]),
                "tau_L": (triple.tau_l, ["M", "A"], ["A"]),
                "tau_R": (triple.tau_r, ["A", "M"], ["A"]),
                "sigma": (triple.sigma, ["M", "M"], ["M"]),
                "beta": (triple.beta, ["M", "M"], ["A"]),
            }
        )
        tspec = {
            "type": "a2_triple", "M": "M", "A": "A", "c": "c", "mu": "mu",
            "m_L": "m_L", "m_R": "m_R", "tau_L": "tau_L", "tau_R": "tau_R",
            "sigma": "sigma", "beta": "beta",
        }
        structures["triple"] = ("a2_triple", triple, tspec)
    return document_from_parts(ring, complexes, maps, structures, metadata)


def generate_document(kind, seed, ring, **params):
    """Deterministic-in-seed document whose structure passes its verifier."""
    import random as _random

    rng = _random.Random(seed)
    meta = {"kind": kind, "seed": seed}
    if kind == "a2_triple":
        t = rand_a2_triple_via_cone(rng, ring, **params)
        return triple_document(ring, t, meta)
    if kind == "a2_plus":
        s = rand_a2_plus(rng, ring, **params)
        return a2_plus_document(ring, s, meta)
    if kind == "retract":
        for _ in range(resample_budget()):
            t = rand_a2_triple_via_cone(rng, ring, base_shape={0: 2, 1: 2})
            r = rand_retract(rng, t)
            if r is not None:
                return retract_document(ring, r, t, meta)
        raise GenerationExhausted("no reducible instance found", {"retract": 1})
    raise ValueError(f"unknown generation kind {kind!r}")
