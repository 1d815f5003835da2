"""Cones: differential shape, LES exactness bookkeeping, filtered truncation."""

import random
from fractions import Fraction

import pytest

from conealg.exactalg import PrimeField, Z
from conealg.graded import (
    ChainComplex,
    Gen,
    GradedModule,
    MultilinearMap,
    NotChainMap,
    compose,
    identity_map,
    zero_map,
)
from conealg.cones import (
    FiltrationViolated,
    WrongDegree,
    build_cone,
    les_data,
    truncate_filtered,
)
from tests.test_graded import rand_complex, rand_map

F5 = PrimeField(5)


def rand_chain_map(rng, src, dst, degree=0):
    """Random chain map via the null-homotopy trick plus kernel sampling."""
    from conealg.graded import commutator

    h = rand_map(rng, [src.module], dst.module, degree + 1)
    return commutator([src], dst, h)


def test_cone_of_zero_map_is_block_sum():
    rng = random.Random(50)
    a = rand_complex(rng, F5, {0: 2, 1: 2}, "a")
    m = rand_complex(rng, F5, {0: 2, 1: 1}, "m")
    c = zero_map([m.module], a.module, 0)
    cone = build_cone(c, m, a)
    # block diagonal differential: no A-component from the M-part
    na = a.module.rank
    for i in range(m.module.rank):
        outs = cone.total.differential.apply_basis((na + i,))
        assert all(q >= na for q in outs)
    data = les_data(cone)
    assert data.exact
    for d in data.h_total.degrees():
        assert data.h_total.dim(d) == data.h_base.dim(d) + data.h_fiber.dim(d - 1)


def test_cone_of_identity_is_acyclic():
    mod = GradedModule(F5, [Gen("x0", 0), Gen("x1", 1)])
    cx = ChainComplex(mod, zero_map([mod], mod, -1), check=False)
    cone = build_cone(identity_map(mod), cx, cx)
    data = les_data(cone)
    for d in data.h_total.degrees():
        assert data.h_total.dim(d) == 0


def test_cone_differential_formula():
    # d(a, xbar) = (da + c(x), -(dx)bar) on every generator
    rng = random.Random(51)
    a = rand_complex(rng, F5, {0: 2, 1: 2, 2: 1}, "a")
    m = rand_complex(rng, F5, {0: 2, 1: 2}, "m")
    c = rand_chain_map(rng, m, a)
    cone = build_cone(c, m, a)
    na = a.module.rank
    for i in range(na):
        assert cone.total.differential.apply_basis((i,)) == a.differential.apply_basis((i,))
    for i in range(m.module.rank):
        got = cone.total.differential.apply_basis((na + i,))
        expect = {}
        for q, v in c.apply_basis((i,)).items():
            expect[q] = v
        for q, v in m.differential.apply_basis((i,)).items():
            expect[q + na] = F5.neg(v)
        expect = {k: v for k, v in expect.items() if v != 0}
        assert got == expect


def test_cone_requires_chain_map_and_degree():
    rng = random.Random(52)
    a = rand_complex(rng, F5, {0: 2, 1: 2}, "a")
    m = rand_complex(rng, F5, {0: 2, 1: 2}, "m")
    bad = rand_map(rng, [m.module], a.module, 0)
    from conealg.graded import is_chain_map

    if not is_chain_map([m], a, bad):
        with pytest.raises(NotChainMap):
            build_cone(bad, m, a)
    bad_degree = rand_map(rng, [m.module], a.module, 1)
    with pytest.raises(WrongDegree):
        build_cone(bad_degree, m, a)


def test_les_rank_identity_random():
    rng = random.Random(53)
    for _ in range(10):
        a = rand_complex(rng, F5, {0: 2, 1: 2, 2: 1}, "a")
        m = rand_complex(rng, F5, {0: 2, 1: 2}, "m")
        c = rand_chain_map(rng, m, a)
        cone = build_cone(c, m, a)
        data = les_data(cone)
        assert data.exact, data.failures


def test_les_cone_multiplication_by_two_over_Z():
    # cone of 2: Z -> Z in degree 0 has H_0 = Z/2
    mod1 = GradedModule(Z, [Gen("m", 0)])
    mod2 = GradedModule(Z, [Gen("a", 0)])
    m = ChainComplex(mod1, zero_map([mod1], mod1, -1), check=False)
    a = ChainComplex(mod2, zero_map([mod2], mod2, -1), check=False)
    c = MultilinearMap([mod1], mod2, 0, {(0,): {0: 2}})
    cone = build_cone(c, m, a)
    from conealg.graded import homology

    hp = homology(cone.total)
    assert hp.factors_at(0) == [2]
    assert hp.dim(1) == 0


def test_cone_of_homotopy_equivalence_is_acyclic():
    # kill an acyclic pair: M = A with identity map
    rng = random.Random(54)
    a = rand_complex(rng, F5, {0: 2, 1: 2}, "a")
    cone = build_cone(identity_map(a.module), a, a)
    data = les_data(cone)
    assert all(data.h_total.dim(d) == 0 for d in data.h_total.degrees())


def filtered_complex(ring, spec):
    """spec: list of (name, degree, level, boundary dict name->coeff)."""
    gens = [Gen(n, d, Fraction(l)) for n, d, l, _ in spec]
    mod = GradedModule(ring, gens)
    entries = {}
    for i, (_, _, _, bnd) in enumerate(spec):
        if bnd:
            entries[(i,)] = {mod.by_name[k]: v for k, v in bnd.items()}
    return ChainComplex(mod, MultilinearMap([mod], mod, -1, entries))


def test_truncate_filtered_windows():
    a = filtered_complex(F5, [("a1", 1, 1, {"a0": 1}), ("a0", 0, 0, None)])
    m = filtered_complex(F5, [("m1", 1, 2, {"m0": 1}), ("m0", 0, 1, None)])
    c = MultilinearMap([m.module], a.module, 0, {(0,): {0: 1}, (1,): {1: 1}})
    cone = build_cone(c, m, a)
    whole = truncate_filtered(cone, Fraction(-10), Fraction(10))
    assert whole.module.rank == 4
    empty = truncate_filtered(cone, Fraction(10), Fraction(20))
    assert empty.module.rank == 0
    # window (0, 1]: keeps a1 (level 1), m0bar (level 1); drops a0, m1bar
    win = truncate_filtered(cone, Fraction(0), Fraction(1))
    names = [g.name for g in win.module.gens]
    assert names == ["A:a1", "M̄:m0"]
    # differential restricted to the window: entries to dropped generators deleted
    for i, g in enumerate(win.module.gens):
        for q in win.differential.apply_basis((i,)):
            assert win.module.gens[q].name in names


def test_truncate_rejects_level_raising_map():
    a = filtered_complex(F5, [("a0", 0, 0, None)])
    m = filtered_complex(F5, [("m0", 0, 0, None)])
    c = MultilinearMap([m.module], a.module, 0, {(0,): {0: 1}})
    cone = build_cone(c, m, a)
    # manufacture a level-raising differential by hand and check the guard
    bad_gens = [Gen("x", 1, Fraction(0)), Gen("y", 0, Fraction(5))]
    bad_mod = GradedModule(F5, bad_gens)
    bad = ChainComplex(bad_mod, MultilinearMap([bad_mod], bad_mod, -1, {(0,): {1: 1}}), check=False)
    cone2 = build_cone(zero_map([bad_mod], bad_mod, 0), bad, bad)
    with pytest.raises(FiltrationViolated):
        truncate_filtered(cone2, Fraction(-1), Fraction(10))


def test_six_generator_window_split():
    a = filtered_complex(
        F5,
        [("a2", 2, 3, {"a1": 1}), ("a1", 1, 1, None), ("a0", 0, 0, None)],
    )
    m = filtered_complex(
        F5,
        [("m2", 2, 3, {"m1": 2}), ("m1", 1, 2, None), ("m0", 0, 1, None)],
    )
    c = MultilinearMap([m.module], a.module, 0, {(0,): {0: 1}, (1,): {1: 3}, (2,): {2: 1}})
    cone = build_cone(c, m, a)
    win = truncate_filtered(cone, Fraction(1), Fraction(3))
    names = {g.name for g in win.module.gens}
    assert names == {"A:a2", "M̄:m2", "M̄:m1"}
    full = cone.total.differential
    for i, g in enumerate(win.module.gens):
        p = cone.total.module.by_name[g.name]
        expect = {
            cone.total.module.gens[q].name: v
            for q, v in full.apply_basis((p,)).items()
            if cone.total.module.gens[q].name in names
        }
        got = {win.module.gens[q].name: v for q, v in win.differential.apply_basis((i,)).items()}
        assert got == expect
