"""Shift calculus: element-formula oracle, involution/commutation signs,
bracket compatibility, degree bookkeeping.
"""

import random
from itertools import product

from conealg.exactalg import PrimeField, Q
from conealg.graded import ChainComplex, Gen, GradedModule, MultilinearMap, commutator, is_chain_map
from conealg.shifts import (
    ShiftSignature,
    collapse_composite,
    shift_complex,
    shift_gen_name,
    shift_map,
    shift_module,
    shift_witnesses,
    sig,
    verify_shift_identities,
)
from tests.test_graded import rand_complex, rand_map

F5 = PrimeField(5)


def test_shift_names_merge():
    assert shift_gen_name("x", 2) == "x[2]"
    assert shift_gen_name("x[2]", -2) == "x"
    assert shift_gen_name("x[-1]", 1) == "x"
    assert shift_gen_name("x", 0) == "x"


def test_shift_complex_round_trip_bit_identical():
    rng = random.Random(30)
    c = rand_complex(rng, F5, {0: 2, 1: 2})
    s1, _, _ = shift_complex(c, 1)
    back, _, _ = shift_complex(s1, -1)
    assert back.module == c.module
    assert back.differential == c.differential


def test_shift_zero_is_identity():
    rng = random.Random(31)
    c = rand_complex(rng, F5, {0: 2, 1: 1})
    s0, s, w = shift_complex(c, 0)
    assert s0.module == c.module and s0.differential == c.differential


def test_shift_witness_inverses():
    mod = GradedModule(F5, [Gen("a", 0), Gen("b", 2)])
    s, w = shift_witnesses(mod, 3)
    from conealg.graded import compose, identity_map

    assert compose(w, s) == identity_map(mod)
    assert compose(s, w) == identity_map(shift_module(mod, 3))


def test_shifted_differential_squares_to_zero():
    rng = random.Random(32)
    for _ in range(10):
        c = rand_complex(rng, F5, {0: 2, 1: 2, 2: 1})
        for k in range(-3, 4):
            sc, _, _ = shift_complex(c, k)
            ChainComplex(sc.module, sc.differential)  # revalidates d*d = 0


def test_shift_map_element_formula_oracle():
    # alpha[kbar](x1..xl) = (-1)^{|x1|(k2+..+kl)+...} s_k alpha(x1..xl),
    # exponent in *shifted* degrees
    rng = random.Random(33)
    for _ in range(15):
        mods = [
            GradedModule(F5, [Gen(f"u{i}_{j}", d) for j, d in enumerate([0, 1, 2][: rng.randint(1, 3)])])
            for i in range(2)
        ]
        tgt = GradedModule(F5, [Gen(f"t_{j}", d) for j, d in enumerate([0, 1, 2, 3])])
        alpha = rand_map(rng, mods, tgt, rng.choice([0, 1]))
        ks = [rng.randint(-2, 2) for _ in mods]
        k = rng.randint(-2, 2)
        kbar = ShiftSignature(tuple(ks), k)
        shifted = shift_map(alpha, kbar)
        smods = [shift_module(m, kk) for m, kk in zip(mods, ks)]
        for ins in product(*[range(m.rank) for m in mods]):
            got = shifted.apply_basis(ins)
            exp = 0
            for i in range(len(mods) - 1):
                exp += smods[i].degrees[ins[i]] * sum(ks[i + 1 :])
            sgn = F5.canon((-1) ** (exp % 2))
            expect = {o: F5.mul(sgn, c) for o, c in alpha.apply_basis(ins).items()}
            assert got == expect


def test_linear_shift_involutive():
    rng = random.Random(34)
    mod = GradedModule(F5, [Gen("a", 0), Gen("b", 1), Gen("c", 2)])
    f = rand_map(rng, [mod], mod, 1)
    for k in (-2, 1, 3):
        assert shift_map(shift_map(f, sig(k, k)), sig(-k, -k)) == f


def test_dga_shift_sign_example():
    # mu = mu2[1,1;1]: mu(a,b) = (-1)^{|a|} mu2(a,b) on shifted degrees
    rng = random.Random(35)
    am1 = GradedModule(F5, [Gen("x0[-1]", 1), Gen("x1[-1]", 2)])
    mu2 = rand_map(rng, [am1, am1], am1, -1)
    mu = shift_map(mu2, sig(1, 1, 1))
    a_mod = shift_module(am1, 1)
    for i in range(a_mod.rank):
        for j in range(a_mod.rank):
            sgn = F5.canon((-1) ** (a_mod.degrees[i] % 2))
            expect = {o: F5.mul(sgn, c) for o, c in mu2.apply_basis((i, j)).items()}
            assert mu.apply_basis((i, j)) == expect


def test_bilinear_involution_sign():
    # l = 2, kbar = (1,1;1): alpha[kbar][-kbar] = -alpha
    rng = random.Random(36)
    mod = GradedModule(F5, [Gen("a", 0), Gen("b", 1), Gen("c", 2)])
    alpha = rand_map(rng, [mod, mod], mod, 0)
    kbar = sig(1, 1, 1)
    assert shift_map(shift_map(alpha, kbar), -kbar) == -alpha


def test_chain_map_preserved_by_shift():
    rng = random.Random(37)
    for _ in range(6):
        a = rand_complex(rng, F5, {0: 2, 1: 2}, "a")
        b = rand_complex(rng, F5, {0: 2, 1: 2}, "b")
        t = rand_complex(rng, F5, {0: 2, 1: 2, 2: 2}, "t")
        # build a chain map by correcting a random alpha: not guaranteed; use commutator trick
        h = rand_map(rng, [a.module, b.module], t.module, 1)
        alpha = commutator([a, b], t, h)  # [d,h] is always a chain map of degree 0
        assert is_chain_map([a, b], t, alpha)
        kbar = sig(1, -1, 2)
        sa, _, _ = shift_complex(a, 1)
        sb, _, _ = shift_complex(b, -1)
        st, _, _ = shift_complex(t, 2)
        assert is_chain_map([sa, sb], st, shift_map(alpha, kbar))


def test_verify_shift_identities_trivial_linear():
    rng = random.Random(38)
    c = rand_complex(rng, F5, {0: 2, 1: 2})
    f = rand_map(rng, [c.module], c.module, 0)
    rep = verify_shift_identities([c], c, f, sig(2, 1), sig(-1, 3), sig(0, -2))
    assert rep.ok, rep.failures()


def test_verify_shift_identities_randomized():
    rng = random.Random(39)
    for trial in range(40):
        ell = rng.randint(1, 3)
        cxs = [rand_complex(rng, F5, {0: 2, 1: 1, 2: 1}, f"s{i}") for i in range(ell)]
        tgt = rand_complex(rng, F5, {d: 2 for d in range(-1, 5)}, "t")
        alpha = rand_map(rng, [c.module for c in cxs], tgt.module, rng.randint(-1, 2))
        mk = lambda: ShiftSignature(tuple(rng.randint(-2, 2) for _ in range(ell)), rng.randint(-2, 2))
        rep = verify_shift_identities(cxs, tgt, alpha, mk(), mk(), mk())
        assert rep.ok, (trial, rep.failures())


def test_degree_bookkeeping_asserted():
    rng = random.Random(40)
    mod = GradedModule(F5, [Gen("a", 0), Gen("b", 1)])
    alpha = rand_map(rng, [mod, mod], mod, 1)
    out = shift_map(alpha, sig(1, -2, 2))
    assert out.degree == 1 + (1 - 2) - 2


def test_collapse_composite_carries_correction():
    rng = random.Random(41)
    mod = GradedModule(F5, [Gen("a", 0), Gen("b", 1), Gen("c", 2)])
    alpha = rand_map(rng, [mod, mod], mod, 0)
    kbar, tbar = sig(1, 1, 0), sig(1, -1, 1)
    assert collapse_composite(alpha, kbar, tbar) == shift_map(alpha, kbar + tbar)
