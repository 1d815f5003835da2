"""Kernel/image/solve/SNF against independent oracles (rank count, solve-back)."""

import random

import pytest

from conealg.exactalg import (
    Inconsistent,
    IntegerRing,
    Matrix,
    PrimeField,
    Q,
    RingError,
    Z,
    det,
    image_basis,
    kernel_basis,
    rank,
    rref,
    smith_normal_form,
    solve,
)


def rand_matrix(rng, ring, rows, cols, span=5):
    return Matrix(ring, [[ring.canon(rng.randrange(-span, span + 1)) for _ in range(cols)] for _ in range(rows)])


def test_prime_field_requires_prime():
    with pytest.raises(RingError):
        PrimeField(6)
    assert PrimeField(7).inv(3) == 5


def test_kernel_identity_is_trivial():
    f5 = PrimeField(5)
    k = kernel_basis(Matrix.identity(f5, 3))
    assert k.cols == 0


def test_kernel_of_zero_matrix_is_everything():
    f5 = PrimeField(5)
    k = kernel_basis(Matrix.zeros(f5, 2, 3))
    assert k == Matrix.identity(f5, 3)


def test_kernel_rank_nullity_oracle():
    # random 4x6 over Z/7: m*K = 0 and rank K + rank m = 6
    rng = random.Random(1)
    f7 = PrimeField(7)
    for _ in range(25):
        m = rand_matrix(rng, f7, 4, 6)
        k = kernel_basis(m)
        assert (m * k).is_zero()
        assert rank(k) == k.cols
        assert k.cols + rank(m) == 6


def test_image_solve_back_oracle():
    rng = random.Random(2)
    for _ in range(20):
        m = rand_matrix(rng, Q, 5, 3)
        basis, pre = image_basis(m)
        assert m * pre == basis
        for j in range(basis.cols):
            x = solve(m, basis.take_cols([j]))
            assert m * x == basis.take_cols([j])


def test_image_of_zero_and_identity():
    f5 = PrimeField(5)
    b, _ = image_basis(Matrix.zeros(f5, 3, 2))
    assert b.cols == 0
    b, _ = image_basis(Matrix.identity(f5, 3))
    assert b == Matrix.identity(f5, 3)


def test_solve_trivial_cases():
    f5 = PrimeField(5)
    assert solve(Matrix.zeros(f5, 2, 2), Matrix.zeros(f5, 2, 1)).is_zero()
    b = Matrix(f5, [[2], [3]])
    assert solve(Matrix.identity(f5, 2), b) == b


def test_solve_construct_then_solve():
    rng = random.Random(3)
    f5 = PrimeField(5)
    for _ in range(25):
        m = rand_matrix(rng, f5, 4, 5)
        x0 = rand_matrix(rng, f5, 5, 1)
        b = m * x0
        x = solve(m, b)
        assert m * x == b


def test_solve_inconsistent_detected():
    f5 = PrimeField(5)
    m = Matrix(f5, [[1, 0], [0, 0]])
    with pytest.raises(Inconsistent):
        solve(m, Matrix(f5, [[0], [1]]))


def test_solve_integers_via_snf():
    m = Matrix(Z, [[2, 0], [0, 3]])
    x = solve(m, Matrix(Z, [[4], [9]]))
    assert x == Matrix(Z, [[2], [3]])
    with pytest.raises(Inconsistent):
        solve(m, Matrix(Z, [[1], [0]]))


def snf_oracle(m):
    u, d, v = smith_normal_form(m)
    assert u * m * v == d
    assert det(u) in (1, -1) and det(v) in (1, -1)
    diag = [d.entry(i, i) for i in range(min(d.rows, d.cols))]
    for a, b in zip(diag, diag[1:]):
        if a == 0:
            assert b == 0
        else:
            assert b % a == 0
    return diag


def test_snf_diag_2_3():
    diag = snf_oracle(Matrix(Z, [[2, 0], [0, 3]]))
    assert diag == [1, 6]


def test_snf_zero_matrix():
    u, d, v = smith_normal_form(Matrix.zeros(Z, 2, 3))
    assert d.is_zero()
    assert u == Matrix.identity(Z, 2) and v == Matrix.identity(Z, 3)


def test_snf_gcd_det_oracle():
    # det = -8, gcd of entries = 2 -> invariant factors (2, 4)
    diag = snf_oracle(Matrix(Z, [[2, 4], [6, 8]]))
    assert diag == [2, 4]


def test_snf_random_and_scramble_invariance():
    rng = random.Random(4)
    for _ in range(15):
        m = rand_matrix(rng, Z, 3, 4, span=6)
        diag = snf_oracle(m)
        perm_r = list(range(3))
        perm_c = list(range(4))
        rng.shuffle(perm_r)
        rng.shuffle(perm_c)
        m2 = Matrix(Z, [[m.entry(i, j) for j in perm_c] for i in perm_r])
        assert snf_oracle(m2) == diag


def test_integer_kernel_is_saturated():
    m = Matrix(Z, [[2, 4]])
    k = kernel_basis(m)
    assert (m * k).is_zero()
    assert k.cols == 1
    col = [k.entry(i, 0) for i in range(2)]
    # primitive vector: gcd of entries is 1, so the kernel lattice is saturated
    from math import gcd
    assert gcd(col[0], col[1]) == 1


def test_rref_deterministic():
    f5 = PrimeField(5)
    m = Matrix(f5, [[0, 2, 1], [3, 1, 0], [3, 3, 1]])
    r1, p1 = rref(m)
    r2, p2 = rref(m)
    assert r1 == r2 and p1 == p2
