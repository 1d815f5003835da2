"""Exact linear algebra over prime fields, the rationals, and the integers.

Everything downstream (homology, cone products, transfer, duality checks)
reduces to kernels, images, linear solves and Smith normal forms computed
here.  No floating point anywhere: prime-field elements are ints in [0, p),
rationals are ``fractions.Fraction``, integers are Python ints.

Pivoting is deterministic (first nonzero entry in row-major sweep), so
bases are reproducible across runs.  Prime-field elimination has a
vectorized numpy path; the generic path handles Fraction/int entries.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np


class RingError(Exception):
    pass


class Inconsistent(Exception):
    """Raised by solve() when b is not in the image of m."""


def _is_prime(p):
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


class CoefficientRing:
    """Base class; concrete rings below.  Elements are plain Python values."""

    kind = None
    is_field = False

    def zero(self):
        raise NotImplementedError

    def one(self):
        raise NotImplementedError

    def canon(self, x):
        raise NotImplementedError

    def add(self, x, y):
        raise NotImplementedError

    def neg(self, x):
        raise NotImplementedError

    def sub(self, x, y):
        return self.add(x, self.neg(y))

    def mul(self, x, y):
        raise NotImplementedError

    def inv(self, x):
        raise NotImplementedError

    def is_unit(self, x):
        raise NotImplementedError

    def from_int(self, n):
        return self.canon(n)

    def parse(self, s):
        """Inverse of show(); coefficients on disk are decimal strings."""
        s = s.strip()
        if "/" in s:
            num, den = s.split("/")
            q = Fraction(int(num), int(den))
            if self.kind != "rationals":
                if q.denominator != 1:
                    return self.canon_fraction(q)
                return self.canon(int(q))
            return self.canon(q)
        return self.canon(int(s))

    def canon_fraction(self, q):
        raise RingError(f"non-integral coefficient {q} over {self.kind}")

    def show(self, x):
        return str(x)

    def eq(self, x, y):
        return self.canon(x) == self.canon(y)

    def describe(self):
        return {"kind": self.kind}

    def __eq__(self, other):
        return isinstance(other, CoefficientRing) and self.describe() == other.describe()

    def __hash__(self):
        return hash(tuple(sorted(self.describe().items())))

    def __repr__(self):
        return f"{type(self).__name__}({self.describe()})"


class PrimeField(CoefficientRing):
    kind = "prime_field"
    is_field = True

    def __init__(self, p):
        if not _is_prime(p):
            raise RingError(f"{p} is not prime")
        self.p = p

    def zero(self):
        return 0

    def one(self):
        return 1

    def canon(self, x):
        return int(x) % self.p

    def canon_fraction(self, q):
        return self.canon(q.numerator * self.inv(self.canon(q.denominator)))

    def add(self, x, y):
        return (x + y) % self.p

    def neg(self, x):
        return (-x) % self.p

    def mul(self, x, y):
        return (x * y) % self.p

    def inv(self, x):
        x = x % self.p
        if x == 0:
            raise ZeroDivisionError("inverse of 0")
        return pow(x, self.p - 2, self.p)

    def is_unit(self, x):
        return x % self.p != 0

    def describe(self):
        return {"kind": self.kind, "p": self.p}


class RationalField(CoefficientRing):
    kind = "rationals"
    is_field = True

    def zero(self):
        return Fraction(0)

    def one(self):
        return Fraction(1)

    def canon(self, x):
        return Fraction(x)

    def add(self, x, y):
        return x + y

    def neg(self, x):
        return -x

    def mul(self, x, y):
        return x * y

    def inv(self, x):
        if x == 0:
            raise ZeroDivisionError("inverse of 0")
        return 1 / Fraction(x)

    def is_unit(self, x):
        return x != 0

    def show(self, x):
        x = Fraction(x)
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


class IntegerRing(CoefficientRing):
    kind = "integers"
    is_field = False

    def zero(self):
        return 0

    def one(self):
        return 1

    def canon(self, x):
        if isinstance(x, Fraction):
            if x.denominator != 1:
                raise RingError(f"{x} is not an integer")
            return int(x)
        return int(x)

    def add(self, x, y):
        return x + y

    def neg(self, x):
        return -x

    def mul(self, x, y):
        return x * y

    def inv(self, x):
        if x in (1, -1):
            return x
        raise ZeroDivisionError(f"{x} is not a unit in Z")

    def is_unit(self, x):
        return x in (1, -1)


def ring_from_description(desc):
    kind = desc["kind"]
    if kind == "prime_field":
        return PrimeField(desc["p"])
    if kind == "rationals":
        return RationalField()
    if kind == "integers":
        return IntegerRing()
    raise RingError(f"unknown ring kind {kind!r}")


Q = RationalField()
Z = IntegerRing()


class Matrix:
    """Dense matrix with canonical-form ring entries; rows of tuples."""

    __slots__ = ("ring", "rows", "cols", "data")

    def __init__(self, ring, data, cols=None):
        self.ring = ring
        self.data = tuple(tuple(ring.canon(x) for x in row) for row in data)
        self.rows = len(self.data)
        self.cols = len(self.data[0]) if self.data else (cols or 0)
        for row in self.data:
            if len(row) != self.cols:
                raise ValueError("ragged rows")

    @classmethod
    def zeros(cls, ring, rows, cols):
        z = ring.zero()
        return cls(ring, [[z] * cols for _ in range(rows)], cols=cols)

    @classmethod
    def identity(cls, ring, n):
        z, o = ring.zero(), ring.one()
        return cls(ring, [[o if i == j else z for j in range(n)] for i in range(n)])

    @classmethod
    def column(cls, ring, entries):
        return cls(ring, [[x] for x in entries], cols=1)

    def __eq__(self, other):
        return (
            isinstance(other, Matrix)
            and self.ring == other.ring
            and self.data == other.data
            and self.cols == other.cols
        )

    def __hash__(self):
        return hash((self.ring, self.data, self.cols))

    def __repr__(self):
        body = "; ".join(" ".join(self.ring.show(x) for x in row) for row in self.data)
        return f"Matrix({self.rows}x{self.cols}: {body})"

    def entry(self, i, j):
        return self.data[i][j]

    def col(self, j):
        return [self.data[i][j] for i in range(self.rows)]

    def is_zero(self):
        z = self.ring.zero()
        return all(x == z for row in self.data for x in row)

    def transpose(self):
        return Matrix(self.ring, [self.col(j) for j in range(self.cols)], cols=self.rows)

    def __add__(self, other):
        r = self.ring
        return Matrix(r, [
            [r.add(a, b) for a, b in zip(ra, rb)] for ra, rb in zip(self.data, other.data)
        ])

    def __sub__(self, other):
        r = self.ring
        return Matrix(r, [
            [r.sub(a, b) for a, b in zip(ra, rb)] for ra, rb in zip(self.data, other.data)
        ])

    def __neg__(self):
        r = self.ring
        return Matrix(r, [[r.neg(a) for a in row] for row in self.data])

    def scale(self, c):
        r = self.ring
        c = r.canon(c)
        return Matrix(r, [[r.mul(c, a) for a in row] for row in self.data])

    def __mul__(self, other):
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.rows}x{self.cols} * {other.rows}x{other.cols}")
        r = self.ring
        if isinstance(r, PrimeField) and self.rows and self.cols and other.cols:
            a = np.array(self.data, dtype=np.int64)
            b = np.array(other.data, dtype=np.int64)
            return Matrix(r, ((a @ b) % r.p).tolist())
        z = r.zero()
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = z
                for k in range(self.cols):
                    acc = r.add(acc, r.mul(self.data[i][k], other.data[k][j]))
                row.append(acc)
            out.append(row)
        return Matrix(r, out, cols=other.cols)

    def hstack(self, other):
        if self.rows != other.rows:
            raise ValueError("row mismatch")
        return Matrix(self.ring, [ra + rb for ra, rb in zip(self.data, other.data)], cols=self.cols + other.cols)

    def take_cols(self, js):
        return Matrix(self.ring, [[row[j] for j in js] for row in self.data], cols=len(js))


def _rref_numpy(ring, data, rows, cols):
    p = ring.p
    a = np.array(data, dtype=np.int64).reshape(rows, cols) % p
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            a[[r, i]] = a[[i, r]]
        a[r] = (a[r] * pow(int(a[r, c]), p - 2, p)) % p
        col = a[:, c].copy()
        col[r] = 0
        a = (a - np.outer(col, a[r])) % p
        pivots.append(c)
        r += 1
    return [[int(x) for x in row] for row in a], pivots


def _rref_generic(ring, data, rows, cols):
    a = [list(row) for row in data]
    z = ring.zero()
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        pivot_row = None
        for i in range(r, rows):
            if a[i][c] != z:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        a[r], a[pivot_row] = a[pivot_row], a[r]
        inv = ring.inv(a[r][c])
        a[r] = [ring.mul(inv, x) for x in a[r]]
        for i in range(rows):
            if i != r and a[i][c] != z:
                f = a[i][c]
                a[i] = [ring.sub(x, ring.mul(f, y)) for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    return a, pivots


def rref(m):
    """Reduced row echelon form; returns (rref matrix, pivot column list).

    Field rings only; integer matrices go through smith_normal_form.
    """
    ring = m.ring
    if not ring.is_field:
        raise RingError("rref needs a field")
    if m.rows == 0 or m.cols == 0:
        return m, []
    if isinstance(ring, PrimeField):
        data, pivots = _rref_numpy(ring, m.data, m.rows, m.cols)
    else:
        data, pivots = _rref_generic(ring, m.data, m.rows, m.cols)
    return Matrix(ring, data), pivots


def rank(m):
    if m.ring.is_field:
        return len(rref(m)[1])
    _, d, _ = smith_normal_form(m)
    return sum(1 for i in range(min(d.rows, d.cols)) if d.entry(i, i) != 0)


def kernel_basis(m):
    """Columns form a basis of ker m.  Over Z: basis of the kernel lattice."""
    ring = m.ring
    if not ring.is_field:
        if ring.kind != "integers":
            raise RingError("kernel_basis: field or integer ring")
        u, d, v = smith_normal_form(m)
        n = min(d.rows, d.cols)
        free = [j for j in range(m.cols) if j >= n or d.entry(j, j) == 0]
        return v.take_cols(free)
    if m.cols == 0:
        return Matrix.zeros(ring, 0, 0)
    if m.rows == 0:
        return Matrix.identity(ring, m.cols)
    r, pivots = rref(m)
    pivot_set = set(pivots)
    free = [j for j in range(m.cols) if j not in pivot_set]
    z, o = ring.zero(), ring.one()
    cols = []
    for j in free:
        vec = [z] * m.cols
        vec[j] = o
        for i, pc in enumerate(pivots):
            vec[pc] = ring.neg(r.entry(i, j))
        cols.append(vec)
    return Matrix(ring, [[col[i] for col in cols] for i in range(m.cols)]) if cols else Matrix.zeros(ring, m.cols, 0)


def image_basis(m):
    """(basis, preimage): basis columns span im m and m * preimage = basis."""
    ring = m.ring
    if ring.is_field:
        _, pivots = rref(m)
        basis = m.take_cols(pivots)
        z, o = ring.zero(), ring.one()
        pre = Matrix(ring, [[o if j == pc else z for pc in pivots] for j in range(m.cols)])
        return basis, pre
    u, d, v = smith_normal_form(m)
    n = min(d.rows, d.cols)
    js = [j for j in range(n) if d.entry(j, j) != 0]
    pre = v.take_cols(js)
    return m * pre, pre


def solve(m, b):
    """Solve m x = b (b a column matrix or multi-column); raise Inconsistent.

    Over the integers an integral solution is found via Smith normal form,
    or Inconsistent is raised with a certificate of nonexistence.
    """
    ring = m.ring
    if b.rows != m.rows:
        raise ValueError("shape mismatch in solve")
    if ring.is_field:
        if m.cols == 0:
            if not b.is_zero():
                raise Inconsistent("zero-column system with nonzero rhs")
            return Matrix.zeros(ring, 0, b.cols)
        aug, pivots = rref(m.hstack(b))
        for i in range(len(pivots)):
            if pivots[i] >= m.cols:
                raise Inconsistent(f"rank of augmented matrix exceeds rank (pivot in rhs at row {i})")
        z = ring.zero()
        out = [[z] * b.cols for _ in range(m.cols)]
        for i, pc in enumerate(pivots):
            for j in range(b.cols):
                out[pc][j] = aug.entry(i, m.cols + j)
        return Matrix(ring, out)
    u, d, v = smith_normal_form(m)
    ub = u * b
    n = min(d.rows, d.cols)
    y = [[ring.zero()] * b.cols for _ in range(m.cols)]
    for i in range(m.rows):
        di = d.entry(i, i) if i < n else 0
        for j in range(b.cols):
            t = ub.entry(i, j)
            if di == 0:
                if t != 0:
                    raise Inconsistent(f"no integral solution (row {i})")
            else:
                if t % di != 0:
                    raise Inconsistent(f"no integral solution ({t} not divisible by {di})")
                y[i][j] = t // di
    return v * Matrix(ring, y)


def smith_normal_form(m):
    """U m V = D with d1 | d2 | ... ; U, V unimodular.  Integer matrices."""
    if m.ring.kind != "integers":
        raise RingError("smith_normal_form needs the integer ring")
    a = [list(row) for row in m.data]
    rows, cols = m.rows, m.cols
    u = [[1 if i == j else 0 for j in range(rows)] for i in range(rows)]
    v = [[1 if i == j else 0 for j in range(cols)] for i in range(cols)]

    def row_op(i, j, q):  # row_i -= q * row_j
        a[i] = [x - q * y for x, y in zip(a[i], a[j])]
        u[i] = [x - q * y for x, y in zip(u[i], u[j])]

    def col_op(i, j, q):  # col_i -= q * col_j
        for row in a:
            row[i] -= q * row[j]
        for row in v:
            row[i] -= q * row[j]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    n = min(rows, cols)
    t = 0
    while t < n:
        # find pivot: smallest nonzero |entry| in the remaining block
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                if a[i][j] != 0 and (best is None or abs(a[i][j]) < abs(a[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        dirty = True
        while dirty:
            dirty = False
            for i in range(t + 1, rows):
                if a[i][t] != 0:
                    q = a[i][t] // a[t][t]
                    row_op(i, t, q)
                    if a[i][t] != 0:
                        swap_rows(t, i)
                        dirty = True
            for j in range(t + 1, cols):
                if a[t][j] != 0:
                    q = a[t][j] // a[t][t]
                    col_op(j, t, q)
                    if a[t][j] != 0:
                        swap_cols(t, j)
                        dirty = True
        # enforce divisibility of the rest of the block by a[t][t]
        offender = None
        for i in range(t + 1, rows):
            for j in range(t + 1, cols):
                if a[i][j] % a[t][t] != 0:
                    offender = (i, j)
                    break
            if offender:
                break
        if offender:
            # fold the offending row into row t and restart this pivot
            i, _ = offender
            a[t] = [x + y for x, y in zip(a[t], a[i])]
            u[t] = [x + y for x, y in zip(u[t], u[i])]
            continue
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
        t += 1

    ring = m.ring
    d = [[a[i][j] if i == j else 0 for j in range(cols)] for i in range(rows)]
    return Matrix(ring, u), Matrix(ring, d), Matrix(ring, v)


def det(m):
    """Exact determinant (fraction-free over Z via rational elimination)."""
    if m.rows != m.cols:
        raise ValueError("det of non-square matrix")
    ring = m.ring
    if isinstance(ring, PrimeField):
        a = [list(r) for r in m.data]
        p, sign, acc = ring.p, 1, 1
        n = m.rows
        for c in range(n):
            piv = next((i for i in range(c, n) if a[i][c] % p != 0), None)
            if piv is None:
                return 0
            if piv != c:
                a[c], a[piv] = a[piv], a[c]
                sign = -sign
            inv = pow(a[c][c], p - 2, p)
            acc = acc * a[c][c] % p
            for i in range(c + 1, n):
                f = a[i][c] * inv % p
                a[i] = [(x - f * y) % p for x, y in zip(a[i], a[c])]
        return ring.canon(sign * acc)
    a = [[Fraction(x) for x in row] for row in m.data]
    n = m.rows
    sign = 1
    acc = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if a[i][c] != 0), None)
        if piv is None:
            return ring.canon(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            sign = -sign
        acc *= a[c][c]
        for i in range(c + 1, n):
            f = a[i][c] / a[c][c]
            a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return ring.canon(acc * sign)
