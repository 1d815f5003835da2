"""Linear algebra on spaces of multilinear maps.

A degree-homogeneous map V_1 (x) ... (x) V_l -> V is a vector in the space
spanned by its admissible entry slots (input tuple, output) with matching
degrees.  Operators like X |-> [d, X] or X |-> c o X are linear in X, so
equations of A2/A2+ type reduce to exact matrix solves over the coefficient
ring; the matrices are built by probing single-entry basis maps.
"""

from __future__ import annotations

from itertools import product

from .exactalg import Inconsistent, Matrix, kernel_basis, solve
from .graded import MultilinearMap


def entry_slots(sources, target, degree, allowed=None):
    """All (input tuple, output) pairs a map of this degree may populate."""
    out_by_degree = {}
    for o, d in enumerate(target.degrees):
        out_by_degree.setdefault(d, []).append(o)
    slots = []
    for ins in product(*[range(s.rank) for s in sources]):
        din = sum(s.degrees[i] for s, i in zip(sources, ins))
        for o in out_by_degree.get(din + degree, []):
            if allowed is None or allowed(ins, o):
                slots.append((ins, o))
    return slots


def basis_map(sources, target, degree, slot):
    ins, o = slot
    return MultilinearMap(sources, target, degree, {ins: {o: target.ring.one()}}, check=False)


def map_to_vector(m, slots, index=None):
    ring = m.ring
    if index is None:
        index = {s: i for i, s in enumerate(slots)}
    vec = [ring.zero()] * len(slots)
    for ins, outs in m.entries.items():
        for o, c in outs.items():
            k = index.get((ins, o))
            if k is None:
                raise ValueError(f"entry {(ins, o)} outside the slot space")
            vec[k] = c
    return vec


def vector_to_map(sources, target, degree, slots, vec):
    entries = {}
    ring = target.ring
    z = ring.zero()
    for (ins, o), c in zip(slots, vec):
        if c != z:
            entries.setdefault(ins, {})[o] = c
    return MultilinearMap(sources, target, degree, entries, check=False)


class MapSystem:
    """Simultaneous linear conditions op_i(X) = rhs_i on one unknown map X.

    `conditions` is a list of (op, rhs) pairs; each op is linear in X and
    may produce outputs of any shape (the shape is read off the rhs).
    """

    def __init__(self, sources, target, degree, conditions, allowed=None):
        self.sources = tuple(sources)
        self.target = target
        self.degree = degree
        self.ring = target.ring
        self.slots = entry_slots(sources, target, degree, allowed)
        rows = []
        rhs_vec = []
        basis_images = None
        for op, rhs in conditions:
            out_slots = entry_slots(rhs.sources, rhs.target, rhs.degree)
            index = {s: i for i, s in enumerate(out_slots)}
            cols = [
                map_to_vector(op(basis_map(sources, target, degree, slot)), out_slots, index)
                for slot in self.slots
            ]
            for i in range(len(out_slots)):
                rows.append([cols[j][i] for j in range(len(self.slots))])
            rhs_vec.extend(map_to_vector(rhs, out_slots, index))
        self.matrix = Matrix(self.ring, rows, cols=len(self.slots))
        self.rhs_vec = Matrix.column(self.ring, rhs_vec)

    def particular_solution(self):
        try:
            x = solve(self.matrix, self.rhs_vec)
        except Inconsistent:
            return None
        return vector_to_map(
            self.sources, self.target, self.degree, self.slots,
            [x.entry(i, 0) for i in range(x.rows)],
        )

    def kernel_maps(self):
        k = kernel_basis(self.matrix)
        return [
            vector_to_map(
                self.sources, self.target, self.degree, self.slots,
                [k.entry(i, j) for i in range(k.rows)],
            )
            for j in range(k.cols)
        ]

    def sample(self, rng, span=None):
        """Random exact solution: particular + random kernel combination."""
        part = self.particular_solution()
        if part is None:
            return None
        out = part
        for km in self.kernel_maps():
            c = _rand_coeff(rng, self.ring, span)
            if c != self.ring.zero():
                out = out + km.scale(c)
        return out


class MapEquation(MapSystem):
    """Single condition op(X) = rhs."""

    def __init__(self, op, sources, target, degree, rhs, allowed=None):
        super().__init__(sources, target, degree, [(op, rhs)], allowed=allowed)


def _rand_coeff(rng, ring, span=None):
    if ring.kind == "prime_field":
        return rng.randrange(ring.p)
    hi = span or 3
    return ring.canon(rng.randrange(-hi, hi + 1))


def affine_solutions(op, sources, target, degree, rhs, allowed=None):
    eq = MapEquation(op, sources, target, degree, rhs, allowed)
    return eq.particular_solution(), eq.kernel_maps()


def refine_affine(particular, kernel_maps, op2, rhs2):
    """Impose a further linear condition op2(X) = rhs2 on the affine family
    particular + span(kernel_maps).  Returns the refined family or None."""
    ring = rhs2.ring
    out_slots = entry_slots(rhs2.sources, rhs2.target, rhs2.degree)
    index = {s: i for i, s in enumerate(out_slots)}
    base = map_to_vector(op2(particular), out_slots, index)
    target_vec = map_to_vector(rhs2, out_slots, index)
    cols = [map_to_vector(op2(k), out_slots, index) for k in kernel_maps]
    mat = Matrix(
        ring,
        [[cols[j][i] for j in range(len(cols))] for i in range(len(out_slots))],
        cols=len(cols),
    )
    rhs_vec = Matrix.column(ring, [ring.sub(t, b) for t, b in zip(target_vec, base)])
    try:
        t = solve(mat, rhs_vec)
    except Inconsistent:
        return None
    new_part = particular
    for j, k in enumerate(kernel_maps):
        c = t.entry(j, 0)
        if c != ring.zero():
            new_part = new_part + k.scale(c)
    tk = kernel_basis(mat)
    new_kernel = []
    for j in range(tk.cols):
        acc = None
        for i, k in enumerate(kernel_maps):
            c = tk.entry(i, j)
            if c != ring.zero():
                acc = k.scale(c) if acc is None else acc + k.scale(c)
        if acc is not None:
            new_kernel.append(acc)
    return new_part, new_kernel


def random_affine_element(rng, particular, kernel_maps, ring, span=None):
    out = particular
    for k in kernel_maps:
        c = _rand_coeff(rng, ring, span)
        if c != ring.zero():
            out = out + k.scale(c)
    return out


def solve_map_equation(op, sources, target, degree, rhs, allowed=None):
    return MapEquation(op, sources, target, degree, rhs, allowed).particular_solution()


def sample_map_equation(rng, op, sources, target, degree, rhs, allowed=None, span=None):
    return MapEquation(op, sources, target, degree, rhs, allowed).sample(rng, span)
