"""Multilinear shift calculus: s_k, omega_k, and the kbar-shift of a map.

Two distinct conventions coexist and must not be conflated:

  * a *complex* shifts with a sign on its differential:
        V[k]_i = V_{i+k},   d_{V[k]} = (-1)^k (s_k d omega_k);
  * a *map* shifts by plain conjugation with the Koszul tensor of the
    witnesses,
        alpha[kbar] = s_k o alpha o (omega_{k_1} (x) ... (x) omega_{k_l}),
    whose signs come out of the tensor evaluation (none at arity 1).

Composite shifts are deliberately never collapsed: [kbar][tbar] differs
from [kbar + tbar] by a sign, available explicitly via collapse_composite.

Shifted generators are renamed "x" -> "x[k]" with cancellation ("x[-1]"
shifted by 1 is again "x"), so round trips are bit-identical.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .graded import (
    ChainComplex,
    Gen,
    GradedModule,
    MultilinearMap,
    ShapeError,
    commutator,
    compose,
    tensor_maps,
)

_SUFFIX = re.compile(r"^(.*)\[(-?\d+)\]$")


def shift_gen_name(name, k):
    if k == 0:
        return name
    m = _SUFFIX.match(name)
    if m:
        base, j = m.group(1), int(m.group(2))
        t = j + k
        return base if t == 0 else f"{base}[{t}]"
    return f"{name}[{k}]"


@dataclass(frozen=True)
class ShiftSignature:
    input_shifts: tuple
    output_shift: int

    def __post_init__(self):
        object.__setattr__(self, "input_shifts", tuple(self.input_shifts))

    @property
    def arity(self):
        return len(self.input_shifts)

    def __neg__(self):
        return ShiftSignature(tuple(-k for k in self.input_shifts), -self.output_shift)

    def __add__(self, other):
        if self.arity != other.arity:
            raise ShapeError("shift signature arity mismatch")
        return ShiftSignature(
            tuple(a + b for a, b in zip(self.input_shifts, other.input_shifts)),
            self.output_shift + other.output_shift,
        )


def sig(*parts):
    """sig(k1, ..., kl, k) builds the signature (k1,...,kl; k)."""
    if not parts:
        raise ShapeError("empty shift signature")
    return ShiftSignature(tuple(parts[:-1]), parts[-1])


def shift_module(mod, k):
    gens = [Gen(shift_gen_name(g.name, k), g.degree - k, g.level) for g in mod.gens]
    return GradedModule(mod.ring, gens)


def shift_witnesses(mod, k):
    """(s_k: V -> V[k] of degree -k, omega_k: V[k] -> V of degree +k)."""
    sm = shift_module(mod, k)
    one = mod.ring.one()
    s = MultilinearMap([mod], sm, -k, {(i,): {i: one} for i in range(mod.rank)}, check=False)
    w = MultilinearMap([sm], mod, k, {(i,): {i: one} for i in range(mod.rank)}, check=False)
    return s, w


def shift_complex(cx, k):
    """Shifted complex with differential (-1)^k d; returns (C[k], s_k, omega_k)."""
    s, w = shift_witnesses(cx.module, k)
    d = compose(s, compose(cx.differential, w))
    if k % 2:
        d = -d
    shifted = ChainComplex(s.target, d, check=False)
    return shifted, s, w


def shift_map(alpha, kbar):
    """alpha[kbar] = s_k alpha (omega_{k_1} (x) ... (x) omega_{k_l})."""
    if kbar.arity != alpha.arity:
        raise ShapeError("shift signature arity mismatch")
    s, _ = shift_witnesses(alpha.target, kbar.output_shift)
    if alpha.arity == 0:
        out = compose(s, alpha)
    else:
        omegas = [shift_witnesses(m, k)[1] for m, k in zip(alpha.sources, kbar.input_shifts)]
        out = compose(s, compose(alpha, tensor_maps(omegas)))
    expected = alpha.degree + sum(kbar.input_shifts) - kbar.output_shift
    if out.degree != expected:
        raise ShapeError("degree bookkeeping violated in shift")
    return out


def cross_sign(first, second):
    """Parity of sum_{i<j} second_i * first_j (collapse correction exponent)."""
    ks = first.input_shifts
    ts = second.input_shifts
    e = 0
    for i in range(len(ks)):
        for j in range(i + 1, len(ks)):
            e += ts[i] * ks[j]
    return (-1) ** (e % 2)


def collapse_composite(alpha, kbar, tbar):
    """The single-signature shift alpha[kbar + tbar], computed from the
    composite alpha[kbar][tbar] with the correction sign

        alpha[kbar + tbar] = (-1)^{sum_{i<j} t_i k_j} alpha[kbar][tbar].

    Collapsing silently (without this sign) is precisely the bug the shift
    remarks warn against, so it is only available through this operation.
    """
    composite = shift_map(shift_map(alpha, kbar), tbar)
    out = composite.scale(cross_sign(kbar, tbar))
    return out


@dataclass
class IdentityCheck:
    name: str
    ok: bool
    witness: object = None


@dataclass
class ShiftReport:
    checks: list

    @property
    def ok(self):
        return all(c.ok for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.ok]


def _first_diff(a, b):
    keys = set(a.entries) | set(b.entries)
    for k in sorted(keys):
        if a.entries.get(k, {}) != b.entries.get(k, {}):
            return {"inputs": k, "lhs": a.entries.get(k, {}), "rhs": b.entries.get(k, {})}
    return None


def _check_equal(name, lhs, rhs):
    diff = None if lhs == rhs else _first_diff(lhs, rhs)
    return IdentityCheck(name, diff is None, diff)


def verify_shift_identities(sources, target, alpha, kbar, tbar, sbar):
    """Checks the four shift identities exactly; failures carry the offending
    basis tuple (a failure signals a sign-engine bug, not bad input).

      (i)   [d, alpha[kbar]] = (-1)^k [d, alpha][kbar]
      (ii)  alpha[kbar][-kbar] = (-1)^{sum_{i<j} k_i k_j} alpha
      (iii) (-1)^{sum t_i k_j} alpha[kbar][tbar] = alpha[kbar+tbar]
                = (-1)^{sum k_i t_j} alpha[tbar][kbar]
      (iv)  alpha[kbar][tbar][sbar] picks up the three pairwise corrections
            against alpha[kbar+tbar+sbar]
    """
    checks = []

    shifted_sources = [shift_complex(c, k)[0] for c, k in zip(sources, kbar.input_shifts)]
    shifted_target, _, _ = shift_complex(target, kbar.output_shift)
    a_k = shift_map(alpha, kbar)
    lhs = commutator(shifted_sources, shifted_target, a_k)
    rhs = shift_map(commutator(sources, target, alpha), kbar)
    if kbar.output_shift % 2:
        rhs = -rhs
    checks.append(_check_equal("bracket-vs-shift", lhs, rhs))

    back = shift_map(a_k, -kbar)
    e = 0
    ks = kbar.input_shifts
    for i in range(len(ks)):
        for j in range(i + 1, len(ks)):
            e += ks[i] * ks[j]
    checks.append(_check_equal("involution-sign", back, alpha.scale((-1) ** (e % 2))))

    direct = shift_map(alpha, kbar + tbar)
    via_kt = collapse_composite(alpha, kbar, tbar)
    checks.append(_check_equal("collapse-kt", via_kt, direct))
    via_tk = collapse_composite(alpha, tbar, kbar)
    checks.append(_check_equal("collapse-tk", via_tk, direct))

    triple = shift_map(shift_map(shift_map(alpha, kbar), tbar), sbar)
    total = kbar + tbar + sbar
    corr = cross_sign(kbar, tbar)
    corr *= cross_sign(kbar, sbar)
    corr *= cross_sign(tbar, sbar)
    checks.append(_check_equal("triple-collapse", triple.scale(corr), shift_map(alpha, total)))

    return ShiftReport(checks)
