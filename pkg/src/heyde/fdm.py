"""Finite differences of functions on finite Abelian groups.

Replays the difference cascade used for the logarithms of characteristic
functions: starting from

    R(u, v) = phi1(u+v) + phi2(u+e v) - phi1(u-v) - phi2(u-e v)

three substitutions ``(u + e k1, v + k1)``, ``(u + k2, v + k2)`` and
``(u - e k3, v + k3)``, each followed by subtracting the previous equation,
leave only a triple difference of ``phi1``.  Expanding the three steps gives
the exact identity

    D_{l31} D_{l21} D_{l11} phi1(u+v)
        = sum over i1, i2, i3 in {0, 1} of
          (-1)^(3 - i1 - i2 - i3) R(u + i1 e k1 + i2 k2 - i3 e k3, v + i1 k1 + i2 k2 + i3 k3)

which holds for arbitrary ``phi1, phi2``.  Values are exact (Fractions).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .groups import (
    FiniteAbelianGroup,
    GroupElement,
    GroupMap,
    Subgroup,
    _add_table,
    identity_map,
    scalar_map,
)
from .engine import _rref


@dataclass(frozen=True)
class GroupFunction:
    group: FiniteAbelianGroup
    values: tuple

    def __post_init__(self):
        if len(self.values) != self.group.order:
            raise ValueError(f"need {self.group.order} values, got {len(self.values)}")
        object.__setattr__(self, "values", tuple(self.values))

    def __call__(self, y: GroupElement):
        return self.values[y.index]

    @classmethod
    def from_callable(cls, group: FiniteAbelianGroup, fn: Callable[[GroupElement], object]) -> "GroupFunction":
        return cls(group, tuple(fn(y) for y in group.elements))

    def is_zero(self) -> bool:
        return not any(self.values)

    def is_constant(self) -> bool:
        return all(v == self.values[0] for v in self.values)

    def restrict_is_zero(self, S: Subgroup) -> bool:
        return not any(self.values[i] for i in S.index_set)


def finite_difference(f: GroupFunction, h: GroupElement) -> GroupFunction:
    """``y -> f(y + h) - f(y)``."""
    return GroupFunction(f.group, tuple(f(y + h) - f(y) for y in f.group.elements))


def iterated_difference(f: GroupFunction, shifts: Sequence[GroupElement]) -> GroupFunction:
    for h in shifts:
        f = finite_difference(f, h)
    return f


def is_polynomial(f: GroupFunction, n: int) -> bool:
    """``D_h^(n+1) f == 0`` for every ``h``."""
    if n < 0:
        raise ValueError("degree bound must be >= 0")
    return all(iterated_difference(f, [h] * (n + 1)).is_zero() for h in f.group.elements)


def lemma2_finite_check(f: GroupFunction) -> bool:
    """Instance check of: polynomial on a finite group implies constant.

    Being annihilated by ``D_h^(n+1)`` for some ``n`` implies it for every
    larger ``n``, so testing ``n = |Y|`` covers all ``n <= |Y|``.
    """
    return f.is_constant() or not is_polynomial(f, f.group.order)


class CascadeShifts(NamedTuple):
    l11: GroupElement
    l12: GroupElement
    l13: GroupElement
    l21: GroupElement
    l22: GroupElement
    l31: GroupElement


def cascade_shifts(eps: GroupMap, k1: GroupElement, k2: GroupElement, k3: GroupElement) -> CascadeShifts:
    return CascadeShifts(
        l11=k1 + eps(k1),
        l12=2 * eps(k1),
        l13=eps(k1) - k1,
        l21=2 * k2,
        l22=k2 + eps(k2),
        l31=k3 - eps(k3),
    )


def residual(phi1: GroupFunction, phi2: GroupFunction, eps: GroupMap, u: GroupElement, v: GroupElement):
    ev = eps(v)
    return phi1(u + v) + phi2(u + ev) - phi1(u - v) - phi2(u - ev)


def cascade_terms(eps: GroupMap, k1, k2, k3, u, v) -> list[tuple[int, GroupElement, GroupElement]]:
    """The eight signed argument pairs of the expanded cascade."""
    e1, e3 = eps(k1), eps(k3)
    out = []
    for i3, i2, i1 in itertools.product((0, 1), repeat=3):
        sign = -1 if (3 - i1 - i2 - i3) % 2 else 1
        a = u + i1 * e1 + i2 * k2 - i3 * e3
        b = v + i1 * k1 + i2 * k2 + i3 * k3
        out.append((sign, a, b))
    return out


def triple_difference_at(phi1: GroupFunction, shifts: CascadeShifts, y: GroupElement):
    total = Fraction(0)
    for i, j, k in itertools.product((0, 1), repeat=3):
        sign = -1 if (3 - i - j - k) % 2 else 1
        total += sign * phi1(y + i * shifts.l11 + j * shifts.l21 + k * shifts.l31)
    return total


def cascade_identity_check(phi1: GroupFunction, phi2: GroupFunction, eps: GroupMap,
                           k1: GroupElement, k2: GroupElement, k3: GroupElement,
                           u: GroupElement, v: GroupElement) -> bool:
    """Exact check of the expanded cascade identity at one ``(u, v)``."""
    lhs = triple_difference_at(phi1, cascade_shifts(eps, k1, k2, k3), u + v)
    rhs = sum((s * residual(phi1, phi2, eps, a, b) for s, a, b in cascade_terms(eps, k1, k2, k3, u, v)), Fraction(0))
    return lhs == rhs


class CascadeGridCheck(NamedTuple):
    ok: bool
    witness: tuple[GroupElement, GroupElement] | None


def cascade_identity_grid(phi1: GroupFunction, phi2: GroupFunction, eps: GroupMap,
                          k1: GroupElement, k2: GroupElement, k3: GroupElement) -> CascadeGridCheck:
    """The cascade identity at every ``(u, v)`` at once, via index tables."""
    G = phi1.group
    add = _add_table(G)
    neg = G.indices(G.reduce(-G.array))
    ev = eps.index_table
    p1 = np.array(phi1.values, dtype=object)
    p2 = np.array(phi2.values, dtype=object)
    R = p1[add] + p2[add[:, ev]] - p1[add[:, neg]] - p2[add[:, neg[ev]]]
    rhs = np.zeros_like(R)
    for sign, a, b in cascade_terms(eps, k1, k2, k3, G.zero, G.zero):
        term = R[np.ix_(add[:, a.index], add[:, b.index])]
        rhs = rhs + term if sign > 0 else rhs - term
    s = cascade_shifts(eps, k1, k2, k3)
    triple = np.array([triple_difference_at(phi1, s, y) for y in G.elements], dtype=object)
    bad = np.argwhere(triple[add] != rhs)
    if len(bad):
        u, v = bad[0]
        return CascadeGridCheck(False, (G.elements[u], G.elements[v]))
    return CascadeGridCheck(True, None)


def subgroup_B(eps: GroupMap, W: Subgroup) -> Subgroup:
    """``(I + e) W  &  (I - e) W  &  2 W``."""
    I = identity_map(eps.source)
    return (I + eps).image_of(W) & (I - eps).image_of(W) & scalar_map(eps.source, 2).image_of(W)


def zero_residual_pairs(group: FiniteAbelianGroup, eps: GroupMap) -> list[tuple[GroupFunction, GroupFunction]]:
    """Basis of the rational solution space of ``R(u, v) = 0`` for all ``u, v``."""
    N = group.order
    rows = []
    seen = set()
    for u in group.elements:
        for v in group.elements:
            row = [Fraction(0)] * (2 * N)
            ev = eps(v)
            row[(u + v).index] += 1
            row[N + (u + ev).index] += 1
            row[(u - v).index] -= 1
            row[N + (u - ev).index] -= 1
            key = tuple(row)
            if any(row) and key not in seen:
                seen.add(key)
                rows.append(row)
    reduced, pivots = _rref(rows, 2 * N)
    free = [c for c in range(2 * N) if c not in pivots]
    out = []
    for c in free:
        vec = [Fraction(0)] * (2 * N)
        vec[c] = Fraction(1)
        for row, p in zip(reduced, pivots):
            vec[p] = -row[c]
        out.append((GroupFunction(group, tuple(vec[:N])), GroupFunction(group, tuple(vec[N:]))))
    return out
