"""Exact probability distributions on finite Abelian groups.

Masses are :class:`fractions.Fraction` in a dense vector indexed by the
canonical element order of the group.  Characteristic functions are the only
floating-point quantities; a value is flagged exact when it is provably 1
(support test) or provably 0 (cyclotomic remainder test).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np
import sympy

from .errors import GroupMismatchError, PreconditionError
from .groups import (
    FiniteAbelianGroup,
    GroupElement,
    GroupMap,
    Subgroup,
    _add_table,
    _from_mask,
    annihilator,
    turn_numerators,
)

#: Default tolerance for functional-equation residuals.
FEQ_TOL = 1e-9
#: Default tolerance for algebraic identities between characteristic values.
IDENTITY_TOL = 1e-12


@dataclass(frozen=True)
class RationalDistribution:
    group: FiniteAbelianGroup = field(compare=False, repr=False)
    masses: tuple[Fraction, ...]

    def __post_init__(self):
        masses = tuple(Fraction(m) for m in self.masses)
        object.__setattr__(self, "masses", masses)
        if len(masses) != self.group.order:
            raise GroupMismatchError(
                f"mass vector has length {len(masses)}, group {self.group} has order {self.group.order}"
            )
        if any(m < 0 for m in masses):
            raise ValueError("masses must be nonnegative")
        if sum(masses) != 1:
            raise ValueError(f"masses sum to {sum(masses)}, not 1")

    def __eq__(self, other):
        if not isinstance(other, RationalDistribution):
            return NotImplemented
        return self.group.orders == other.group.orders and self.masses == other.masses

    def __hash__(self):
        return hash((self.group.orders, self.masses))

    def __getitem__(self, x: GroupElement) -> Fraction:
        return self.masses[x.index]

    @cached_property
    def support_indices(self) -> tuple[int, ...]:
        return tuple(i for i, m in enumerate(self.masses) if m)

    @cached_property
    def float_masses(self) -> np.ndarray:
        return np.array([float(m) for m in self.masses])

    def __str__(self) -> str:
        return "[" + ", ".join(str(m) for m in self.masses) + "]"


class CharacteristicValue(NamedTuple):
    value: complex
    exact: bool

    def __complex__(self) -> complex:
        return self.value


def _check_same(a: RationalDistribution, b: RationalDistribution) -> None:
    if a.group.orders != b.group.orders:
        raise GroupMismatchError(f"distributions live on {a.group} and {b.group}")


def from_masses(group: FiniteAbelianGroup, masses: Sequence) -> RationalDistribution:
    return RationalDistribution(group, tuple(Fraction(m) for m in masses))


def from_mapping(group: FiniteAbelianGroup, weights: Mapping[GroupElement, Fraction]) -> RationalDistribution:
    masses = [Fraction(0)] * group.order
    for x, w in weights.items():
        masses[x.index] += Fraction(w)
    return RationalDistribution(group, tuple(masses))


def point_mass(x: GroupElement) -> RationalDistribution:
    """E_x."""
    masses = [Fraction(0)] * x.group.order
    masses[x.index] = Fraction(1)
    return RationalDistribution(x.group, tuple(masses))


def haar(K: Subgroup) -> RationalDistribution:
    """m_K, uniform on the subgroup."""
    w = Fraction(1, len(K))
    masses = [Fraction(0)] * K.parent.order
    for i in K.index_set:
        masses[i] = w
    return RationalDistribution(K.parent, tuple(masses))


def uniform_on(group: FiniteAbelianGroup, elements: Iterable[GroupElement]) -> RationalDistribution:
    idx = sorted({x.index for x in elements})
    masses = [Fraction(0)] * group.order
    for i in idx:
        masses[i] = Fraction(1, len(idx))
    return RationalDistribution(group, tuple(masses))


@lru_cache(maxsize=64)
def _sum_table(orders: tuple[int, ...]) -> np.ndarray:
    return _add_table(FiniteAbelianGroup(orders))


def convolve(mu1: RationalDistribution, mu2: RationalDistribution) -> RationalDistribution:
    _check_same(mu1, mu2)
    table = _sum_table(mu1.group.orders)
    out = [Fraction(0)] * mu1.group.order
    for i in mu1.support_indices:
        a = mu1.masses[i]
        row = table[i]
        for j in mu2.support_indices:
            out[row[j]] += a * mu2.masses[j]
    return RationalDistribution(mu1.group, tuple(out))


def shift(mu: RationalDistribution, x: GroupElement) -> RationalDistribution:
    """mu * E_x."""
    return convolve(mu, point_mass(x))


def reflect(mu: RationalDistribution) -> RationalDistribution:
    """The distribution of -xi."""
    G = mu.group
    return RationalDistribution(G, tuple(mu.masses[(-x).index] for x in G.elements))


def symmetrize(mu: RationalDistribution) -> RationalDistribution:
    """mu * reflect(mu); its characteristic function is |mu^|^2."""
    return convolve(mu, reflect(mu))


def pushforward(mu: RationalDistribution, f: GroupMap) -> RationalDistribution:
    if mu.group.orders != f.source.orders:
        raise GroupMismatchError(f"map source {f.source} differs from {mu.group}")
    out = [Fraction(0)] * f.target.order
    table = f.index_table
    for i in mu.support_indices:
        out[table[i]] += mu.masses[i]
    return RationalDistribution(f.target, tuple(out))


def support(mu: RationalDistribution) -> frozenset[GroupElement]:
    els = mu.group.elements
    return frozenset(els[i] for i in mu.support_indices)


def unit_set(mu: RationalDistribution) -> Subgroup:
    """``{y : mu^(y) = 1}``, computed as the characters trivial on the support."""
    T = turn_numerators(mu.group)
    mask = ~np.any(T[list(mu.support_indices), :] != 0, axis=0)
    return _from_mask(mu.group.dual(), mask)


@lru_cache(maxsize=None)
def _cyclotomic(n: int) -> tuple[int, ...]:
    """Coefficients of the n-th cyclotomic polynomial, lowest degree first."""
    x = sympy.Symbol("x")
    return tuple(int(c) for c in reversed(sympy.Poly(sympy.cyclotomic_poly(n, x), x).all_coeffs()))


def _cyclotomic_remainder(coeffs: list[Fraction], n: int) -> list[Fraction]:
    phi = _cyclotomic(n)
    deg = len(phi) - 1
    rem = list(coeffs)
    for top in range(len(rem) - 1, deg - 1, -1):
        c = rem[top]
        if c:
            for k in range(deg + 1):
                rem[top - deg + k] -= c * phi[k]
    return rem[:deg]


def char_fn(mu: RationalDistribution, y: GroupElement) -> CharacteristicValue:
    """``sum_x mu(x) (x, y)``."""
    G = mu.group
    if y.group.orders != G.orders:
        raise GroupMismatchError(f"character {y} is not in the dual of {G}")
    L = G.exponent
    col = turn_numerators(G)[:, y.index]
    coeffs = [Fraction(0)] * L
    for i in mu.support_indices:
        coeffs[int(col[i])] += mu.masses[i]
    if coeffs[0] == 1:
        return CharacteristicValue(1 + 0j, True)
    if not any(_cyclotomic_remainder(coeffs, L)):
        return CharacteristicValue(0j, True)
    value = sum(float(c) * cmath.exp(2j * math.pi * t / L) for t, c in enumerate(coeffs) if c)
    return CharacteristicValue(complex(value), False)


@lru_cache(maxsize=64)
def character_matrix(orders: tuple[int, ...]) -> np.ndarray:
    """``P[x, y] = exp(2 pi i pairing(x, y))``."""
    G = FiniteAbelianGroup(orders)
    T = turn_numerators(G)
    P = np.exp(2j * np.pi * T / G.exponent)
    P.setflags(write=False)
    return P


def char_table(mu: RationalDistribution) -> np.ndarray:
    """Floating characteristic function at every dual element, in canonical order."""
    # explicit sum rather than a BLAS product keeps the summation order fixed
    return (mu.float_masses[:, None] * character_matrix(mu.group.orders)).sum(axis=0)


def supported_on(mu: RationalDistribution, S: Subgroup) -> bool:
    return set(mu.support_indices) <= S.index_set


def lemma4_shifts(mu1: RationalDistribution, mu2: RationalDistribution, S: Subgroup):
    """Shift ``mu1, mu2`` into ``S`` given that ``mu1 * mu2`` is supported on ``S``.

    Returns ``(mu1 * E_{-x}, mu2 * E_x)`` for ``x`` the first support point
    of ``mu1``.
    """
    if not supported_on(convolve(mu1, mu2), S):
        raise PreconditionError("mu1 * mu2 is not supported on the subgroup")
    x = mu1.group.elements[mu1.support_indices[0]]
    return shift(mu1, -x), shift(mu2, x)


def is_haar_annihilator_indicator(K: Subgroup) -> bool:
    """Exact check that char_fn(m_K, .) is the indicator of A(Y, K)."""
    m = haar(K)
    A = annihilator(K)
    for y in K.parent.dual().elements:
        v = char_fn(m, y)
        expected = 1 if y in A else 0
        if not v.exact or v.value != expected:
            return False
    return True
