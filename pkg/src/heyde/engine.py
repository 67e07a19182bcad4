"""Conditional symmetry of L2 = xi1 + delta xi2 given L1 = xi1 + xi2.

The exact test works on the joint law of ``(L1, L2)``: the conditional law of
``L2`` given ``L1`` is symmetric iff ``P(L1=a, L2=b) = P(L1=a, L2=-b)`` for
all ``a, b``.  The characteristic-function route evaluates

    mu1^(u+v) mu2^(u+e v) = mu1^(u-v) mu2^(u-e v)

on the whole dual grid, ``e`` being the adjoint of ``delta``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np
from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from .distributions import (
    FEQ_TOL,
    RationalDistribution,
    char_table,
    convolve,
    haar,
    shift,
)
from .errors import GroupMismatchError, HeydeError, PreconditionError, SizeLimitError
from .groups import (
    FiniteAbelianGroup,
    GroupElement,
    GroupMap,
    Subgroup,
    _add_table,
    adjoint,
    automorphisms,
    check_heyde_condition,
    has_order_two_element,
    invariant_subgroups,
    is_automorphism,
    is_invariant,
    odd_part,
    p_component,
)

#: Largest number of coordinate subsets scanned when enumerating polytope vertices.
VERTEX_SCAN_BOUND = 500_000


class DecompositionNotFound(HeydeError):
    code = "no-decomposition"


def _check_inputs(mu1: RationalDistribution, mu2: RationalDistribution, delta: GroupMap) -> FiniteAbelianGroup:
    G = mu1.group
    if mu2.group.orders != G.orders or delta.source.orders != G.orders or delta.target.orders != G.orders:
        raise GroupMismatchError("mu1, mu2 and delta must share one group")
    return G


@dataclass(frozen=True)
class JointDistribution:
    """Law of ``(L1, L2)``; ``masses`` maps index pairs to nonzero masses."""

    group: FiniteAbelianGroup = field(repr=False)
    masses: dict[tuple[int, int], Fraction]

    def mass(self, a: GroupElement, b: GroupElement) -> Fraction:
        return self.masses.get((a.index, b.index), Fraction(0))

    def marginal_l1(self) -> RationalDistribution:
        out = [Fraction(0)] * self.group.order
        for (a, _), m in self.masses.items():
            out[a] += m
        return RationalDistribution(self.group, tuple(out))

    def marginal_l2(self) -> RationalDistribution:
        out = [Fraction(0)] * self.group.order
        for (_, b), m in self.masses.items():
            out[b] += m
        return RationalDistribution(self.group, tuple(out))


def joint(mu1: RationalDistribution, mu2: RationalDistribution, delta: GroupMap) -> JointDistribution:
    G = _check_inputs(mu1, mu2, delta)
    add = _add_table(G)
    dtab = delta.index_table
    out: dict[tuple[int, int], Fraction] = {}
    for i in mu1.support_indices:
        for j in mu2.support_indices:
            key = (int(add[i, j]), int(add[i, dtab[j]]))
            out[key] = out.get(key, Fraction(0)) + mu1.masses[i] * mu2.masses[j]
    return JointDistribution(G, out)


class SymmetryCheck(NamedTuple):
    ok: bool
    witness: tuple[GroupElement, GroupElement] | None = None
    mass: Fraction | None = None
    mirrored_mass: Fraction | None = None


def is_conditionally_symmetric(mu1, mu2, delta) -> SymmetryCheck:
    """Exact test; a failing result carries ``(a, b)`` with P(a,b) != P(a,-b)."""
    J = joint(mu1, mu2, delta)
    G = J.group
    neg = _neg_table(G)
    for a, b in sorted(J.masses):
        p = J.masses[(a, b)]
        q = J.masses.get((a, int(neg[b])), Fraction(0))
        if p != q:
            return SymmetryCheck(False, (G.elements[a], G.elements[b]), p, q)
    return SymmetryCheck(True)


def _neg_table(G: FiniteAbelianGroup) -> np.ndarray:
    return G.indices(G.reduce(-G.array))


class FeqCheck(NamedTuple):
    ok: bool
    max_residual: float
    witness: tuple[GroupElement, GroupElement]


def feq_residuals(mu1, mu2, delta) -> np.ndarray:
    """``|LHS - RHS|`` over the dual grid, indexed ``[u, v]``."""
    G = _check_inputs(mu1, mu2, delta)
    eps = adjoint(delta)
    add = _add_table(G)
    neg = _neg_table(G)
    phi1, phi2 = char_table(mu1), char_table(mu2)
    ev = eps.index_table
    lhs = phi1[add] * phi2[add[:, ev]]
    rhs = phi1[add[:, neg]] * phi2[add[:, neg[ev]]]
    return np.abs(lhs - rhs)


def satisfies_feq(mu1, mu2, delta, tol: float = FEQ_TOL) -> FeqCheck:
    res = feq_residuals(mu1, mu2, delta)
    u, v = np.unravel_index(int(np.argmax(res)), res.shape)
    worst = float(res[u, v])
    els = mu1.group.elements
    return FeqCheck(worst <= tol, worst, (els[u], els[v]))


def lemma1_agrees(mu1, mu2, delta, tol: float = FEQ_TOL) -> bool:
    return is_conditionally_symmetric(mu1, mu2, delta).ok == satisfies_feq(mu1, mu2, delta, tol).ok


# ---------------------------------------------------------------------------
# Partner solving


def _to_fraction(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


def symmetry_system(mu2: RationalDistribution, delta: GroupMap) -> list[list[Fraction]]:
    """Rows ``r`` with ``r . mu1 = 0`` iff the pair is conditionally symmetric.

    One row per atom ``(a, b)`` with ``b != -b``, holding the coefficient of
    ``mu1(x1)`` in ``P(a, b) - P(a, -b)``.
    """
    G = mu2.group
    add = _add_table(G)
    neg = _neg_table(G)
    dtab = delta.index_table
    N = G.order
    rows: dict[tuple[int, int], list[Fraction]] = {}
    for x1 in range(N):
        for j in mu2.support_indices:
            a, b = int(add[x1, j]), int(add[x1, dtab[j]])
            nb = int(neg[b])
            if nb == b:
                continue
            w = mu2.masses[j]
            rows.setdefault((a, b), [Fraction(0)] * N)[x1] += w
            rows.setdefault((a, nb), [Fraction(0)] * N)[x1] -= w
    return [rows[k] for k in sorted(rows)]


@dataclass(frozen=True)
class PartnerSolution:
    """Affine description of ``{mu1 : (mu1, mu2) conditionally symmetric}``.

    ``particular`` solves the equality constraints (it may have negative
    entries); ``basis`` spans the homogeneous part; ``vertices`` are the
    vertices of its intersection with the probability simplex.
    """

    group: FiniteAbelianGroup = field(repr=False)
    particular: tuple[Fraction, ...] | None
    basis: tuple[tuple[Fraction, ...], ...]
    vertices: tuple[RationalDistribution, ...]
    equations: tuple[tuple[Fraction, ...], ...] = field(repr=False, default=())

    @property
    def is_empty(self) -> bool:
        return not self.vertices

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def contains(self, mu1: RationalDistribution) -> bool:
        if mu1.group.orders != self.group.orders:
            return False
        x = mu1.masses
        return all(sum(r * m for r, m in zip(row, x)) == 0 for row in self.equations)

    def point(self, weights) -> RationalDistribution:
        """Convex combination of the vertices."""
        total = sum(Fraction(w) for w in weights)
        masses = [Fraction(0)] * self.group.order
        for w, v in zip(weights, self.vertices):
            for i, m in enumerate(v.masses):
                masses[i] += Fraction(w) / total * m
        return RationalDistribution(self.group, tuple(masses))


def _rref(rows: list[list[Fraction]], ncols: int):
    if not rows:
        return [], ()
    M = DomainMatrix([[QQ(r.numerator, r.denominator) for r in row] for row in rows], (len(rows), ncols), QQ)
    R, pivots = M.rref()
    out = [[_to_fraction(q) for q in row] for row in R.to_list()[: len(pivots)]]
    return out, tuple(pivots)


def solve_partner(mu2: RationalDistribution, delta: GroupMap) -> PartnerSolution:
    """All ``mu1`` making ``(mu1, mu2)`` conditionally symmetric."""
    G = mu2.group
    if delta.source.orders != G.orders or not is_automorphism(delta):
        raise PreconditionError("delta must be an automorphism of the group of mu2")
    N = G.order
    eqs = symmetry_system(mu2, delta)
    reduced, pivots = _rref(eqs, N)
    # normalisation row appended as the last column block: sum mu1 = 1
    aug = [row + [Fraction(0)] for row in reduced] + [[Fraction(1)] * N + [Fraction(1)]]
    full, fpiv = _rref(aug, N + 1)
    if N in fpiv:
        return PartnerSolution(G, None, (), (), tuple(map(tuple, reduced)))
    particular = [Fraction(0)] * N
    for row, p in zip(full, fpiv):
        particular[p] = row[N]
    free = [c for c in range(N) if c not in fpiv]
    basis = []
    for c in free:
        vec = [Fraction(0)] * N
        vec[c] = Fraction(1)
        for row, p in zip(full, fpiv):
            vec[p] = -row[c]
        basis.append(tuple(vec))
    vertices = _vertices(G, particular, basis)
    return PartnerSolution(G, tuple(particular), tuple(basis), tuple(vertices), tuple(map(tuple, reduced)))


def _vertices(G, particular, basis) -> list[RationalDistribution]:
    """Vertices of ``{p + B l >= 0}``: points where ``d`` independent coordinates vanish."""
    N, d = len(particular), len(basis)
    if d == 0:
        if all(x >= 0 for x in particular):
            return [RationalDistribution(G, tuple(particular))]
        return []
    if math.comb(N, d) > VERTEX_SCAN_BOUND:
        raise SizeLimitError(f"vertex enumeration needs {math.comb(N, d)} subsets, above {VERTEX_SCAN_BOUND}")
    found: dict[tuple, RationalDistribution] = {}
    for S in itertools.combinations(range(N), d):
        rows = [[basis[k][i] for k in range(d)] + [-particular[i]] for i in S]
        R, piv = _rref(rows, d + 1)
        if len(piv) != d or d in piv:
            continue
        lam = [R[k][d] for k in range(d)]
        x = tuple(particular[i] + sum(lam[k] * basis[k][i] for k in range(d)) for i in range(N))
        if all(v >= 0 for v in x) and x not in found:
            found[x] = RationalDistribution(G, x)
    return sorted(found.values(), key=lambda m: tuple(-v for v in m.masses))


# ---------------------------------------------------------------------------
# Decompositions


@dataclass(frozen=True)
class Decomposition:
    """``mu_j = rho_j * m_F * E_{g_j}``, discrete part only."""

    subgroup: Subgroup
    rho: tuple[RationalDistribution, RationalDistribution]
    shifts: tuple[GroupElement, GroupElement]


class VerifyResult(NamedTuple):
    ok: bool
    reason: str = ""


def verify_decomposition(mu1, mu2, delta, dec: Decomposition) -> VerifyResult:
    G = _check_inputs(mu1, mu2, delta)
    F = dec.subgroup
    if F.parent.orders != G.orders:
        return VerifyResult(False, "F is not a subgroup of the ambient group")
    if G.zero not in F or any((x + y) not in F for x in F for y in F):
        return VerifyResult(False, "F is not a subgroup")
    if has_order_two_element(F):
        return VerifyResult(False, "F contains order-2 element")
    if not is_invariant(F, delta):
        return VerifyResult(False, "delta(F) != F")
    D2 = p_component(G, 2)
    mF = haar(F)
    for j, (mu, rho, g) in enumerate(zip((mu1, mu2), dec.rho, dec.shifts), start=1):
        if not set(rho.support_indices) <= D2.index_set:
            return VerifyResult(False, f"support of rho{j} is not in the 2-component")
        if shift(convolve(rho, mF), g) != mu:
            return VerifyResult(False, f"rho{j} * m_F * E_g{j} does not reproduce mu{j}")
    return VerifyResult(True)


def _factor(mu: RationalDistribution, F: Subgroup, D2: Subgroup):
    """Find ``(rho, g)`` with ``mu = rho * m_F * E_g`` and rho on D2, or None."""
    G = mu.group
    mF = haar(F)
    candidates = [G.zero] + [G.elements[i] for i in mu.support_indices if i != 0]
    add = _add_table(G)
    F_idx = sorted(F.index_set)
    for g in candidates:
        nu = shift(mu, -g)
        rho = [Fraction(0)] * G.order
        for d in D2.index_set:
            rho[d] = sum((nu.masses[int(add[d, f])] for f in F_idx), Fraction(0))
        if sum(rho) != 1:
            continue
        rho_d = RationalDistribution(G, tuple(rho))
        if convolve(rho_d, mF) == nu:
            return rho_d, g
    return None


def candidate_subgroups(G: FiniteAbelianGroup, delta: GroupMap) -> list[Subgroup]:
    """delta-invariant odd-order subgroups, largest first, canonical order on ties."""
    odd = odd_part(G)
    subs = [F for F in invariant_subgroups(G, delta) if F.issubset(odd)]
    return sorted(subs, key=lambda F: (-len(F), F.sort_key()))


def extract_decomposition(mu1, mu2, delta) -> Decomposition:
    G = _check_inputs(mu1, mu2, delta)
    sym = is_conditionally_symmetric(mu1, mu2, delta)
    if not sym.ok:
        raise PreconditionError(f"pair is not conditionally symmetric, witness {sym.witness}")
    D2 = p_component(G, 2)
    for F in candidate_subgroups(G, delta):
        f1 = _factor(mu1, F, D2)
        if f1 is None:
            continue
        f2 = _factor(mu2, F, D2)
        if f2 is None:
            continue
        return Decomposition(F, (f1[0], f2[0]), (f1[1], f2[1]))
    raise DecompositionNotFound(
        f"no decomposition rho * m_F * E_g found for the symmetric pair on {G}; "
        "this would contradict the characterization"
    )


# ---------------------------------------------------------------------------
# Automorphism enumeration


class AutomorphismVerdict(NamedTuple):
    delta: GroupMap
    ok: bool
    witness: GroupElement | None


def automorphism_trace(X: FiniteAbelianGroup, bound: int | None = None) -> list[AutomorphismVerdict]:
    """Every automorphism of ``X`` with the outcome of the Ker(I+delta) test."""
    return [AutomorphismVerdict(d, *check_heyde_condition(d)) for d in automorphisms(X, bound)]


def enumerate_valid_automorphisms(X: FiniteAbelianGroup, bound: int | None = None) -> list[GroupMap]:
    return [t.delta for t in automorphism_trace(X, bound) if t.ok]


def shifted_pair(mu1, mu2, delta, x: GroupElement):
    """``(mu1 * E_{delta x}, mu2 * E_{-x})``: L1 moves by ``delta x - x``, L2 is unchanged."""
    return shift(mu1, delta(x)), shift(mu2, -x)


def coset_uniform(K: Subgroup, g: GroupElement) -> RationalDistribution:
    return shift(haar(K), g)

