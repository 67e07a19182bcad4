"""Gaussian factors on R^n and product distributions on R^n x D.

The continuous factor is handled only through its parameters: a symmetric
positive semidefinite matrix ``A`` and a mean ``t``, with characteristic
function ``exp(-<A s, s> + i <t, s>)``.  Convolution adds parameters.
"""

from __future__ import annotations

import cmath
import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np
from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from .distributions import RationalDistribution, char_fn, char_table, point_mass, shift
from .engine import Decomposition, VerifyResult, feq_residuals, verify_decomposition
from .errors import DimensionMismatchError, GroupMismatchError, PreconditionError, SizeLimitError
from .groups import GroupElement, GroupMap, _add_table, adjoint

#: psd checks use exact principal minors, so the dimension is capped.
MAX_DIMENSION = 4

Matrix = tuple[tuple[Fraction, ...], ...]


def _matrix(rows, n: int | None = None) -> Matrix:
    out = tuple(tuple(Fraction(v) for v in row) for row in rows)
    if n is not None and (len(out) != n or any(len(r) != n for r in out)):
        raise DimensionMismatchError(f"expected a {n}x{n} matrix")
    return out


def _det(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    n = len(rows)
    if n == 0:
        return Fraction(1)
    M = DomainMatrix([[QQ(v.numerator, v.denominator) for v in r] for r in rows], (n, n), QQ)
    d = M.det()
    return Fraction(int(d.numerator), int(d.denominator))


def is_psd(A: Matrix) -> bool:
    """Symmetric with every principal minor nonnegative."""
    n = len(A)
    if n > MAX_DIMENSION:
        raise SizeLimitError(f"psd test is exact only up to dimension {MAX_DIMENSION}")
    if any(A[i][j] != A[j][i] for i in range(n) for j in range(n)):
        return False
    for k in range(1, n + 1):
        for idx in itertools.combinations(range(n), k):
            if _det([[A[i][j] for j in idx] for i in idx]) < 0:
                return False
    return True


@dataclass(frozen=True)
class GaussianParams:
    """Covariance-type matrix ``A`` and mean ``t``.

    Construction checks shapes and symmetry only, so that verifiers can be
    handed a bad ``A``; use :func:`gaussian` to also enforce psd.
    """

    A: Matrix
    t: tuple[Fraction, ...]

    def __post_init__(self):
        t = tuple(Fraction(v) for v in self.t)
        A = _matrix(self.A, len(t))
        if len(t) > MAX_DIMENSION:
            raise SizeLimitError(f"dimension {len(t)} above {MAX_DIMENSION}")
        if any(A[i][j] != A[j][i] for i in range(len(t)) for j in range(len(t))):
            raise ValueError("A must be symmetric")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "t", t)

    @property
    def dim(self) -> int:
        return len(self.t)

    def __add__(self, other: "GaussianParams") -> "GaussianParams":
        if other.dim != self.dim:
            raise DimensionMismatchError("gaussian dimensions differ")
        A = tuple(tuple(a + b for a, b in zip(r1, r2)) for r1, r2 in zip(self.A, other.A))
        return GaussianParams(A, tuple(a + b for a, b in zip(self.t, other.t)))


def gaussian(A, t) -> GaussianParams:
    g = GaussianParams(_matrix(A), tuple(t))
    if not is_psd(g.A):
        raise ValueError("A is not positive semidefinite")
    return g


def degenerate(n: int) -> GaussianParams:
    return GaussianParams(tuple((Fraction(0),) * n for _ in range(n)), (Fraction(0),) * n)


def gaussian_char(g: GaussianParams, s: Sequence) -> complex:
    if len(s) != g.dim:
        raise DimensionMismatchError(f"point of dimension {len(s)} for a {g.dim}-dimensional gaussian")
    s = [float(v) for v in s]
    quad = sum(float(g.A[i][j]) * s[i] * s[j] for i in range(g.dim) for j in range(g.dim))
    lin = sum(float(g.t[i]) * s[i] for i in range(g.dim))
    return cmath.exp(complex(-quad, lin))


def _apply(M: Matrix, v: Sequence) -> list:
    return [sum(M[i][j] * v[j] for j in range(len(v))) for i in range(len(M))]


def _transpose(M: Matrix) -> Matrix:
    return tuple(zip(*M)) if M else M


def gaussian_pair_condition(g1: GaussianParams, g2: GaussianParams, eps_real) -> bool:
    """Exact test of ``A1 + e^T A2 = 0`` and ``t1 + e^T t2 = 0``.

    These are the vanishing conditions of the terms odd in ``v`` after
    substituting two gaussian characteristic functions into the symmetry
    equation on R^n.
    """
    n = g1.dim
    if g2.dim != n:
        raise DimensionMismatchError("gaussian dimensions differ")
    E = _matrix(eps_real, n)
    Et = _transpose(E)
    EtA2 = [[sum(Et[i][k] * g2.A[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
    Ett2 = _apply(Et, g2.t)
    return all(g1.A[i][j] + EtA2[i][j] == 0 for i in range(n) for j in range(n)) and all(
        a + b == 0 for a, b in zip(g1.t, Ett2)
    )


def gaussian_feq_residual(g1, g2, eps_real, u, v) -> float:
    """``|LHS - RHS|`` of the symmetry equation on R^n at ``(u, v)``."""
    E = _matrix(eps_real)
    ev = _apply(E, v)
    up = [a + b for a, b in zip(u, v)]
    um = [a - b for a, b in zip(u, v)]
    uep = [a + b for a, b in zip(u, ev)]
    uem = [a - b for a, b in zip(u, ev)]
    lhs = gaussian_char(g1, up) * gaussian_char(g2, uep)
    rhs = gaussian_char(g1, um) * gaussian_char(g2, uem)
    return abs(lhs - rhs)


def random_rational_vector(rng: random.Random, n: int, magnitude: int = 8, max_den: int = 16) -> list[Fraction]:
    """Seeded rational point with entries in ``[-magnitude, magnitude]``."""
    out = []
    for _ in range(n):
        q = rng.randint(1, max_den)
        out.append(Fraction(rng.randint(-magnitude * q, magnitude * q), q))
    return out


class ResidualSearch(NamedTuple):
    max_residual: float
    witness: tuple[list[Fraction], list[Fraction]] | None
    samples: int


def max_gaussian_residual(g1, g2, eps_real, samples: int = 1000, seed: int = 0, stop_above: float | None = None) -> ResidualSearch:
    """Largest sampled residual; stops early once it exceeds ``stop_above``."""
    rng = random.Random(seed)
    worst, witness = 0.0, None
    for k in range(1, samples + 1):
        u = random_rational_vector(rng, g1.dim)
        v = random_rational_vector(rng, g1.dim)
        r = gaussian_feq_residual(g1, g2, eps_real, u, v)
        if r > worst or witness is None:
            worst, witness = max(r, worst), (u, v)
        if stop_above is not None and worst > stop_above:
            return ResidualSearch(worst, witness, k)
    return ResidualSearch(worst, witness, samples)


@dataclass(frozen=True)
class RealAutomorphismBlock:
    """Adjoint action ``(s, h) -> (eps_real s, eps_disc h)`` on R^n x D^*."""

    eps_real: Matrix
    eps_disc: GroupMap

    def __post_init__(self):
        E = _matrix(self.eps_real)
        n = len(E)
        if any(len(r) != n for r in E):
            raise DimensionMismatchError("eps_real must be square")
        object.__setattr__(self, "eps_real", E)
        if _det(E) == 0:
            raise PreconditionError("eps_real is not invertible")
        shifted = [[E[i][j] + (1 if i == j else 0) for j in range(n)] for i in range(n)]
        if _det(shifted) == 0:
            raise PreconditionError("I + eps_real is not invertible")

    @property
    def dim(self) -> int:
        return len(self.eps_real)

    @property
    def delta_disc(self) -> GroupMap:
        return adjoint(self.eps_disc)


@dataclass(frozen=True)
class ProductDistribution:
    """``gamma * rho * E_g`` on R^n x D."""

    gamma: GaussianParams
    rho: RationalDistribution
    shift: GroupElement

    def __post_init__(self):
        if self.shift.group.orders != self.rho.group.orders:
            raise GroupMismatchError("shift is not an element of the discrete group")

    @property
    def discrete(self) -> RationalDistribution:
        return shift(self.rho, self.shift)


def product_char(mu: ProductDistribution, s: Sequence, h: GroupElement) -> complex:
    return gaussian_char(mu.gamma, s) * char_fn(mu.discrete, h).value


class ProductFeqCheck(NamedTuple):
    ok: bool
    max_residual: float
    witness: tuple | None


def check_product_feq(mu1: ProductDistribution, mu2: ProductDistribution, block: RealAutomorphismBlock,
                      sample_count: int = 100, tol: float = 1e-9, seed: int = 0) -> ProductFeqCheck:
    """Symmetry equation on R^n x D^* at sampled ``(s, s')`` and every ``(h, h')``.

    The sample list always starts with ``s = s' = 0`` so that the discrete
    equation is tested on its own.
    """
    n = block.dim
    if mu1.gamma.dim != n or mu2.gamma.dim != n:
        raise DimensionMismatchError("gaussian dimension differs from eps_real")
    G = mu1.rho.group
    if mu2.rho.group.orders != G.orders or block.eps_disc.source.orders != G.orders:
        raise GroupMismatchError("discrete parts live on different groups")
    add = _add_table(G)
    neg = G.indices(G.reduce(-G.array))
    ev = block.eps_disc.index_table
    psi1, psi2 = char_table(mu1.discrete), char_table(mu2.discrete)
    d_lhs1, d_lhs2 = psi1[add], psi2[add[:, ev]]
    d_rhs1, d_rhs2 = psi1[add[:, neg]], psi2[add[:, neg[ev]]]
    rng = random.Random(seed)
    zero = [Fraction(0)] * n
    points = [(zero, zero)] + [
        (random_rational_vector(rng, n), random_rational_vector(rng, n)) for _ in range(sample_count)
    ]
    E = block.eps_real
    worst, witness = -1.0, None
    for s, sp in points:
        esp = _apply(E, sp)
        a1 = gaussian_char(mu1.gamma, [x + y for x, y in zip(s, sp)])
        a2 = gaussian_char(mu2.gamma, [x + y for x, y in zip(s, esp)])
        b1 = gaussian_char(mu1.gamma, [x - y for x, y in zip(s, sp)])
        b2 = gaussian_char(mu2.gamma, [x - y for x, y in zip(s, esp)])
        res = np.abs(a1 * a2 * d_lhs1 * d_lhs2 - b1 * b2 * d_rhs1 * d_rhs2)
        h, hp = np.unravel_index(int(np.argmax(res)), res.shape)
        if res[h, hp] > worst:
            worst = float(res[h, hp])
            witness = (s, sp, G.elements[h], G.elements[hp])
    return ProductFeqCheck(worst <= tol, worst, witness)


def verify_full_decomposition(mu1: ProductDistribution, mu2: ProductDistribution,
                              block: RealAutomorphismBlock, dec: Decomposition) -> VerifyResult:
    """Gaussian membership, the R^n pair condition, then the discrete factorisation."""
    for j, mu in enumerate((mu1, mu2), start=1):
        if mu.gamma.dim != block.dim:
            return VerifyResult(False, f"gamma{j} has the wrong dimension")
        if not is_psd(mu.gamma.A):
            return VerifyResult(False, f"A{j} is not positive semidefinite")
    if not gaussian_pair_condition(mu1.gamma, mu2.gamma, block.eps_real):
        return VerifyResult(False, "gaussian parameters violate A1 + e^T A2 = 0, t1 + e^T t2 = 0")
    return verify_decomposition(mu1.discrete, mu2.discrete, block.delta_disc, dec)


def discrete_feq_max(mu1: ProductDistribution, mu2: ProductDistribution, block: RealAutomorphismBlock) -> float:
    return float(np.max(feq_residuals(mu1.discrete, mu2.discrete, block.delta_disc)))


def pure_gaussian(gamma: GaussianParams, group) -> ProductDistribution:
    return ProductDistribution(gamma, point_mass(group.zero), group.zero)
