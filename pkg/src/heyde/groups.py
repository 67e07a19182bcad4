"""Finite Abelian groups Z_{d1} x ... x Z_{dk}, their characters and endomorphisms.

Groups are kept in the cyclic-factor presentation they were built with; no
normal form is computed.  The dual of a group is identified with the group
itself (same orders list), the pairing of ``x`` and ``y`` being the turn
``sum(x_i * y_i / d_i) mod 1``.

Everything here is exact.  Element scans are vectorised with numpy but only
ever on integer arrays.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from .errors import (
    GroupMismatchError,
    InvalidOrderError,
    NotAHomomorphismError,
    PreconditionError,
    SizeLimitError,
)

#: Largest group order on which element-wise scans are allowed.
ELEMENT_BOUND = 10_000
#: Largest group order on which the full subgroup lattice is enumerated.
LATTICE_BOUND = 256
#: Largest group order on which automorphisms are enumerated.
AUTOMORPHISM_BOUND = 64
#: Largest number of candidate endomorphisms scanned by :func:`automorphisms`.
ENDOMORPHISM_SCAN_BOUND = 2_000_000
#: Largest number of subgroups produced by :func:`subgroups`.
SUBGROUP_COUNT_BOUND = 50_000


@dataclass(frozen=True)
class FiniteAbelianGroup:
    """The group Z_{d1} x ... x Z_{dk} given by its list of cyclic orders."""

    orders: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "orders", tuple(int(d) for d in self.orders))

    @property
    def rank(self) -> int:
        return len(self.orders)

    @cached_property
    def order(self) -> int:
        return math.prod(self.orders)

    @cached_property
    def exponent(self) -> int:
        return math.lcm(*self.orders) if self.orders else 1

    @cached_property
    def strides(self) -> tuple[int, ...]:
        out = []
        s = 1
        for d in reversed(self.orders):
            out.append(s)
            s *= d
        return tuple(reversed(out))

    @cached_property
    def array(self) -> np.ndarray:
        """All elements as an ``(N, k)`` integer array in canonical order."""
        if not self.orders:
            return np.zeros((1, 0), dtype=np.int64)
        grids = np.indices(self.orders, dtype=np.int64).reshape(self.rank, -1)
        return grids.T.copy()

    @cached_property
    def elements(self) -> tuple["GroupElement", ...]:
        return tuple(GroupElement(self, tuple(int(c) for c in row)) for row in self.array)

    def __iter__(self) -> Iterator["GroupElement"]:
        return iter(self.elements)

    def __len__(self) -> int:
        return self.order

    def __str__(self) -> str:
        if not self.orders:
            return "Z1"
        return " x ".join(f"Z{d}" for d in self.orders)

    def __repr__(self) -> str:
        return f"FiniteAbelianGroup({list(self.orders)})"

    def dual(self) -> "FiniteAbelianGroup":
        return self

    @property
    def zero(self) -> "GroupElement":
        return GroupElement(self, (0,) * self.rank)

    def element(self, coords: Iterable[int]) -> "GroupElement":
        coords = tuple(int(c) for c in coords)
        if len(coords) != self.rank:
            raise GroupMismatchError(
                f"element {coords} has {len(coords)} coordinates, group {self} has rank {self.rank}"
            )
        return GroupElement(self, tuple(c % d for c, d in zip(coords, self.orders)))

    def index(self, x: "GroupElement") -> int:
        return sum(c * s for c, s in zip(x.coords, self.strides))

    def indices(self, rows: np.ndarray) -> np.ndarray:
        """Canonical indices of the rows of an ``(..., k)`` array of reduced coordinates."""
        return rows @ np.asarray(self.strides, dtype=np.int64)

    def reduce(self, rows: np.ndarray) -> np.ndarray:
        return np.mod(rows, np.asarray(self.orders, dtype=np.int64))

    def element_order(self, x: "GroupElement") -> int:
        return math.lcm(*(d // math.gcd(c, d) for c, d in zip(x.coords, self.orders))) if self.rank else 1

    @cached_property
    def order_array(self) -> np.ndarray:
        if not self.rank:
            return np.ones(1, dtype=np.int64)
        d = np.asarray(self.orders, dtype=np.int64)
        per = d // np.gcd(self.array, d)
        return np.lcm.reduce(per, axis=1)

    def check_bound(self, bound: int | None = None, what: str = "element scan") -> None:
        bound = ELEMENT_BOUND if bound is None else bound
        if self.order > bound:
            raise SizeLimitError(f"{what} on {self} (order {self.order}) exceeds bound {bound}")


@dataclass(frozen=True, order=False)
class GroupElement:
    group: FiniteAbelianGroup = field(compare=False, repr=False)
    coords: tuple[int, ...]

    def __eq__(self, other):
        if not isinstance(other, GroupElement):
            return NotImplemented
        return self.coords == other.coords and self.group.orders == other.group.orders

    def __hash__(self):
        return hash((self.group.orders, self.coords))

    def __lt__(self, other: "GroupElement") -> bool:
        return self.coords < other.coords

    def _same(self, other: "GroupElement") -> None:
        if self.group.orders != other.group.orders:
            raise GroupMismatchError(f"{self} and {other} live in different groups")

    def __add__(self, other: "GroupElement") -> "GroupElement":
        self._same(other)
        return self.group.element(a + b for a, b in zip(self.coords, other.coords))

    def __sub__(self, other: "GroupElement") -> "GroupElement":
        self._same(other)
        return self.group.element(a - b for a, b in zip(self.coords, other.coords))

    def __neg__(self) -> "GroupElement":
        return self.group.element(-a for a in self.coords)

    def __rmul__(self, n: int) -> "GroupElement":
        return self.group.element(n * a for a in self.coords)

    def __bool__(self) -> bool:
        return any(self.coords)

    @property
    def index(self) -> int:
        return self.group.index(self)

    @property
    def order(self) -> int:
        return self.group.element_order(self)

    def __str__(self) -> str:
        return "(" + ",".join(str(c) for c in self.coords) + ")"

    def __repr__(self) -> str:
        return f"GroupElement{self}"


def make_group(orders: Sequence[int], bound: int | None = None) -> FiniteAbelianGroup:
    """Build ``Z_{d1} x ... x Z_{dk}``.

    ``bound`` caps the total order (default :data:`ELEMENT_BOUND`) since every
    downstream operation enumerates elements.
    """
    orders = [int(d) for d in orders]
    for d in orders:
        if d < 1:
            raise InvalidOrderError(f"cyclic order must be >= 1, got {d}")
    group = FiniteAbelianGroup(tuple(orders))
    group.check_bound(bound, "group construction")
    return group


def pairing(x: GroupElement, y: GroupElement) -> Fraction:
    """Value of the character ``y`` at ``x`` as an exact turn in ``[0, 1)``."""
    if x.group.orders != y.group.orders:
        raise GroupMismatchError(
            f"pairing needs identical orders lists, got {list(x.group.orders)} and {list(y.group.orders)}"
        )
    return sum((Fraction(a * b, d) for a, b, d in zip(x.coords, y.coords, x.group.orders)), Fraction(0)) % 1


def turn_numerators(group: FiniteAbelianGroup) -> np.ndarray:
    """``T[x, y]`` = pairing(x, y) * exponent, as integers mod the exponent."""
    return _turn_table(group)


_TURN_CACHE: dict[tuple[int, ...], np.ndarray] = {}


def _turn_table(group: FiniteAbelianGroup) -> np.ndarray:
    table = _TURN_CACHE.get(group.orders)
    if table is None:
        group.check_bound()
        L = group.exponent
        weights = np.asarray([L // d for d in group.orders], dtype=np.int64)
        arr = group.array
        table = np.mod((arr * weights) @ arr.T, L)
        table.setflags(write=False)
        _TURN_CACHE[group.orders] = table
    return table


# ---------------------------------------------------------------------------
# Subgroups


@dataclass(frozen=True)
class Subgroup:
    """A subgroup stored as its sorted element list.

    Equality and hashing look only at the parent orders and the elements;
    ``generators`` is informational.
    """

    parent: FiniteAbelianGroup = field(compare=False, repr=False)
    elements: tuple[GroupElement, ...]
    generators: tuple[GroupElement, ...] = field(default=(), compare=False)

    def __hash__(self):
        return hash((self.parent.orders, self.elements))

    def __eq__(self, other):
        if not isinstance(other, Subgroup):
            return NotImplemented
        return self.parent.orders == other.parent.orders and self.elements == other.elements

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[GroupElement]:
        return iter(self.elements)

    def __contains__(self, x: GroupElement) -> bool:
        return x.index in self.index_set

    @cached_property
    def index_set(self) -> frozenset[int]:
        return frozenset(x.index for x in self.elements)

    @cached_property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.parent.order, dtype=bool)
        m[sorted(self.index_set)] = True
        return m

    @property
    def order(self) -> int:
        return len(self.elements)

    def is_trivial(self) -> bool:
        return len(self.elements) == 1

    def is_whole(self) -> bool:
        return len(self.elements) == self.parent.order

    def issubset(self, other: "Subgroup") -> bool:
        return self.index_set <= other.index_set

    def __and__(self, other: "Subgroup") -> "Subgroup":
        return _from_mask(self.parent, self.mask & other.mask)

    def __add__(self, other: "Subgroup") -> "Subgroup":
        return generated_subgroup(self.parent, list(self.generators or self.elements) + list(other.generators or other.elements))

    def sort_key(self):
        return (len(self.elements), tuple(x.coords for x in self.elements))

    def __str__(self) -> str:
        if self.is_whole():
            return "full"
        return "{" + ", ".join(str(x) for x in self.elements) + "}"


def _from_mask(group: FiniteAbelianGroup, mask: np.ndarray, generators=()) -> Subgroup:
    els = group.elements
    return Subgroup(group, tuple(els[i] for i in np.flatnonzero(mask)), tuple(generators))


def trivial_subgroup(group: FiniteAbelianGroup) -> Subgroup:
    return Subgroup(group, (group.zero,), ())


def whole_group(group: FiniteAbelianGroup) -> Subgroup:
    gens = tuple(group.element(tuple(int(i == j) for j in range(group.rank))) for i in range(group.rank))
    return Subgroup(group, group.elements, gens)


def generated_subgroup(group: FiniteAbelianGroup, generators: Iterable[GroupElement]) -> Subgroup:
    """Smallest subgroup containing ``generators``."""
    group.check_bound()
    gens = tuple(generators)
    mask = np.zeros(group.order, dtype=bool)
    mask[0] = True
    orders = np.asarray(group.orders, dtype=np.int64)
    current = group.array[:1]
    for g in gens:
        if g.group.orders != group.orders:
            raise GroupMismatchError(f"generator {g} is not in {group}")
        step = np.asarray(g.coords, dtype=np.int64)
        multiples = np.mod(np.arange(g.order, dtype=np.int64)[:, None] * step, orders)
        current = np.mod(current[:, None, :] + multiples[None, :, :], orders).reshape(-1, group.rank)
        idx = np.unique(group.indices(current))
        current = group.array[idx]
    mask[group.indices(current)] = True
    return _from_mask(group, mask, gens)


# ---------------------------------------------------------------------------
# Maps


@dataclass(frozen=True)
class GroupMap:
    """Homomorphism ``x -> M x`` with coordinate-wise reduction in the target.

    ``matrix[i][j]`` is coordinate ``i`` of the image of the ``j``-th
    generator of the source.
    """

    source: FiniteAbelianGroup
    target: FiniteAbelianGroup
    matrix: tuple[tuple[int, ...], ...]

    def __call__(self, x: GroupElement) -> GroupElement:
        if x.group.orders != self.source.orders:
            raise GroupMismatchError(f"{x} is not in the source group {self.source}")
        return self.target.element(sum(m * c for m, c in zip(row, x.coords)) for row in self.matrix)

    @cached_property
    def np_matrix(self) -> np.ndarray:
        return np.asarray(self.matrix, dtype=np.int64).reshape(self.target.rank, self.source.rank)

    @cached_property
    def index_table(self) -> np.ndarray:
        """``table[i]`` = index of the image of the ``i``-th source element."""
        self.source.check_bound()
        rows = self.target.reduce(self.source.array @ self.np_matrix.T)
        return self.target.indices(rows)

    def is_endomorphism(self) -> bool:
        return self.source.orders == self.target.orders

    def compose(self, other: "GroupMap") -> "GroupMap":
        """``self o other``."""
        if other.target.orders != self.source.orders:
            raise GroupMismatchError("maps are not composable")
        product = self.np_matrix @ other.np_matrix
        return make_map(product.tolist(), other.source, self.target)

    def __add__(self, other: "GroupMap") -> "GroupMap":
        if (self.source.orders, self.target.orders) != (other.source.orders, other.target.orders):
            raise GroupMismatchError("maps have different source/target")
        return make_map((self.np_matrix + other.np_matrix).tolist(), self.source, self.target)

    def __neg__(self) -> "GroupMap":
        return make_map((-self.np_matrix).tolist(), self.source, self.target)

    def __sub__(self, other: "GroupMap") -> "GroupMap":
        return self + (-other)

    def image_of(self, subgroup: Subgroup) -> Subgroup:
        mask = np.zeros(self.target.order, dtype=bool)
        mask[self.index_table[sorted(subgroup.index_set)]] = True
        return _from_mask(self.target, mask, tuple(self(g) for g in subgroup.generators))

    def __str__(self) -> str:
        return "[" + ", ".join("[" + ", ".join(str(v) for v in row) + "]" for row in self.matrix) + "]"


def make_map(matrix, source: FiniteAbelianGroup, target: FiniteAbelianGroup | None = None) -> GroupMap:
    """Validate and reduce an integer matrix as a homomorphism ``source -> target``."""
    target = source if target is None else target
    rows = [list(r) for r in matrix]
    if source.rank == 0 or target.rank == 0:
        rows = [[0] * source.rank for _ in range(target.rank)]
    if len(rows) != target.rank or any(len(r) != source.rank for r in rows):
        raise NotAHomomorphismError(
            f"matrix shape must be {target.rank}x{source.rank} for {source} -> {target}"
        )
    reduced = []
    for i, row in enumerate(rows):
        di = target.orders[i]
        reduced.append(tuple(int(v) % di for v in row))
    for j, dj in enumerate(source.orders):
        for i, di in enumerate(target.orders):
            if (dj * reduced[i][j]) % di:
                raise NotAHomomorphismError(
                    f"generator {j} has order {dj} but its image coordinate {reduced[i][j]} "
                    f"in Z{di} does not satisfy {dj}*{reduced[i][j]} = 0"
                )
    return GroupMap(source, target, tuple(reduced))


def identity_map(group: FiniteAbelianGroup) -> GroupMap:
    return scalar_map(group, 1)


def scalar_map(group: FiniteAbelianGroup, n: int) -> GroupMap:
    """Multiplication by ``n`` (the map written f_n in the literature)."""
    return make_map([[n if i == j else 0 for j in range(group.rank)] for i in range(group.rank)], group)


def kernel(f: GroupMap) -> Subgroup:
    return _from_mask(f.source, f.index_table == 0)


def image(f: GroupMap) -> Subgroup:
    mask = np.zeros(f.target.order, dtype=bool)
    mask[f.index_table] = True
    return _from_mask(f.target, mask)


def is_automorphism(f: GroupMap) -> bool:
    if not f.is_endomorphism():
        raise PreconditionError("is_automorphism needs source == target")
    return len(np.unique(f.index_table)) == f.source.order


def adjoint(f: GroupMap) -> GroupMap:
    """The map ``e`` on the dual with ``pairing(f x, y) == pairing(x, e y)``.

    For orders ``d`` the entries are ``e[j][i] = M[i][j] * d_j / d_i``, which
    are integers exactly because ``f`` is well defined.
    """
    src, tgt = f.source, f.target
    out = [[0] * tgt.rank for _ in range(src.rank)]
    for i, di in enumerate(tgt.orders):
        for j, dj in enumerate(src.orders):
            out[j][i] = f.matrix[i][j] * dj // di
    return make_map(out, tgt.dual(), src.dual())


class HeydeCheck(NamedTuple):
    ok: bool
    witness: GroupElement | None


def check_heyde_condition(delta: GroupMap) -> HeydeCheck:
    """Test ``Ker(I + delta) = {0}``; on failure return a nonzero kernel element."""
    if not delta.is_endomorphism() or not is_automorphism(delta):
        raise PreconditionError(f"delta = {delta} is not an automorphism of {delta.source}")
    ker = kernel(identity_map(delta.source) + delta)
    if ker.is_trivial():
        return HeydeCheck(True, None)
    return HeydeCheck(False, ker.elements[1])


def annihilator(K: Subgroup, other: FiniteAbelianGroup | None = None) -> Subgroup:
    """``A(X, K)``: elements of ``other`` pairing trivially with all of ``K``."""
    X = K.parent.dual() if other is None else other
    if X.orders != K.parent.orders:
        raise GroupMismatchError("annihilator needs a group with the same orders list")
    table = _turn_table(X)
    cols = sorted(K.index_set)
    mask = ~np.any(table[:, cols] != 0, axis=1)
    return _from_mask(X, mask)


def torsion(group: FiniteAbelianGroup, n: int) -> Subgroup:
    """``X_(n) = Ker f_n``."""
    return kernel(scalar_map(group, n))


def multiples(group: FiniteAbelianGroup, n: int) -> Subgroup:
    """``X^(n) = f_n(X)``."""
    return image(scalar_map(group, n))


def _prime_factors(n: int) -> set[int]:
    out = set()
    p = 2
    while p * p <= n:
        while n % p == 0:
            out.add(p)
            n //= p
        p += 1
    if n > 1:
        out.add(n)
    return out


def p_component(group: FiniteAbelianGroup, p: int) -> Subgroup:
    """Elements whose order is a power of ``p``."""
    group.check_bound()
    orders = group.order_array
    mask = np.array([_prime_factors(int(o)) <= {p} for o in orders], dtype=bool)
    return _from_mask(group, mask)


def odd_part(group: FiniteAbelianGroup) -> Subgroup:
    """Subgroup of all elements of odd order."""
    return _from_mask(group, group.order_array % 2 == 1)


def split_2_odd(group: FiniteAbelianGroup) -> tuple[Subgroup, Subgroup]:
    return p_component(group, 2), odd_part(group)


def has_order_two_element(S: Subgroup) -> bool:
    return bool(np.any(S.parent.order_array[sorted(S.index_set)] == 2))


def subgroups(group: FiniteAbelianGroup, bound: int | None = None) -> list[Subgroup]:
    """The full subgroup lattice, sorted by (size, elements).

    Built by closing every known subgroup under one extra cyclic generator;
    each subgroup of a finite Abelian group arises this way from a smaller one.
    """
    group.check_bound(LATTICE_BOUND if bound is None else bound, "subgroup lattice")
    table = _add_table(group)
    cyclic: dict[frozenset, np.ndarray] = {}
    for i in range(group.order):
        m = _cyclic_mask(table, i)
        cyclic.setdefault(frozenset(np.flatnonzero(m).tolist()), m)
    cyclic_masks = list(cyclic.values())
    start = np.zeros(group.order, dtype=bool)
    start[0] = True
    seen = {start.tobytes(): start}
    frontier = [start]
    while frontier:
        nxt = []
        for S in frontier:
            for C in cyclic_masks:
                if np.all(S[C]):
                    continue
                J = _join(table, S, C)
                key = J.tobytes()
                if key not in seen:
                    seen[key] = J
                    nxt.append(J)
                    if len(seen) > SUBGROUP_COUNT_BOUND:
                        raise SizeLimitError(f"{group} has more than {SUBGROUP_COUNT_BOUND} subgroups")
        frontier = nxt
    out = [_from_mask(group, m) for m in seen.values()]
    out = [Subgroup(group, S.elements, _small_generators(group, S)) for S in out]
    return sorted(out, key=Subgroup.sort_key)


def _add_table(group: FiniteAbelianGroup) -> np.ndarray:
    arr = group.array
    sums = group.reduce(arr[:, None, :] + arr[None, :, :])
    return group.indices(sums)


def _cyclic_mask(table: np.ndarray, i: int) -> np.ndarray:
    m = np.zeros(table.shape[0], dtype=bool)
    j = 0
    while not m[j]:
        m[j] = True
        j = table[j, i]
    return m


def _join(table: np.ndarray, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    m = np.zeros(table.shape[0], dtype=bool)
    m[np.unique(table[np.ix_(np.flatnonzero(A), np.flatnonzero(B))])] = True
    return m


def _small_generators(group: FiniteAbelianGroup, S: Subgroup) -> tuple[GroupElement, ...]:
    gens: list[GroupElement] = []
    span = trivial_subgroup(group)
    for x in sorted(S.elements, key=lambda e: (-e.order, e.coords)):
        if len(span) == len(S):
            break
        if x not in span:
            gens.append(x)
            span = generated_subgroup(group, gens)
    return tuple(gens)


def is_invariant(S: Subgroup, delta: GroupMap) -> bool:
    """``delta(S) = S``."""
    return delta.image_of(S) == S


def invariant_subgroups(group: FiniteAbelianGroup, delta: GroupMap, bound: int | None = None) -> list[Subgroup]:
    return [S for S in subgroups(group, bound) if is_invariant(S, delta)]


def endomorphism_count(group: FiniteAbelianGroup) -> int:
    return math.prod(math.gcd(di, dj) for di in group.orders for dj in group.orders)


def endomorphisms(group: FiniteAbelianGroup) -> Iterator[GroupMap]:
    """Every well-defined matrix ``group -> group``, lexicographically."""
    total = endomorphism_count(group)
    if total > ENDOMORPHISM_SCAN_BOUND:
        raise SizeLimitError(f"{group} has {total} endomorphisms, above scan bound {ENDOMORPHISM_SCAN_BOUND}")
    d = group.orders
    # entry (i, j) must be a multiple of d_i / gcd(d_i, d_j)
    ranges = [range(0, d[i], d[i] // math.gcd(d[i], d[j])) for i in range(group.rank) for j in range(group.rank)]
    for flat in itertools.product(*ranges):
        rows = tuple(tuple(flat[i * group.rank:(i + 1) * group.rank]) for i in range(group.rank))
        yield GroupMap(group, group, rows)


def automorphisms(group: FiniteAbelianGroup, bound: int | None = None) -> list[GroupMap]:
    """All automorphisms, in lexicographic order of their matrices."""
    group.check_bound(AUTOMORPHISM_BOUND if bound is None else bound, "automorphism enumeration")
    total = endomorphism_count(group)
    if total > ENDOMORPHISM_SCAN_BOUND:
        raise SizeLimitError(f"{group} has {total} endomorphisms, above scan bound {ENDOMORPHISM_SCAN_BOUND}")
    k, N = group.rank, group.order
    if k == 0:
        return [identity_map(group)]
    # Admissible images of generator j: elements x with d_j * x = 0.
    columns = []
    for dj in group.orders:
        ok = np.all(np.mod(group.array * dj, group.orders) == 0, axis=1)
        columns.append(group.array[ok])
    choices = [np.arange(len(c)) for c in columns]
    combos = np.array(list(itertools.product(*choices)), dtype=np.int64).reshape(-1, k)
    arr = group.array
    orders = np.asarray(group.orders, dtype=np.int64)
    strides = np.asarray(group.strides, dtype=np.int64)
    found = []
    chunk = max(1, 4_000_000 // max(1, N * k))
    for start in range(0, len(combos), chunk):
        block = combos[start:start + chunk]
        # mats[b, i, j]: coordinate i of the image of generator j
        mats = np.stack([columns[j][block[:, j]] for j in range(k)], axis=2)
        imgs = np.mod(np.einsum("bij,nj->bni", mats, arr), orders)
        idx = np.sort(imgs @ strides, axis=1)
        bij = np.all(np.diff(idx, axis=1) != 0, axis=1) if N > 1 else np.ones(len(block), dtype=bool)
        for b in np.flatnonzero(bij):
            found.append(GroupMap(group, group, tuple(tuple(int(v) for v in row) for row in mats[b])))
    return sorted(found, key=lambda f: f.matrix)
