from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from heyde.errors import (
    GroupMismatchError,
    InvalidOrderError,
    NotAHomomorphismError,
    PreconditionError,
    SizeLimitError,
)
from heyde.groups import (
    adjoint,
    annihilator,
    automorphisms,
    check_heyde_condition,
    endomorphisms,
    generated_subgroup,
    identity_map,
    image,
    invariant_subgroups,
    is_automorphism,
    is_invariant,
    kernel,
    make_group,
    make_map,
    p_component,
    pairing,
    scalar_map,
    split_2_odd,
    subgroups,
    trivial_subgroup,
    whole_group,
)

from conftest import oracle_apply, oracle_elements, oracle_pairing_turn, span


def coords(S):
    return [x.coords for x in S]


class TestMakeGroup:
    def test_cyclic(self):
        G = make_group([5])
        assert G.order == 5 and len(G.elements) == 5

    def test_klein(self):
        G = make_group([2, 2])
        assert len(set(G.elements)) == 4

    def test_order_180_components(self):
        G = make_group([4, 9, 5])
        assert G.order == 180
        two, odd = split_2_odd(G)
        # brute force: 2-part = elements whose order is a power of 2
        els = oracle_elements(G.orders)

        def brute_order(x):
            n = 1
            while any((n * c) % d for c, d in zip(x, G.orders)):
                n += 1
            return n

        orders = {x: brute_order(x) for x in els}
        assert set(coords(two)) == {x for x, n in orders.items() if n & (n - 1) == 0}
        assert set(coords(odd)) == {x for x, n in orders.items() if n % 2}
        assert len(two) == 4 and len(odd) == 45
        assert {x[0] for x in coords(two)} == {0, 1, 2, 3}

    @pytest.mark.parametrize("orders", [[0], [3, -1]])
    def test_invalid_order(self, orders):
        with pytest.raises(InvalidOrderError):
            make_group(orders)

    def test_size_limit(self):
        with pytest.raises(SizeLimitError):
            make_group([101, 101])
        assert make_group([101, 101], bound=20000).order == 10201

    def test_dual_has_same_orders(self):
        G = make_group([2, 6])
        assert G.dual().orders == G.orders


class TestPairing:
    def test_identity_character(self):
        G = make_group([3, 4])
        assert all(pairing(G.zero, y) == 0 for y in G)

    def test_z5(self):
        G = make_group([5])
        assert pairing(G.element([1]), G.element([2])) == Fraction(2, 5)

    def test_z2_z3(self):
        G = make_group([2, 3])
        assert pairing(G.element([1, 1]), G.element([1, 2])) == Fraction(1, 6)

    def test_mismatch(self):
        with pytest.raises(GroupMismatchError):
            pairing(make_group([6]).element([1]), make_group([2, 3]).element([1, 1]))

    @given(st.sampled_from([[5], [2, 4], [3, 3], [6]]), st.data())
    def test_bilinear(self, orders, data):
        G = make_group(orders)
        pick = st.sampled_from(G.elements)
        x, x2, y = data.draw(pick), data.draw(pick), data.draw(pick)
        assert pairing(x + x2, y) == (pairing(x, y) + pairing(x2, y)) % 1
        assert pairing(x, y) == oracle_pairing_turn(orders, x.coords, y.coords)


class TestMaps:
    def test_multiplication_by_two(self):
        G = make_group([5])
        f = make_map([[2]], G)
        assert f(G.element([3])) == G.element([1])

    def test_order_obstruction(self):
        with pytest.raises(NotAHomomorphismError):
            make_map([[1]], make_group([2]), make_group([4]))

    def test_shear_is_automorphism(self):
        X = make_group([3, 3])
        f = make_map([[1, 1], [0, 1]], X)
        imgs = {f(x) for x in X}
        assert len(imgs) == 9 and is_automorphism(f)

    def test_shape_mismatch(self):
        with pytest.raises(NotAHomomorphismError):
            make_map([[1, 0]], make_group([3, 3]))

    def test_identity_is_automorphism(self):
        assert is_automorphism(identity_map(make_group([2, 4, 3])))

    def test_doubling_z6_not_automorphism(self):
        G = make_group([6])
        f = make_map([[2]], G)
        assert not is_automorphism(f)
        assert coords(kernel(f)) == [(0,), (3,)]

    def test_order3_automorphism_klein(self):
        K = make_group([2, 2])
        assert is_automorphism(make_map([[0, 1], [1, 1]], K))

    def test_precondition(self):
        with pytest.raises(PreconditionError):
            is_automorphism(make_map([[0]], make_group([2]), make_group([4])))

    def test_compose_matches_pointwise(self):
        X = make_group([2, 4])
        fs = list(endomorphisms(X))[:12]
        for f in fs:
            for g in fs:
                h = f.compose(g)
                assert all(h(x) == f(g(x)) for x in X)


class TestAdjoint:
    def test_z5_doubling(self):
        G = make_group([5])
        f = make_map([[2]], G)
        e = adjoint(f)
        assert e.matrix == ((2,),)
        assert all(pairing(f(x), y) == pairing(x, e(y)) for x in G for y in G)

    def test_shear_transpose(self):
        X = make_group([3, 3])
        e = adjoint(make_map([[1, 1], [0, 1]], X))
        assert e.matrix == ((1, 0), (1, 1))

    def test_identity(self):
        X = make_group([2, 6])
        assert adjoint(identity_map(X)) == identity_map(X)

    def test_mixed_orders_not_transpose(self):
        # Z2 x Z4: the map (a, b) -> (b mod 2, 2a) has adjoint with rescaled entries
        X = make_group([2, 4])
        f = make_map([[0, 1], [2, 0]], X)
        e = adjoint(f)
        for x, y in product(X, X):
            assert pairing(f(x), y) == pairing(x, e(y))

    @pytest.mark.parametrize("orders", [[2, 4], [3, 3], [6], [2, 2, 2]])
    def test_involution_and_contravariance(self, orders):
        X = make_group(orders)
        fs = list(endomorphisms(X))[:40]
        for f in fs:
            assert adjoint(adjoint(f)) == f
        for f, g in zip(fs, reversed(fs)):
            assert adjoint(f.compose(g)) == adjoint(g).compose(adjoint(f))


class TestKernelImage:
    def test_f2_on_z4(self):
        G = make_group([4])
        assert coords(kernel(scalar_map(G, 2))) == [(0,), (2,)]
        assert coords(image(scalar_map(G, 2))) == [(0,), (2,)]

    def test_f2_on_z5(self):
        G = make_group([5])
        assert kernel(scalar_map(G, 2)).is_trivial()
        assert image(scalar_map(G, 2)).is_whole()

    def test_f3_on_z3z3(self):
        X = make_group([3, 3])
        assert kernel(scalar_map(X, 3)).is_whole()
        assert image(scalar_map(X, 3)).is_trivial()

    @pytest.mark.parametrize("orders", [[4], [2, 2], [3, 3], [2, 4], [6]])
    def test_automorphism_criteria_agree(self, orders):
        X = make_group(orders)
        for f in endomorphisms(X):
            triv = kernel(f).is_trivial()
            full = image(f).is_whole()
            perm = len({oracle_apply(X.orders, f.matrix, x) for x in oracle_elements(X.orders)}) == X.order
            assert triv == full == perm == is_automorphism(f)


class TestHeydeCondition:
    def test_z5(self):
        assert check_heyde_condition(make_map([[2]], make_group([5]))).ok

    def test_z6(self):
        G = make_group([6])
        ok, w = check_heyde_condition(make_map([[5]], G))
        assert not ok and w != G.zero
        assert (w + make_map([[5]], G)(w)) == G.zero

    def test_klein(self):
        assert check_heyde_condition(make_map([[0, 1], [1, 1]], make_group([2, 2]))).ok

    def test_not_automorphism(self):
        with pytest.raises(PreconditionError):
            check_heyde_condition(make_map([[2]], make_group([6])))

    @pytest.mark.parametrize("orders", [[4], [8], [2, 2], [2, 4], [3, 3], [9], [2, 2, 3]])
    def test_witness_property(self, orders):
        X = make_group(orders)
        I = identity_map(X)
        for d in automorphisms(X):
            ok, w = check_heyde_condition(d)
            if not ok:
                assert w != X.zero and (I + d)(w) == X.zero
            else:
                assert w is None and kernel(I + d).is_trivial()

    @pytest.mark.parametrize("orders", [[2, 2], [2, 4], [2, 2, 2], [4, 4], [2, 8], [2, 2, 4]])
    def test_no_fixed_points_on_2_groups(self, orders):
        # for 2-primary G, Ker(I+d)={0} forces Ker(I-d)={0}
        X = make_group(orders)
        I = identity_map(X)
        for d in automorphisms(X):
            if check_heyde_condition(d).ok:
                assert kernel(I - d).is_trivial()


class TestAnnihilator:
    def test_trivial(self):
        X = make_group([2, 3])
        assert annihilator(trivial_subgroup(X)).is_whole()

    def test_whole(self):
        X = make_group([2, 3])
        assert annihilator(whole_group(X)).is_trivial()

    def test_z6(self):
        X = make_group([6])
        A = annihilator(span(X, (3,)))
        assert coords(A) == [(0,), (2,), (4,)]
        brute = [x for x in oracle_elements((6,)) if oracle_pairing_turn((6,), x, (3,)) == 0]
        assert coords(A) == brute

    @pytest.mark.parametrize("orders", [[12], [2, 4], [3, 3], [2, 2, 2], [2, 6]])
    def test_duality(self, orders):
        X = make_group(orders)
        for S in subgroups(X):
            A = annihilator(S)
            assert len(A) * len(S) == X.order
            assert annihilator(A) == S


class TestComponents:
    def test_z12(self):
        G = make_group([12])
        two, odd = split_2_odd(G)
        assert coords(two) == [(0,), (3,), (6,), (9,)]
        assert coords(odd) == [(0,), (4,), (8,)]

    def test_z5(self):
        two, odd = split_2_odd(make_group([5]))
        assert two.is_trivial() and odd.is_whole()

    def test_klein(self):
        two, odd = split_2_odd(make_group([2, 2]))
        assert two.is_whole() and odd.is_trivial()

    def test_p_component_z45(self):
        G = make_group([9, 5])
        assert len(p_component(G, 3)) == 9 and len(p_component(G, 5)) == 5

    @pytest.mark.parametrize("orders", [[12], [2, 6], [4, 3], [2, 2, 3], [6, 6], [8, 3], [2, 2, 2, 3], [4, 4, 3]])
    def test_split_characteristic(self, orders):
        G = make_group(orders)
        two, odd = split_2_odd(G)
        assert (two & odd).is_trivial()
        assert len(two) * len(odd) == G.order
        assert (two + odd).is_whole()
        for d in automorphisms(G):
            assert is_invariant(two, d) and is_invariant(odd, d)
        assert odd == generated_subgroup(G, [x for x in G if x.order % 2])


class TestSubgroups:
    def test_prime(self):
        assert [len(S) for S in subgroups(make_group([5]))] == [1, 5]

    def test_z4(self):
        assert [coords(S) for S in subgroups(make_group([4]))] == [[(0,)], [(0,), (2,)], [(0,), (1,), (2,), (3,)]]

    def test_shear_invariant(self):
        X = make_group([3, 3])
        inv = invariant_subgroups(X, make_map([[1, 1], [0, 1]], X))
        assert [coords(S) for S in inv] == [[(0, 0)], [(0, 0), (1, 0), (2, 0)], coords(whole_group(X))]

    @pytest.mark.parametrize("orders,count", [([2, 2], 5), ([3, 3], 6), ([2, 4], 8), ([2, 2, 2], 16), ([12], 6), ([4, 4], 15)])
    def test_counts(self, orders, count):
        subs = subgroups(make_group(orders))
        assert len(subs) == count == len(set(subs))
        for S in subs:
            assert make_group(orders).order % len(S) == 0
            assert all((x + y) in S and (-x) in S for x in S for y in S)

    def test_brute_force_lattice(self):
        # every subset closed under + is found
        X = make_group([2, 4])
        els = X.elements
        closed = set()
        for mask in range(1, 1 << len(els)):
            S = [els[i] for i in range(len(els)) if mask >> i & 1]
            Sset = set(S)
            if X.zero in Sset and all(x + y in Sset for x in S for y in S):
                closed.add(tuple(sorted(x.coords for x in S)))
        assert closed == {tuple(coords(S)) for S in subgroups(X)}

    def test_lattice_bound(self):
        with pytest.raises(SizeLimitError):
            subgroups(make_group([257]))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([[5], [6], [3, 3], [2, 4], [2, 2, 2], [9]]), st.data())
def test_adjoint_duality_property(orders, data):
    X = make_group(orders)
    f = data.draw(st.sampled_from(list(endomorphisms(X))[:200]))
    e = adjoint(f)
    for x in X:
        for y in X:
            assert pairing(f(x), y) == pairing(x, e(y))
