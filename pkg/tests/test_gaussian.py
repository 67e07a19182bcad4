import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from heyde import distributions as dist
from heyde.engine import Decomposition, extract_decomposition
from heyde.errors import DimensionMismatchError, PreconditionError, SizeLimitError
from heyde.gaussian import (
    GaussianParams,
    ProductDistribution,
    RealAutomorphismBlock,
    check_product_feq,
    degenerate,
    discrete_feq_max,
    gaussian,
    gaussian_char,
    gaussian_feq_residual,
    gaussian_pair_condition,
    is_psd,
    max_gaussian_residual,
    product_char,
    pure_gaussian,
    random_rational_vector,
    verify_full_decomposition,
)
from heyde.groups import make_group, make_map, subgroups, whole_group

from conftest import random_gaussian_case, span, symbolic_condition, symbolic_exponent_gap

F = Fraction


@pytest.fixture
def pair():
    return gaussian([[1]], [2]), gaussian([[F(1, 2)]], [1])


@pytest.fixture
def block5():
    Z5 = make_group([5])
    return RealAutomorphismBlock([[-2]], make_map([[2]], Z5))


class TestParams:
    def test_psd(self):
        assert is_psd(((F(2), F(1)), (F(1), F(1))))
        assert not is_psd(((F(1), F(2)), (F(2), F(1))))
        assert not is_psd(((F(0), F(0)), (F(0), F(-1))))
        assert is_psd(((F(0), F(0)), (F(0), F(0))))

    def test_non_symmetric(self):
        with pytest.raises(ValueError):
            GaussianParams(((1, 2), (0, 1)), (0, 0))

    def test_gaussian_rejects_non_psd(self):
        with pytest.raises(ValueError):
            gaussian([[-1]], [0])

    def test_dimension_cap(self):
        with pytest.raises(SizeLimitError):
            degenerate(5)

    def test_shape(self):
        with pytest.raises(DimensionMismatchError):
            GaussianParams(((1,),), (0, 0))


class TestChar:
    def test_degenerate(self):
        assert gaussian_char(degenerate(2), [F(3), F(-7, 2)]) == 1

    def test_substitution(self):
        assert gaussian_char(gaussian([[1]], [0]), [1]) == pytest.approx(math.exp(-1), abs=1e-15)

    def test_dimension(self):
        with pytest.raises(DimensionMismatchError):
            gaussian_char(degenerate(2), [1])

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10**6))
    def test_convolution_multiplies(self, seed):
        rng = random.Random(seed)
        A1, t1, A2, t2, _ = random_gaussian_case(rng, 2, True)
        g1, g2 = gaussian(A1, t1), gaussian(A2, t2)
        s = random_rational_vector(rng, 2, magnitude=2)
        assert abs(gaussian_char(g1 + g2, s) - gaussian_char(g1, s) * gaussian_char(g2, s)) < 1e-12


class TestSymbolicOracle:
    def test_gap_shape(self):
        # n=1: gap = -4 (A1 + e A2) u v + 2 i (t1 + e t2) v
        import sympy

        u, v = sympy.symbols("u0 v0")
        gap = symbolic_exponent_gap([[3]], [1], [[2]], [5], [[7]])
        assert sympy.expand(gap - (-4 * (3 + 7 * 2) * u * v + 2 * sympy.I * (1 + 7 * 5) * v)) == 0

    def test_spec_examples(self):
        assert symbolic_condition([[1]], [2], [[F(1, 2)]], [1], [[-2]])
        assert not symbolic_condition([[1]], [0], [[1]], [0], [[-2]])
        assert symbolic_condition([[0]], [0], [[0]], [0], [[5]])

    @pytest.mark.parametrize("n", [1, 2])
    def test_condition_matches_oracle(self, n):
        rng = random.Random(100 + n)
        for k in range(30):
            A1, t1, A2, t2, eps = random_gaussian_case(rng, n, k % 2 == 0)
            ok = gaussian_pair_condition(GaussianParams(A1, t1), GaussianParams(A2, t2), eps)
            assert ok == symbolic_condition(A1, t1, A2, t2, eps) == (k % 2 == 0)

    def test_non_symmetric_eps(self):
        rng = random.Random(7)
        for _ in range(20):
            eps = [[F(rng.randint(-3, 3), 2) for _ in range(2)] for _ in range(2)]
            A2 = [[F(1), F(0)], [F(0), F(2)]]
            # A1 chosen to cancel only when eps^T A2 is symmetric
            Et_A2 = [[sum(eps[k][i] * A2[k][j] for k in range(2)) for j in range(2)] for i in range(2)]
            sym = Et_A2[0][1] == Et_A2[1][0]
            A1 = [[-Et_A2[0][0], -Et_A2[0][1] if sym else 0], [-Et_A2[0][1] if sym else 0, -Et_A2[1][1]]]
            t2 = [F(1), F(-1)]
            t1 = [-sum(eps[k][i] * t2[k] for k in range(2)) for i in range(2)]
            got = gaussian_pair_condition(GaussianParams(A1, t1), GaussianParams(A2, t2), eps)
            assert got == symbolic_condition(A1, t1, A2, t2, eps)


class TestPairCondition:
    def test_degenerate(self):
        assert gaussian_pair_condition(degenerate(2), degenerate(2), [[3, 1], [0, 2]])

    def test_pass(self, pair):
        assert gaussian_pair_condition(*pair, [[-2]])
        search = max_gaussian_residual(*pair, [[-2]], samples=1000, seed=1)
        assert search.max_residual < 1e-9 and search.samples == 1000

    def test_fail(self):
        g = gaussian([[1]], [0])
        assert not gaussian_pair_condition(g, g, [[-2]])
        search = max_gaussian_residual(g, g, [[-2]], samples=10_000, seed=1, stop_above=1e-3)
        assert search.max_residual > 1e-3
        u, v = search.witness
        assert gaussian_feq_residual(g, g, [[-2]], u, v) > 1e-3

    def test_dimension(self):
        with pytest.raises(DimensionMismatchError):
            gaussian_pair_condition(degenerate(1), degenerate(2), [[1]])


class TestBlock:
    def test_requires_invertible(self):
        Z5 = make_group([5])
        with pytest.raises(PreconditionError):
            RealAutomorphismBlock([[0]], make_map([[2]], Z5))
        with pytest.raises(PreconditionError):
            RealAutomorphismBlock([[-1]], make_map([[2]], Z5))

    def test_delta_is_adjoint(self):
        X = make_group([2, 4])
        e = make_map([[1, 0], [2, 1]], X)
        b = RealAutomorphismBlock([[2]], e)
        assert b.delta_disc.matrix == ((1, 1), (0, 1))


class TestProduct:
    def test_factorization(self, rng):
        X = make_group([3, 3])
        A1, t1, *_ = random_gaussian_case(rng, 2, True)
        rho = dist.haar(span(X, (1, 1)))
        mu = ProductDistribution(gaussian(A1, t1), rho, X.element([2, 0]))
        for _ in range(20):
            s = random_rational_vector(rng, 2, magnitude=1)
            h = X.elements[rng.randrange(9)]
            whole = product_char(mu, s, h)
            assert whole == product_char(mu, s, X.zero) * product_char(mu, [0, 0], h)
        assert product_char(mu, [0, 0], X.zero) == 1

    def test_pure_parts(self):
        X = make_group([5])
        g = gaussian([[1]], [2])
        assert product_char(pure_gaussian(g, X), [F(1, 3)], X.element([2])) == gaussian_char(g, [F(1, 3)])
        rho = dist.point_mass(X.element([1]))
        mu = ProductDistribution(degenerate(1), rho, X.zero)
        assert product_char(mu, [F(5)], X.element([2])) == dist.char_fn(rho, X.element([2])).value

    def test_degenerate_pair(self, block5):
        X = make_group([5])
        mu = pure_gaussian(degenerate(1), X)
        assert check_product_feq(mu, mu, block5, sample_count=20).ok

    def test_spec_instance(self, pair, block5):
        X = make_group([5])
        m = dist.haar(whole_group(X))
        mu1 = ProductDistribution(pair[0], m, X.zero)
        mu2 = ProductDistribution(pair[1], m, X.zero)
        chk = check_product_feq(mu1, mu2, block5, sample_count=200, seed=3)
        assert chk.ok and chk.max_residual < 1e-9
        dec = extract_decomposition(mu1.discrete, mu2.discrete, block5.delta_disc)
        assert verify_full_decomposition(mu1, mu2, block5, dec).ok

    def test_perturbed(self, pair, block5):
        X = make_group([5])
        m = dist.haar(whole_group(X))
        mu1 = ProductDistribution(gaussian([[F(11, 10)]], [2]), m, X.zero)
        mu2 = ProductDistribution(pair[1], m, X.zero)
        chk = check_product_feq(mu1, mu2, block5, sample_count=200, seed=3)
        assert not chk.ok and chk.max_residual > 1e-3

    def test_verify_failures(self, pair, block5):
        X = make_group([5])
        m = dist.haar(whole_group(X))
        dec = Decomposition(whole_group(X), (dist.point_mass(X.zero),) * 2, (X.zero, X.zero))
        bad = ProductDistribution(GaussianParams(((-1,),), (2,)), m, X.zero)
        good2 = ProductDistribution(pair[1], m, X.zero)
        res = verify_full_decomposition(bad, good2, block5, dec)
        assert not res.ok and "positive semidefinite" in res.reason
        Z6 = make_group([6])
        m6 = dist.haar(span(Z6, (3,)))
        dec6 = Decomposition(span(Z6, (3,)), (dist.point_mass(Z6.zero),) * 2, (Z6.zero, Z6.zero))
        b6 = RealAutomorphismBlock([[-2]], make_map([[1]], Z6))
        mu = ProductDistribution(pair[0], m6, Z6.zero)
        nu = ProductDistribution(pair[1], m6, Z6.zero)
        res = verify_full_decomposition(mu, nu, b6, dec6)
        assert not res.ok and res.reason == "F contains order-2 element"

    @pytest.mark.parametrize("seed", range(6))
    def test_block_action_iff(self, seed):
        # full check passes iff the R^n condition and the discrete equation both pass
        rng = random.Random(seed)
        X = make_group(rng.choice([[5], [3, 3], [2, 2]]))
        if X.orders == (5,):
            e = make_map([[rng.choice([2, 3])]], X)
        elif X.orders == (3, 3):
            e = make_map([[0, 1], [2, 0]], X)
        else:
            e = make_map([[0, 1], [1, 1]], X)
        for k in range(4):
            A1, t1, A2, t2, eps = random_gaussian_case(rng, 1, k % 2 == 0)
            block = RealAutomorphismBlock(eps, e)
            K = rng.choice(subgroups(X))
            rho1 = dist.haar(K)
            rho2 = dist.haar(K) if rng.random() < 0.5 else dist.point_mass(X.elements[rng.randrange(X.order)])
            mu1 = ProductDistribution(gaussian(A1, t1), rho1, X.zero)
            mu2 = ProductDistribution(gaussian(A2, t2), rho2, X.zero)
            full = check_product_feq(mu1, mu2, block, sample_count=150, seed=seed)
            real_ok = gaussian_pair_condition(mu1.gamma, mu2.gamma, eps)
            disc_ok = discrete_feq_max(mu1, mu2, block) <= 1e-9
            assert full.ok == (real_ok and disc_ok)
            if not full.ok:
                assert full.max_residual > 1e-3
