import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twistorsym.errors import ShapeMismatch
from twistorsym.grassmann import SuperPoly, monomials, random_poly

NB, NG = 4, 12  # N = 3 superspace: four x's and twelve odd coordinates
seeds = st.integers(0, 2**32 - 1)
CASES = settings(max_examples=200, deadline=None)


def rand(seed, terms=6, nb=NB, ng=NG, shape=()):
    return random_poly(np.random.default_rng(seed), nb, ng, terms, max_gen_degree=4, shape=shape)


def part(p, parity):
    return p.like({k: c for k, c in p.terms.items() if len(k[1]) % 2 == parity})


def close(a, b, tol=1e-10):
    return (a - b).norm() <= tol * (1 + a.norm() + b.norm())


@given(seeds, seeds, seeds)
@CASES
def test_associative(s1, s2, s3):
    a, b, c = rand(s1), rand(s2), rand(s3)
    assert close((a * b) * c, a * (b * c))


@given(seeds, seeds, st.sampled_from([0, 1]), st.sampled_from([0, 1]))
@CASES
def test_graded_commutativity(s1, s2, pa, pb):
    a, b = part(rand(s1), pa), part(rand(s2), pb)
    sign = -1 if pa and pb else 1
    assert close(a * b, (b * a).scale(sign))
    assert a.graded_commutator(b).norm() < 1e-10 * (1 + a.norm() * b.norm())


@given(seeds)
@CASES
def test_odd_elements_square_to_zero(s):
    a = part(rand(s, terms=8), 1)
    assert (a * a).norm() < 1e-10 * (1 + a.norm() ** 2)


@given(seeds, seeds, st.integers(0, NG - 1), st.sampled_from([0, 1]))
@CASES
def test_odd_derivative_is_graded_leibniz(s1, s2, k, pa):
    a, b = part(rand(s1), pa), rand(s2)
    lhs = (a * b).d_odd(k)
    rhs = a.d_odd(k) * b + (a * b.d_odd(k)).scale(-1 if pa else 1)
    assert close(lhs, rhs)


@given(seeds, seeds, st.integers(0, NB - 1))
@CASES
def test_even_derivative_is_leibniz(s1, s2, j):
    a, b = rand(s1), rand(s2)
    assert close((a * b).d_even(j), a.d_even(j) * b + a * b.d_even(j))


@given(seeds, seeds)
@settings(max_examples=50, deadline=None)
def test_matrix_coefficients_associate(s1, s2):
    a, b, c = rand(s1, shape=(2, 2)), rand(s2, shape=(2, 2)), rand(s1 + 1, shape=(2, 2))
    assert close((a * b) * c, a * (b * c))


@given(seeds, seeds)
@settings(max_examples=50, deadline=None)
def test_compose_is_a_homomorphism(s1, s2):
    rng = np.random.default_rng(s1)
    a, b = rand(s1, nb=2, ng=4), rand(s2, nb=2, ng=4)
    even = [part(random_poly(rng, 1, 3, 3, 2), 0) + 1.0 for _ in range(2)]
    odd = [part(random_poly(rng, 1, 3, 3, 3), 1) for _ in range(4)]
    assert close((a * b).compose(even, odd), a.compose(even, odd) * b.compose(even, odd))


def test_monomial_reorders_with_sign():
    p = SuperPoly.monomial(0, 3, (), (2, 0))
    assert p.terms == {((), (0, 2)): -1}


def test_left_derivative_sign():
    p = SuperPoly.monomial(0, 3, (), (0, 1))
    assert p.d_odd(1).terms == {((), (0,)): -1}
    assert p.d_odd(0).terms == {((), (1,)): 1}


def test_mismatched_spaces_raise():
    with pytest.raises(ShapeMismatch):
        SuperPoly.gen(0, 2, 0) + SuperPoly.gen(0, 3, 0)


def test_scalar_promotes_against_matrix():
    m = SuperPoly.const(0, 1, np.array([[1, 2], [3, 4]]))
    s = (m + 2.0).terms[((), ())]
    assert np.array_equal(s, np.array([[3, 2], [3, 6]]))


# -- dense oracle: odd generators as Jordan-Wigner matrices on 2^ng states ----


def jordan_wigner(ng):
    lower = np.array([[0, 0], [1, 0]])
    z = np.diag([1, -1])
    out = []
    for k in range(ng):
        m = np.eye(1)
        for j in range(ng):
            m = np.kron(m, z if j < k else (lower if j == k else np.eye(2)))
        out.append(m)
    return out


class DenseOracle:
    def __init__(self, ng):
        self.ng = ng
        self.gens = jordan_wigner(ng)
        self.monos = monomials(ng, ng)
        self.vac = np.eye(2**ng)[0]
        self.basis = np.array([self.word(g) @ self.vac for g in self.monos]).T

    def word(self, g):
        m = np.eye(2**self.ng)
        for k in g:
            m = m @ self.gens[k]
        return m

    def dense(self, p):
        return sum((complex(c) * self.word(g) for (_, g), c in p.terms.items()), np.zeros((2**self.ng,) * 2, complex))

    def back(self, m):
        coef = np.linalg.solve(self.basis, m @ self.vac)
        return SuperPoly(0, self.ng, {((), g): v for g, v in zip(self.monos, coef) if abs(v) > 1e-14})


ORACLE = DenseOracle(4)  # N = 1 has four odd coordinates


def test_jordan_wigner_generators_anticommute():
    g = ORACLE.gens
    for i in range(4):
        for j in range(4):
            assert not np.any(g[i] @ g[j] + g[j] @ g[i])


@pytest.mark.parametrize("seed", range(40))
def test_product_matches_dense_oracle(seed):
    a, b = rand(seed, 5, 0, 4), rand(seed + 1000, 5, 0, 4)
    assert close(a * b, ORACLE.back(ORACLE.dense(a) @ ORACLE.dense(b)), 1e-12)
