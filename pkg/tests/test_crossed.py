"""Crossed-product pairs, the cocycle and the conjugation identity."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_vector
from fermi_asymptotics import ParityError
from fermi_asymptotics.crossed import (
    CrossedPair,
    alpha0,
    cocycle_deviations,
    compute_Vt,
    conjugation_identity_check,
    cp_flatten,
    cp_lift,
    cp_mul,
    even_odd_split,
    scalar_distance,
)
from fermi_asymptotics.dynamics import evolve_operator, spectral_propagator
from fermi_asymptotics.fock import EVEN, FockOperator, ModeSystem, operator_norm, parity_diagonal, u0_unitary
from fermi_asymptotics.verify import random_even


def random_pair(rng, n):
    return CrossedPair(FockOperator(random_even(rng, n)), FockOperator(random_even(rng, n)))


def test_flatten_is_multiplicative(rng):
    n = 3
    u0 = u0_unitary(ModeSystem(n), random_vector(rng, n))
    x, y = random_pair(rng, n), random_pair(rng, n)
    lhs = cp_flatten(cp_mul(x, y, u0), u0).matrix
    rhs = cp_flatten(x, u0).matrix @ cp_flatten(y, u0).matrix
    assert operator_norm(lhs - rhs) < 1e-12


def test_unit_and_generator_pairs(rng):
    n = 2
    u0 = u0_unitary(ModeSystem(n), random_vector(rng, n))
    assert np.allclose(cp_flatten(CrossedPair.unit(4), u0).matrix, np.eye(4))
    assert np.allclose(cp_flatten(CrossedPair.generator(4), u0).matrix, u0.matrix)
    g = CrossedPair.generator(4)
    sq = cp_mul(g, g, u0)
    assert np.allclose(sq.e1.matrix, np.eye(4)) and np.allclose(sq.e2.matrix, 0)


def test_lift_round_trip_on_arbitrary_operator(rng):
    n = 3
    u0 = u0_unitary(ModeSystem(n), random_vector(rng, n))
    x = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    pair = cp_lift(x, u0)
    assert np.allclose(cp_flatten(pair, u0).matrix, x, atol=1e-13)


def test_pairs_reject_odd_components(rng):
    odd = even_odd_split(rng.normal(size=(4, 4)))[1]
    with pytest.raises(ParityError):
        CrossedPair(FockOperator(odd), FockOperator(np.zeros((4, 4))))
    with pytest.raises(ParityError):
        alpha0(odd, u0_unitary(ModeSystem(2), np.array([1.0, 0.0])))


def test_even_odd_split_reassembles(rng):
    m = rng.normal(size=(8, 8))
    e, o = even_odd_split(m)
    p = parity_diagonal(3)
    assert np.allclose(e + o, m)
    assert np.allclose(np.diag(p) @ e @ np.diag(p), e)
    assert np.allclose(np.diag(p) @ o @ np.diag(p), -o)


@pytest.mark.parametrize("lam", [0.0, 1.0])
def test_cocycle_identities(model_factory, rng, lam):
    model = model_factory(4)
    prop = spectral_propagator(model.hamiltonian(lam))
    u0 = u0_unitary(model.system, random_vector(rng, 4))
    assert np.allclose(compute_Vt(prop, u0, 0.0).matrix, np.eye(16), atol=1e-13)
    for t in (0.3, 2.0, 7.5):
        v = compute_Vt(prop, u0, t)
        assert v.parity == EVEN
        assert all(d < 1e-10 for d in cocycle_deviations(prop, u0, t).values())
        tau_u = evolve_operator(prop, u0, t).matrix
        assert np.allclose(tau_u, v.matrix @ u0.matrix, atol=1e-11)


def test_conjugation_identity(model_factory, rng):
    model = model_factory(3)
    prop = spectral_propagator(model.hamiltonian(1.0))
    u0 = u0_unitary(model.system, random_vector(rng, 3))
    a = random_even(rng, 3)
    for t in (0.0, 1.1, 6.0):
        assert conjugation_identity_check(prop, u0, a, t) < 1e-10


def test_scalar_distance():
    c, d = scalar_distance(np.diag([2.0, 2.0, 2.0, 2.0]))
    assert c == pytest.approx(2.0) and d < 1e-15
    c, d = scalar_distance(np.diag([1.0, -1.0]))
    assert c == pytest.approx(0.0) and d == pytest.approx(1.0)


def test_quasifree_cocycle_sum_is_scalar(model_factory, rng):
    # V_t + V_t* is a multiple of one under quasifree dynamics, V_t - V_t* is not
    model = model_factory(4)
    prop = spectral_propagator(model.hamiltonian(0.0))
    u0 = u0_unitary(model.system, np.eye(4)[0])
    v = compute_Vt(prop, u0, 1.7).matrix
    assert scalar_distance(v + v.conj().T)[1] < 1e-12
    assert scalar_distance(v - v.conj().T)[1] > 0.1


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2 ** 20))
def test_property_crossed_product_associative(seed):
    rng = np.random.default_rng(seed)
    n = 2
    u0 = u0_unitary(ModeSystem(n), random_vector(rng, n))
    x, y, z = (random_pair(rng, n) for _ in range(3))
    left = cp_mul(cp_mul(x, y, u0), z, u0)
    right = cp_mul(x, cp_mul(y, z, u0), u0)
    assert np.allclose(left.e1.matrix, right.e1.matrix, atol=1e-12)
    assert np.allclose(left.e2.matrix, right.e2.matrix, atol=1e-12)
    assert operator_norm(alpha0(alpha0(x.e1, u0), u0).matrix - x.e1.matrix) < 1e-12
