"""Pseudo-inverse, resolvent limit and the perturbation series against exact KMS purifications."""

import numpy as np
import pytest
import scipy.sparse as sp

from conftest import random_vector
from fermi_asymptotics import DomainError
from fermi_asymptotics.doubling import DoubledRep, embed_a, gibbs_doubling
from fermi_asymptotics.experiments import local_perturbation
from fermi_asymptotics.metrics import loglog_slope
from fermi_asymptotics.perturb import (
    PseudoInverse,
    commutant_difference,
    exact_perturbed_kms,
    kms_derivative,
    perturbation_series,
    perturbed_correlator,
    pseudo_inverse_apply,
    resolvent_agreement,
    vector_angle,
)


def hermitian_with_kernel(rng, n=10, k=3):
    q, _ = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    ev = np.concatenate([np.zeros(k), rng.uniform(0.5, 3, n - k) * rng.choice([-1, 1], n - k)])
    return (q * ev) @ q.conj().T


def test_pseudo_inverse_matches_numpy(rng):
    h = hermitian_with_kernel(rng)
    pinv = PseudoInverse(h)
    assert pinv.kernel_dim == 3
    psi = random_vector(rng, 10)
    ref = np.linalg.pinv(h, rcond=1e-9, hermitian=True) @ psi
    assert np.allclose(pinv.apply(psi), ref, atol=1e-12)
    assert np.allclose(pseudo_inverse_apply(h, psi), ref, atol=1e-12)
    assert pinv.gap >= 0.5


def test_pseudo_inverse_domain(rng):
    h = hermitian_with_kernel(rng)
    pinv = PseudoInverse(h)
    kern = pinv.eigenvectors[:, pinv.kernel] @ np.ones(3)
    with pytest.raises(DomainError):
        pinv.apply(kern)
    assert np.allclose(pinv.apply(np.zeros(10)), 0)


def test_resolvent_converges_linearly(rng):
    h = hermitian_with_kernel(rng)
    pinv = PseudoInverse(h)
    eps, diffs, rich = resolvent_agreement(pinv, random_vector(rng, 10), [1e-6, 1e-5, 1e-4, 1e-3])
    assert loglog_slope(eps, diffs) == pytest.approx(1.0, abs=0.05)
    assert rich < diffs.min()
    with pytest.raises(ValueError):
        pinv.resolvent(np.ones(10), 0.0)


def test_vector_angle_ignores_phase(rng):
    x = random_vector(rng, 5)
    assert vector_angle(x, np.exp(0.3j) * 2 * x) < 1e-7
    y = x.copy()
    y[0] += 1.0
    assert vector_angle(x, y) > 0.1
    with pytest.raises(ValueError):
        vector_angle(x, np.zeros(5))


def test_vector_angle_resolves_tiny_angles():
    x = np.array([1.0, 0.0, 0.0], dtype=complex)
    y = np.array([1.0, 1e-9, 0.0]) * np.exp(0.4j)
    assert vector_angle(x, y) == pytest.approx(1e-9, rel=1e-6)
    assert vector_angle(x, np.array([0.0, 1.0, 0.0])) == pytest.approx(np.pi / 2)


@pytest.fixture(scope="module")
def setting():
    from fermi_asymptotics import build_model

    model = build_model(3)
    rep = DoubledRep(3)
    h = model.hamiltonian(1.0).matrix
    v = local_perturbation(model, 0)
    hh = rep.embed_operator(h)
    gen = (hh - rep.conjugate_by_J(hh)).tocsr()
    vh = rep.embed_operator(v)
    return rep, h, v, gen, vh, PseudoInverse(gen)


def test_reference_is_invariant(setting):
    rep, h, v, gen, vh, pinv = setting
    g = gibbs_doubling(rep, h, 1.0)
    assert np.linalg.norm(gen @ g.vector) < 1e-11
    assert np.linalg.norm(commutant_difference(rep, vh) @ rep.vacuum) < 1e-12


def test_exact_kms_is_invariant_under_perturbed_generator(setting):
    rep, h, v, gen, vh, pinv = setting
    lam = 0.2
    omega = exact_perturbed_kms(rep, h, v, 1.0, lam)
    g = gen + lam * commutant_difference(rep, vh)
    assert np.linalg.norm(g @ omega) < 1e-10


def test_residual_orders(setting):
    rep, h, v, gen, vh, pinv = setting
    ref = gibbs_doubling(rep, h, 1.0).vector
    series = perturbation_series(rep, gen, vh, 3, reference=ref, pinv=pinv)
    d = commutant_difference(rep, vh)
    lams = np.logspace(-3, -1, 5)
    for n in (1, 2, 3):
        assert loglog_slope(lams, series.residuals(gen, d, lams, n)) == pytest.approx(n + 1, abs=0.1)


def test_first_order_matches_derivative_off_kernel(setting):
    rep, h, v, gen, vh, pinv = setting
    ref = gibbs_doubling(rep, h, 1.0).vector
    b1 = perturbation_series(rep, gen, vh, 1, reference=ref, pinv=pinv).vectors[0]
    der = kms_derivative(rep, h, v, 1.0)
    off = der - pinv.kernel_projection(der)
    assert np.linalg.norm(b1 - off) < 1e-7 * np.linalg.norm(off)
    assert np.linalg.norm(pinv.kernel_projection(b1)) < 1e-12


def test_tracial_series_vanishes(setting):
    rep, h, v, gen, vh, pinv = setting
    series = perturbation_series(rep, gen, vh, 3, pinv=pinv)
    assert max(np.linalg.norm(b) for b in series.vectors) < 1e-12


def test_literal_recursion_loses_an_order(setting):
    rep, h, v, gen, vh, pinv = setting
    ref = gibbs_doubling(rep, h, 1.0).vector
    lit = perturbation_series(rep, gen, vh, 2, reference=ref, pinv=pinv, literal=True)
    d = commutant_difference(rep, vh)
    lams = np.logspace(-3, -1, 5)
    assert loglog_slope(lams, lit.residuals(gen, d, lams, 2)) < 2.5


def test_perturbed_correlator_at_infinite_temperature(setting):
    rep, h, v, gen, vh, pinv = setting
    times = np.linspace(0, 3, 7)
    one = sp.identity(rep.dim, format="csr")
    a0 = embed_a(rep, np.eye(3)[0])
    rec = perturbed_correlator(rep, gen, vh, 0.5, one, (a0.conj().T @ a0).tocsr(), times, window_end=3)
    assert np.allclose(rec.values, 0.5, atol=1e-9)
    rec2 = perturbed_correlator(rep, gen, vh, 0.5, one, one, times, counter_term=False, window_end=3)
    assert np.allclose(rec2.values, 1.0, atol=1e-9)
    assert rec2.metadata["generator"] == "H+lam V"
