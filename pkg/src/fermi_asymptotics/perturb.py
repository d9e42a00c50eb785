"""Perturbed invariant vectors of the doubled generator.

For a reference vector ``Omega`` with ``H Omega = 0`` and a perturbation
``D = V - J V J`` the invariant vector of ``H + lam D`` is sought as

    Omega_V = Omega + sum_n lam**n B_n,    B_n = -H^+ D B_{n-1},   B_0 = Omega,

where ``H^+`` is the spectral pseudo-inverse (kernel dropped).  The exact
answer at inverse temperature ``beta`` is the purification of the Gibbs
state of ``H_direct + lam V``, which is the oracle used in tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .dynamics import KRYLOV_MAX_DIM, propagate_series
from .doubling import DoubledRep, gibbs_density
from .exceptions import DomainError
from .fock import as_matrix
from .metrics import TimeSeriesRecord

KERNEL_RTOL = 1e-9
DOMAIN_FRACTION = 1 - 1e-6
ZERO_TOL = 1e-13


class PseudoInverse:
    """Spectral pseudo-inverse of a Hermitian operator (dense eigendecomposition, computed once).

    Eigenvalues with ``|e| <= kernel_rtol * spectral_radius`` span the kernel.
    """

    def __init__(self, h, kernel_rtol: float = KERNEL_RTOL):
        m = h.matrix if hasattr(h, "matrix") else h
        m = m.toarray() if sp.issparse(m) else np.asarray(as_matrix(m), dtype=complex)
        w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
        radius = float(np.max(np.abs(w))) if w.size else 0.0
        self.eigenvalues = w
        self.eigenvectors = v
        self.threshold = kernel_rtol * max(radius, 1e-300)
        self.kernel = np.abs(w) <= self.threshold

    @property
    def kernel_dim(self) -> int:
        return int(self.kernel.sum())

    @property
    def gap(self) -> float:
        """Smallest non-kernel ``|eigenvalue|``."""
        return float(np.min(np.abs(self.eigenvalues[~self.kernel])))

    def coefficients(self, psi):
        return self.eigenvectors.conj().T @ np.asarray(psi, dtype=complex)

    def kernel_projection(self, psi):
        c = self.coefficients(psi)
        return self.eigenvectors[:, self.kernel] @ c[self.kernel]

    def apply(self, psi, check_domain: bool = True):
        psi = np.asarray(psi, dtype=complex)
        c = self.coefficients(psi)
        norm = np.linalg.norm(psi)
        if norm == 0:
            return np.zeros_like(psi)
        if check_domain:
            frac = np.linalg.norm(c[self.kernel]) / norm
            if frac > DOMAIN_FRACTION:
                raise DomainError(
                    f"vector lies in the kernel to a fraction {frac:.12f}; pseudo-inverse undefined"
                )
        out = np.zeros_like(c)
        nk = ~self.kernel
        out[nk] = c[nk] / self.eigenvalues[nk]
        return self.eigenvectors @ out

    def resolvent(self, psi, eps: float):
        """``(H + i eps)^{-1} psi``, i.e. ``i`` times ``-i / (H + i eps)``."""
        if eps <= 0:
            raise ValueError("eps must be positive")
        c = self.coefficients(psi)
        return self.eigenvectors @ (c / (self.eigenvalues + 1j * eps))


def pseudo_inverse_apply(h, psi, kernel_rtol: float = KERNEL_RTOL, cache: PseudoInverse | None = None):
    """``H^+ psi``; raises :class:`DomainError` when ``psi`` is essentially in ``ker H``."""
    pinv = cache if cache is not None else PseudoInverse(h, kernel_rtol)
    return pinv.apply(psi)


def resolvent_agreement(pinv: PseudoInverse, psi, eps_values=(1e-4, 1e-5)):
    """Distances ``||H^+ psi - (H + i eps)^{-1} psi||`` and the Richardson-extrapolated distance.

    The extrapolation combines the two smallest ``eps`` assuming a linear
    leading error, so it is ``O(eps**2)`` when the resolvent behaves.
    """
    psi = np.asarray(psi, dtype=complex)
    psi = psi - pinv.kernel_projection(psi)
    ref = pinv.apply(psi, check_domain=False)
    eps = np.sort(np.asarray(eps_values, dtype=float))[::-1]
    res = [pinv.resolvent(psi, e) for e in eps]
    diffs = np.array([np.linalg.norm(r - ref) for r in res])
    e1, e2 = eps[-2], eps[-1]
    rich = (e1 * res[-1] - e2 * res[-2]) / (e1 - e2)
    return eps, diffs, float(np.linalg.norm(rich - ref))


@dataclass
class PerturbationSeries:
    """Orders ``B_1 .. B_n`` applied to the reference vector."""

    reference: np.ndarray
    vectors: list
    literal: bool = False
    kernel_leak: list = field(default_factory=list)

    @property
    def order(self) -> int:
        return len(self.vectors)

    def partial_sum(self, lam: float, order: int | None = None) -> np.ndarray:
        k = self.order if order is None else order
        v = self.reference.astype(complex)
        for m in range(1, k + 1):
            v = v + lam ** m * self.vectors[m - 1]
        return v

    def residuals(self, generator, perturbation, lams, order: int | None = None) -> np.ndarray:
        """``||(H + lam D) Omega^(n)||`` for each ``lam``."""
        return np.array([
            np.linalg.norm(generator @ (w := self.partial_sum(l, order)) + l * (perturbation @ w))
            for l in lams
        ])


def commutant_difference(rep: DoubledRep, v_hat) -> sp.csr_matrix:
    """``V - J V J``."""
    v_hat = sp.csr_matrix(v_hat)
    return (v_hat - rep.conjugate_by_J(v_hat)).tocsr()


def perturbation_series(rep: DoubledRep, ham, v_hat, order: int, reference=None,
                        literal: bool = False, pinv: PseudoInverse | None = None) -> PerturbationSeries:
    """First ``order`` terms ``B_n`` for the perturbation ``V - JVJ`` of ``ham``.

    ``literal=True`` runs ``B_n = H^+ B_{n-1}`` for ``n >= 2`` instead of the
    consistent ``B_n = -H^+ (V - JVJ) B_{n-1}``.  Zero input vectors (as at
    the tracial point) give zero orders without a domain check.
    """
    ref = rep.vacuum if reference is None else np.asarray(reference, dtype=complex)
    pinv = pinv if pinv is not None else PseudoInverse(ham)
    d = commutant_difference(rep, v_hat)
    vecs, leaks = [], []
    prev = ref
    for n in range(1, order + 1):
        src = d @ prev if (n == 1 or not literal) else prev
        if np.linalg.norm(src) <= ZERO_TOL:
            b = np.zeros_like(src)
            leaks.append(0.0)
        else:
            try:
                b = pinv.apply(src)
            except DomainError as exc:
                raise DomainError(f"order {n}: {exc}") from exc
            leaks.append(float(np.linalg.norm(pinv.kernel_projection(src))))
            if n == 1 or not literal:
                b = -b
        vecs.append(b)
        prev = b
    return PerturbationSeries(ref, vecs, literal, leaks)


def exact_perturbed_kms(rep: DoubledRep, h, v, beta: float, lam: float) -> np.ndarray:
    """Purification of the Gibbs state of ``h + lam v`` (direct-space matrices) in the doubled space."""
    if beta < 0:
        raise ValueError(f"beta must be non-negative, got {beta}")
    h = np.asarray(as_matrix(h), dtype=complex)
    v = np.asarray(as_matrix(v), dtype=complex)
    return rep.state_from_density(gibbs_density(h + lam * v, beta))


def vector_angle(x, y) -> float:
    """Angle between two complex vectors, insensitive to a global phase."""
    nx, ny = np.linalg.norm(x), np.linalg.norm(y)
    if nx == 0 or ny == 0:
        raise ValueError("angle undefined for a zero vector")
    c = np.vdot(x, y)
    phase = np.conj(c) / abs(c) if abs(c) > 0 else 1.0
    u, w = x / nx, phase * y / ny
    # half-angle form keeps small angles accurate, unlike arccos
    return float(2 * np.arctan2(np.linalg.norm(u - w), np.linalg.norm(u + w)))


def kms_derivative(rep: DoubledRep, h, v, beta: float, step: float = 1e-5) -> np.ndarray:
    """Central finite difference of :func:`exact_perturbed_kms` at ``lam = 0``."""
    plus = exact_perturbed_kms(rep, h, v, beta, step)
    minus = exact_perturbed_kms(rep, h, v, beta, -step)
    return (plus - minus) / (2 * step)


def perturbed_correlator(rep: DoubledRep, ham, v_hat, lam: float, a, b, times,
                         reference=None, counter_term: bool = True, tol: float = 1e-9,
                         window_end=None, max_dim: int = KRYLOV_MAX_DIM, **meta) -> TimeSeriesRecord:
    """``<Omega| A exp(itG) B exp(-itG) A* |Omega>`` on the doubled space.

    ``G = H + lam (V - JVJ)`` by default so that ``Omega`` stays invariant;
    ``counter_term=False`` uses ``G = H + lam V``.
    """
    ref = rep.vacuum if reference is None else np.asarray(reference, dtype=complex)
    hm = getattr(ham, "matrix", ham)
    pert = commutant_difference(rep, v_hat) if counter_term else sp.csr_matrix(v_hat)
    gen = (hm + lam * pert).tocsr()
    a = sp.csr_matrix(a)
    b = sp.csr_matrix(b)
    start = a.conj().T @ ref
    vals = [np.vdot(x, b @ x) for x in propagate_series(gen, start, times, tol=tol, max_dim=max_dim)]
    m = {"lambda": float(lam), "generator": "H+lam(V-JVJ)" if counter_term else "H+lam V", **meta}
    return TimeSeriesRecord("perturbed_correlator", times, vals, m, window_end)
