"""Heisenberg evolution ``tau_t(A) = exp(iHt) A exp(-iHt)`` and vector propagation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .exceptions import KrylovError
from .fock import FockOperator, as_matrix

KRYLOV_TOL = 1e-9
KRYLOV_MAX_DIM = 40
KRYLOV_MAX_STEPS = 100_000


@dataclass(frozen=True)
class Propagator:
    """Spectral data of a Hermitian ``H``; eigenvalues ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    def unitary(self, t: float) -> np.ndarray:
        """``exp(-iHt)``."""
        q = self.eigenvectors
        return (q * np.exp(-1j * self.eigenvalues * t)) @ q.conj().T

    def reconstruct(self) -> np.ndarray:
        q = self.eigenvectors
        return (q * self.eigenvalues) @ q.conj().T


def spectral_propagator(h) -> Propagator:
    m = np.asarray(as_matrix(h), dtype=complex)
    scale = max(1.0, float(np.max(np.abs(m))))
    if np.max(np.abs(m - m.conj().T)) > 1e-10 * scale:
        raise ValueError("spectral_propagator needs a Hermitian operator")
    evals, evecs = np.linalg.eigh(0.5 * (m + m.conj().T))
    evals.setflags(write=False)
    evecs.setflags(write=False)
    return Propagator(evals, evecs)


def to_eigenbasis(prop: Propagator, op) -> np.ndarray:
    q = prop.eigenvectors
    return q.conj().T @ as_matrix(op) @ q


def evolve_operator(prop: Propagator, op, t: float) -> FockOperator:
    """``exp(iHt) A exp(-iHt)``."""
    q = prop.eigenvectors
    a = to_eigenbasis(prop, op)
    ph = np.exp(1j * prop.eigenvalues * t)
    return FockOperator(q @ (ph[:, None] * a * ph.conj()[None, :]) @ q.conj().T)


def quasifree_evolve(h, f, t: float) -> np.ndarray:
    """One-particle lift: returns ``exp(iht) f``.

    With ``a(f)`` antilinear in ``f`` the second-quantized evolution of
    ``H = sum h_jk a*_j a_k`` satisfies ``tau_t a(f) = a(exp(iht) f)``.
    """
    h = np.asarray(h, dtype=complex)
    evals, evecs = np.linalg.eigh(0.5 * (h + h.conj().T))
    return evecs @ (np.exp(1j * evals * t) * (evecs.conj().T @ np.asarray(f, dtype=complex)))


def _applier(h):
    if callable(h):
        return h
    if sp.issparse(h) or isinstance(h, np.ndarray):
        return lambda v: h @ v
    if isinstance(h, FockOperator):
        return lambda v: h.matrix @ v
    if hasattr(h, "matvec"):
        return h.matvec
    raise TypeError(f"cannot apply object of type {type(h).__name__}")


def _lanczos(apply, v0, norm0, max_dim):
    n = v0.size
    basis = np.empty((max_dim + 1, n), dtype=complex)
    alpha = np.zeros(max_dim)
    beta = np.zeros(max_dim)
    basis[0] = v0 / norm0
    m = max_dim
    for j in range(max_dim):
        w = apply(basis[j])
        alpha[j] = np.vdot(basis[j], w).real
        w = w - alpha[j] * basis[j]
        if j:
            w = w - beta[j - 1] * basis[j - 1]
        # full reorthogonalisation; subspaces are small
        w = w - basis[: j + 1].T @ (basis[: j + 1].conj() @ w)
        beta[j] = np.linalg.norm(w)
        if beta[j] < 1e-13 * max(1.0, abs(alpha[j])):
            m = j + 1
            beta[j] = 0.0
            break
        basis[j + 1] = w / beta[j]
    return basis[:m], alpha[:m], beta[:m]


def krylov_evolve_vector(h, psi, t: float, tol: float = KRYLOV_TOL,
                         max_dim: int = KRYLOV_MAX_DIM, max_steps: int = KRYLOV_MAX_STEPS):
    """Return ``exp(-iHt) psi`` by adaptive Lanczos time stepping.

    ``h`` is a matrix, sparse matrix, ``LinearOperator`` or callable acting on
    vectors; it must be self-adjoint.  The per-step error estimate is the
    usual Krylov residual ``beta_m |[exp(-iT dt)]_{m,0}|``, kept below
    ``tol * dt / |t|`` so the accumulated error stays within ``tol``.
    """
    apply = _applier(h)
    psi = np.array(psi, dtype=complex)
    if t == 0:
        return psi
    direction = np.sign(t)
    total = abs(t)
    remaining = total
    dt = total
    steps = 0
    v = psi
    while remaining > 1e-15 * total:
        norm = np.linalg.norm(v)
        if norm == 0:
            return v
        basis, alpha, beta = _lanczos(apply, v, norm, max_dim)
        m = alpha.size
        if m > 1:
            evals, evecs = sla.eigh_tridiagonal(alpha, beta[: m - 1])
        else:
            evals, evecs = alpha.copy(), np.ones((1, 1))
        residual = beta[m - 1]
        while True:
            steps += 1
            if steps > max_steps:
                raise KrylovError(f"no convergence within {max_steps} Krylov steps (t={t})")
            step = min(dt, remaining)
            coef = evecs @ (np.exp(-1j * direction * evals * step) * evecs[0].conj())
            err = residual * abs(coef[-1]) * norm
            if err <= tol * step / total or residual == 0.0:
                break
            dt = 0.5 * step
        v = norm * (basis.T @ coef)
        remaining -= step
        if residual != 0.0 and err < 0.1 * tol * step / total:
            dt = 2.0 * step
    return v


def propagate_series(h, psi, times, **kwargs):
    """``exp(-iHt) psi`` for each ``t`` of an increasing grid, stepping between samples."""
    times = np.asarray(times, dtype=float)
    out = []
    v = np.array(psi, dtype=complex)
    last = 0.0
    for t in times:
        v = krylov_evolve_vector(h, v, t - last, **kwargs)
        last = t
        out.append(v)
    return out
