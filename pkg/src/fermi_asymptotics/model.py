"""One-particle structure and the Galilei-type Hamiltonian ``H = K + lambda V``.

Modes are the symmetric (Loewdin) orthonormalisation of unit-width Gaussian
coherent states

    psi_{p,q}(x) = pi**(-1/4) exp(-(x - q)**2 / 2 + i p x)

placed on a phase-space grid.  The kinetic term is ``P**2 / 2m`` compressed to
their span; the interaction is the smeared pair operator

    V = sum_{i != j} w(p_i - p_j) v(q_i - q_j) a*_i a*_j a_j a_i,
    a_i = a(|p_i, q_i>)

with Gaussian cutoffs ``w``, ``v`` equal to one at zero argument.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .exceptions import AssemblyError, IllConditionedError
from .fock import (
    FockOperator,
    ModeSystem,
    as_matrix,
    number_diagonal,
    sparse_annihilators,
)

MAX_CONDITION = 1e8


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Coherent-state labels ``(p, q)`` in one dimension, plus the particle mass."""

    points: tuple
    mass: float = 1.0

    def __post_init__(self):
        pts = tuple((float(p), float(q)) for p, q in self.points)
        if not pts:
            raise ValueError("grid needs at least one point")
        if len(set(pts)) != len(pts):
            raise ValueError("grid points must be pairwise distinct")
        if not self.mass > 0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        object.__setattr__(self, "points", pts)

    @classmethod
    def rectangular(cls, n_p, n_q, spacing_p=2.0, spacing_q=2.0, p0=0.5, q0=0.0, mass=1.0):
        """``n_p x n_q`` lattice centred on ``(p0, q0)``; momentum index runs slowest."""
        ps = p0 + spacing_p * (np.arange(n_p) - (n_p - 1) / 2)
        qs = q0 + spacing_q * (np.arange(n_q) - (n_q - 1) / 2)
        return cls(tuple((p, q) for p in ps for q in qs), mass)

    @classmethod
    def for_modes(cls, n_modes, **kwargs):
        """Most nearly square rectangular grid with ``n_modes`` points."""
        n_p = max(d for d in range(1, int(np.sqrt(n_modes)) + 1) if n_modes % d == 0)
        return cls.rectangular(n_p, n_modes // n_p, **kwargs)

    @property
    def p(self) -> np.ndarray:
        return np.array([pt[0] for pt in self.points])

    @property
    def q(self) -> np.ndarray:
        return np.array([pt[1] for pt in self.points])

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class Cutoff:
    """Gaussian momentum cutoff ``w``, potential profile ``v`` and coupling."""

    w_width: float = 2.0
    v_width: float = 2.0
    coupling: float = 1.0

    def __post_init__(self):
        if not (self.w_width > 0 and self.v_width > 0):
            raise ValueError("cutoff widths must be strictly positive")

    def w(self, dp):
        return np.exp(-np.square(dp) / (2 * self.w_width ** 2))

    def v(self, dq):
        return np.exp(-np.square(dq) / (2 * self.v_width ** 2))


def coherent_overlap(pt1, pt2) -> complex:
    """``<p1,q1|p2,q2>`` for the unit-width Gaussian packets."""
    (p1, q1), (p2, q2) = pt1, pt2
    dp, dq = p2 - p1, q2 - q1
    return complex(np.exp(-(dq ** 2 + dp ** 2) / 4 + 0.5j * dp * (q1 + q2)))


def overlap_matrix(grid: PhaseSpaceGrid) -> np.ndarray:
    p, q = grid.p, grid.q
    dp = p[None, :] - p[:, None]
    dq = q[None, :] - q[:, None]
    qbar = 0.5 * (q[None, :] + q[:, None])
    return np.exp(-(dq ** 2 + dp ** 2) / 4 + 1j * dp * qbar)


@dataclass(frozen=True)
class Basis:
    """Loewdin-orthonormalised coherent states.

    ``transform`` is ``S**(-1/2)``; column ``i`` of ``expansion`` (``S**(1/2)``)
    holds ``|p_i, q_i>`` in the orthonormal mode basis.
    """

    grid: PhaseSpaceGrid
    overlap: np.ndarray
    transform: np.ndarray
    expansion: np.ndarray
    condition: float

    @property
    def n_modes(self) -> int:
        return len(self.grid)

    def coherent_vector(self, i: int) -> np.ndarray:
        return self.expansion[:, i]


def build_basis(grid: PhaseSpaceGrid, max_condition: float = MAX_CONDITION) -> Basis:
    s = overlap_matrix(grid)
    s = 0.5 * (s + s.conj().T)
    evals, evecs = np.linalg.eigh(s)
    cond = np.inf if evals[0] <= 0 else evals[-1] / evals[0]
    if not cond < max_condition:
        raise IllConditionedError(
            f"coherent-state overlap matrix has condition number {cond:.3g} "
            f"(bound {max_condition:.3g}); the grid is too dense"
        )
    transform = (evecs / np.sqrt(evals)) @ evecs.conj().T
    expansion = (evecs * np.sqrt(evals)) @ evecs.conj().T
    return Basis(grid, s, transform, expansion, float(cond))


def momentum_squared_matrix(grid: PhaseSpaceGrid) -> np.ndarray:
    """``<p_i,q_i| P**2 |p_j,q_j>`` in closed form (non-orthogonal basis)."""
    p, q = grid.p, grid.q
    s = overlap_matrix(grid)
    dp = p[None, :] - p[:, None]
    dq = q[None, :] - q[:, None]
    alpha = p[:, None] - 0.5j * dq
    beta = p[None, :] - 0.5j * dq
    return s * (alpha * beta + dp ** 2 / 4 + 0.5)


def kinetic_matrix(grid: PhaseSpaceGrid, basis: Basis) -> np.ndarray:
    """One-particle ``P**2 / 2m`` in the orthonormal mode basis."""
    t = basis.transform
    h = t @ momentum_squared_matrix(grid) @ t / (2 * grid.mass)
    return 0.5 * (h + h.conj().T)


@dataclass(frozen=True)
class QuarticTerms:
    """Interaction in pair form ``V = sum_{pq} G[p, q] (a_k a_l)^* (a_m a_n)``.

    ``pairs[p] = (k, l)`` with ``k < l``.  ``source`` keeps the smeared
    description ``(i, j, w*v)`` so the interaction can be rebuilt from
    coherent-state operators directly.
    """

    n_modes: int
    pairs: tuple
    gram: np.ndarray
    source: tuple = ()
    expansion: np.ndarray | None = None

    def as_list(self, tol: float = 0.0):
        """Mode-level terms ``((j, k, l, m), c)`` meaning ``c a*_j a*_k a_l a_m``."""
        out = []
        for p, (k, l) in enumerate(self.pairs):
            for r, (m, n) in enumerate(self.pairs):
                c = self.gram[p, r]
                if abs(c) > tol:
                    out.append(((l, k, m, n), complex(c)))
        return out


def _pair_index(n_modes):
    return tuple((k, l) for k in range(n_modes) for l in range(k + 1, n_modes))


def pair_amplitudes(f, g, pairs) -> np.ndarray:
    """Coefficients of ``a(g) a(f) = sum_{k<l} K[kl] a_k a_l``."""
    f, g = np.asarray(f), np.asarray(g)
    return np.array([np.conj(g[k] * f[l]) - np.conj(g[l] * f[k]) for k, l in pairs])


def interaction_terms(grid: PhaseSpaceGrid, basis: Basis, cutoff: Cutoff) -> QuarticTerms:
    """Expand the smeared pair interaction into mode-level pair form."""
    n = len(grid)
    pairs = _pair_index(n)
    p, q = grid.p, grid.q
    gram = np.zeros((len(pairs), len(pairs)), dtype=complex)
    source = []
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            c = float(cutoff.w(p[i] - p[j]) * cutoff.v(q[i] - q[j]))
            source.append((i, j, c))
            amp = pair_amplitudes(basis.coherent_vector(i), basis.coherent_vector(j), pairs)
            gram += c * np.outer(amp.conj(), amp)
    gram = 0.5 * (gram + gram.conj().T)
    return QuarticTerms(n, pairs, gram, tuple(source), basis.expansion)


@dataclass(frozen=True)
class HamiltonianTerms:
    kinetic: np.ndarray
    quartic: QuarticTerms

    def __post_init__(self):
        h = np.asarray(self.kinetic)
        if np.max(np.abs(h - h.conj().T)) > 1e-12:
            raise ValueError("kinetic matrix is not Hermitian")

    @property
    def n_modes(self) -> int:
        return self.kinetic.shape[0]


def quadratic_sparse(annihilators, h) -> sp.csr_matrix:
    dim = annihilators[0].shape[0]
    out = sp.csr_matrix((dim, dim), dtype=complex)
    for j, aj in enumerate(annihilators):
        row = sp.csr_matrix((dim, dim), dtype=complex)
        for k, ak in enumerate(annihilators):
            if h[j, k] != 0:
                row = row + h[j, k] * ak
        out = out + aj.conj().T @ row
    return out


def quartic_sparse(annihilators, quartic: QuarticTerms) -> sp.csr_matrix:
    """``sum G[p, r] (a_k a_l)^* (a_m a_n)`` for any CAR family ``annihilators``."""
    dim = annihilators[0].shape[0]
    dpairs = [annihilators[k] @ annihilators[l] for k, l in quartic.pairs]
    out = sp.csr_matrix((dim, dim), dtype=complex)
    for p, dp in enumerate(dpairs):
        row = sp.csr_matrix((dim, dim), dtype=complex)
        for r, dr in enumerate(dpairs):
            c = quartic.gram[p, r]
            if c != 0:
                row = row + c * dr
        if row.nnz:
            out = out + dp.conj().T @ row
    return out


def hamiltonian_sparse(terms: HamiltonianTerms, lam: float) -> sp.csr_matrix:
    ops = sparse_annihilators(terms.n_modes)
    h = quadratic_sparse(ops, terms.kinetic)
    if lam != 0 and terms.quartic.pairs:
        h = h + lam * quartic_sparse(ops, terms.quartic)
    return h.tocsr()


def assemble_hamiltonian(sys: ModeSystem, terms: HamiltonianTerms, lam: float) -> FockOperator:
    """Dense ``H = sum h_jk a*_j a_k + lam V``; checked Hermitian."""
    if terms.n_modes != sys.n_modes:
        raise ValueError(f"terms are for {terms.n_modes} modes, system has {sys.n_modes}")
    h = hamiltonian_sparse(terms, lam).toarray()
    dev = np.max(np.abs(h - h.conj().T)) if h.size else 0.0
    if dev > 1e-10:
        raise AssemblyError(f"assembled Hamiltonian is not Hermitian (deviation {dev:.3g})")
    return FockOperator(0.5 * (h + h.conj().T))


def gauge_transform(op, alpha: float) -> FockOperator:
    """Gauge automorphism ``a(f) -> exp(i alpha) a(f)``.

    Implemented as conjugation ``exp(-i alpha N) A exp(i alpha N)``, the sign
    that produces the phase ``exp(+i alpha)`` on annihilators.
    """
    m = as_matrix(op)
    n = number_diagonal(m.shape[0].bit_length() - 1)
    phase = np.exp(-1j * alpha * (n[:, None] - n[None, :]))
    return FockOperator(m * phase)


@dataclass(frozen=True)
class Model:
    """Everything needed to build direct and doubled Hamiltonians for one grid."""

    grid: PhaseSpaceGrid
    cutoff: Cutoff = field(default_factory=Cutoff)
    max_condition: float = MAX_CONDITION

    @cached_property
    def basis(self) -> Basis:
        return build_basis(self.grid, self.max_condition)

    @cached_property
    def terms(self) -> HamiltonianTerms:
        return HamiltonianTerms(
            kinetic_matrix(self.grid, self.basis),
            interaction_terms(self.grid, self.basis, self.cutoff),
        )

    @property
    def n_modes(self) -> int:
        return len(self.grid)

    @property
    def system(self) -> ModeSystem:
        return ModeSystem(self.n_modes)

    def hamiltonian(self, lam: float | None = None) -> FockOperator:
        lam = self.cutoff.coupling if lam is None else lam
        return assemble_hamiltonian(self.system, self.terms, lam)


def build_model(n_modes, spacing_p=2.0, spacing_q=2.0, p0=0.5, q0=0.0, mass=1.0,
                w_width=2.0, v_width=2.0, coupling=1.0) -> Model:
    grid = PhaseSpaceGrid.for_modes(
        n_modes, spacing_p=spacing_p, spacing_q=spacing_q, p0=p0, q0=q0, mass=mass
    )
    return Model(grid, Cutoff(w_width, v_width, coupling))
