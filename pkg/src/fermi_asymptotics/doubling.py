"""Tracial-state GNS space realised as the vacuum of a doubled Fermi algebra.

The doubled register has ``2N`` modes: ``A_k`` on modes ``0..N-1`` and ``B_k``
on modes ``N..2N-1``.  With real mode basis vectors ``e_k``

    a(f) = (A(f) + B*(conj f)) / sqrt(2),    b(f) = (A(f) - B*(conj f)) / sqrt(2)

and ``|Omega>`` the A/B vacuum, ``<Omega| pi(X) |Omega> = tr(X) / 2**N`` on the
``a``-algebra.  ``W`` is the total parity, ``W b`` generates the commutant.

``J`` is the modular conjugation of ``(pi(A(a)), Omega)``: antiunitary,
``J Omega = Omega``, ``J pi(X) J Omega = pi(X)^* Omega``.  On generators

    J a(f) J = b*(f) W,        J A_k J = W B_k,        J B_k J = W A_k,

so ``J = U K`` with ``K`` complex conjugation in the occupation basis and ``U``
a signed permutation that swaps the A and B registers.

Besides the Fock realisation the module builds the unitary ``Phi`` onto the
Hilbert-Schmidt space of the direct Fock space, ``pi(Y) Omega -> vec(Y) / 2**(N/2)``,
which gives ``pi(X) = Phi^* (X (x) 1) Phi`` for arbitrary direct-space ``X`` and
an independent route to ``J`` (``vec(Y) -> vec(Y^*)``) and to Gibbs purifications.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .dynamics import KRYLOV_MAX_DIM, krylov_evolve_vector, propagate_series
from .exceptions import AssemblyError
from .fock import ModeSystem, as_matrix, occupations, sparse_annihilators
from .metrics import TimeSeriesRecord
from .model import HamiltonianTerms, quadratic_sparse, quartic_sparse

MAX_DOUBLED_MODES = 16


def _drop_zeros(m, tol=1e-14):
    m = sp.csr_matrix(m)
    m.data[np.abs(m.data) < tol] = 0
    m.eliminate_zeros()
    return m


def _signed_swap_permutation(n_modes: int) -> sp.csr_matrix:
    """Unitary part of ``J``: images of occupation basis states under ``A <-> B`` with Klein signs.

    ``e_n = c*_{k1} ... c*_{kr} Omega`` (ascending modes) is sent to
    ``theta(c*_{k1}) ... theta(c*_{kr}) Omega`` with ``theta(A*_k) = B*_k W``
    and ``theta(B*_k) = A*_k W``.
    """
    m = 2 * n_modes
    dim = 2 ** m
    occ = occupations(m)
    bits = np.zeros((dim, m), dtype=np.int64)
    sign = np.ones(dim)
    for k in range(m - 1, -1, -1):
        sel = occ[:, k] == 1
        target = k + n_modes if k < n_modes else k - n_modes
        # W: parity of the state built so far
        sign[sel] *= 1 - 2 * (bits[sel].sum(axis=1) % 2)
        # creation on the swapped mode: string of modes to its left
        sign[sel] *= 1 - 2 * (bits[sel, :target].sum(axis=1) % 2)
        bits[sel, target] = 1
    weights = 1 << (m - 1 - np.arange(m))
    rows = bits @ weights
    return sp.csr_matrix((sign.astype(complex), (rows, np.arange(dim))), shape=(dim, dim))


class DoubledRep:
    """A/B Fock space of ``2N`` modes carrying ``a``, ``b``, ``W``, ``J`` and ``|Omega>``."""

    def __init__(self, n_modes: int):
        self.direct = ModeSystem(n_modes)
        self.base = ModeSystem(2 * n_modes, max_modes=MAX_DOUBLED_MODES)
        ops = sparse_annihilators(2 * n_modes)
        self.A = ops[:n_modes]
        self.B = ops[n_modes:]
        s = 1 / np.sqrt(2)
        self.a_modes = tuple((A + B.conj().T) * s for A, B in zip(self.A, self.B))
        self.b_modes = tuple((A - B.conj().T) * s for A, B in zip(self.A, self.B))
        vac = np.zeros(self.dim, dtype=complex)
        vac[0] = 1.0
        vac.setflags(write=False)
        self.vacuum = vac
        w = 1.0 - 2.0 * (occupations(2 * n_modes).sum(axis=1) % 2)
        self.parity_diag = w
        self.W = sp.diags(w.astype(complex)).tocsr()

    @property
    def n_modes(self) -> int:
        return self.direct.n_modes

    @property
    def dim(self) -> int:
        return self.base.dim

    # -- generators -------------------------------------------------------

    def _smear(self, ops, f):
        f = np.asarray(f, dtype=complex)
        if f.shape != (self.n_modes,):
            raise ValueError(f"smearing vector must have length {self.n_modes}, got {f.shape}")
        out = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        for k, c in enumerate(f):
            if c != 0:
                out = out + np.conj(c) * ops[k]
        return out

    def A_of(self, f):
        """``A(f) = sum conj(f_k) A_k``."""
        return self._smear(self.A, f)

    def B_of(self, f):
        return self._smear(self.B, f)

    def even_projector(self):
        return sp.diags(0.5 * (1 + self.parity_diag)).tocsr()

    def odd_projector(self):
        return sp.diags(0.5 * (1 - self.parity_diag)).tocsr()

    def total_number(self):
        n = occupations(2 * self.n_modes).sum(axis=1).astype(complex)
        return sp.diags(n).tocsr()

    def charge(self):
        """``N_A - N_B``: the gauge charge of the ``a``-algebra."""
        occ = occupations(2 * self.n_modes)
        n = self.n_modes
        return sp.diags((occ[:, :n].sum(axis=1) - occ[:, n:].sum(axis=1)).astype(complex)).tocsr()

    # -- modular conjugation ----------------------------------------------

    @cached_property
    def J_unitary(self) -> sp.csr_matrix:
        return _signed_swap_permutation(self.n_modes)

    def apply_J(self, psi):
        return self.J_unitary @ np.conj(psi)

    def conjugate_by_J(self, op):
        """``J X J`` for a sparse or dense operator on the doubled space."""
        u = self.J_unitary
        if sp.issparse(op):
            return (u @ op.conj() @ u.conj().T).tocsr()
        return u @ (u @ np.asarray(op).conj().T).conj().T

    # -- Hilbert-Schmidt picture ------------------------------------------

    @cached_property
    def hs_map_adjoint(self) -> sp.csr_matrix:
        """``Phi^*``: column ``n d + m`` is ``sqrt(d) pi(|n><m|) Omega``."""
        n = self.n_modes
        d = 2 ** n
        a = self.a_modes
        ad = [x.conj().T.tocsr() for x in a]
        occ = occupations(n)
        e00 = sp.identity(self.dim, dtype=complex, format="csr")
        for k in range(n):
            e00 = e00 @ (a[k] @ ad[k])
        cols = []
        for m in range(d):
            v = self.vacuum.copy()
            for k in np.nonzero(occ[m])[0]:  # C_m^* = a_{kr} .. a_{k1}: a_{k1} first
                v = a[k] @ v
            cols.append(e00 @ v)
        y = _drop_zeros(sp.csr_matrix(np.array(cols).T))
        blocks = [None] * d
        blocks[0] = y
        for idx in range(1, d):
            k1 = int(np.nonzero(occ[idx])[0][0])
            prev = idx - (1 << (n - 1 - k1))
            blocks[idx] = _drop_zeros(ad[k1] @ blocks[prev])
        return (np.sqrt(d) * sp.hstack(blocks, format="csr")).tocsr()

    @cached_property
    def hs_map(self) -> sp.csr_matrix:
        return self.hs_map_adjoint.conj().T.tocsr()

    def to_hs(self, psi) -> np.ndarray:
        d = 2 ** self.n_modes
        return (self.hs_map @ psi).reshape(d, d)

    def from_hs(self, y) -> np.ndarray:
        return self.hs_map_adjoint @ np.asarray(y, dtype=complex).reshape(-1)

    def apply_J_hs(self, psi):
        """Modular conjugation computed as ``vec(Y) -> vec(Y^*)``."""
        return self.from_hs(self.to_hs(np.asarray(psi)).conj().T)

    def embed_operator(self, x) -> sp.csr_matrix:
        """``pi(X)`` for a dense direct-space operator ``X``."""
        x = np.asarray(as_matrix(x), dtype=complex)
        d = 2 ** self.n_modes
        if x.shape != (d, d):
            raise ValueError(f"direct operator must be {d}x{d}, got {x.shape}")
        big = sp.kron(sp.csr_matrix(x), sp.identity(d, dtype=complex, format="csr"), format="csr")
        return _drop_zeros(self.hs_map_adjoint @ big @ self.hs_map, 1e-15)

    def state_from_density(self, rho) -> np.ndarray:
        """Purification ``Phi^* vec(rho^(1/2))``."""
        rho = np.asarray(as_matrix(rho), dtype=complex)
        evals, evecs = np.linalg.eigh(0.5 * (rho + rho.conj().T))
        root = (evecs * np.sqrt(np.clip(evals, 0, None))) @ evecs.conj().T
        return self.from_hs(root)

    # -- probes -----------------------------------------------------------

    def commutant_probes(self, modes=((), (0,), (0, 1))):
        """``|Omega>``, ``W b*(e_k)|Omega>``, ``W b*(e_j) W b*(e_k)|Omega>``, normalised."""
        out = []
        for combo in modes:
            v = self.vacuum.copy()
            for k in reversed(combo):
                if k >= self.n_modes:
                    continue
                v = self.W @ (self.b_modes[k].conj().T @ v)
            nv = np.linalg.norm(v)
            if nv > 0:
                out.append(v / nv)
        return out


def embed_a(rep: DoubledRep, f) -> sp.csr_matrix:
    """``a(f) = (A(f) + B*(conj f)) / sqrt(2)``, antilinear in ``f``."""
    return _smear_modes(rep, rep.a_modes, f)


def embed_b(rep: DoubledRep, f) -> sp.csr_matrix:
    """``b(f) = (A(f) - B*(conj f)) / sqrt(2)``."""
    return _smear_modes(rep, rep.b_modes, f)


def _smear_modes(rep, ops, f):
    return rep._smear(ops, f)


JW_RELATIONS = ("modular", "literal")
SOLVER_MAX_MODES = 4


def solve_J_constraints(rep: DoubledRep, relation: str = "modular", tol: float = 1e-10) -> np.ndarray:
    """Solve ``J Omega = Omega`` and a generator relation for the unitary part of ``J = U K``.

    ``relation="modular"`` imposes ``J a_k J = b*_k W``; ``relation="literal"``
    imposes ``J a_k J = W b_k`` (operator form of ``J a(conj f) J = W b(f)``).
    ``Ad J`` is an antilinear automorphism, so on the orthonormal family of
    Majorana monomial vectors ``c_S Omega`` the constraints read
    ``U conj(c_S Omega) = theta(c_S) Omega``, which fixes ``U`` uniquely.
    The result is verified as an operator identity on every generator;
    inconsistency raises :class:`AssemblyError`.  Dense, ``N <= 4``.
    """
    if relation not in JW_RELATIONS:
        raise ValueError(f"relation must be one of {JW_RELATIONS}")
    n = rep.n_modes
    if n > SOLVER_MAX_MODES:
        raise ValueError(f"dense constraint solve limited to N <= {SOLVER_MAX_MODES}")
    a = [x.toarray() for x in rep.a_modes]
    b = [x.toarray() for x in rep.b_modes]
    w = rep.W.toarray()
    if relation == "modular":
        th_a = [bk.conj().T @ w for bk in b]
    else:
        th_a = [w @ bk for bk in b]
    th_ad = [x.conj().T for x in th_a]
    # Majoranas c_{2k} = a + a*, c_{2k+1} = i(a* - a); theta is antilinear
    maj, th = [], []
    for k in range(n):
        maj += [a[k] + a[k].conj().T, 1j * (a[k].conj().T - a[k])]
        th += [th_a[k] + th_ad[k], -1j * (th_ad[k] - th_a[k])]
    m = 2 * n
    cols_src = np.empty((rep.dim, 2 ** m), dtype=complex)
    cols_img = np.empty_like(cols_src)
    for s in range(2 ** m):
        v = rep.vacuum.astype(complex)
        u = rep.vacuum.astype(complex)
        for j in range(m - 1, -1, -1):
            if s >> j & 1:
                v = maj[j] @ v
                u = th[j] @ u
        cols_src[:, s] = v
        cols_img[:, s] = u
    gram = cols_src.conj().T @ cols_src
    if np.max(np.abs(gram - np.eye(gram.shape[0]))) > tol:
        raise AssemblyError("Majorana monomial vectors are not orthonormal: vacuum not tracial")
    u = cols_img @ cols_src.T  # conj(src) is unitary, its inverse is src^T
    problems = []
    if np.max(np.abs(u.conj().T @ u - np.eye(rep.dim))) > tol:
        problems.append("U not unitary")
    if np.max(np.abs(u @ u.conj() - np.eye(rep.dim))) > tol:
        problems.append("J**2 != 1")
    for k in range(n):
        if np.max(np.abs(u @ a[k].conj() @ u.conj().T - th_a[k])) > tol:
            problems.append(f"generator relation fails for mode {k}")
    if problems:
        raise AssemblyError(f"{relation} J constraints inconsistent: " + "; ".join(problems))
    return u


def build_modular_J(rep: DoubledRep, check: bool = True, tol: float = 1e-10):
    """Return the unitary part ``U`` of ``J = U K`` after verifying its defining relations.

    Raises :class:`AssemblyError` if ``J`` fails ``J Omega = Omega``, ``J**2 = 1``
    or ``J a_k J = b*_k W`` on the mode generators (a sign-convention bug).
    """
    u = rep.J_unitary
    if check:
        problems = []
        if np.linalg.norm(rep.apply_J(rep.vacuum) - rep.vacuum) > tol:
            problems.append("J Omega != Omega")
        u2 = u @ u.conj()
        if abs(u2 - sp.identity(rep.dim)).max() > tol:
            problems.append("J**2 != 1")
        for k in range(rep.n_modes):
            lhs = rep.conjugate_by_J(rep.a_modes[k])
            rhs = rep.b_modes[k].conj().T @ rep.W
            if abs(lhs - rhs).max() > tol:
                problems.append(f"J a_{k} J != b*_{k} W")
        if problems:
            raise AssemblyError("modular conjugation inconsistent: " + "; ".join(problems))
    return u


# -- doubled Hamiltonian ------------------------------------------------------


def doubled_quadratic(rep: DoubledRep, f, g):
    """``a*(f) a(g) + b*(f) b(g) - <g|f>``  ( = ``A*(f) A(g) - B*(conj g) B(conj f)``)."""
    af, ag = embed_a(rep, f), embed_a(rep, g)
    bf, bg = embed_b(rep, f), embed_b(rep, g)
    c = np.vdot(g, f)
    out = af.conj().T @ ag + bf.conj().T @ bg - c * sp.identity(rep.dim, format="csr")
    return out.tocsr()


def doubled_quartic(rep: DoubledRep, f, g, literal: bool = False):
    """``a*(f)a*(g)a(g)a(f) - J[a*(f)a*(g)a(g)a(f)]J`` written in ``b``-operators.

    The commutant counterpart is ``b(f) b(g) b*(g) b*(f)``; normal ordering it
    gives ``b*(f)b*(g)b(g)b(f)`` plus the quadratic and c-number pieces kept
    here.  ``literal=True`` drops them and returns the bare
    ``a*a*aa - b*b*bb`` difference (which does not annihilate ``|Omega>``
    unless ``f`` and ``g`` are parallel).
    """
    af, ag = embed_a(rep, f), embed_a(rep, g)
    bf, bg = embed_b(rep, f), embed_b(rep, g)
    xa = ag @ af
    xb = bg @ bf
    out = xa.conj().T @ xa - xb.conj().T @ xb
    if literal:
        return out.tocsr()
    f, g = np.asarray(f, dtype=complex), np.asarray(g, dtype=complex)
    nf, ng = np.vdot(f, f).real, np.vdot(g, g).real
    fg = np.vdot(f, g)
    eye = sp.identity(rep.dim, format="csr")
    out = (
        out
        + ng * (bf.conj().T @ bf)
        + nf * (bg.conj().T @ bg)
        - fg * (bf.conj().T @ bg)
        - np.conj(fg) * (bg.conj().T @ bf)
        - (nf * ng - abs(fg) ** 2) * eye
    )
    return out.tocsr()


@dataclass
class DoubledHamiltonian:
    """Sparse self-adjoint generator on the doubled space with its c-number record."""

    matrix: sp.csr_matrix
    lam: float
    quadratic_c_number: float = 0.0
    quartic_c_number: float = 0.0
    n_quadratic_terms: int = 0
    method: str = "commutant"
    vacuum_residual: float = field(default=np.nan)

    def matvec(self, v):
        return self.matrix @ v

    def __matmul__(self, v):
        return self.matrix @ v

    @property
    def c_number(self) -> float:
        return self.quadratic_c_number + self.quartic_c_number


def a_algebra_hamiltonian(rep: DoubledRep, terms: HamiltonianTerms, lam: float):
    """``pi(H)``: the direct Hamiltonian written in embedded ``a``-operators."""
    h = quadratic_sparse(rep.a_modes, terms.kinetic)
    if lam != 0 and terms.quartic.pairs:
        h = h + lam * quartic_sparse(rep.a_modes, terms.quartic)
    return h.tocsr()


def assemble_doubled_H(rep: DoubledRep, terms: HamiltonianTerms, lam: float,
                       method: str = "commutant", tol: float = 1e-9) -> DoubledHamiltonian:
    """Doubled generator annihilating ``|Omega>`` and restricting to ``tau_t`` on the ``a``-algebra.

    ``method="commutant"`` forms ``pi(H) - J pi(H) J`` from the mode-level terms;
    ``method="termwise"`` sums :func:`doubled_quadratic` over the kinetic matrix
    and :func:`doubled_quartic` over the smeared coherent-state pairs.  Both
    give the same operator.
    """
    if terms.n_modes != rep.n_modes:
        raise ValueError("model terms and doubled representation disagree on N")
    h = np.asarray(terms.kinetic)
    n = rep.n_modes
    eye = np.eye(n)
    quad_c = float(np.trace(h).real)
    n_quad = int(np.count_nonzero(np.abs(np.diag(h)) > 0))
    quart_c = 0.0
    q = terms.quartic
    if q.source and q.expansion is not None:
        for i, j, c in q.source:
            fi, fj = q.expansion[:, i], q.expansion[:, j]
            quart_c += lam * c * (np.vdot(fi, fi).real * np.vdot(fj, fj).real - abs(np.vdot(fi, fj)) ** 2)
    if method == "commutant":
        ha = a_algebra_hamiltonian(rep, terms, lam)
        mat = ha - rep.conjugate_by_J(ha)
    elif method == "termwise":
        mat = sp.csr_matrix((rep.dim, rep.dim), dtype=complex)
        for j in range(n):
            for k in range(n):
                if h[j, k] != 0:
                    mat = mat + h[j, k] * doubled_quadratic(rep, eye[j], eye[k])
        if lam != 0:
            if not q.source or q.expansion is None:
                raise ValueError("termwise assembly needs the smeared pair description")
            for i, j, c in q.source:
                if c != 0:
                    mat = mat + lam * c * doubled_quartic(rep, q.expansion[:, i], q.expansion[:, j])
    else:
        raise ValueError(f"unknown assembly method {method!r}")
    mat = _drop_zeros(0.5 * (mat + mat.conj().T), 1e-15)
    resid = float(np.linalg.norm(mat @ rep.vacuum))
    if resid > tol:
        raise AssemblyError(f"doubled Hamiltonian does not annihilate the vacuum (residual {resid:.3g})")
    return DoubledHamiltonian(mat, lam, quad_c, quart_c, n_quad, method, resid)


# -- strong-topology diagnostics ---------------------------------------------


def _uu_operator(rep, f):
    """``A(f) + B(conj f)`` (the ``A + B`` of the ``U U'`` expansion)."""
    f = np.asarray(f, dtype=complex)
    return (rep.A_of(f) + rep.B_of(np.conj(f))).tocsr()


def _meta(rep, ham, times, **extra):
    meta = {"N": rep.n_modes, "lambda": float(ham.lam), "doubled": True}
    meta.update(extra)
    return meta


def uu_prime_diagnostics(rep: DoubledRep, ham: DoubledHamiltonian, f, times,
                         window_end=None, tol=1e-9, max_dim=KRYLOV_MAX_DIM, **meta):
    """``s(t) = ||(A+B) e^{-iHt} (A*+B*) Omega|| / 2`` and ``u(t) = s(t)**2``.

    The factor 1/2 is the product of the two ``1/sqrt(2)`` normalisations of
    ``U`` and ``U'``, so ``s(0) = 1`` for a unit ``f``.
    """
    x = _uu_operator(rep, f)
    phi0 = x.conj().T @ rep.vacuum
    states = propagate_series(ham.matrix, phi0, times, tol=tol, max_dim=max_dim)
    s = np.array([0.5 * np.linalg.norm(x @ psi) for psi in states])
    m = _meta(rep, ham, times, **meta)
    return (
        TimeSeriesRecord("uu_strong_norm", times, s, m, window_end),
        TimeSeriesRecord("uu_expectation", times, s ** 2, m, window_end),
    )


def number_growth(rep: DoubledRep, ham: DoubledHamiltonian, f, times,
                  window_end=None, tol=1e-9, max_dim=KRYLOV_MAX_DIM, **meta) -> TimeSeriesRecord:
    """Mean of ``N_A + N_B`` in ``exp(-iHt) (A*(f) + B*(conj f)) |Omega>``."""
    x = _uu_operator(rep, f)
    phi0 = x.conj().T @ rep.vacuum
    ntot = rep.total_number()
    vals = []
    for psi in propagate_series(ham.matrix, phi0, times, tol=tol, max_dim=max_dim):
        vals.append((np.vdot(psi, ntot @ psi) / np.vdot(psi, psi)).real)
    return TimeSeriesRecord("number", times, vals, _meta(rep, ham, times, **meta), window_end)


def strong_VtVt_test(rep: DoubledRep, ham: DoubledHamiltonian, f0, times, probes=None,
                     window_end=None, tol=1e-9, max_dim=KRYLOV_MAX_DIM, **meta):
    """``r_pm(t) = max_probe ||(V_t V_t -+ 1) probe||`` with ``V_t = tau_t(U_0) U_0``.

    ``r_plus`` measures distance of ``V_t V_t`` from ``+1`` and ``r_minus`` from
    ``-1``; ``tau_t`` is generated on the doubled space by ``ham``.
    """
    a0 = embed_a(rep, f0)
    u0 = (a0 + a0.conj().T).tocsr()
    hm = ham.matrix
    if probes is None:
        probes = rep.commutant_probes()
    times = np.asarray(times, dtype=float)
    r_plus = np.zeros((len(probes), times.size))
    r_minus = np.zeros_like(r_plus)

    def v_apply(t, evolved_u_psi):
        # V_t psi = exp(iHt) U exp(-iHt) U psi, given exp(-iHt) U psi
        return krylov_evolve_vector(hm, u0 @ evolved_u_psi, -t, tol=tol, max_dim=max_dim)

    for ip, p in enumerate(probes):
        stepped = propagate_series(hm, u0 @ p, times, tol=tol, max_dim=max_dim)
        for it, t in enumerate(times):
            w = v_apply(t, stepped[it])
            ww = v_apply(t, krylov_evolve_vector(hm, u0 @ w, t, tol=tol, max_dim=max_dim))
            r_plus[ip, it] = np.linalg.norm(ww - p)
            r_minus[ip, it] = np.linalg.norm(ww + p)
    m = _meta(rep, ham, times, n_probes=len(probes), **meta)
    return (
        TimeSeriesRecord("VtVt_minus_one", times, r_plus.max(axis=0), m, window_end),
        TimeSeriesRecord("VtVt_plus_one", times, r_minus.max(axis=0), m, window_end),
    )


# -- finite temperature -------------------------------------------------------


@dataclass
class GibbsRep:
    """KMS purification in the doubled space and its modular data."""

    rep: DoubledRep
    beta: float
    hamiltonian: np.ndarray
    rho: np.ndarray
    vector: np.ndarray

    def modular_operator(self) -> np.ndarray:
        """``Delta`` as a dense matrix: ``vec(Y) -> vec(rho Y rho^-1)``."""
        w, v = np.linalg.eigh(self.hamiltonian)
        rho = (v * np.exp(-self.beta * (w - w[0]))) @ v.conj().T
        rho_inv = (v * np.exp(self.beta * (w - w[0]))) @ v.conj().T
        big = np.kron(rho, rho_inv.T)
        phi = self.rep.hs_map.toarray()
        return phi.conj().T @ big @ phi

    def modular_generator(self) -> np.ndarray:
        """``M`` with ``Delta = exp(-M)``: ``beta (H (x) 1 - 1 (x) H^T)`` in doubled coordinates."""
        h = self.hamiltonian
        d = h.shape[0]
        big = self.beta * (np.kron(h, np.eye(d)) - np.kron(np.eye(d), h.T))
        phi = self.rep.hs_map.toarray()
        return phi.conj().T @ big @ phi

    def expectation(self, op) -> complex:
        return complex(np.vdot(self.vector, op @ self.vector))


def gibbs_density(h, beta: float) -> np.ndarray:
    h = np.asarray(as_matrix(h), dtype=complex)
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    p = np.exp(-beta * (w - w[0]))
    p /= p.sum()
    return (v * p) @ v.conj().T


def gibbs_doubling(rep: DoubledRep, h, beta: float) -> GibbsRep:
    """Purification ``|Omega_beta>`` of ``exp(-beta H) / Z``; ``beta = 0`` is ``|Omega>``."""
    if beta < 0:
        raise ValueError(f"beta must be non-negative, got {beta}")
    h = np.asarray(as_matrix(h), dtype=complex)
    rho = gibbs_density(h, beta)
    vec = rep.state_from_density(rho)
    return GibbsRep(rep, float(beta), h, rho, vec)
