"""Finite-mode CAR algebra in the Jordan-Wigner representation.

Mode ``k`` (0-based) is the ``k``-th most significant bit of a basis index, so
for ``n_modes = 3`` the basis vector with index ``0b101`` has modes 0 and 2
occupied.  The annihilator carries the usual string of parity signs of the
modes to its left:

    a_k = Z_0 ... Z_{k-1} sigma^-_k

Smearing convention
-------------------
``a(f)`` is *antilinear* in ``f`` and ``a*(f)`` is linear::

    a(f) = sum_k conj(f_k) a_k,        {a(f), a*(g)} = <f|g> 1

with ``<f|g> = sum_k conj(f_k) g_k``.  This is the only choice that keeps the
anticommutator sesquilinear in the standard inner product; mind it whenever a
formula is written with the smearing function in the "linear" slot.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .exceptions import CapacityError, ParityError

MAX_MODES = 12
IDENTITY_TOL = 1e-12
PARITY_TOL = 1e-12

EVEN = "even"
ODD = "odd"
MIXED = "mixed"


@dataclass(frozen=True)
class ModeSystem:
    """A register of ``n_modes`` fermionic modes with a dense size cap."""

    n_modes: int
    max_modes: int = MAX_MODES

    def __post_init__(self):
        if int(self.n_modes) != self.n_modes or self.n_modes < 1:
            raise ValueError(f"n_modes must be a positive integer, got {self.n_modes!r}")
        if self.n_modes > self.max_modes:
            raise CapacityError(
                f"{self.n_modes} modes exceed the configured cap of {self.max_modes} "
                f"(Fock dimension {2 ** self.n_modes})"
            )

    @property
    def dim(self) -> int:
        return 2 ** self.n_modes


# ---------------------------------------------------------------------------
# sparse Jordan-Wigner building blocks (shared with the doubled representation)


@lru_cache(maxsize=None)
def occupations(n_modes: int) -> np.ndarray:
    """Occupation table ``occ[index, mode]`` of shape ``(2**n_modes, n_modes)``."""
    idx = np.arange(2 ** n_modes)
    shifts = n_modes - 1 - np.arange(n_modes)
    occ = (idx[:, None] >> shifts[None, :]) & 1
    occ.setflags(write=False)
    return occ


@lru_cache(maxsize=None)
def parity_diagonal(n_modes: int) -> np.ndarray:
    """Diagonal of the parity operator, ``(-1)**(total occupation)``."""
    d = 1 - 2 * (occupations(n_modes).sum(axis=1) % 2)
    d = d.astype(float)
    d.setflags(write=False)
    return d


@lru_cache(maxsize=None)
def number_diagonal(n_modes: int) -> np.ndarray:
    d = occupations(n_modes).sum(axis=1).astype(float)
    d.setflags(write=False)
    return d


@lru_cache(maxsize=None)
def sparse_annihilators(n_modes: int) -> tuple:
    """Jordan-Wigner annihilators as CSR matrices (real, one entry per column)."""
    occ = occupations(n_modes)
    dim = 2 ** n_modes
    out = []
    for k in range(n_modes):
        cols = np.nonzero(occ[:, k])[0]
        rows = cols - (1 << (n_modes - 1 - k))
        signs = 1 - 2 * (occ[cols, :k].sum(axis=1) % 2)
        out.append(sp.csr_matrix((signs.astype(complex), (rows, cols)), shape=(dim, dim)))
    return tuple(out)


def sparse_smeared(n_modes: int, f) -> sp.csr_matrix:
    """Sparse ``a(f) = sum_k conj(f_k) a_k``."""
    f = _check_vector(f, n_modes)
    ops = sparse_annihilators(n_modes)
    out = sp.csr_matrix((2 ** n_modes, 2 ** n_modes), dtype=complex)
    for k, c in enumerate(f):
        if c != 0:
            out = out + np.conj(c) * ops[k]
    return out


# ---------------------------------------------------------------------------
# dense operators


@lru_cache(maxsize=8)
def _parity_mask(dim: int) -> np.ndarray:
    n_modes = dim.bit_length() - 1
    p = parity_diagonal(n_modes)
    mask = np.equal.outer(p, p)
    mask.setflags(write=False)
    return mask


def _classify(matrix: np.ndarray, tol: float) -> str:
    mask = _parity_mask(matrix.shape[0])
    scale = max(1.0, float(np.max(np.abs(matrix))) if matrix.size else 1.0)
    odd_part = np.max(np.abs(np.where(mask, 0.0, matrix)))
    if odd_part <= tol * scale:
        return EVEN
    even_part = np.max(np.abs(np.where(mask, matrix, 0.0)))
    if even_part <= tol * scale:
        return ODD
    return MIXED


class FockOperator:
    """Immutable dense operator on the antisymmetric Fock space with a parity tag.

    The tag is derived from the matrix on construction; passing ``parity``
    asserts it and raises :class:`ParityError` when the matrix disagrees.
    """

    __slots__ = ("matrix", "parity")

    def __init__(self, matrix, parity: str | None = None, tol: float = PARITY_TOL):
        m = np.array(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator must be a square matrix, got shape {m.shape}")
        dim = m.shape[0]
        if dim < 2 or dim & (dim - 1):
            raise ValueError(f"dimension {dim} is not a power of two")
        if not np.all(np.isfinite(m)):
            raise ValueError("operator has non-finite entries")
        m.setflags(write=False)
        found = _classify(m, tol)
        if parity is not None and parity != found:
            raise ParityError(f"operator tagged {parity!r} but classified as {found!r}")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "parity", found)

    def __setattr__(self, name, value):
        raise AttributeError("FockOperator is immutable")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_modes(self) -> int:
        return self.dim.bit_length() - 1

    def adjoint(self) -> FockOperator:
        return FockOperator(self.matrix.conj().T)

    @property
    def H(self) -> FockOperator:
        return self.adjoint()

    def __matmul__(self, other):
        if isinstance(other, FockOperator):
            return FockOperator(self.matrix @ other.matrix)
        return self.matrix @ np.asarray(other)

    def __add__(self, other):
        if isinstance(other, FockOperator):
            return FockOperator(self.matrix + other.matrix)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, FockOperator):
            return FockOperator(self.matrix - other.matrix)
        return NotImplemented

    def __neg__(self):
        return FockOperator(-self.matrix)

    def __mul__(self, scalar):
        if np.isscalar(scalar):
            return FockOperator(scalar * self.matrix)
        return NotImplemented

    __rmul__ = __mul__

    def __repr__(self):
        return f"FockOperator(n_modes={self.n_modes}, parity={self.parity!r})"


def as_matrix(op) -> np.ndarray:
    return op.matrix if isinstance(op, FockOperator) else np.asarray(op)


def _check_vector(f, n_modes: int) -> np.ndarray:
    f = np.asarray(f, dtype=complex)
    if f.shape != (n_modes,):
        raise ValueError(f"one-particle vector must have length {n_modes}, got shape {f.shape}")
    if not np.all(np.isfinite(f)):
        raise ValueError("one-particle vector has non-finite entries")
    return f


def identity(sys: ModeSystem) -> FockOperator:
    return FockOperator(np.eye(sys.dim))


def mode_annihilators(sys: ModeSystem) -> list[FockOperator]:
    """Dense ``a_1 .. a_N``; exact CAR by construction."""
    return [FockOperator(a.toarray()) for a in sparse_annihilators(sys.n_modes)]


def smeared_annihilator(sys: ModeSystem, f) -> FockOperator:
    """``a(f) = sum_k conj(f_k) a_k`` (antilinear in ``f``)."""
    return FockOperator(sparse_smeared(sys.n_modes, f).toarray())


def smeared_creator(sys: ModeSystem, f) -> FockOperator:
    """``a*(f) = a(f)^*``, linear in ``f``."""
    return FockOperator(sparse_smeared(sys.n_modes, f).conj().T.toarray())


def u0_unitary(sys: ModeSystem, f0, tol: float = IDENTITY_TOL) -> FockOperator:
    """Self-adjoint odd unitary ``U_0 = a(f0) + a*(f0)`` for a unit vector ``f0``."""
    f0 = _check_vector(f0, sys.n_modes)
    norm = np.linalg.norm(f0)
    if abs(norm - 1.0) > tol:
        raise ValueError(f"f0 must have unit norm, got norm {norm:.16g}")
    a = sparse_smeared(sys.n_modes, f0)
    return FockOperator((a + a.conj().T).toarray(), parity=ODD)


def parity_operator(sys: ModeSystem) -> FockOperator:
    return FockOperator(np.diag(parity_diagonal(sys.n_modes)))


def number_operator(sys: ModeSystem) -> FockOperator:
    return FockOperator(np.diag(number_diagonal(sys.n_modes)))


def parity_of(op, tol: float = PARITY_TOL) -> str:
    """Classify as ``"even"``, ``"odd"`` or ``"mixed"`` relative to the parity operator."""
    return _classify(np.asarray(as_matrix(op), dtype=complex), tol)


def operator_norm(op) -> float:
    """Largest singular value."""
    m = as_matrix(op)
    if not np.all(np.isfinite(m)):
        raise ValueError("operator has non-finite entries")
    return float(np.linalg.norm(m, 2))


def normalized_trace(op) -> complex:
    """``tr(A) / dim``: the tracial state."""
    m = as_matrix(op)
    if not np.all(np.isfinite(m)):
        raise ValueError("operator has non-finite entries")
    return complex(np.trace(m) / m.shape[0])


def commutator(a, b) -> FockOperator:
    return FockOperator(as_matrix(a) @ as_matrix(b) - as_matrix(b) @ as_matrix(a))


def anticommutator(a, b) -> FockOperator:
    return FockOperator(as_matrix(a) @ as_matrix(b) + as_matrix(b) @ as_matrix(a))


def inner(f, g) -> complex:
    """``<f|g>``, antilinear in ``f``."""
    return complex(np.vdot(f, g))
