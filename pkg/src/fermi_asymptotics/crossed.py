"""The full algebra as a crossed product of the even algebra by ``alpha_0 = Ad U_0``.

A pair ``(e1, e2)`` of even operators stands for ``e1 + e2 U_0``; with this
(right) placement of ``U_0`` the product

    (A1, A2)(B1, B2) = (A1 B1 + A2 alpha_0(B2), A1 B2 + A2 alpha_0(B1))

is exactly operator multiplication, and ``tau_t(0, 1) = (0, V_t)`` gives the
cocycle ``V_t = tau_t(U_0) U_0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import Propagator, evolve_operator
from .exceptions import ParityError
from .fock import (
    EVEN,
    ODD,
    FockOperator,
    as_matrix,
    normalized_trace,
    operator_norm,
    parity_diagonal,
)


@dataclass(frozen=True)
class CrossedPair:
    e1: FockOperator
    e2: FockOperator

    def __post_init__(self):
        for name in ("e1", "e2"):
            op = getattr(self, name)
            if not isinstance(op, FockOperator):
                op = FockOperator(op)
                object.__setattr__(self, name, op)
            if op.parity != EVEN:
                raise ParityError(f"crossed-pair component {name} is {op.parity}, not even")
        if self.e1.dim != self.e2.dim:
            raise ValueError("crossed-pair components act on different spaces")

    @classmethod
    def unit(cls, dim: int) -> CrossedPair:
        return cls(FockOperator(np.eye(dim)), FockOperator(np.zeros((dim, dim))))

    @classmethod
    def generator(cls, dim: int) -> CrossedPair:
        """The pair ``(0, 1)`` representing ``U_0``."""
        return cls(FockOperator(np.zeros((dim, dim))), FockOperator(np.eye(dim)))


def alpha0(op, u0: FockOperator) -> FockOperator:
    """``U_0 A U_0`` on the even algebra; involutive."""
    a = op if isinstance(op, FockOperator) else FockOperator(op)
    if a.parity != EVEN:
        raise ParityError(f"alpha0 acts on even operators, got {a.parity}")
    u = u0.matrix
    return FockOperator(u @ a.matrix @ u)


def cp_mul(x: CrossedPair, y: CrossedPair, u0: FockOperator) -> CrossedPair:
    a1, a2 = x.e1.matrix, x.e2.matrix
    b1, b2 = y.e1.matrix, y.e2.matrix
    u = u0.matrix
    return CrossedPair(
        FockOperator(a1 @ b1 + a2 @ (u @ b2 @ u)),
        FockOperator(a1 @ b2 + a2 @ (u @ b1 @ u)),
    )


def cp_flatten(x: CrossedPair, u0: FockOperator) -> FockOperator:
    """``e1 + e2 U_0``."""
    return FockOperator(x.e1.matrix + x.e2.matrix @ u0.matrix)


def even_odd_split(op):
    m = as_matrix(op)
    p = parity_diagonal(m.shape[0].bit_length() - 1)
    mask = np.equal.outer(p, p)
    return np.where(mask, m, 0), np.where(mask, 0, m)


def cp_lift(op, u0: FockOperator) -> CrossedPair:
    """Split ``X = X_even + (X_odd U_0) U_0`` into its crossed pair."""
    if u0.parity != ODD:
        raise ParityError("U_0 must be odd")
    even, odd = even_odd_split(op)
    return CrossedPair(FockOperator(even), FockOperator(odd @ u0.matrix))


def compute_Vt(prop: Propagator, u0: FockOperator, t: float) -> FockOperator:
    """Cocycle ``V_t = tau_t(U_0) U_0``: even, unitary, ``V_0 = 1``."""
    return FockOperator(evolve_operator(prop, u0, t).matrix @ u0.matrix)


def scalar_distance(op):
    """Nearest multiple of the identity: ``(c, ||X - c 1||)`` with ``c`` the normalized trace."""
    m = as_matrix(op)
    c = normalized_trace(m)
    return c, operator_norm(m - c * np.eye(m.shape[0]))


def conjugation_identity_check(prop: Propagator, u0: FockOperator, a_even, t: float) -> float:
    """``|| tau_t(U_0 A U_0) - V_t alpha_0(tau_t A) V_t^* ||``."""
    a = a_even if isinstance(a_even, FockOperator) else FockOperator(a_even)
    if a.parity != EVEN:
        raise ParityError("conjugation identity is stated for even A")
    v = compute_Vt(prop, u0, t).matrix
    lhs = evolve_operator(prop, alpha0(a, u0), t).matrix
    rhs = v @ alpha0(evolve_operator(prop, a, t), u0).matrix @ v.conj().T
    return operator_norm(lhs - rhs)


def cocycle_deviations(prop: Propagator, u0: FockOperator, t: float) -> dict:
    """Deviations of the algebraic cocycle relations at time ``t``."""
    v = compute_Vt(prop, u0, t)
    av = alpha0(v, u0).matrix
    eye = np.eye(v.dim)
    return {
        "adjoint_equals_alpha0": operator_norm(v.matrix.conj().T - av),
        "v_alpha0_v_is_one": operator_norm(v.matrix @ av - eye),
        "unitary": operator_norm(v.matrix.conj().T @ v.matrix - eye),
    }
