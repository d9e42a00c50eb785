"""Randomised suite of exact algebraic identities (the ``verify`` subcommand).

Every identity is an equality that holds for any Hamiltonian and any test
function; its deviation is the maximum over ``n_random`` random instances.
Doubled-space deviations are Frobenius norms, an upper bound on the
operator norm that avoids dense ``4**N``-dimensional SVDs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .crossed import CrossedPair, alpha0, conjugation_identity_check, cp_flatten, cp_mul, cocycle_deviations
from .doubling import (
    SOLVER_MAX_MODES,
    DoubledRep,
    assemble_doubled_H,
    build_modular_J,
    doubled_quadratic,
    doubled_quartic,
    embed_a,
    embed_b,
    solve_J_constraints,
)
from .dynamics import evolve_operator, quasifree_evolve, spectral_propagator
from .fock import (
    FockOperator,
    operator_norm,
    parity_diagonal,
    smeared_annihilator,
    smeared_creator,
    u0_unitary,
)
from .model import build_model

MAX_DOUBLED_VERIFY = 8


@dataclass(frozen=True)
class IdentityResult:
    name: str
    deviation: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.deviation) and self.deviation < self.tol)


@dataclass
class VerifyReport:
    n_modes: int
    results: list

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def failures(self) -> list:
        return [r for r in self.results if not r.passed]

    def to_dict(self) -> dict:
        return {
            "n_modes": self.n_modes,
            "passed": self.passed,
            "identities": [
                {"name": r.name, "deviation": r.deviation, "tol": r.tol, "passed": r.passed}
                for r in self.results
            ],
            "failures": [r.name for r in self.failures()],
        }

    def lines(self):
        for r in self.results:
            yield f"{'PASS' if r.passed else 'FAIL'}  {r.name:<34s} {r.deviation:.3e}  (tol {r.tol:.0e})"


def random_unit(rng, n) -> np.ndarray:
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


def random_even(rng, n) -> np.ndarray:
    d = 2 ** n
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    p = parity_diagonal(n)
    return np.where(np.equal.outer(p, p), m, 0) / np.sqrt(d)


def _fro(x) -> float:
    return float(spla.norm(x)) if sp.issparse(x) else float(np.linalg.norm(x))


class _Max:
    def __init__(self):
        self.values = {}

    def add(self, name, value):
        self.values[name] = max(self.values.get(name, 0.0), float(value))


def direct_identities(model, n_random: int, rng, lam: float) -> dict:
    n = model.n_modes
    sys = model.system
    acc = _Max()
    prop = spectral_propagator(model.hamiltonian(lam))
    h = model.terms.kinetic
    prop0 = spectral_propagator(model.hamiltonian(0.0))
    eye = np.eye(sys.dim)
    for _ in range(n_random):
        f, g, f0 = random_unit(rng, n), random_unit(rng, n), random_unit(rng, n)
        t = float(rng.uniform(0, 10))
        af, ag = smeared_annihilator(sys, f).matrix, smeared_annihilator(sys, g).matrix
        agd = ag.conj().T
        acc.add("car_annihilators", operator_norm(af @ ag + ag @ af))
        acc.add("car_mixed", operator_norm(af @ agd + agd @ af - np.vdot(f, g) * eye))
        u0 = u0_unitary(sys, f0)
        acc.add("u0_square", operator_norm(u0.matrix @ u0.matrix - eye))
        x = CrossedPair(FockOperator(random_even(rng, n)), FockOperator(random_even(rng, n)))
        y = CrossedPair(FockOperator(random_even(rng, n)), FockOperator(random_even(rng, n)))
        lhs = cp_flatten(cp_mul(x, y, u0), u0).matrix
        rhs = cp_flatten(x, u0).matrix @ cp_flatten(y, u0).matrix
        acc.add("crossed_homomorphism", operator_norm(lhs - rhs))
        dev = cocycle_deviations(prop, u0, t)
        acc.add("cocycle_adjoint_is_alpha0", dev["adjoint_equals_alpha0"])
        acc.add("cocycle_v_alpha0_v", dev["v_alpha0_v_is_one"])
        acc.add("cocycle_unitary", dev["unitary"])
        acc.add("conjugation_identity", conjugation_identity_check(prop, u0, x.e1, t))
        acc.add("alpha0_involution", operator_norm(alpha0(alpha0(x.e1, u0), u0).matrix - x.e1.matrix))
        lifted = smeared_annihilator(sys, quasifree_evolve(h, f, t)).matrix
        acc.add("quasifree_lift", operator_norm(evolve_operator(prop0, af, t).matrix - lifted))
        ac = evolve_operator(prop0, af, t).matrix @ agd + agd @ evolve_operator(prop0, af, t).matrix
        overlap = abs(np.vdot(g, quasifree_evolve(h, f, t)))
        acc.add("quasifree_overlap_norm", abs(operator_norm(ac) - overlap))
        acc.add("tracial_two_point_direct",
                abs(np.trace(smeared_creator(sys, f).matrix @ ag) / sys.dim - np.vdot(g, f) / 2))
    return acc.values


def doubled_identities(model, n_random: int, rng, lam: float) -> dict:
    n = model.n_modes
    rep = DoubledRep(n)
    acc = _Max()
    vac = rep.vacuum
    w = rep.W
    eye = sp.identity(rep.dim, format="csr")
    build_modular_J(rep, check=True)
    acc.add("W_vacuum", np.linalg.norm(w @ vac - vac))
    acc.add("W_square", _fro(w @ w - eye))
    acc.add("J_vacuum", np.linalg.norm(rep.apply_J(vac) - vac))
    acc.add("J_square", _fro(rep.J_unitary @ rep.J_unitary.conj() - eye))
    if n <= SOLVER_MAX_MODES:
        u = solve_J_constraints(rep, "modular")
        acc.add("J_matches_constraint_solution", float(np.max(np.abs(u - rep.J_unitary.toarray()))))
    for lam_k in sorted({0.0, float(lam)}):
        ham = assemble_doubled_H(rep, model.terms, lam_k)
        acc.add("doubled_H_vacuum", np.linalg.norm(ham.matrix @ vac))
        acc.add("doubled_H_selfadjoint", _fro(ham.matrix - ham.matrix.conj().T))
    for _ in range(n_random):
        f, g, k = random_unit(rng, n), random_unit(rng, n), random_unit(rng, n)
        af, ag, ak = embed_a(rep, f), embed_a(rep, g), embed_a(rep, k)
        bf, bg = embed_b(rep, f), embed_b(rep, g)
        agd, bgd = ag.conj().T, bg.conj().T
        acc.add("doubled_car_mixed", _fro(af @ agd + agd @ af - np.vdot(f, g) * eye))
        acc.add("doubled_car_annihilators", _fro(af @ ag + ag @ af))
        acc.add("ab_anticommutator", _fro(af @ bg + bg @ af))
        acc.add("ab_star_anticommutator", _fro(af @ bgd + bgd @ af))
        acc.add("tracial_two_point", abs(np.vdot(vac, af @ (agd @ vac)) - np.vdot(f, g) / 2))
        acc.add("W_odd", _fro(w @ af @ w + af))
        acc.add("J_generator_relation", _fro(rep.conjugate_by_J(af) - bf.conj().T @ w))
        x = (af.conj().T @ ag + 0.7j * ak + ag @ ak).tocsr()
        acc.add("J_tomita", np.linalg.norm(rep.apply_J(x @ vac) - x.conj().T @ vac))
        acc.add("vacuum_to_commutant", np.linalg.norm(af @ vac - w @ (bf @ vac)))
        wb = (w @ bf).tocsr()
        acc.add("commutant_linear", _fro(wb @ ag - ag @ wb))
        quad = (ag.conj().T @ ak).tocsr()
        acc.add("commutant_quadratic", _fro(wb @ quad - quad @ wb))
        acc.add("doubled_quadratic_vacuum", np.linalg.norm(doubled_quadratic(rep, f, g) @ vac))
        acc.add("doubled_quartic_vacuum", np.linalg.norm(doubled_quartic(rep, f, g) @ vac))
    return acc.values


def identity_suite(n_modes: int, n_random: int = 5, seed: int = 0, tol: float = 1e-10,
                   lam: float = 1.0, model_kwargs: dict | None = None, doubled: bool = True) -> VerifyReport:
    rng = np.random.default_rng(seed)
    model = build_model(n_modes, **(model_kwargs or {}))
    values = direct_identities(model, n_random, rng, lam)
    if doubled and n_modes <= MAX_DOUBLED_VERIFY:
        values.update(doubled_identities(model, n_random, rng, lam))
    return VerifyReport(n_modes, [IdentityResult(k, v, tol) for k, v in values.items()])
