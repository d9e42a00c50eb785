"""Acceptance criteria, one test per criterion plus supplementary checks.

Run alone with ``python3 -m pytest tests/test_acceptance.py -v``; the
terminal summary lists one PASS/FAIL line per criterion.  Criteria 4 and
7 are red by construction of the stated identity (see the README); each
has a supplementary test for the identity that does hold.
"""

import numpy as np
import pytest
import scipy.sparse as sp

from conftest import random_vector
from fermi_asymptotics import build_model
from fermi_asymptotics.cli import main
from fermi_asymptotics.config import ExperimentConfig
from fermi_asymptotics.crossed import compute_Vt, scalar_distance
from fermi_asymptotics.doubling import DoubledRep, assemble_doubled_H, gibbs_doubling
from fermi_asymptotics.dynamics import (
    evolve_operator,
    krylov_evolve_vector,
    quasifree_evolve,
    spectral_propagator,
)
from fermi_asymptotics.experiments import local_perturbation, matched_window, run_doubled, unit_vector
from fermi_asymptotics.fock import operator_norm, smeared_annihilator, smeared_creator, u0_unitary
from fermi_asymptotics.metrics import loglog_slope, window_grid
from fermi_asymptotics.perturb import (
    PseudoInverse,
    commutant_difference,
    kms_derivative,
    perturbation_series,
    resolvent_agreement,
    vector_angle,
)
from fermi_asymptotics.verify import identity_suite, random_even
from fermi_asymptotics.writers import CSV_COLUMNS, SWEEP_COLUMNS, read_series_csv


# -- 1 ----------------------------------------------------------------------------


@pytest.mark.slow
def test_c1_exact_identities(criterion):
    worst, failed = {}, []
    for n in (2, 4, 6):
        report = identity_suite(n, n_random=100, seed=100 + n, tol=1e-10)
        worst[n] = max(r.deviation for r in report.results)
        failed += [f"N={n}:{r.name}" for r in report.failures()]
    detail = "max deviation " + ", ".join(f"N={n}: {v:.1e}" for n, v in worst.items())
    criterion("1 exact identities", not failed, detail)
    assert not failed, failed


# -- 2 ----------------------------------------------------------------------------


def _cross_rep(n, n_samples, seed):
    rng = np.random.default_rng(seed)
    model = build_model(n)
    rep = DoubledRep(n)
    ham = assemble_doubled_H(rep, model.terms, 1.0)
    prop = spectral_propagator(model.hamiltonian(1.0))
    d = 2 ** n
    plain, sandwich = 0.0, 0.0
    for _ in range(n_samples):
        x = random_even(rng, n)
        t = float(rng.uniform(0, 10))
        px = rep.embed_operator(x)
        tx = evolve_operator(prop, x, t).matrix
        psi = krylov_evolve_vector(ham.matrix, rep.vacuum, t, tol=1e-12)
        lhs = np.vdot(psi, px @ psi)
        plain = max(plain, abs(lhs - np.trace(tx) / d))
        # stronger form: <Y Omega| e^{iHt} pi(X) e^{-iHt} |Z Omega> = tr(Y* tau_t(X) Z) / d
        y, z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)), random_even(rng, n)
        yv = rep.embed_operator(y) @ rep.vacuum
        zv = krylov_evolve_vector(ham.matrix, rep.embed_operator(z) @ rep.vacuum, t, tol=1e-12)
        back = krylov_evolve_vector(ham.matrix, px @ zv, -t, tol=1e-12)
        ref = np.trace(y.conj().T @ tx @ z) / d
        sandwich = max(sandwich, abs(np.vdot(yv, back) - ref) / max(1.0, abs(ref)))
    return plain, sandwich


def test_c2_cross_representation(criterion):
    results = {n: _cross_rep(n, 50, seed=n) for n in (3, 5)}
    ok = all(p < 1e-8 and s < 1e-8 for p, s in results.values())
    detail = ", ".join(f"N={n}: {p:.1e} (sandwiched {s:.1e})" for n, (p, s) in results.items())
    criterion("2 cross-representation", ok, detail)
    assert ok


# -- 3 ----------------------------------------------------------------------------


def test_c3_quasifree_exactness(criterion):
    rng = np.random.default_rng(3)
    lift, overlap = 0.0, 0.0
    for n in (2, 4, 6):
        model = build_model(n)
        prop = spectral_propagator(model.hamiltonian(0.0))
        h = model.terms.kinetic
        for _ in range(5):
            f, g = random_vector(rng, n), random_vector(rng, n)
            gd = smeared_creator(model.system, g).matrix
            for t in np.linspace(0, 10, 11):
                at = evolve_operator(prop, smeared_annihilator(model.system, f), t).matrix
                ft = quasifree_evolve(h, f, t)
                lift = max(lift, operator_norm(at - smeared_annihilator(model.system, ft).matrix))
                overlap = max(overlap, abs(operator_norm(at @ gd + gd @ at) - abs(np.vdot(ft, g))))
    ok = lift < 1e-8 and overlap < 1e-10
    criterion("3 quasifree exactness", ok, f"lift {lift:.1e}, anticommutator norm {overlap:.1e}")
    assert ok


# -- 4 ----------------------------------------------------------------------------


def _cocycle_scalar_distances(n, sign):
    model = build_model(n)
    cfg = ExperimentConfig().replace(system={"n_modes": n})
    times = window_grid(matched_window(model, cfg), 41)
    u0 = u0_unitary(model.system, unit_vector(n, 0))
    out = {}
    for lam in (0.0, 1.0):
        prop = spectral_propagator(model.hamiltonian(lam))
        vals = []
        for t in times:
            v = compute_Vt(prop, u0, t).matrix
            vals.append(scalar_distance(v + sign * v.conj().T)[1])
        out[lam] = max(vals)
    return out


def test_c4_quasifree_scalar_property(criterion):
    # stated as V_t - V_t*; under quasifree dynamics that is the commutator
    # [tau_t U_0, U_0], which is not a multiple of one
    m = _cocycle_scalar_distances(4, -1)
    ratio = m[1.0] / max(m[0.0], 1e-300)
    ok = m[0.0] < 1e-9 and ratio > 100
    criterion("4 quasifree scalar (V-V*)", ok,
              f"lambda=0 max {m[0.0]:.2e}, lambda=1 max {m[1.0]:.2e}, ratio {ratio:.3g}")
    assert ok


@pytest.mark.parametrize("n", [4, 6])
def test_c4_supplement_anticommutator_is_scalar(criterion, n):
    m = _cocycle_scalar_distances(n, +1)
    ratio = m[1.0] / max(m[0.0], 1e-300)
    ok = m[0.0] < 1e-9 and ratio > 100
    criterion(f"4s V+V* scalar, N={n}", ok,
              f"lambda=0 max {m[0.0]:.2e}, lambda=1 max {m[1.0]:.2e}, ratio {ratio:.3g}")
    assert ok


# -- 5 and 6 ------------------------------------------------------------------------


@pytest.fixture(scope="module")
def doubled_runs():
    runs = {}
    for n in (4, 5, 6):
        runs[n] = run_doubled(ExperimentConfig().replace(system={"n_modes": n}))
    return runs


@pytest.mark.slow
def test_c5_number_growth(criterion, doubled_runs):
    ok, parts = True, []
    for n, res in doubled_runs.items():
        d = res.derived
        s0, s1, gain = d["number_slope_lambda_0"], d["number_slope_lambda_1"], d["number_mid_gain_lambda_1"]
        ok &= abs(s0) < 1e-6 and s1 > 0 and gain > 0
        parts.append(f"N={n}: slope0 {s0:.1e}, slope1 {s1:.3g}, gain {gain:.3g}")
    criterion("5 number growth", ok, "; ".join(parts))
    assert ok


@pytest.mark.slow
def test_c6_strong_contrast(criterion, doubled_runs):
    ok, parts = True, []
    for n, res in doubled_runs.items():
        s, r = res.derived["s_ratio"], res.derived["r_ratio"]
        if n >= 5:
            ok &= s >= 10 and r >= 10
        parts.append(f"N={n}{'' if n >= 5 else ' (reported)'}: s x{s:.3g}, r x{r:.3g}")
    criterion("6 strong-limit contrast", ok, "; ".join(parts))
    assert ok


# -- 7 and 8 ------------------------------------------------------------------------


def _perturbation_setting(n, beta):
    model = build_model(n)
    rep = DoubledRep(n)
    h = model.hamiltonian(1.0).matrix
    v = local_perturbation(model, 0)
    hh = rep.embed_operator(h)
    gen = (hh - rep.conjugate_by_J(hh)).tocsr()
    vh = rep.embed_operator(v)
    pinv = PseudoInverse(gen)
    gibbs = gibbs_doubling(rep, h, beta)
    return rep, h, v, gen, vh, pinv, gibbs


@pytest.fixture(scope="module")
def perturbation_data():
    out = {}
    for n in (3, 4):
        rep, h, v, gen, vh, pinv, gibbs = _perturbation_setting(n, 1.0)
        series = perturbation_series(rep, gen, vh, 2, reference=gibbs.vector, pinv=pinv)
        d = commutant_difference(rep, vh)
        lams = np.logspace(-3, -1, 5)
        slopes = [loglog_slope(lams, series.residuals(gen, d, lams, k)) for k in (1, 2)]
        der = kms_derivative(rep, h, v, 1.0)
        off = der - pinv.kernel_projection(der)
        tracial = perturbation_series(rep, gen, vh, 2, pinv=pinv)
        out[n] = {
            "slopes": slopes,
            "angle": vector_angle(series.vectors[0], der),
            "offkernel_angle": vector_angle(series.vectors[0], off),
            "kernel_fraction": np.linalg.norm(der - off) / np.linalg.norm(der),
            "tracial": max(np.linalg.norm(b) for b in tracial.vectors),
            "pinv": pinv,
            "psi": rep.a_modes[0].conj().T @ gibbs.vector,
        }
    return out


def test_c7_perturbation_series(criterion, perturbation_data):
    ok, parts = True, []
    for n, d in perturbation_data.items():
        s1, s2 = d["slopes"]
        ok &= abs(s1 - 2) <= 0.3 and abs(s2 - 3) <= 0.3 and d["angle"] < 1e-4 and d["tracial"] < 1e-10
        parts.append(f"N={n}: slopes {s1:.2f}/{s2:.2f}, angle {d['angle']:.2g}, beta=0 {d['tracial']:.0e}")
    criterion("7 perturbation series", ok, "; ".join(parts))
    assert ok


def test_c7_supplement_offkernel_first_order(criterion, perturbation_data):
    ok, parts = True, []
    for n, d in perturbation_data.items():
        ok &= d["offkernel_angle"] < 1e-4 and all(abs(s - k - 2) <= 0.3 for k, s in enumerate(d["slopes"]))
        parts.append(f"N={n}: angle {d['offkernel_angle']:.1e}, kernel share of derivative "
                     f"{d['kernel_fraction']:.2f}")
    criterion("7s first order off kernel", ok, "; ".join(parts))
    assert ok


def test_c8_resolvent(criterion, perturbation_data):
    ok, parts = True, []
    for n, d in perturbation_data.items():
        eps, diffs, rich = resolvent_agreement(d["pinv"], d["psi"], [1e-7, 1e-6, 1e-5, 1e-4])
        slope = loglog_slope(eps, diffs)
        ok &= abs(slope - 1) <= 0.2
        parts.append(f"N={n}: slope {slope:.3f}, extrapolated {rich:.1e}")
    criterion("8 resolvent limit", ok, "; ".join(parts))
    assert ok


# -- 9 ----------------------------------------------------------------------------


def test_c9_determinism_and_schema(criterion, tmp_path):
    cfg = ExperimentConfig().replace(system={"n_modes": 3},
                                     run={"n_times": 11, "sweep_n": [2, 3], "sweep_lambda": [0.0, 1.0]})
    path = tmp_path / "cfg.json"
    path.write_text(cfg.to_json())
    dirs = [tmp_path / "first", tmp_path / "second"]
    codes = []
    for i, out in enumerate(dirs):
        for cmd in ("verify", "decay", "crossed", "doubled", "perturb"):
            codes.append(main([cmd, "--config", str(path), "--out", str(out), "--seed", "5"]))
        codes.append(main(["sweep", "--config", str(path), "--out", str(out), "--threads", str(i + 1)]))
    a = sorted(p.name for p in dirs[0].iterdir())
    b = sorted(p.name for p in dirs[1].iterdir())
    identical = a == b and all((dirs[0] / f).read_bytes() == (dirs[1] / f).read_bytes() for f in a)
    n_rows, schema_ok = 0, True
    for f in a:
        if f.endswith(".csv") and not f.startswith("sweep_"):
            n_rows += len(read_series_csv(dirs[0] / f))
        elif f.startswith("sweep_"):
            header = (dirs[0] / f).read_text().split("\n")[0]
            schema_ok &= tuple(header.split(",")) == SWEEP_COLUMNS
    ok = identical and schema_ok and all(c == 0 for c in codes) and n_rows > 0
    criterion("9 determinism and schema", ok,
              f"{len(a)} files byte-identical: {identical}, {n_rows} rows validated "
              f"against {len(CSV_COLUMNS)}-column schema")
    assert ok
