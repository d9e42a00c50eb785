"""Experiment drivers shared by the command line and the demo scripts.

Each ``run_*`` function takes an :class:`ExperimentConfig` and returns an
:class:`ExperimentResult` holding the time series, derived scalars (ratios,
slopes, floors) and the windows used.  Contrasts between the interacting run
and the quasifree reference always use one time grid: the recurrence window
of the quasifree Hamiltonian (or ``run.t_max`` if set).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import ExperimentConfig
from .crossed import compute_Vt, scalar_distance, cocycle_deviations
from .doubling import (
    DoubledRep,
    assemble_doubled_H,
    embed_a,
    gibbs_doubling,
    number_growth,
    strong_VtVt_test,
    uu_prime_diagnostics,
)
from .dynamics import spectral_propagator
from .exceptions import ConfigError
from .fock import mode_annihilators, u0_unitary
from .metrics import (
    TimeSeriesRecord,
    contrast_ratio,
    expectation_series,
    loglog_slope,
    multicluster,
    norm_decay,
    recurrence_window,
    window_grid,
)
from .model import Model, build_model
from .perturb import (
    PseudoInverse,
    commutant_difference,
    kms_derivative,
    perturbation_series,
    perturbed_correlator,
    resolvent_agreement,
    vector_angle,
)

MAX_DOUBLED_RUN = 8
MAX_PERTURB_MODES = 5


@dataclass
class ExperimentResult:
    records: list = field(default_factory=list)
    derived: dict = field(default_factory=dict)
    windows: dict = field(default_factory=dict)


def model_from_config(cfg: ExperimentConfig, n_modes: int | None = None) -> Model:
    m = cfg.model
    return build_model(
        cfg.system.n_modes if n_modes is None else n_modes,
        spacing_p=m.spacing_p, spacing_q=m.spacing_q, p0=m.p0, q0=m.q0, mass=m.mass,
        w_width=m.w_width, v_width=m.v_width, coupling=m.coupling,
    )


def matched_window(model: Model, cfg: ExperimentConfig) -> float:
    """Common window for a quasifree/interacting contrast."""
    if cfg.run.t_max is not None:
        return float(cfg.run.t_max)
    return recurrence_window(spectral_propagator(model.hamiltonian(0.0)), c=cfg.run.window_constant)


def unit_vector(n: int, k: int) -> np.ndarray:
    f = np.zeros(n, dtype=complex)
    f[k] = 1.0
    return f


def _couplings(cfg):
    lam = float(cfg.model.coupling)
    return [0.0] if lam == 0 else [0.0, lam]


# -- direct space -------------------------------------------------------------------


def run_decay(cfg: ExperimentConfig) -> ExperimentResult:
    """Norm, weak and clustering series for the quasifree and interacting Hamiltonians."""
    model = model_from_config(cfg)
    n = model.n_modes
    if n < 2:
        raise ConfigError("decay needs at least two modes")
    T = matched_window(model, cfg)
    times = window_grid(T, cfg.run.n_times)
    a = mode_annihilators(model.system)
    k, last = cfg.run.f_index, (cfg.run.f_index + 1) % n
    # number-conserving observables see mostly the one-particle sector, where
    # the pair interaction is invisible; hopping on disjoint bonds is not
    hop_a = local_perturbation(model, k)
    hop_b = local_perturbation(model, (k + 2) % n)
    u0 = u0_unitary(model.system, unit_vector(n, k))
    eye = np.eye(model.system.dim)
    res = ExperimentResult(windows={"matched": T})
    stats = {}
    for lam in _couplings(cfg):
        prop = spectral_propagator(model.hamiltonian(lam))
        meta = {"N": n, "lambda": lam}
        res.windows[f"own_lambda_{lam:g}"] = recurrence_window(prop, c=cfg.run.window_constant)
        nc = norm_decay(prop, hop_a, hop_b, times, "commutator", window_end=T, **meta)
        na = norm_decay(prop, a[k].matrix, a[last].H.matrix, times, "anticommutator", window_end=T, **meta)
        wv = expectation_series(prop, eye, u0.matrix, u0.matrix, times, quantity="weak_Vt",
                                window_end=T, **meta)
        cd, cp, bound = multicluster(prop, hop_a, hop_b, hop_a, hop_b, times, window_end=T, **meta)
        res.records += [nc, na, wv, cd, cp]
        stats[lam] = {
            "norm_floor": nc.late_min(),
            "weak_average": float(np.mean(np.abs(wv.late()[1]))),
            "cluster_bound": bound,
            "cluster_occupancy": float(np.mean(np.abs(cp.windowed()[1]) < bound)),
        }
    for lam, s in stats.items():
        for key, val in s.items():
            res.derived[f"{key}_lambda_{lam:g}"] = val
    if len(stats) == 2:
        lam = _couplings(cfg)[1]
        res.derived["norm_floor_ratio"] = contrast_ratio(stats[lam]["norm_floor"], stats[0.0]["norm_floor"])
        res.derived["weak_average_ratio"] = contrast_ratio(stats[lam]["weak_average"], stats[0.0]["weak_average"])
    return res


def run_crossed(cfg: ExperimentConfig) -> ExperimentResult:
    """Scalar distance of ``V_t - V_t*`` and ``V_t + V_t*`` plus cocycle deviations."""
    model = model_from_config(cfg)
    n = model.n_modes
    T = matched_window(model, cfg)
    times = window_grid(T, cfg.run.n_times)
    u0 = u0_unitary(model.system, unit_vector(n, cfg.run.f_index))
    res = ExperimentResult(windows={"matched": T})
    maxima = {}
    for lam in _couplings(cfg):
        prop = spectral_propagator(model.hamiltonian(lam))
        minus, plus, coc = [], [], []
        for t in times:
            v = compute_Vt(prop, u0, t).matrix
            minus.append(scalar_distance(v - v.conj().T)[1])
            plus.append(scalar_distance(v + v.conj().T)[1])
            coc.append(max(cocycle_deviations(prop, u0, t).values()))
        meta = {"N": n, "lambda": lam}
        recs = [
            TimeSeriesRecord("scalar_distance_difference", times, minus, meta, T),
            TimeSeriesRecord("scalar_distance_sum", times, plus, meta, T),
            TimeSeriesRecord("cocycle_deviation", times, coc, meta, T),
        ]
        res.records += recs
        maxima[lam] = [r.window_max() for r in recs]
        res.derived[f"max_difference_lambda_{lam:g}"] = maxima[lam][0]
        res.derived[f"max_sum_lambda_{lam:g}"] = maxima[lam][1]
        res.derived[f"max_cocycle_deviation_lambda_{lam:g}"] = maxima[lam][2]
    if len(maxima) == 2:
        lam = _couplings(cfg)[1]
        res.derived["difference_ratio"] = contrast_ratio(maxima[lam][0], maxima[0.0][0])
        res.derived["sum_ratio"] = contrast_ratio(maxima[lam][1], maxima[0.0][1])
    return res


# -- doubled space ------------------------------------------------------------------


def run_doubled(cfg: ExperimentConfig) -> ExperimentResult:
    """``s(t)``, ``u(t)``, ``n(t)`` and ``r_pm(t)`` on a shared grid for both couplings."""
    model = model_from_config(cfg)
    n = model.n_modes
    if n > MAX_DOUBLED_RUN:
        raise ConfigError(f"doubled runs are limited to N <= {MAX_DOUBLED_RUN}")
    T = matched_window(model, cfg)
    times = window_grid(T, cfg.run.n_times)
    rep = DoubledRep(n)
    f = unit_vector(n, cfg.run.f_index)
    kw = {"tol": cfg.run.krylov_tol, "max_dim": cfg.run.krylov_max_dim}
    res = ExperimentResult(windows={"matched": T})
    stats = {}
    for lam in _couplings(cfg):
        ham = assemble_doubled_H(rep, model.terms, lam)
        s, u = uu_prime_diagnostics(rep, ham, f, times, window_end=T, **kw)
        nrec = number_growth(rep, ham, f, times, window_end=T, **kw)
        rp, rm = strong_VtVt_test(rep, ham, f, times, window_end=T, **kw)
        rmin = TimeSeriesRecord("VtVt_min", times, np.minimum(rp.values, rm.values), rp.metadata, T)
        res.records += [s, u, nrec, rp, rm, rmin]
        mid = int(np.argmin(np.abs(times - T / 2)))
        stats[lam] = {
            "s_late_min": s.late_min(),
            "r_late_min": rmin.late_min(),
            "number_slope": nrec.slope(),
            "number_mid_gain": float(nrec.values[mid] - nrec.values[0]),
            "quadratic_c_number": ham.quadratic_c_number,
        }
    for lam, s in stats.items():
        for key, val in s.items():
            res.derived[f"{key}_lambda_{lam:g}"] = val
    if len(stats) == 2:
        lam = _couplings(cfg)[1]
        res.derived["s_ratio"] = contrast_ratio(stats[lam]["s_late_min"], stats[0.0]["s_late_min"])
        res.derived["r_ratio"] = contrast_ratio(stats[lam]["r_late_min"], stats[0.0]["r_late_min"])
    return res


def local_perturbation(model: Model, k: int = 0) -> np.ndarray:
    """Even hopping term ``a*_k a_l + a*_l a_k`` between neighbouring modes."""
    a = mode_annihilators(model.system)
    n = model.n_modes
    if n < 2:
        raise ConfigError("the perturbation needs at least two modes")
    l = (k + 1) % n
    return (a[k].H @ a[l] + a[l].H @ a[k]).matrix


def run_perturb(cfg: ExperimentConfig) -> ExperimentResult:
    """Series residual scaling, first-order check, resolvent agreement and perturbed correlator."""
    model = model_from_config(cfg)
    n = model.n_modes
    if n > MAX_PERTURB_MODES:
        raise ConfigError(f"perturb needs a dense doubled space, N <= {MAX_PERTURB_MODES}")
    beta = cfg.system.beta
    rep = DoubledRep(n)
    h = model.hamiltonian(model.cutoff.coupling).matrix
    v = local_perturbation(model, cfg.run.f_index)
    hh = rep.embed_operator(h)
    gen = (hh - rep.conjugate_by_J(hh)).tocsr()
    vh = rep.embed_operator(v)
    d = commutant_difference(rep, vh)
    pinv = PseudoInverse(gen)
    gibbs = gibbs_doubling(rep, h, beta)
    lams = np.asarray(cfg.run.lambda_values, dtype=float)
    series = perturbation_series(rep, gen, vh, cfg.run.order, reference=gibbs.vector, pinv=pinv)
    res = ExperimentResult(windows={})
    meta = {"N": n, "beta": beta, "axis": "lambda"}
    for k in range(1, cfg.run.order + 1):
        r = series.residuals(gen, d, lams, k)
        res.records.append(TimeSeriesRecord(f"series_residual_order{k}", lams, r, {**meta, "order": k}))
        res.derived[f"residual_slope_order{k}"] = loglog_slope(lams, r)
    literal = perturbation_series(rep, gen, vh, cfg.run.order, reference=gibbs.vector, pinv=pinv, literal=True)
    if cfg.run.order >= 2:
        r = literal.residuals(gen, d, lams, 2)
        res.derived["literal_residual_slope_order2"] = loglog_slope(lams, r)
    der = kms_derivative(rep, h, v, beta)
    res.derived["first_order_angle"] = vector_angle(series.vectors[0], der) if beta > 0 else 0.0
    if beta > 0:
        off = der - pinv.kernel_projection(der)
        res.derived["first_order_offkernel_angle"] = vector_angle(series.vectors[0], off)
        res.derived["derivative_kernel_fraction"] = float(
            np.linalg.norm(pinv.kernel_projection(der)) / np.linalg.norm(der))
    tracial = perturbation_series(rep, gen, vh, cfg.run.order, pinv=pinv)
    res.derived["tracial_series_max_norm"] = max(float(np.linalg.norm(b)) for b in tracial.vectors)
    psi = (embed_a(rep, unit_vector(n, 0)).conj().T @ gibbs.vector)
    eps, diffs, rich = resolvent_agreement(pinv, psi, cfg.run.eps_values)
    res.records.append(TimeSeriesRecord("resolvent_difference", eps[::-1], diffs[::-1], {"N": n, "axis": "eps"}))
    res.derived["resolvent_slope"] = loglog_slope(eps, diffs)
    res.derived["resolvent_richardson"] = rich
    res.derived["kernel_dim"] = pinv.kernel_dim
    res.derived["spectral_gap"] = pinv.gap
    T = matched_window(model, cfg)
    times = window_grid(T, cfg.run.n_times)
    res.windows["matched"] = T
    a0 = embed_a(rep, unit_vector(n, cfg.run.f_index))
    b_op = (a0.conj().T @ a0).tocsr()
    for b in sorted({0.0, beta}):
        ref = gibbs_doubling(rep, h, b).vector
        rec = perturbed_correlator(rep, gen, vh, 0.5, a0, b_op, times, reference=ref,
                                   window_end=T, N=n, beta=b, tol=cfg.run.krylov_tol,
                                   max_dim=cfg.run.krylov_max_dim)
        res.records.append(rec)
        res.derived[f"correlator_late_mean_beta_{b:g}"] = float(np.mean(np.real(rec.late()[1])))
    return res


# -- sweeps -------------------------------------------------------------------------


def sweep_point(cfg: ExperimentConfig, n_modes: int, lam: float) -> dict:
    """One row of the sweep table; errors are captured in the row, not raised."""
    row = {"N": n_modes, "lambda": float(lam), "status": "ok", "error": ""}
    try:
        point = cfg.replace(system={"n_modes": n_modes}, model={"coupling": float(lam)},
                            run={"f_index": 0})
        dec = run_decay(point)
        row["window_end"] = dec.windows["matched"]
        row["norm_floor"] = dec.derived[f"norm_floor_lambda_{float(lam):g}"]
        row["weak_average"] = dec.derived[f"weak_average_lambda_{float(lam):g}"]
        row["norm_floor_ratio"] = dec.derived.get("norm_floor_ratio", 1.0)
        row["weak_average_ratio"] = dec.derived.get("weak_average_ratio", 1.0)
        if n_modes <= MAX_DOUBLED_RUN:
            model = model_from_config(point)
            rep = DoubledRep(n_modes)
            ham = assemble_doubled_H(rep, model.terms, float(lam))
            times = window_grid(row["window_end"], point.run.n_times)
            nrec = number_growth(rep, ham, unit_vector(n_modes, 0), times,
                                 window_end=row["window_end"], tol=point.run.krylov_tol,
                                 max_dim=point.run.krylov_max_dim)
            row["number_slope"] = nrec.slope()
    except Exception as exc:  # recorded per point; the sweep continues
        row["status"] = "error"
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _sweep_task(args):
    cfg_dict, n_modes, lam = args
    return sweep_point(ExperimentConfig.from_dict(cfg_dict), n_modes, lam)


def run_sweep(cfg: ExperimentConfig, threads: int = 1) -> list:
    tasks = [(cfg.to_dict(), int(n), float(l)) for n in cfg.run.sweep_n for l in cfg.run.sweep_lambda]
    if threads <= 1:
        return [_sweep_task(t) for t in tasks]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_sweep_task, tasks))
