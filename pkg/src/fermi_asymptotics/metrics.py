"""Time-series diagnostics for asymptotic abelianess and clustering.

Finite systems recur, so every "t -> infinity" statement is read off inside a
pre-recurrence window ``[0, T_w]`` with ``T_w = c / (median level spacing)``.
Records refuse samples beyond their window unless explicitly allowed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import KRYLOV_MAX_DIM, Propagator, evolve_operator, krylov_evolve_vector, propagate_series
from .exceptions import WindowError
from .fock import as_matrix, normalized_trace, operator_norm

WINDOW_CONSTANT = 0.5
LATE_FRACTION = 0.5


@dataclass
class TimeSeriesRecord:
    """Samples ``(t, value)`` of one diagnostic with run metadata.

    Parameters
    ----------
    quantity : str
        Label written to the ``quantity`` column of CSV output.
    times, values : array_like
        Strictly increasing times and finite (real or complex) values.
    metadata : dict
        Model parameters, ``N``, ``lambda`` and anything else worth echoing.
    window_end : float, optional
        End of the trusted pre-recurrence window.
    allow_past_window : bool
        Permit samples with ``t > window_end``; recorded in the metadata.
    """

    quantity: str
    times: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)
    window_end: float | None = None
    allow_past_window: bool = False

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float).reshape(-1)
        vals = np.asarray(self.values)
        if not np.iscomplexobj(vals):
            vals = vals.astype(float)
        self.values = vals.reshape(-1)
        if self.times.size != self.values.size:
            raise ValueError("times and values differ in length")
        if self.times.size == 0:
            raise ValueError("empty time series")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("sample times must be strictly increasing")
        if not (np.all(np.isfinite(self.times)) and np.all(np.isfinite(self.values))):
            raise ValueError(f"non-finite samples in series {self.quantity!r}")
        if self.window_end is not None:
            self.window_end = float(self.window_end)
            past = bool(self.times[-1] > self.window_end * (1 + 1e-12))
            if past and not self.allow_past_window:
                raise WindowError(
                    f"series {self.quantity!r} extends to t={self.times[-1]:.4g} beyond its "
                    f"window {self.window_end:.4g}; pass allow_past_window=True to keep it"
                )
            self.metadata = {**self.metadata, "past_window": past}

    def __len__(self):
        return self.times.size

    @property
    def in_window(self) -> np.ndarray:
        if self.window_end is None:
            return np.ones(self.times.size, dtype=bool)
        return self.times <= self.window_end * (1 + 1e-12)

    def windowed(self):
        m = self.in_window
        return self.times[m], self.values[m]

    def late(self, fraction: float = LATE_FRACTION):
        """Samples in the last ``fraction`` of the window."""
        t, v = self.windowed()
        end = self.window_end if self.window_end is not None else t[-1]
        m = t >= (1 - fraction) * end
        return t[m], v[m]

    def window_max(self) -> float:
        return float(np.max(np.abs(self.windowed()[1])))

    def window_min(self) -> float:
        return float(np.min(np.abs(self.windowed()[1])))

    def late_min(self, fraction: float = LATE_FRACTION) -> float:
        return float(np.min(np.abs(self.late(fraction)[1])))

    def window_mean_abs(self) -> float:
        return float(np.mean(np.abs(self.windowed()[1])))

    def slope(self) -> float:
        t, v = self.windowed()
        return linear_slope(t, np.real(v))

    def rows(self):
        """``(quantity, t, re, im)`` tuples."""
        v = self.values.astype(complex)
        return [(self.quantity, float(t), float(x.real), float(x.imag)) for t, x in zip(self.times, v)]


def linear_slope(t, y) -> float:
    """Least-squares slope of ``y`` against ``t``."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.size < 2:
        raise ValueError("need at least two samples for a slope")
    return float(np.polyfit(t, y, 1)[0])


def loglog_slope(x, y) -> float:
    return linear_slope(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)))


def distinct_levels(eigenvalues, tol: float = 1e-9) -> np.ndarray:
    ev = np.sort(np.asarray(eigenvalues, dtype=float))
    scale = max(1.0, float(np.max(np.abs(ev)))) if ev.size else 1.0
    keep = np.concatenate(([True], np.diff(ev) > tol * scale))
    return ev[keep]


def recurrence_window(spectrum, c: float = WINDOW_CONSTANT, tol: float = 1e-9) -> float:
    """``c / median nearest-neighbour gap`` of the distinct levels.

    ``spectrum`` is a :class:`Propagator` or an array of eigenvalues.
    Raises :class:`WindowError` when fewer than two distinct levels exist.
    """
    ev = spectrum.eigenvalues if isinstance(spectrum, Propagator) else spectrum
    levels = distinct_levels(ev, tol)
    if levels.size < 2:
        raise WindowError("spectrum is fully degenerate; recurrence window undefined")
    return float(c / np.median(np.diff(levels)))


def window_grid(window_end: float, n_points: int = 41) -> np.ndarray:
    """Uniform grid on ``[0, window_end]``."""
    if window_end <= 0:
        raise WindowError("window must have positive length")
    return np.linspace(0.0, window_end, n_points)


# -- states --------------------------------------------------------------------


def _state(kind: str):
    if kind == "tracial":
        return normalized_trace
    if kind == "vacuum":
        return lambda m: complex(as_matrix(m)[0, 0])
    raise ValueError(f"unknown state {kind!r}; use 'tracial' or 'vacuum'")


def _bracket(x, y, kind):
    if kind == "commutator":
        return x @ y - y @ x
    if kind == "anticommutator":
        return x @ y + y @ x
    raise ValueError(f"kind must be 'commutator' or 'anticommutator', got {kind!r}")


# -- direct-space diagnostics ----------------------------------------------------


def norm_decay(prop: Propagator, a, b, times, kind: str = "commutator",
               window_end=None, **meta) -> TimeSeriesRecord:
    """``||[tau_t A, B]_pm||`` in operator norm."""
    a, b = as_matrix(a), as_matrix(b)
    vals = [operator_norm(_bracket(evolve_operator(prop, a, t).matrix, b, kind)) for t in times]
    return TimeSeriesRecord(f"norm_{kind}", times, vals, dict(meta), window_end)


def weak_decay(a, b, c, d, prop: Propagator, times, state: str = "tracial",
               window_end=None, **meta) -> TimeSeriesRecord:
    """``omega(C [tau_t A, B] D)`` in the tracial or Fock-vacuum state."""
    om = _state(state)
    a, b, c, d = (as_matrix(x) for x in (a, b, c, d))
    vals = [om(c @ _bracket(evolve_operator(prop, a, t).matrix, b, "commutator") @ d) for t in times]
    return TimeSeriesRecord("weak_commutator", times, vals, {"state": state, **meta}, window_end)


def expectation_series(prop: Propagator, x, a, y, times, state: str = "tracial",
                       quantity: str = "expectation", window_end=None, **meta) -> TimeSeriesRecord:
    """``omega(X tau_t(A) Y)``; with ``A = U_0`` and ``X = Y = 1`` gives ``tr(U_0 tau_t U_0)``."""
    om = _state(state)
    x, a, y = (as_matrix(m) for m in (x, a, y))
    vals = [om(x @ evolve_operator(prop, a, t).matrix @ y) for t in times]
    return TimeSeriesRecord(quantity, times, vals, {"state": state, **meta}, window_end)


def multicluster(prop: Propagator, a, b, c, d, times, state: str = "tracial",
                 window_end=None, **meta):
    """Pairwise clustering data.

    Returns ``(deviation, lhs, bound)`` where ``deviation`` samples
    ``omega(A B_t C D_t) - omega(AC) omega(BD)``, ``lhs`` samples
    ``|omega(A B_t A* B_t*)|`` and ``bound`` is the constant
    ``omega(A A*) omega(B B*)``.
    """
    om = _state(state)
    a, b, c, d = (as_matrix(x) for x in (a, b, c, d))
    base = om(a @ c) * om(b @ d)
    ad, bd = a.conj().T, b.conj().T
    bound = float((om(a @ ad) * om(b @ bd)).real)
    dev, lhs = [], []
    for t in times:
        bt = evolve_operator(prop, b, t).matrix
        dt = evolve_operator(prop, d, t).matrix
        dev.append(om(a @ bt @ c @ dt) - base)
        lhs.append(abs(om(a @ bt @ ad @ bt.conj().T)))
    m = {"state": state, "bound": bound, **meta}
    return (
        TimeSeriesRecord("cluster_deviation", times, dev, m, window_end),
        TimeSeriesRecord("cluster_product", times, lhs, m, window_end),
        bound,
    )


def occupancy_fraction(record: TimeSeriesRecord, bound: float) -> float:
    """Fraction of in-window samples with ``|value| < bound``."""
    v = np.abs(record.windowed()[1])
    return float(np.mean(v < bound))


# -- doubled-space diagnostic -----------------------------------------------------


def strong_decay(ham, a, b, probes, times, kind: str = "anticommutator", shift: complex = 0.0,
                 window_end=None, tol: float = 1e-9, max_dim: int = KRYLOV_MAX_DIM, **meta) -> TimeSeriesRecord:
    """``max_probe ||([A, tau_t B]_pm - shift) probe||`` with ``tau_t`` generated by ``ham``.

    ``A`` and ``B`` are sparse operators on the doubled space; ``ham`` is a
    sparse matrix or anything exposing ``.matrix``.
    """
    hm = getattr(ham, "matrix", ham)
    sgn = -1.0 if kind == "commutator" else 1.0
    if kind not in ("commutator", "anticommutator"):
        raise ValueError(f"kind must be 'commutator' or 'anticommutator', got {kind!r}")
    times = np.asarray(times, dtype=float)
    out = np.zeros((len(probes), times.size))
    for ip, p in enumerate(probes):
        fwd_p = propagate_series(hm, p, times, tol=tol, max_dim=max_dim)
        fwd_ap = propagate_series(hm, a @ p, times, tol=tol, max_dim=max_dim)
        for it, t in enumerate(times):
            tb_p = krylov_evolve_vector(hm, b @ fwd_p[it], -t, tol=tol, max_dim=max_dim)
            tb_ap = krylov_evolve_vector(hm, b @ fwd_ap[it], -t, tol=tol, max_dim=max_dim)
            out[ip, it] = np.linalg.norm(a @ tb_p + sgn * tb_ap - shift * p)
    return TimeSeriesRecord(f"strong_{kind}", times, out.max(axis=0), {"n_probes": len(probes), **meta},
                            window_end)


def contrast_ratio(numerator: float, denominator: float, floor: float = 1e-300) -> float:
    """``numerator / denominator`` guarded against an exactly vanishing denominator."""
    return float(numerator / max(abs(denominator), floor))
