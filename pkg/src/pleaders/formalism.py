"""Structure functions, finite-size-corrected estimators, Legendre spectra.

Estimation is a weighted linear regression across octaves: the weights
``w_j`` satisfy ``sum w_j = 0`` and ``sum j*w_j = 1`` so that applying them
to any per-octave statistic extracts its slope in ``j`` (one octave = one
doubling of scale).

Because the leader sum is truncated at the finest available octave, the
structure functions and the first log-cumulant carry a deterministic
scale-dependent term parametrized by the wavelet scaling function value
``eta(p)``; the corrected estimators subtract it.  With the finest octave
labelled 1, the term at octave ``j`` is ``(q/p) * log2(1 - 2**(-j*eta))``
for the scaling function and ``(1/p) * log((1 - 2**(-j*eta)) /
(1 - 2**(-eta)))`` for the first cumulant.  For ``p = inf`` the term
vanishes and the classical wavelet-leader estimators are recovered.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateDataError,
    InvalidCorrectionError,
    InvalidExpansionError,
    InvalidParameterError,
    SingularRegressionError,
)

LN2 = math.log(2.0)

#: 41 q values uniform on [-5, 5]; the midpoint is exactly 0.
DEFAULT_Q_GRID = np.linspace(-5.0, 5.0, 41)

#: Default slack for concavity checks on estimated scaling functions.
CONCAVITY_SLACK = 0.02


# -- regression weights --------------------------------------------------------

@dataclass(frozen=True)
class RegressionWeights:
    """Slope-extracting weights over an octave range.

    ``w`` solves the weighted least-squares slope problem with per-octave
    confidence ``b``: ``w_j = b_j (S0*j - S1) / (S0*S2 - S1**2)`` with
    ``S_i = sum b_j j**i``.
    """

    j1: int
    j2: int
    js: np.ndarray
    b: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        assert abs(self.w.sum()) < 1e-9
        assert abs((self.w * self.js).sum() - 1.0) < 1e-9


def regression_weights(j1: int, j2: int, confidence,
                       js=None) -> RegressionWeights:
    """Build slope weights for octaves ``j1..j2``.

    ``confidence`` holds strictly positive values ``b_j`` (e.g. the number
    of valid samples per octave).  ``js`` may name a subset of octaves when
    some are unusable; by default all integers in ``[j1, j2]`` are used.
    """
    if js is None:
        js = np.arange(j1, j2 + 1, dtype=float)
    else:
        js = np.asarray(js, dtype=float)
    if j2 < j1 + 2 or js.size < 3:
        raise SingularRegressionError(
            f"need at least 3 octaves for a slope, got range [{j1}, {j2}] "
            f"with {js.size} points")
    b = np.asarray(confidence, dtype=float)
    if b.shape != js.shape:
        raise InvalidParameterError(
            f"confidence length {b.size} does not match {js.size} octaves")
    if np.any(b <= 0):
        raise InvalidParameterError("confidence weights must be positive")
    s0 = b.sum()
    s1 = (b * js).sum()
    s2 = (b * js * js).sum()
    denom = s0 * s2 - s1 * s1
    if denom <= 0 or not np.isfinite(denom):
        raise SingularRegressionError("degenerate octave range (no spread)")
    w = b * (s0 * js - s1) / denom
    # enforce the constraints to the last bit
    w = w - b * (w.sum() / s0)
    return RegressionWeights(j1=int(j1), j2=int(j2), js=js, b=b, w=w)


# -- structure functions -------------------------------------------------------

@dataclass
class StructureFunctionTable:
    """``log2`` of per-octave averages of leader (or fluctuation) powers.

    ``log2_values[i, iq]`` is ``log2( mean_k x(j_i, k)**q )`` over the valid
    positions at octave ``js[i]``.  Averages, not ``2**(d j)``-weighted sums,
    so masked positions do not break the slope.
    """

    q_grid: np.ndarray
    js: np.ndarray
    log2_values: np.ndarray
    n_j: np.ndarray
    source: str = "leader"


def _log2_moment(values: np.ndarray, q: float, j: int) -> float:
    if q == 0.0:
        return 0.0  # mean of x**0 is exactly 1
    if q < 0.0 and np.any(values == 0.0):
        raise DegenerateDataError(
            f"zero value at octave {j} cannot be raised to q = {q}", octave=j)
    return float(np.log2(np.mean(values ** q)))


def structure_functions(leaders, q_grid=None,
                        js=None) -> StructureFunctionTable:
    """Sample structure functions of a leader pyramid over a q grid.

    ``js`` restricts the table to the named octaves (e.g. the regression
    range, keeping degenerate octaves outside it from raising).
    """
    q_grid = DEFAULT_Q_GRID if q_grid is None else np.asarray(q_grid, float)
    wanted = None if js is None else {int(j) for j in js}
    js, rows, n_j = [], [], []
    for oct_ in leaders.octaves:
        if wanted is not None and oct_.j not in wanted:
            continue
        vals = oct_.valid_values()
        if vals.size == 0:
            continue
        js.append(oct_.j)
        n_j.append(vals.size)
        rows.append([_log2_moment(vals, q, oct_.j) for q in q_grid])
    return StructureFunctionTable(
        q_grid=q_grid,
        js=np.array(js),
        log2_values=np.array(rows),
        n_j=np.array(n_j),
        source="leader",
    )


def _row_lookup(table_js: np.ndarray, weights: RegressionWeights) -> np.ndarray:
    idx = []
    pos = {int(j): i for i, j in enumerate(table_js)}
    for j in weights.js:
        if int(j) not in pos:
            raise InvalidParameterError(
                f"octave {int(j)} requested by the regression is missing "
                f"from the table")
        idx.append(pos[int(j)])
    return np.array(idx)


def _check_correction(corrected: bool, p: float, eta_p: float) -> bool:
    if not corrected or math.isinf(p):
        return False
    if eta_p <= 0 or not np.isfinite(eta_p):
        raise InvalidCorrectionError(
            f"finite-size correction needs eta(p) > 0, got {eta_p}")
    return True


def zeta_hat(table: StructureFunctionTable, p: float, eta_p: float,
             weights: RegressionWeights, corrected: bool = True) -> np.ndarray:
    """Scaling-function estimate on the table's q grid.

    With the correction on, each ``log2 S(j, q)`` is reduced by
    ``(q/p) * log2(1 - 2**(-j*eta_p))`` before the slope weights are applied.
    """
    idx = _row_lookup(table.js, weights)
    js = weights.js
    apply_corr = _check_correction(corrected, p, eta_p)
    corr = ((1.0 / p) * np.log2(1.0 - 2.0 ** (-js * eta_p))
            if apply_corr else np.zeros(js.size))
    out = np.empty(table.q_grid.size)
    for iq, q in enumerate(table.q_grid):
        out[iq] = float(weights.w @ (table.log2_values[idx, iq] - q * corr))
    return out


# -- cumulants -----------------------------------------------------------------

@dataclass
class CumulantTable:
    """Sample cumulants of ``log(leader)`` per octave.

    ``values[i, m-1]`` holds the order-m cumulant at octave ``js[i]``:
    mean, biased variance, third central moment, and fourth central moment
    minus three times the squared variance.
    """

    js: np.ndarray
    values: np.ndarray
    n_j: np.ndarray
    m_max: int


def log_cumulants_of(samples: np.ndarray, m_max: int) -> list[float]:
    lx = np.log(samples)
    mu = lx.mean()
    out = [float(mu)]
    if m_max >= 2:
        d = lx - mu
        m2 = float((d * d).mean())
        out.append(m2)
        if m_max >= 3:
            out.append(float((d ** 3).mean()))
        if m_max >= 4:
            out.append(float((d ** 4).mean()) - 3.0 * m2 * m2)
    return out


def cumulants(leaders, m_max: int = 4, js=None) -> CumulantTable:
    """Per-octave cumulants of the log-leaders (orders 1..m_max <= 4).

    ``js`` restricts the table to the named octaves, as in
    :func:`structure_functions`.
    """
    if not 1 <= m_max <= 4:
        raise InvalidParameterError(f"m_max must be in 1..4, got {m_max}")
    wanted = None if js is None else {int(j) for j in js}
    js, rows, n_j = [], [], []
    for oct_ in leaders.octaves:
        if wanted is not None and oct_.j not in wanted:
            continue
        vals = oct_.valid_values()
        if vals.size == 0:
            continue
        if np.any(vals == 0.0):
            raise DegenerateDataError(
                f"zero leader at octave {oct_.j}: log-cumulants undefined",
                octave=oct_.j)
        js.append(oct_.j)
        n_j.append(vals.size)
        rows.append(log_cumulants_of(vals, m_max))
    return CumulantTable(js=np.array(js), values=np.array(rows),
                         n_j=np.array(n_j), m_max=m_max)


def cm_hat(table: CumulantTable, p: float, eta_p: float,
           weights: RegressionWeights, corrected: bool = True) -> np.ndarray:
    """Log-cumulant estimates ``c_1..c_mmax``.

    ``c_1`` subtracts the finite-size term
    ``(1/p) * log((1 - 2**(-j*eta)) / (1 - 2**(-eta)))`` per octave; higher
    orders are plain weighted slopes.  All slopes are divided by ``log 2`` so
    the c_m expand ``zeta(q)`` in base-2 octaves.
    """
    idx = _row_lookup(table.js, weights)
    js = weights.js
    apply_corr = _check_correction(corrected, p, eta_p)
    corr1 = ((1.0 / p) * np.log((1.0 - 2.0 ** (-js * eta_p))
                                / (1.0 - 2.0 ** (-eta_p)))
             if apply_corr else np.zeros(js.size))
    out = np.empty(table.m_max)
    out[0] = float(weights.w @ (table.values[idx, 0] - corr1)) / LN2
    for m in range(2, table.m_max + 1):
        out[m - 1] = float(weights.w @ table.values[idx, m - 1]) / LN2
    return out


# -- scaling estimates bundle ---------------------------------------------------

@dataclass
class ScalingEstimates:
    """zeta(q) and log-cumulants with the settings that produced them."""

    q_grid: np.ndarray
    zeta: np.ndarray
    cm: np.ndarray
    p: float
    eta_p: float
    corrected: bool
    j1: int
    j2: int
    weighting: str = "nj"
    source: str = "leader"

    @property
    def c1(self) -> float:
        return float(self.cm[0])

    def concavity_defect(self) -> float:
        """Largest amount by which zeta pokes above a neighbor chord."""
        z, q = self.zeta, self.q_grid
        worst = 0.0
        for i in range(1, q.size - 1):
            t = (q[i] - q[i - 1]) / (q[i + 1] - q[i - 1])
            chord = (1 - t) * z[i - 1] + t * z[i + 1]
            worst = max(worst, float(z[i] - chord))
        return worst


# -- Legendre spectra ------------------------------------------------------------

@dataclass
class LegendreSpectrum:
    """Parametric (h(q), L(q)) development of the Legendre transform."""

    q_grid: np.ndarray
    h: np.ndarray
    L: np.ndarray
    dim: int

    def mode(self) -> float:
        """h at the spectrum's maximum."""
        return float(self.h[int(np.argmax(self.L))])

    def right_endpoint(self, q_at: float = -1.0) -> float:
        """h(q) at a mildly negative q (default -1).

        The most-lacunary full-measure sets sit at the right end of the
        spectrum, so a mild negative moment already reaches it; strongly
        negative q are dominated by finite-size minimal-cone statistics.
        """
        i = int(np.argmin(np.abs(self.q_grid - q_at)))
        return float(self.h[i])


def _weighted_r(log2v: np.ndarray, q: float):
    """Normalized weights R = v**q / sum v**q, computed in log space."""
    lw = q * log2v
    lw -= lw.max()
    r = np.exp2(lw)
    r /= r.sum()
    return r


def legendre_parametric(leaders, q_grid, p: float, eta_p: float,
                        weights: RegressionWeights,
                        corrected: bool = True) -> LegendreSpectrum:
    """Direct parametric estimate of the Legendre spectrum.

    For each q the per-octave statistics are the R-weighted mean of
    ``log2(leader)`` (giving h) and the normalized entropy
    ``sum R log2 R + log2 n_j`` (giving L - d); slope weights turn them into
    the spectrum point.  The first-cumulant finite-size term, divided by p,
    is subtracted from h when the correction is on.
    """
    q_grid = np.asarray(q_grid, dtype=float)
    dim = leaders.dim
    js = weights.js
    apply_corr = _check_correction(corrected, p, eta_p)
    corr = ((1.0 / p) * np.log2((1.0 - 2.0 ** (-js * eta_p))
                                / (1.0 - 2.0 ** (-eta_p)))
            if apply_corr else np.zeros(js.size))

    per_oct = []
    for j in js:
        vals = leaders.octave(int(j)).valid_values()
        if vals.size == 0 or np.any(vals == 0.0):
            raise DegenerateDataError(
                f"octave {int(j)} has zero or no valid leaders", octave=int(j))
        per_oct.append(np.log2(vals))

    h = np.empty(q_grid.size)
    L = np.empty(q_grid.size)
    for iq, q in enumerate(q_grid):
        a = np.empty(js.size)
        e = np.empty(js.size)
        for i, log2v in enumerate(per_oct):
            r = _weighted_r(log2v, q)
            a[i] = (r * log2v).sum()
            nz = r > 0
            e[i] = (r[nz] * np.log2(r[nz])).sum() + np.log2(log2v.size)
        h[iq] = float(weights.w @ (a - corr))
        L[iq] = dim + float(weights.w @ e)
    return LegendreSpectrum(q_grid=q_grid, h=h, L=L, dim=dim)


@dataclass
class BoundReport:
    """Violations of the negative-regularity bound L(h) <= d + h*p."""

    p: float
    dim: int
    tolerance: float
    n_checked: int
    violations: np.ndarray
    max_violation: float

    @property
    def ok(self) -> bool:
        return self.violations.size == 0


def check_bound(spectrum: LegendreSpectrum, p: float, dim: int | None = None,
                tolerance: float = 0.05) -> BoundReport:
    """Flag spectrum samples with h <= 0 lying above the line d + h*p.

    The multifractal p-spectrum must stay below the straight line joining
    (-d/p, 0) and (0, d); report-only, never raises.
    """
    if not np.isfinite(p):
        raise InvalidParameterError("bound check needs a finite p")
    d = spectrum.dim if dim is None else dim
    mask = spectrum.h <= 0.0
    excess = spectrum.L - (d + spectrum.h * p)
    bad = np.flatnonzero(mask & (excess > tolerance))
    max_v = float(excess[mask].max()) if mask.any() else -math.inf
    return BoundReport(p=p, dim=d, tolerance=tolerance,
                       n_checked=int(mask.sum()), violations=bad,
                       max_violation=max_v)


def cm_to_spectrum(cm, dim: int, n_points: int = 101) -> LegendreSpectrum:
    """Polynomial spectrum from log-cumulants (truncated at order 4).

    ``L(h) = d + sum_{m>=2} (C_m / m!) * ((h - c1)/c2)**m`` with
    ``C2 = c2``, ``C3 = -c3``, ``C4 = -c4 + 3 c3**2 / c2``; sampled on an
    h interval of half-width ``sqrt(-2 c2 d)`` around c1 (where the pure
    parabola reaches zero).
    """
    cm = np.asarray(cm, dtype=float)
    c1, c2 = cm[0], cm[1]
    c3 = cm[2] if cm.size > 2 else 0.0
    c4 = cm[3] if cm.size > 3 else 0.0
    if not c2 < 0:
        raise InvalidExpansionError(f"expansion needs c2 < 0, got {c2}")
    half_width = math.sqrt(-2.0 * c2 * dim)
    h = np.linspace(c1 - half_width, c1 + half_width, n_points)
    u = (h - c1) / c2
    L = dim + c2 / 2.0 * u ** 2
    if c3 != 0.0:
        L += (-c3) / 6.0 * u ** 3
    if c4 != 0.0 or c3 != 0.0:
        L += (-c4 + 3.0 * c3 * c3 / c2) / 24.0 * u ** 4
    # q = -(h - c1)/c2 up to higher-order terms; good enough for labelling
    q = -u
    return LegendreSpectrum(q_grid=q, h=h, L=L, dim=dim)
