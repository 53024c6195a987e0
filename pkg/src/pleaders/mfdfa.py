"""Multifractal detrended fluctuation analysis (reference implementation).

Fluctuations are root-mean-square residuals of per-window least-squares
polynomial fits: windows are non-overlapping, anchored at the first sample,
with the trailing remainder discarded.  A window of size ``a`` needs at least
``degree + 2`` samples, so ``ceil(log2(degree + 2)) - 1`` fine dyadic scales
are lost relative to wavelet-based analysis.

The structure-function, cumulant and spectrum machinery is shared with the
leader formalism; scales enter the regressions through ``log2 a``, which for
the default dyadic scale list coincides with the octave index.  There is no
finite-size correction here: MFDFA has none, which is precisely the source
of its bias for negatively regular data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateDataError,
    InvalidInputError,
    InvalidParameterError,
    ScaleTooSmallError,
)
from .formalism import (
    LN2,
    CumulantTable,
    LegendreSpectrum,
    RegressionWeights,
    ScalingEstimates,
    StructureFunctionTable,
    log_cumulants_of,
    regression_weights,
    _row_lookup,
    _weighted_r,
)


@dataclass
class FluctuationTable:
    """Per-scale RMS detrending residuals T(a, k)."""

    scales: np.ndarray
    values: list[np.ndarray]  # one array of length floor(n/a) per scale
    degree: int
    integrated: bool
    n: int

    def n_windows(self) -> np.ndarray:
        return np.array([v.size for v in self.values], dtype=float)


def min_scale(degree: int) -> int:
    """Smallest admissible window: a polynomial of degree N needs N + 2 points."""
    return degree + 2


def fine_scales_lost(degree: int) -> int:
    """Dyadic octaves unusable by MFDFA but available to p-leaders."""
    return int(np.ceil(np.log2(min_scale(degree)))) - 1


def dyadic_scales(n: int, degree: int, j1: int = 1) -> np.ndarray:
    """Dyadic window sizes 2**j with degree+2 <= a <= n/4, j >= j1."""
    jmin = max(j1, int(np.ceil(np.log2(min_scale(degree)))))
    jmax = int(np.floor(np.log2(n))) - 2
    if jmax < jmin:
        raise InvalidParameterError(
            f"no admissible dyadic scale for n={n}, degree={degree}")
    return 2 ** np.arange(jmin, jmax + 1)


def profile(signal: np.ndarray) -> np.ndarray:
    """Cumulative sum of the mean-subtracted signal."""
    x = np.asarray(signal, dtype=float)
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("signal contains non-finite values")
    return np.cumsum(x - x.mean())


def fluctuations(series: np.ndarray, scales, degree: int = 1,
                 integrate: bool = True) -> FluctuationTable:
    """RMS residuals of per-window polynomial fits at each scale.

    ``integrate=True`` (the usual MFDFA convention) analyzes the profile of
    the series; turn it off for direct comparisons in which the wavelet side
    analyzes the same raw series.
    """
    x = np.asarray(series, dtype=float)
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("series contains non-finite values")
    if degree < 0:
        raise InvalidParameterError("polynomial degree must be >= 0")
    y = profile(x) if integrate else x
    n = y.size
    scales = np.asarray(scales, dtype=int)
    values = []
    for a in scales:
        if a < min_scale(degree):
            raise ScaleTooSmallError(
                f"scale {a} is below the minimum {min_scale(degree)} for a "
                f"degree-{degree} fit (fine-scale loss)")
        if a > n // 4:
            raise InvalidParameterError(
                f"scale {a} exceeds n/4 = {n // 4}")
        k = n // a
        seg = y[:k * a].reshape(k, a).T  # (a, k)
        # centered/scaled abscissa keeps the Vandermonde well conditioned
        t = (np.arange(a) - (a - 1) / 2.0) / a
        design = np.vander(t, degree + 1, increasing=True)
        coef, *_ = np.linalg.lstsq(design, seg, rcond=None)
        resid = seg - design @ coef
        values.append(np.sqrt((resid ** 2).mean(axis=0)))
    return FluctuationTable(scales=scales, values=values, degree=degree,
                            integrated=bool(integrate), n=n)


def _table_js(table: FluctuationTable) -> np.ndarray:
    js = np.log2(table.scales.astype(float))
    if not np.allclose(js, np.round(js)):
        raise InvalidParameterError(
            "shared regression machinery needs dyadic scales")
    return np.round(js).astype(int)


def structure_functions_mfdfa(table: FluctuationTable,
                              q_grid) -> StructureFunctionTable:
    """log2 of per-scale averages of T**q (q = 0 row is exactly 0)."""
    q_grid = np.asarray(q_grid, dtype=float)
    js = _table_js(table)
    rows = []
    for j, vals in zip(js, table.values):
        row = []
        for q in q_grid:
            if q == 0.0:
                row.append(0.0)
                continue
            if q < 0.0 and np.any(vals == 0.0):
                raise DegenerateDataError(
                    f"zero fluctuation at scale 2**{j} with q = {q}",
                    octave=int(j))
            row.append(float(np.log2(np.mean(vals ** q))))
        rows.append(row)
    return StructureFunctionTable(q_grid=q_grid, js=js,
                                  log2_values=np.array(rows),
                                  n_j=table.n_windows().astype(int),
                                  source="mfdfa")


def mfdfa_analyze(table: FluctuationTable, q_grid=None,
                  weights: RegressionWeights | None = None,
                  m_max: int = 4) -> tuple[ScalingEstimates, LegendreSpectrum]:
    """Scaling exponents, log-cumulants and Legendre spectrum from a
    fluctuation table.

    The spectrum uses the same parametric development as the leader
    formalism with d = 1; the q = 0 statistics reduce to the geometric mean
    of the fluctuations.
    """
    from .formalism import DEFAULT_Q_GRID
    q_grid = DEFAULT_Q_GRID if q_grid is None else np.asarray(q_grid, float)
    js = _table_js(table)
    if weights is None:
        weights = regression_weights(int(js[0]), int(js[-1]),
                                     table.n_windows(), js=js)
    sf = structure_functions_mfdfa(table, q_grid)
    idx = _row_lookup(sf.js, weights)
    zeta = np.array([float(weights.w @ sf.log2_values[idx, iq])
                     for iq in range(q_grid.size)])

    cum_rows, cjs, cn = [], [], []
    for j, vals in zip(js, table.values):
        if np.any(vals == 0.0):
            raise DegenerateDataError(
                f"zero fluctuation at scale 2**{j}: log-cumulants undefined",
                octave=int(j))
        cum_rows.append(log_cumulants_of(vals, m_max))
        cjs.append(j)
        cn.append(vals.size)
    ctable = CumulantTable(js=np.array(cjs), values=np.array(cum_rows),
                           n_j=np.array(cn), m_max=m_max)
    cidx = _row_lookup(ctable.js, weights)
    cm = np.array([float(weights.w @ ctable.values[cidx, m - 1]) / LN2
                   for m in range(1, m_max + 1)])

    h = np.empty(q_grid.size)
    L = np.empty(q_grid.size)
    logs = [np.log2(table.values[i]) for i in idx]
    for iq, q in enumerate(q_grid):
        a = np.empty(len(logs))
        e = np.empty(len(logs))
        for i, lg in enumerate(logs):
            r = _weighted_r(lg, q)
            nz = r > 0
            a[i] = (r * lg).sum()
            e[i] = (r[nz] * np.log2(r[nz])).sum() + np.log2(lg.size)
        h[iq] = float(weights.w @ a)
        L[iq] = 1.0 + float(weights.w @ e)
    spectrum = LegendreSpectrum(q_grid=q_grid, h=h, L=L, dim=1)

    estimates = ScalingEstimates(
        q_grid=q_grid, zeta=zeta, cm=cm, p=2.0, eta_p=np.nan,
        corrected=False, j1=weights.j1, j2=weights.j2, source="mfdfa")
    return estimates, spectrum


def dfa_exponent(table: FluctuationTable,
                 weights: RegressionWeights | None = None) -> float:
    """Classical DFA exponent: slope of log2 sqrt(S(a, 2)) in log2 a.

    Identical to zeta(2)/2 from :func:`mfdfa_analyze` by construction.
    """
    js = _table_js(table)
    if weights is None:
        weights = regression_weights(int(js[0]), int(js[-1]),
                                     table.n_windows(), js=js)
    sf = structure_functions_mfdfa(table, np.array([2.0]))
    idx = _row_lookup(sf.js, weights)
    return 0.5 * float(weights.w @ sf.log2_values[idx, 0])
