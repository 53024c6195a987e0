"""End-to-end analysis: pyramid -> leaders -> corrected estimates -> spectra.

One :class:`AnalysisBundle` collects everything a caller needs: h_min, the
eta(p) curve with the estimated critical index p0, per-p scaling estimates,
Legendre spectra and bound reports, and optionally an MFDFA run on the same
series.  Estimation failures that have a defined meaning (eta(p) <= 0, p
beyond p0) are downgraded to recorded warnings here so that Monte Carlo
drivers can count them instead of dying.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import mfdfa as mfdfa_mod
from .errors import InsufficientScalesError, NoValidPError
from .formalism import (
    DEFAULT_Q_GRID,
    BoundReport,
    LegendreSpectrum,
    RegressionWeights,
    ScalingEstimates,
    StructureFunctionTable,
    CumulantTable,
    check_bound,
    cm_hat,
    cumulants,
    legendre_parametric,
    regression_weights,
    structure_functions,
    zeta_hat,
)
from .leaders import (
    LeaderPyramid,
    WaveletScalingFunction,
    compute_p_leaders,
    eta_hat,
    hmin,
    p0_hat,
    wavelet_scaling_function,
)
from .wavelet import CoefficientPyramid, daubechies_filter, dwt1d, dwt2d

#: Minimum unmasked leaders the default coarsest regression octave keeps.
MIN_LEADERS_PER_OCTAVE = 8


@dataclass
class AnalysisOptions:
    """Settings shared by the CLI, the Monte Carlo harness and tests."""

    p_values: tuple = (2.0,)
    q_grid: np.ndarray | None = None
    j1: int = 4
    j2: int | None = None            # default: coarsest well-populated octave
    n_vanishing_moments: int = 2
    mode: str = "full"
    corrected: bool = True
    weighting: str = "nj"
    m_max: int = 4
    max_octaves: int | None = None
    p0_scan: bool = True
    bound_tolerance: float = 0.05
    adapt_j1_positive: bool = False  # raise j1 past octaves with zero leaders
    mfdfa_degree: int | None = None  # None: skip MFDFA
    mfdfa_integrate: bool = True

    def grid(self) -> np.ndarray:
        return DEFAULT_Q_GRID if self.q_grid is None else np.asarray(
            self.q_grid, dtype=float)


@dataclass
class PLeaderResult:
    """Estimates obtained from one leader pyramid."""

    p: float
    eta_p: float
    correction_applied: bool
    estimates: ScalingEstimates
    spectrum: LegendreSpectrum
    bound: BoundReport | None
    structure: StructureFunctionTable
    cumulant_table: CumulantTable
    weights: RegressionWeights
    leaders: LeaderPyramid | None = None


@dataclass
class AnalysisBundle:
    dim: int
    n_samples: int
    n_octaves: int
    j1: int
    j2: int
    hmin: float
    eta_curve: WaveletScalingFunction | None
    p0: float | None
    results: dict[float, PLeaderResult]
    mfdfa: tuple[ScalingEstimates, LegendreSpectrum] | None = None
    warnings: list[str] = field(default_factory=list)

    def result(self, p: float) -> PLeaderResult:
        return self.results[p]


def default_j2(leaders: LeaderPyramid, j1: int) -> int:
    """Coarsest octave that still holds MIN_LEADERS_PER_OCTAVE valid leaders."""
    j2 = 0
    for oct_ in leaders.octaves:
        if oct_.n_valid >= MIN_LEADERS_PER_OCTAVE:
            j2 = oct_.j
    if j2 < j1 + 2:
        raise InsufficientScalesError(
            f"no usable octave range above j1={j1} "
            f"(coarsest well-populated octave is {j2})")
    return j2


def analyze_pyramid(pyramid: CoefficientPyramid,
                    options: AnalysisOptions) -> AnalysisBundle:
    """Run the leader estimation chain on an existing coefficient pyramid."""
    opts = options
    q_grid = opts.grid()
    warnings: list[str] = []

    probe = compute_p_leaders(pyramid, math.inf, opts.mode)
    j2 = opts.j2 if opts.j2 is not None else default_j2(probe, opts.j1)

    hm = hmin(pyramid, opts.j1, j2, opts.weighting)
    if hm < 0:
        warnings.append(
            f"hmin = {hm:.3f} < 0: sup-based (p = inf) leaders are outside "
            f"their validity regime")

    eta_curve = None
    p0 = None
    if opts.p0_scan:
        try:
            eta_curve = wavelet_scaling_function(pyramid, opts.j1, j2)
            p0 = p0_hat(eta_curve)
        except NoValidPError as exc:
            warnings.append(f"p0 scan failed: {exc}")

    results: dict[float, PLeaderResult] = {}
    for p in opts.p_values:
        leaders = compute_p_leaders(pyramid, p, opts.mode)
        j1_eff = opts.j1
        if opts.adapt_j1_positive:
            while j1_eff + 2 <= j2 and any(
                    (leaders.octave(j).valid_values() == 0.0).any()
                    for j in range(j1_eff, j2 + 1)):
                j1_eff += 1
            if j1_eff != opts.j1:
                warnings.append(
                    f"p={p}: j1 raised to {j1_eff} to clear zero leaders "
                    f"from negative-moment octaves")

        js = np.arange(j1_eff, j2 + 1)
        conf = (leaders.valid_counts(js) if opts.weighting == "nj"
                else np.ones(js.size))
        w = regression_weights(j1_eff, j2, conf, js=js)

        if math.isinf(p):
            eta_p = math.inf
            corrected = False  # correction term is identically zero
        else:
            eta_p = eta_hat(pyramid, p, j1_eff, j2, opts.weighting)
            corrected = opts.corrected and eta_p > 0
            if opts.corrected and eta_p <= 0:
                warnings.append(
                    f"p={p}: eta_hat={eta_p:.3f} <= 0, finite-size "
                    f"correction skipped (estimates will be biased)")
        if p0 is not None and np.isfinite(p) and p > p0:
            warnings.append(
                f"p={p} exceeds the estimated critical index p0={p0:.3g}: "
                f"spectra are expected to hug the theoretical bound")

        sf = structure_functions(leaders, q_grid, js=js)
        zq = zeta_hat(sf, p, eta_p, w, corrected)
        ctab = cumulants(leaders, opts.m_max, js=js)
        cm = cm_hat(ctab, p, eta_p, w, corrected)
        est = ScalingEstimates(q_grid=q_grid, zeta=zq, cm=cm, p=p,
                               eta_p=eta_p, corrected=corrected,
                               j1=j1_eff, j2=j2, weighting=opts.weighting)
        spec = legendre_parametric(leaders, q_grid, p, eta_p, w, corrected)
        bound = (check_bound(spec, p, pyramid.dim, opts.bound_tolerance)
                 if np.isfinite(p) else None)
        results[p] = PLeaderResult(
            p=p, eta_p=eta_p, correction_applied=corrected, estimates=est,
            spectrum=spec, bound=bound, structure=sf, cumulant_table=ctab,
            weights=w)

    return AnalysisBundle(
        dim=pyramid.dim, n_samples=pyramid.n_samples,
        n_octaves=pyramid.n_octaves, j1=opts.j1, j2=j2, hmin=hm,
        eta_curve=eta_curve, p0=p0, results=results, warnings=warnings)


def analyze_signal(signal: np.ndarray,
                   options: AnalysisOptions | None = None) -> AnalysisBundle:
    """Full 1D pipeline: wavelet pyramid, leaders for every requested p,
    and optionally MFDFA on the same series."""
    opts = options or AnalysisOptions()
    filt = daubechies_filter(opts.n_vanishing_moments)
    pyramid = dwt1d(np.asarray(signal, dtype=float), filt, opts.max_octaves)
    bundle = analyze_pyramid(pyramid, opts)
    if opts.mfdfa_degree is not None:
        scales = mfdfa_mod.dyadic_scales(pyramid.n_samples, opts.mfdfa_degree,
                                         opts.j1)
        table = mfdfa_mod.fluctuations(signal, scales, opts.mfdfa_degree,
                                       opts.mfdfa_integrate)
        bundle.mfdfa = mfdfa_mod.mfdfa_analyze(table, opts.grid(),
                                               m_max=opts.m_max)
    return bundle


def analyze_field(field: np.ndarray,
                  options: AnalysisOptions | None = None) -> AnalysisBundle:
    """Full 2D pipeline (no MFDFA: it is impractical for images)."""
    opts = options or AnalysisOptions()
    filt = daubechies_filter(opts.n_vanishing_moments)
    pyramid = dwt2d(np.asarray(field, dtype=float), filt, opts.max_octaves)
    return analyze_pyramid(pyramid, opts)
