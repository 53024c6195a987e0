"""Synthetic multifractal processes with closed-form oracles.

Generators
----------
- deterministic binomial wavelet cascade (a coefficient pyramid, not a
  signal), with its exact scaling function;
- multifractal random walk (MRW) with optional fractional differentiation,
  built from circulant-embedding Gaussian fields;
- lacunary wavelet series (LWS), planted in the wavelet domain and
  synthesized by the inverse transform;
- 2D canonical multiplicative cascades with log-normal or log-Poisson
  multipliers and pseudo-fractional integration.

Every generator is a deterministic function of its parameters and seed;
Monte Carlo replication seeds are derived by spawning, so parallel runs are
order-independent.

Oracles evaluate the known multifractal quantities (cumulants, scaling
function, critical index p0, spectra) in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    EmbeddingFailureError,
    InvalidParameterError,
    ParameterInconsistencyError,
    UnsupportedOrderError,
)
from .wavelet import (
    CoefficientOctave,
    CoefficientPyramid,
    WaveletFilter,
    daubechies_filter,
    dwt1d,
    dwt2d,
    idwt1d,
    idwt2d,
)

LN2 = math.log(2.0)


def rng_for(seed, index: int | None = None) -> np.random.Generator:
    """Deterministic generator; ``index`` spawns an independent stream."""
    ss = np.random.SeedSequence(entropy=seed)
    if index is not None:
        ss = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    return np.random.default_rng(ss)


# -- deterministic binomial cascade --------------------------------------------

def gen_deterministic_cascade(omega0: float, omega1: float,
                              n_octaves: int) -> CoefficientPyramid:
    """Binomial wavelet cascade pyramid: the single coarsest coefficient is 1
    and each coefficient spawns two children scaled by omega0 and omega1.

    The exact scaling function ``1 - log2(omega0**q + omega1**q)`` is
    available via :func:`cascade_eta`; the parameters ride along in ``meta``.
    """
    if omega0 <= 0 or omega1 <= 0:
        raise InvalidParameterError("cascade multipliers must be positive")
    if n_octaves < 4:
        raise InvalidParameterError("need at least 4 octaves")
    levels = [np.array([1.0])]
    for _ in range(n_octaves - 1):
        parent = levels[-1]
        child = np.empty(2 * parent.size)
        child[0::2] = omega0 * parent
        child[1::2] = omega1 * parent
        levels.append(child)
    levels.reverse()  # finest first
    octaves = [
        CoefficientOctave(j=j, bands=c[np.newaxis, :],
                          valid=np.ones(c.size, dtype=bool))
        for j, c in enumerate(levels, start=1)
    ]
    return CoefficientPyramid(
        dim=1, n_samples=2 ** n_octaves, octaves=octaves, approx=None,
        filter=None, meta={"process": "binomial-cascade",
                           "omega0": omega0, "omega1": omega1})


def cascade_eta(omega0: float, omega1: float, q) -> np.ndarray | float:
    """Exact scaling function of the binomial cascade."""
    q = np.asarray(q, dtype=float)
    out = 1.0 - np.log2(omega0 ** q + omega1 ** q)
    return float(out) if out.ndim == 0 else out


# -- circulant embedding --------------------------------------------------------

def circulant_gaussian(autocov, n: int, rng: np.random.Generator,
                       max_doublings: int = 4) -> tuple[np.ndarray, np.ndarray]:
    """Two independent stationary Gaussian series with the given
    autocovariance function, by circulant embedding.

    ``autocov`` maps an integer lag array to covariances.  If the embedding
    has substantially negative eigenvalues the circulant is enlarged a few
    times before giving up; tiny negative eigenvalues are clipped.
    """
    m = 1
    while m < 2 * n:
        m *= 2
    for _ in range(max_doublings + 1):
        lags = np.minimum(np.arange(m), m - np.arange(m))
        lam = np.fft.fft(autocov(lags)).real
        if lam.min() >= -1e-8 * max(lam.max(), 1.0):
            lam = np.clip(lam, 0.0, None)
            z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
            w = np.fft.fft(np.sqrt(lam / m) * z)
            return w.real[:n].copy(), w.imag[:n].copy()
        m *= 2
    raise EmbeddingFailureError(
        f"circulant embedding stayed non-positive-definite up to size {m}")


def fgn_autocov(hurst: float):
    """Autocovariance of unit-variance fractional Gaussian noise."""
    def acov(k):
        k = np.abs(np.asarray(k, dtype=float))
        return 0.5 * ((k + 1) ** (2 * hurst) - 2 * k ** (2 * hurst)
                      + np.abs(k - 1) ** (2 * hurst))
    return acov


# -- multifractal random walk ----------------------------------------------------

@dataclass
class MrwParams:
    """Multifractal random walk parameters.

    ``intermittency`` is the lambda of the log-correlated field; the
    log-covariance is ``lambda**2 * ln(L / (|dk| + 1))`` for lags below the
    correlation length L (default: the full sample count).  The mean of the
    field is pinned to minus its variance so the exponential has unit mean.
    ``nu >= 0`` applies fractional differentiation, shifting the spectrum to
    smaller h by nu.
    """

    n: int = 2 ** 16
    hurst: float = 0.72
    intermittency: float = math.sqrt(0.08)
    corr_length: int | None = None
    nu: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        if not 0.5 < self.hurst < 1.0:
            raise InvalidParameterError("hurst must lie in (1/2, 1)")
        if self.intermittency <= 0:
            raise InvalidParameterError("intermittency must be positive")
        if self.n & (self.n - 1):
            raise InvalidParameterError("n must be a power of two")
        if self.nu < 0:
            raise InvalidParameterError("nu must be >= 0")

    @property
    def L(self) -> int:
        return self.n if self.corr_length is None else self.corr_length


def gen_mrw(params: MrwParams,
            rng: np.random.Generator | None = None) -> np.ndarray:
    """Sample one MRW path: the cumulative sum of fGn increments modulated
    by the exponential of the log-correlated field.

    Fractional differentiation (``params.nu > 0``) is applied in the wavelet
    domain with a db2 pyramid, matching the analysis convention.
    """
    rng = rng_for(params.seed) if rng is None else rng
    lam = params.intermittency
    L = params.L

    def om_acov(k):
        k = np.abs(np.asarray(k, dtype=float))
        v = lam * lam * np.log(L / (k + 1.0))
        return np.where(k < L, v, 0.0)

    g, _ = circulant_gaussian(fgn_autocov(params.hurst), params.n, rng)
    om, _ = circulant_gaussian(om_acov, params.n, rng)
    om -= lam * lam * np.log(L)  # E[omega] = -Var[omega]
    x = np.cumsum(g * np.exp(om))
    if params.nu != 0.0:
        x = frac_diff_signal(x, params.nu, daubechies_filter(2))
    return x


def mrw_cumulants(params: MrwParams) -> tuple[float, float]:
    """Exact (c1, c2) of the (fractionally differentiated) MRW."""
    lam2 = params.intermittency ** 2
    return params.hurst + lam2 / 2.0 - params.nu, -lam2


def mrw_eta(p: float, params: MrwParams) -> float:
    """Exact wavelet scaling function of the MRW.

    Quadratic ``c1*p + c2*p**2/2`` up to ``p* = sqrt(-2/c2)``; beyond, the
    Legendre development leaves the spectrum's support and the scaling
    function continues linearly with slope ``c1 - sqrt(-2 c2)`` from value 1,
    which is the unique continuation consistent with the closed-form p0.
    """
    c1, c2 = mrw_cumulants(params)
    p_star = math.sqrt(-2.0 / c2)
    if p <= p_star:
        return c1 * p + 0.5 * c2 * p * p
    return 1.0 + (c1 - math.sqrt(-2.0 * c2)) * p


def mrw_p0(params: MrwParams) -> float:
    """Exact critical Lebesgue index of the fractionally differentiated MRW
    (piecewise in nu)."""
    H, lam, nu = params.hurst, params.intermittency, params.nu
    lam2 = lam * lam
    b1 = H + lam * (lam / 2.0 - math.sqrt(2.0))
    b2 = H + lam * (lam / 2.0 - 1.0 / math.sqrt(2.0))
    b3 = H + lam2 / 2.0
    if nu <= b1:
        return math.inf
    if nu <= b2:
        return 1.0 / (nu - H - lam * (lam / 2.0 - math.sqrt(2.0)))
    if nu <= b3:
        return 2.0 * (H + lam2 / 2.0 - nu) / lam2
    raise InvalidParameterError(
        f"nu = {nu} exceeds H + lambda^2/2 = {b3}: eta(p) < 0 for all p")


# -- fractional integro-differentiation ------------------------------------------

def frac_diff(pyramid: CoefficientPyramid, nu: float) -> CoefficientPyramid:
    """Wavelet-domain pseudo-fractional operator.

    Octave ``j`` is multiplied by ``a_j**(-nu)`` with ``a_j = 2**(j - J)``
    the scale normalized to the coarsest octave, so differentiation
    (``nu > 0``) amplifies fine scales; ``nu < 0`` integrates.  On power-law
    pyramids this shifts the exponent by exactly ``-nu``.
    """
    if abs(nu) >= 2.0:
        raise UnsupportedOrderError(f"|nu| must be < 2, got {nu}")
    J = pyramid.n_octaves
    bands = [o.bands * 2.0 ** ((J - o.j) * nu) for o in pyramid.octaves]
    out = pyramid.copy_with_bands(bands)
    out.meta["frac_diff_nu"] = out.meta.get("frac_diff_nu", 0.0) + nu
    return out


def frac_diff_signal(signal: np.ndarray, nu: float, filt: WaveletFilter,
                     max_octaves: int | None = None) -> np.ndarray:
    """Signal-domain wrapper: analyze, rescale octaves, synthesize."""
    pyr = dwt1d(np.asarray(signal, dtype=float), filt, max_octaves)
    return idwt1d(frac_diff(pyr, nu))


# -- lacunary wavelet series ------------------------------------------------------

@dataclass
class LwsParams:
    """Lacunary wavelet series: at octave j (finest = 1, reference J =
    log2 n), exactly ``round(2**(lacunarity*(J-j)))`` coefficients are
    nonzero, at uniformly random positions, with common amplitude
    ``2**(regularity*(j-J))``."""

    n: int = 2 ** 16
    regularity: float = 0.2   # alpha > 0
    lacunarity: float = 0.8   # eta in (0, 1)
    seed: int | None = None

    def __post_init__(self):
        if self.regularity <= 0:
            raise InvalidParameterError("regularity must be positive")
        if not 0.0 < self.lacunarity < 1.0:
            raise InvalidParameterError("lacunarity must lie in (0, 1)")
        if self.n & (self.n - 1):
            raise InvalidParameterError("n must be a power of two")


def gen_lws_pyramid(params: LwsParams,
                    rng: np.random.Generator | None = None,
                    n_octaves: int | None = None) -> CoefficientPyramid:
    """Plant the LWS coefficient pyramid (all masks valid).

    ``n_octaves`` defaults to the full log2(n) depth; generators that go on
    to synthesize a signal restrict it so the periodic filter bank applies.
    """
    rng = rng_for(params.seed) if rng is None else rng
    J = int(np.log2(params.n))
    depth = J if n_octaves is None else int(n_octaves)
    octaves = []
    for j in range(1, depth + 1):
        n_j = 2 ** (J - j)
        count = int(round(2.0 ** (params.lacunarity * (J - j))))
        if count > n_j:
            raise ParameterInconsistencyError(
                f"octave {j}: {count} nonzero coefficients requested but "
                f"only {n_j} positions exist")
        c = np.zeros(n_j)
        c[rng.choice(n_j, size=count, replace=False)] = \
            2.0 ** (params.regularity * (j - J))
        octaves.append(CoefficientOctave(
            j=j, bands=c[np.newaxis, :], valid=np.ones(n_j, dtype=bool)))
    return CoefficientPyramid(
        dim=1, n_samples=params.n, octaves=octaves,
        approx=np.zeros(2 ** (J - depth)), filter=None,
        meta={"process": "lws", "regularity": params.regularity,
              "lacunarity": params.lacunarity})


def gen_lws(params: LwsParams, filt: WaveletFilter,
            rng: np.random.Generator | None = None) -> np.ndarray:
    """Synthesize an LWS signal by inverting the planted pyramid."""
    depth = int(np.log2(params.n)) - int(np.ceil(np.log2(filt.length)))
    pyr = gen_lws_pyramid(params, rng, n_octaves=depth)
    pyr.filter = filt
    return idwt1d(pyr)


def lws_support(params: LwsParams, p: float) -> tuple[float, float]:
    """Support [alpha, alpha/eta + (1/eta - 1)/p] of the LWS p-spectrum."""
    a, e = params.regularity, params.lacunarity
    right = a / e + (0.0 if math.isinf(p) else (1.0 / e - 1.0) / p)
    return a, right


def lws_spectrum(params: LwsParams, p: float,
                 h_grid=None) -> tuple[np.ndarray, np.ndarray]:
    """Exact LWS p-spectrum, linear on its support and -inf outside."""
    a, e = params.regularity, params.lacunarity
    lo, hi = lws_support(params, p)
    h = np.linspace(lo, hi, 65) if h_grid is None else np.asarray(h_grid, float)
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    D = np.where((h >= lo) & (h <= hi),
                 e * (h + inv_p) / (a + inv_p), -np.inf)
    return h, D


# -- 2D canonical multiplicative cascades ------------------------------------------

@dataclass
class CmcParams:
    """2D canonical Mandelbrot cascade.

    ``kind`` selects the multiplier: "log-normal" uses ``W = 2**-U`` with
    ``U ~ N(m, 2m/ln 2)``; "log-poisson" uses ``W = 2**gamma *
    exp(ln(beta) * Poisson(-gamma ln2/(beta-1)))``.  Both have E[W] = 1.
    ``alpha >= 0`` applies pseudo-fractional integration after the
    multiplicative construction.
    """

    side: int = 2 ** 10
    kind: str = "log-normal"
    m: float = 0.04
    beta: float = 0.8395
    gamma: float = 0.4195
    alpha: float = 0.2
    seed: int | None = None

    def __post_init__(self):
        if self.side & (self.side - 1) or self.side < 8:
            raise InvalidParameterError("side must be a power of two >= 8")
        if self.kind not in ("log-normal", "log-poisson"):
            raise InvalidParameterError(f"unknown cascade kind {self.kind!r}")
        if self.kind == "log-normal" and self.m <= 0:
            raise InvalidParameterError("m must be positive")
        if self.kind == "log-poisson" and not (0.0 < self.beta < 1.0
                                               and self.gamma > 0.0):
            raise InvalidParameterError("need beta in (0,1) and gamma > 0")
        if self.alpha < 0:
            raise InvalidParameterError("integration order alpha must be >= 0")


def _cmc_multipliers(params: CmcParams, shape,
                     rng: np.random.Generator) -> np.ndarray:
    if params.kind == "log-normal":
        u = rng.normal(params.m, math.sqrt(2.0 * params.m / LN2), size=shape)
        return 2.0 ** (-u)
    lam_p = -params.gamma * LN2 / (params.beta - 1.0)
    return 2.0 ** params.gamma * params.beta ** rng.poisson(lam_p, size=shape)


def gen_cmc2d(params: CmcParams,
              rng: np.random.Generator | None = None) -> np.ndarray:
    """Iterative split-and-multiply cascade on a square, then integration.

    The integration multiplier ``a_j**alpha`` is applied in a Haar pyramid:
    Haar is the natural basis for the piecewise-constant cascade field, so
    the exponent shift is exact.  ``alpha = 0`` returns the raw cascade.
    """
    rng = rng_for(params.seed) if rng is None else rng
    depth = int(np.log2(params.side))
    field = np.ones((1, 1))
    for _ in range(depth):
        field = np.kron(field, np.ones((2, 2)))
        field *= _cmc_multipliers(params, field.shape, rng)
    if params.alpha != 0.0:
        filt = daubechies_filter(1)
        pyr = dwt2d(field, filt)
        field = idwt2d(frac_diff(pyr, -params.alpha))
    return field


def cmc_cumulants(params: CmcParams) -> np.ndarray:
    """Exact log-cumulants c1..c4 of the integrated cascade.

    Derived from the cumulant expansion of ``-log2 E[W**q] + alpha*q``: the
    log-Poisson case gives ``c_m = gamma * ln(beta)**m / (beta - 1)`` for
    m >= 2 (this form, not the sign-flipped one, reproduces c2 < 0).
    """
    if params.kind == "log-normal":
        return np.array([params.m + params.alpha, -2.0 * params.m, 0.0, 0.0])
    b, g = params.beta, params.gamma
    c1 = params.alpha + g * (math.log(b) / (b - 1.0) - 1.0)
    cs = [g * math.log(b) ** m / (b - 1.0) for m in (2, 3, 4)]
    return np.array([c1] + cs)


def cmc_spectrum(params: CmcParams,
                 h_grid=None) -> tuple[np.ndarray, np.ndarray]:
    """Exact multifractal spectrum of the integrated cascade."""
    if params.kind == "log-normal":
        m, a = params.m, params.alpha
        half = math.sqrt(8.0 * m)  # D reaches 0 at h = a + m +- sqrt(8 m)
        h = (np.linspace(a + m - half, a + m + half, 129)
             if h_grid is None else np.asarray(h_grid, float))
        return h, 2.0 - (h - a - m) ** 2 / (4.0 * m)
    b, g, a = params.beta, params.gamma, params.alpha
    if h_grid is None:
        c = cmc_cumulants(params)
        half = math.sqrt(-8.0 * c[1])
        h = np.linspace(c[0] - half, c[0] + half, 129)
    else:
        h = np.asarray(h_grid, dtype=float)
    u = -a + g + h
    with np.errstate(invalid="ignore", divide="ignore"):
        D = (2.0 + g / (b - 1.0)
             + (u / math.log(b))
             * (np.log(u * (b - 1.0) / (g * math.log(b))) - 1.0))
    return h, D


# -- trends ------------------------------------------------------------------------

def cusp_trend(n: int) -> np.ndarray:
    """Smooth non-polynomial trend 100*(t + 1/100)**(-1/2) on [0, 1]:
    no fixed-degree fit absorbs the inverse-square-root cusp at the origin."""
    t = np.linspace(0.0, 1.0, n)
    return 100.0 * (t + 0.01) ** (-0.5)


def add_trend(signal: np.ndarray, kind: str = "cusp",
              coeffs=None) -> np.ndarray:
    """Add a deterministic trend sampled on the unit interval.

    kind "cusp" adds :func:`cusp_trend`; kind "polynomial" adds
    ``sum coeffs[k] * t**k``.
    """
    x = np.asarray(signal, dtype=float)
    if kind == "cusp":
        return x + cusp_trend(x.size)
    if kind == "polynomial":
        if coeffs is None:
            raise InvalidParameterError("polynomial trend needs coefficients")
        t = np.linspace(0.0, 1.0, x.size)
        return x + np.polynomial.polynomial.polyval(t, np.asarray(coeffs, float))
    raise InvalidParameterError(f"unknown trend kind {kind!r}")
