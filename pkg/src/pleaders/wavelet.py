"""Orthonormal Daubechies filter bank and L1-normalized coefficient pyramids.

The transform is the standard pyramid algorithm with periodic boundary
extension, which keeps the filter bank exactly orthonormal (analysis followed
by synthesis is the identity to machine precision).  Octave ``j = 1`` is the
finest scale.  Detail coefficients are stored with the L1 normalization used
for regularity analysis: the orthonormal (L2) coefficient at octave ``j`` is
divided by ``2**(j/2)`` in 1D and by ``2**j`` in 2D.

Each octave carries a validity mask.  Positions whose filter cascade touched
the periodic wrap-around are masked out rather than corrected; masks are
propagated exactly through the cascade, so an unmasked coefficient is
identical to what an infinite (non-wrapped) signal would have produced.

The coefficient at ``(j, k)`` is anchored to the sample interval
``[2**j * k, 2**j * (k + 1))``: decimation keeps even phases, so dyadic-cube
bookkeeping downstream (p-leader neighborhoods) is consistent across octaves.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InsufficientDataError,
    InvalidInputError,
    UnsupportedFilterError,
)

# Minimum-phase orthonormal Daubechies lowpass taps, N vanishing moments.
# Generated once by spectral factorization of the Daubechies half-band
# polynomial at 60-digit precision; db1 is Haar, db2 matches the classic
# closed form ((1+sqrt3)/(4 sqrt2), ...).
_DAUBECHIES_LOWPASS: dict[int, tuple[float, ...]] = {
    1: (0.7071067811865475244, 0.7071067811865475244),
    2: (0.48296291314453414337, 0.83651630373780790558,
        0.22414386804201338103, -0.12940952255126038117),
    3: (0.332670552950082616, 0.80689150931109257649,
        0.4598775021184915701, -0.1350110200102545887,
        -0.085441273882026661693, 0.035226291885709536603),
    4: (0.23037781330889650086, 0.71484657055291564709,
        0.63088076792985890788, -0.027983769416859854211,
        -0.18703481171909308408, 0.030841381835560763627,
        0.032883011666885199735, -0.010597401785069032105),
    5: (0.16010239797419291448, 0.60382926979718967054,
        0.72430852843777292773, 0.13842814590132073151,
        -0.24229488706638203186, -0.032244869584638374648,
        0.077571493840045713523, -0.0062414902127982742742,
        -0.012580751999081999469, 0.003335725285473771278),
    6: (0.11154074335010946362, 0.49462389039845308568,
        0.75113390802109535068, 0.31525035170919762909,
        -0.22626469396543982008, -0.12976686756726193556,
        0.097501605587323049102, 0.027522865530305728626,
        -0.031582039317486029565, 0.00055384220116149613925,
        0.0047772575109455106396, -0.0010773010853084795649),
    7: (0.07785205408500917902, 0.39653931948191730654,
        0.72913209084623511992, 0.46978228740519312247,
        -0.14390600392856497541, -0.22403618499387498264,
        0.071309219266830264751, 0.080612609151083071913,
        -0.03802993693501441358, -0.016574541630666880654,
        0.012550998556099840613, 0.00042957797292136652113,
        -0.0018016407040474909153, 0.00035371379997452024845),
    8: (0.054415842243104009955, 0.31287159091429997066,
        0.67563073629728980681, 0.58535468365420671277,
        -0.015829105256349305667, -0.28401554296154692652,
        0.00047248457391328277036, 0.12874742662047845886,
        -0.01736930100180754617, -0.044088253930794751507,
        0.013981027917398281649, 0.0087460940474057767164,
        -0.0048703529934515743104, -0.0003917403733769470463,
        0.00067544940645056936637, -0.00011747678412476953373),
    9: (0.038077947363878346589, 0.24383467461259035373,
        0.6048231236901111119, 0.65728807805130053808,
        0.13319738582500757619, -0.29327378327917490881,
        -0.096840783222976460514, 0.14854074933810638014,
        0.030725681479333379212, -0.067632829061329973676,
        0.00025094711483145195759, 0.022361662123679097205,
        -0.0047232047577513972779, -0.0042815036824634298345,
        0.0018476468830562264766, 0.00023038576352319596721,
        -0.00025196318894271013697, 0.000039347320316271599481),
    10: (0.026670057900555553587, 0.18817680007769148902,
         0.52720118893172558648, 0.68845903945360356574,
         0.28117234366057746075, -0.24984642432731537942,
         -0.1959462743773770435, 0.12736934033579326008,
         0.09305736460357235116, -0.071394147166397087145,
         -0.029457536821875812858, 0.03321267405934100174,
         0.0036065535669561696554, -0.010733175483330575044,
         0.0013953517470529011658, 0.0019924052951850561172,
         -0.00068585669495971162656, -0.00011646685512928545095,
         0.000093588670320069591334, -0.000013264202894521244812),
}

#: Coarsest octaves are dropped until at least this many unmasked
#: coefficients remain: regressions need nondegenerate scales.
MIN_COARSE_VALID = 8


@dataclass(frozen=True)
class WaveletFilter:
    """Orthonormal conjugate-quadrature filter pair."""

    name: str
    n_vanishing_moments: int
    lowpass: np.ndarray

    @property
    def highpass(self) -> np.ndarray:
        g = self.lowpass
        return ((-1.0) ** np.arange(g.size)) * g[::-1]

    @property
    def length(self) -> int:
        return self.lowpass.size


def daubechies_filter(n_vanishing_moments: int) -> WaveletFilter:
    """Return the minimum-phase Daubechies filter with the given number of
    vanishing moments (1 through 10; 1 is Haar)."""
    try:
        taps = _DAUBECHIES_LOWPASS[int(n_vanishing_moments)]
    except (KeyError, TypeError, ValueError):
        raise UnsupportedFilterError(
            f"Daubechies filters are available for 1..10 vanishing moments, "
            f"got {n_vanishing_moments!r}")
    return WaveletFilter(
        name=f"db{int(n_vanishing_moments)}",
        n_vanishing_moments=int(n_vanishing_moments),
        lowpass=np.asarray(taps, dtype=float),
    )


@dataclass
class CoefficientOctave:
    """One octave of a pyramid.

    ``bands`` has shape ``(1, n_j)`` in 1D and ``(3, m_j, m_j)`` in 2D
    (subband order: horizontal, vertical, diagonal detail).  ``valid`` has
    the spatial shape and is shared by all subbands.
    """

    j: int
    bands: np.ndarray
    valid: np.ndarray

    @property
    def n_valid(self) -> int:
        return int(self.valid.sum())

    def abs_valid(self) -> np.ndarray:
        """|coefficients| at unmasked positions, all subbands pooled."""
        return np.abs(self.bands[:, self.valid]).ravel()


@dataclass
class CoefficientPyramid:
    """L1-normalized detail coefficients, octave 1 = finest."""

    dim: int
    n_samples: int
    octaves: list[CoefficientOctave]
    approx: np.ndarray | None = None
    filter: WaveletFilter | None = None
    meta: dict = field(default_factory=dict)

    @property
    def n_octaves(self) -> int:
        return len(self.octaves)

    def octave(self, j: int) -> CoefficientOctave:
        return self.octaves[j - 1]

    def copy_with_bands(self, bands: list[np.ndarray]) -> "CoefficientPyramid":
        octs = [CoefficientOctave(o.j, b, o.valid.copy())
                for o, b in zip(self.octaves, bands)]
        approx = None if self.approx is None else self.approx.copy()
        return CoefficientPyramid(self.dim, self.n_samples, octs, approx,
                                  self.filter, dict(self.meta))


# -- 1D machinery -------------------------------------------------------------

def _analysis_step(a: np.ndarray, lo: np.ndarray, hi: np.ndarray):
    """One periodic analysis step; input length must be even."""
    F = lo.size
    ext = np.concatenate([a, a[:F - 1]])
    win = np.lib.stride_tricks.sliding_window_view(ext, F)[::2]
    return win @ lo, win @ hi


def _synthesis_step(approx: np.ndarray, detail: np.ndarray,
                    lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Inverse of :func:`_analysis_step` (periodic)."""
    F = lo.size
    n = 2 * approx.size
    out = np.zeros(n)
    for coeffs, f in ((approx, lo), (detail, hi)):
        up = np.zeros(n)
        up[::2] = coeffs
        ext = np.concatenate([up[-(F - 1):], up])
        out += np.convolve(ext, f, mode="valid")
    return out


def _taint_step(taint: np.ndarray, filter_length: int) -> np.ndarray:
    """Propagate the wrap-around mask through one decimation step.

    An output is tainted if its window crosses the periodic boundary or
    touches an already-tainted input.
    """
    ext = np.concatenate([taint, np.ones(filter_length - 1, dtype=bool)])
    win = np.lib.stride_tricks.sliding_window_view(ext, filter_length)[::2]
    return win.any(axis=1)


def _octave_budget(n: int, filt: WaveletFilter, max_octaves: int | None) -> int:
    cap = int(np.floor(np.log2(n))) - int(np.ceil(np.log2(filt.length)))
    if max_octaves is not None:
        cap = min(cap, int(max_octaves))
    return cap


def dwt1d(signal: np.ndarray, filt: WaveletFilter,
          max_octaves: int | None = None) -> CoefficientPyramid:
    """Decompose a 1D signal into an L1-normalized coefficient pyramid.

    The number of octaves is ``min(max_octaves, floor(log2 N) -
    ceil(log2 filter_length))``, further reduced so the coarsest octave keeps
    at least ``MIN_COARSE_VALID`` unmasked coefficients (and, for lengths that
    are not powers of two, so every analyzed length stays even).
    """
    x = np.asarray(signal, dtype=float)
    if x.ndim != 1:
        raise InvalidInputError(f"expected a 1D signal, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("signal contains non-finite values")
    if x.size < 2 * filt.length:
        raise InsufficientDataError(
            f"signal of length {x.size} is shorter than twice the filter "
            f"length ({filt.length})")

    lo, hi = filt.lowpass, filt.highpass
    budget = _octave_budget(x.size, filt, max_octaves)
    octaves: list[CoefficientOctave] = []
    a = x
    taint = np.zeros(x.size, dtype=bool)
    j = 0
    while j < budget and a.size % 2 == 0:
        j += 1
        approx, detail = _analysis_step(a, lo, hi)
        taint = _taint_step(taint, filt.length)
        valid = ~taint
        if valid.sum() < MIN_COARSE_VALID:
            j -= 1
            break
        octaves.append(CoefficientOctave(
            j=j,
            bands=(detail / 2.0 ** (j / 2.0))[np.newaxis, :],
            valid=valid,
        ))
        a = approx
    if not octaves:
        raise InsufficientDataError("no analyzable octave (signal too short)")
    return CoefficientPyramid(dim=1, n_samples=x.size, octaves=octaves,
                              approx=a, filter=filt)


def idwt1d(pyramid: CoefficientPyramid,
           approx: np.ndarray | None = None) -> np.ndarray:
    """Invert :func:`dwt1d` (periodic boundary).

    ``approx`` defaults to the approximation stored by the analysis; it must
    match the coarsest octave's length.
    """
    if pyramid.dim != 1:
        raise InvalidInputError("idwt1d expects a 1D pyramid")
    if pyramid.filter is None:
        raise InvalidInputError("pyramid carries no filter, cannot invert")
    a = pyramid.approx if approx is None else np.asarray(approx, dtype=float)
    if a is None:
        raise InvalidInputError("no approximation band supplied")
    lo, hi = pyramid.filter.lowpass, pyramid.filter.highpass
    a = a.copy()
    for j in range(pyramid.n_octaves, 0, -1):
        detail = pyramid.octave(j).bands[0] * 2.0 ** (j / 2.0)
        if a.size != detail.size:
            raise InvalidInputError(
                f"approximation length {a.size} does not match octave {j} "
                f"detail length {detail.size}")
        a = _synthesis_step(a, detail, lo, hi)
    return a


# -- 2D machinery -------------------------------------------------------------

def _analysis_axis(M: np.ndarray, f: np.ndarray, axis: int) -> np.ndarray:
    M = np.moveaxis(M, axis, -1)
    F = f.size
    ext = np.concatenate([M, M[..., :F - 1]], axis=-1)
    win = np.lib.stride_tricks.sliding_window_view(ext, F, axis=-1)[..., ::2, :]
    return np.moveaxis(win @ f, -1, axis)


def _synthesis_axis(M: np.ndarray, f: np.ndarray, axis: int) -> np.ndarray:
    M = np.moveaxis(M, axis, -1)
    F = f.size
    n = 2 * M.shape[-1]
    up = np.zeros(M.shape[:-1] + (n,))
    up[..., ::2] = M
    ext = np.concatenate([up[..., -(F - 1):], up], axis=-1)
    win = np.lib.stride_tricks.sliding_window_view(ext, F, axis=-1)
    return np.moveaxis(win @ f[::-1], -1, axis)


def dwt2d(field: np.ndarray, filt: WaveletFilter,
          max_octaves: int | None = None) -> CoefficientPyramid:
    """Separable 2D transform of a square power-of-two field.

    Produces three L1-normalized subbands per octave.  Validity masks are the
    outer product of the per-axis 1D masks.
    """
    X = np.asarray(field, dtype=float)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise InvalidInputError(f"expected a square field, got shape {X.shape}")
    n = X.shape[0]
    if n & (n - 1) or n < 4 * filt.length:
        raise InsufficientDataError(
            f"side {n} must be a power of two >= 4 * filter length "
            f"({4 * filt.length})")
    if not np.all(np.isfinite(X)):
        raise InvalidInputError("field contains non-finite values")

    lo, hi = filt.lowpass, filt.highpass
    budget = _octave_budget(n, filt, max_octaves)
    octaves: list[CoefficientOctave] = []
    a = X
    taint = np.zeros(n, dtype=bool)
    j = 0
    while j < budget:
        j += 1
        L = _analysis_axis(a, lo, 1)
        H = _analysis_axis(a, hi, 1)
        LL = _analysis_axis(L, lo, 0)
        LH = _analysis_axis(L, hi, 0)
        HL = _analysis_axis(H, lo, 0)
        HH = _analysis_axis(H, hi, 0)
        taint = _taint_step(taint, filt.length)
        valid1d = ~taint
        valid = np.outer(valid1d, valid1d)
        if valid.sum() < MIN_COARSE_VALID:
            j -= 1
            break
        octaves.append(CoefficientOctave(
            j=j,
            bands=np.stack([LH, HL, HH]) / 2.0 ** j,
            valid=valid,
        ))
        a = LL
    if not octaves:
        raise InsufficientDataError("no analyzable octave (field too small)")
    return CoefficientPyramid(dim=2, n_samples=n, octaves=octaves,
                              approx=a, filter=filt)


def idwt2d(pyramid: CoefficientPyramid,
           approx: np.ndarray | None = None) -> np.ndarray:
    """Invert :func:`dwt2d` (periodic boundary)."""
    if pyramid.dim != 2:
        raise InvalidInputError("idwt2d expects a 2D pyramid")
    if pyramid.filter is None:
        raise InvalidInputError("pyramid carries no filter, cannot invert")
    a = pyramid.approx if approx is None else np.asarray(approx, dtype=float)
    if a is None:
        raise InvalidInputError("no approximation band supplied")
    lo, hi = pyramid.filter.lowpass, pyramid.filter.highpass
    a = a.copy()
    for j in range(pyramid.n_octaves, 0, -1):
        LH, HL, HH = pyramid.octave(j).bands * 2.0 ** j
        if a.shape != LH.shape:
            raise InvalidInputError(
                f"approximation shape {a.shape} does not match octave {j}")
        L = _synthesis_axis(a, lo, 0) + _synthesis_axis(LH, hi, 0)
        H = _synthesis_axis(HL, lo, 0) + _synthesis_axis(HH, hi, 0)
        a = _synthesis_axis(L, lo, 1) + _synthesis_axis(H, hi, 1)
    return a
