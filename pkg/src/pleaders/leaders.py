"""p-leaders, the wavelet scaling function, h_min and the critical index p0.

A p-leader at dyadic cube ``(j, k)`` aggregates the coefficient magnitudes of
all cubes at octaves ``j' <= j`` contained in the cube's neighborhood, each
raised to the power ``p`` and weighted by ``2**(-d*(j - j'))``; the leader is
the ``1/p`` power of the sum.  ``p = inf`` degenerates to the plain supremum
(classical wavelet leaders).  The neighborhood is either the cube and its
``3**d - 1`` immediate neighbors ("full" mode) or the cube alone
("restricted" mode).

Leaders are built coarse-from-fine by a single O(n) recursion: the restricted
accumulator of a cube is its own-octave term plus the ``2**-d``-weighted sum
(or max) of its children's accumulators, and the neighborhood combination is
applied per octave afterwards.  Neighborhoods are truncated at the data
edges, never wrapped; a leader is masked invalid as soon as any contributing
cube is border-masked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateDataError,
    InsufficientScalesError,
    InvalidInputError,
    InvalidParameterError,
    NoValidPError,
)
from .formalism import regression_weights
from .wavelet import CoefficientPyramid

#: p grid used to bracket the critical Lebesgue index.
P0_DEFAULT_GRID = (0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0)


@dataclass
class LeaderOctave:
    j: int
    values: np.ndarray
    valid: np.ndarray

    @property
    def n_valid(self) -> int:
        return int(self.valid.sum())

    def valid_values(self) -> np.ndarray:
        return self.values[self.valid]


@dataclass
class LeaderPyramid:
    p: float
    dim: int
    mode: str
    octaves: list[LeaderOctave]
    meta: dict = field(default_factory=dict)

    @property
    def n_octaves(self) -> int:
        return len(self.octaves)

    def octave(self, j: int) -> LeaderOctave:
        return self.octaves[j - 1]

    def valid_counts(self, js) -> np.ndarray:
        return np.array([self.octave(j).n_valid for j in js], dtype=float)


def _children_sum(acc: np.ndarray, dim: int) -> np.ndarray:
    if dim == 1:
        return acc[0::2] + acc[1::2]
    return (acc[0::2, 0::2] + acc[0::2, 1::2]
            + acc[1::2, 0::2] + acc[1::2, 1::2])


def _children_max(acc: np.ndarray, dim: int) -> np.ndarray:
    if dim == 1:
        return np.maximum(acc[0::2], acc[1::2])
    return np.maximum(np.maximum(acc[0::2, 0::2], acc[0::2, 1::2]),
                      np.maximum(acc[1::2, 0::2], acc[1::2, 1::2]))


def _children_all(valid: np.ndarray, dim: int) -> np.ndarray:
    if dim == 1:
        return valid[0::2] & valid[1::2]
    return (valid[0::2, 0::2] & valid[0::2, 1::2]
            & valid[1::2, 0::2] & valid[1::2, 1::2])


def _neighborhood(rest: np.ndarray, vrest: np.ndarray, dim: int, use_max: bool):
    """Combine the 3**d cells around each position, truncating at edges.

    Values are padded with zero (neutral for sums and maxima of nonnegative
    accumulators); validity is padded with True so a missing neighbor does
    not invalidate an edge leader.
    """
    if dim == 1:
        pad = np.concatenate([[0.0], rest, [0.0]])
        vpad = np.concatenate([[True], vrest, [True]])
        shifts = [pad[:-2], pad[1:-1], pad[2:]]
        vshifts = [vpad[:-2], vpad[1:-1], vpad[2:]]
    else:
        m = rest.shape[0]
        pad = np.zeros((m + 2, m + 2))
        pad[1:-1, 1:-1] = rest
        vpad = np.ones((m + 2, m + 2), dtype=bool)
        vpad[1:-1, 1:-1] = vrest
        shifts = [pad[r:r + m, c:c + m] for r in range(3) for c in range(3)]
        vshifts = [vpad[r:r + m, c:c + m] for r in range(3) for c in range(3)]
    combine = np.maximum.reduce if use_max else np.add.reduce
    return combine(shifts), np.logical_and.reduce(vshifts)


def compute_p_leaders(pyramid: CoefficientPyramid, p: float,
                      mode: str = "full") -> LeaderPyramid:
    """Compute the p-leader pyramid of a coefficient pyramid.

    Parameters
    ----------
    p : positive float or ``math.inf``
        Aggregation exponent; ``inf`` gives classical wavelet leaders.
    mode : {"full", "restricted"}
        "full" uses the 3-lambda neighborhood, "restricted" the cube alone.
    """
    if not (p > 0):
        raise InvalidParameterError(f"p must be positive or inf, got {p}")
    if mode not in ("full", "restricted"):
        raise InvalidParameterError(f"unknown neighborhood mode {mode!r}")
    if pyramid.n_octaves == 0:
        raise InvalidInputError("empty coefficient pyramid")

    dim = pyramid.dim
    use_max = math.isinf(p)
    octaves: list[LeaderOctave] = []
    acc = vacc = None
    for oct_ in pyramid.octaves:
        c = np.abs(oct_.bands)
        own = c.max(axis=0) if use_max else (c ** p).sum(axis=0)
        if acc is None:
            rest, vrest = own, oct_.valid
        elif use_max:
            rest = np.maximum(own, _children_max(acc, dim))
            vrest = oct_.valid & _children_all(vacc, dim)
        else:
            rest = own + 2.0 ** (-dim) * _children_sum(acc, dim)
            vrest = oct_.valid & _children_all(vacc, dim)
        acc, vacc = rest, vrest

        if mode == "full":
            values, valid = _neighborhood(rest, vrest, dim, use_max)
        else:
            values, valid = rest.copy(), vrest.copy()
        if not use_max:
            values **= 1.0 / p
        octaves.append(LeaderOctave(j=oct_.j, values=values, valid=valid))
    return LeaderPyramid(p=p, dim=dim, mode=mode, octaves=octaves,
                         meta=dict(pyramid.meta))


# -- wavelet scaling function, hmin, p0 ---------------------------------------

@dataclass
class WaveletScalingFunction:
    """eta(p) estimated on a grid of p values."""

    p_grid: np.ndarray
    eta: np.ndarray
    j1: int
    j2: int
    weighting: str

    def is_concave(self, slack: float = 0.05) -> bool:
        """Loose concavity check: no interior point sits below the chord of
        its neighbors by more than ``slack``."""
        p, e = self.p_grid, self.eta
        for i in range(1, p.size - 1):
            t = (p[i] - p[i - 1]) / (p[i + 1] - p[i - 1])
            chord = (1 - t) * e[i - 1] + t * e[i + 1]
            if e[i] < chord - slack:
                return False
        return True


def _usable_js(pyramid: CoefficientPyramid, j1: int, j2: int) -> np.ndarray:
    if not 1 <= j1 < j2 <= pyramid.n_octaves:
        raise InsufficientScalesError(
            f"octave range [{j1}, {j2}] not available in a pyramid with "
            f"{pyramid.n_octaves} octaves")
    js = np.array([j for j in range(j1, j2 + 1)
                   if pyramid.octave(j).n_valid > 0])
    if js.size < 3:
        raise InsufficientScalesError(
            f"only {js.size} usable octaves in [{j1}, {j2}], need >= 3")
    return js


def coefficient_log2_moments(pyramid: CoefficientPyramid, p: float,
                             js) -> np.ndarray:
    """log2 of the per-octave average of |c|**p over valid coefficients."""
    return np.array([
        np.log2(np.mean(pyramid.octave(j).abs_valid() ** p)) for j in js
    ])


def eta_hat(pyramid: CoefficientPyramid, p: float, j1: int, j2: int,
            weighting: str = "nj") -> float:
    """Estimate the wavelet scaling function eta(p): the weighted slope of
    ``log2 S_c(j, p)`` against ``j``, where ``S_c`` is the per-octave average
    of ``|c|**p``."""
    if not (np.isfinite(p) and p > 0):
        raise InvalidParameterError(f"eta_hat needs a finite positive p, got {p}")
    js = _usable_js(pyramid, j1, j2)
    logs = coefficient_log2_moments(pyramid, p, js)
    conf = (np.array([pyramid.octave(j).n_valid for j in js], dtype=float)
            if weighting == "nj" else np.ones(js.size))
    w = regression_weights(int(js[0]), int(js[-1]), conf, js=js)
    return float(w.w @ logs)


def hmin(pyramid: CoefficientPyramid, j1: int, j2: int,
         weighting: str = "nj") -> float:
    """Weighted-regression slope of ``log2 sup |c(j, .)|`` against ``j``.

    A negative value signals that classical (p = inf) leader analysis needs
    prior fractional integration.
    """
    js = _usable_js(pyramid, j1, j2)
    sups = np.array([pyramid.octave(j).abs_valid().max() for j in js])
    if np.any(sups == 0.0):
        bad = int(js[np.flatnonzero(sups == 0.0)[0]])
        raise DegenerateDataError(
            f"octave {bad} has no nonzero coefficient: hmin regression "
            f"degenerate", octave=bad)
    conf = (np.array([pyramid.octave(j).n_valid for j in js], dtype=float)
            if weighting == "nj" else np.ones(js.size))
    w = regression_weights(int(js[0]), int(js[-1]), conf, js=js)
    return float(w.w @ np.log2(sups))


def wavelet_scaling_function(pyramid: CoefficientPyramid, j1: int, j2: int,
                             p_grid=P0_DEFAULT_GRID,
                             weighting: str = "flat") -> WaveletScalingFunction:
    """Evaluate eta_hat on a p grid (for the p0 scan).

    Flat weights are the default here: confidence weighting by n_j
    concentrates the fit on fine scales, whose large-|p| sample moments are
    biased, and that visibly skews the zero crossing of eta.
    """
    p_grid = np.asarray(p_grid, dtype=float)
    eta = np.array([eta_hat(pyramid, p, j1, j2, weighting) for p in p_grid])
    return WaveletScalingFunction(p_grid=p_grid, eta=eta, j1=j1, j2=j2,
                                  weighting=weighting)


def p0_hat(curve: WaveletScalingFunction) -> float:
    """Estimate the critical Lebesgue index sup{p : eta(p) > 0}.

    Returns ``inf`` when eta is still positive and non-decreasing at the top
    of the grid; otherwise interpolates the zero crossing linearly.  Raises
    :class:`NoValidPError` when eta is nonpositive on the whole grid.
    """
    p, e = curve.p_grid, curve.eta
    pos = np.flatnonzero(e > 0)
    if pos.size == 0:
        raise NoValidPError(
            "eta(p) <= 0 for every p on the grid; the data require "
            "fractional integration before p-leader analysis")
    i = int(pos[-1])
    if i == p.size - 1:
        slope = (e[-1] - e[-2]) / (p[-1] - p[-2])
        return math.inf if slope >= 0 else float(p[-1])
    # linear interpolation between the last positive point and the next one
    return float(p[i] + (0.0 - e[i]) * (p[i + 1] - p[i]) / (e[i + 1] - e[i]))
