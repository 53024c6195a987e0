"""Filter bank and pyramid tests.

Oracles: the filter table is checked against an independent spectral
factorization built on numpy.roots; transforms are checked against a direct
convolve-and-decimate implementation and the perfect-reconstruction
identity.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pleaders import (
    InsufficientDataError,
    InvalidInputError,
    UnsupportedFilterError,
    daubechies_filter,
    dwt1d,
    dwt2d,
    idwt1d,
    idwt2d,
)
from pleaders.wavelet import MIN_COARSE_VALID


def daubechies_by_factorization(n: int) -> np.ndarray:
    """Independent construction: roots of the Daubechies half-band
    polynomial, keeping the minimum-phase half."""
    if n == 1:
        return np.array([1.0, 1.0]) / math.sqrt(2.0)
    # B(y) = sum_k C(n-1+k, k) y^k, roots mapped through y = (2 - z - 1/z)/4
    bcoef = [math.comb(n - 1 + k, k) for k in range(n)]
    roots_y = np.roots(list(reversed(bcoef)))
    poly = np.array([1.0 + 0j])
    for _ in range(n):
        poly = np.convolve(poly, [0.5, 0.5])
    for y in roots_y:
        b = 2.0 - 4.0 * y
        disc = np.sqrt(complex(b * b - 4.0))
        z = (b + disc) / 2.0
        if abs(z) > 1:
            z = (b - disc) / 2.0
        poly = np.convolve(poly, [-z / (1.0 - z), 1.0 / (1.0 - z)])
    g = math.sqrt(2.0) * poly.real
    return g[::-1]  # minimum-phase ordering


class TestDaubechiesFilter:
    def test_haar_is_analytically_forced(self):
        f = daubechies_filter(1)
        assert np.allclose(f.lowpass, [1 / math.sqrt(2)] * 2, atol=1e-15)

    def test_db2_matches_closed_form(self):
        s3 = math.sqrt(3.0)
        expected = np.array([1 + s3, 3 + s3, 3 - s3, 1 - s3]) / (4 * math.sqrt(2))
        assert np.allclose(daubechies_filter(2).lowpass, expected, atol=1e-14)

    @pytest.mark.parametrize("n", range(1, 11))
    def test_orthonormality(self, n):
        g = daubechies_filter(n).lowpass
        assert abs((g * g).sum() - 1.0) < 1e-12
        # shift orthogonality of the lowpass by even lags
        for lag in range(2, g.size, 2):
            assert abs((g[:-lag] * g[lag:]).sum()) < 1e-12

    @pytest.mark.parametrize("n", range(1, 11))
    def test_vanishing_moments(self, n):
        f = daubechies_filter(n)
        h = f.highpass
        k = np.arange(h.size, dtype=float)
        for m in range(n):
            # scale by the term magnitude: k**m reaches 17**9, so an absolute
            # comparison would only measure float64 roundoff
            scale = max(1.0, (np.abs(h) * k ** m).sum())
            assert abs((h * k ** m).sum()) < 1e-8 * scale

    @pytest.mark.parametrize("n", range(1, 11))
    def test_against_root_finding_construction(self, n):
        got = daubechies_filter(n).lowpass
        ref = daubechies_by_factorization(n)
        assert np.allclose(got, ref, atol=1e-8)

    @pytest.mark.parametrize("bad", [0, 11, -3])
    def test_out_of_range_rejected(self, bad):
        with pytest.raises(UnsupportedFilterError):
            daubechies_filter(bad)


def dwt1d_by_convolution(x, filt, n_octaves):
    """Direct periodic correlate-and-decimate oracle (L1-normalized)."""
    lo, hi = filt.lowpass, filt.highpass
    F = lo.size
    a = x.astype(float)
    out = []
    for j in range(1, n_octaves + 1):
        n = a.size
        det = np.empty(n // 2)
        app = np.empty(n // 2)
        for k in range(n // 2):
            seg = np.array([a[(2 * k + m) % n] for m in range(F)])
            det[k] = (hi * seg).sum()
            app[k] = (lo * seg).sum()
        out.append(det / 2.0 ** (j / 2.0))
        a = app
    return out


class TestDwt1d:
    def test_constant_signal_annihilated(self, db2):
        pyr = dwt1d(np.full(512, 3.7), db2)
        for oct_ in pyr.octaves:
            assert np.abs(oct_.bands).max() < 1e-12

    def test_ramp_annihilated_by_db2(self, db2):
        pyr = dwt1d(1.5 + 0.25 * np.arange(1024.0), db2)
        for oct_ in pyr.octaves:
            assert np.abs(oct_.bands[0, oct_.valid]).max() < 1e-10

    def test_matches_convolution_oracle(self, db2, rng):
        x = rng.standard_normal(1024)
        pyr = dwt1d(x, db2)
        oracle = dwt1d_by_convolution(x, db2, pyr.n_octaves)
        for oct_, ref in zip(pyr.octaves, oracle):
            assert np.abs(oct_.bands[0] - ref).max() < 1e-10

    def test_polynomial_annihilation_away_from_borders(self, db4, rng):
        t = np.linspace(-1, 1, 2048)
        poly = 2.0 - t + 3 * t ** 2 - 0.5 * t ** 3
        pyr = dwt1d(poly, db4)
        for oct_ in pyr.octaves:
            assert np.abs(oct_.bands[0, oct_.valid]).max() < 1e-8

    def test_octave_count_and_halving(self, db2, rng):
        pyr = dwt1d(rng.standard_normal(1024), db2, max_octaves=None)
        # the formula allows floor(log2 1024) - ceil(log2 4) = 8 octaves but
        # octave 7 would keep only 8 - 3 = 5 unmasked coefficients
        assert pyr.n_octaves == 6
        for j, oct_ in enumerate(pyr.octaves, start=1):
            assert oct_.bands.shape == (1, 1024 >> j)
            assert oct_.n_valid >= MIN_COARSE_VALID
        capped = dwt1d(rng.standard_normal(1024), db2, max_octaves=3)
        assert capped.n_octaves == 3

    def test_coarse_valid_floor_caps_depth(self, db2, rng):
        pyr = dwt1d(rng.standard_normal(2 ** 16), db2)
        assert pyr.n_octaves == 12  # octave 13 would keep < 8 valid
        assert pyr.octave(12).n_valid >= MIN_COARSE_VALID

    def test_too_short_rejected(self, db4):
        with pytest.raises(InsufficientDataError):
            dwt1d(np.zeros(15), db4)

    def test_non_finite_rejected(self, db2):
        x = np.zeros(64)
        x[10] = np.nan
        with pytest.raises(InvalidInputError):
            dwt1d(x, db2)

    def test_dilation_covariance_of_l1_convention(self, db1, rng):
        # x = repeat(u, 2) samples x(t) = u(t/2); with the L1 normalization
        # the octave-(j+1) coefficients of x equal the octave-j coefficients
        # of u with factor one (exact for Haar).
        u = rng.standard_normal(512)
        x = np.repeat(u, 2)
        pu = dwt1d(u, db1)
        px = dwt1d(x, db1)
        for j in range(1, pu.n_octaves + 1):
            assert np.abs(px.octave(j + 1).bands - pu.octave(j).bands).max() \
                < 1e-12


class TestIdwt1d:
    def test_zero_pyramid_gives_zero_signal(self, db2):
        pyr = dwt1d(np.zeros(256), db2)
        assert np.abs(idwt1d(pyr)).max() == 0.0

    def test_round_trip_white_noise(self, db2, rng):
        x = rng.standard_normal(4096)
        assert np.abs(idwt1d(dwt1d(x, db2)) - x).max() < 1e-9

    def test_round_trip_non_power_of_two(self, db2, rng):
        x = rng.standard_normal(1000)  # 2-adic valuation 3
        pyr = dwt1d(x, db2)
        assert pyr.n_octaves == 3
        assert np.abs(idwt1d(pyr) - x).max() < 1e-9

    def test_shape_mismatch_rejected(self, db2, rng):
        pyr = dwt1d(rng.standard_normal(256), db2)
        with pytest.raises(InvalidInputError):
            idwt1d(pyr, np.zeros(3))

    @pytest.mark.parametrize("j", [2, 4])
    def test_unit_coefficient_synthesizes_wavelet_atom(self, db2, j):
        # oracle: explicit upsampled filter cascade
        # atom = (up_{2^(j-1)} hi) * (up_{2^(j-2)} lo) * ... * lo, rolled to 0
        n = 512
        x = np.zeros(n)
        pyr = dwt1d(x, db2)
        k0 = 3
        pyr.octave(j).bands[0, k0] = 1.0
        sig = idwt1d(pyr)

        def upsample(f, r):
            out = np.zeros((f.size - 1) * r + 1)
            out[::r] = f
            return out

        atom = upsample(db2.highpass, 2 ** (j - 1))
        for level in range(j - 2, -1, -1):
            atom = np.convolve(atom, upsample(db2.lowpass, 2 ** level))
        ref = np.zeros(n)
        for i, v in enumerate(atom):
            ref[(2 ** j * k0 + i) % n] += v
        ref *= 2.0 ** (j / 2.0)  # stored value was L1-normalized
        assert np.abs(sig - ref).max() < 1e-10


class TestDwt2d:
    def test_constant_field_annihilated(self, db2):
        pyr = dwt2d(np.full((128, 128), 2.5), db2, max_octaves=3)
        for oct_ in pyr.octaves:
            assert np.abs(oct_.bands).max() < 1e-12

    def test_separable_product_matches_1d_tensor(self, db2, rng):
        # subband coefficients of outer(s, s) are outer products of the 1D
        # analysis outputs (oracle: one explicit correlate-decimate step)
        s = rng.standard_normal(128)
        field = np.outer(s, s)
        lo, hi = db2.lowpass, db2.highpass
        F = lo.size
        ext = np.concatenate([s, s[:F - 1]])
        win = np.lib.stride_tricks.sliding_window_view(ext, F)[::2]
        a1, d1 = win @ lo, win @ hi
        LH, HL, HH = dwt2d(field, db2, max_octaves=1).octave(1).bands * 2.0
        assert np.abs(LH - np.outer(d1, a1)).max() < 1e-10
        assert np.abs(HL - np.outer(a1, d1)).max() < 1e-10
        assert np.abs(HH - np.outer(d1, d1)).max() < 1e-10

    def test_non_square_rejected(self, db2):
        with pytest.raises(InvalidInputError):
            dwt2d(np.zeros((64, 128)), db2, max_octaves=2)

    def test_round_trip(self, db2, rng):
        f = rng.standard_normal((128, 128))
        pyr = dwt2d(f, db2, max_octaves=3)
        assert np.abs(idwt2d(pyr) - f).max() < 1e-9


@settings(max_examples=12, deadline=None)
@given(seed=st.integers(0, 2 ** 31), nv=st.integers(1, 6),
       log2n=st.integers(8, 11))
def test_perfect_reconstruction_property(seed, nv, log2n):
    rng = np.random.default_rng(seed)
    filt = daubechies_filter(nv)
    x = rng.standard_normal(2 ** log2n)
    if x.size < 2 * filt.length:
        return
    pyr = dwt1d(x, filt)
    assert np.abs(idwt1d(pyr) - x).max() < 1e-9
