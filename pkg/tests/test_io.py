"""Serialization round trips for signals, fields and pyramids."""

import math

import numpy as np
import pytest

from pleaders import InvalidInputError, compute_p_leaders, dwt1d, dwt2d
from pleaders.io import load_pyramid, read_signal, save_pyramid, write_signal


class TestSignalIO:
    def test_csv_round_trip(self, tmp_path, rng):
        x = rng.standard_normal(256)
        path = write_signal(x, tmp_path / "sig.csv")
        assert np.allclose(read_signal(path), x, atol=1e-15)

    def test_binary_round_trip_1d(self, tmp_path, rng):
        x = rng.standard_normal(512)
        path = write_signal(x, tmp_path / "sig.bin", sidecar={"seed": 3})
        got = read_signal(path)
        assert np.array_equal(got, x)
        # header is readable through any of the three suffixes
        assert np.array_equal(read_signal(path.with_suffix(".json")), x)

    def test_binary_round_trip_2d(self, tmp_path, rng):
        f = rng.standard_normal((64, 64))
        path = write_signal(f, tmp_path / "field.bin")
        got = read_signal(path)
        assert got.shape == (64, 64)
        assert np.array_equal(got, f)

    def test_missing_header_rejected(self, tmp_path):
        binpath = tmp_path / "orphan.bin"
        np.zeros(8).tofile(binpath)
        with pytest.raises(InvalidInputError):
            read_signal(binpath)

    def test_length_mismatch_rejected(self, tmp_path, rng):
        path = write_signal(rng.standard_normal(64), tmp_path / "sig.bin")
        np.zeros(32).astype("<f8").tofile(path)
        with pytest.raises(InvalidInputError):
            read_signal(path)


class TestPyramidIO:
    def test_coefficient_pyramid_round_trip(self, tmp_path, db2, rng):
        pyr = dwt1d(rng.standard_normal(512), db2)
        save_pyramid(pyr, tmp_path / "pyr")
        got = load_pyramid(tmp_path / "pyr")
        assert got.dim == 1 and got.n_samples == 512
        assert got.filter.name == "db2"
        assert np.array_equal(got.approx, pyr.approx)
        for j in range(1, pyr.n_octaves + 1):
            assert np.array_equal(got.octave(j).bands, pyr.octave(j).bands)
            assert np.array_equal(got.octave(j).valid, pyr.octave(j).valid)

    def test_2d_pyramid_round_trip(self, tmp_path, db2, rng):
        pyr = dwt2d(rng.standard_normal((64, 64)), db2, max_octaves=3)
        save_pyramid(pyr, tmp_path / "pyr2d")
        got = load_pyramid(tmp_path / "pyr2d")
        for j in range(1, 4):
            assert np.array_equal(got.octave(j).bands, pyr.octave(j).bands)

    @pytest.mark.parametrize("p", [0.5, math.inf])
    def test_leader_pyramid_round_trip_encodes_p(self, tmp_path, db2, rng, p):
        lead = compute_p_leaders(dwt1d(rng.standard_normal(512), db2), p)
        save_pyramid(lead, tmp_path / "lead")
        import json
        index = json.loads((tmp_path / "lead" / "index.json").read_text())
        assert index["p"] == ("inf" if math.isinf(p) else p)
        got = load_pyramid(tmp_path / "lead")
        assert got.p == p and got.mode == "full"
        for j in range(1, lead.n_octaves + 1):
            assert np.array_equal(got.octave(j).values, lead.octave(j).values)
            assert np.array_equal(got.octave(j).valid, lead.octave(j).valid)
