"""PGM image format and metadata sidecar round trips."""

import json

import numpy as np
import pytest

from lgdiscord import NoiseModel, ccd_capture, intensity
from lgdiscord.pgm import read_ccd_image, read_pgm, sidecar_path, write_ccd_image, write_pgm


class TestPgmFormat:
    def test_round_trip_16_bit(self, tmp_path, rng):
        counts = rng.integers(0, 65536, size=(24, 24)).astype(np.uint16)
        path = tmp_path / "img.pgm"
        write_pgm(path, counts, 65535)
        back, maxval = read_pgm(path)
        assert maxval == 65535
        assert np.array_equal(back, counts)

    def test_round_trip_8_bit(self, tmp_path, rng):
        counts = rng.integers(0, 256, size=(17, 17)).astype(np.uint16)
        path = tmp_path / "img8.pgm"
        write_pgm(path, counts, 255)
        back, maxval = read_pgm(path)
        assert maxval == 255
        assert np.array_equal(back, counts)

    def test_16_bit_samples_are_big_endian(self, tmp_path):
        path = tmp_path / "be.pgm"
        write_pgm(path, np.array([[0x0102]], dtype=np.uint16), 65535)
        raw = path.read_bytes()
        header = b"P5\n1 1\n65535\n"
        assert raw.startswith(header)
        assert raw[len(header) :] == b"\x01\x02"

    def test_header_layout(self, tmp_path):
        path = tmp_path / "hdr.pgm"
        write_pgm(path, np.zeros((3, 5), dtype=np.uint16), 255)
        assert path.read_bytes().startswith(b"P5\n5 3\n255\n")

    def test_comments_in_header_skipped(self, tmp_path):
        path = tmp_path / "c.pgm"
        path.write_bytes(b"P5\n# a comment\n2 1\n255\n\x07\x09")
        counts, maxval = read_pgm(path)
        assert maxval == 255
        assert counts.tolist() == [[7, 9]]

    def test_truncated_data_rejected(self, tmp_path):
        path = tmp_path / "bad.pgm"
        path.write_bytes(b"P5\n4 4\n255\n\x00\x00")
        with pytest.raises(ValueError):
            read_pgm(path)

    def test_out_of_range_counts_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            write_pgm(tmp_path / "x.pgm", np.array([[300]], dtype=np.int64), 255)


class TestSidecar:
    def test_capture_round_trip(self, tmp_path, small_pair):
        img = ccd_capture(intensity(small_pair[0]), NoiseModel(seed=5), exposure_id=3)
        path = tmp_path / "cap.pgm"
        write_ccd_image(path, img)
        back = read_ccd_image(path)
        assert np.array_equal(back.counts, img.counts)
        assert back.grid == img.grid
        assert back.noise == img.noise
        assert back.exposure_id == 3
        assert back.saturation_fraction == img.saturation_fraction

    def test_sidecar_keys(self, tmp_path, small_pair):
        img = ccd_capture(intensity(small_pair[0]), NoiseModel(seed=5))
        path = tmp_path / "cap.pgm"
        write_ccd_image(path, img)
        meta = json.loads(sidecar_path(path).read_text())
        assert set(meta) == {
            "n",
            "half_extent",
            "waist",
            "noise",
            "exposure_id",
            "saturation_fraction",
        }
        assert meta["n"] == img.grid.n
