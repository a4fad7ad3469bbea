import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_trained_model
from qpcaclf.exceptions import FormatError, ModelIntegrityError, ParseError, VersionError
from qpcaclf.model_io import (
    RawImage,
    dumps_model,
    load_features,
    load_image,
    load_model,
    loads_model,
    model_to_dict,
    save_model,
    to_feature_vector,
    write_pgm,
)

GRID = [[0, 255], [128, 64]]


class TestLoadImage:
    def test_p2(self):
        img = load_image(b"P2 2 2 255\n0 255 128 64\n")
        np.testing.assert_array_equal(img.pixels, GRID)
        assert img.max_value == 255

    def test_p2_with_comments(self):
        img = load_image(b"P2\n# made by hand\n2 2\n# max\n255\n0 255\n128 64\n")
        np.testing.assert_array_equal(img.pixels, GRID)

    def test_p5(self):
        img = load_image(b"P5\n2 2\n255\n" + bytes([0x00, 0xFF, 0x80, 0x40]))
        np.testing.assert_array_equal(img.pixels, GRID)

    def test_p5_payload_may_start_with_whitespace_byte(self):
        # 0x0A is pixel data here, not header whitespace
        img = load_image(b"P5 2 1 255\n" + bytes([0x0A, 0x20]))
        np.testing.assert_array_equal(img.pixels, [[10, 32]])

    def test_p5_sixteen_bit(self):
        img = load_image(b"P5 2 1 1000\n" + bytes([0x03, 0xE8, 0x00, 0x01]))
        np.testing.assert_array_equal(img.pixels, [[1000, 1]])

    def test_csv(self):
        img = load_image(b"0,255\n128,64", max_value=255)
        np.testing.assert_array_equal(img.pixels, GRID)

    def test_csv_path_and_stream(self, tmp_path):
        path = tmp_path / "g.csv"
        path.write_text("0,255\n128,64\n")
        np.testing.assert_array_equal(load_image(path).pixels, GRID)
        np.testing.assert_array_equal(load_image(io.BytesIO(b"0,255\n128,64")).pixels, GRID)

    def test_truncated_p5_reports_offset(self):
        with pytest.raises(ParseError) as err:
            load_image(b"P5\n2 2\n255\n" + bytes([1, 2, 3]))
        assert err.value.offset is not None

    def test_truncated_header(self):
        with pytest.raises(ParseError) as err:
            load_image(b"P2 2")
        assert err.value.offset == 4

    def test_bad_token(self):
        with pytest.raises(ParseError) as err:
            load_image(b"P2 2 x 255\n")
        assert err.value.offset == 5

    def test_sample_exceeds_maxval(self):
        with pytest.raises(ParseError):
            load_image(b"P2 1 1 10\n11\n")

    def test_unsupported_netpbm(self):
        with pytest.raises(FormatError):
            load_image(b"P6 1 1 255\n\x00\x00\x00")

    def test_unsupported_binary(self):
        with pytest.raises(FormatError):
            load_image(b"\x89PNG\r\n\x1a\n")

    def test_ragged_csv(self):
        with pytest.raises(ParseError):
            load_image(b"1,2\n3\n")

    def test_csv_out_of_range(self):
        with pytest.raises(ParseError):
            load_image(b"1,300\n", max_value=255)

    @settings(max_examples=50)
    @given(
        st.integers(1, 6),
        st.integers(1, 6),
        st.sampled_from([1, 15, 255, 256, 65535]),
        st.booleans(),
        st.integers(0, 2**32 - 1),
    )
    def test_round_trip(self, h, w, maxval, binary, seed):
        px = np.random.default_rng(seed).integers(0, maxval + 1, (h, w))
        img = RawImage(px, maxval)
        assert load_image(write_pgm(img, binary)) == img


class TestFeatureVector:
    def test_examples(self):
        fv = to_feature_vector(RawImage(GRID, 255))
        np.testing.assert_allclose(fv.values, [0, 1, 128 / 255, 64 / 255])
        assert np.all(to_feature_vector(RawImage(np.zeros((2, 3)), 255)).values == 0)
        assert np.all(to_feature_vector(RawImage(np.full((2, 3), 7), 7)).values == 1)

    @given(st.integers(1, 65535), st.integers(0, 2**32 - 1))
    def test_in_unit_interval(self, maxval, seed):
        px = np.random.default_rng(seed).integers(0, maxval + 1, (3, 4))
        v = to_feature_vector(RawImage(px, maxval)).values
        assert np.all((0 <= v) & (v <= 1))

    def test_load_features_expands_directories(self, tmp_path):
        (tmp_path / "b.csv").write_text("1,2\n")
        (tmp_path / "a.pgm").write_bytes(b"P2 2 1 255\n3 4\n")
        (tmp_path / "notes.txt").write_text("ignored")
        fvs = load_features([tmp_path])
        assert [fv.source.rsplit("/", 1)[-1] for fv in fvs] == ["a.pgm", "b.csv"]


class TestModelFile:
    def test_round_trip_bit_exact(self, rng):
        for _ in range(20):
            model, _ = random_trained_model(rng)
            model = type(model).from_components(model.components, {"note": "x"})
            buf = io.StringIO()
            save_model(model, buf)
            loaded = loads_model(buf.getvalue())
            assert loaded == model
            assert (
                loaded.components.components.tobytes()
                == model.components.components.tobytes()
            )
            assert (
                loaded.components.singular_values.tobytes()
                == model.components.singular_values.tobytes()
            )
            assert dumps_model(loaded) == buf.getvalue()

    def test_path_round_trip(self, tmp_path, rng):
        model, _ = random_trained_model(rng)
        save_model(model, tmp_path / "m.json")
        assert load_model(tmp_path / "m.json") == model

    def _payload(self, rng):
        model, _ = random_trained_model(rng, s_max=2)
        return model_to_dict(model)

    def test_non_orthonormal_rejected(self, rng):
        payload = self._payload(rng)
        payload.update(
            n=2, s=2, k=4,
            components=[[0.6.hex(), 0.8.hex()], [0.8.hex(), 0.6.hex()]],
            singular_values=[1.0.hex(), 1.0.hex()],
        )
        with pytest.raises(ModelIntegrityError):
            loads_model(json.dumps(payload))

    def test_version_mismatch(self, rng):
        payload = self._payload(rng)
        payload["format_version"] = 999
        with pytest.raises(VersionError):
            loads_model(json.dumps(payload))

    def test_wrong_k(self, rng):
        payload = self._payload(rng)
        payload["k"] += 1
        with pytest.raises(ModelIntegrityError):
            loads_model(json.dumps(payload))

    def test_malformed(self):
        with pytest.raises(ParseError):
            loads_model("{not json")
        with pytest.raises(ParseError):
            loads_model('{"format": "something-else"}')

    def test_bad_float_payload(self, rng):
        payload = self._payload(rng)
        payload["singular_values"] = ["one"] * len(payload["singular_values"])
        with pytest.raises(ParseError):
            loads_model(json.dumps(payload))
