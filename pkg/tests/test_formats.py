import numpy as np
import pytest

from hierlogic import formats


def test_scores_binary_roundtrip_bit_exact(tmp_path, rng):
    path = tmp_path / "s.bin"
    data = rng.random((7, 12), dtype=np.float32)
    formats.write_scores(path, data, height=3, width=4)
    back, h, w = formats.read_scores(path)
    assert (h, w) == (3, 4)
    assert back.dtype == np.float32
    np.testing.assert_array_equal(back.view(np.uint32), data.view(np.uint32))


def test_scores_roundtrip_preserves_special_patterns(tmp_path):
    path = tmp_path / "s.bin"
    data = np.array(
        [[0.0, 1.0, np.float32(1e-45), np.float32(0.1)]], dtype=np.float32
    )
    formats.write_scores(path, data, height=1, width=4)
    back, _, _ = formats.read_scores(path)
    np.testing.assert_array_equal(back.view(np.uint32), data.view(np.uint32))


def test_labels_binary_roundtrip(tmp_path, rng):
    path = tmp_path / "l.bin"
    ids = rng.integers(0, 124, size=30, dtype=np.int64)
    formats.write_labels(path, ids, height=5, width=6)
    back, h, w = formats.read_labels(path)
    assert (h, w) == (5, 6)
    np.testing.assert_array_equal(back, ids)


def test_score_header_checks(tmp_path, rng):
    path = tmp_path / "s.bin"
    data = rng.random((4, 6), dtype=np.float32)
    formats.write_scores(path, data, height=2, width=3)
    raw = path.read_bytes()

    bad_magic = tmp_path / "bad_magic.bin"
    bad_magic.write_bytes(b"XXXX" + raw[4:])
    with pytest.raises(formats.FormatError, match="magic"):
        formats.read_scores(bad_magic)

    truncated = tmp_path / "trunc.bin"
    truncated.write_bytes(raw[:-5])
    with pytest.raises(formats.FormatError):
        formats.read_scores(truncated)


def test_label_magic_check(tmp_path):
    path = tmp_path / "l.bin"
    formats.write_labels(path, np.array([0, 1]), height=1, width=2)
    raw = path.read_bytes()
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"LSG1" + raw[4:])
    with pytest.raises(formats.FormatError):
        formats.read_labels(bad)


def test_pixel_count_mismatch_rejected(tmp_path, rng):
    with pytest.raises(ValueError):
        formats.write_scores(tmp_path / "x.bin", rng.random((4, 5)), height=2, width=3)
    with pytest.raises(ValueError):
        formats.write_labels(tmp_path / "y.bin", np.arange(5), height=2, width=3)


def test_scores_csv_roundtrip(tmp_path):
    path = tmp_path / "s.csv"
    data = np.array([[0.1, 0.2], [0.3, 0.4], [1.0 / 3.0, 1e-9]])
    formats.write_scores_csv(path, data)
    back, h, w = formats.read_scores_csv(path)
    assert (h, w) == (1, 2)
    np.testing.assert_array_equal(back, data)  # %.17g is float64-exact


def test_labels_csv_roundtrip(tmp_path):
    path = tmp_path / "l.csv"
    formats.write_labels_csv(path, np.array([5, 0, 99]))
    back, h, w = formats.read_labels_csv(path)
    assert (h, w) == (1, 3)
    np.testing.assert_array_equal(back, [5, 0, 99])


def test_dispatchers(tmp_path, rng):
    data = rng.random((3, 4)).astype(np.float32)
    ids = np.array([0, 2, 1, 0])
    for fmt, s_name, l_name in (("binary", "s.bin", "l.bin"), ("csv", "s.csv", "l.csv")):
        sp, lp = tmp_path / s_name, tmp_path / l_name
        formats.save_scores(sp, data, 2, 2, fmt)
        formats.save_labels(lp, ids, 2, 2, fmt)
        sback, _, _ = formats.load_scores(sp, fmt)
        lback, _, _ = formats.load_labels(lp, fmt)
        np.testing.assert_allclose(np.asarray(sback, dtype=np.float64), data, atol=1e-7)
        np.testing.assert_array_equal(lback, ids)
    with pytest.raises(ValueError):
        formats.save_scores(tmp_path / "z", data, 2, 2, "parquet")
