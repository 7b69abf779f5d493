import numpy as np
import pytest
from PIL import Image

from tensorcur.media import (
    MaskSpec,
    load_media,
    make_mask,
    parse_lines,
    reshape_cm,
    save_mask,
    save_media,
    synth,
)
from tensorcur.tensor import unfold


def test_png_roundtrip(tmp_path, rng):
    for shape in [(9, 7, 3), (6, 5)]:
        x = rng.integers(0, 256, shape).astype(float)
        p = tmp_path / f"x{len(shape)}.png"
        save_media(x, p)
        np.testing.assert_array_equal(load_media(p), x)


def test_white_pixel(tmp_path):
    p = tmp_path / "w.png"
    Image.new("L", (1, 1), 255).save(p)
    assert load_media(p).tolist() == [[255.0]]


def test_save_clamps_and_rounds(tmp_path):
    p = tmp_path / "c.png"
    save_media(np.array([[-3.0, 12.5, 12.49, 300.0]]), p)
    assert load_media(p).tolist() == [[0.0, 12.0, 12.0, 255.0]]


def test_frame_directory_order(tmp_path, rng):
    frames = [rng.integers(0, 256, (4, 5)).astype(np.uint8) for _ in range(3)]
    # write out of order with zero padding; loading must sort by number
    for k in (2, 0, 1):
        Image.fromarray(frames[k]).save(tmp_path / f"f{k + 1:03d}.png")
    v = load_media(tmp_path)
    assert v.shape == (4, 5, 3)
    for k in range(3):
        np.testing.assert_array_equal(v[:, :, k], frames[k])


def test_video_save_roundtrip(tmp_path, rng):
    v = rng.integers(0, 256, (4, 5, 3, 2)).astype(float)
    save_media(v, tmp_path / "vid", video=True)
    np.testing.assert_array_equal(load_media(tmp_path / "vid"), v)


def test_media_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_media(tmp_path / "missing.png")
    bad = tmp_path / "bad.png"
    bad.write_bytes(b"not an image")
    with pytest.raises(ValueError):
        load_media(bad)
    d = tmp_path / "mixed"
    d.mkdir()
    Image.new("L", (4, 4)).save(d / "1.png")
    Image.new("L", (5, 4)).save(d / "2.png")
    with pytest.raises(ValueError):
        load_media(d)


def test_npy_roundtrip(tmp_path, rng):
    x = rng.standard_normal((3, 4, 5))
    save_media(x, tmp_path / "x.npy")
    np.testing.assert_array_equal(load_media(tmp_path / "x.npy"), x)


def test_random_mask_counts():
    assert make_mask((4, 4, 2), MaskSpec("random", 0.0)).all()
    m = make_mask((10, 10, 1), MaskSpec("random", 0.5, seed=3))
    assert np.count_nonzero(~m) == 50
    m2 = make_mask((10, 10, 1), MaskSpec("random", 0.5, seed=3))
    np.testing.assert_array_equal(m, m2)
    m = make_mask((7, 9, 3), MaskSpec("random", 0.37, seed=1))
    assert np.count_nonzero(~m) == round(0.37 * 189)


def test_column_row_grid_masks():
    m = make_mask((8, 8, 3), MaskSpec("columns", columns="3,4,5"))
    missing = np.argwhere(~m)
    assert len(missing) == 72 and set(missing[:, 1]) == {3, 4, 5}
    m = make_mask((8, 8, 3), MaskSpec("rows", rows=[0, 7]))
    assert np.count_nonzero(~m) == 2 * 8 * 3 and not m[7].any()
    g = make_mask((8, 8, 3), MaskSpec("grid", columns="1", rows="2"))
    assert np.count_nonzero(~g) == (8 + 8 - 1) * 3


def test_parse_lines():
    assert parse_lines("3,4,5", 8).tolist() == [3, 4, 5]
    assert parse_lines("2-4,7", 8).tolist() == [2, 3, 4, 7]
    assert parse_lines("every:2:5", 12).tolist() == [0, 1, 5, 6, 10, 11]
    assert parse_lines("every:1:4:2", 10).tolist() == [2, 6]
    with pytest.raises(ValueError):
        parse_lines("9", 8)
    with pytest.raises(ValueError):
        parse_lines("every:5:2", 8)


def test_file_mask_roundtrip(tmp_path):
    m = make_mask((6, 5, 3), MaskSpec("columns", columns=[1]))
    p = tmp_path / "m.png"
    save_mask(m, p)
    raw = np.asarray(Image.open(p))
    assert set(np.unique(raw).tolist()) == {0, 255}
    np.testing.assert_array_equal(make_mask((6, 5, 3), MaskSpec("file", path=str(p))), m)
    with pytest.raises(ValueError):
        make_mask((6, 6, 3), MaskSpec("file", path=str(p)))


def test_mask_errors():
    with pytest.raises(ValueError):
        make_mask((4, 4), MaskSpec("columns", columns="0-3"))
    with pytest.raises(ValueError):
        MaskSpec("random", 1.0)
    with pytest.raises(ValueError):
        MaskSpec("stripes")
    with pytest.raises(ValueError):
        make_mask((4, 4), MaskSpec("columns"))


def test_synth_ranks():
    x = synth((8, 9, 7), (2, 2, 2), seed=5)
    for n in range(3):
        s = np.linalg.svd(unfold(x, n), compute_uv=False)
        assert s[2] / s[0] < 1e-12
    full = synth((4, 3, 5), (4, 3, 5), seed=1)
    for n in range(3):
        assert np.linalg.matrix_rank(unfold(full, n)) == full.shape[n]
    np.testing.assert_array_equal(synth((5, 5, 5), (2, 3, 2), 0.1, 9),
                                  synth((5, 5, 5), (2, 3, 2), 0.1, 9))


def test_synth_tubal():
    x = synth((6, 5, 4), (2,), kind="tubal", seed=2)
    for s in np.moveaxis(np.fft.fft(x, axis=2), 2, 0):
        assert np.linalg.matrix_rank(s, tol=1e-9 * np.abs(s).max()) == 2
    with pytest.raises(ValueError):
        synth((6, 5, 4), (6,), kind="tubal")
    with pytest.raises(ValueError):
        synth((3, 3), (4, 1))


def test_reshape_column_major(rng):
    x = rng.standard_normal((8, 6, 3))
    y = reshape_cm(x, (4, 12, 3))
    np.testing.assert_array_equal(y.ravel(order="F"), x.ravel(order="F"))
    np.testing.assert_array_equal(reshape_cm(y, x.shape), x)
    with pytest.raises(ValueError):
        reshape_cm(x, (5, 5))
