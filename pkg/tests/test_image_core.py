import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lqpat import DimensionError, GrayImage, read_image, to_grayscale, window4, write_pgm
from lqpat.image_core import ImageDecodeError, window_origins


@pytest.mark.parametrize("rgb, expected", [
    ((0, 0, 0), 0),
    ((255, 255, 255), 255),
    ((100, 100, 100), 100),
])
def test_to_grayscale_examples(rgb, expected):
    img = to_grayscale(np.array([[rgb]]))
    assert img.data[0, 0] == expected


def test_to_grayscale_weights_and_shape():
    rgb = np.zeros((2, 3, 3), dtype=np.uint8)
    rgb[0, 0] = (255, 0, 0)
    rgb[0, 1] = (0, 255, 0)
    rgb[0, 2] = (0, 0, 255)
    img = to_grayscale(rgb)
    assert img.shape == (2, 3)
    # 76.245, 149.685, 29.07
    assert img.data[0].tolist() == [76, 150, 29]


@given(st.integers(0, 255))
def test_to_grayscale_fixed_point_on_gray(v):
    assert to_grayscale(np.full((1, 1, 3), v)).data[0, 0] == v


def test_to_grayscale_rejects_empty():
    with pytest.raises(DimensionError):
        to_grayscale(np.zeros((0, 4, 3)))


def test_grayimage_validation():
    with pytest.raises(ValueError):
        GrayImage(np.array([[0, 256]]))
    with pytest.raises(DimensionError):
        GrayImage(np.zeros(5))
    img = GrayImage([[1, 2], [3, 4]])
    assert (img.width, img.height) == (2, 2)
    with pytest.raises(ValueError):
        img.data[0, 0] = 9


def test_window4_whole_image():
    arr = np.arange(16).reshape(4, 4)
    assert window4(GrayImage(arr), 1, 1).tolist() == list(range(16))


def test_window4_bounds():
    img = GrayImage(np.zeros((6, 8)))
    window4(img, 3, 5)
    with pytest.raises(IndexError, match="M-3"):
        window4(img, 4, 1)
    with pytest.raises(IndexError, match="N-3"):
        window4(img, 1, 6)
    with pytest.raises(IndexError):
        window4(img, 0, 1)


@pytest.mark.parametrize("shape, count", [((4, 4), 1), ((5, 5), 4), ((6, 8), 15)])
def test_window_origin_count(shape, count):
    # brute-force count of in-range origins
    m, n = shape
    brute = sum(1 for i in range(1, m + 1) for j in range(1, n + 1) if i + 3 <= m and j + 3 <= n)
    assert brute == count
    assert len(window_origins(shape)) == count == (m - 3) * (n - 3)


def test_window4_never_reads_outside():
    for m in range(4, 8):
        for n in range(4, 8):
            arr = np.arange(m * n).reshape(m, n) % 256
            img = GrayImage(arr)
            for i, j in window_origins((m, n)):
                block = window4(img, i, j).reshape(4, 4)
                assert np.array_equal(block, arr[i - 1:i + 3, j - 1:j + 3])


def test_pgm_roundtrip(tmp_path, rng):
    img = GrayImage(rng.integers(0, 256, (7, 9)))
    path = tmp_path / "x.pgm"
    write_pgm(img, path)
    raw = path.read_bytes()
    assert raw.startswith(b"P5")
    assert read_image(path) == img


def test_read_handwritten_pgm(tmp_path):
    path = tmp_path / "h.pgm"
    path.write_bytes(b"P5 3 2 255\n" + bytes([0, 1, 2, 250, 251, 252]))
    assert read_image(path).data.tolist() == [[0, 1, 2], [250, 251, 252]]


def test_read_color_png(tmp_path):
    from PIL import Image
    Image.fromarray(np.full((5, 6, 3), 100, dtype=np.uint8)).save(tmp_path / "c.png")
    img = read_image(tmp_path / "c.png")
    assert img.shape == (5, 6) and np.all(img.data == 100)


def test_read_corrupt(tmp_path):
    path = tmp_path / "bad.png"
    path.write_bytes(b"not an image")
    with pytest.raises(ImageDecodeError):
        read_image(path)
