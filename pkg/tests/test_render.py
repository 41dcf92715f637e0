import gzip
from pathlib import Path

import numpy as np
import pytest

from torusrot.cli import main
from torusrot.classify import LabelGrid
from torusrot.core import MZLift
from torusrot.engine import GridSpec
from torusrot.render import (
    PRESETS,
    PortraitImage,
    decode_pnm,
    encode_pnm,
    label_image,
    parse_size,
    portrait,
    preset_config,
)
from torusrot.rotation import ClassificationLabel

GOLDEN = Path(__file__).parent / "golden"


@pytest.mark.parametrize("preset", sorted(PRESETS))
def test_preset_matches_golden(preset, tmp_path, update_golden):
    out = tmp_path / "img.pgm"
    assert main(["portrait", "--preset", preset, "--out", str(out)]) == 0
    data = out.read_bytes()
    ref = GOLDEN / f"{preset}.pgm.gz"
    if update_golden or not ref.exists():
        ref.write_bytes(gzip.compress(data, mtime=0))
        pytest.skip("golden image written")
    assert data == gzip.decompress(ref.read_bytes())


def test_sea_and_islands_structure():
    img = decode_pnm(gzip.decompress((GOLDEN / "sea-and-islands.pgm.gz").read_bytes()))
    h, w = img.shape
    assert (h, w) == (800, 800)
    dark = img < 200
    # the chaotic sea fills most of the picture
    assert dark.mean() > 0.5
    # island cores around (1/4, 1/4) are visibly lighter than the sea near (0.1, 0.6)
    def patch(x, y, r=8):
        i, j = int((1 - y) * h), int(x * w)
        return img[i - r:i + r, j - r:j + r].mean()

    assert patch(0.25, 0.25, 4) > patch(0.1, 0.6)


def test_portrait_counts_and_orientation():
    F = MZLift(0.0, 0.0)  # identity: every start stays on its pixel
    img = portrait(F, np.array([[0.15, 0.85]]), iterates=10, burn_in=2, width=10, height=10)
    assert img.counts.sum() == 8
    assert img.counts[1, 1] == 8  # y near 1 is the top row
    g = img.gray()
    assert g[1, 1] == 0 and g[0, 0] == 255


def test_portrait_argument_checks():
    F = MZLift(0.5, 0.5)
    with pytest.raises(ValueError):
        portrait(F, np.zeros((1, 2)), 10, 10)
    with pytest.raises(ValueError):
        portrait(F, np.zeros((1, 2)), 10, 0, width=0)


def test_gray_levels_follow_gamma():
    counts = np.array([[0, 1, 4, 100]])
    g = PortraitImage(counts).gray()
    assert g[0, 0] == 255 and g[0, 3] == 0
    assert g[0, 1] > g[0, 2]
    assert np.all(PortraitImage(np.zeros((2, 2), int)).gray() == 255)


def test_pnm_round_trip():
    rng = np.random.default_rng(0)
    gray = rng.integers(0, 256, size=(7, 5), dtype=np.uint8)
    rgb = rng.integers(0, 256, size=(3, 4, 3), dtype=np.uint8)
    assert np.array_equal(decode_pnm(encode_pnm(gray)), gray)
    assert np.array_equal(decode_pnm(encode_pnm(rgb)), rgb)
    assert encode_pnm(gray).startswith(b"P5\n5 7\n255\n")
    with pytest.raises(ValueError):
        decode_pnm(b"P3\n1 1\n255\n0 0 0")
    with pytest.raises(ValueError):
        decode_pnm(encode_pnm(gray)[:-1])


def test_label_image_colours():
    g = GridSpec(2, 1)
    labels = LabelGrid(g, [ClassificationLabel("elliptic", 0.0, 0.0, (0.0, 0.0), (1, 2)),
                           ClassificationLabel("chaotic", 0.3, 0.02, None, (1, 2))])
    img = label_image(labels, cell_px=3)
    assert img.shape == (3, 6, 3)
    assert tuple(img[0, 0]) != tuple(img[0, 5])
    assert tuple(img[0, 5]) == (200, 200, 200)


def test_size_and_preset_helpers():
    assert parse_size("640x480") == (640, 480)
    assert parse_size("300") == (300, 300)
    with pytest.raises(ValueError):
        parse_size("0x10")
    assert preset_config("island-rings")["iterates"] == 20000
    with pytest.raises(ValueError):
        preset_config("nope")
