"""Tests for pixmap, key=value and JSON-lines helpers."""

import numpy as np
import pytest

from bibkit.core.exceptions import ConfigurationError, ValidationError
from bibkit.core.models import DistributionRecord
from bibkit.core.storage import (
    labels_to_rgb,
    parse_key_values,
    read_jsonl,
    read_key_values,
    read_pixmap,
    rgb_to_labels,
    write_jsonl,
    write_key_values,
    write_mask,
    write_pixmap,
)


def test_label_colors_survive_a_pixmap(tmp_path):
    labels = np.array([[0, 1, -1], [2, 2, 0]])
    path = write_pixmap(tmp_path / "labels.ppm", labels_to_rgb(labels))
    assert path.read_bytes().startswith(b"P6")
    assert np.array_equal(rgb_to_labels(read_pixmap(path)), labels)


def test_image_orientation():
    labels = np.zeros((4, 3), dtype=np.int64)
    labels[0, 2] = 1
    rgb = labels_to_rgb(labels)
    assert rgb.shape == (3, 4, 3)
    # top-left pixel is the smallest real part and the largest imaginary part
    assert tuple(rgb[0, 0]) != tuple(rgb[0, 1])


def test_unknown_colors_are_rejected():
    image = np.full((2, 2, 3), 7, dtype=np.uint8)
    with pytest.raises(ValidationError):
        rgb_to_labels(image)


def test_mask_is_black_and_white(tmp_path):
    mask = np.eye(4, dtype=bool)
    image = read_pixmap(write_mask(tmp_path / "mask.ppm", mask))
    assert set(np.unique(image).tolist()) == {0, 255}


def test_unreadable_pixmap(tmp_path):
    path = tmp_path / "broken.ppm"
    path.write_bytes(b"not an image")
    with pytest.raises(ConfigurationError):
        read_pixmap(path)


def test_key_values(tmp_path):
    text = "# comment\n a = 1 \n\nb=two # trailing\nc = x=y\n"
    assert parse_key_values(text) == {"a": "1", "b": "two", "c": "x=y"}
    with pytest.raises(ConfigurationError):
        parse_key_values("no separator")
    path = write_key_values(tmp_path / "meta" / "kv.meta", {"k": 3, "v": "w"})
    assert read_key_values(path) == {"k": "3", "v": "w"}


def test_jsonl_accepts_models_and_dicts(tmp_path):
    path = tmp_path / "records.jsonl"
    write_jsonl(path, [DistributionRecord(labels=["a"], probs=[1.0]), {"extra": 1}])
    write_jsonl(path, [{"more": True}], append=True)
    records = read_jsonl(path)
    assert records == [{"labels": ["a"], "probs": [1.0]}, {"extra": 1}, {"more": True}]


def test_jsonl_errors(tmp_path):
    with pytest.raises(ConfigurationError):
        read_jsonl(tmp_path / "absent.jsonl")
    path = tmp_path / "bad.jsonl"
    path.write_text('{"ok": 1}\n{broken\n')
    with pytest.raises(ConfigurationError):
        read_jsonl(path)
