"""
Image / label-map I/O, instance extraction and the dataset store
"""
import numpy as np
import pytest
import tifffile
from PIL import Image

from dataset.instances import extract_instances, find_instance, render_labels
from dataset.io import load_labeled_image, load_rgb, save_labeled_image
from dataset.store import DatasetStore
from dataset.synthetic import generate_synthetic_dataset
from models.exceptions import DatasetIOError, DimensionMismatchError, UnsupportedFormatError
from models.types import LabeledImage, Transform


def _image(h=5, w=5):
    labels = np.zeros((h, w), dtype=np.uint16)
    labels[1:3, 1:3] = 1
    labels[0, 4] = 3
    pixels = np.arange(h * w * 3, dtype=np.uint8).reshape(h, w, 3)
    return LabeledImage(pixels, labels, id="tiny")


def test_png_round_trip(tmp_path, synthetic_images):
    img = synthetic_images[0]
    save_labeled_image(img, tmp_path / "a.png", tmp_path / "a_label.png")
    loaded = load_labeled_image(tmp_path / "a.png", tmp_path / "a_label.png")
    assert loaded.equals(img)
    assert loaded.id == "a"


def test_full_range_label_survives_png(tmp_path):
    img = _image()
    labels = img.labels.copy()
    labels[4, 0] = 65535
    wide = img.replace(labels=labels)
    save_labeled_image(wide, tmp_path / "w.png", tmp_path / "w_label.png")
    loaded = load_labeled_image(tmp_path / "w.png", tmp_path / "w_label.png")
    assert loaded.labels[4, 0] == 65535
    assert np.array_equal(loaded.labels, labels)


def test_tiff_input(tmp_path, synthetic_images):
    img = synthetic_images[1]
    tifffile.imwrite(tmp_path / "b.tif", img.pixels)
    tifffile.imwrite(tmp_path / "b_label.tif", img.labels)
    assert load_labeled_image(tmp_path / "b.tif", tmp_path / "b_label.tif").equals(img)


def test_dimension_mismatch(tmp_path):
    Image.fromarray(np.zeros((8, 8, 3), dtype=np.uint8)).save(tmp_path / "x.png")
    Image.fromarray(np.zeros((8, 6), dtype=np.uint16)).save(tmp_path / "x_label.png")
    with pytest.raises(DimensionMismatchError):
        load_labeled_image(tmp_path / "x.png", tmp_path / "x_label.png")


def test_missing_file(tmp_path):
    with pytest.raises(DatasetIOError):
        load_labeled_image(tmp_path / "nope.png", tmp_path / "nope_label.png")
    with pytest.raises(DatasetIOError):
        load_rgb(tmp_path / "nope.png")


def test_unsupported_modes(tmp_path):
    Image.fromarray(np.zeros((4, 4, 4), dtype=np.uint8)).save(tmp_path / "rgba.png")
    Image.fromarray(np.zeros((4, 4), dtype=np.uint16)).save(tmp_path / "rgba_label.png")
    with pytest.raises(UnsupportedFormatError):
        load_labeled_image(tmp_path / "rgba.png", tmp_path / "rgba_label.png")

    Image.fromarray(np.zeros((4, 4, 3), dtype=np.uint8)).save(tmp_path / "gray.png")
    Image.fromarray(np.zeros((4, 4), dtype=np.uint8)).save(tmp_path / "gray_label.png")
    with pytest.raises(UnsupportedFormatError):
        load_labeled_image(tmp_path / "gray.png", tmp_path / "gray_label.png")


def test_labeled_image_is_read_only():
    img = _image()
    assert not img.pixels.flags.writeable
    assert not img.labels.flags.writeable
    with pytest.raises(UnsupportedFormatError):
        LabeledImage(np.zeros((2, 2, 3), dtype=np.float32), np.zeros((2, 2), dtype=np.uint16))
    with pytest.raises(DimensionMismatchError):
        LabeledImage(np.zeros((2, 2, 3), dtype=np.uint8), np.zeros((2, 3), dtype=np.uint16))


def test_extract_instances_example():
    instances = extract_instances(_image())
    assert [i.label for i in instances] == [1, 3]
    first, second = instances
    assert first.bbox == (1, 1, 2, 2)
    assert first.area == 4
    assert first.centroid == (1.5, 1.5)
    assert second.bbox == (4, 0, 1, 1)
    assert second.area == 1
    assert first.source_id == "tiny"
    assert np.array_equal(first.pixels, _image().pixels[1:3, 1:3])


def test_disconnected_label_is_one_instance():
    labels = np.zeros((6, 6), dtype=np.uint16)
    labels[0, 0] = 2
    labels[5, 5] = 2
    img = LabeledImage(np.zeros((6, 6, 3), dtype=np.uint8), labels)
    (inst,) = extract_instances(img)
    assert inst.area == 2
    assert inst.bbox == (0, 0, 6, 6)
    assert inst.centroid == (2.5, 2.5)


def test_empty_label_map_has_no_instances():
    img = LabeledImage(np.zeros((4, 4, 3), dtype=np.uint8), np.zeros((4, 4), dtype=np.uint16))
    assert extract_instances(img) == []


def test_render_labels_rebuilds_map(synthetic_images):
    img = synthetic_images[2]
    assert np.array_equal(render_labels(extract_instances(img), img.height, img.width), img.labels)


def test_find_instance_unknown_label():
    with pytest.raises(KeyError):
        find_instance(_image(), 2)


def test_transformed_instance_keeps_area():
    inst = find_instance(_image(), 1)
    turned = inst.transformed(Transform(flip_h=True, rot90_k=1))
    assert turned.area == inst.area
    assert turned.mask.sum() == inst.area
    assert turned.transform.rot90_k == 1
    assert inst.transformed(Transform()) is inst


def test_store_pairs_and_load(tmp_path, synthetic_images):
    store = DatasetStore(tmp_path / "data")
    for img in synthetic_images[:3]:
        store.save(img)
    Image.fromarray(np.zeros((4, 4, 3), dtype=np.uint8)).save(store.root / "orphan.png")

    assert [p.stem for p in store.pairs()] == ["syn_000", "syn_001", "syn_002"]
    assert store.load("syn_001").equals(synthetic_images[1])
    assert store.check()
    with pytest.raises(DatasetIOError):
        store.load("missing")


def test_store_missing_directory(tmp_path):
    with pytest.raises(DatasetIOError):
        DatasetStore(tmp_path / "absent").pairs()


def test_synthetic_dataset_is_seeded():
    a = generate_synthetic_dataset(3, size=(48, 48), seed=5)
    b = generate_synthetic_dataset(3, size=(48, 48), seed=5)
    assert all(x.equals(y) for x, y in zip(a, b))
    assert all(len(extract_instances(img)) >= 1 for img in a)
    assert [img.id for img in a] == ["syn_000", "syn_001", "syn_002"]
