"""
Dataset access: image / label-map I/O, instance extraction, synthetic data
"""
from dataset.instances import extract_instances
from dataset.io import load_labeled_image, save_labeled_image
from dataset.store import DatasetStore

__all__ = ["extract_instances", "load_labeled_image", "save_labeled_image", "DatasetStore"]
