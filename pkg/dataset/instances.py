"""
Per-instance extraction from a label map
"""
from __future__ import annotations

from typing import List, Sequence

import numpy as np
from scipy import ndimage

from models.types import Instance, LabeledImage


def extract_instances(img: LabeledImage) -> List[Instance]:
    """One Instance per distinct nonzero label id, ordered by id.

    A label with several disconnected components stays one instance.
    """
    labels = img.labels
    if not labels.any():
        return []
    instances = []
    for index, sl in enumerate(ndimage.find_objects(labels)):
        if sl is None:
            continue
        label = index + 1
        mask = labels[sl] == label
        ys, xs = np.nonzero(mask)
        y0, x0 = sl[0].start, sl[1].start
        instances.append(
            Instance(
                mask=mask,
                bbox=(int(x0), int(y0), int(mask.shape[1]), int(mask.shape[0])),
                centroid=(x0 + float(xs.mean()), y0 + float(ys.mean())),
                area=int(xs.size),
                pixels=img.pixels[sl],
                source_id=img.id,
                label=label,
            )
        )
    return instances


def find_instance(img: LabeledImage, label: int) -> Instance:
    """Extract a single instance by id"""
    for inst in extract_instances(img):
        if inst.label == label:
            return inst
    raise KeyError(f"label {label} not present in {img.id}")


def render_labels(instances: Sequence[Instance], height: int, width: int) -> np.ndarray:
    """Rebuild a label map from untransformed instances"""
    labels = np.zeros((height, width), dtype=np.uint16)
    for inst in instances:
        x, y, w, h = inst.bbox
        view = labels[y:y + h, x:x + w]
        view[inst.mask] = inst.label
    return labels
