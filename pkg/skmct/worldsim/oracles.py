# -*- coding: utf-8 -*-
# SPDX-License-Identifier: BSD-3-Clause

from __future__ import annotations
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_random_state

from ..geometry import BBox
from ..utils.check import check_positive, check_positive_int, check_probability, check_unit_vector
from ..utils.seeding import derive_random_state
from .frames import CameraFrame

__all__ = ['Detection',
           'DetectionOracle',
           'IdentificationOracle',
           'detect',
           'extract_id_feature',
           'similarity',
           ]


@dataclass(frozen=True)
class Detection:
    """ Output of the detection oracle.

    `crop_id` references the image crop of the detection. It is consumed by
    the identification oracle only, the tracking logic treats it as opaque.
    """
    box: BBox
    label: str
    crop_id: str
    camera_id: str
    frame_index: int


class DetectionOracle(BaseEstimator):
    """ Noisy object detector derived from ground-truth annotations.

    Parameters
    ----------
    jitter_sigma: float, default = 0
        Standard deviation of the Gaussian noise added to each box coordinate, pixels.

    miss_prob: float, default = 0
        Probability to drop a visible object.

    occlusion_threshold: float, default = 0.5
        Objects with a visibility fraction below this threshold are never detected.

    label_confusion: float, default = 0
        Probability to report another class label.

    labels: tuple of str
        Class labels the detector can confuse.

    seed: int, default = 0
        Global seed. Each (camera, frame) gets its own random stream.

    Attributes
    ----------
    n_calls_: int
        Number of detector invocations so far.
    """

    def __init__(self, jitter_sigma: float = 0., miss_prob: float = 0., occlusion_threshold: float = 0.5,
                 label_confusion: float = 0., labels: Sequence[str] = ('car', 'person'), seed: int = 0):
        self.jitter_sigma = jitter_sigma
        self.miss_prob = miss_prob
        self.occlusion_threshold = occlusion_threshold
        self.label_confusion = label_confusion
        self.labels = labels
        self.seed = seed
        self.n_calls_ = 0

    def _check_params(self):
        if self.jitter_sigma < 0:
            raise ValueError(f'jitter_sigma must be non-negative. Got {self.jitter_sigma}')
        check_probability(self.miss_prob, 'miss_prob')
        check_probability(self.occlusion_threshold, 'occlusion_threshold')
        check_probability(self.label_confusion, 'label_confusion')

    def detect(self, frame: CameraFrame, random_state=None) -> List[Detection]:
        """ Detect objects in a frame.

        Parameters
        ----------
        frame: CameraFrame
            Frame with ground-truth annotations attached.

        random_state: int, RandomState instance or None, optional
            Overrides the per-frame stream derived from `seed`.

        Returns
        -------
        list of Detection
            In object order of the annotations.
        """
        self._check_params()
        self.n_calls_ += 1
        if random_state is None:
            random_state = derive_random_state(self.seed, frame.camera_id, frame.frame_index, 'detect')
        else:
            random_state = check_random_state(random_state)
        labels = list(self.labels)
        detections = []
        for annotation in frame.annotations:
            # Fixed number of draws per annotation, so that the stream does not
            # depend on which objects are dropped
            u_miss = random_state.uniform()
            noise = random_state.normal(size=4)
            u_confusion = random_state.uniform()
            alternative = random_state.randint(max(len(labels) - 1, 1))

            if annotation.visibility < self.occlusion_threshold or u_miss < self.miss_prob:
                continue
            box = self._jitter(annotation.box, noise, frame)
            if box is None:
                continue
            label = annotation.label
            if u_confusion < self.label_confusion and label in labels and len(labels) > 1:
                others = [lab for lab in labels if lab != label]
                label = others[alternative % len(others)]
            detections.append(Detection(box=box, label=label, crop_id=annotation.object_id,
                                        camera_id=frame.camera_id, frame_index=frame.frame_index))
        return detections

    def _jitter(self, box: BBox, noise: np.ndarray, frame: CameraFrame):
        if self.jitter_sigma == 0:
            return box
        coords = box.to_array() + self.jitter_sigma * noise
        x_min, x_max = np.sort(coords[[0, 2]])
        y_min, y_max = np.sort(coords[[1, 3]])
        # At least one pixel wide and high
        x_max, y_max = max(x_max, x_min + 1.), max(y_max, y_min + 1.)
        return BBox(x_min, y_min, x_max, y_max).clip(frame.geometry.width, frame.geometry.height)


class IdentificationOracle(BaseEstimator):
    """ Synthetic re-identification model.

    Every object has a hidden unit-norm ground embedding derived from its id
    and the seed. A feature is the ground embedding plus isotropic Gaussian
    noise, renormalized. Noise grows for small crops.

    Parameters
    ----------
    dim: int, default = 64
        Feature dimension.

    sigma_base: float, default = 0
        Noise level at `reference_area`.

    reference_area: float, default = 6400
        Box area (pixels^2) at which the noise level equals `sigma_base`.

    exponent: float, default = 0.5
        Noise growth for smaller boxes,
        ``sigma = sigma_base * (reference_area / area) ** exponent``.

    seed: int, default = 0

    Attributes
    ----------
    n_calls_: int
        Number of identification operations (one per crop) so far.
    """

    def __init__(self, dim: int = 64, sigma_base: float = 0., reference_area: float = 6400.,
                 exponent: float = 0.5, seed: int = 0):
        self.dim = dim
        self.sigma_base = sigma_base
        self.reference_area = reference_area
        self.exponent = exponent
        self.seed = seed
        self.n_calls_ = 0
        self._embeddings = {}

    def _check_params(self):
        check_positive_int(self.dim, 'dim')
        check_positive(self.reference_area, 'reference_area')
        if self.sigma_base < 0:
            raise ValueError(f'sigma_base must be non-negative. Got {self.sigma_base}')

    def ground_embedding(self, object_id) -> np.ndarray:
        """ Hidden unit-norm embedding of an object, stable for (seed, object id). """
        key = str(object_id)
        embedding = self._embeddings.get(key)
        if embedding is None:
            self._check_params()
            vector = derive_random_state(self.seed, key, 'embedding').normal(size=self.dim)
            embedding = vector / np.linalg.norm(vector)
            embedding.setflags(write=False)
            self._embeddings[key] = embedding
        return embedding

    def noise_sigma(self, box: BBox) -> float:
        return self.sigma_base * (self.reference_area / box.area) ** self.exponent

    def extract(self, crop_id, box: BBox, camera_id: str = '', frame_index: int = 0,
                random_state=None) -> np.ndarray:
        """ Identification feature of one crop.

        Returns
        -------
        np.ndarray, shape (dim, )
            Unit-norm feature vector.
        """
        self.n_calls_ += 1
        embedding = self.ground_embedding(crop_id)
        sigma = self.noise_sigma(box)
        if sigma == 0:
            return embedding.copy()
        if random_state is None:
            random_state = derive_random_state(self.seed, camera_id, frame_index, crop_id, 'identify')
        else:
            random_state = check_random_state(random_state)
        vector = embedding + random_state.normal(scale=sigma, size=self.dim)
        return vector / np.linalg.norm(vector)

    def extract_batch(self, detections: Sequence[Detection]) -> np.ndarray:
        """ Features of a batch of detections, shape (n_detections, dim). """
        if len(detections) == 0:
            return np.empty((0, self.dim))
        return np.vstack([self.extract(d.crop_id, d.box, d.camera_id, d.frame_index) for d in detections])


def detect(frame: CameraFrame, oracle: DetectionOracle, random_state=None) -> List[Detection]:
    """ Run the detection oracle on a frame. See :meth:`DetectionOracle.detect`. """
    return oracle.detect(frame, random_state=random_state)


def extract_id_feature(crop_id, box: BBox, oracle: IdentificationOracle, random_state=None) -> np.ndarray:
    """ Run the identification oracle on a crop. See :meth:`IdentificationOracle.extract`. """
    return oracle.extract(crop_id, box, random_state=random_state)


def similarity(a, b) -> float:
    """ Cosine similarity of two unit-normalized features. """
    a = check_unit_vector(a, 'first feature')
    b = check_unit_vector(b, 'second feature')
    if a.shape != b.shape:
        raise ValueError(f'Features differ in dimension: {a.shape} vs. {b.shape}')
    return float(np.clip(np.dot(a, b), -1., 1.))
