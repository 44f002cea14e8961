# Licensed under the Apache License, Version 2.0 (the "License"); you may
# not use this file except in compliance with the License. You may obtain
# a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
# WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
# License for the specific language governing permissions and limitations
# under the License.

"""Image files: PNG through Pillow for u8 images, float32 ``.npy`` for the
lossless channel.
"""

import logging
import os

import numpy as np
from PIL import Image

from gsflow import exceptions
from gsflow.flow.model import to_model_domain
from gsflow.flow.model import to_pixels
from gsflow import utils

LOG = logging.getLogger(__name__)


def _single(image, op='save_image'):
    image = np.asarray(image, dtype=np.float32)
    if image.ndim == 4:
        if image.shape[0] != 1:
            raise exceptions.ShapeError(op, image.shape)
        image = image[0]
    if image.ndim != 3 or image.shape[-1] != 3:
        raise exceptions.ShapeError(op, image.shape)
    return image


def save_image(path, image):
    """Save one model-domain image; the extension picks the format."""
    image = _single(image)
    with utils.atomic_open(path, 'wb') as handle:
        if path.endswith('.npy'):
            np.save(handle, image)
        else:
            pixels = np.rint(np.clip(to_pixels(image), 0, 255))
            Image.fromarray(pixels.astype(np.uint8), 'RGB').save(
                handle, format='PNG')
    LOG.info("Saved image to %s", path)


def load_image(path):
    """Load an image file as a (1, H, W, 3) model-domain array."""
    if not os.path.exists(path):
        raise exceptions.ConfigError("image %s does not exist" % path)
    try:
        if path.endswith('.npy'):
            image = np.load(path).astype(np.float32)
        else:
            with Image.open(path) as handle:
                image = to_model_domain(np.asarray(handle.convert('RGB')))
    except (OSError, ValueError) as exc:
        raise exceptions.DatasetError("cannot read image %s: %s"
                                      % (path, exc))
    return _single(image, 'load_image')[np.newaxis]
