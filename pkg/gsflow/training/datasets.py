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

import logging
import os

import numpy as np
from PIL import Image
from scipy import ndimage

from gsflow import exceptions

LOG = logging.getLogger(__name__)

LOSSLESS_EXTENSIONS = ('.png', '.bmp', '.ppm', '.tif', '.tiff')
SYNTHETIC_PREFIX = 'synthetic:'
TRAIN = 'train'
EVAL = 'eval'


class Dataset(object):
    """Images (N, H, W, 3) as float32 in [0, 255] with split tags."""

    def __init__(self, images, tags, source=''):
        self.images = images
        self.tags = list(tags)
        self.source = source
        if self.images.ndim != 4 or self.images.shape[-1] != 3:
            raise exceptions.DatasetError(
                "images must be (N, H, W, 3), got %s" % (self.images.shape,))
        if len(self.tags) != len(self.images):
            raise exceptions.DatasetError("one split tag per image required")
        if self.images.size and (self.images.min() < 0 or
                                 self.images.max() > 255):
            raise exceptions.DatasetError("pixel values outside [0, 255]")

    def __len__(self):
        return len(self.images)

    @property
    def dims(self):
        return tuple(self.images.shape[1:3])

    def split(self, tag):
        mask = np.array([t == tag for t in self.tags], dtype=bool)
        return self.images[mask]


def split_tags(n, eval_fraction=0.1):
    """Tag the trailing ``eval_fraction`` of ``n`` images as eval."""
    n_eval = int(round(n * eval_fraction))
    if n >= 2 and eval_fraction > 0:
        n_eval = min(max(n_eval, 1), n - 1)
    else:
        n_eval = 0
    return [TRAIN] * (n - n_eval) + [EVAL] * n_eval


def synth_dataset(seed, n, dims=(16, 16), eval_fraction=0.1):
    """Smooth random colour fields standing in for a natural image set."""
    if n < 1:
        raise exceptions.DatasetError("synthetic dataset needs n >= 1")
    height, width = dims
    rng = np.random.default_rng(seed)
    sigma = max(height, width) / 6.0
    images = np.empty((n, height, width, 3), dtype=np.float32)
    for i in range(n):
        noise = rng.standard_normal((height, width, 3))
        field = ndimage.gaussian_filter(noise, sigma=(sigma, sigma, 0),
                                        mode='wrap')
        field -= field.mean(axis=(0, 1), keepdims=True)
        field /= field.std(axis=(0, 1), keepdims=True) + 1e-8
        base = rng.uniform(60, 200, size=3)
        amplitude = rng.uniform(25, 55, size=3)
        images[i] = np.clip(np.rint(base + amplitude * field), 0, 255)
    source = "synthetic:seed=%d,n=%d,size=%dx%d" % (seed, n, height, width)
    LOG.debug("Generated %s", source)
    return Dataset(images, split_tags(n, eval_fraction), source)


def parse_synthetic(spec):
    """Parse ``synthetic:seed=7,n=256[,size=16x16]``."""
    params = {'seed': 0, 'n': 256, 'size': None}
    body = spec[len(SYNTHETIC_PREFIX):]
    for item in filter(None, (p.strip() for p in body.split(','))):
        key, _, value = item.partition('=')
        key = key.strip()
        if key not in params:
            raise exceptions.DatasetError("unknown synthetic option %r" % key)
        params[key] = value.strip()
    try:
        seed = int(params['seed'])
        n = int(params['n'])
        size = None
        if params['size']:
            h, _, w = params['size'].partition('x')
            size = (int(h), int(w or h))
    except ValueError:
        raise exceptions.DatasetError("malformed synthetic spec %r" % spec)
    return seed, n, size


def _read_image(path):
    with Image.open(path) as image:
        return np.asarray(image.convert('RGB'), dtype=np.float32)


def ingest_images(source, dims=None, eval_fraction=0.1):
    """Load a directory of lossless images or a synthetic generator spec.

    Files are ordered by name. ``dims`` is (H, W); when omitted the first
    file fixes it.
    """
    if isinstance(source, str) and source.startswith(SYNTHETIC_PREFIX):
        seed, n, size = parse_synthetic(source)
        return synth_dataset(seed, n, size or dims or (16, 16),
                             eval_fraction)

    if not os.path.isdir(source):
        raise exceptions.DatasetError("not a directory: %s" % source)
    names = sorted(f for f in os.listdir(source)
                   if f.lower().endswith(LOSSLESS_EXTENSIONS))
    if not names:
        raise exceptions.DatasetError("no lossless images found in %s"
                                      % source)

    images = []
    unreadable = []
    for name in names:
        path = os.path.join(source, name)
        try:
            images.append((name, _read_image(path)))
        except (OSError, ValueError):
            unreadable.append(name)
    if unreadable:
        raise exceptions.DatasetError("unreadable images", unreadable)

    expected = tuple(dims) if dims else images[0][1].shape[:2]
    for name, array in images:
        if array.shape[:2] != expected:
            raise exceptions.DatasetError(
                "image %s is %dx%d, expected %dx%d"
                % ((name,) + array.shape[:2] + expected))

    stacked = np.stack([a for _, a in images])
    LOG.info("Ingested %d images of %dx%d from %s", len(stacked),
             expected[0], expected[1], source)
    return Dataset(stacked, split_tags(len(stacked), eval_fraction), source)
