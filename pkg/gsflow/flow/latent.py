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

import numpy as np

from gsflow.autodiff.tensor import Tensor
from gsflow import exceptions


class MultiScaleLatent(object):
    """Latents Z_1..Z_L, each shaped (N, h, w, c).

    The canonical flattening order is Z_1 first, each level row-major over
    (h, w, c).
    """

    def __init__(self, levels, delta=None):
        self.levels = list(levels)
        self.delta = delta

    @property
    def batch_size(self):
        return self.levels[0].shape[0]

    @property
    def shapes(self):
        return [tuple(z.shape[1:]) for z in self.levels]

    @property
    def size(self):
        """Elements per sample across every level."""
        return int(sum(np.prod(s) for s in self.shapes))

    def arrays(self):
        return [z.data for z in self.levels]

    def flatten(self):
        """Return an (N, size) array in the canonical order."""
        n = self.batch_size
        return np.concatenate([z.data.reshape(n, -1) for z in self.levels],
                              axis=1)

    @classmethod
    def unflatten(cls, flat, shapes, delta=None):
        flat = np.asarray(flat)
        if flat.ndim == 1:
            flat = flat.reshape(1, -1)
        total = int(sum(np.prod(s) for s in shapes))
        if flat.shape[1] != total:
            raise exceptions.ShapeError('unflatten', flat.shape, (total,))
        levels = []
        start = 0
        for shape in shapes:
            count = int(np.prod(shape))
            chunk = flat[:, start:start + count].reshape(
                (flat.shape[0],) + tuple(shape))
            levels.append(Tensor.wrap(np.ascontiguousarray(chunk)))
            start += count
        return cls(levels, delta)

    def take(self, index):
        return MultiScaleLatent(
            [Tensor.wrap(z.data[index:index + 1].copy()) for z in self.levels],
            self.delta)

    def copy(self, requires_grad=False):
        return MultiScaleLatent(
            [Tensor.wrap(z.data.copy(), requires_grad=requires_grad)
             for z in self.levels], self.delta)

    def mean(self):
        """Per-level elementwise mean over the batch, as a batch-1 latent."""
        return MultiScaleLatent(
            [Tensor.wrap(z.data.mean(axis=0, keepdims=True,
                                     dtype=np.float64).astype(z.dtype))
             for z in self.levels], self.delta)
