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

"""Quality assessor: a small CNN scoring real images positive and flow
samples negative.
"""

import logging

import numpy as np

from gsflow.autodiff import Adam
from gsflow.autodiff import no_grad
from gsflow.autodiff import ops
from gsflow.autodiff import Tape
from gsflow.autodiff.tensor import Tensor
from gsflow import exceptions
from gsflow.flow import checkpoint
from gsflow.flow import layers
from gsflow.flow.model import to_model_domain
from gsflow.flow.model import to_pixels
from gsflow.training import datasets
from gsflow import utils

LOG = logging.getLogger(__name__)

ASSESSOR_MAGIC = b'GSQA'
ASSESSOR_FIELDS = ('height', 'width', 'features', 'blocks')


class QualityAssessor(object):
    """conv3x3 -> per-channel norm -> relu, repeated, then mean pool and a
    linear scalar head.
    """

    def __init__(self, height=16, width=16, features=16, blocks=3, seed=0):
        self.height = height
        self.width = width
        self.features = features
        self.blocks = blocks
        self.heldout_accuracy = None

        rng = np.random.default_rng(seed)
        self.convs = []
        self.norms = []
        c_in = 3
        for i in range(blocks):
            scale = np.sqrt(2.0 / (9 * c_in))
            w = Tensor(rng.normal(0.0, scale, (3, 3, c_in, features)),
                       requires_grad=True, name='block%d.w' % i)
            b = Tensor(np.zeros(features), requires_grad=True,
                       name='block%d.b' % i)
            self.convs.append((w, b))
            self.norms.append(layers.ActNorm(features,
                                             name='block%d.norm' % i))
            c_in = features
        self.head_w = Tensor(rng.normal(0.0, 1.0 / np.sqrt(features),
                                        (features, 1)),
                             requires_grad=True, name='head.w')
        self.head_b = Tensor(np.zeros(1), requires_grad=True, name='head.b')

    def parameters(self):
        params = []
        for (w, b), norm in zip(self.convs, self.norms):
            params.extend([(w.name, w), (b.name, b)])
            params.extend(norm.parameters())
        params.extend([(self.head_w.name, self.head_w),
                       (self.head_b.name, self.head_b)])
        return params

    def data_initialize(self, batch):
        for norm in self.norms:
            norm.pending_init = True
        with no_grad():
            self.score(batch)

    def score(self, image):
        """Score model-domain images (N, H, W, 3); returns shape (N,)."""
        x = image if isinstance(image, Tensor) else Tensor(image)
        if x.ndim == 3:
            x = ops.reshape(x, (1,) + x.shape)
        if tuple(x.shape[1:]) != (self.height, self.width, 3):
            raise exceptions.ShapeError('assessor', x.shape,
                                        (self.height, self.width, 3))
        for (w, b), norm in zip(self.convs, self.norms):
            x, _ = norm.forward(ops.conv2d(x, w, b))
            x = ops.relu(x)
        pooled = ops.mean(x, axis=(1, 2))
        head_b = ops.broadcast_to(ops.reshape(self.head_b, (1, 1)),
                                  (x.shape[0], 1))
        out = ops.matmul(pooled, self.head_w) + head_b
        return ops.reshape(out, (x.shape[0],))


def generated_dataset(model, n, delta, seed=0):
    """Flow samples, clipped to [0, 255], as the "generated" class."""
    _, images = model.sample(delta, n=n, seed=seed)
    pixels = np.clip(to_pixels(images.data), 0, 255)
    return datasets.Dataset(pixels, datasets.split_tags(n, 0.0),
                            "flow:delta=%g,seed=%d" % (delta, seed))


def _holdout(images, fraction):
    n_hold = max(1, int(round(len(images) * fraction))) \
        if len(images) > 1 else 0
    return images[:len(images) - n_hold], images[len(images) - n_hold:]


def accuracy(assessor, real, generated):
    with no_grad():
        real_scores = assessor.score(real).data
        gen_scores = assessor.score(generated).data
    hits = np.sum(real_scores > 0) + np.sum(gen_scores < 0)
    return float(hits) / (len(real_scores) + len(gen_scores))


def train_assessor(real, generated, epochs=20, batch_size=32, lr=1e-3,
                   seed=0, holdout=0.2, features=16):
    """Fit a QualityAssessor with a logistic loss on the score sign."""
    real_px = real.images if isinstance(real, datasets.Dataset) else real
    gen_px = (generated.images if isinstance(generated, datasets.Dataset)
              else generated)
    if len(real_px) == 0 or len(gen_px) == 0:
        raise exceptions.DatasetError(
            "assessor training needs both real and generated images")
    if real_px.shape[1:] != gen_px.shape[1:]:
        raise exceptions.ShapeError('train_assessor', real_px.shape[1:],
                                    gen_px.shape[1:])

    height, width = real_px.shape[1:3]
    assessor = QualityAssessor(height, width, features=features, seed=seed)
    real_train, real_hold = _holdout(to_model_domain(real_px), holdout)
    gen_train, gen_hold = _holdout(to_model_domain(gen_px), holdout)

    x_all = np.concatenate([real_train, gen_train])
    y_all = np.concatenate([np.ones(len(real_train), dtype=np.float32),
                            -np.ones(len(gen_train), dtype=np.float32)])
    rng = np.random.default_rng(seed)
    assessor.data_initialize(x_all[rng.permutation(len(x_all))[:batch_size]])

    optimizer = Adam(assessor.parameters(), lr=lr)
    for epoch in range(epochs):
        order = rng.permutation(len(x_all))
        losses = []
        for start in range(0, len(order), batch_size):
            idx = order[start:start + batch_size]
            with Tape():
                margin = assessor.score(x_all[idx]) * y_all[idx]
                loss = ops.mean(ops.softplus(-margin))
            loss.backward()
            optimizer.step()
            optimizer.zero_grad()
            losses.append(loss.item())
        LOG.debug("Assessor epoch %d loss %.4f", epoch + 1,
                  float(np.mean(losses)))

    if len(real_hold) and len(gen_hold):
        assessor.heldout_accuracy = accuracy(assessor, real_hold, gen_hold)
        LOG.info("Assessor held-out accuracy %.3f",
                 assessor.heldout_accuracy)
        if assessor.heldout_accuracy <= 0.8:
            LOG.warning("Assessor held-out accuracy %.3f is at or below 0.8",
                        assessor.heldout_accuracy)
    return assessor


def assessor_blocks(assessor):
    return [t.data for _, t in assessor.parameters()]


def save(assessor, path):
    fields = [getattr(assessor, f) for f in ASSESSOR_FIELDS]
    utils.atomic_write(path, checkpoint.dump_blocks(
        ASSESSOR_MAGIC, fields, assessor_blocks(assessor)))
    LOG.info("Saved assessor to %s", path)


def load(path):
    try:
        with open(path, 'rb') as handle:
            data = handle.read()
    except OSError as exc:
        raise exceptions.CheckpointError("cannot read %s: %s" % (path, exc))
    fields, body = checkpoint.load_blocks(data, ASSESSOR_MAGIC,
                                          len(ASSESSOR_FIELDS))
    assessor = QualityAssessor(**dict(zip(ASSESSOR_FIELDS, fields)))
    checkpoint.fill_blocks(body, assessor_blocks(assessor))
    for norm in assessor.norms:
        norm.initialized = True
    return assessor
