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

"""Multi-scale flow: image <-> MultiScaleLatent.

Level i squeezes, runs K flow steps and, except on the last level, emits
the second half of its channels as Z_i. With a 3-channel image Z_i has
shape (H/2^(i+1), W/2^(i+1), 6*2^i) for i < L-1 and the last level emits
(H/2^L, W/2^L, 12*2^(L-1)).
"""

import logging
import math

import numpy as np

from gsflow.autodiff import no_grad
from gsflow.autodiff import ops
from gsflow.autodiff.tensor import Tensor
from gsflow import exceptions
from gsflow.flow import layers
from gsflow.flow.latent import MultiScaleLatent

LOG = logging.getLogger(__name__)

LOG_2PI = math.log(2 * math.pi)


def to_model_domain(pixels):
    """Map [0, 255] pixels to [-0.5, 0.5]."""
    return (np.asarray(pixels, dtype=np.float32) / np.float32(255.0) -
            np.float32(0.5)).astype(np.float32)


def to_pixels(x):
    return ((np.asarray(x, dtype=np.float32) + np.float32(0.5)) *
            np.float32(255.0)).astype(np.float32)


class FlowModel(object):

    def __init__(self, height=16, width=16, levels=3, steps=4, hidden=64,
                 channels=3, seed=0):
        if levels < 1 or steps < 1 or hidden < 1:
            raise exceptions.ShapeError('flow_model', (levels, steps, hidden))
        if height % (2 ** levels) or width % (2 ** levels):
            raise exceptions.ShapeError('flow_model', (height, width),
                                        (2 ** levels,))
        self.height = height
        self.width = width
        self.levels = levels
        self.steps = steps
        self.hidden = hidden
        self.channels = channels
        self.seed = seed

        rng = np.random.default_rng(seed)
        self.flows = []
        c = channels
        for i in range(levels):
            c *= 4
            self.flows.append([
                layers.FlowStep(c, hidden, rng, name='level%d.step%d' % (i, k))
                for k in range(steps)])
            if i < levels - 1:
                c //= 2

    def __repr__(self):
        return "FlowModel(%dx%dx%d, L=%d, K=%d, hidden=%d)" % (
            self.height, self.width, self.channels, self.levels, self.steps,
            self.hidden)

    @property
    def image_shape(self):
        return (self.height, self.width, self.channels)

    @property
    def dims(self):
        return self.height * self.width * self.channels

    def latent_shapes(self):
        shapes = []
        h, w, c = self.height, self.width, self.channels
        for i in range(self.levels):
            h, w, c = h // 2, w // 2, c * 4
            if i < self.levels - 1:
                shapes.append((h, w, c // 2))
                c //= 2
            else:
                shapes.append((h, w, c))
        return shapes

    def all_steps(self):
        return [step for level in self.flows for step in level]

    def actnorms(self):
        return [step.actnorm for step in self.all_steps()]

    def parameters(self):
        return [p for step in self.all_steps() for p in step.parameters()]

    def buffers(self):
        return [b for step in self.all_steps() for b in step.buffers()]

    @property
    def initialized(self):
        return all(a.initialized for a in self.actnorms())

    def mark_initialized(self):
        for actnorm in self.actnorms():
            actnorm.initialized = True

    def data_initialize(self, batch):
        """Initialize every actnorm from a batch of model-domain images."""
        for actnorm in self.actnorms():
            actnorm.pending_init = True
        with no_grad():
            self.forward(self._as_tensor(batch))
        LOG.info("Data-dependent actnorm initialization on %d images",
                 self._as_tensor(batch).shape[0])

    def _as_tensor(self, image):
        if not isinstance(image, Tensor):
            image = Tensor(image)
        if image.ndim == 3:
            image = ops.reshape(image, (1,) + image.shape)
        if image.ndim != 4 or tuple(image.shape[1:]) != self.image_shape:
            raise exceptions.ShapeError('model_forward', image.shape,
                                        self.image_shape)
        return image

    def forward(self, image, step_logdets=None):
        """Glow(I) = Z. Returns (MultiScaleLatent, logdet of shape (N,)).

        When ``step_logdets`` is a list, every per-step logdet is appended
        to it.
        """
        x = self._as_tensor(image)
        n = x.shape[0]
        total = None
        latents = []
        for i, level in enumerate(self.flows):
            x = layers.squeeze(x)
            for step in level:
                x, logdet = step.forward(x)
                if step_logdets is not None:
                    step_logdets.append(logdet)
                total = logdet if total is None else total + logdet
            if i < self.levels - 1:
                half = x.shape[-1] // 2
                x, z = ops.split(x, [half, half])
                latents.append(z)
            else:
                latents.append(x)
        if total is None:
            total = Tensor.wrap(np.zeros(n, dtype=x.dtype))
        return MultiScaleLatent(latents), total

    def inverse(self, latent):
        """Glow^-1(Z) = I, differentiable with respect to the latents."""
        shapes = self.latent_shapes()
        if len(latent.levels) != self.levels:
            raise exceptions.ShapeError('model_inverse',
                                        (len(latent.levels),),
                                        (self.levels,))
        for i, (z, shape) in enumerate(zip(latent.levels, shapes)):
            if tuple(z.shape[1:]) != tuple(shape):
                raise exceptions.ShapeError('model_inverse level %d' % i,
                                            z.shape[1:], shape)

        x = None
        for i in reversed(range(self.levels)):
            z = latent.levels[i]
            x = z if x is None else ops.concat([x, z], axis=-1)
            for step in reversed(self.flows[i]):
                x = step.inverse(x)
            x = layers.unsqueeze(x)
        return x

    def log_prior(self, latent):
        """Standard-normal log-density of every level, per sample."""
        n = latent.batch_size
        total = None
        for z in latent.levels:
            count = float(np.prod(z.shape[1:]))
            flat = ops.reshape(z, (n, -1))
            term = (ops.sum(ops.square(flat), axis=1) * -0.5 -
                    0.5 * LOG_2PI * count)
            total = term if total is None else total + term
        return total

    def log_likelihood(self, image):
        """log p(I) = log p(Z) + sum of log|det| terms, per sample."""
        latent, logdet = self.forward(image)
        result = self.log_prior(latent) + logdet
        if not np.all(np.isfinite(result.data)):
            raise exceptions.NonFiniteError('log_likelihood')
        return result

    def bits_per_dim(self, image):
        """Discretised NLL in bits per dimension for 1/255-wide bins."""
        log_p = self.log_likelihood(image)
        dims = float(self.dims)
        return (ops.neg(log_p) + dims * math.log(255.0)) * (
            1.0 / (dims * math.log(2.0)))

    def sample(self, delta, n=1, seed=None):
        """Draw Z ~ N(0, 1) * delta and return (latent, image)."""
        if not delta > 0:
            raise exceptions.ConfigError("temperature must be > 0, got %r"
                                         % (delta,))
        rng = np.random.default_rng(seed)
        levels = [Tensor(rng.standard_normal((n,) + tuple(s)) * delta)
                  for s in self.latent_shapes()]
        latent = MultiScaleLatent(levels, delta)
        with no_grad():
            image = self.inverse(latent)
        return latent, image
