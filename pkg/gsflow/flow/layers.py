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

"""Invertible building blocks of the flow.

Every block maps an NHWC tensor to a tensor of the same shape and returns
its log|det J| per sample as a tensor of shape (N,).
"""

import logging

import numpy as np
from scipy import linalg

from gsflow.autodiff import ops
from gsflow.autodiff.tensor import Tensor
from gsflow import exceptions

LOG = logging.getLogger(__name__)


def squeeze(x):
    """Space-to-depth: (N, H, W, C) -> (N, H/2, W/2, 4C)."""
    n, h, w, c = x.shape
    if h % 2 or w % 2:
        raise exceptions.ShapeError('squeeze', x.shape)
    x = ops.reshape(x, (n, h // 2, 2, w // 2, 2, c))
    x = ops.transpose(x, (0, 1, 3, 2, 4, 5))
    return ops.reshape(x, (n, h // 2, w // 2, 4 * c))


def unsqueeze(x):
    n, h, w, c = x.shape
    if c % 4:
        raise exceptions.ShapeError('unsqueeze', x.shape)
    x = ops.reshape(x, (n, h, w, 2, 2, c // 4))
    x = ops.transpose(x, (0, 1, 3, 2, 4, 5))
    return ops.reshape(x, (n, 2 * h, 2 * w, c // 4))


def per_channel(param, shape):
    """Broadcast a (C,) tensor over an NHWC shape."""
    return ops.broadcast_to(ops.reshape(param, (1, 1, 1, shape[-1])), shape)


def per_sample(value, n):
    """Broadcast a scalar tensor to shape (n,)."""
    return ops.broadcast_to(ops.reshape(value, (1,)), (n,))


def _checked(tensor, where):
    if not np.all(np.isfinite(tensor.data)):
        raise exceptions.NonFiniteError(where)
    return tensor


class ActNorm(object):
    """Per-channel affine y = (x + bias) * exp(logs)."""

    def __init__(self, channels, name='actnorm'):
        self.name = name
        self.logs = Tensor(np.zeros(channels), requires_grad=True,
                           name=name + '.logs')
        self.bias = Tensor(np.zeros(channels), requires_grad=True,
                           name=name + '.bias')
        self.initialized = False
        self.pending_init = False

    def parameters(self):
        return [(self.logs.name, self.logs), (self.bias.name, self.bias)]

    def buffers(self):
        return []

    def initialize_from(self, x):
        data = x.data.reshape(-1, x.shape[-1]).astype(np.float64)
        mean = data.mean(axis=0)
        std = data.std(axis=0)
        self.bias.data[...] = -mean
        self.logs.data[...] = -np.log(std + 1e-6)
        self.initialized = True
        self.pending_init = False
        LOG.debug("%s initialized from batch of %d", self.name, x.shape[0])

    def forward(self, x):
        if self.pending_init:
            self.initialize_from(x)
        n, h, w, _ = x.shape
        y = (x + per_channel(self.bias, x.shape)) * per_channel(
            ops.exp(self.logs), x.shape)
        logdet = per_sample(ops.sum(self.logs) * float(h * w), n)
        return _checked(y, self.name), logdet

    def inverse(self, y):
        return _checked(
            y * per_channel(ops.exp(-self.logs), y.shape) -
            per_channel(self.bias, y.shape), self.name + '.inverse')


class InvConv1x1(object):
    """Invertible 1x1 convolution, W = P L (U + diag(sign * exp(log_s))).

    P and sign are fixed; log|det W| is the sum of ``log_s``.
    """

    def __init__(self, channels, rng, name='invconv'):
        self.name = name
        self.channels = channels
        q = linalg.qr(rng.standard_normal((channels, channels)))[0]
        p, lower, upper = linalg.lu(q)
        diag = np.diag(upper)

        self.perm = p.astype(np.float32)
        self.sign_s = np.sign(diag).astype(np.float32)
        self.lower_mask = np.tril(np.ones((channels, channels),
                                          dtype=np.float32), -1)
        self.eye = np.eye(channels, dtype=np.float32)
        self.lower = Tensor(lower, requires_grad=True, name=name + '.lower')
        self.upper = Tensor(np.triu(upper, 1), requires_grad=True,
                            name=name + '.upper')
        self.log_s = Tensor(np.log(np.abs(diag)), requires_grad=True,
                            name=name + '.log_s')

    def parameters(self):
        return [(self.lower.name, self.lower), (self.upper.name, self.upper),
                (self.log_s.name, self.log_s)]

    def buffers(self):
        return [(self.name + '.perm', self.perm),
                (self.name + '.sign_s', self.sign_s)]

    def weight(self):
        c = self.channels
        lower = self.lower * self.lower_mask + self.eye
        scale = ops.exp(self.log_s) * self.sign_s
        diag = ops.broadcast_to(ops.reshape(scale, (1, c)), (c, c)) * self.eye
        upper = self.upper * self.lower_mask.T + diag
        return ops.matmul(ops.matmul(Tensor.wrap(self.perm), lower), upper)

    def logabsdet(self):
        return ops.sum(self.log_s)

    def forward(self, x):
        n, h, w, c = x.shape
        y = ops.matmul(ops.reshape(x, (-1, c)), self.weight())
        logdet = per_sample(self.logabsdet() * float(h * w), n)
        return _checked(ops.reshape(y, x.shape), self.name), logdet

    def inverse(self, y):
        c = self.channels
        weight = self.weight().data.astype(np.float64)
        w_inv = np.linalg.inv(weight).astype(
            np.result_type(y.dtype, np.float32))
        x = ops.matmul(ops.reshape(y, (-1, c)), w_inv)
        return _checked(ops.reshape(x, y.shape), self.name + '.inverse')


class AffineCoupling(object):
    """Affine coupling with a tanh-bounded log-scale.

    The first half of the channels conditions a two-conv network that
    shifts and scales the second half; the last conv starts at zero so the
    block starts as the identity.
    """

    def __init__(self, channels, hidden, rng, name='coupling'):
        if channels % 2:
            raise exceptions.ShapeError(name, (channels,))
        self.name = name
        self.half = channels // 2
        self.w1 = Tensor(rng.normal(0.0, 0.05, (3, 3, self.half, hidden)),
                         requires_grad=True, name=name + '.w1')
        self.b1 = Tensor(np.zeros(hidden), requires_grad=True,
                         name=name + '.b1')
        self.w2 = Tensor(np.zeros((3, 3, hidden, channels)),
                         requires_grad=True, name=name + '.w2')
        self.b2 = Tensor(np.zeros(channels), requires_grad=True,
                         name=name + '.b2')

    def parameters(self):
        return [(t.name, t) for t in (self.w1, self.b1, self.w2, self.b2)]

    def buffers(self):
        return []

    def _shift_and_log_scale(self, xa):
        h = ops.relu(ops.conv2d(xa, self.w1, self.b1))
        h = ops.conv2d(h, self.w2, self.b2)
        shift, raw = ops.split(h, [self.half, self.half])
        return shift, ops.tanh(raw)

    def forward(self, x):
        xa, xb = ops.split(x, [self.half, self.half])
        shift, log_scale = self._shift_and_log_scale(xa)
        yb = xb * ops.exp(log_scale) + shift
        logdet = ops.sum(ops.reshape(log_scale, (x.shape[0], -1)), axis=1)
        return _checked(ops.concat([xa, yb], axis=-1), self.name), logdet

    def inverse(self, y):
        ya, yb = ops.split(y, [self.half, self.half])
        shift, log_scale = self._shift_and_log_scale(ya)
        xb = (yb - shift) * ops.exp(-log_scale)
        return _checked(ops.concat([ya, xb], axis=-1), self.name + '.inverse')


class FlowStep(object):
    """actnorm -> invertible 1x1 -> affine coupling."""

    def __init__(self, channels, hidden, rng, name='step'):
        self.name = name
        self.actnorm = ActNorm(channels, name=name + '.actnorm')
        self.invconv = InvConv1x1(channels, rng, name=name + '.invconv')
        self.coupling = AffineCoupling(channels, hidden, rng,
                                       name=name + '.coupling')

    @property
    def blocks(self):
        return (self.actnorm, self.invconv, self.coupling)

    def parameters(self):
        return [p for block in self.blocks for p in block.parameters()]

    def buffers(self):
        return [b for block in self.blocks for b in block.buffers()]

    def forward(self, x):
        logdet = None
        for block in self.blocks:
            x, block_logdet = block.forward(x)
            logdet = block_logdet if logdet is None else logdet + block_logdet
        return x, logdet

    def inverse(self, y):
        for block in reversed(self.blocks):
            y = block.inverse(y)
        return y
