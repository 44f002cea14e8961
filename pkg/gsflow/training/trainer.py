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
import math

import numpy as np

from gsflow.autodiff import Adam
from gsflow.autodiff import clip_grad_norm
from gsflow.autodiff import no_grad
from gsflow.autodiff import ops
from gsflow.autodiff import Tape
from gsflow import exceptions
from gsflow.flow import checkpoint
from gsflow.flow.model import to_model_domain
from gsflow.training import datasets

LOG = logging.getLogger(__name__)


class TrainConfig(object):

    def __init__(self, epochs=10, batch_size=32, lr=1e-3, seed=0,
                 checkpoint_interval=1, dequantize=True, clip_norm=50.0):
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr = lr
        self.seed = seed
        self.checkpoint_interval = checkpoint_interval
        self.dequantize = dequantize
        self.clip_norm = clip_norm
        if self.epochs < 0:
            raise exceptions.ConfigError("epochs must be >= 0")
        for name in ('batch_size', 'lr', 'checkpoint_interval', 'clip_norm'):
            if not getattr(self, name) > 0:
                raise exceptions.ConfigError("%s must be positive" % name)


class LossPoint(object):

    def __init__(self, epoch, step, nll_bits_per_dim):
        self.epoch = epoch
        self.step = step
        self.nll_bits_per_dim = nll_bits_per_dim


class TrainResult(object):

    def __init__(self, model, loss_curve, initial_eval_bpd=None,
                 final_eval_bpd=None):
        self.model = model
        self.loss_curve = loss_curve
        self.initial_eval_bpd = initial_eval_bpd
        self.final_eval_bpd = final_eval_bpd


def evaluate(model, images, batch_size=64):
    """Mean bits-per-dim of [0, 255] ``images`` at bin centres."""
    if len(images) == 0:
        return None
    x = to_model_domain(images) + np.float32(0.5 / 255.0)
    total = 0.0
    with no_grad():
        for start in range(0, len(x), batch_size):
            bpd = model.bits_per_dim(x[start:start + batch_size])
            total += float(np.sum(bpd.data, dtype=np.float64))
    return total / len(x)


def _snapshot(params):
    return [t.data.copy() for _, t in params]


def _restore(params, snapshot):
    for (_, tensor), saved in zip(params, snapshot):
        tensor.data[...] = saved


def train(model, dataset, config, checkpoint_path=None):
    """Maximise log p(I) over the train split with Adam.

    Returns a :class:`TrainResult`; the loss curve holds one point per
    optimiser step.
    """
    train_images = dataset.split(datasets.TRAIN)
    eval_images = dataset.split(datasets.EVAL)
    if len(train_images) == 0:
        raise exceptions.DatasetError("dataset has no train images")
    if tuple(train_images.shape[1:]) != model.image_shape:
        raise exceptions.ShapeError('train', train_images.shape[1:],
                                    model.image_shape)

    curve = []
    if config.epochs == 0:
        return TrainResult(model, curve)

    rng = np.random.default_rng(config.seed)
    x_train = to_model_domain(train_images)
    n = len(x_train)
    batches = int(math.ceil(n / float(config.batch_size)))

    if not model.initialized:
        first = rng.permutation(n)[:config.batch_size]
        model.data_initialize(x_train[first])

    initial = evaluate(model, eval_images)
    if initial is not None:
        LOG.info("Initial eval bits/dim %.4f", initial)

    params = model.parameters()
    optimizer = Adam(params, lr=config.lr)
    last_good = _snapshot(params)
    step = 0
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        for b in range(batches):
            x = x_train[order[b * config.batch_size:
                              (b + 1) * config.batch_size]]
            if config.dequantize:
                x = x + rng.uniform(0.0, 1.0 / 255.0,
                                    x.shape).astype(np.float32)
            try:
                with Tape():
                    loss = ops.mean(model.bits_per_dim(x))
                if not np.isfinite(loss.item()):
                    raise exceptions.NonFiniteError('training loss')
                loss.backward()
                clip_grad_norm([t for _, t in params], config.clip_norm)
                optimizer.step()
            except exceptions.NonFiniteError as exc:
                _restore(params, last_good)
                raise exceptions.TrainingError(
                    "aborted at epoch %d step %d: %s; parameters restored "
                    "to the end of the last good epoch" % (epoch, step, exc))
            finally:
                optimizer.zero_grad()
            curve.append(LossPoint(epoch, step, loss.item()))
            step += 1

        last_good = _snapshot(params)
        LOG.info("Epoch %d/%d mean train bits/dim %.4f", epoch + 1,
                 config.epochs,
                 float(np.mean([p.nll_bits_per_dim
                                for p in curve[-batches:]])))
        if checkpoint_path and (epoch + 1) % config.checkpoint_interval == 0:
            checkpoint.save(model, checkpoint_path)

    if checkpoint_path and config.epochs % config.checkpoint_interval:
        checkpoint.save(model, checkpoint_path)
    final = evaluate(model, eval_images)
    if final is not None:
        LOG.info("Final eval bits/dim %.4f", final)
    return TrainResult(model, curve, initial, final)
