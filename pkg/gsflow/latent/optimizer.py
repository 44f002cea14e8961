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

"""Search for a latent whose generated image scores like real images.

The start point is the mean of the latents of ``n`` real images; each step
moves the latent against the gradient of |mean(real scores) - score(G(Z))|.
"""

import logging

import numpy as np

from gsflow.autodiff import no_grad
from gsflow.autodiff import ops
from gsflow.autodiff import Tape
from gsflow.autodiff.tensor import Tensor
from gsflow import exceptions
from gsflow.flow.latent import MultiScaleLatent

LOG = logging.getLogger(__name__)


class OptConfig(object):

    def __init__(self, epsilon=1e-3, max_step=100, thresh=0.1, n=3, seed=0,
                 restart_noise=0.0):
        self.epsilon = epsilon
        self.max_step = max_step
        self.thresh = thresh
        self.n = n
        self.seed = seed
        # std of the noise added to the initial latent, 0 keeps the plain mean
        self.restart_noise = restart_noise
        if self.epsilon < 0:
            raise exceptions.ConfigError("epsilon must be >= 0")
        if self.max_step < 1:
            raise exceptions.ConfigError("max_step must be >= 1")
        if self.n < 1:
            raise exceptions.ConfigError("n must be >= 1")
        if self.restart_noise < 0:
            raise exceptions.ConfigError("restart_noise must be >= 0")

    def replace(self, **changes):
        values = dict(vars(self))
        values.update(changes)
        return OptConfig(**values)


class TracePoint(object):

    def __init__(self, step, diff, score_gen):
        self.step = step
        self.diff = diff
        self.score_gen = score_gen


class OptimizationResult(object):

    def __init__(self, latent, initial_latent, trace, stopped_early=False,
                 aborted=False):
        self.latent = latent
        self.initial_latent = initial_latent
        self.trace = trace
        self.stopped_early = stopped_early
        self.aborted = aborted

    @property
    def final_diff(self):
        return self.trace[-1].diff if self.trace else None


def init_latent(model, images):
    """Mean of the latents of model-domain ``images``, as a batch-1 latent."""
    with no_grad():
        latent, _ = model.forward(images)
    return latent.mean()


def score_diff(real_scores, score_gen):
    """|mean(real_scores) - score_gen| as a scalar tensor."""
    target = float(np.mean(real_scores, dtype=np.float64))
    return ops.sum(ops.abs(ops.sub(target, score_gen)))


def diff(assessor, real_scores, gen_image):
    return score_diff(real_scores, assessor.score(gen_image))


def _finite(arrays):
    return all(a is not None and np.all(np.isfinite(a)) for a in arrays)


def optimize_latent(model, assessor, real_images, config=None):
    """Run the latent search and return an :class:`OptimizationResult`.

    ``real_images`` are model-domain arrays; ``config.n`` of them are drawn
    with ``config.seed`` to build the start point and the target score.
    """
    config = config or OptConfig()
    if len(real_images) < config.n:
        raise exceptions.ConfigError(
            "need at least n=%d real images, got %d"
            % (config.n, len(real_images)))

    rng = np.random.default_rng(config.seed)
    refs = real_images[np.sort(rng.choice(len(real_images), config.n,
                                          replace=False))]
    z = init_latent(model, refs)
    if config.restart_noise > 0:
        z = MultiScaleLatent(
            [Tensor.wrap((t.data + config.restart_noise *
                          rng.standard_normal(t.shape)).astype(t.dtype))
             for t in z.levels], z.delta)
    initial = z.copy()
    with no_grad():
        real_scores = assessor.score(refs).data

    trace = []
    stopped_early = aborted = False
    for step in range(config.max_step):
        leaves = z.copy(requires_grad=True)
        with Tape():
            score = assessor.score(model.inverse(leaves))
            loss = score_diff(real_scores, score)
        loss.backward()
        grads = [t.grad for t in leaves.levels]
        trace.append(TracePoint(step, loss.item(), score.item()))
        if not _finite(grads):
            LOG.warning("Non-finite latent gradient at step %d, keeping the "
                        "last finite latent", step)
            aborted = True
            break
        z = MultiScaleLatent(
            [Tensor.wrap((t.data - config.epsilon * g).astype(t.dtype))
             for t, g in zip(z.levels, grads)], z.delta)
        LOG.debug("Step %d diff %.5f score %.5f", step, loss.item(),
                  score.item())
        if loss.item() < config.thresh:
            stopped_early = True
            break

    LOG.info("Latent search finished after %d step(s), diff %.5f",
             len(trace), trace[-1].diff)
    return OptimizationResult(z, initial, trace, stopped_early, aborted)


def optimize_restarts(model, assessor, real_images, config, restarts):
    """Run ``restarts`` searches with seeds ``config.seed + k``."""
    results = []
    for k in range(restarts):
        results.append(optimize_latent(
            model, assessor, real_images,
            config.replace(seed=config.seed + k)))
    return results
