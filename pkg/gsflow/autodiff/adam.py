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

import numpy as np

from gsflow import exceptions

LOG = logging.getLogger(__name__)


class AdamState(object):
    """First and second moment estimates, one array per parameter."""

    def __init__(self, m, v, step=0, lr=1e-3, beta1=0.9, beta2=0.999,
                 eps=1e-8):
        self.m = m
        self.v = v
        self.step = step
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps

    @classmethod
    def for_params(cls, params, **hyper):
        return cls(m=[np.zeros_like(p) for p in params],
                   v=[np.zeros_like(p) for p in params], **hyper)


def adam_step(params, grads, state, names=None):
    """Apply one Adam update in place to the ``params`` arrays."""
    if not (len(params) == len(grads) == len(state.m) == len(state.v)):
        raise exceptions.ShapeError('adam_step', (len(params),),
                                    (len(grads),), (len(state.m),))
    names = names or ["param%d" % i for i in range(len(params))]

    for name, param, grad, m in zip(names, params, grads, state.m):
        if param.shape != grad.shape or param.shape != m.shape:
            raise exceptions.ShapeError('adam_step[%s]' % name, param.shape,
                                        grad.shape, m.shape)
        if not np.all(np.isfinite(grad)):
            raise exceptions.NonFiniteError('adam_step gradient', name)

    state.step += 1
    correction1 = 1 - state.beta1 ** state.step
    correction2 = 1 - state.beta2 ** state.step
    for i, (param, grad) in enumerate(zip(params, grads)):
        state.m[i] = state.beta1 * state.m[i] + (1 - state.beta1) * grad
        state.v[i] = state.beta2 * state.v[i] + (1 - state.beta2) * grad * grad
        m_hat = state.m[i] / correction1
        v_hat = state.v[i] / correction2
        update = state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
        param -= update.astype(param.dtype)
    return params, state


def clip_grad_norm(tensors, max_norm):
    """Rescale gradients so their global L2 norm is at most ``max_norm``.

    Returns the norm before clipping.
    """
    grads = [t.grad for t in tensors if t.grad is not None]
    total = float(np.sqrt(sum(float(np.sum(g.astype(np.float64) ** 2))
                              for g in grads)))
    if np.isfinite(total) and total > max_norm:
        scale = max_norm / (total + 1e-12)
        for tensor in tensors:
            if tensor.grad is not None:
                tensor.grad = (tensor.grad * scale).astype(tensor.grad.dtype)
    return total


class Adam(object):
    """Adam over a list of named leaf tensors."""

    def __init__(self, named_params, lr=1e-3, beta1=0.9, beta2=0.999,
                 eps=1e-8):
        self.names = [name for name, _ in named_params]
        self.params = [tensor for _, tensor in named_params]
        self.state = AdamState.for_params([p.data for p in self.params],
                                          lr=lr, beta1=beta1, beta2=beta2,
                                          eps=eps)

    def step(self):
        grads = [p.grad if p.grad is not None else np.zeros_like(p.data)
                 for p in self.params]
        adam_step([p.data for p in self.params], grads, self.state,
                  self.names)

    def zero_grad(self):
        for param in self.params:
            param.zero_grad()
