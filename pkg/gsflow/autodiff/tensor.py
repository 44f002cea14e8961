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

import itertools

import numpy as np

from gsflow import exceptions

DEFAULT_DTYPE = np.float32

_node_ids = itertools.count(1)


class Tensor(object):
    """Dense row-major array with an optional gradient.

    ``data`` is float32 unless another dtype is asked for explicitly.
    Tensors produced by a recorded operation keep a reference to their
    tape; leaves have ``tape`` set to None.
    """

    def __init__(self, data, requires_grad=False, name=None, dtype=None):
        self.data = np.array(data, dtype=dtype or DEFAULT_DTYPE)
        self.requires_grad = requires_grad
        self.name = name
        self.grad = None
        self.tape = None
        self.node_id = next(_node_ids)

    @classmethod
    def wrap(cls, array, requires_grad=False, name=None):
        """Wrap an ndarray without copying or changing its dtype."""
        tensor = cls.__new__(cls)
        tensor.data = np.asarray(array)
        tensor.requires_grad = requires_grad
        tensor.name = name
        tensor.grad = None
        tensor.tape = None
        tensor.node_id = next(_node_ids)
        return tensor

    def __repr__(self):
        return "Tensor(shape=%s, dtype=%s%s)" % (
            self.shape, self.dtype, ", requires_grad" if self.requires_grad
            else "")

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def is_leaf(self):
        return self.tape is None

    def numpy(self):
        return self.data

    def item(self):
        return float(self.data.reshape(-1)[0])

    def detach(self):
        return Tensor.wrap(self.data.copy())

    def zero_grad(self):
        self.grad = None

    def backward(self):
        if self.tape is None:
            raise exceptions.TapeError(
                "backward called on a tensor that is not on any tape")
        self.tape.backward(self)

    def check_finite(self, where):
        """Raise NonFiniteError when data or grad holds NaN/Inf."""
        if not np.all(np.isfinite(self.data)):
            raise exceptions.NonFiniteError(where, self.name)
        if self.grad is not None and not np.all(np.isfinite(self.grad)):
            raise exceptions.NonFiniteError(where + ' (grad)', self.name)
        return self

    # Operator sugar, see gsflow.autodiff.ops for the definitions.
    def __add__(self, other):
        return ops.add(self, other)

    def __radd__(self, other):
        return ops.add(self, other)

    def __sub__(self, other):
        return ops.sub(self, other)

    def __rsub__(self, other):
        return ops.add(ops.neg(self), other)

    def __mul__(self, other):
        return ops.mul(self, other)

    def __rmul__(self, other):
        return ops.mul(self, other)

    def __truediv__(self, other):
        return ops.div(self, other)

    def __neg__(self):
        return ops.neg(self)

    def __matmul__(self, other):
        return ops.matmul(self, other)

    def __getitem__(self, index):
        return ops.getitem(self, index)

    def sum(self, axis=None):
        return ops.sum(self, axis)

    def mean(self, axis=None):
        return ops.mean(self, axis)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = shape[0]
        return ops.reshape(self, tuple(shape))

    def transpose(self, *axes):
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = axes[0]
        return ops.transpose(self, tuple(axes))

    def abs(self):
        return ops.abs(self)

    def exp(self):
        return ops.exp(self)

    def log(self):
        return ops.log(self)

    def tanh(self):
        return ops.tanh(self)


from gsflow.autodiff import ops  # noqa: E402
