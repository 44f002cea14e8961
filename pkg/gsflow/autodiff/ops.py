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

"""Differentiable operations.

Each operation is a :class:`Function` with a numpy ``forward`` and a
``backward`` returning one gradient per input. Elementwise operations
accept two tensors of identical shape or a tensor and a scalar; the only
other broadcasting is the explicit :func:`broadcast_to`.
"""

import logging

import numpy as np
from scipy import special

from gsflow.autodiff import tape as tape_mod
from gsflow.autodiff.tensor import Tensor
from gsflow import exceptions

LOG = logging.getLogger(__name__)


class Function(object):

    def __init__(self, **params):
        self.__dict__.update(params)

    def forward(self, *arrays):
        raise NotImplementedError()

    def backward(self, grad):
        raise NotImplementedError()

    @classmethod
    def apply(cls, *inputs, **params):
        function = cls(**params)
        arrays = []
        for value in inputs:
            if isinstance(value, Tensor):
                arrays.append(value.data)
            elif isinstance(value, np.generic):
                # numpy scalars would otherwise promote float32 data
                arrays.append(value.item())
            else:
                arrays.append(value)
        out = Tensor.wrap(function.forward(*arrays))

        tape = tape_mod.current()
        if tape is not None and any(isinstance(value, Tensor) and
                                    value.requires_grad for value in inputs):
            tape.record(function, inputs, out)
        return out


def _reduce_like(grad, value):
    if np.ndim(value) == 0:
        return np.asarray(np.sum(grad), dtype=grad.dtype)
    return grad


def _check_elementwise(op, a, b):
    if np.ndim(a) == 0 or np.ndim(b) == 0:
        return
    if np.shape(a) != np.shape(b):
        raise exceptions.ShapeError(op, np.shape(a), np.shape(b))


class Add(Function):
    def forward(self, a, b):
        _check_elementwise('add', a, b)
        self.a, self.b = a, b
        return a + b

    def backward(self, grad):
        return _reduce_like(grad, self.a), _reduce_like(grad, self.b)


class Sub(Function):
    def forward(self, a, b):
        _check_elementwise('sub', a, b)
        self.a, self.b = a, b
        return a - b

    def backward(self, grad):
        return _reduce_like(grad, self.a), _reduce_like(-grad, self.b)


class Mul(Function):
    def forward(self, a, b):
        _check_elementwise('mul', a, b)
        self.a, self.b = a, b
        return a * b

    def backward(self, grad):
        return (_reduce_like(grad * self.b, self.a),
                _reduce_like(grad * self.a, self.b))


class Div(Function):
    def forward(self, a, b):
        _check_elementwise('div', a, b)
        self.a, self.b = a, b
        return a / b

    def backward(self, grad):
        return (_reduce_like(grad / self.b, self.a),
                _reduce_like(-grad * self.a / (self.b * self.b), self.b))


class Neg(Function):
    def forward(self, a):
        return -a

    def backward(self, grad):
        return (-grad,)


class Abs(Function):
    def forward(self, a):
        self.a = a
        return np.abs(a)

    def backward(self, grad):
        # subgradient 0 at the kink
        return (grad * np.sign(self.a),)


class Tanh(Function):
    def forward(self, a):
        self.y = np.tanh(a)
        return self.y

    def backward(self, grad):
        return (grad * (1 - self.y * self.y),)


class Exp(Function):
    def forward(self, a):
        self.y = np.exp(a)
        return self.y

    def backward(self, grad):
        return (grad * self.y,)


class Log(Function):
    def forward(self, a):
        self.a = a
        with np.errstate(divide='ignore', invalid='ignore'):
            return np.log(a)

    def backward(self, grad):
        return (grad / self.a,)


class Sigmoid(Function):
    def forward(self, a):
        self.y = special.expit(a)
        return self.y

    def backward(self, grad):
        return (grad * self.y * (1 - self.y),)


class Softplus(Function):
    def forward(self, a):
        self.a = a
        return np.logaddexp(np.zeros_like(a), a)

    def backward(self, grad):
        return (grad * special.expit(self.a),)


class Relu(Function):
    def forward(self, a):
        self.mask = a > 0
        return np.where(self.mask, a, np.zeros_like(a))

    def backward(self, grad):
        return (grad * self.mask,)


class Square(Function):
    def forward(self, a):
        self.a = a
        return a * a

    def backward(self, grad):
        return (2 * grad * self.a,)


class MatMul(Function):
    def forward(self, a, b):
        if np.ndim(a) != 2 or np.ndim(b) != 2 or a.shape[1] != b.shape[0]:
            raise exceptions.ShapeError('matmul', np.shape(a), np.shape(b))
        self.a, self.b = a, b
        return a @ b

    def backward(self, grad):
        return grad @ np.transpose(self.b), np.transpose(self.a) @ grad


class Conv2d(Function):
    """Stride-1 convolution with zero "same" padding over NHWC input.

    Kernels are laid out (kh, kw, in_channels, out_channels).
    """

    def forward(self, x, w, b=None):
        if (np.ndim(x) != 4 or np.ndim(w) != 4 or x.shape[3] != w.shape[2] or
                w.shape[0] % 2 == 0 or w.shape[1] % 2 == 0):
            raise exceptions.ShapeError('conv2d', np.shape(x), np.shape(w))
        if b is not None and np.shape(b) != (w.shape[3],):
            raise exceptions.ShapeError('conv2d', np.shape(w), np.shape(b))

        n, h, wd, c = x.shape
        kh, kw, _, cout = w.shape
        ph, pw = kh // 2, kw // 2
        padded = np.pad(x, ((0, 0), (ph, ph), (pw, pw), (0, 0)))
        windows = np.lib.stride_tricks.sliding_window_view(
            padded, (kh, kw), axis=(1, 2))
        self.cols = windows.reshape(n * h * wd, c * kh * kw)
        self.wmat = w.transpose(2, 0, 1, 3).reshape(c * kh * kw, cout)
        self.x_shape = x.shape
        self.w_shape = w.shape
        self.has_bias = b is not None

        out = self.cols @ self.wmat
        if b is not None:
            out = out + b
        return out.reshape(n, h, wd, cout)

    def backward(self, grad):
        n, h, wd, c = self.x_shape
        kh, kw, _, cout = self.w_shape
        ph, pw = kh // 2, kw // 2
        g2 = grad.reshape(-1, cout)

        gw = (self.cols.T @ g2).reshape(c, kh, kw, cout).transpose(1, 2, 0, 3)
        gb = g2.sum(axis=0) if self.has_bias else None

        dcols = (g2 @ self.wmat.T).reshape(n, h, wd, c, kh, kw)
        gpad = np.zeros((n, h + kh - 1, wd + kw - 1, c), dtype=dcols.dtype)
        for i in range(kh):
            for j in range(kw):
                gpad[:, i:i + h, j:j + wd, :] += dcols[..., i, j]
        gx = np.ascontiguousarray(gpad[:, ph:ph + h, pw:pw + wd, :])
        return gx, np.ascontiguousarray(gw), gb


class Sum(Function):
    def forward(self, a, axis=None):
        self.shape = np.shape(a)
        self.axis = axis
        return np.asarray(np.sum(a, axis=axis))

    def backward(self, grad):
        if self.axis is not None:
            grad = np.expand_dims(grad, self.axis)
        return np.array(np.broadcast_to(grad, self.shape)), None


class Mean(Function):
    def forward(self, a, axis=None):
        self.shape = np.shape(a)
        self.axis = axis
        out = np.sum(a, axis=axis)
        self.count = np.size(a) // max(np.size(out), 1)
        return np.asarray(out / self.count, dtype=np.result_type(a))

    def backward(self, grad):
        if self.axis is not None:
            grad = np.expand_dims(grad, self.axis)
        grad = np.broadcast_to(grad / self.count, self.shape)
        return np.array(grad), None


class Reshape(Function):
    def forward(self, a, shape=None):
        self.in_shape = np.shape(a)
        try:
            return np.reshape(a, shape)
        except ValueError:
            raise exceptions.ShapeError('reshape', self.in_shape, shape)

    def backward(self, grad):
        return grad.reshape(self.in_shape), None


class Transpose(Function):
    def forward(self, a, axes=None):
        if axes is None or sorted(axes) != list(range(np.ndim(a))):
            raise exceptions.ShapeError('transpose', np.shape(a), axes or ())
        self.axes = axes
        return np.transpose(a, axes)

    def backward(self, grad):
        return np.transpose(grad, np.argsort(self.axes)), None


class BroadcastTo(Function):
    def forward(self, a, shape=None):
        self.in_shape = np.shape(a)
        try:
            return np.array(np.broadcast_to(a, shape))
        except ValueError:
            raise exceptions.ShapeError('broadcast_to', self.in_shape, shape)

    def backward(self, grad):
        extra = grad.ndim - len(self.in_shape)
        if extra:
            grad = grad.sum(axis=tuple(range(extra)))
        axes = tuple(i for i, d in enumerate(self.in_shape)
                     if d == 1 and grad.shape[i] != 1)
        if axes:
            grad = grad.sum(axis=axes, keepdims=True)
        return grad.reshape(self.in_shape), None


class GetItem(Function):
    def forward(self, a, index=None):
        self.in_shape = np.shape(a)
        self.dtype = np.result_type(a)
        self.index = index
        return np.array(a[index])

    def backward(self, grad):
        out = np.zeros(self.in_shape, dtype=grad.dtype)
        np.add.at(out, self.index, grad)
        return out, None


class Concat(Function):
    def forward(self, *arrays):
        axis = self.axis
        try:
            out = np.concatenate(arrays, axis=axis)
        except ValueError:
            raise exceptions.ShapeError('concat',
                                        *[np.shape(a) for a in arrays])
        self.sizes = [np.shape(a)[axis] for a in arrays]
        return out

    def backward(self, grad):
        cuts = np.cumsum(self.sizes)[:-1]
        return tuple(np.split(grad, cuts, axis=self.axis))


def add(a, b):
    return Add.apply(a, b)


def sub(a, b):
    return Sub.apply(a, b)


def mul(a, b):
    return Mul.apply(a, b)


def div(a, b):
    return Div.apply(a, b)


def neg(a):
    return Neg.apply(a)


def abs(a):
    return Abs.apply(a)


def tanh(a):
    return Tanh.apply(a)


def exp(a):
    return Exp.apply(a)


def log(a):
    return Log.apply(a)


def sigmoid(a):
    return Sigmoid.apply(a)


def softplus(a):
    return Softplus.apply(a)


def relu(a):
    return Relu.apply(a)


def square(a):
    return Square.apply(a)


def matmul(a, b):
    return MatMul.apply(a, b)


def conv2d(x, w, b=None):
    return Conv2d.apply(x, w, b)


def sum(a, axis=None):
    return Sum.apply(a, axis)


def mean(a, axis=None):
    return Mean.apply(a, axis)


def reshape(a, shape):
    return Reshape.apply(a, tuple(shape))


def transpose(a, axes):
    return Transpose.apply(a, tuple(axes))


def broadcast_to(a, shape):
    return BroadcastTo.apply(a, tuple(shape))


def getitem(a, index):
    return GetItem.apply(a, index)


def concat(tensors, axis=0):
    return Concat.apply(*tensors, axis=axis)


def split(a, sizes, axis=-1):
    """Split ``a`` along ``axis`` into consecutive pieces of ``sizes``."""
    axis = axis % a.ndim
    pieces = []
    start = 0
    for size in sizes:
        index = [slice(None)] * a.ndim
        index[axis] = slice(start, start + size)
        pieces.append(getitem(a, tuple(index)))
        start += size
    if start != a.shape[axis]:
        raise exceptions.ShapeError('split', a.shape, tuple(sizes))
    return pieces


OPS = {
    'add': add, 'sub': sub, 'mul': mul, 'div': div, 'neg': neg,
    'abs': abs, 'tanh': tanh, 'exp': exp, 'log': log,
    'sigmoid': sigmoid, 'softplus': softplus, 'relu': relu,
    'square': square, 'matmul': matmul, 'conv2d': conv2d, 'sum': sum,
    'mean': mean, 'reshape': reshape, 'transpose': transpose,
    'broadcast_to': broadcast_to, 'getitem': getitem, 'concat': concat,
}


def forward_op(kind, *inputs, **params):
    """Apply the operation registered under ``kind``."""
    try:
        op = OPS[kind]
    except KeyError:
        raise exceptions.GsflowException("unknown op %r" % kind)
    if kind == 'concat':
        return op(inputs, **params)
    return op(*inputs, **params)
