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

from gsflow.autodiff import Adam
from gsflow.autodiff import adam_step
from gsflow.autodiff import AdamState
from gsflow.autodiff import clip_grad_norm
from gsflow.autodiff import gradcheck
from gsflow.autodiff import no_grad
from gsflow.autodiff import ops
from gsflow.autodiff import Tape
from gsflow.autodiff import Tensor
from gsflow import exceptions
from gsflow.test import helpers as test


def direct_conv2d(x, w, b):
    kh, kw = w.shape[:2]
    padded = np.pad(x, ((0, 0), (kh // 2, kh // 2), (kw // 2, kw // 2),
                        (0, 0)))
    n, h, wd, _ = x.shape
    out = np.zeros((n, h, wd, w.shape[3]))
    for i in range(h):
        for j in range(wd):
            patch = padded[:, i:i + kh, j:j + kw, :]
            out[:, i, j, :] = np.einsum('nabc,abco->no', patch, w) + b
    return out


class OpsTests(test.TestCase):

    def test_add(self):
        out = ops.add(Tensor([1, 2]), Tensor([3, 4]))
        self.assertArrayEqual(out.data, [4, 6])

    def test_matmul_identity(self):
        x = self.rng.standard_normal((2, 3))
        out = ops.matmul(Tensor(np.eye(2)), Tensor(x))
        self.assertAllClose(out.data, x.astype(np.float32))

    def test_conv2d_ones_kernel_centre_is_sum(self):
        x = self.rng.standard_normal((1, 3, 3, 1))
        out = ops.conv2d(Tensor(x, dtype=np.float64),
                         Tensor(np.ones((3, 3, 1, 1)), dtype=np.float64))
        self.assertAlmostEqual(out.data[0, 1, 1, 0], x.sum(), places=10)

    def test_conv2d_matches_direct_convolution(self):
        x = self.rng.standard_normal((2, 5, 4, 2))
        w = self.rng.standard_normal((3, 3, 2, 3))
        b = self.rng.standard_normal(3)
        out = ops.conv2d(Tensor(x, dtype=np.float64),
                         Tensor(w, dtype=np.float64),
                         Tensor(b, dtype=np.float64))
        self.assertAllClose(out.data, direct_conv2d(x, w, b), atol=1e-10)

    def test_shape_mismatch_names_op(self):
        with self.assertRaises(exceptions.ShapeError) as ctx:
            ops.add(Tensor(np.zeros(3)), Tensor(np.zeros(4)))
        self.assertEqual(ctx.exception.op, 'add')
        self.assertIn('(3,)', str(ctx.exception))
        self.assertIn('(4,)', str(ctx.exception))

    def test_matmul_shape_mismatch(self):
        self.assertRaises(exceptions.ShapeError, ops.matmul,
                          Tensor(np.zeros((2, 3))), Tensor(np.zeros((2, 3))))

    def test_forward_op_dispatch(self):
        out = ops.forward_op('mul', Tensor([2, 3]), Tensor([4, 5]))
        self.assertArrayEqual(out.data, [8, 15])
        out = ops.forward_op('concat', Tensor([1]), Tensor([2, 3]), axis=0)
        self.assertArrayEqual(out.data, [1, 2, 3])
        self.assertRaises(exceptions.GsflowException, ops.forward_op,
                          'nope', Tensor([1]))

    def test_split_sizes_must_cover_axis(self):
        self.assertRaises(exceptions.ShapeError, ops.split,
                          Tensor(np.zeros((2, 5))), [2, 2])

    def test_deterministic(self):
        x = self.rng.standard_normal((2, 4, 4, 3))
        w = self.rng.standard_normal((3, 3, 3, 5))
        first = ops.tanh(ops.conv2d(Tensor(x), Tensor(w))).data
        second = ops.tanh(ops.conv2d(Tensor(x), Tensor(w))).data
        self.assertBitIdentical(first, second)


class BackwardTests(test.TestCase):

    def test_sum_gradient_is_ones(self):
        x = Tensor([1.0, 2.0, 3.0], requires_grad=True)
        with Tape():
            loss = ops.sum(x)
        loss.backward()
        self.assertArrayEqual(x.grad, [1, 1, 1])

    def test_sum_of_squares_gradient(self):
        x = Tensor([1.0, 2.0], requires_grad=True)
        with Tape():
            loss = ops.sum(x * x)
        loss.backward()
        self.assertArrayEqual(x.grad, [2, 4])

    def test_reused_input_accumulates(self):
        x = Tensor([3.0], requires_grad=True)
        with Tape():
            loss = ops.sum(x * x + x * 2.0 + x)
        loss.backward()
        self.assertAllClose(x.grad, [9.0])

    def test_unreachable_leaf_has_no_grad(self):
        x = Tensor([1.0], requires_grad=True)
        y = Tensor([1.0], requires_grad=True)
        with Tape():
            loss = ops.sum(ops.exp(x))
            ops.exp(y)
        loss.backward()
        self.assertIsNotNone(x.grad)
        self.assertIsNone(y.grad)

    def test_backward_twice_is_an_error(self):
        x = Tensor([1.0, 2.0], requires_grad=True)
        with Tape():
            loss = ops.sum(x)
        loss.backward()
        self.assertRaises(exceptions.TapeError, loss.backward)

    def test_backward_on_detached_tensor(self):
        x = Tensor([1.0], requires_grad=True)
        with Tape():
            loss = ops.sum(x)
        self.assertRaises(exceptions.TapeError, loss.detach().backward)

    def test_backward_needs_scalar(self):
        x = Tensor([1.0, 2.0], requires_grad=True)
        with Tape():
            out = x * 2.0
        self.assertRaises(exceptions.ShapeError, out.backward)

    def test_no_grad_records_nothing(self):
        x = Tensor([1.0], requires_grad=True)
        with Tape() as tape:
            with no_grad():
                out = ops.exp(x)
        self.assertEqual(0, len(tape))
        self.assertIsNone(out.tape)

    def test_check_finite(self):
        t = Tensor([1.0, np.inf], name='weights')
        with self.assertRaises(exceptions.NonFiniteError) as ctx:
            t.check_finite('layer')
        self.assertIn('weights', str(ctx.exception))


class GradcheckTests(test.TestCase):
    """Analytic gradients of every op against central differences."""

    def _check(self, fn, *arrays, **kwargs):
        self.assertLess(gradcheck.gradcheck(fn, arrays, **kwargs), 1e-3)

    def _weights(self, shape):
        return self.rng.standard_normal(shape)

    def test_elementwise_binary(self):
        a = self.rng.standard_normal((3, 4))
        b = self.rng.uniform(0.5, 2.0, (3, 4))
        w = self._weights((3, 4))
        for op in (ops.add, ops.sub, ops.mul, ops.div):
            self._check(lambda x, y: ops.sum(op(x, y) * w), a, b)

    def test_scalar_operands(self):
        a = self.rng.standard_normal(5)
        self._check(lambda x: ops.sum(ops.sub(2.0, x) * 3.0 / 1.5), a)

    def test_elementwise_unary(self):
        a = self.rng.uniform(0.2, 1.5, (2, 3)) * self.rng.choice([-1, 1],
                                                                (2, 3))
        w = self._weights((2, 3))
        for op in (ops.neg, ops.abs, ops.tanh, ops.exp, ops.sigmoid,
                   ops.softplus, ops.relu, ops.square):
            self._check(lambda x: ops.sum(op(x) * w), a)

    def test_log(self):
        a = self.rng.uniform(0.5, 3.0, (4,))
        w = self._weights(4)
        self._check(lambda x: ops.sum(ops.log(x) * w), a)

    def test_matmul(self):
        a = self.rng.standard_normal((3, 4))
        b = self.rng.standard_normal((4, 2))
        w = self._weights((3, 2))
        self._check(lambda x, y: ops.sum(ops.matmul(x, y) * w), a, b)

    def test_conv2d(self):
        x = self.rng.standard_normal((2, 4, 4, 2))
        k = self.rng.standard_normal((3, 3, 2, 3))
        b = self.rng.standard_normal(3)
        w = self._weights((2, 4, 4, 3))
        self._check(lambda x_, k_, b_: ops.sum(ops.conv2d(x_, k_, b_) * w),
                    x, k, b)

    def test_reductions(self):
        a = self.rng.standard_normal((2, 3, 4))
        w = self._weights((2, 4))
        self._check(lambda x: ops.sum(ops.sum(x, axis=1) * w), a)
        self._check(lambda x: ops.sum(ops.mean(x, axis=1) * w), a)
        self._check(lambda x: ops.mean(ops.square(x)), a)
        w2 = self._weights((2,))
        self._check(lambda x: ops.sum(ops.mean(x, axis=(1, 2)) * w2), a)

    def test_shape_ops(self):
        a = self.rng.standard_normal((2, 3, 4))
        w = self._weights((4, 2, 3))
        self._check(lambda x: ops.sum(ops.transpose(x, (2, 0, 1)) * w), a)
        w = self._weights((6, 4))
        self._check(lambda x: ops.sum(ops.reshape(x, (6, 4)) * w), a)

    def test_broadcast_to(self):
        a = self.rng.standard_normal((1, 3))
        w = self._weights((2, 4, 3))
        self._check(lambda x: ops.sum(ops.broadcast_to(x, (2, 4, 3)) * w), a)

    def test_getitem_split_concat(self):
        a = self.rng.standard_normal((2, 5))
        b = self.rng.standard_normal((2, 3))
        w1 = self._weights((2, 2))
        w2 = self._weights((2, 6))

        def fn(x, y):
            left, right = ops.split(x, [2, 3])
            joined = ops.concat([right, y], axis=-1)
            return ops.sum(left * w1) + ops.sum(joined * w2)

        self._check(fn, a, b)
        w3 = self._weights((2, 3))
        self._check(lambda x: ops.sum(x[:, 1:4] * w3), a)

    def test_composite_graph(self):
        x = self.rng.standard_normal((1, 4, 4, 2))
        k = self.rng.standard_normal((3, 3, 2, 2)) * 0.3

        def fn(x_, k_):
            h = ops.tanh(ops.conv2d(x_, k_))
            return ops.mean(ops.softplus(h * x_) + ops.exp(h))

        self._check(fn, x, k)


class AdamTests(test.TestCase):

    def test_zero_gradient_leaves_params(self):
        params = [np.array([1.0, -2.0])]
        state = AdamState.for_params(params)
        adam_step(params, [np.zeros(2)], state)
        self.assertArrayEqual(params[0], [1.0, -2.0])
        self.assertEqual(1, state.step)

    def test_constant_gradient_moves_against_sign(self):
        params = [np.array([0.0, 0.0])]
        state = AdamState.for_params(params, lr=0.01)
        for _ in range(50):
            adam_step(params, [np.array([1.0, -1.0])], state)
        self.assertLess(params[0][0], 0.0)
        self.assertGreater(params[0][1], 0.0)
        self.assertEqual(50, state.step)

    def test_single_step_decreases_square(self):
        w = Tensor([1.0], requires_grad=True, name='w')
        optimizer = Adam([('w', w)], lr=1e-3)
        with Tape():
            loss = ops.sum(ops.square(w))
        before = loss.item()
        loss.backward()
        optimizer.step()
        self.assertLess(float(w.data[0] ** 2), before)

    def test_nan_gradient_names_parameter(self):
        params = [np.zeros(2)]
        state = AdamState.for_params(params)
        with self.assertRaises(exceptions.NonFiniteError) as ctx:
            adam_step(params, [np.array([np.nan, 0.0])], state,
                      names=['coupling.w1'])
        self.assertIn('coupling.w1', str(ctx.exception))
        self.assertEqual(0, state.step)

    def test_shape_mismatch(self):
        params = [np.zeros(2)]
        state = AdamState.for_params(params)
        self.assertRaises(exceptions.ShapeError, adam_step, params,
                          [np.zeros(3)], state)

    def test_clip_grad_norm(self):
        a = Tensor([0.0, 0.0])
        b = Tensor([0.0])
        a.grad = np.array([3.0, 0.0], dtype=np.float32)
        b.grad = np.array([4.0], dtype=np.float32)
        norm = clip_grad_norm([a, b], 1.0)
        self.assertAlmostEqual(5.0, norm, places=5)
        self.assertAllClose(a.grad, [0.6, 0.0], atol=1e-6)
        self.assertAllClose(b.grad, [0.8], atol=1e-6)
