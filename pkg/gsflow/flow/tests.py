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

import math

import numpy as np

from gsflow.autodiff import gradcheck
from gsflow.autodiff import no_grad
from gsflow.autodiff import ops
from gsflow.autodiff import Tensor
from gsflow import exceptions
from gsflow.flow import checkpoint
from gsflow.flow import layers
from gsflow.flow.latent import MultiScaleLatent
from gsflow.flow.model import FlowModel
from gsflow.test import helpers as test


def perturb(model_or_step, rng, scale=0.1):
    """Move every block away from the identity."""
    steps = (model_or_step.all_steps()
             if isinstance(model_or_step, FlowModel) else [model_or_step])
    for step in steps:
        step.actnorm.logs.data[...] = rng.uniform(-scale, scale,
                                                  step.actnorm.logs.shape)
        step.actnorm.bias.data[...] = rng.uniform(-scale, scale,
                                                  step.actnorm.bias.shape)
        step.actnorm.initialized = True
        step.coupling.w2.data[...] = rng.normal(
            0.0, 0.05, step.coupling.w2.shape)
        step.coupling.b2.data[...] = rng.normal(
            0.0, 0.05, step.coupling.b2.shape)


def dense_jacobian_logdet(fn, x, h=1e-5):
    flat = x.reshape(-1).copy()
    columns = []
    for i in range(flat.size):
        up = flat.copy()
        up[i] += h
        down = flat.copy()
        down[i] -= h
        columns.append((fn(up.reshape(x.shape)) -
                        fn(down.reshape(x.shape))) / (2 * h))
    return np.linalg.slogdet(np.stack(columns, axis=1))[1]


class SqueezeTests(test.TestCase):

    def test_block_order(self):
        x = Tensor(np.array([[1.0, 2.0], [3.0, 4.0]]).reshape(1, 2, 2, 1))
        out = layers.squeeze(x)
        self.assertEqual((1, 1, 1, 4), out.shape)
        self.assertArrayEqual(out.data.reshape(-1), [1, 2, 3, 4])

    def test_roundtrip_is_exact(self):
        x = Tensor(self.rng.standard_normal((2, 4, 6, 3)))
        self.assertBitIdentical(layers.unsqueeze(layers.squeeze(x)).data,
                                x.data)

    def test_preserves_elements(self):
        x = Tensor(self.rng.standard_normal((1, 4, 4, 3)))
        self.assertArrayEqual(np.sort(layers.squeeze(x).data.reshape(-1)),
                              np.sort(x.data.reshape(-1)))

    def test_odd_dims(self):
        self.assertRaises(exceptions.ShapeError, layers.squeeze,
                          Tensor(np.zeros((1, 3, 4, 3))))


class FlowStepTests(test.TestCase):

    def test_actnorm_identity(self):
        actnorm = layers.ActNorm(4)
        x = Tensor(self.rng.standard_normal((2, 3, 3, 4)))
        y, logdet = actnorm.forward(x)
        self.assertAllClose(y.data, x.data)
        self.assertArrayEqual(logdet.data, [0.0, 0.0])

    def test_actnorm_data_init_standardises(self):
        actnorm = layers.ActNorm(3)
        actnorm.pending_init = True
        x = Tensor(self.rng.normal(2.0, 3.0, (8, 4, 4, 3)))
        with no_grad():
            y, _ = actnorm.forward(x)
        self.assertTrue(actnorm.initialized)
        flat = y.data.reshape(-1, 3)
        self.assertAllClose(flat.mean(axis=0), np.zeros(3), atol=1e-4)
        self.assertAllClose(flat.std(axis=0), np.ones(3), atol=1e-3)

    def test_inverse_recovers_input(self):
        step = layers.FlowStep(12, 8, self.rng)
        perturb(step, self.rng)
        x = Tensor(self.rng.standard_normal((2, 4, 4, 12)))
        with no_grad():
            y, _ = step.forward(x)
            back = step.inverse(y)
        self.assertLess(np.max(np.abs(back.data - x.data)), 1e-4)

    def test_logdet_matches_dense_jacobian(self):
        step = layers.FlowStep(4, 4, self.rng)
        perturb(step, self.rng, scale=0.3)
        x = self.rng.standard_normal((1, 2, 2, 4))

        def fn(value):
            with no_grad():
                y, _ = step.forward(Tensor(value, dtype=np.float64))
            return y.data.reshape(-1)

        with no_grad():
            _, logdet = step.forward(Tensor(x, dtype=np.float64))
        self.assertAlmostEqual(dense_jacobian_logdet(fn, x),
                               float(logdet.data[0]), delta=1e-2)

    def test_invconv_logdet_matches_determinant(self):
        for channels in (2, 4, 8, 12):
            invconv = layers.InvConv1x1(channels, self.rng)
            invconv.log_s.data[...] += self.rng.uniform(-0.2, 0.2, channels)
            weight = invconv.weight().data.astype(np.float64)
            self.assertAlmostEqual(np.linalg.slogdet(weight)[1],
                                   float(invconv.logabsdet().data),
                                   places=4)

    def test_non_finite_names_block(self):
        step = layers.FlowStep(4, 4, self.rng, name='level0.step0')
        step.actnorm.logs.data[0] = 1000.0
        with self.assertRaises(exceptions.NonFiniteError) as ctx:
            with no_grad():
                step.forward(Tensor(np.ones((1, 2, 2, 4))))
        self.assertIn('level0.step0.actnorm', str(ctx.exception))


class FlowModelTests(test.TestCase):

    def setUp(self):
        super(FlowModelTests, self).setUp()
        self.model = test.small_model()

    def _images(self, n):
        return self.rng.uniform(-0.5, 0.5, (n, 8, 8, 3)).astype(np.float32)

    def test_latent_shapes_conserve_dims(self):
        model = FlowModel(height=16, width=16, levels=3, steps=1, hidden=4)
        self.assertEqual([(8, 8, 6), (4, 4, 12), (2, 2, 48)],
                         model.latent_shapes())
        self.assertEqual(16 * 16 * 3,
                         sum(int(np.prod(s)) for s in model.latent_shapes()))

    def test_forward_emits_latent_shapes(self):
        with no_grad():
            latent, logdet = self.model.forward(self._images(2))
        self.assertEqual(self.model.latent_shapes(), latent.shapes)
        self.assertEqual(8 * 8 * 3, latent.size)
        self.assertEqual((2,), logdet.shape)

    def test_image_roundtrip(self):
        images = self._images(16)
        with no_grad():
            latent, _ = self.model.forward(images)
            back = self.model.inverse(latent)
        self.assertLess(np.max(np.abs(back.data - images)), 1e-4)

    def test_latent_roundtrip(self):
        latent, image = self.model.sample(0.7, n=4, seed=3)
        with no_grad():
            again, _ = self.model.forward(image)
        for z, z2 in zip(latent.levels, again.levels):
            self.assertLess(np.max(np.abs(z.data - z2.data)), 1e-4)

    def test_total_logdet_is_sum_of_steps(self):
        per_step = []
        with no_grad():
            _, total = self.model.forward(self._images(3), per_step)
        self.assertEqual(len(self.model.all_steps()), len(per_step))
        self.assertAllClose(total.data,
                            np.sum([s.data for s in per_step], axis=0),
                            atol=1e-4)

    def test_model_logdet_matches_dense_jacobian(self):
        model = FlowModel(height=4, width=4, levels=2, steps=1, hidden=4,
                          seed=5)
        perturb(model, self.rng)

        def fn(value):
            with no_grad():
                latent, _ = model.forward(Tensor(value, dtype=np.float64))
            return latent.flatten()[0]

        for _ in range(8):
            x = self.rng.uniform(-0.5, 0.5, (1, 4, 4, 3))
            with no_grad():
                _, logdet = model.forward(Tensor(x, dtype=np.float64))
            self.assertAlmostEqual(dense_jacobian_logdet(fn, x),
                                   float(logdet.data[0]), delta=1e-2)

    def test_wrong_image_dims(self):
        self.assertRaises(exceptions.ShapeError, self.model.forward,
                          np.zeros((1, 16, 16, 3), dtype=np.float32))

    def test_inverse_names_bad_level(self):
        latent, _ = self.model.sample(0.5, seed=0)
        latent.levels[1] = Tensor(np.zeros((1, 3, 3, 12)))
        with self.assertRaises(exceptions.ShapeError) as ctx:
            self.model.inverse(latent)
        self.assertIn('level 1', str(ctx.exception))

    def test_inverse_gradient(self):
        shapes = self.model.latent_shapes()
        arrays = [self.rng.normal(0.0, 0.7, (1,) + s) for s in shapes]
        w = self.rng.standard_normal((1, 8, 8, 3))

        def fn(*levels):
            image = self.model.inverse(MultiScaleLatent(list(levels)))
            return ops.sum(image * w)

        error = gradcheck.gradcheck(fn, arrays, coords=range(0, 96, 6))
        self.assertLess(error, 1e-3)

    def test_inverse_is_deterministic(self):
        latent, _ = self.model.sample(0.7, seed=11)
        with no_grad():
            first = self.model.inverse(latent).data
            second = self.model.inverse(latent.copy()).data
        self.assertBitIdentical(first, second)

    def test_log_likelihood_at_identity_init(self):
        model = FlowModel(height=8, width=8, levels=2, steps=2, hidden=4)
        x = self.rng.normal(0.0, 0.3, (2, 8, 8, 3)).astype(np.float32)
        with no_grad():
            log_p = model.log_likelihood(x).data
        expected = (-0.5 * np.sum(x.astype(np.float64) ** 2, axis=(1, 2, 3)) -
                    0.5 * math.log(2 * math.pi) * x[0].size)
        self.assertAllClose(log_p, expected, atol=1e-2, rtol=1e-4)

    def test_bits_per_dim_is_finite(self):
        with no_grad():
            bpd = self.model.bits_per_dim(self._images(4)).data
        self.assertTrue(np.all(np.isfinite(bpd)))
        self.assertTrue(np.all(bpd > 0))

    def test_sample_rejects_non_positive_temperature(self):
        self.assertRaises(exceptions.ConfigError, self.model.sample, 0.0)
        self.assertRaises(exceptions.ConfigError, self.model.sample, -1.0)

    def test_sample_is_seeded(self):
        first, image1 = self.model.sample(0.7, n=2, seed=42)
        second, image2 = self.model.sample(0.7, n=2, seed=42)
        self.assertBitIdentical(first.flatten(), second.flatten())
        self.assertBitIdentical(image1.data, image2.data)

    def test_sample_variance(self):
        delta = 0.7
        latent, _ = self.model.sample(delta, n=600, seed=1)
        variance = float(np.var(latent.flatten().astype(np.float64)))
        self.assertLess(abs(variance - delta ** 2), 0.05 * delta ** 2)

    def test_small_temperature_limit(self):
        latent, image = self.model.sample(1e-12, seed=0)
        zeros = MultiScaleLatent([Tensor(np.zeros(z.shape))
                                  for z in latent.levels])
        with no_grad():
            expected = self.model.inverse(zeros).data
        self.assertLess(np.max(np.abs(latent.flatten())), 1e-10)
        self.assertAllClose(image.data, expected, atol=1e-6)


class LatentTests(test.TestCase):

    def test_flatten_unflatten(self):
        shapes = [(4, 4, 6), (2, 2, 24)]
        flat = self.rng.standard_normal((3, 192)).astype(np.float32)
        latent = MultiScaleLatent.unflatten(flat, shapes)
        self.assertEqual(shapes, latent.shapes)
        self.assertBitIdentical(latent.flatten(), flat)
        self.assertBitIdentical(latent.take(1).flatten(), flat[1:2])

    def test_unflatten_size_mismatch(self):
        self.assertRaises(exceptions.ShapeError,
                          MultiScaleLatent.unflatten, np.zeros(10),
                          [(2, 2, 3)])

    def test_mean(self):
        flat = np.stack([np.arange(12.0), -np.arange(12.0)])
        latent = MultiScaleLatent.unflatten(flat.astype(np.float32),
                                            [(2, 2, 3)])
        self.assertArrayEqual(latent.mean().flatten(), np.zeros((1, 12)))


class CheckpointTests(test.TestCase):

    def test_roundtrip_is_bit_exact(self):
        model = test.small_model(seed=2)
        perturb(model, self.rng)
        restored = checkpoint.loads(checkpoint.dumps(model))
        self.assertEqual(repr(model), repr(restored))
        self.assertTrue(restored.initialized)
        for (name, a), (_, b) in zip(model.parameters(),
                                     restored.parameters()):
            self.assertBitIdentical(a.data, b.data)
        image = self.rng.uniform(-0.5, 0.5, (2, 8, 8, 3))
        with no_grad():
            self.assertBitIdentical(model.forward(image)[0].flatten(),
                                    restored.forward(image)[0].flatten())

    def test_save_and_load(self):
        model = test.small_model(seed=3)
        path = self.mkdtemp() + '/flow.ckpt'
        checkpoint.save(model, path)
        with open(path, 'rb') as handle:
            self.assertEqual(checkpoint.dumps(model), handle.read())
        self.assertEqual(repr(model), repr(checkpoint.load(path)))

    def test_bad_magic(self):
        data = checkpoint.dumps(test.small_model())
        self.assertRaises(exceptions.CheckpointError, checkpoint.loads,
                          b'XXXX' + data[4:])

    def test_truncated_payload(self):
        data = checkpoint.dumps(test.small_model())
        self.assertRaises(exceptions.CheckpointError, checkpoint.loads,
                          data[:-4])

    def test_missing_file(self):
        self.assertRaises(exceptions.CheckpointError, checkpoint.load,
                          self.mkdtemp() + '/missing.ckpt')
