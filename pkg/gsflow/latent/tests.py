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

from gsflow.autodiff import gradcheck
from gsflow.autodiff import no_grad
from gsflow.autodiff import ops
from gsflow.autodiff import Tensor
from gsflow import exceptions
from gsflow.flow import checkpoint
from gsflow.flow.latent import MultiScaleLatent
from gsflow.flow.model import to_model_domain
from gsflow.latent import assessor as assessor_mod
from gsflow.latent import optimizer
from gsflow.test import helpers as test
from gsflow.training import datasets
from gsflow.training import trainer


def noise_dataset(seed, n, dims=(8, 8)):
    rng = np.random.default_rng(seed)
    images = rng.integers(0, 256, (n,) + dims + (3,)).astype(np.float32)
    return datasets.Dataset(images, datasets.split_tags(n, 0.0), 'noise')


class BrokenAssessor(object):
    """Scores every image -inf so every gradient is NaN."""

    def score(self, image):
        x = image if isinstance(image, Tensor) else Tensor(image)
        flat = ops.reshape(ops.log(ops.abs(x * 0.0)), (x.shape[0], -1))
        return ops.sum(flat, axis=1)


class AssessorTests(test.TestCase):

    @classmethod
    def setUpClass(cls):
        super(AssessorTests, cls).setUpClass()
        cls.real = datasets.synth_dataset(1, 60, dims=(8, 8))
        cls.fake = noise_dataset(2, 60)
        cls.assessor = assessor_mod.train_assessor(
            cls.real, cls.fake, epochs=15, lr=1e-2, seed=0)

    def _scores(self, images):
        with no_grad():
            return self.assessor.score(to_model_domain(images)).data

    def test_sign_convention(self):
        self.assertGreater(self._scores(self.real.images).mean(), 0.0)
        self.assertLess(self._scores(self.fake.images).mean(), 0.0)

    def test_heldout_accuracy(self):
        self.assertGreater(self.assessor.heldout_accuracy, 0.8)

    def test_score_shape_and_dims(self):
        scores = self._scores(self.real.images[:5])
        self.assertEqual((5,), scores.shape)
        self.assertTrue(np.all(np.isfinite(scores)))
        self.assertRaises(exceptions.ShapeError, self.assessor.score,
                          np.zeros((1, 16, 16, 3), dtype=np.float32))

    def test_single_class_input(self):
        empty = self.fake.images[:0]
        self.assertRaises(exceptions.DatasetError,
                          assessor_mod.train_assessor, self.real, empty)
        self.assertRaises(exceptions.DatasetError,
                          assessor_mod.train_assessor, empty, self.fake)

    def test_dims_must_match(self):
        other = noise_dataset(3, 8, dims=(16, 16))
        self.assertRaises(exceptions.ShapeError,
                          assessor_mod.train_assessor, self.real, other)

    def test_save_and_load(self):
        path = self.mkdtemp() + '/assessor.ckpt'
        assessor_mod.save(self.assessor, path)
        restored = assessor_mod.load(path)
        images = to_model_domain(self.real.images[:4])
        with no_grad():
            self.assertBitIdentical(self.assessor.score(images).data,
                                    restored.score(images).data)

    def test_load_rejects_flow_checkpoint(self):
        path = self.mkdtemp() + '/flow.ckpt'
        checkpoint.save(test.small_model(), path)
        self.assertRaises(exceptions.CheckpointError, assessor_mod.load,
                          path)

    def test_generated_dataset(self):
        model = test.small_model()
        data = assessor_mod.generated_dataset(model, 6, 0.7, seed=4)
        self.assertEqual(6, len(data))
        self.assertEqual((8, 8), data.dims)
        self.assertGreaterEqual(data.images.min(), 0)
        self.assertLessEqual(data.images.max(), 255)


class LatentSearchTests(test.TestCase):

    @classmethod
    def setUpClass(cls):
        super(LatentSearchTests, cls).setUpClass()
        cls.model = test.small_model(seed=1)
        cls.real = datasets.synth_dataset(7, 40, dims=(8, 8))
        generated = assessor_mod.generated_dataset(cls.model, 40, 0.7, 8)
        cls.assessor = assessor_mod.train_assessor(cls.real, generated,
                                                   epochs=5, seed=1)
        cls.images = to_model_domain(cls.real.images)

    def test_init_latent_single_image(self):
        image = self.images[:1]
        with no_grad():
            projection, _ = self.model.forward(image)
        latent = optimizer.init_latent(self.model, image)
        self.assertBitIdentical(latent.flatten(), projection.flatten())

    def test_init_latent_symmetric_pair(self):
        z, _ = self.model.sample(0.7, seed=5)
        negated = MultiScaleLatent([Tensor(-t.data) for t in z.levels])
        with no_grad():
            pair = np.concatenate([self.model.inverse(z).data,
                                   self.model.inverse(negated).data])
        latent = optimizer.init_latent(self.model, pair)
        self.assertLess(np.max(np.abs(latent.flatten())), 1e-4)

    def test_init_latent_matches_elementwise_average(self):
        images = self.images[:3]
        with no_grad():
            projections = self.model.forward(images)[0].flatten()
        expected = np.zeros(projections.shape[1])
        for j in range(projections.shape[1]):
            expected[j] = sum(float(projections[i, j]) for i in range(3)) / 3
        latent = optimizer.init_latent(self.model, images)
        self.assertAllClose(latent.flatten()[0], expected, atol=1e-6)

    def test_init_latent_dim_mismatch(self):
        self.assertRaises(exceptions.ShapeError, optimizer.init_latent,
                          self.model, np.zeros((2, 16, 16, 3)))

    def test_score_diff(self):
        self.assertEqual(2.0, optimizer.score_diff(
            [1.0, 2.0, 3.0], Tensor([0.0])).item())
        self.assertEqual(0.0, optimizer.score_diff(
            [1.0, 2.0, 3.0], Tensor([2.0])).item())
        for value in self.rng.standard_normal(10):
            self.assertGreaterEqual(optimizer.score_diff(
                self.rng.standard_normal(3), Tensor([value])).item(), 0.0)

    def test_diff_uses_assessor_score(self):
        image = self.images[:1]
        with no_grad():
            score = self.assessor.score(image).item()
            value = optimizer.diff(self.assessor, [score], image).item()
        self.assertAlmostEqual(0.0, value, places=6)

    def test_config_validation(self):
        self.assertRaises(exceptions.ConfigError, optimizer.OptConfig,
                          max_step=0)
        self.assertRaises(exceptions.ConfigError, optimizer.OptConfig, n=0)
        self.assertRaises(exceptions.ConfigError, optimizer.OptConfig,
                          epsilon=-1.0)

    def test_config_replace(self):
        config = optimizer.OptConfig(max_step=7, thresh=0.2)
        other = config.replace(seed=5)
        self.assertEqual((5, 7, 0.2), (other.seed, other.max_step,
                                       other.thresh))
        self.assertEqual(0, config.seed)
        self.assertRaises(exceptions.ConfigError, config.replace, n=0)

    def test_needs_enough_reference_images(self):
        self.assertRaises(exceptions.ConfigError, optimizer.optimize_latent,
                          self.model, self.assessor, self.images[:2],
                          optimizer.OptConfig(n=3))

    def test_zero_step_size_keeps_latent(self):
        config = optimizer.OptConfig(epsilon=0.0, max_step=5, thresh=0.0)
        result = optimizer.optimize_latent(self.model, self.assessor,
                                           self.images, config)
        self.assertEqual(5, len(result.trace))
        self.assertBitIdentical(result.latent.flatten(),
                                result.initial_latent.flatten())

    def test_infinite_threshold_stops_after_one_step(self):
        config = optimizer.OptConfig(thresh=float('inf'))
        result = optimizer.optimize_latent(self.model, self.assessor,
                                           self.images, config)
        self.assertEqual(1, len(result.trace))
        self.assertTrue(result.stopped_early)
        self.assertEqual(result.initial_latent.shapes, result.latent.shapes)

    def test_trace_ends_at_first_step_below_threshold(self):
        config = optimizer.OptConfig(max_step=30, thresh=0.5, epsilon=1e-2)
        for seed in range(3):
            result = optimizer.optimize_latent(
                self.model, self.assessor, self.images,
                config.replace(seed=seed))
            for point in result.trace[:-1]:
                self.assertGreaterEqual(point.diff, config.thresh)
            self.assertEqual(list(range(len(result.trace))),
                             [p.step for p in result.trace])

    def test_diff_trends_down(self):
        config = optimizer.OptConfig(max_step=40)
        for result in optimizer.optimize_restarts(
                self.model, self.assessor, self.images, config, 8):
            diffs = [p.diff for p in result.trace]
            quarter = max(1, len(diffs) // 4)
            self.assertLessEqual(np.median(diffs[-quarter:]),
                                 np.median(diffs[:quarter]))

    def test_restarts_use_distinct_seeds(self):
        config = optimizer.OptConfig(max_step=1, restart_noise=0.1)
        first, second = optimizer.optimize_restarts(
            self.model, self.assessor, self.images, config, 2)
        self.assertFalse(np.array_equal(first.initial_latent.flatten(),
                                        second.initial_latent.flatten()))

    def test_non_finite_gradient_returns_last_latent(self):
        config = optimizer.OptConfig(max_step=5, thresh=0.0)
        result = optimizer.optimize_latent(self.model, BrokenAssessor(),
                                           self.images, config)
        self.assertTrue(result.aborted)
        self.assertEqual(1, len(result.trace))
        self.assertBitIdentical(result.latent.flatten(),
                                result.initial_latent.flatten())

    def test_latent_gradient_matches_finite_differences(self):
        with no_grad():
            real_scores = self.assessor.score(self.images[:3]).data
        shapes = self.model.latent_shapes()
        arrays = [self.rng.normal(0.0, 0.5, (1,) + s) for s in shapes]

        def fn(*levels):
            image = self.model.inverse(MultiScaleLatent(list(levels)))
            return optimizer.score_diff(real_scores,
                                        self.assessor.score(image))

        coords = self.rng.choice(96, 16, replace=False)
        error = gradcheck.gradcheck(fn, arrays, coords=coords)
        self.assertLess(error, 1e-2)


class TrainedSearchTests(test.TestCase):
    """Latent search on a flow and assessor that have both been trained."""

    @classmethod
    def setUpClass(cls):
        super(TrainedSearchTests, cls).setUpClass()
        real = datasets.synth_dataset(7, 80, dims=(8, 8), eval_fraction=0.0)
        model = test.small_model(seed=1)
        cls.model = trainer.train(model, real, trainer.TrainConfig(
            epochs=3, batch_size=16, lr=5e-3, seed=1)).model
        generated = assessor_mod.generated_dataset(cls.model, 80, 0.7, 8)
        cls.assessor = assessor_mod.train_assessor(real, generated,
                                                   epochs=10, lr=5e-3,
                                                   seed=1)
        cls.images = to_model_domain(real.images)

    def _score(self, latent):
        with no_grad():
            return self.assessor.score(self.model.inverse(latent)).item()

    def test_search_raises_generated_score(self):
        config = optimizer.OptConfig(max_step=40)
        improved = 0
        for result in optimizer.optimize_restarts(
                self.model, self.assessor, self.images, config, 8):
            before = self._score(result.initial_latent)
            after = self._score(result.latent)
            if after >= before:
                improved += 1
        self.assertGreaterEqual(improved, 6)
