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

import os

import numpy as np
from PIL import Image

from gsflow.autodiff import no_grad
from gsflow import exceptions
from gsflow.flow import checkpoint
from gsflow.flow.model import FlowModel
from gsflow.flow.model import to_model_domain
from gsflow.test import helpers as test
from gsflow.training import datasets
from gsflow.training import trainer


def write_png(path, array):
    Image.fromarray(np.asarray(array, dtype=np.uint8), 'RGB').save(path)


def tiny_model(seed=0):
    return FlowModel(height=8, width=8, levels=2, steps=2, hidden=8,
                     seed=seed)


class DatasetTests(test.TestCase):

    def test_synthetic_is_seeded(self):
        first = datasets.ingest_images('synthetic:seed=7,n=256,size=8x8')
        second = datasets.ingest_images('synthetic:seed=7,n=256,size=8x8')
        self.assertEqual(256, len(first))
        self.assertEqual((8, 8), first.dims)
        self.assertBitIdentical(first.images, second.images)

    def test_synthetic_images_are_varied(self):
        data = datasets.synth_dataset(3, 32, dims=(16, 16))
        variances = data.images.var(axis=(1, 2))
        self.assertTrue(np.all(variances > 0))
        self.assertGreaterEqual(len(np.unique(data.images)), 100)
        self.assertGreaterEqual(data.images.min(), 0)
        self.assertLessEqual(data.images.max(), 255)

    def test_split_tags(self):
        tags = datasets.split_tags(20, 0.1)
        self.assertEqual([datasets.TRAIN] * 18 + [datasets.EVAL] * 2, tags)
        self.assertEqual([datasets.TRAIN] * 5, datasets.split_tags(5, 0.0))

    def test_malformed_synthetic_spec(self):
        self.assertRaises(exceptions.DatasetError, datasets.ingest_images,
                          'synthetic:seed=x')
        self.assertRaises(exceptions.DatasetError, datasets.ingest_images,
                          'synthetic:colour=red')

    def test_empty_directory(self):
        self.assertRaises(exceptions.DatasetError, datasets.ingest_images,
                          self.mkdtemp())

    def test_directory_is_read_in_name_order(self):
        path = self.mkdtemp()
        arrays = [np.full((4, 4, 3), value) for value in (30, 10, 20)]
        for name, array in zip(('c.png', 'a.png', 'b.png'), arrays):
            write_png(os.path.join(path, name), array)
        data = datasets.ingest_images(path, eval_fraction=0.0)
        self.assertArrayEqual(data.images[:, 0, 0, 0], [10, 20, 30])

    def test_mixed_sizes_name_the_file(self):
        path = self.mkdtemp()
        write_png(os.path.join(path, 'a.png'), np.zeros((8, 8, 3)))
        write_png(os.path.join(path, 'b.png'), np.zeros((8, 8, 3)))
        write_png(os.path.join(path, 'c.png'), np.zeros((4, 4, 3)))
        with self.assertRaises(exceptions.DatasetError) as ctx:
            datasets.ingest_images(path)
        self.assertIn('c.png', str(ctx.exception))

    def test_unreadable_files_are_listed(self):
        path = self.mkdtemp()
        write_png(os.path.join(path, 'good.png'), np.zeros((4, 4, 3)))
        with open(os.path.join(path, 'bad.png'), 'wb') as handle:
            handle.write(b'not an image')
        with self.assertRaises(exceptions.DatasetError) as ctx:
            datasets.ingest_images(path)
        self.assertEqual(['bad.png'], ctx.exception.offenders)

    def test_dataset_validates_range(self):
        self.assertRaises(exceptions.DatasetError, datasets.Dataset,
                          np.full((1, 2, 2, 3), 300.0), [datasets.TRAIN])


class TrainerTests(test.TestCase):

    def setUp(self):
        super(TrainerTests, self).setUp()
        # 36 train and 4 eval images
        self.data = datasets.synth_dataset(5, 40, dims=(8, 8))

    def test_config_validation(self):
        self.assertRaises(exceptions.ConfigError, trainer.TrainConfig,
                          batch_size=0)
        self.assertRaises(exceptions.ConfigError, trainer.TrainConfig,
                          epochs=-1)
        self.assertRaises(exceptions.ConfigError, trainer.TrainConfig,
                          lr=0.0)

    def test_zero_epochs_leave_parameters(self):
        model = tiny_model()
        before = [t.data.copy() for _, t in model.parameters()]
        result = trainer.train(model, self.data, trainer.TrainConfig(
            epochs=0))
        self.assertEqual([], result.loss_curve)
        for saved, (_, tensor) in zip(before, model.parameters()):
            self.assertBitIdentical(tensor.data, saved)

    def test_loss_curve_length(self):
        config = trainer.TrainConfig(epochs=2, batch_size=16)
        result = trainer.train(tiny_model(), self.data, config)
        self.assertEqual(2 * 3, len(result.loss_curve))
        self.assertEqual([0, 0, 0, 1, 1, 1],
                         [p.epoch for p in result.loss_curve])
        self.assertEqual(list(range(6)),
                         [p.step for p in result.loss_curve])

    def test_training_lowers_eval_bits_per_dim(self):
        data = datasets.synth_dataset(6, 80, dims=(8, 8))
        config = trainer.TrainConfig(epochs=4, batch_size=16, lr=5e-3)
        result = trainer.train(tiny_model(), data, config)
        self.assertTrue(np.isfinite(result.final_eval_bpd))
        self.assertLess(result.final_eval_bpd, result.initial_eval_bpd)

    def test_training_preserves_bijectivity(self):
        config = trainer.TrainConfig(epochs=1, batch_size=16, lr=5e-3)
        model = trainer.train(tiny_model(), self.data, config).model
        images = self.data.images[:8] / 255.0 - 0.5
        latent, _ = model.forward(images)
        back = model.inverse(latent)
        self.assertLess(np.max(np.abs(back.data - images)), 1e-4)

    def test_same_seed_same_checkpoint(self):
        config = trainer.TrainConfig(epochs=1, batch_size=16, seed=3)
        first = trainer.train(tiny_model(), self.data, config).model
        second = trainer.train(tiny_model(), self.data, config).model
        self.assertEqual(checkpoint.dumps(first), checkpoint.dumps(second))

    def test_checkpoint_written(self):
        path = os.path.join(self.mkdtemp(), 'flow.ckpt')
        config = trainer.TrainConfig(epochs=1, batch_size=16)
        model = trainer.train(tiny_model(), self.data, config, path).model
        self.assertTrue(os.path.exists(path))
        with open(path, 'rb') as handle:
            self.assertEqual(checkpoint.dumps(model), handle.read())

    def test_non_finite_loss_restores_last_epoch(self):
        config = trainer.TrainConfig(epochs=2, batch_size=16, seed=1)
        reference = trainer.train(
            tiny_model(), self.data,
            trainer.TrainConfig(epochs=1, batch_size=16, seed=1)).model

        model = tiny_model()
        original = model.bits_per_dim
        calls = []

        def flaky(image):
            calls.append(1)
            # one eval call, then three steps of the first epoch
            if len(calls) > 4:
                raise exceptions.NonFiniteError('log_likelihood')
            return original(image)

        model.bits_per_dim = flaky
        self.assertRaises(exceptions.TrainingError, trainer.train, model,
                          self.data, config)
        self.assertEqual(checkpoint.dumps(reference),
                         checkpoint.dumps(model))

    def test_dims_must_match_model(self):
        data = datasets.synth_dataset(1, 8, dims=(16, 16))
        self.assertRaises(exceptions.ShapeError, trainer.train, tiny_model(),
                          data, trainer.TrainConfig(epochs=1))

    def test_evaluate_is_finite(self):
        model = test.small_model()
        value = trainer.evaluate(model, self.data.split(datasets.EVAL))
        self.assertTrue(np.isfinite(value))
        self.assertIsNone(trainer.evaluate(model, self.data.images[:0]))


class TrainedFlowTests(test.TestCase):
    """A full-size three-level flow trained for a few epochs."""

    @classmethod
    def setUpClass(cls):
        super(TrainedFlowTests, cls).setUpClass()
        # 256 train and 64 eval images
        cls.data = datasets.synth_dataset(11, 320, dims=(16, 16),
                                          eval_fraction=0.2)
        model = FlowModel(height=16, width=16, levels=3, steps=4,
                          hidden=64, seed=0)
        cls.result = trainer.train(model, cls.data, trainer.TrainConfig(
            epochs=3, batch_size=32, lr=1e-3, seed=0))
        cls.model = cls.result.model

    def test_eval_bits_per_dim_drops(self):
        self.assertEqual(64, len(self.data.split(datasets.EVAL)))
        self.assertTrue(np.isfinite(self.result.final_eval_bpd))
        self.assertGreaterEqual(
            self.result.initial_eval_bpd - self.result.final_eval_bpd, 0.5)

    def test_round_trips_stay_exact(self):
        images = to_model_domain(self.data.split(datasets.EVAL))
        with no_grad():
            latent, _ = self.model.forward(images)
            back = self.model.inverse(latent)
            again, _ = self.model.forward(back.data)
        self.assertEqual([(8, 8, 6), (4, 4, 12), (2, 2, 48)], latent.shapes)
        self.assertLess(np.max(np.abs(back.data - images)), 1e-4)
        self.assertLess(np.max(np.abs(again.flatten() - latent.flatten())),
                        1e-4)
