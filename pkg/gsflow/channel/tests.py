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

from gsflow.channel import experiments
from gsflow.channel import images
from gsflow.channel import pipeline
from gsflow.channel import steganalysis
from gsflow.codec import embedding
from gsflow.codec import plan as plan_mod
from gsflow import exceptions
from gsflow.flow.model import to_model_domain
from gsflow.flow.model import to_pixels
from gsflow.test import helpers as test
from gsflow.training import datasets


class ChannelTests(test.TestCase):

    def test_float_channel_is_identity(self):
        image = self.rng.uniform(-0.7, 0.7, (1, 4, 4, 3)).astype(np.float32)
        self.assertBitIdentical(pipeline.apply_channel(image, 'float'),
                                image)

    def test_u8_clips_and_rounds(self):
        pixels = np.array([255.7, -3.0, 100.2, 100.8, 7.0, 0.0])
        image = to_model_domain(pixels.reshape(1, 1, 2, 3))
        received = to_pixels(pipeline.apply_channel(image, 'u8'))
        self.assertAllClose(received.reshape(-1),
                            [255, 0, 100, 101, 7, 0], atol=1e-3)

    def test_u8_idempotent(self):
        image = self.rng.uniform(-0.6, 0.6, (1, 4, 4, 3))
        once = pipeline.apply_channel(image, pipeline.U8)
        self.assertBitIdentical(pipeline.apply_channel(once, pipeline.U8),
                                once)

    def test_unknown_channel(self):
        self.assertRaises(exceptions.ConfigError, pipeline.Channel, 'jpeg')
        self.assertTrue(pipeline.get_channel('float').lossless)
        self.assertFalse(pipeline.get_channel('u8').lossless)


class AccTests(test.TestCase):

    def test_identical_and_complement(self):
        secret = self.rng.integers(0, 2, 500)
        self.assertEqual(1.0, pipeline.acc(secret, secret))
        self.assertEqual(0.0, pipeline.acc(secret, 1 - secret))

    def test_independent_bits(self):
        a = self.rng.integers(0, 2, 100000)
        b = self.rng.integers(0, 2, 100000)
        self.assertAlmostEqual(0.5, pipeline.acc(a, b), delta=0.01)

    def test_payload_objects_and_empty(self):
        payload = embedding.Payload([1, 0, 1, 1])
        self.assertEqual(0.75, pipeline.acc(payload, [1, 0, 1, 0]))
        self.assertIsNone(pipeline.acc([], []))
        self.assertRaises(exceptions.ShapeError, pipeline.acc, [1], [1, 0])


class RoundTripTests(test.TestCase):

    def setUp(self):
        super(RoundTripTests, self).setUp()
        self.model = test.small_model(seed=3)

    def test_float_channel_keeps_sign_and_top_bit(self):
        latent, _ = self.model.sample(0.7, seed=2)
        plan = plan_mod.parse_plan('S,22,22')
        payload = embedding.random_payload(
            embedding.capacity(latent, plan), seed=2)
        result = pipeline.roundtrip(self.model, latent, payload, plan,
                                    'float')
        self.assertGreater(result.acc, 0.95)
        self.assertEqual(len(payload), len(result.payload))
        self.assertEqual((1, 8, 8, 3), result.stego_image.shape)

    def test_zero_payload(self):
        latent, _ = self.model.sample(0.7, seed=2)
        result = pipeline.roundtrip(self.model, latent, [],
                                    plan_mod.parse_plan('S,0,22'), 'u8')
        self.assertIsNone(result.acc)
        self.assertBitIdentical(result.stego_latent.flatten(),
                                latent.flatten())

    def test_plane_profile(self):
        lossless = experiments.plane_profile(self.model, 'float', trials=2)
        self.assertEqual(len(pipeline.PLANES), len(lossless))
        self.assertGreaterEqual(lossless[0], 0.99)
        lossy = experiments.plane_profile(self.model, 'u8', trials=64)
        self.assertTrue(np.all((lossy >= 0) & (lossy <= 1)))
        # index 1 + k holds fraction bit k
        low = lossy[1:5]
        high = lossy[20:24]
        self.assertGreater(lossy[0], lossy[1])
        self.assertGreater(np.mean(high), np.mean(low) + 0.1)
        self.assertTrue(np.all(np.diff(high) >= -0.01), high)

    def test_plane_agreement_of_identical_latents(self):
        latent, _ = self.model.sample(0.7, seed=4)
        self.assertArrayEqual(np.ones(len(pipeline.PLANES)),
                              pipeline.plane_agreement(latent, latent))


class ImageFileTests(test.TestCase):

    def test_npy_is_lossless(self):
        image = self.rng.uniform(-0.9, 0.9, (1, 4, 4, 3)).astype(np.float32)
        path = self.mkdtemp() + '/stego.npy'
        images.save_image(path, image)
        self.assertBitIdentical(images.load_image(path), image)

    def test_png_matches_u8_channel(self):
        image = self.rng.uniform(-0.7, 0.7, (1, 4, 4, 3)).astype(np.float32)
        path = self.mkdtemp() + '/stego.png'
        images.save_image(path, image)
        self.assertBitIdentical(images.load_image(path),
                                pipeline.apply_channel(image, 'u8'))

    def test_errors(self):
        directory = self.mkdtemp()
        self.assertRaises(exceptions.ConfigError, images.load_image,
                          directory + '/absent.png')
        with open(directory + '/bad.png', 'wb') as handle:
            handle.write(b'not a png')
        self.assertRaises(exceptions.DatasetError, images.load_image,
                          directory + '/bad.png')
        self.assertRaises(exceptions.ShapeError, images.save_image,
                          directory + '/two.npy', np.zeros((2, 4, 4, 3)))


class DetectionErrorTests(test.TestCase):

    def test_identical_sets(self):
        scores = self.rng.standard_normal(200)
        self.assertEqual(0.5, steganalysis.pe_from_scores(scores, scores).pe)

    def test_separated_sets(self):
        report = steganalysis.pe_from_scores(self.rng.uniform(0, 1, 50),
                                             self.rng.uniform(2, 3, 50))
        self.assertEqual(0.0, report.pe)
        self.assertEqual(1.0, report.auc)
        self.assertTrue(1.0 < report.threshold < 2.0)

    def test_gaussian_overlap(self):
        report = steganalysis.pe_from_scores(
            self.rng.normal(0.0, 1.0, 20000), self.rng.normal(2.0, 1.0, 20000))
        self.assertAlmostEqual(0.1587, report.pe, delta=0.02)

    def test_sweep_matches_direct_count(self):
        cover = self.rng.integers(0, 10, 40).astype(float)
        stego = self.rng.integers(3, 13, 30).astype(float)
        thresholds, p_fa, p_md = steganalysis.sweep(cover, stego)
        for t, fa, md in zip(thresholds, p_fa, p_md):
            self.assertAlmostEqual(np.mean(cover > t), fa)
            self.assertAlmostEqual(np.mean(stego <= t), md)
        self.assertEqual(-np.inf, thresholds[0])
        self.assertEqual(np.inf, thresholds[-1])

    def test_empty_scores(self):
        self.assertRaises(exceptions.DatasetError,
                          steganalysis.pe_from_scores, [], [1.0])


class SteganalyzerTests(test.TestCase):

    def setUp(self):
        super(SteganalyzerTests, self).setUp()
        self.cover = to_model_domain(
            datasets.synth_dataset(5, 40, dims=(8, 8)).images)

    def test_zero_payload_is_undetectable(self):
        classifier = steganalysis.train_steganalyzer(self.cover,
                                                     self.cover.copy())
        self.assertEqual(0.5, steganalysis.pe(classifier).pe)

    def test_detects_heavy_noise(self):
        noise = self.rng.uniform(-0.1, 0.1, self.cover.shape)
        stego = (self.cover + noise).astype(np.float32)
        report = steganalysis.pe(
            steganalysis.train_steganalyzer(self.cover, stego))
        self.assertLess(report.pe, 0.1)

    def test_feature_rows(self):
        features = steganalysis.residual_features(self.cover[:3])
        self.assertEqual(3, len(features))
        self.assertTrue(np.all(np.isfinite(features)))

    def test_needs_two_images_per_class(self):
        self.assertRaises(exceptions.DatasetError,
                          steganalysis.train_steganalyzer, self.cover[:1],
                          self.cover[:1])
        self.assertRaises(exceptions.ShapeError,
                          steganalysis.train_steganalyzer, self.cover,
                          np.zeros((4, 4, 4, 3), dtype=np.float32))


class ExperimentTests(test.TestCase):

    plans = ('none', 'S', 'S,0,22')

    def setUp(self):
        super(ExperimentTests, self).setUp()
        self.model = test.small_model(seed=6)

    def test_rows_and_baseline(self):
        rows = experiments.run_table(self.model, plans=self.plans, trials=2)
        self.assertEqual(len(self.plans) * len(pipeline.CHANNELS), len(rows))
        for row in rows:
            plan = plan_mod.parse_plan(row.plan)
            _, bpp = plan_mod.plan_capacity(plan, self.model.latent_shapes(),
                                            self.model.image_shape)
            self.assertEqual(bpp, row.bpp)
            if row.plan == 'none':
                self.assertIsNone(row.acc_mean)
                self.assertEqual(0.0, row.bpp)
            else:
                self.assertTrue(0.0 <= row.acc_mean <= 1.0)

    def test_deterministic(self):
        first = experiments.run_table(self.model, plans=self.plans,
                                      trials=2, seed=11)
        second = experiments.run_table(self.model, plans=self.plans,
                                       trials=2, seed=11)
        self.assertEqual([r.acc_mean for r in first],
                         [r.acc_mean for r in second])

    def test_optimized_source(self):
        self.assertRaises(exceptions.ConfigError, experiments.run_table,
                          self.model, sources=(experiments.OPTIMIZED,))
        latent, _ = self.model.sample(0.5, seed=1)
        rows = experiments.run_table(
            self.model, plans=('S',), channels=('float',), trials=2,
            sources=(experiments.RANDOM, experiments.OPTIMIZED),
            optimized=latent)
        self.assertEqual([experiments.RANDOM, experiments.OPTIMIZED],
                         [r.source for r in rows])

    def test_channel_and_plane_ordering(self):
        rows = experiments.run_table(self.model,
                                     plans=('S', '22,22', '0,22'),
                                     trials=32, seed=2)
        acc = {(r.plan, r.channel): r.acc_mean for r in rows}
        for plan in ('S', '22:22', '0:22'):
            self.assertGreaterEqual(acc[(plan, 'float')], acc[(plan, 'u8')])
        self.assertGreaterEqual(acc[('22:22', 'float')],
                                acc[('0:22', 'float')] - 0.02)
        self.assertGreaterEqual(acc[('22:22', 'float')], 0.95)
