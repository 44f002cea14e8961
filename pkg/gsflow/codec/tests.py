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

import struct

import numpy as np

from gsflow.autodiff import Tensor
from gsflow.codec import bits
from gsflow.codec import embedding
from gsflow.codec import latent_io
from gsflow.codec import plan as plan_mod
from gsflow import exceptions
from gsflow.flow.latent import MultiScaleLatent
from gsflow.test import helpers as test

# level shapes of a 16x16 image under a three-level flow
SHAPES_16 = [(8, 8, 6), (4, 4, 12), (2, 2, 48)]
SMALL_SHAPES = [(4, 4, 6), (2, 2, 24)]

PLAN_BITS = [
    ('S', 1),
    ('S,22,22', 2),
    ('S,21,22', 3),
    ('S,12,22', 12),
    ('S,0,22', 24),
    ('22,22', 1),
    ('14,22', 9),
    ('7,22', 16),
    ('0,22', 23),
    ('none', 0),
]


def make_latent(rng, shapes=SMALL_SHAPES, scale=1.0):
    return MultiScaleLatent(
        [Tensor(rng.standard_normal((1,) + s) * scale) for s in shapes])


class BitsTests(test.TestCase):

    def test_known_words(self):
        self.assertEqual(0x3F800000, int(bits.float_to_bits([1.0])[0]))
        self.assertEqual(0xBF800000, int(bits.float_to_bits([-1.0])[0]))
        self.assertEqual(0x00000000, int(bits.float_to_bits([0.0])[0]))

    def test_matches_native_layout(self):
        values = self.rng.standard_normal(1000).astype(np.float32)
        words = bits.float_to_bits(values)
        self.assertArrayEqual(words, values.view(np.uint32))
        self.assertBitIdentical(bits.bits_to_float(words), values)

    def test_split_fields(self):
        sign, exponent, fraction = bits.split_fields(
            bits.float_to_bits([-1.5]))
        self.assertEqual(1, int(sign[0]))
        self.assertEqual(127, int(exponent[0]))
        self.assertEqual(1 << 22, int(fraction[0]))

    def test_non_finite_rejected(self):
        for value in (np.nan, np.inf, -np.inf):
            self.assertRaises(exceptions.NonFiniteError,
                              bits.float_to_bits, [1.0, value])

    def test_bit_planes(self):
        planes = bits.bit_planes(bits.float_to_bits([-1.0, 1.5]),
                                 [31, 22, 0])
        self.assertArrayEqual([[1, 0, 0], [0, 1, 0]], planes)


class PlanTests(test.TestCase):

    def test_bits_per_float(self):
        for text, expected in PLAN_BITS:
            self.assertEqual(expected, plan_mod.parse_plan(text)
                             .bits_per_float, text)

    def test_bits_per_pixel_on_16x16(self):
        cases = [('S', 3.0), ('S,0,22', 72.0), ('14,22', 27.0),
                 ('0,22', 69.0), ('none', 0.0)]
        for text, bpp in cases:
            total, per_pixel = plan_mod.plan_capacity(
                plan_mod.parse_plan(text), SHAPES_16, (16, 16))
            self.assertEqual(bpp, per_pixel, text)
            self.assertEqual(bpp * 256, total)

    def test_equality_and_hash(self):
        plan = plan_mod.parse_plan('S, 14:22')
        self.assertEqual(plan_mod.BitPlan(True, 14, 22), plan)
        self.assertNotEqual(plan_mod.BitPlan(False, 14, 22), plan)
        self.assertEqual(plan_mod.SIGN_ONLY,
                         plan_mod.BitPlan(True, 3, 9, fraction=False))
        self.assertEqual(1, len({plan, plan_mod.parse_plan('S,14,22')}))
        self.assertEqual("BitPlan('S, 14:22')", repr(plan))

    def test_parse_spellings(self):
        expected = plan_mod.BitPlan(True, 14, 22)
        for text in ('S,14,22', 'S, 14:22', 's,14,22', 'SIGN,14:22'):
            self.assertEqual(expected, plan_mod.parse_plan(text))
        self.assertEqual(plan_mod.BitPlan(False, 7, 22),
                         plan_mod.parse_plan('7:22'))
        self.assertEqual(plan_mod.SIGN_ONLY, plan_mod.parse_plan('S'))
        self.assertEqual(plan_mod.NO_EMBEDDING, plan_mod.parse_plan(''))

    def test_parse_rejects(self):
        for text in ('S,23,22', 'S,0,23', 'banana', 'S,1'):
            self.assertRaises(exceptions.ConfigError, plan_mod.parse_plan,
                              text)

    def test_descriptor(self):
        self.assertEqual('S, 0:22', plan_mod.parse_plan('S,0,22').descriptor)
        self.assertEqual('14:22', str(plan_mod.parse_plan('14,22')))
        self.assertEqual('S', plan_mod.SIGN_ONLY.descriptor)
        self.assertEqual('none', plan_mod.NO_EMBEDDING.descriptor)
        for text, _ in PLAN_BITS:
            parsed = plan_mod.parse_plan(text)
            self.assertEqual(parsed, plan_mod.parse_plan(parsed.descriptor))

    def test_fill_order(self):
        self.assertEqual([31, 22, 21, 20],
                         plan_mod.parse_plan('S,20,22').positions())
        self.assertEqual([], plan_mod.NO_EMBEDDING.positions())


class EmbeddingTests(test.TestCase):

    def test_capacity(self):
        latent = make_latent(self.rng)
        self.assertEqual(192, latent.size)
        for text, per_float in PLAN_BITS:
            self.assertEqual(192 * per_float, embedding.capacity(
                latent, plan_mod.parse_plan(text)))

    def test_round_trip_recovers_payload(self):
        for trial in range(40):
            text, _ = PLAN_BITS[trial % (len(PLAN_BITS) - 1)]
            plan = plan_mod.parse_plan(text)
            latent = make_latent(self.rng, scale=self.rng.uniform(0.1, 3.0))
            length = int(self.rng.integers(
                0, embedding.capacity(latent, plan) + 1))
            payload = embedding.random_payload(length, seed=trial)
            stego = embedding.embed(latent, payload, plan)
            self.assertArrayEqual(
                payload.bits, embedding.extract(stego, plan, length).bits)

    def test_randomized_round_trips_are_exact(self):
        plans = [plan_mod.parse_plan(text)
                 for text in ('S', 'S,0,22', '14,22', '22,22')]
        exponent = np.uint32(0x7F800000)
        for trial in range(1000):
            plan = plans[trial % len(plans)]
            planned = np.uint32(sum(1 << p for p in plan.positions()))
            latent = make_latent(self.rng, scale=self.rng.uniform(0.1, 3.0))
            length = int(self.rng.integers(
                0, embedding.capacity(latent, plan) + 1))
            payload = embedding.random_payload(length, seed=trial)
            stego = embedding.embed(latent, payload, plan)
            recovered = embedding.extract(stego, plan, length)
            self.assertEqual(0, int(np.sum(payload.bits != recovered.bits)),
                             "bit errors under %s" % plan)
            before = bits.float_to_bits(latent.flatten()[0])
            after = bits.float_to_bits(stego.flatten()[0])
            self.assertArrayEqual(before & exponent, after & exponent)
            self.assertArrayEqual(before & ~planned, after & ~planned)

    def test_exponent_and_unplanned_bits_untouched(self):
        plan = plan_mod.parse_plan('S,12,22')
        latent = make_latent(self.rng)
        payload = embedding.random_payload(1000, seed=3)
        stego = embedding.embed(latent, payload, plan)
        before = bits.float_to_bits(latent.flatten()[0])
        after = bits.float_to_bits(stego.flatten()[0])
        self.assertArrayEqual(bits.split_fields(before)[1],
                              bits.split_fields(after)[1])
        untouched = np.uint32((1 << 12) - 1)
        self.assertArrayEqual(before & untouched, after & untouched)

    def test_floats_past_payload_unchanged(self):
        plan = plan_mod.parse_plan('S,0,22')
        latent = make_latent(self.rng)
        stego = embedding.embed(latent, embedding.random_payload(50, 1),
                                plan)
        # 50 bits fill floats 0..2, the third one partially
        self.assertBitIdentical(stego.flatten()[0][3:],
                                latent.flatten()[0][3:])
        self.assertEqual(latent.shapes, stego.shapes)

    def test_sign_only_flips_one(self):
        latent = MultiScaleLatent([Tensor(np.ones((1, 1, 1, 2)))])
        stego = embedding.embed(latent, [1, 0], plan_mod.SIGN_ONLY)
        self.assertBitIdentical([-1.0, 1.0], stego.flatten()[0])

    def test_top_fraction_bit(self):
        latent = MultiScaleLatent([Tensor(np.ones((1, 1, 1, 1)))])
        stego = embedding.embed(latent, [1], plan_mod.parse_plan('22,22'))
        self.assertEqual(0x3FC00000,
                         int(bits.float_to_bits(stego.flatten()[0])[0]))
        self.assertEqual(1.5, float(stego.flatten()[0][0]))

    def test_empty_payload(self):
        latent = make_latent(self.rng)
        plan = plan_mod.parse_plan('S,0,22')
        stego = embedding.embed(latent, [], plan)
        self.assertBitIdentical(stego.flatten(), latent.flatten())
        self.assertEqual(0, len(embedding.extract(stego, plan, 0)))

    def test_overflow(self):
        latent = make_latent(self.rng)
        plan = plan_mod.parse_plan('S,21,22')
        total = embedding.capacity(latent, plan)
        with self.assertRaises(exceptions.CapacityError) as ctx:
            embedding.embed(latent, embedding.random_payload(total + 1),
                            plan)
        self.assertEqual(total, ctx.exception.capacity)
        self.assertRaises(exceptions.CapacityError, embedding.embed,
                          latent, [1], plan_mod.NO_EMBEDDING)
        self.assertRaises(exceptions.CapacityError, embedding.extract,
                          latent, plan, total + 1)

    def test_batch_latent_rejected(self):
        latent = MultiScaleLatent([Tensor(np.ones((2, 1, 1, 1)))])
        self.assertRaises(exceptions.ShapeError, embedding.embed, latent,
                          [1], plan_mod.SIGN_ONLY)

    def test_non_finite_latent(self):
        latent = MultiScaleLatent(
            [Tensor(np.array([1.0, np.nan]).reshape(1, 1, 1, 2))])
        self.assertRaises(exceptions.NonFiniteError, embedding.embed,
                          latent, [1], plan_mod.SIGN_ONLY)
        recovered = embedding.extract(latent, plan_mod.SIGN_ONLY, 2)
        self.assertEqual(2, len(recovered))
        self.assertEqual(0, int(recovered.bits[0]))


class PayloadTests(test.TestCase):

    def test_msb_first_packing(self):
        payload = embedding.Payload([1, 0, 0, 0, 0, 0, 0, 1, 1])
        self.assertEqual(b'\x81\x80', payload.to_bytes())
        self.assertArrayEqual(payload.bits, embedding.Payload.from_bytes(
            b'\x81\x80', nbits=9).bits)

    def test_from_bytes_bounds(self):
        self.assertEqual(16, len(embedding.Payload.from_bytes(b'ab')))
        self.assertRaises(exceptions.ConfigError,
                          embedding.Payload.from_bytes, b'ab', 17)

    def test_rejects_non_bits(self):
        self.assertRaises(exceptions.ConfigError, embedding.Payload,
                          [0, 1, 2])

    def test_file_with_sidecar(self):
        path = self.mkdtemp() + '/secret.bin'
        payload = embedding.random_payload(13, seed=9)
        embedding.save_payload(path, payload)
        with open(path, 'rb') as handle:
            self.assertEqual(2, len(handle.read()))
        self.assertArrayEqual(payload.bits,
                              embedding.load_payload(path).bits)
        self.assertEqual(8, len(embedding.load_payload(path, nbits=8)))

    def test_malformed_sidecar(self):
        path = self.mkdtemp() + '/secret.bin'
        embedding.save_payload(path, embedding.random_payload(13, seed=9))
        with open(embedding.sidecar_path(path), 'w') as handle:
            handle.write('thirteen\n')
        self.assertRaises(exceptions.ConfigError, embedding.load_payload,
                          path)
        self.assertEqual(16, len(embedding.load_payload(path, nbits=16)))

    def test_random_payload_seeded(self):
        self.assertArrayEqual(embedding.random_payload(64, 5).bits,
                              embedding.random_payload(64, 5).bits)


class LatentFileTests(test.TestCase):

    def test_round_trip(self):
        latent = make_latent(self.rng, shapes=SHAPES_16)
        path = self.mkdtemp() + '/latent.gsfl'
        latent_io.save(latent, path)
        restored = latent_io.load(path)
        self.assertEqual(latent.shapes, restored.shapes)
        self.assertBitIdentical(restored.flatten(), latent.flatten())

    def test_malformed(self):
        data = latent_io.dumps(make_latent(self.rng))
        self.assertRaises(exceptions.CheckpointError, latent_io.loads,
                          b'XXXX' + data[4:])
        self.assertRaises(exceptions.CheckpointError, latent_io.loads,
                          data[:-4])
        self.assertRaises(exceptions.CheckpointError, latent_io.loads,
                          data[:20])
        self.assertRaises(exceptions.CheckpointError, latent_io.loads,
                          data[:4] + b'\x02' + data[5:])

    def test_no_levels(self):
        data = latent_io.LATENT_MAGIC + struct.pack('<II',
                                                    latent_io.VERSION, 0)
        with self.assertRaises(exceptions.CheckpointError) as ctx:
            latent_io.loads(data)
        self.assertIn('no levels', str(ctx.exception))

    def test_missing_file(self):
        self.assertRaises(exceptions.CheckpointError, latent_io.load,
                          self.mkdtemp() + '/absent.gsfl')
