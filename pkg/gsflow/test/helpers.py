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

import shutil
import tempfile

from django import test
import numpy as np

from gsflow.flow.model import FlowModel
from gsflow.flow.model import to_model_domain
from gsflow.training import datasets


class TestCase(test.SimpleTestCase):
    """Base class for gsflow tests: seeded RNG, array assertions and a
    scratch directory.
    """

    seed = 1234

    def setUp(self):
        super(TestCase, self).setUp()
        self.rng = np.random.default_rng(self.seed)

    def mkdtemp(self):
        path = tempfile.mkdtemp(prefix='gsflow-test-')
        self.addCleanup(shutil.rmtree, path, ignore_errors=True)
        return path

    def assertArrayEqual(self, actual, expected):
        np.testing.assert_array_equal(np.asarray(actual),
                                      np.asarray(expected))

    def assertAllClose(self, actual, expected, atol=1e-6, rtol=1e-6):
        np.testing.assert_allclose(np.asarray(actual), np.asarray(expected),
                                   atol=atol, rtol=rtol)

    def assertBitIdentical(self, actual, expected):
        actual = np.ascontiguousarray(actual, dtype=np.float32)
        expected = np.ascontiguousarray(expected, dtype=np.float32)
        self.assertEqual(actual.shape, expected.shape)
        self.assertArrayEqual(actual.view(np.uint32),
                              expected.view(np.uint32))


def small_model(seed=0, **kwargs):
    """An 8x8 two-level flow, data-initialised on a synthetic batch."""
    params = dict(height=8, width=8, levels=2, steps=2, hidden=8, seed=seed)
    params.update(kwargs)
    model = FlowModel(**params)
    data = datasets.synth_dataset(seed, 32, dims=(model.height, model.width))
    model.data_initialize(to_model_domain(data.images))
    return model
