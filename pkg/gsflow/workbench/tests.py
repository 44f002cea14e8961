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

from gsflow.channel import experiments
from gsflow.channel import steganalysis
from gsflow.codec import plan as plan_mod
from gsflow import exceptions
from gsflow.latent.optimizer import OptConfig
from gsflow.latent.optimizer import TracePoint
from gsflow.test import helpers as test
from gsflow.training.trainer import LossPoint
from gsflow.training.trainer import TrainConfig
from gsflow.workbench import config
from gsflow.workbench import tables


class ParseTests(test.TestCase):

    def test_parse_text(self):
        values = config.parse_config_text(
            "# a run\n\nepochs = 3\nplan = S, 14:22  # tail\n")
        self.assertEqual({'epochs': '3', 'plan': 'S, 14:22'}, values)

    def test_parse_text_bad_line(self):
        with self.assertRaises(exceptions.ConfigError) as ctx:
            config.parse_config_text("epochs = 3\nepochs\n", 'run.txt')
        self.assertIn('run.txt:2', str(ctx.exception))

    def test_missing_file(self):
        self.assertRaises(exceptions.ConfigError, config.resolve,
                          os.path.join(self.mkdtemp(), 'absent.txt'))


class ResolveTests(test.TestCase):

    def _write(self, text):
        path = os.path.join(self.mkdtemp(), 'run.txt')
        with open(path, 'w') as handle:
            handle.write(text)
        return path

    def test_defaults(self):
        run = config.resolve()
        self.assertEqual(8, run.height)
        self.assertEqual(plan_mod.parse_plan('S,0,22'), run.plan)
        self.assertEqual('float', run.channel)
        self.assertTrue(run.dequantize)

    def test_precedence(self):
        path = self._write("epochs = 3\nseed = 5\ndelta = 0.5\n")
        run = config.resolve(path, {'epochs': 7, 'seed': None})
        self.assertEqual(7, run.epochs)
        self.assertEqual(5, run.seed)
        self.assertEqual(0.5, run.delta)

    def test_unknown_keys(self):
        self.assertRaises(exceptions.ConfigError, config.resolve,
                          self._write("colour = red\n"))
        self.assertRaises(exceptions.ConfigError, config.resolve, None,
                          {'colour': 'red'})

    def test_invalid_values(self):
        for overrides in ({'height': 10}, {'lr': 0}, {'delta': -1},
                          {'plan': 'S,30,22'}, {'channel': 'jpeg'},
                          {'epochs': -1}, {'seed': 'abc'}):
            self.assertRaises(exceptions.ConfigError, config.resolve, None,
                              overrides)

    def test_write_and_reload(self):
        run = config.resolve(None, {'plan': '14,22', 'dequantize': False,
                                    'dataset': 'synthetic:seed=1,n=8'})
        directory = self.mkdtemp()
        path = run.write(directory)
        self.assertEqual(os.path.join(directory, config.CONFIG_NAME), path)
        with open(path) as handle:
            text = handle.read()
        self.assertIn('plan = 14:22\n', text)
        self.assertEqual(run.values, config.resolve(path).values)

    def test_derived_configs(self):
        run = config.resolve(None, {'epochs': 2, 'max_step': 9})
        self.assertIsInstance(run.train_config(), TrainConfig)
        self.assertEqual(2, run.train_config().epochs)
        self.assertIsInstance(run.opt_config(), OptConfig)
        self.assertEqual(9, run.opt_config().max_step)
        self.assertEqual(8, run.model_kwargs()['width'])
        self.assertRaises(AttributeError, getattr, run, 'colour')


class TableTests(test.TestCase):

    def test_loss_and_trace(self):
        directory = self.mkdtemp()
        tables.write_loss_curve(directory + '/loss.csv',
                                [LossPoint(0, 0, 5.5), LossPoint(0, 1, 5.25)])
        rows = tables.read_csv(directory + '/loss.csv')
        self.assertEqual(['0', '1'], [r['step'] for r in rows])
        self.assertEqual(5.25, float(rows[1]['nll_bits_per_dim']))
        tables.write_trace(directory + '/trace.csv',
                           [TracePoint(0, 0.75, -1.5)])
        self.assertEqual([{'step': '0', 'diff': '0.75', 'score_gen': '-1.5'}],
                         tables.read_csv(directory + '/trace.csv'))

    def test_table_header_and_empty_cells(self):
        path = self.mkdtemp() + '/table.csv'
        tables.write_table(path, [
            experiments.ExperimentRow('none', 0.0, None, None, 'u8', 2,
                                      'random'),
            experiments.ExperimentRow('S', 1.5, 0.875, 0.125, 'float', 2,
                                      'random')])
        with open(path) as handle:
            header = handle.readline().strip()
        self.assertEqual(','.join(tables.TABLE_COLUMNS), header)
        rows = tables.read_csv(path)
        self.assertEqual('', rows[0]['acc_mean'])
        self.assertEqual(0.875, float(rows[1]['acc_mean']))

    def test_detection_files(self):
        rng = np.random.default_rng(0)
        report = steganalysis.pe_from_scores(rng.normal(0, 1, 30),
                                             rng.normal(1, 1, 30))
        directory = self.mkdtemp()
        tables.write_pe(directory + '/pe.csv', report, 30, 30, 'S', 'u8')
        row, = tables.read_csv(directory + '/pe.csv')
        self.assertEqual(report.pe, float(row['pe']))
        self.assertEqual('30', row['cover'])
        tables.write_roc(directory + '/roc.csv', report)
        self.assertEqual(len(report.roc[0]),
                         len(tables.read_csv(directory + '/roc.csv')))

    def test_planes(self):
        path = self.mkdtemp() + '/planes.csv'
        tables.write_planes(path, {'u8': [1.0, 0.5], 'float': [1.0, 1.0]},
                            ['S', '0'])
        rows = tables.read_csv(path)
        self.assertEqual(['float', 'float', 'u8', 'u8'],
                         [r['channel'] for r in rows])
        self.assertEqual('0.5', rows[3]['agreement'])
