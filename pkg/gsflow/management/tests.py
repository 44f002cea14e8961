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

import io
import os
import shutil
import tempfile

from django.core.management import call_command
from django.core.management.base import CommandError

from gsflow.channel import pipeline
from gsflow.codec import embedding
from gsflow.codec import latent_io
from gsflow.flow import checkpoint
from gsflow.latent import assessor as assessor_mod
from gsflow.test import helpers as test
from gsflow.workbench import config as workbench_config
from gsflow.workbench import tables

DATASET = 'synthetic:seed=1,n=24'


def run(name, **options):
    out = io.StringIO()
    call_command(name, stdout=out, **options)
    return out.getvalue()


class CommandTestCase(test.TestCase):

    @classmethod
    def setUpClass(cls):
        super(CommandTestCase, cls).setUpClass()
        cls.workdir = tempfile.mkdtemp(prefix='gsflow-cmd-')
        cls.addClassCleanup(shutil.rmtree, cls.workdir, ignore_errors=True)
        cls.train_dir = os.path.join(cls.workdir, 'train')
        run('train', dataset=DATASET, output=cls.train_dir)
        cls.checkpoint = os.path.join(cls.train_dir, 'flow.ckpt')

    def output(self, name):
        return os.path.join(self.mkdtemp(), name)

    def assertFails(self, returncode, name, **options):
        with self.assertRaises(CommandError) as ctx:
            run(name, **options)
        self.assertEqual(returncode, ctx.exception.returncode)
        return ctx.exception


class TrainCommandTests(CommandTestCase):

    def test_outputs(self):
        self.assertTrue(os.path.exists(self.checkpoint))
        rows = tables.read_csv(os.path.join(self.train_dir, 'loss.csv'))
        # 22 train images in batches of 16
        self.assertEqual(2, len(rows))
        recorded = workbench_config.load_config_file(
            os.path.join(self.train_dir, workbench_config.CONFIG_NAME))
        self.assertEqual(DATASET, recorded['dataset'])

    def test_same_seed_same_checkpoint(self):
        out = self.output('again')
        run('train', dataset=DATASET, output=out)
        with open(self.checkpoint, 'rb') as first, \
                open(os.path.join(out, 'flow.ckpt'), 'rb') as second:
            self.assertEqual(first.read(), second.read())

    def test_missing_dataset_is_usage_error(self):
        error = self.assertFails(2, 'train', output=self.output('none'))
        self.assertIn('dataset', str(error))
        self.assertFails(2, 'train', dataset=self.output('absent'),
                         output=self.output('none'))

    def test_bad_config_key_is_usage_error(self):
        path = self.output('run.txt')
        with open(path, 'w') as handle:
            handle.write('colour = red\n')
        self.assertFails(2, 'train', config=path,
                         output=self.output('none'))


class StegoCommandTests(CommandTestCase):

    def _payload(self, nbits, seed=1):
        path = self.output('secret.bin')
        payload = embedding.random_payload(nbits, seed)
        embedding.save_payload(path, payload)
        return path, payload

    def test_embed_then_extract(self):
        path, payload = self._payload(40)
        out = self.output('embed')
        run('embed', checkpoint=self.checkpoint, payload=path,
            plan='S,22,22', channel=pipeline.FLOAT, output=out)
        image = os.path.join(out, 'stego.npy')
        self.assertTrue(os.path.exists(image + '.json'))

        dest = self.output('extract')
        text = run('extract', checkpoint=self.checkpoint, image=image,
                   reference=path, output=dest)
        self.assertIn('acc 1.000000', text)
        extracted = embedding.load_payload(os.path.join(dest,
                                                        'extracted.bin'))
        self.assertArrayEqual(payload.bits, extracted.bits)

        recorded = workbench_config.load_config_file(
            os.path.join(out, workbench_config.CONFIG_NAME))
        self.assertEqual(self.checkpoint, recorded['checkpoint'])
        self.assertEqual(path, recorded['payload'])
        self.assertEqual('', recorded['payload_bits'])
        recorded = workbench_config.load_config_file(
            os.path.join(dest, workbench_config.CONFIG_NAME))
        self.assertEqual(image, recorded['image'])
        self.assertEqual(path, recorded['reference'])
        self.assertEqual('', recorded['metadata'])

    def test_inputs_from_config_file(self):
        path, _ = self._payload(24)
        settings_path = self.output('run.txt')
        with open(settings_path, 'w') as handle:
            handle.write('payload_bits = 24\nplan = S,22,22\n'
                         'channel = float\n')
        out = self.output('embed')
        run('embed', config=settings_path, checkpoint=self.checkpoint,
            payload=path, output=out)
        recorded = workbench_config.load_config_file(
            os.path.join(out, workbench_config.CONFIG_NAME))
        self.assertEqual('24', recorded['payload_bits'])
        text = run('extract', checkpoint=self.checkpoint,
                   image=os.path.join(out, 'stego.npy'), reference=path,
                   output=self.output('extract'))
        self.assertIn('acc 1.000000', text)

    def test_extract_with_wrong_plan(self):
        path, _ = self._payload(300, seed=4)
        out = self.output('embed')
        run('embed', checkpoint=self.checkpoint, payload=path,
            plan='S,0,22', output=out)
        text = run('extract', checkpoint=self.checkpoint,
                   image=os.path.join(out, 'stego.npy'), plan='10,22',
                   reference=path, output=self.output('extract'))
        value = float(text.split('acc ')[1].split()[0])
        self.assertTrue(0.35 < value < 0.65, value)

    def test_embed_u8_writes_png(self):
        path, _ = self._payload(16)
        out = self.output('embed')
        run('embed', checkpoint=self.checkpoint, payload=path, plan='S',
            channel=pipeline.U8, output=out)
        self.assertTrue(os.path.exists(os.path.join(out, 'stego.png')))

    def test_embed_with_saved_latent(self):
        path, payload = self._payload(8)
        latent_path = self.output('z.gsfl')
        latent, _ = checkpoint.load(self.checkpoint).sample(0.7, seed=3)
        latent_io.save(latent, latent_path)
        out = self.output('embed')
        run('embed', checkpoint=self.checkpoint, payload=path, plan='S',
            latent=latent_path, output=out)
        self.assertTrue(os.path.exists(os.path.join(out, 'stego.npy')))

    def test_payload_over_capacity(self):
        # an 8x8 image has 192 latent floats, one sign bit each
        path, _ = self._payload(193)
        error = self.assertFails(1, 'embed', checkpoint=self.checkpoint,
                                 payload=path, plan='S',
                                 output=self.output('embed'))
        self.assertIn('capacity', str(error))

    def test_zero_payload(self):
        path, _ = self._payload(0)
        out = self.output('embed')
        run('embed', checkpoint=self.checkpoint, payload=path, output=out)
        dest = self.output('extract')
        run('extract', checkpoint=self.checkpoint,
            image=os.path.join(out, 'stego.npy'), output=dest)
        self.assertEqual(0, len(embedding.load_payload(
            os.path.join(dest, 'extracted.bin'))))

    def test_extract_without_metadata(self):
        path, _ = self._payload(8)
        out = self.output('embed')
        run('embed', checkpoint=self.checkpoint, payload=path, output=out)
        image = os.path.join(out, 'stego.npy')
        os.unlink(image + '.json')
        error = self.assertFails(2, 'extract', checkpoint=self.checkpoint,
                                 image=image, output=self.output('x'))
        self.assertIn('payload length', str(error))

    def test_missing_checkpoint(self):
        path, _ = self._payload(8)
        self.assertFails(2, 'embed', checkpoint=self.output('absent.ckpt'),
                         payload=path, output=self.output('embed'))


class LatentCommandTests(CommandTestCase):

    def test_optimize_latent(self):
        out = self.output('search')
        run('optimize-latent', checkpoint=self.checkpoint, dataset=DATASET,
            output=out)
        assessor_mod.load(os.path.join(out, 'assessor.ckpt'))
        latent = latent_io.load(os.path.join(out, 'latent.gsfl'))
        self.assertEqual(1, latent.batch_size)
        trace = tables.read_csv(os.path.join(out, 'trace.csv'))
        self.assertTrue(1 <= len(trace) <= 3)

        again = self.output('search')
        run('optimize-latent', checkpoint=self.checkpoint, dataset=DATASET,
            assessor=os.path.join(out, 'assessor.ckpt'), output=again)
        self.assertFalse(os.path.exists(os.path.join(again,
                                                     'assessor.ckpt')))
        self.assertEqual(trace, tables.read_csv(
            os.path.join(again, 'trace.csv')))


class EvaluationCommandTests(CommandTestCase):

    def test_evaluate(self):
        out = self.output('eval')
        run('evaluate', checkpoint=self.checkpoint, output=out)
        rows = tables.read_csv(os.path.join(out, 'table.csv'))
        # ten plans on both channels
        self.assertEqual(20, len(rows))
        baseline = [r for r in rows if r['plan'] == 'none']
        self.assertEqual(2, len(baseline))
        self.assertEqual(['', ''], [r['acc_mean'] for r in baseline])
        for row in rows:
            if row['plan'] != 'none':
                self.assertTrue(0.0 <= float(row['acc_mean']) <= 1.0)

        pe, = tables.read_csv(os.path.join(out, 'pe.csv'))
        self.assertTrue(0.0 <= float(pe['pe']) <= 1.0)
        planes = tables.read_csv(os.path.join(out, 'planes.csv'))
        self.assertEqual(2 * len(pipeline.PLANES), len(planes))

        again = self.output('eval')
        run('evaluate', checkpoint=self.checkpoint, output=again)
        for name in ('table.csv', 'planes.csv', 'pe.csv', 'roc.csv'):
            with open(os.path.join(out, name)) as first, \
                    open(os.path.join(again, name)) as second:
                self.assertEqual(first.read(), second.read(), name)

    def test_steganalyze(self):
        out = self.output('stega')
        text = run('steganalyze', checkpoint=self.checkpoint, plan='S',
                   channel=pipeline.U8, output=out)
        self.assertIn('PE', text)
        pe, = tables.read_csv(os.path.join(out, 'pe.csv'))
        self.assertEqual('S', pe['plan'])
        self.assertEqual('4', pe['cover'])
        self.assertTrue(os.path.exists(os.path.join(out, 'roc.csv')))

    def test_unknown_channel(self):
        self.assertFails(2, 'steganalyze', checkpoint=self.checkpoint,
                         channel='jpeg', output=self.output('stega'))
