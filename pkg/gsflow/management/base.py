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

import logging
import os

from django.core.management.base import BaseCommand
from django.utils.translation import gettext_lazy as _

from gsflow import exceptions
from gsflow.workbench import config as workbench_config

LOG = logging.getLogger(__name__)

# flags that override the config key of the same name
FLAG_KEYS = ('dataset', 'epochs', 'seed', 'plan', 'channel', 'trials',
             'delta', 'output')

# command inputs, recorded with the run and readable from a config file
INPUT_KEYS = ('checkpoint', 'payload', 'payload_bits', 'latent', 'assessor',
              'image', 'metadata', 'reference')


class GsflowCommand(BaseCommand):
    """Resolve the run configuration, record it in the output directory,
    then call :meth:`run`.
    """

    failure = _("Command failed.")

    def add_arguments(self, parser):
        parser.add_argument('--config', help=_("Flat key = value file."))
        parser.add_argument('--output', help=_("Output directory."))
        parser.add_argument('--seed', type=int)

    def add_plan_arguments(self, parser):
        parser.add_argument('--plan',
                            help=_("Bit plan, e.g. S or S,14,22 or 22,22."))
        parser.add_argument('--channel', help=_("u8 or float."))
        parser.add_argument('--delta', type=float,
                            help=_("Sampling temperature."))

    def handle(self, *args, **options):
        try:
            overrides = {key: options.get(key)
                         for key in FLAG_KEYS + INPUT_KEYS}
            config = workbench_config.resolve(options.get('config'),
                                              overrides)
            options.update((key, config.values[key]) for key in INPUT_KEYS)
            os.makedirs(config.output, exist_ok=True)
            path = config.write(config.output)
            LOG.info("Configuration recorded in %s", path)
            self.run(config, options)
        except Exception:
            exceptions.handle(self.failure)

    def run(self, config, options):
        raise NotImplementedError()

    def output_path(self, config, name):
        return os.path.join(config.output, name)

    def report(self, message):
        self.stdout.write(str(message))
