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

"""Run configuration: defaults, then a flat ``key = value`` file, then
command flags, validated by :class:`RunConfigForm`.
"""

import logging
import os

from django.conf import settings

from gsflow import exceptions
from gsflow.latent.optimizer import OptConfig
from gsflow.training.trainer import TrainConfig
from gsflow import utils
from gsflow.workbench.forms import RunConfigForm

LOG = logging.getLogger(__name__)

CONFIG_NAME = 'config.txt'


def parse_config_text(text, source='<config>'):
    values = {}
    for number, line in enumerate(text.splitlines(), 1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition('=')
        if not sep or not key.strip():
            raise exceptions.ConfigError(
                "%s:%d: expected 'key = value'" % (source, number))
        values[key.strip()] = value.strip()
    return values


def load_config_file(path):
    try:
        with open(path) as handle:
            return parse_config_text(handle.read(), path)
    except OSError as exc:
        raise exceptions.ConfigError("cannot read config %s: %s"
                                     % (path, exc))


class RunConfig(object):
    """Validated configuration; keys are attributes."""

    def __init__(self, values):
        self.values = dict(values)

    def __getattr__(self, name):
        try:
            return self.__dict__['values'][name]
        except KeyError:
            raise AttributeError(name)

    def model_kwargs(self):
        return {'height': self.height, 'width': self.width,
                'levels': self.levels, 'steps': self.steps,
                'hidden': self.hidden, 'seed': self.seed}

    def train_config(self):
        return TrainConfig(epochs=self.epochs, batch_size=self.batch_size,
                           lr=self.lr, seed=self.seed,
                           checkpoint_interval=self.checkpoint_interval,
                           dequantize=self.dequantize,
                           clip_norm=self.clip_norm)

    def opt_config(self):
        return OptConfig(epsilon=self.epsilon, max_step=self.max_step,
                         thresh=self.thresh, n=self.n, seed=self.seed,
                         restart_noise=self.restart_noise)

    def dumps(self):
        lines = []
        for key in sorted(self.values):
            value = self.values[key]
            if value is None:
                value = ''
            lines.append('%s = %s' % (key, getattr(value, 'descriptor',
                                                   value)))
        return '\n'.join(lines) + '\n'

    def write(self, directory):
        path = os.path.join(directory, CONFIG_NAME)
        utils.atomic_write(path, self.dumps())
        return path


def resolve(config_path=None, overrides=None):
    """Merge defaults, the config file and ``overrides`` and validate."""
    merged = dict(settings.GSFLOW_DEFAULTS)
    layers = []
    if config_path:
        layers.append(load_config_file(config_path))
    layers.append({k: v for k, v in (overrides or {}).items()
                   if v is not None})
    for layer in layers:
        unknown = sorted(set(layer) - set(merged))
        if unknown:
            raise exceptions.ConfigError("unknown config keys: %s"
                                         % ", ".join(unknown))
        merged.update(layer)

    form = RunConfigForm(data=merged)
    if not form.is_valid():
        problems = "; ".join("%s: %s" % (field, " ".join(errors))
                             for field, errors in sorted(form.errors.items()))
        raise exceptions.ConfigError("invalid configuration: %s" % problems)
    LOG.debug("Resolved configuration %s", form.cleaned_data)
    return RunConfig(form.cleaned_data)
