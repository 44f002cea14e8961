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

"""Django settings for the gsflow command-line workbench."""

import os

SECRET_KEY = os.environ.get('GSFLOW_SECRET_KEY', 'gsflow-workbench')
DEBUG = False
USE_I18N = True
USE_TZ = True
INSTALLED_APPS = ['gsflow']
DATABASES = {}

GSFLOW_LOG_LEVEL = os.environ.get('GSFLOW_LOG_LEVEL', 'INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '%(asctime)s %(process)d %(levelname)s %(name)s '
                      '%(message)s'
        },
    },
    'handlers': {
        'console': {
            'level': 'DEBUG',
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'gsflow': {
            'handlers': ['console'],
            'level': GSFLOW_LOG_LEVEL,
            'propagate': False,
        },
    },
}

# Every key can be overridden by a config file and then by command flags.
GSFLOW_DEFAULTS = {
    # model
    'height': 16,
    'width': 16,
    'levels': 3,
    'steps': 4,
    'hidden': 64,
    'delta': 0.7,
    # training
    'dataset': '',
    'eval_fraction': 0.1,
    'epochs': 10,
    'batch_size': 32,
    'lr': 1e-3,
    'checkpoint_interval': 1,
    'dequantize': True,
    'clip_norm': 50.0,
    # assessor and latent search
    'assessor_epochs': 20,
    'generated': 256,
    'epsilon': 1e-3,
    'n': 3,
    'thresh': 0.1,
    'max_step': 100,
    'restarts': 1,
    'restart_noise': 0.0,
    # embedding and evaluation
    'plan': 'S,0,22',
    'channel': 'float',
    'trials': 32,
    'steganalysis_images': 64,
    'seed': 0,
    'output': 'output',
    # command inputs
    'checkpoint': '',
    'payload': '',
    'payload_bits': None,
    'latent': '',
    'assessor': '',
    'image': '',
    'metadata': '',
    'reference': '',
}
