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

from gsflow.settings import *  # noqa: F401,F403

GSFLOW_LOG_LEVEL = 'WARNING'
LOGGING['loggers']['gsflow']['level'] = GSFLOW_LOG_LEVEL  # noqa: F405

# small enough for the command tests to finish in seconds
GSFLOW_DEFAULTS = dict(GSFLOW_DEFAULTS)  # noqa: F405
GSFLOW_DEFAULTS.update({
    'height': 8,
    'width': 8,
    'levels': 2,
    'steps': 1,
    'hidden': 8,
    'epochs': 1,
    'batch_size': 16,
    'assessor_epochs': 2,
    'generated': 16,
    'max_step': 3,
    'trials': 2,
    'steganalysis_images': 8,
})
