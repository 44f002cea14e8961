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

from gsflow.autodiff.adam import Adam  # noqa
from gsflow.autodiff.adam import adam_step  # noqa
from gsflow.autodiff.adam import AdamState  # noqa
from gsflow.autodiff.adam import clip_grad_norm  # noqa
from gsflow.autodiff import ops  # noqa
from gsflow.autodiff.tape import no_grad  # noqa
from gsflow.autodiff.tape import Tape  # noqa
from gsflow.autodiff.tensor import Tensor  # noqa
