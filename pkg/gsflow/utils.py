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

import contextlib
import logging
import os
import tempfile

LOG = logging.getLogger(__name__)


@contextlib.contextmanager
def atomic_open(path, mode='wb'):
    """Write to a temporary file next to ``path`` and rename on success."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix='.tmp-',
                                    suffix=os.path.basename(path))
    try:
        newline = '' if 'b' not in mode else None
        with os.fdopen(fd, mode, newline=newline) as handle:
            yield handle
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise
    LOG.debug("Wrote %s", path)


def atomic_write(path, data):
    mode = 'wb' if isinstance(data, bytes) else 'w'
    with atomic_open(path, mode) as handle:
        handle.write(data)
