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

"""Parameter files.

Layout: 4-byte magic, little-endian uint32 version, little-endian uint32
header fields, then every block as little-endian float32 in declared order.
Block shapes are implied by the header, so the reader rebuilds the owner
first and then fills it.
"""

import logging
import struct

import numpy as np

from gsflow import exceptions
from gsflow.flow.model import FlowModel
from gsflow import utils

LOG = logging.getLogger(__name__)

FLOW_MAGIC = b'GSFW'
VERSION = 1
FLOW_FIELDS = ('height', 'width', 'levels', 'steps', 'hidden')


def dump_blocks(magic, fields, arrays):
    header = magic + struct.pack('<I%dI' % len(fields), VERSION, *fields)
    body = b''.join(np.ascontiguousarray(a, dtype='<f4').tobytes()
                    for a in arrays)
    return header + body


def load_blocks(data, magic, nfields):
    head_size = 4 + 4 * (1 + nfields)
    if len(data) < head_size or data[:4] != magic:
        raise exceptions.CheckpointError(
            "bad magic, expected %r" % magic)
    values = struct.unpack('<I%dI' % nfields, data[4:head_size])
    if values[0] != VERSION:
        raise exceptions.CheckpointError(
            "unsupported version %d" % values[0])
    return list(values[1:]), data[head_size:]


def fill_blocks(body, arrays):
    """Copy little-endian float32 ``body`` into ``arrays`` in order."""
    expected = sum(a.size for a in arrays) * 4
    if len(body) != expected:
        raise exceptions.CheckpointError(
            "parameter payload is %d bytes, expected %d"
            % (len(body), expected))
    words = np.frombuffer(body, dtype='<f4')
    start = 0
    for array in arrays:
        array[...] = words[start:start + array.size].reshape(array.shape)
        start += array.size


def model_blocks(model):
    return ([t.data for _, t in model.parameters()] +
            [b for _, b in model.buffers()])


def dumps(model):
    fields = [getattr(model, f) for f in FLOW_FIELDS]
    return dump_blocks(FLOW_MAGIC, fields, model_blocks(model))


def loads(data):
    fields, body = load_blocks(data, FLOW_MAGIC, len(FLOW_FIELDS))
    model = FlowModel(**dict(zip(FLOW_FIELDS, fields)))
    fill_blocks(body, model_blocks(model))
    model.mark_initialized()
    return model


def save(model, path):
    utils.atomic_write(path, dumps(model))
    LOG.info("Saved %r to %s", model, path)


def load(path):
    try:
        with open(path, 'rb') as handle:
            data = handle.read()
    except OSError as exc:
        raise exceptions.CheckpointError("cannot read %s: %s" % (path, exc))
    model = loads(data)
    LOG.info("Loaded %r from %s", model, path)
    return model
