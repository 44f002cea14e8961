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

"""Latent files.

Layout: magic ``GSFL``, little-endian uint32 version and level count, four
uint32 dims (N, h, w, c) per level, then every level as little-endian
float32 in the canonical flattening order.
"""

import logging
import struct

import numpy as np

from gsflow.autodiff.tensor import Tensor
from gsflow import exceptions
from gsflow.flow.latent import MultiScaleLatent
from gsflow import utils

LOG = logging.getLogger(__name__)

LATENT_MAGIC = b'GSFL'
VERSION = 1


def dumps(latent):
    header = [LATENT_MAGIC, struct.pack('<II', VERSION, len(latent.levels))]
    for level in latent.levels:
        if level.ndim != 4:
            raise exceptions.ShapeError('latent_io', level.shape)
        header.append(struct.pack('<4I', *level.shape))
    body = [np.ascontiguousarray(level.data, dtype='<f4').tobytes()
            for level in latent.levels]
    return b''.join(header + body)


def loads(data):
    if len(data) < 12 or data[:4] != LATENT_MAGIC:
        raise exceptions.CheckpointError(
            "bad magic, expected %r" % LATENT_MAGIC)
    version, count = struct.unpack('<II', data[4:12])
    if version != VERSION:
        raise exceptions.CheckpointError("unsupported version %d" % version)
    if count == 0:
        raise exceptions.CheckpointError("latent file declares no levels")
    offset = 12 + 16 * count
    if len(data) < offset:
        raise exceptions.CheckpointError("truncated latent header")
    shapes = [struct.unpack('<4I', data[12 + 16 * i:28 + 16 * i])
              for i in range(count)]
    words = sum(int(np.prod(s)) for s in shapes)
    if len(data) - offset != 4 * words:
        raise exceptions.CheckpointError(
            "header declares %d floats but %d bytes follow"
            % (words, len(data) - offset))
    flat = np.frombuffer(data, dtype='<f4', offset=offset)
    levels = []
    start = 0
    for shape in shapes:
        size = int(np.prod(shape))
        levels.append(Tensor.wrap(
            flat[start:start + size].astype(np.float32).reshape(shape)))
        start += size
    return MultiScaleLatent(levels)


def save(latent, path):
    utils.atomic_write(path, dumps(latent))
    LOG.info("Saved latent %s to %s", latent.shapes, path)


def load(path):
    try:
        with open(path, 'rb') as handle:
            data = handle.read()
    except OSError as exc:
        raise exceptions.CheckpointError("cannot read %s: %s" % (path, exc))
    return loads(data)
