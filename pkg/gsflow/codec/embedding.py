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

"""Embed and extract payload bits in the hideable bits of a latent.

Floats are visited in the canonical flattening order of the latent; each
float takes ``plan.bits_per_float`` consecutive payload bits. Exponent bits
are never written and floats past the end of the payload keep their bits.
"""

import logging
import os

import numpy as np

from gsflow.codec import bits
from gsflow import exceptions
from gsflow.flow.latent import MultiScaleLatent
from gsflow import utils

LOG = logging.getLogger(__name__)


class Payload(object):
    """Message bits, one uint8 of value 0 or 1 per bit."""

    def __init__(self, bits):
        self.bits = np.asarray(bits, dtype=np.uint8).reshape(-1)
        if np.any(self.bits > 1):
            raise exceptions.ConfigError("payload bits must be 0 or 1")

    def __len__(self):
        return int(self.bits.size)

    def to_bytes(self):
        return np.packbits(self.bits, bitorder='big').tobytes()

    @classmethod
    def from_bytes(cls, data, nbits=None):
        unpacked = np.unpackbits(np.frombuffer(data, dtype=np.uint8),
                                 bitorder='big')
        if nbits is None:
            nbits = unpacked.size
        if nbits > unpacked.size:
            raise exceptions.ConfigError(
                "payload length %d bits exceeds the %d bits on file"
                % (nbits, unpacked.size))
        return cls(unpacked[:nbits])


def random_payload(nbits, seed=0):
    rng = np.random.default_rng(seed)
    return Payload(rng.integers(0, 2, size=int(nbits), dtype=np.uint8))


def sidecar_path(path):
    return path + '.bits'


def save_payload(path, payload):
    """Write packed bytes and the exact bit length next to them."""
    utils.atomic_write(path, payload.to_bytes())
    utils.atomic_write(sidecar_path(path), '%d\n' % len(payload))


def load_payload(path, nbits=None):
    with open(path, 'rb') as handle:
        data = handle.read()
    if nbits is None and os.path.exists(sidecar_path(path)):
        with open(sidecar_path(path)) as handle:
            text = handle.read().strip()
        try:
            nbits = int(text)
        except ValueError:
            raise exceptions.ConfigError(
                "malformed payload length %r in %s"
                % (text, sidecar_path(path)))
    return Payload.from_bytes(data, nbits)


def _as_bits(payload):
    if isinstance(payload, Payload):
        return payload.bits
    return Payload(payload).bits


def _words(latent):
    if latent.batch_size != 1:
        raise exceptions.ShapeError('codec', (latent.batch_size,), (1,))
    return bits.float_to_bits(latent.flatten()[0])


def capacity(latent, plan):
    return latent.size * plan.bits_per_float


def _slots(nbits, plan):
    positions = np.asarray(plan.positions(), dtype=np.uint32)
    index = np.arange(nbits)
    return index // len(positions), positions[index % len(positions)]


def embed(latent, payload, plan):
    """Return the stego latent carrying ``payload`` under ``plan``."""
    payload_bits = _as_bits(payload)
    total = capacity(latent, plan)
    if payload_bits.size > total:
        raise exceptions.CapacityError(payload_bits.size, total)
    words = _words(latent)
    if payload_bits.size:
        floats, positions = _slots(payload_bits.size, plan)
        masks = np.left_shift(np.uint32(1), positions)
        clear = np.zeros_like(words)
        ones = np.zeros_like(words)
        np.bitwise_or.at(clear, floats, masks)
        np.bitwise_or.at(ones, floats,
                         masks * payload_bits.astype(np.uint32))
        words = (words & ~clear) | ones
    LOG.debug("Embedded %d bits with plan %s", payload_bits.size, plan)
    flat = bits.bits_to_float(words).reshape(1, -1)
    return MultiScaleLatent.unflatten(flat, latent.shapes, latent.delta)


def extract(latent, plan, length):
    """Read ``length`` payload bits back in the order :func:`embed` wrote."""
    total = capacity(latent, plan)
    if length < 0 or length > total:
        raise exceptions.CapacityError(length, total)
    if length == 0:
        return Payload(np.zeros(0, dtype=np.uint8))
    # pure bit reading, so a non-finite float still yields its bits
    if latent.batch_size != 1:
        raise exceptions.ShapeError('codec', (latent.batch_size,), (1,))
    words = np.asarray(latent.flatten()[0], dtype=np.float32).view(np.uint32)
    floats, positions = _slots(length, plan)
    return Payload(((words[floats] >> positions) & np.uint32(1))
                   .astype(np.uint8))
