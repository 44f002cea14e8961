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

"""Stego round trips through a simulated image-save channel."""

import logging

import numpy as np

from gsflow.autodiff import no_grad
from gsflow.autodiff.tensor import Tensor
from gsflow.codec import bits
from gsflow.codec import embedding
from gsflow import exceptions
from gsflow.flow.model import to_model_domain
from gsflow.flow.model import to_pixels

LOG = logging.getLogger(__name__)

U8 = 'u8'
FLOAT = 'float'
CHANNELS = (U8, FLOAT)

# bit planes reported by the agreement profile: sign, then fraction 0..22
PLANES = [bits.SIGN_BIT] + list(range(bits.FRACTION_BITS))
PLANE_LABELS = ['S'] + [str(p) for p in range(bits.FRACTION_BITS)]


class Channel(object):

    def __init__(self, kind, clip=(0.0, 255.0)):
        self.kind = kind
        self.clip = tuple(clip)
        if self.kind not in CHANNELS:
            raise exceptions.ConfigError(
                "unknown channel %r, expected one of %s"
                % (self.kind, ', '.join(CHANNELS)))

    @property
    def lossless(self):
        return self.kind == FLOAT

    def __repr__(self):
        return "Channel(%r)" % self.kind

    def __eq__(self, other):
        return (isinstance(other, Channel) and self.kind == other.kind
                and self.clip == other.clip)

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash((self.kind, self.clip))


def get_channel(channel):
    return channel if isinstance(channel, Channel) else Channel(channel)


def apply_channel(image, channel):
    """Return the model-domain image as it reads back after saving.

    ``u8`` clips to [0, 255] and rounds half to even, ``float`` is the
    identity.
    """
    channel = get_channel(channel)
    x = image.data if isinstance(image, Tensor) else np.asarray(image)
    x = np.array(x, dtype=np.float32)
    if channel.lossless:
        return x
    low, high = channel.clip
    return to_model_domain(np.rint(np.clip(to_pixels(x), low, high)))


def acc(secret, secret_star):
    """Fraction of positions where two bit sequences agree.

    Returns None for empty sequences.
    """
    a = np.asarray(getattr(secret, 'bits', secret), dtype=np.uint8)
    b = np.asarray(getattr(secret_star, 'bits', secret_star), dtype=np.uint8)
    if a.shape != b.shape:
        raise exceptions.ShapeError('acc', a.shape, b.shape)
    if a.size == 0:
        return None
    return float(np.mean(a == b))


class RoundTrip(object):
    """Everything one embed, save and extract cycle produced."""

    def __init__(self, stego_image, received_image, stego_latent,
                 recovered_latent, payload, acc):
        self.stego_image = stego_image
        self.received_image = received_image
        self.stego_latent = stego_latent
        self.recovered_latent = recovered_latent
        self.payload = payload
        self.acc = acc


def roundtrip(model, latent, payload, plan, channel):
    """Embed, generate, pass through ``channel``, project back, extract."""
    stego_latent = embedding.embed(latent, payload, plan)
    with no_grad():
        stego_image = model.inverse(stego_latent).data
        received = apply_channel(stego_image, channel)
        recovered, _ = model.forward(received)
    extracted = embedding.extract(recovered, plan, len(payload))
    return RoundTrip(stego_image, received, stego_latent, recovered,
                     extracted, acc(payload, extracted))


def raw_words(latent):
    """uint32 view of a batch-1 latent, non-finite floats included."""
    return np.ascontiguousarray(latent.flatten()[0],
                                dtype=np.float32).view(np.uint32)


def plane_agreement(latent, latent_star):
    """Per-plane agreement of two latents in :data:`PLANES` order."""
    before = bits.bit_planes(raw_words(latent), PLANES)
    after = bits.bit_planes(raw_words(latent_star), PLANES)
    if before.shape != after.shape:
        raise exceptions.ShapeError('plane_agreement', before.shape,
                                    after.shape)
    return np.mean(before == after, axis=0)
