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

"""Which bits of each latent float carry payload.

A plan is written ``[S, alpha:beta]``: the sign bit plus fraction bits
alpha through beta, where 22 is the most significant fraction bit.
"""

import re

import numpy as np

from gsflow.codec import bits
from gsflow import exceptions


class BitPlan(object):
    """Sign bit (optional) plus fraction bits alpha..beta of every float."""

    def __init__(self, use_sign=True, alpha=0, beta=bits.MAX_FRACTION_BIT,
                 fraction=True):
        self.use_sign = bool(use_sign)
        self.alpha = int(alpha)
        self.beta = int(beta)
        self.fraction = bool(fraction)
        if not 0 <= self.alpha <= self.beta <= bits.MAX_FRACTION_BIT:
            raise exceptions.ConfigError(
                "plan needs 0 <= alpha <= beta <= %d, got %d:%d"
                % (bits.MAX_FRACTION_BIT, self.alpha, self.beta))

    @property
    def bits_per_float(self):
        count = 1 if self.use_sign else 0
        if self.fraction:
            count += self.beta - self.alpha + 1
        return count

    def positions(self):
        """Word bit indices in fill order: sign, then beta down to alpha."""
        positions = [bits.SIGN_BIT] if self.use_sign else []
        if self.fraction:
            positions.extend(range(self.beta, self.alpha - 1, -1))
        return positions

    @property
    def descriptor(self):
        parts = ['S'] if self.use_sign else []
        if self.fraction:
            parts.append('%d:%d' % (self.alpha, self.beta))
        return ', '.join(parts) if parts else 'none'

    def __str__(self):
        return self.descriptor

    def __repr__(self):
        return "BitPlan(%r)" % self.descriptor

    def _key(self):
        if not self.fraction:
            return (self.use_sign, False)
        return (self.use_sign, True, self.alpha, self.beta)

    def __eq__(self, other):
        return isinstance(other, BitPlan) and self._key() == other._key()

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash(self._key())


NO_EMBEDDING = BitPlan(use_sign=False, fraction=False)
SIGN_ONLY = BitPlan(use_sign=True, fraction=False)

_RANGE = re.compile(r'^(\d+)\s*[:,]\s*(\d+)$')


def parse_plan(text):
    """Parse ``"S"``, ``"S,14,22"``, ``"S, 0:22"``, ``"14:22"``, ``"none"``."""
    text = (text or '').strip()
    if text.lower() in ('', 'none', '0'):
        return NO_EMBEDDING
    use_sign = False
    head, _, rest = text.partition(',')
    if head.strip().upper() in ('S', 'SIGN'):
        use_sign = True
        text = rest.strip()
    if not text:
        return SIGN_ONLY
    match = _RANGE.match(text)
    if not match:
        raise exceptions.ConfigError("cannot parse plan %r" % text)
    return BitPlan(use_sign, int(match.group(1)), int(match.group(2)))


def count_floats(latent_dims):
    """Floats in a latent given as a count or a list of level shapes."""
    if isinstance(latent_dims, (int, np.integer)):
        return int(latent_dims)
    return int(sum(np.prod(shape) for shape in latent_dims))


def plan_capacity(plan, latent_dims, image_dims):
    """Return (total payload bits, bits per pixel) for one latent."""
    height, width = image_dims[:2]
    total = count_floats(latent_dims) * plan.bits_per_float
    return total, total / float(height * width)
