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

"""IEEE-754 binary32 words: bit 31 sign, 30..23 exponent, 22..0 fraction."""

import numpy as np

from gsflow import exceptions

SIGN_BIT = 31
FRACTION_BITS = 23
MAX_FRACTION_BIT = 22
EXPONENT_MASK = np.uint32(0x7F800000)
SIGN_MASK = np.uint32(0x80000000)
FRACTION_MASK = np.uint32(0x007FFFFF)


def float_to_bits(values):
    """Reinterpret finite float32 ``values`` as uint32 words (a copy)."""
    values = np.array(values, dtype=np.float32)
    if not np.all(np.isfinite(values)):
        raise exceptions.NonFiniteError('float_to_bits')
    return values.view(np.uint32).copy()


def bits_to_float(words):
    return np.array(words, dtype=np.uint32).view(np.float32).copy()


def split_fields(words):
    """Return (sign, exponent, fraction) arrays of the given words."""
    words = np.asarray(words, dtype=np.uint32)
    return (words >> np.uint32(SIGN_BIT),
            (words & EXPONENT_MASK) >> np.uint32(FRACTION_BITS),
            words & FRACTION_MASK)


def bit_planes(words, positions):
    """Bits of ``words`` at ``positions`` as a (len(words), P) uint8 array."""
    words = np.asarray(words, dtype=np.uint32).reshape(-1, 1)
    shifts = np.asarray(positions, dtype=np.uint32).reshape(1, -1)
    return ((words >> shifts) & np.uint32(1)).astype(np.uint8)
