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

import logging
import sys

from django.core.management.base import CommandError

LOG = logging.getLogger(__name__)

USAGE_EXIT = 2
RUNTIME_EXIT = 1


class GsflowException(Exception):
    """Base exception for every error raised by gsflow."""


class ShapeError(GsflowException):
    def __init__(self, op, *dims):
        self.op = op
        self.dims = dims
        shapes = ", ".join(str(tuple(d)) for d in dims)
        super(ShapeError, self).__init__(
            "%s: incompatible dims %s" % (op, shapes))


class NonFiniteError(GsflowException):
    def __init__(self, where, name=None):
        self.where = where
        self.name = name
        msg = "non-finite value in %s" % where
        if name:
            msg += " (%s)" % name
        super(NonFiniteError, self).__init__(msg)


class TapeError(GsflowException):
    pass


class CapacityError(GsflowException):
    def __init__(self, requested, capacity):
        self.requested = requested
        self.capacity = capacity
        super(CapacityError, self).__init__(
            "payload of %d bits exceeds capacity of %d bits"
            % (requested, capacity))


class CheckpointError(GsflowException):
    pass


class DatasetError(GsflowException):
    def __init__(self, message, offenders=()):
        self.offenders = list(offenders)
        if self.offenders:
            message = "%s: %s" % (message, ", ".join(self.offenders))
        super(DatasetError, self).__init__(message)


class TrainingError(GsflowException):
    pass


class ConfigError(GsflowException):
    pass


def handle(message):
    """Turn the exception being handled into a CommandError.

    Must be called from inside an ``except`` block.
    """
    exc_type, exc_value, exc_tb = sys.exc_info()
    if exc_value is None:
        raise CommandError(message, returncode=RUNTIME_EXIT)

    if isinstance(exc_value, ConfigError):
        LOG.debug("Usage error: %s", exc_value)
        raise CommandError("%s %s" % (message, exc_value),
                           returncode=USAGE_EXIT) from exc_value

    if isinstance(exc_value, GsflowException):
        LOG.exception(message)
        raise CommandError("%s %s" % (message, exc_value),
                           returncode=RUNTIME_EXIT) from exc_value

    raise exc_value
