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

"""Operation tape for reverse-mode differentiation.

Operations are recorded only while a :class:`Tape` is entered as a context
manager on the current thread. The tape belongs to that thread and is
consumed by a single ``backward`` call.
"""

import collections
import contextlib
import logging
import threading

import numpy as np

from gsflow import exceptions

LOG = logging.getLogger(__name__)

_local = threading.local()

Record = collections.namedtuple('Record', ['function', 'inputs', 'output_id'])


def _stack():
    if not hasattr(_local, 'stack'):
        _local.stack = []
    return _local.stack


def current():
    """Return the tape recording on this thread, or None."""
    stack = _stack()
    return stack[-1] if stack else None


@contextlib.contextmanager
def no_grad():
    """Suspend recording inside the block."""
    stack = _stack()
    stack.append(None)
    try:
        yield
    finally:
        stack.pop()


class Tape(object):

    def __init__(self):
        self.records = []
        self.consumed = False

    def __enter__(self):
        _stack().append(self)
        return self

    def __exit__(self, exc_type, exc_value, tb):
        stack = _stack()
        if stack and stack[-1] is self:
            stack.pop()
        return False

    def __len__(self):
        return len(self.records)

    def record(self, function, inputs, output):
        if self.consumed:
            raise exceptions.TapeError(
                "cannot record %s on a tape that was already consumed"
                % type(function).__name__)
        self.records.append(Record(function, tuple(inputs), output.node_id))
        output.tape = self
        output.requires_grad = True

    def backward(self, loss):
        """Populate ``grad`` on every leaf reachable from ``loss``."""
        if loss.tape is not self:
            raise exceptions.TapeError(
                "loss was not recorded on this tape")
        if loss.data.size != 1:
            raise exceptions.ShapeError('backward', loss.shape)
        if self.consumed:
            raise exceptions.TapeError(
                "backward called twice without re-recording")
        self.consumed = True

        grads = {loss.node_id: np.ones_like(loss.data)}
        leaves = {}
        for record in reversed(self.records):
            grad = grads.pop(record.output_id, None)
            if grad is None:
                continue
            input_grads = record.function.backward(grad)
            for tensor, input_grad in zip(record.inputs, input_grads):
                if input_grad is None or not getattr(tensor, 'requires_grad',
                                                     False):
                    continue
                if input_grad.shape != tensor.shape:
                    raise exceptions.ShapeError(
                        type(record.function).__name__ + '.backward',
                        input_grad.shape, tensor.shape)
                if tensor.node_id in grads:
                    grads[tensor.node_id] = grads[tensor.node_id] + input_grad
                else:
                    grads[tensor.node_id] = input_grad
                if tensor.tape is not self:
                    leaves[tensor.node_id] = tensor

        for node_id, tensor in leaves.items():
            tensor.grad = np.asarray(grads[node_id], dtype=tensor.data.dtype)
        LOG.debug("Backward over %d records reached %d leaves",
                  len(self.records), len(leaves))
