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

"""Central finite-difference checks for recorded gradients.

Checks run in float64 so the comparison measures the backward rules and not
float32 cancellation in the difference quotient.
"""

import numpy as np

from gsflow.autodiff.tape import no_grad
from gsflow.autodiff.tape import Tape
from gsflow.autodiff.tensor import Tensor


def relative_error(analytic, numeric, floor=1e-3):
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric) / scale))


def numeric_grad(fn, arrays, index, h=1e-6, coords=None):
    """Central difference of scalar ``fn`` w.r.t. ``arrays[index]``."""
    target = arrays[index]
    grad = np.zeros_like(target)
    flat = target.reshape(-1)
    positions = range(flat.size) if coords is None else coords
    with no_grad():
        for pos in positions:
            saved = flat[pos]
            flat[pos] = saved + h
            upper = float(fn(*[Tensor(a, dtype=np.float64)
                               for a in arrays]).item())
            flat[pos] = saved - h
            lower = float(fn(*[Tensor(a, dtype=np.float64)
                               for a in arrays]).item())
            flat[pos] = saved
            grad.reshape(-1)[pos] = (upper - lower) / (2 * h)
    return grad


def analytic_grads(fn, arrays):
    tensors = [Tensor(a, requires_grad=True, dtype=np.float64)
               for a in arrays]
    with Tape():
        out = fn(*tensors)
    out.backward()
    return [t.grad if t.grad is not None else np.zeros_like(t.data)
            for t in tensors]


def gradcheck(fn, arrays, h=1e-6, coords=None):
    """Return the worst relative error over every input of ``fn``.

    ``coords`` optionally restricts the numeric side to a subset of flat
    positions (applied to every input).
    """
    arrays = [np.array(a, dtype=np.float64) for a in arrays]
    analytic = analytic_grads(fn, arrays)
    worst = 0.0
    for i, grad in enumerate(analytic):
        numeric = numeric_grad(fn, arrays, i, h=h, coords=coords)
        if coords is not None:
            grad = grad.reshape(-1)[list(coords)]
            numeric = numeric.reshape(-1)[list(coords)]
        worst = max(worst, relative_error(grad, numeric))
    return worst
