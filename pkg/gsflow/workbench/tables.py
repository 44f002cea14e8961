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

"""CSV artifacts. Every file has a header row and a fixed column order."""

import csv
import logging

from gsflow import utils

LOG = logging.getLogger(__name__)

LOSS_COLUMNS = ('epoch', 'step', 'nll_bits_per_dim')
TRACE_COLUMNS = ('step', 'diff', 'score_gen')
TABLE_COLUMNS = ('plan', 'bpp', 'acc_mean', 'acc_std', 'channel', 'trials',
                 'source')
ROC_COLUMNS = ('fpr', 'tpr', 'threshold')
PE_COLUMNS = ('pe', 'threshold', 'auc', 'cover', 'stego', 'plan', 'channel')
PLANE_COLUMNS = ('channel', 'plane', 'agreement')


def fmt(value):
    """Render one cell; None becomes an empty cell."""
    if value is None:
        return ''
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path, columns, rows):
    with utils.atomic_open(path, 'w') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(columns)
        for row in rows:
            writer.writerow([fmt(row[c] if isinstance(row, dict)
                                 else getattr(row, c)) for c in columns])
    LOG.info("Wrote %s", path)
    return path


def read_csv(path):
    with open(path, newline='') as handle:
        return list(csv.DictReader(handle))


def write_loss_curve(path, curve):
    return write_csv(path, LOSS_COLUMNS, curve)


def write_trace(path, trace):
    return write_csv(path, TRACE_COLUMNS, trace)


def write_table(path, rows):
    return write_csv(path, TABLE_COLUMNS, rows)


def write_roc(path, report):
    fpr, tpr, thresholds = report.roc
    rows = [{'fpr': float(f), 'tpr': float(t), 'threshold': float(h)}
            for f, t, h in zip(fpr, tpr, thresholds)]
    return write_csv(path, ROC_COLUMNS, rows)


def write_pe(path, report, cover, stego, plan, channel):
    row = {'pe': report.pe, 'threshold': report.threshold,
           'auc': report.auc, 'cover': cover, 'stego': stego,
           'plan': plan, 'channel': channel}
    return write_csv(path, PE_COLUMNS, [row])


def write_planes(path, profiles, labels):
    """``profiles`` maps channel -> agreement array in ``labels`` order."""
    rows = []
    for channel in sorted(profiles):
        for label, value in zip(labels, profiles[channel]):
            rows.append({'channel': channel, 'plane': label,
                         'agreement': float(value)})
    return write_csv(path, PLANE_COLUMNS, rows)
