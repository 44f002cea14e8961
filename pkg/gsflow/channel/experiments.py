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

"""Experiment tables: mean Acc per (plan, channel, latent source)."""

import logging

import numpy as np

from gsflow.channel import pipeline
from gsflow.codec import embedding
from gsflow.codec import plan as plan_mod
from gsflow import exceptions

LOG = logging.getLogger(__name__)

RANDOM = 'random'
OPTIMIZED = 'optimized'

DEFAULT_PLANS = ('none', 'S', 'S,22,22', 'S,21,22', 'S,12,22', 'S,0,22',
                 '22,22', '14,22', '7,22', '0,22')


class ExperimentRow(object):

    def __init__(self, plan, bpp, acc_mean, acc_std, channel, trials,
                 source):
        self.plan = plan
        self.bpp = bpp
        self.acc_mean = acc_mean
        self.acc_std = acc_std
        self.channel = channel
        self.trials = trials
        self.source = source

    def __repr__(self):
        return ("ExperimentRow(plan=%r, channel=%r, source=%r, bpp=%r, "
                "acc_mean=%r)" % (self.plan, self.channel, self.source,
                                  self.bpp, self.acc_mean))


def _source_latent(model, source, trial, seed, delta, optimized):
    if source == OPTIMIZED:
        return optimized
    latent, _ = model.sample(delta, n=1, seed=seed + trial)
    return latent


def run_table(model, plans=DEFAULT_PLANS, channels=pipeline.CHANNELS,
              trials=32, seed=0, delta=0.7, sources=(RANDOM,),
              optimized=None):
    """Return one :class:`ExperimentRow` per (plan, channel, source).

    Trial ``t`` of every row draws its payload with seed ``seed + t``, so
    rows sharing a source are paired trial by trial. The "optimized" source
    reuses the latent in ``optimized`` for every trial.
    """
    plans = [plan_mod.parse_plan(p) if isinstance(p, str) else p
             for p in plans]
    if OPTIMIZED in sources and optimized is None:
        raise exceptions.ConfigError(
            "an optimized latent is required for source %r" % OPTIMIZED)
    rows = []
    for plan in plans:
        bits_total, bpp = plan_mod.plan_capacity(
            plan, model.latent_shapes(), model.image_shape)
        for channel in channels:
            for source in sources:
                accs = []
                if bits_total:
                    for t in range(trials):
                        latent = _source_latent(model, source, t, seed,
                                                delta, optimized)
                        payload = embedding.random_payload(bits_total,
                                                           seed + t)
                        accs.append(pipeline.roundtrip(
                            model, latent, payload, plan, channel).acc)
                row = ExperimentRow(
                    plan.descriptor, bpp,
                    float(np.mean(accs)) if accs else None,
                    float(np.std(accs)) if accs else None,
                    channel, trials, source)
                LOG.info("%s", row)
                rows.append(row)
    return rows


def plane_profile(model, channel, trials=32, seed=0, delta=0.7):
    """Mean per-plane agreement between sampled latents and the latents
    recovered from their images after ``channel``, with no embedding.
    """
    profile = np.zeros(len(pipeline.PLANES))
    for t in range(trials):
        latent, _ = model.sample(delta, n=1, seed=seed + t)
        result = pipeline.roundtrip(model, latent, embedding.Payload([]),
                                    plan_mod.NO_EMBEDDING, channel)
        profile += pipeline.plane_agreement(latent,
                                            result.recovered_latent)
    return profile / trials
