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

import json
import logging
import os

import numpy as np

from gsflow.autodiff import no_grad
from gsflow.channel import experiments
from gsflow.channel import images as image_io
from gsflow.channel import pipeline
from gsflow.channel import steganalysis
from gsflow.codec import embedding
from gsflow.codec import latent_io
from gsflow.codec import plan as plan_mod
from gsflow import exceptions
from gsflow.flow import checkpoint
from gsflow.flow.model import FlowModel
from gsflow.flow.model import to_model_domain
from gsflow.latent import assessor as assessor_mod
from gsflow.latent import optimizer
from gsflow.training import datasets
from gsflow.training import trainer
from gsflow import utils

LOG = logging.getLogger(__name__)

METADATA_SUFFIX = '.json'


# MODEL MANAGEMENT
def model_create(config):
    """Create an untrained flow."""
    return FlowModel(**config.model_kwargs())


def model_load(path):
    """Load a flow checkpoint."""
    if not os.path.exists(path):
        raise exceptions.ConfigError("checkpoint %s does not exist" % path)
    return checkpoint.load(path)


def model_save(model, path):
    """Save a flow checkpoint."""
    checkpoint.save(model, path)


# TRAINING
def dataset_load(config):
    """Load the configured dataset at the configured dims."""
    if not config.dataset:
        raise exceptions.ConfigError("a dataset path is required")
    if (not config.dataset.startswith(datasets.SYNTHETIC_PREFIX) and
            not os.path.isdir(config.dataset)):
        raise exceptions.ConfigError("dataset %s does not exist"
                                     % config.dataset)
    return datasets.ingest_images(config.dataset,
                                  (config.height, config.width),
                                  config.eval_fraction)


def model_train(config, dataset, checkpoint_path=None):
    """Train a new flow on ``dataset``."""
    model = model_create(config)
    return trainer.train(model, dataset, config.train_config(),
                         checkpoint_path)


# LATENT SEARCH
def assessor_train(config, model, dataset):
    """Train the quality assessor on real vs flow-generated images."""
    generated = assessor_mod.generated_dataset(model, config.generated,
                                               config.delta, config.seed)
    return assessor_mod.train_assessor(dataset, generated,
                                       epochs=config.assessor_epochs,
                                       seed=config.seed)


def assessor_load(path):
    """Load an assessor checkpoint."""
    return assessor_mod.load(path)


def assessor_save(assessor, path):
    """Save an assessor checkpoint."""
    assessor_mod.save(assessor, path)


def latent_optimize(config, model, assessor, dataset):
    """Run the latent search once per restart."""
    real = to_model_domain(dataset.split(datasets.TRAIN))
    return optimizer.optimize_restarts(model, assessor, real,
                                       config.opt_config(), config.restarts)


def latent_load(path):
    """Load a latent file."""
    return latent_io.load(path)


def latent_save(latent, path):
    """Save a latent file."""
    latent_io.save(latent, path)


def latent_sample(config, model, seed=None):
    """Draw a batch-1 latent at the configured temperature."""
    latent, _ = model.sample(config.delta, n=1,
                             seed=config.seed if seed is None else seed)
    return latent


# EMBEDDING
def payload_load(path, nbits=None):
    """Read a payload file (and its bit-length sidecar)."""
    if not os.path.exists(path):
        raise exceptions.ConfigError("payload %s does not exist" % path)
    return embedding.load_payload(path, nbits)


def payload_save(payload, path):
    """Write a payload file and its bit-length sidecar."""
    embedding.save_payload(path, payload)


def metadata_path(image_path):
    return image_path + METADATA_SUFFIX


def metadata_load(image_path, path=None):
    """Read the metadata written next to a stego image."""
    path = path or metadata_path(image_path)
    if not os.path.exists(path):
        raise exceptions.ConfigError(
            "metadata %s not found; the payload length in bits is required "
            "to extract" % path)
    with open(path) as handle:
        return json.load(handle)


def stego_create(config, model, latent, payload, image_path):
    """Embed, generate, save through the configured channel.

    Returns the metadata written next to the image.
    """
    plan = config.plan
    bits_total, _ = plan_mod.plan_capacity(plan, latent.shapes,
                                           model.image_shape)
    stego = embedding.embed(latent, payload, plan)
    with no_grad():
        image = model.inverse(stego).data
    received = pipeline.apply_channel(image, config.channel)
    image_io.save_image(image_path, received)

    height, width = model.image_shape[:2]
    metadata = {
        'plan': plan.descriptor,
        'payload_bits': len(payload),
        'capacity_bits': bits_total,
        'bpp': len(payload) / float(height * width),
        'channel': config.channel,
        'height': height,
        'width': width,
    }
    utils.atomic_write(metadata_path(image_path),
                       json.dumps(metadata, indent=2, sort_keys=True) + '\n')
    LOG.info("Stego image %s carries %d bits (%.3f bpp)", image_path,
             len(payload), metadata['bpp'])
    return metadata


def stego_extract(model, image_path, metadata, plan=None):
    """Recover the payload from a stego image."""
    image = image_io.load_image(image_path)
    if tuple(image.shape[1:]) != model.image_shape:
        raise exceptions.ShapeError('extract', image.shape[1:],
                                    model.image_shape)
    plan = plan or plan_mod.parse_plan(metadata['plan'])
    with no_grad():
        latent, _ = model.forward(image)
    return embedding.extract(latent, plan, int(metadata['payload_bits']))


# EVALUATION
def table_run(config, model, optimized=None):
    """Acc table over the default plans, both channels and each source."""
    plans = list(experiments.DEFAULT_PLANS)
    if config.plan.descriptor not in [plan_mod.parse_plan(p).descriptor
                                      for p in plans]:
        plans.append(config.plan)
    sources = [experiments.RANDOM]
    if optimized is not None:
        sources.append(experiments.OPTIMIZED)
    return experiments.run_table(model, plans, pipeline.CHANNELS,
                                 config.trials, config.seed, config.delta,
                                 sources, optimized)


def planes_run(config, model):
    """Per-bit-plane agreement profile for each channel."""
    return {channel: experiments.plane_profile(model, channel,
                                               config.trials, config.seed,
                                               config.delta)
            for channel in pipeline.CHANNELS}


def steganalysis_images(config, model):
    """Paired (cover, stego) image sets through the configured channel."""
    covers, stegos = [], []
    for i in range(config.steganalysis_images):
        latent = latent_sample(config, model, config.seed + i)
        bits_total, _ = plan_mod.plan_capacity(config.plan, latent.shapes,
                                               model.image_shape)
        payload = embedding.random_payload(bits_total, config.seed + i)
        stego = embedding.embed(latent, payload, config.plan)
        with no_grad():
            covers.append(pipeline.apply_channel(model.inverse(latent),
                                                 config.channel))
            stegos.append(pipeline.apply_channel(model.inverse(stego),
                                                 config.channel))
    return np.concatenate(covers), np.concatenate(stegos)


def steganalysis_run(config, model):
    """Train the stand-in steganalyzer and report its held-out PE."""
    cover, stego = steganalysis_images(config, model)
    analyzer = steganalysis.train_steganalyzer(cover, stego, config.seed)
    return steganalysis.pe(analyzer), len(analyzer.heldout_cover)
